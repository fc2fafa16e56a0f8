//! Deterministic fixed-timestep classroom simulator.
//!
//! Agents walk, pause and dash between waypoints. Their ground-truth
//! motion is turned into IMU samples and the locomotion controller only
//! ever sees those samples; ground truth feeds invariant checks and
//! metrics.

mod behavior;
mod config;
mod events;
mod imu;
mod metrics;
mod run;

pub use behavior::{step_agent_behavior, AgentGroundTruth, BehaviorMode, MotionProfile};
pub use config::{CrowdingConfig, ImuConfig, Mode, Room, ScenarioConfig};
pub use events::{write_events, EventKind, SimEvent};
pub use imu::ImuSynthesizer;
pub use metrics::SimMetrics;
pub use run::{run_scenario, SimError, SimOutcome};

/// Derives an independent stream seed from a run seed.
pub(crate) fn stream_seed(seed: u64, agent: u64, stream: u64) -> u64 {
    // splitmix64 finalizer over a combined key
    let mut z = seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(agent.wrapping_mul(0xBF58_476D_1CE4_E5B9))
        .wrapping_add(stream.wrapping_mul(0x94D0_49BB_1331_11EB));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
