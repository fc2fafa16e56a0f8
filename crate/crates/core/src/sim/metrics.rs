use serde::{Deserialize, Serialize};

use crate::waypoints::CrowdingReport;

use super::config::Mode;

/// Safety, privacy, tracking and crowding outcomes of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimMetrics {
    pub mode: Mode,
    pub seed: u64,
    /// Fraction of agent-ticks with the camera enabled.
    pub camera_duty_cycle: f64,
    pub camera_on_ticks: u64,
    pub agent_ticks: u64,
    /// Agent-ticks with the camera on while ground-truth speed exceeded v_eps.
    pub exclusion_violations: u64,
    pub tracking_loss_events: u64,
    pub rewards_collected: u64,
    /// Mean time for agents to finish their first path; `None` if none did.
    pub mean_completion_time: Option<f64>,
    pub agents_completed: usize,
    pub min_rewards_per_agent: u64,
    pub search_misses: u64,
    /// Tracking initializations attempted while not stationary.
    pub moving_tracking_inits: u64,
    pub near_collision_count: u64,
    pub crowding: CrowdingReport,
}
