//! Locomotion-gated AR interaction pipeline.
//!
//! IMU telemetry drives a stop-and-look state machine that keeps the camera
//! off while a child is moving, a spatial audio engine steers transit, the
//! anchor phase runs only while stationary, and distributed waypoints keep
//! agents apart. The [`sim`] module runs all of it in a deterministic
//! multi-agent classroom against an always-on baseline, and [`audit`]
//! re-checks the resulting event logs independently.

pub mod anchor;
pub mod audit;
pub mod constants;
pub mod error;
pub mod geom;
pub mod guidance;
pub mod locomotion;
pub mod sim;
pub mod telemetry;
pub mod waypoints;

pub use error::{Error, Result};
pub use geom::Vec2;
