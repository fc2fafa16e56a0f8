//! The locomotion controller: cadence monitoring, step-and-heading dead
//! reckoning, stationarity detection, and the stop-and-look state machine
//! that toggles the camera.

mod controller;
mod gating;
mod pdr;
mod steps;

pub use controller::{LocomotionController, Observation};
pub use gating::{
    is_stationary, magnitude_variance, step_state_machine, GatingConfig, HardwareCommand, MotionState, DWELL_EPSILON,
};
pub use pdr::{pdr_update, PoseEstimate};
pub use steps::{detect_steps, update_cadence, CadenceEstimate, StepConfig, StepDetector};
