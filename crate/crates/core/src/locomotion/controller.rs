use std::collections::VecDeque;

use crate::anchor::MarkerId;
use crate::error::{Error, Result};
use crate::telemetry::ImuSample;

use super::gating::{
    is_stationary, magnitude_variance, step_state_machine, GatingConfig, HardwareCommand, MotionState,
};
use super::pdr::{pdr_update, PoseEstimate};
use super::steps::{update_cadence, CadenceEstimate, StepConfig, StepDetector};

/// What the controller saw in one IMU sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub steps: Vec<f64>,
    /// `None` until the window has filled.
    pub variance: Option<f64>,
    pub stationary: bool,
}

/// Per-agent locomotion controller: cadence monitor, trajectory
/// calculator and hardware toggler driven one sample per tick.
///
/// Call [`observe`](Self::observe) with the tick's sample, then
/// [`advance`](Self::advance) to run the state machine.
#[derive(Clone, Debug)]
pub struct LocomotionController {
    gating: GatingConfig,
    steps_cfg: StepConfig,
    buffer: VecDeque<ImuSample>,
    detector: StepDetector,
    cadence: CadenceEstimate,
    pose: PoseEstimate,
    stationary: bool,
    state: MotionState,
    camera_on: bool,
    last_t: Option<f64>,
}

impl LocomotionController {
    pub fn new(gating: GatingConfig, steps_cfg: StepConfig, initial_pose: PoseEstimate) -> Self {
        Self {
            gating,
            steps_cfg,
            buffer: VecDeque::new(),
            detector: StepDetector::new(steps_cfg),
            cadence: CadenceEstimate::default(),
            pose: initial_pose,
            stationary: false,
            state: MotionState::Transit,
            camera_on: false,
            last_t: None,
        }
    }

    pub fn state(&self) -> &MotionState {
        &self.state
    }

    pub fn pose(&self) -> &PoseEstimate {
        &self.pose
    }

    pub fn cadence(&self) -> &CadenceEstimate {
        &self.cadence
    }

    pub fn camera_on(&self) -> bool {
        self.camera_on
    }

    pub fn stationary(&self) -> bool {
        self.stationary
    }

    /// Overwrites the dead-reckoned position, e.g. after a marker fix.
    pub fn relocalize(&mut self, position: crate::Vec2) {
        self.pose.position = position;
    }

    pub fn observe(&mut self, sample: &ImuSample) -> Result<Observation> {
        if !sample.is_finite() {
            return Err(Error::NonFinite("imu sample"));
        }
        if self.last_t.is_some_and(|t| sample.t <= t) {
            return Err(Error::ContractViolation(format!("non-monotone sample time {}", sample.t)));
        }
        let dt = self.last_t.map_or(0.0, |t| sample.t - t);
        self.last_t = Some(sample.t);

        let steps: Vec<f64> = self.detector.push(sample).into_iter().collect();
        self.cadence =
            update_cadence(std::mem::take(&mut self.cadence), &steps, sample.t, self.steps_cfg.cadence_window)?;
        self.pose = pdr_update(
            self.pose,
            &steps,
            sample.gyro[2] * dt,
            self.cadence.steps_per_second,
            self.gating.stride_length,
        )?;

        self.buffer.push_back(*sample);
        while self.buffer.len() > 2 && self.buffer[1].t <= sample.t - self.gating.window + 1e-9 {
            self.buffer.pop_front();
        }
        let window = self.buffer.make_contiguous();
        let (variance, stationary) = match is_stationary(window, &self.gating, self.stationary) {
            Ok(s) => (Some(magnitude_variance(window)), s),
            Err(Error::InsufficientData { .. }) => (None, false),
            Err(e) => return Err(e),
        };
        self.stationary = stationary;
        Ok(Observation { steps, variance, stationary })
    }

    /// Runs the state machine on the last observation.
    pub fn advance(&mut self, now: f64, anchor_found: Option<MarkerId>) -> Vec<HardwareCommand> {
        let (next, cmds) = step_state_machine(&self.state, self.stationary, now, anchor_found, &self.gating);
        self.state = next;
        for c in &cmds {
            match c {
                HardwareCommand::CameraEnable => {
                    debug_assert!(!self.camera_on, "enable while enabled");
                    self.camera_on = true;
                }
                HardwareCommand::CameraDisable => {
                    debug_assert!(self.camera_on, "disable while disabled");
                    self.camera_on = false;
                }
            }
        }
        cmds
    }
}
