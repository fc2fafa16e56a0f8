use serde::{Deserialize, Serialize};

use crate::anchor::MarkerId;
use crate::error::{Error, Result};
use crate::telemetry::ImuSample;

/// Slack applied to the dwell comparison so tick times built as `i * dt`
/// hit the threshold on the intended tick.
pub const DWELL_EPSILON: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GatingConfig {
    /// Continuous stationary time before the camera is enabled, s.
    pub dwell_threshold: f64,
    /// Enter-stationary variance bound, (m/s²)².
    pub stationary_var_max: f64,
    /// Leave-stationary variance bound, (m/s²)².
    pub resume_var_min: f64,
    /// Variance window, s.
    pub window: f64,
    /// PDR stride, m.
    pub stride_length: f64,
}

impl Default for GatingConfig {
    fn default() -> Self {
        Self { dwell_threshold: 1.0, stationary_var_max: 0.05, resume_var_min: 0.5, window: 0.5, stride_length: 0.4 }
    }
}

impl GatingConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dwell_threshold", self.dwell_threshold),
            ("stationary_var_max", self.stationary_var_max),
            ("resume_var_min", self.resume_var_min),
            ("window", self.window),
            ("stride_length", self.stride_length),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("gating.{name} must be finite and positive")));
            }
        }
        if self.resume_var_min <= self.stationary_var_max {
            return Err(Error::InvalidConfig("gating.resume_var_min must exceed gating.stationary_var_max".into()));
        }
        if self.window > self.dwell_threshold {
            return Err(Error::InvalidConfig("gating.window must not exceed gating.dwell_threshold".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum MotionState {
    Transit,
    Dwelling { since: f64 },
    Anchored { anchor: Option<MarkerId> },
}

impl MotionState {
    pub fn name(&self) -> &'static str {
        match self {
            MotionState::Transit => "Transit",
            MotionState::Dwelling { .. } => "Dwelling",
            MotionState::Anchored { .. } => "Anchored",
        }
    }

    pub fn is_anchored(&self) -> bool {
        matches!(self, MotionState::Anchored { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HardwareCommand {
    CameraEnable,
    CameraDisable,
}

/// Population variance of the accel magnitude.
///
/// Deviations are taken from the first sample, so a constant signal
/// yields exactly 0.
pub fn magnitude_variance(window: &[ImuSample]) -> f64 {
    let Some(first) = window.first() else { return 0.0 };
    let k = first.accel_magnitude();
    let n = window.len() as f64;
    let (mut s, mut s2) = (0.0, 0.0);
    for d in window.iter().map(|x| x.accel_magnitude() - k) {
        s += d;
        s2 += d * d;
    }
    ((s2 - s * s / n) / n).max(0.0)
}

/// Windowed zero-motion test with hysteresis. Only accelerometer data
/// enters the decision.
pub fn is_stationary(window: &[ImuSample], config: &GatingConfig, currently_stationary: bool) -> Result<bool> {
    let span = match (window.first(), window.last()) {
        (Some(a), Some(b)) => b.t - a.t,
        _ => 0.0,
    };
    if span < config.window - 1e-9 {
        return Err(Error::InsufficientData { have: span, need: config.window });
    }
    let var = magnitude_variance(window);
    Ok(if currently_stationary { var <= config.resume_var_min } else { var < config.stationary_var_max })
}

/// One synchronous tick of the stop-and-look machine.
pub fn step_state_machine(
    state: &MotionState,
    stationary: bool,
    now: f64,
    anchor_found: Option<MarkerId>,
    config: &GatingConfig,
) -> (MotionState, Vec<HardwareCommand>) {
    match (state, stationary) {
        (MotionState::Transit, true) => (MotionState::Dwelling { since: now }, vec![]),
        (MotionState::Transit, false) => (MotionState::Transit, vec![]),
        (MotionState::Dwelling { since }, true) => {
            if now - since + DWELL_EPSILON >= config.dwell_threshold {
                (MotionState::Anchored { anchor: None }, vec![HardwareCommand::CameraEnable])
            } else {
                (state.clone(), vec![])
            }
        }
        (MotionState::Dwelling { .. }, false) => (MotionState::Transit, vec![]),
        (MotionState::Anchored { .. }, false) => (MotionState::Transit, vec![HardwareCommand::CameraDisable]),
        (MotionState::Anchored { .. }, true) => match anchor_found {
            Some(id) => (MotionState::Anchored { anchor: Some(id) }, vec![]),
            None => (state.clone(), vec![]),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::telemetry::{synthesize_trace, GaitProfile, TraceSegmentSpec};

    fn cfg() -> GatingConfig {
        GatingConfig::default()
    }

    fn window_with_variance(target: f64) -> Vec<ImuSample> {
        // an even count of alternating ±d around g has population variance d²
        let d = target.sqrt();
        (0..52)
            .map(|i| ImuSample {
                t: i as f64 * 0.01,
                accel: [0.0, 0.0, 9.81 + if i % 2 == 0 { d } else { -d }],
                gyro: [0.0; 3],
            })
            .collect()
    }

    #[test]
    fn zero_noise_standing_is_stationary() {
        let s = synthesize_trace(&[TraceSegmentSpec::standing(0.6, 0.0, 100.0)], 0).unwrap();
        assert!(is_stationary(&s, &cfg(), false).unwrap());
    }

    #[test]
    fn zero_noise_walking_is_not() {
        let s = synthesize_trace(&[TraceSegmentSpec::walking(GaitProfile::default(), 0.6)], 0).unwrap();
        // Sinusoid of amplitude 3 over whole cycles has variance A²/2 = 4.5.
        let v = magnitude_variance(&s[..50]);
        assert!((v - 4.5).abs() < 1e-9, "{v}");
        assert!(!is_stationary(&s, &cfg(), false).unwrap());
        assert!(!is_stationary(&s, &cfg(), true).unwrap());
    }

    #[test]
    fn hysteresis_holds_between_thresholds() {
        let w = window_with_variance(0.2);
        assert!((magnitude_variance(&w) - 0.2).abs() < 1e-6);
        assert!(is_stationary(&w, &cfg(), true).unwrap());
        assert!(!is_stationary(&w, &cfg(), false).unwrap());
        let w = window_with_variance(0.8);
        assert!(!is_stationary(&w, &cfg(), true).unwrap());
    }

    #[test]
    fn short_window_is_insufficient() {
        let s = synthesize_trace(&[TraceSegmentSpec::standing(0.3, 0.0, 100.0)], 0).unwrap();
        assert!(matches!(is_stationary(&s, &cfg(), false), Err(Error::InsufficientData { .. })));
        assert!(is_stationary(&[], &cfg(), false).is_err());
    }

    #[test]
    fn transition_examples() {
        let c = cfg();
        assert_eq!(
            step_state_machine(&MotionState::Transit, true, 3.0, None, &c),
            (MotionState::Dwelling { since: 3.0 }, vec![])
        );
        assert_eq!(
            step_state_machine(&MotionState::Dwelling { since: 3.0 }, true, 4.0, None, &c),
            (MotionState::Anchored { anchor: None }, vec![HardwareCommand::CameraEnable])
        );
        assert_eq!(
            step_state_machine(&MotionState::Anchored { anchor: None }, false, 9.2, None, &c),
            (MotionState::Transit, vec![HardwareCommand::CameraDisable])
        );
    }

    #[test]
    fn dwell_boundary_on_tick_grid() {
        let c = cfg();
        let since = 300.0 * 0.01;
        let now = 400.0 * 0.01;
        let (s, cmds) = step_state_machine(&MotionState::Dwelling { since }, true, now, None, &c);
        assert!(s.is_anchored());
        assert_eq!(cmds, vec![HardwareCommand::CameraEnable]);
        let (s, _) = step_state_machine(&MotionState::Dwelling { since }, true, 399.0 * 0.01, None, &c);
        assert_eq!(s, MotionState::Dwelling { since });
    }

    #[test]
    fn anchor_is_recorded_without_command() {
        let id = MarkerId::from("A");
        let (s, cmds) =
            step_state_machine(&MotionState::Anchored { anchor: None }, true, 5.0, Some(id.clone()), &cfg());
        assert_eq!(s, MotionState::Anchored { anchor: Some(id) });
        assert!(cmds.is_empty());
    }

    #[test]
    fn config_validation() {
        assert!(cfg().validate().is_ok());
        let bad = GatingConfig { resume_var_min: 0.01, ..cfg() };
        assert!(bad.validate().is_err());
        let bad = GatingConfig { window: 2.0, ..cfg() };
        assert!(bad.validate().is_err());
        let bad = GatingConfig { stride_length: -1.0, ..cfg() };
        assert!(bad.validate().is_err());
    }
}
