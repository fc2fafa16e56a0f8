use std::collections::VecDeque;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::constants::GRAVITY;
use crate::error::{Error, Result};
use crate::telemetry::ImuSample;

/// Step detector and cadence parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepConfig {
    /// A peak must exceed g by this much, m/s².
    pub peak_threshold: f64,
    /// Minimum gap between consecutive steps, s.
    pub refractory: f64,
    /// Single-pole low-pass cutoff, Hz.
    pub cutoff_hz: f64,
    /// Trailing window for the cadence estimate, s.
    pub cadence_window: f64,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self { peak_threshold: 1.0, refractory: 0.25, cutoff_hz: 5.0, cadence_window: 2.0 }
    }
}

impl StepConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.peak_threshold.is_finite()
            && self.peak_threshold >= 0.0
            && self.refractory.is_finite()
            && self.refractory >= 0.0
            && self.cutoff_hz.is_finite()
            && self.cutoff_hz > 0.0
            && self.cadence_window.is_finite()
            && self.cadence_window > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig("steps: thresholds must be finite, cutoff and cadence_window positive".into()))
        }
    }
}

/// Streaming step detector over the low-pass filtered accel magnitude.
///
/// A step is reported one sample late, when the sample after a local
/// maximum confirms it.
#[derive(Clone, Debug)]
pub struct StepDetector {
    cfg: StepConfig,
    filtered: Option<(f64, f64)>,
    prev: Option<(f64, f64)>,
    last_step: Option<f64>,
}

impl StepDetector {
    pub fn new(cfg: StepConfig) -> Self {
        Self { cfg, filtered: None, prev: None, last_step: None }
    }

    /// Feeds one sample; returns the time of a newly confirmed step.
    pub fn push(&mut self, sample: &ImuSample) -> Option<f64> {
        let x = sample.accel_magnitude();
        let y = match self.filtered {
            None => x,
            Some((t0, y0)) => {
                let dt = sample.t - t0;
                let rc = 1.0 / (TAU * self.cfg.cutoff_hz);
                let alpha = dt / (rc + dt);
                y0 + alpha * (x - y0)
            }
        };
        let cur = (sample.t, y);
        let mut step = None;
        if let (Some(a), Some(b)) = (self.prev, self.filtered) {
            let is_peak = a.1 < b.1 && b.1 >= cur.1 && b.1 > GRAVITY + self.cfg.peak_threshold;
            let clear = self.last_step.is_none_or(|last| b.0 - last >= self.cfg.refractory - 1e-9);
            if is_peak && clear {
                self.last_step = Some(b.0);
                step = Some(b.0);
            }
        }
        self.prev = self.filtered;
        self.filtered = Some(cur);
        step
    }
}

/// Step times in a window of samples (fresh detector state).
pub fn detect_steps(window: &[ImuSample], cfg: &StepConfig) -> Vec<f64> {
    if window.len() < 2 {
        return Vec::new();
    }
    let mut det = StepDetector::new(*cfg);
    window.iter().filter_map(|s| det.push(s)).collect()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CadenceEstimate {
    pub steps_per_second: f64,
    pub last_step_t: Option<f64>,
    pub step_count: u64,
    recent: VecDeque<f64>,
}

/// Folds new step times into the cadence estimate at time `now`.
pub fn update_cadence(mut est: CadenceEstimate, new_steps: &[f64], now: f64, window: f64) -> Result<CadenceEstimate> {
    if !now.is_finite() {
        return Err(Error::NonFinite("now"));
    }
    for &t in new_steps {
        if !t.is_finite() {
            return Err(Error::NonFinite("step time"));
        }
        if let Some(last) = est.last_step_t {
            if t < last {
                return Err(Error::OutOfOrderStep { t, last });
            }
        }
        if t > now {
            return Err(Error::ContractViolation(format!("step at {t} is after now = {now}")));
        }
        est.recent.push_back(t);
        est.last_step_t = Some(t);
        est.step_count += 1;
    }
    while est.recent.front().is_some_and(|&t| t <= now - window) {
        est.recent.pop_front();
    }
    est.steps_per_second = est.recent.len() as f64 / window;
    Ok(est)
}
