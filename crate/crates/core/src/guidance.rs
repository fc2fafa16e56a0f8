//! Spatial audio engine: turns the dead-reckoned pose and the current
//! waypoint into cue parameters. Nothing here renders sound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{normalize_angle, Vec2};
use crate::locomotion::{MotionState, PoseEstimate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CuePhase {
    Guide,
    Arrived,
    LookPrompt,
    Muted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AudioCue {
    /// Target bearing relative to heading, (−π, π].
    pub azimuth: f64,
    pub distance: f64,
    /// Cues per second.
    pub tempo: f64,
    pub phase: CuePhase,
}

impl AudioCue {
    pub fn muted() -> Self {
        Self { azimuth: 0.0, distance: 0.0, tempo: 1.0, phase: CuePhase::Muted }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GuidanceConfig {
    pub arrival_radius: f64,
    pub tempo_min: f64,
    pub tempo_max: f64,
    /// Distance at and beyond which tempo bottoms out at `tempo_min`.
    pub tempo_range: f64,
}

impl Default for GuidanceConfig {
    fn default() -> Self {
        Self { arrival_radius: 0.5, tempo_min: 1.0, tempo_max: 4.0, tempo_range: 6.0 }
    }
}

impl GuidanceConfig {
    pub fn validate(&self) -> Result<()> {
        let finite =
            [self.arrival_radius, self.tempo_min, self.tempo_max, self.tempo_range].iter().all(|v| v.is_finite());
        if !finite || self.arrival_radius <= 0.0 || self.tempo_range <= 0.0 {
            return Err(Error::InvalidConfig("guidance: radii must be finite and positive".into()));
        }
        if !(0.0 < self.tempo_min && self.tempo_min < self.tempo_max) {
            return Err(Error::InvalidConfig("guidance: need 0 < tempo_min < tempo_max".into()));
        }
        Ok(())
    }

    /// Linear in distance: `tempo_max` at 0, `tempo_min` from `tempo_range` on.
    pub fn tempo_at(&self, distance: f64) -> f64 {
        let frac = (distance / self.tempo_range).clamp(0.0, 1.0);
        self.tempo_max - (self.tempo_max - self.tempo_min) * frac
    }
}

pub fn compute_cue(pose: &PoseEstimate, target: Vec2, state: &MotionState, config: &GuidanceConfig) -> AudioCue {
    let to_target = target - pose.position;
    let distance = to_target.norm();
    let azimuth = if distance > 0.0 { normalize_angle(to_target.angle() - pose.heading) } else { 0.0 };
    let phase = if state.is_anchored() {
        CuePhase::LookPrompt
    } else if distance <= config.arrival_radius {
        CuePhase::Arrived
    } else {
        CuePhase::Guide
    };
    AudioCue { azimuth, distance, tempo: config.tempo_at(distance), phase }
}

/// Whether a cue is due at `now` given the previous emission time.
pub fn cue_schedule(cue: &AudioCue, now: f64, last_emit: Option<f64>) -> bool {
    if cue.phase == CuePhase::Muted {
        return false;
    }
    match last_emit {
        None => true,
        // slack so a 0.25 s period lands on a 0.01 s tick grid
        Some(last) => now - last + 1e-9 >= 1.0 / cue.tempo,
    }
}
