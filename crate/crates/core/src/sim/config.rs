use serde::{Deserialize, Serialize};

use crate::anchor::{AnchorMarker, TrackingModel};
use crate::constants::DEFAULT_V_EPS;
use crate::error::{Error, Result};
use crate::guidance::GuidanceConfig;
use crate::locomotion::{GatingConfig, StepConfig};
use crate::waypoints::Planner;

use super::behavior::MotionProfile;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    #[default]
    AnchorPlay,
    BaselineAlwaysOn,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "AnchorPlay" => Ok(Mode::AnchorPlay),
            "BaselineAlwaysOn" => Ok(Mode::BaselineAlwaysOn),
            other => Err(Error::InvalidConfig(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Room {
    pub width: f64,
    pub height: f64,
}

impl Default for Room {
    fn default() -> Self {
        Self { width: 8.0, height: 6.0 }
    }
}

impl Room {
    pub fn contains(&self, p: crate::Vec2) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }
}

/// IMU synthesis parameters for simulated agents.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImuConfig {
    /// Gait bounce amplitude, m/s².
    pub accel_amplitude: f64,
    pub accel_noise: f64,
    pub gyro_noise: f64,
}

impl Default for ImuConfig {
    fn default() -> Self {
        Self { accel_amplitude: 3.0, accel_noise: 0.05, gyro_noise: 0.01 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrowdingConfig {
    pub crowd_radius: f64,
    pub contact_radius: f64,
}

impl Default for CrowdingConfig {
    fn default() -> Self {
        Self { crowd_radius: 1.0, contact_radius: 0.4 }
    }
}

/// Declarative description of one simulation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub mode: Mode,
    pub planner: Planner,
    pub n_agents: usize,
    pub path_length: usize,
    pub tick_dt: f64,
    pub duration: f64,
    /// Ground-truth speed tolerance for the exclusion invariant, m/s.
    pub v_eps: f64,
    /// Radius of the camera's localized marker search, m.
    pub search_radius: f64,
    /// Emit a per-tick `Snapshot` event with positions and speeds.
    pub record_snapshots: bool,
    pub room: Room,
    pub markers: Vec<AnchorMarker>,
    pub motion: MotionProfile,
    pub imu: ImuConfig,
    pub gating: GatingConfig,
    pub steps: StepConfig,
    pub guidance: GuidanceConfig,
    pub tracking: TrackingModel,
    pub crowding: CrowdingConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::standard()
    }
}

impl ScenarioConfig {
    /// Four agents, six markers, 300 s at 100 Hz in an 8 m x 6 m room.
    pub fn standard() -> Self {
        let markers = vec![
            AnchorMarker::new("A", 1.5, 1.5, 0.5),
            AnchorMarker::new("B", 4.0, 1.0, 0.5),
            AnchorMarker::new("C", 6.5, 1.5, 0.5),
            AnchorMarker::new("D", 1.5, 4.5, 0.5),
            AnchorMarker::new("E", 4.0, 5.0, 0.5),
            AnchorMarker::new("F", 6.5, 4.5, 0.5),
        ];
        Self {
            seed: 1,
            mode: Mode::AnchorPlay,
            planner: Planner::Distributed,
            n_agents: 4,
            path_length: 6,
            tick_dt: 0.01,
            duration: 300.0,
            v_eps: DEFAULT_V_EPS,
            search_radius: 1.0,
            record_snapshots: true,
            room: Room::default(),
            markers,
            motion: MotionProfile::default(),
            imu: ImuConfig::default(),
            gating: GatingConfig::default(),
            steps: StepConfig::default(),
            guidance: GuidanceConfig::default(),
            tracking: TrackingModel::default(),
            crowding: CrowdingConfig::default(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn n_ticks(&self) -> u64 {
        (self.duration / self.tick_dt).round() as u64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.tick_dt.is_finite() && self.tick_dt > 0.0) {
            return bad("tick_dt must be positive".into());
        }
        if !(self.duration.is_finite() && self.duration >= self.tick_dt) {
            return bad("duration must be at least tick_dt".into());
        }
        if self.n_agents == 0 {
            return bad("n_agents must be at least 1".into());
        }
        if self.n_agents > self.markers.len() {
            return bad(format!(
                "n_agents ({}) must not exceed the number of markers ({})",
                self.n_agents,
                self.markers.len()
            ));
        }
        if self.path_length == 0 {
            return bad("path_length must be at least 1".into());
        }
        if self.markers.len() < 2 {
            return bad("at least 2 markers are required".into());
        }
        if !(self.room.width.is_finite()
            && self.room.width > 0.0
            && self.room.height.is_finite()
            && self.room.height > 0.0)
        {
            return bad("room dimensions must be positive".into());
        }
        let mut ids: Vec<_> = self.markers.iter().map(|m| &m.id).collect();
        ids.sort();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return bad("marker ids must be unique".into());
        }
        for m in &self.markers {
            if !self.room.contains(m.position) {
                return bad(format!("marker {} lies outside the room", m.id));
            }
            if !(m.detect_radius.is_finite() && m.detect_radius > 0.0) {
                return bad(format!("marker {} needs a positive detect_radius", m.id));
            }
        }
        if !(self.v_eps.is_finite() && self.v_eps >= 0.0) {
            return bad("v_eps must be non-negative".into());
        }
        if !(self.search_radius.is_finite() && self.search_radius > 0.0) {
            return bad("search_radius must be positive".into());
        }
        if !(self.crowding.crowd_radius > 0.0 && self.crowding.contact_radius > 0.0) {
            return bad("crowding radii must be positive".into());
        }
        let imu = [self.imu.accel_amplitude, self.imu.accel_noise, self.imu.gyro_noise];
        if imu.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return bad("imu parameters must be finite and non-negative".into());
        }
        if self.gating.window < self.tick_dt {
            return bad("gating.window must cover at least one tick".into());
        }
        self.motion.validate()?;
        self.gating.validate()?;
        self.steps.validate()?;
        self.guidance.validate()?;
        self.tracking.validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_is_valid_and_round_trips_toml() {
        let c = ScenarioConfig::standard();
        c.validate().unwrap();
        assert_eq!(c.n_ticks(), 30_000);
        let text = toml::to_string(&c).unwrap();
        let back: ScenarioConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn too_many_agents_names_constraint() {
        let c = ScenarioConfig { n_agents: 7, ..ScenarioConfig::standard() };
        let msg = c.validate().unwrap_err().to_string();
        assert!(msg.contains("n_agents"), "{msg}");
        assert!(msg.contains("markers"), "{msg}");
    }

    #[test]
    fn partial_toml_takes_defaults() {
        let c: ScenarioConfig =
            toml::from_str("seed = 5\nmode = \"BaselineAlwaysOn\"\n[motion]\nspeed_mean = 1.0\n").unwrap();
        assert_eq!(c.seed, 5);
        assert_eq!(c.mode, Mode::BaselineAlwaysOn);
        assert_eq!(c.motion.speed_mean, 1.0);
        assert_eq!(c.markers.len(), 6);
        assert!(toml::from_str::<ScenarioConfig>("sede = 5").is_err());
    }

    #[test]
    fn rejects_marker_outside_room() {
        let mut c = ScenarioConfig::standard();
        c.markers[0].position = crate::Vec2::new(20.0, 1.0);
        assert!(c.validate().is_err());
    }
}
