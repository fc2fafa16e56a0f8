use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{normalize_angle, Vec2};

use super::config::Room;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BehaviorMode {
    Walk,
    Pause,
    Dash,
}

/// Erratic-child motion parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotionProfile {
    /// m/s.
    pub speed_mean: f64,
    /// Relative spread of the per-bout walking speed, in [0, 1).
    pub speed_jitter: f64,
    /// Heading random walk, rad/√s.
    pub heading_noise: f64,
    /// Maximum steering rate toward the target, rad/s.
    pub turn_rate: f64,
    /// Per-tick probability of a spontaneous pause while walking.
    pub pause_prob: f64,
    /// Per-tick probability of a dash while walking.
    pub dash_prob: f64,
    pub pause_min: f64,
    pub pause_max: f64,
    pub dash_min: f64,
    pub dash_max: f64,
    /// Distance to a target at which the child stops on it, m.
    pub arrive_radius: f64,
    /// Time spent looking after a reward before leaving, s.
    pub look_duration: f64,
    /// Give up on a target after standing on it this long without a reward, s.
    pub patience: f64,
}

impl Default for MotionProfile {
    fn default() -> Self {
        Self {
            speed_mean: 0.8,
            speed_jitter: 0.25,
            heading_noise: 0.2,
            turn_rate: 3.0,
            pause_prob: 0.002,
            dash_prob: 0.002,
            pause_min: 0.5,
            pause_max: 3.0,
            dash_min: 0.4,
            dash_max: 1.2,
            arrive_radius: 0.2,
            look_duration: 3.0,
            patience: 10.0,
        }
    }
}

impl MotionProfile {
    pub fn validate(&self) -> Result<()> {
        let vals = [
            self.speed_mean,
            self.speed_jitter,
            self.heading_noise,
            self.turn_rate,
            self.pause_prob,
            self.dash_prob,
            self.pause_min,
            self.pause_max,
            self.dash_min,
            self.dash_max,
            self.arrive_radius,
            self.look_duration,
            self.patience,
        ];
        let ok = vals.iter().all(|v| v.is_finite() && *v >= 0.0)
            && self.speed_mean > 0.0
            && self.speed_jitter < 1.0
            && self.pause_prob + self.dash_prob <= 1.0
            && self.pause_min <= self.pause_max
            && self.dash_min <= self.dash_max
            && self.arrive_radius > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig("motion profile out of range".into()))
        }
    }

    /// Upper bound on any agent speed.
    pub fn speed_cap(&self) -> f64 {
        2.0 * self.speed_mean * (1.0 + self.speed_jitter)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentGroundTruth {
    pub position: Vec2,
    pub velocity: Vec2,
    /// Facing direction; also the device yaw.
    pub heading: f64,
    pub mode: BehaviorMode,
    /// Time left in a Pause or Dash bout, s.
    pub mode_remaining: f64,
    /// Speed of the current walking bout, m/s.
    pub walk_speed: f64,
}

impl AgentGroundTruth {
    pub fn at_rest(position: Vec2, heading: f64, walk_speed: f64) -> Self {
        Self {
            position,
            velocity: Vec2::ZERO,
            heading: normalize_angle(heading),
            mode: BehaviorMode::Walk,
            mode_remaining: 0.0,
            walk_speed,
        }
    }

    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

pub(crate) fn bout_speed<R: Rng + ?Sized>(p: &MotionProfile, rng: &mut R) -> f64 {
    p.speed_mean * (1.0 + uniform(rng, -p.speed_jitter, p.speed_jitter))
}

/// Advances one agent by `dt`. `target = None` means the child holds
/// still where it stands.
pub fn step_agent_behavior<R: Rng + ?Sized>(
    agent: &AgentGroundTruth,
    target: Option<Vec2>,
    dt: f64,
    profile: &MotionProfile,
    room: &Room,
    rng: &mut R,
) -> AgentGroundTruth {
    let mut a = *agent;
    let Some(target) = target else {
        a.velocity = Vec2::ZERO;
        a.mode = BehaviorMode::Pause;
        a.mode_remaining = 0.0;
        return a;
    };

    match a.mode {
        BehaviorMode::Pause | BehaviorMode::Dash => {
            a.mode_remaining -= dt;
            if a.mode_remaining <= 0.0 {
                a.mode = BehaviorMode::Walk;
                a.mode_remaining = 0.0;
                a.walk_speed = bout_speed(profile, rng);
            }
        }
        BehaviorMode::Walk => {
            let u: f64 = rng.random();
            if u < profile.pause_prob {
                a.mode = BehaviorMode::Pause;
                a.mode_remaining = uniform(rng, profile.pause_min, profile.pause_max);
            } else if u < profile.pause_prob + profile.dash_prob {
                a.mode = BehaviorMode::Dash;
                a.mode_remaining = uniform(rng, profile.dash_min, profile.dash_max);
                a.heading = normalize_angle(uniform(rng, -TAU / 2.0, TAU / 2.0));
            }
        }
    }

    let wobble = if profile.heading_noise > 0.0 {
        let z: f64 = StandardNormal.sample(rng);
        profile.heading_noise * dt.sqrt() * z
    } else {
        0.0
    };

    match a.mode {
        BehaviorMode::Pause => a.velocity = Vec2::ZERO,
        BehaviorMode::Walk => {
            let to_target = target - a.position;
            let remaining = to_target.norm();
            if remaining <= a.walk_speed * dt {
                a.velocity = to_target * (1.0 / dt);
                if remaining > 0.0 {
                    a.heading = to_target.angle();
                }
            } else {
                let err = normalize_angle(to_target.angle() - a.heading);
                let max_turn = profile.turn_rate * dt;
                a.heading = normalize_angle(a.heading + err.clamp(-max_turn, max_turn) + wobble);
                a.velocity = Vec2::from_polar(a.walk_speed, a.heading);
            }
        }
        BehaviorMode::Dash => {
            a.heading = normalize_angle(a.heading + wobble);
            a.velocity = Vec2::from_polar(2.0 * a.walk_speed, a.heading);
        }
    }

    let mut p = a.position + a.velocity * dt;
    let mut reflected = false;
    if p.x < 0.0 || p.x > room.width {
        p.x = if p.x < 0.0 { -p.x } else { 2.0 * room.width - p.x };
        a.velocity.x = -a.velocity.x;
        reflected = true;
    }
    if p.y < 0.0 || p.y > room.height {
        p.y = if p.y < 0.0 { -p.y } else { 2.0 * room.height - p.y };
        a.velocity.y = -a.velocity.y;
        reflected = true;
    }
    p.x = p.x.clamp(0.0, room.width);
    p.y = p.y.clamp(0.0, room.height);
    if reflected && a.velocity.norm() > 0.0 {
        a.heading = a.velocity.angle();
    }
    a.position = p;
    a
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn calm() -> MotionProfile {
        MotionProfile { speed_jitter: 0.0, heading_noise: 0.0, pause_prob: 0.0, dash_prob: 0.0, ..Default::default() }
    }

    #[test]
    fn forced_pause_stops() {
        let p = MotionProfile { pause_prob: 1.0, dash_prob: 0.0, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut a = AgentGroundTruth::at_rest(Vec2::new(1.0, 1.0), 0.0, 0.8);
        a.velocity = Vec2::new(0.8, 0.0);
        let b = step_agent_behavior(&a, Some(Vec2::new(5.0, 1.0)), 0.01, &p, &Room::default(), &mut rng);
        assert_eq!(b.velocity, Vec2::ZERO);
        assert_eq!(b.mode, BehaviorMode::Pause);
    }

    #[test]
    fn straight_walk_kinematics() {
        let p = MotionProfile { speed_mean: 1.0, ..calm() };
        let room = Room { width: 20.0, height: 20.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = AgentGroundTruth::at_rest(Vec2::new(1.0, 1.0), 0.0, 1.0);
        let b = step_agent_behavior(&a, Some(Vec2::new(11.0, 1.0)), 0.1, &p, &room, &mut rng);
        assert!((b.position.x - 1.1).abs() < 1e-12);
        assert_eq!(b.position.y, 1.0);
    }

    #[test]
    fn seeded_runs_repeat() {
        let p = MotionProfile::default();
        let room = Room::default();
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut a = AgentGroundTruth::at_rest(Vec2::new(1.0, 1.0), 0.0, 0.8);
            let mut out = Vec::new();
            for _ in 0..2000 {
                a = step_agent_behavior(&a, Some(Vec2::new(7.0, 5.0)), 0.01, &p, &room, &mut rng);
                out.push(a);
            }
            out
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }

    #[test]
    fn stays_in_room_under_speed_cap() {
        let p = MotionProfile { dash_prob: 0.05, ..Default::default() };
        let room = Room::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut a = AgentGroundTruth::at_rest(Vec2::new(0.2, 0.2), 0.0, 0.8);
        for i in 0..20_000 {
            let target = if (i / 2000) % 2 == 0 { Vec2::new(7.9, 5.9) } else { Vec2::new(0.1, 0.1) };
            a = step_agent_behavior(&a, Some(target), 0.01, &p, &room, &mut rng);
            assert!(room.contains(a.position));
            assert!(a.speed() <= p.speed_cap() + 1e-9);
        }
    }

    #[test]
    fn hold_is_still() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut a = AgentGroundTruth::at_rest(Vec2::new(2.0, 2.0), 1.0, 0.8);
        a.velocity = Vec2::new(0.3, 0.3);
        let b = step_agent_behavior(&a, None, 0.01, &MotionProfile::default(), &Room::default(), &mut rng);
        assert_eq!(b.velocity, Vec2::ZERO);
        assert_eq!(b.position, a.position);
    }
}
