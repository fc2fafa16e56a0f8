//! Anchor phase: localized floor-marker search, tracking initialization
//! outcomes, and per-visit reward bookkeeping.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::locomotion::{MotionState, PoseEstimate};

/// Opaque marker identifier; ordering is lexicographic.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MarkerId(pub String);

impl From<&str> for MarkerId {
    fn from(s: &str) -> Self {
        MarkerId(s.to_owned())
    }
}

impl fmt::Display for MarkerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorMarker {
    pub id: MarkerId,
    pub position: Vec2,
    pub detect_radius: f64,
}

impl AnchorMarker {
    pub fn new(id: &str, x: f64, y: f64, detect_radius: f64) -> Self {
        Self { id: MarkerId::from(id), position: Vec2::new(x, y), detect_radius }
    }
}

/// Nearest marker within `min(search_radius, marker.detect_radius)`,
/// ties going to the smaller id.
pub fn localized_search(pose: &PoseEstimate, markers: &[AnchorMarker], search_radius: f64) -> Option<MarkerId> {
    markers
        .iter()
        .map(|m| (m, m.position.dist(pose.position)))
        .filter(|(m, d)| *d <= search_radius.min(m.detect_radius))
        .min_by(|(ma, da), (mb, db)| da.total_cmp(db).then_with(|| ma.id.cmp(&mb.id)))
        .map(|(m, _)| m.id.clone())
}

/// Motion-dependent loss model used for moving initializations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackingModel {
    /// Loss probability per unit accel-magnitude variance.
    pub k: f64,
    /// Cap on the per-attempt loss probability.
    pub p_max: f64,
}

impl Default for TrackingModel {
    fn default() -> Self {
        Self { k: 0.02, p_max: 0.9 }
    }
}

impl TrackingModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.k.is_finite() && self.k >= 0.0 && (0.0..=1.0).contains(&self.p_max)) {
            return Err(Error::InvalidConfig("tracking: need k >= 0 and 0 <= p_max <= 1".into()));
        }
        Ok(())
    }

    pub fn loss_probability(&self, motion_variance: f64) -> f64 {
        (self.k * motion_variance).clamp(0.0, self.p_max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackingOutcome {
    pub success: bool,
    pub init_ticks: u32,
    pub loss_event: bool,
}

/// Stationary initialization always succeeds in one tick and draws no
/// randomness. Moving initialization loses tracking with probability
/// `clamp(k * variance, 0, p_max)`.
pub fn simulate_tracking_init<R: Rng + ?Sized>(
    motion_variance: f64,
    stationary: bool,
    rng: &mut R,
    model: &TrackingModel,
) -> TrackingOutcome {
    if stationary {
        return TrackingOutcome { success: true, init_ticks: 1, loss_event: false };
    }
    let p = model.loss_probability(motion_variance.max(0.0));
    let lost = rng.random::<f64>() < p;
    TrackingOutcome { success: !lost, init_ticks: 1, loss_event: lost }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardEvent {
    pub agent: usize,
    pub marker: MarkerId,
    pub t: f64,
}

/// Per-agent record of rewards granted during the current anchored visit.
#[derive(Clone, Debug, Default)]
pub struct VisitLedger {
    rewarded: BTreeSet<MarkerId>,
}

impl VisitLedger {
    /// Grants the reward once per visit; later calls in the same visit
    /// return `Ok(None)`.
    pub fn instantiate_reward(
        &mut self,
        agent: usize,
        marker: &MarkerId,
        t: f64,
        state: &MotionState,
    ) -> Result<Option<RewardEvent>> {
        if !state.is_anchored() {
            return Err(Error::ContractViolation(format!(
                "reward for agent {agent} at {marker} requested while {}",
                state.name()
            )));
        }
        if self.rewarded.insert(marker.clone()) {
            Ok(Some(RewardEvent { agent, marker: marker.clone(), t }))
        } else {
            Ok(None)
        }
    }

    /// Closes the visit; the next anchored episode may reward again.
    pub fn end_visit(&mut self) {
        self.rewarded.clear();
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::locomotion::{step_state_machine, GatingConfig};

    fn at(x: f64, y: f64) -> PoseEstimate {
        PoseEstimate::new(Vec2::new(x, y), 0.0)
    }

    #[test]
    fn search_examples() {
        assert_eq!(localized_search(&at(0.0, 0.0), &[], 1.0), None);
        let a = AnchorMarker::new("A", 1.0, 1.0, 0.5);
        assert_eq!(localized_search(&at(1.0, 1.0), &[a], 1.0), Some(MarkerId::from("A")));

        let markers = [AnchorMarker::new("A", 0.0, 0.0, 0.5), AnchorMarker::new("B", 0.6, 0.0, 0.5)];
        let pose = at(0.31, 0.0);
        // brute force: qualifying distances, pick the minimum
        let dists: Vec<(f64, &str)> =
            markers.iter().map(|m| ((m.position.x - 0.31f64).abs(), m.id.0.as_str())).collect();
        assert!(dists[1].0 < dists[0].0);
        assert_eq!(localized_search(&pose, &markers, 1.0), Some(MarkerId::from("B")));
    }

    #[test]
    fn search_respects_both_radii_and_ties() {
        let m = [AnchorMarker::new("A", 0.0, 0.0, 2.0)];
        assert_eq!(localized_search(&at(1.0, 0.0), &m, 0.5), None);
        let m = [AnchorMarker::new("A", 0.0, 0.0, 0.5)];
        assert_eq!(localized_search(&at(1.0, 0.0), &m, 5.0), None);
        let m = [AnchorMarker::new("Z", 1.0, 0.0, 2.0), AnchorMarker::new("C", -1.0, 0.0, 2.0)];
        assert_eq!(localized_search(&at(0.0, 0.0), &m, 5.0), Some(MarkerId::from("C")));
    }

    #[test]
    fn stationary_init_is_instant() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = simulate_tracking_init(0.0, true, &mut rng, &TrackingModel::default());
        assert_eq!(out, TrackingOutcome { success: true, init_ticks: 1, loss_event: false });
    }

    #[test]
    fn degenerate_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let never = TrackingModel { k: 0.0, p_max: 0.9 };
        let always = TrackingModel { k: 1.0, p_max: 1.0 };
        for _ in 0..1000 {
            let o = simulate_tracking_init(100.0, false, &mut rng, &never);
            assert!(o.success && !o.loss_event);
            let o = simulate_tracking_init(100.0, false, &mut rng, &always);
            assert!(!o.success && o.loss_event);
        }
    }

    #[test]
    fn reward_once_per_visit() {
        let mut ledger = VisitLedger::default();
        let a = MarkerId::from("A");
        let anchored = MotionState::Anchored { anchor: Some(a.clone()) };
        assert!(ledger.instantiate_reward(1, &a, 7.5, &anchored).unwrap().is_some());
        assert!(ledger.instantiate_reward(1, &a, 7.6, &anchored).unwrap().is_none());
        assert!(ledger.instantiate_reward(1, &a, 7.7, &MotionState::Transit).is_err());
    }

    #[test]
    fn revisit_through_state_machine_rewards_twice() {
        let cfg = GatingConfig::default();
        let a = MarkerId::from("A");
        let mut ledger = VisitLedger::default();
        let mut state = MotionState::Transit;
        let mut events = 0;
        // stationary 2 s, moving 1 s, stationary 2 s
        for i in 0..500 {
            let t = i as f64 * 0.01;
            let still = !(200..300).contains(&i);
            let was_anchored = state.is_anchored();
            let found = if was_anchored && still { Some(a.clone()) } else { None };
            let (next, _) = step_state_machine(&state, still, t, found, &cfg);
            if was_anchored && !next.is_anchored() {
                ledger.end_visit();
            }
            state = next;
            if let MotionState::Anchored { anchor: Some(id) } = &state {
                if ledger.instantiate_reward(0, id, t, &state).unwrap().is_some() {
                    events += 1;
                }
            }
        }
        assert_eq!(events, 2);
    }
}
