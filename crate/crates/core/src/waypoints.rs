//! Distributed waypoint assignment and crowding metrics.
//!
//! At every path index the planner picks one marker per agent so that no
//! two agents share a marker, preferring the set whose closest pair is
//! farthest apart. Ties on that go to the larger total pairwise distance,
//! then to the lexicographically smallest sorted id tuple. Which agent gets
//! which marker of the chosen set is decided by the seed, subject to no
//! agent repeating its previous marker.

use std::collections::BTreeMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::anchor::{AnchorMarker, MarkerId};
use crate::error::{Error, Result};
use crate::geom::Vec2;

/// Above this many candidate sets per index the planner switches from
/// exhaustive search to farthest-point insertion.
pub const EXHAUSTIVE_LIMIT: u64 = 20_000;

const SCORE_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Planner {
    #[default]
    Distributed,
    /// Every agent follows the same random sequence; the comparison plan.
    NaiveSameSequence,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaypointPlan {
    /// `paths[agent][index]`.
    pub paths: Vec<Vec<MarkerId>>,
}

impl WaypointPlan {
    pub fn n_agents(&self) -> usize {
        self.paths.len()
    }

    pub fn path_length(&self) -> usize {
        self.paths.first().map_or(0, Vec::len)
    }

    pub fn column(&self, index: usize) -> Vec<&MarkerId> {
        self.paths.iter().map(|p| &p[index]).collect()
    }

    pub fn last_column(&self) -> Option<Vec<MarkerId>> {
        let len = self.path_length();
        (len > 0).then(|| self.paths.iter().map(|p| p[len - 1].clone()).collect())
    }
}

fn sorted_markers(markers: &[AnchorMarker]) -> Result<Vec<&AnchorMarker>> {
    let mut sorted: Vec<&AnchorMarker> = markers.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    if sorted.windows(2).any(|w| w[0].id == w[1].id) {
        return Err(Error::InvalidConfig("marker ids must be unique".into()));
    }
    Ok(sorted)
}

fn check_sizes(n_agents: usize, n_markers: usize, path_length: usize) -> Result<()> {
    if n_agents == 0 {
        return Err(Error::InvalidConfig("n_agents must be at least 1".into()));
    }
    if path_length == 0 {
        return Err(Error::InvalidConfig("path_length must be at least 1".into()));
    }
    if n_agents > n_markers {
        return Err(Error::Infeasible { agents: n_agents, markers: n_markers });
    }
    if n_markers < 2 && path_length > 1 {
        return Err(Error::InvalidConfig("a path longer than 1 needs at least 2 markers".into()));
    }
    Ok(())
}

/// (min pairwise distance, sum of pairwise distances) of a marker set.
fn set_score(set: &[usize], pos: &[Vec2]) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut sum = 0.0;
    for (i, &a) in set.iter().enumerate() {
        for &b in &set[i + 1..] {
            let d = pos[a].dist(pos[b]);
            min = min.min(d);
            sum += d;
        }
    }
    (min, sum)
}

fn better(a: (f64, f64), b: (f64, f64)) -> bool {
    if a.0 > b.0 + SCORE_EPS {
        return true;
    }
    if a.0 < b.0 - SCORE_EPS {
        return false;
    }
    a.1 > b.1 + SCORE_EPS
}

fn n_choose_k(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u64) / (i as u64 + 1);
    }
    acc
}

/// Whether the set can be handed out without anyone repeating.
fn assignable(set: &[usize], prev: &[Option<usize>]) -> bool {
    // Only a singleton set equal to the lone agent's previous marker, or
    // every agent forbidding the same member, can fail (Hall's condition).
    let forbidden: Vec<usize> = prev.iter().flatten().copied().filter(|p| set.contains(p)).collect();
    if forbidden.len() < prev.len() {
        return true;
    }
    !forbidden.windows(2).all(|w| w[0] == w[1])
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn best_set_exhaustive(n: usize, pos: &[Vec2], prev: &[Option<usize>]) -> Vec<usize> {
    let mut comb: Vec<usize> = (0..n).collect();
    let mut best: Option<(Vec<usize>, (f64, f64))> = None;
    loop {
        if assignable(&comb, prev) {
            let score = set_score(&comb, pos);
            if best.as_ref().is_none_or(|(_, b)| better(score, *b)) {
                best = Some((comb.clone(), score));
            }
        }
        if !next_combination(&mut comb, pos.len()) {
            break;
        }
    }
    best.expect("sizes checked, some set is assignable").0
}

fn best_set_greedy(n: usize, pos: &[Vec2]) -> Vec<usize> {
    let m = pos.len();
    let mut chosen = vec![0, 1];
    let mut best_d = pos[0].dist(pos[1]);
    for a in 0..m {
        for b in a + 1..m {
            let d = pos[a].dist(pos[b]);
            if d > best_d + SCORE_EPS {
                best_d = d;
                chosen = vec![a, b];
            }
        }
    }
    while chosen.len() < n {
        let mut pick = None;
        let mut pick_d = f64::NEG_INFINITY;
        for c in (0..m).filter(|c| !chosen.contains(c)) {
            let d = chosen.iter().map(|&s| pos[s].dist(pos[c])).fold(f64::INFINITY, f64::min);
            if d > pick_d + SCORE_EPS {
                pick_d = d;
                pick = Some(c);
            }
        }
        chosen.push(pick.expect("enough markers"));
    }
    chosen.sort_unstable();
    chosen
}

fn hand_out(set: &[usize], prev: &[Option<usize>], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut order = set.to_vec();
    order.shuffle(rng);
    let n = order.len();
    for i in 0..n {
        if prev[i] == Some(order[i]) {
            let j = (0..n)
                .find(|&j| j != i && prev[i] != Some(order[j]) && prev[j] != Some(order[i]))
                .expect("assignable set admits a repair swap");
            order.swap(i, j);
        }
    }
    order
}

fn build(
    n_agents: usize,
    markers: &[AnchorMarker],
    path_length: usize,
    seed: u64,
    prev_column: Option<&[MarkerId]>,
) -> Result<WaypointPlan> {
    check_sizes(n_agents, markers.len(), path_length)?;
    let sorted = sorted_markers(markers)?;
    let pos: Vec<Vec2> = sorted.iter().map(|m| m.position).collect();
    let mut prev: Vec<Option<usize>> = match prev_column {
        Some(col) => col.iter().map(|id| sorted.iter().position(|m| &m.id == id)).collect(),
        None => vec![None; n_agents],
    };
    prev.resize(n_agents, None);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exhaustive = n_agents == 1 || n_choose_k(pos.len(), n_agents) <= EXHAUSTIVE_LIMIT;
    let mut paths = vec![Vec::with_capacity(path_length); n_agents];
    for _ in 0..path_length {
        let set = if exhaustive { best_set_exhaustive(n_agents, &pos, &prev) } else { best_set_greedy(n_agents, &pos) };
        let column = hand_out(&set, &prev, &mut rng);
        for (agent, &m) in column.iter().enumerate() {
            paths[agent].push(sorted[m].id.clone());
            prev[agent] = Some(m);
        }
    }
    Ok(WaypointPlan { paths })
}

/// Column-distinct, scatter-maximizing paths for `n_agents` agents.
pub fn assign_paths(n_agents: usize, markers: &[AnchorMarker], path_length: usize, seed: u64) -> Result<WaypointPlan> {
    build(n_agents, markers, path_length, seed, None)
}

/// Next lap of a plan, continuing without repeats from `plan`'s last column.
pub fn extend_plan(
    plan: &WaypointPlan,
    markers: &[AnchorMarker],
    path_length: usize,
    seed: u64,
) -> Result<WaypointPlan> {
    build(plan.n_agents(), markers, path_length, seed, plan.last_column().as_deref())
}

/// Every agent gets the same seeded non-repeating random walk.
pub fn naive_same_sequence(
    n_agents: usize,
    markers: &[AnchorMarker],
    path_length: usize,
    seed: u64,
    after: Option<&MarkerId>,
) -> Result<WaypointPlan> {
    check_sizes(n_agents, markers.len(), path_length)?;
    let sorted = sorted_markers(markers)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last: Option<&MarkerId> = after;
    let mut seq = Vec::with_capacity(path_length);
    for _ in 0..path_length {
        let options: Vec<&MarkerId> = sorted.iter().map(|m| &m.id).filter(|id| Some(*id) != last).collect();
        let pick = *options.choose(&mut rng).expect("at least two markers");
        seq.push(pick.clone());
        last = Some(pick);
    }
    Ok(WaypointPlan { paths: vec![seq; n_agents] })
}

/// One lap for the chosen planner, continuing from `previous` when given.
pub fn plan_lap(
    planner: Planner,
    n_agents: usize,
    markers: &[AnchorMarker],
    path_length: usize,
    seed: u64,
    previous: Option<&WaypointPlan>,
) -> Result<WaypointPlan> {
    match (planner, previous) {
        (Planner::Distributed, None) => assign_paths(n_agents, markers, path_length, seed),
        (Planner::Distributed, Some(p)) => extend_plan(p, markers, path_length, seed),
        (Planner::NaiveSameSequence, prev) => {
            let after = prev.and_then(|p| p.paths.first().and_then(|row| row.last()));
            naive_same_sequence(n_agents, markers, path_length, seed, after)
        }
    }
}

/// Smallest distance between two agents' markers at `index`; infinite for
/// a single agent, zero when two agents share a marker.
pub fn min_pairwise_distance(plan: &WaypointPlan, markers: &[AnchorMarker], index: usize) -> f64 {
    let lookup: BTreeMap<&MarkerId, Vec2> = markers.iter().map(|m| (&m.id, m.position)).collect();
    let col: Vec<Vec2> = plan.column(index).into_iter().map(|id| lookup[id]).collect();
    let mut min = f64::INFINITY;
    for i in 0..col.len() {
        for j in i + 1..col.len() {
            min = min.min(col[i].dist(col[j]));
        }
    }
    min
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CrowdingReport {
    pub max_concurrent_per_anchor: u64,
    /// Unordered agent pairs within contact radius, summed over ticks.
    pub pushes_proxy: u64,
    /// `occupancy[marker][k]` = ticks with exactly `k` agents inside the
    /// marker's crowd radius.
    pub occupancy: BTreeMap<MarkerId, Vec<u64>>,
}

/// Incremental form of [`crowding_metrics`] for use inside a run.
#[derive(Clone, Debug)]
pub struct CrowdingAccumulator {
    markers: Vec<(MarkerId, Vec2)>,
    crowd_radius: f64,
    contact_radius: f64,
    report: CrowdingReport,
}

impl CrowdingAccumulator {
    pub fn new(markers: &[AnchorMarker], n_agents: usize, crowd_radius: f64, contact_radius: f64) -> Self {
        let occupancy = markers.iter().map(|m| (m.id.clone(), vec![0; n_agents + 1])).collect();
        Self {
            markers: markers.iter().map(|m| (m.id.clone(), m.position)).collect(),
            crowd_radius,
            contact_radius,
            report: CrowdingReport { occupancy, ..Default::default() },
        }
    }

    pub fn observe(&mut self, positions: &[Vec2]) {
        for (id, at) in &self.markers {
            let k = positions.iter().filter(|p| p.dist(*at) <= self.crowd_radius).count();
            self.report.max_concurrent_per_anchor = self.report.max_concurrent_per_anchor.max(k as u64);
            let hist = self.report.occupancy.get_mut(id).expect("marker registered");
            if hist.len() <= k {
                hist.resize(k + 1, 0);
            }
            hist[k] += 1;
        }
        for i in 0..positions.len() {
            for j in i + 1..positions.len() {
                if positions[i].dist(positions[j]) <= self.contact_radius {
                    self.report.pushes_proxy += 1;
                }
            }
        }
    }

    pub fn report(&self) -> &CrowdingReport {
        &self.report
    }

    pub fn finish(self) -> CrowdingReport {
        self.report
    }
}

/// Crowding over a per-tick position trace (`trace[tick][agent]`).
pub fn crowding_metrics(
    trace: &[Vec<Vec2>],
    markers: &[AnchorMarker],
    crowd_radius: f64,
    contact_radius: f64,
) -> Result<CrowdingReport> {
    if trace.is_empty() {
        return Err(Error::InvalidConfig("crowding trace must be non-empty".into()));
    }
    if !(crowd_radius > 0.0 && contact_radius > 0.0) {
        return Err(Error::InvalidConfig("crowding radii must be positive".into()));
    }
    let n_agents = trace.iter().map(Vec::len).max().unwrap_or(0);
    let mut acc = CrowdingAccumulator::new(markers, n_agents, crowd_radius, contact_radius);
    for tick in trace {
        acc.observe(tick);
    }
    Ok(acc.finish())
}
