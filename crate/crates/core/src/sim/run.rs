use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::anchor::{localized_search, simulate_tracking_init, MarkerId, VisitLedger};
use crate::error::Error;
use crate::geom::Vec2;
use crate::guidance::{compute_cue, cue_schedule, CuePhase};
use crate::locomotion::{HardwareCommand, LocomotionController, MotionState, PoseEstimate};
use crate::waypoints::{plan_lap, CrowdingAccumulator, Planner, WaypointPlan};

use super::behavior::{bout_speed, step_agent_behavior, AgentGroundTruth};
use super::config::{Mode, ScenarioConfig};
use super::events::{EventKind, SimEvent};
use super::imu::ImuSynthesizer;
use super::metrics::SimMetrics;
use super::stream_seed;

#[derive(Clone, Debug)]
pub struct SimOutcome {
    pub events: Vec<SimEvent>,
    pub metrics: SimMetrics,
}

/// State captured when a hard invariant fails mid-run.
#[derive(Clone, Debug)]
pub struct Breach {
    pub t: f64,
    pub detail: String,
    /// Every event up to and including the `InvariantBreach` record.
    pub events: Vec<SimEvent>,
    pub metrics: SimMetrics,
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] Error),
    #[error("invariant breach at t = {:.2}: {}", .0.t, .0.detail)]
    InvariantBreach(Box<Breach>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Task {
    Heading,
    Holding { since: f64, rewarded_at: Option<f64> },
}

struct AgentSim {
    truth: AgentGroundTruth,
    imu: ImuSynthesizer,
    ctrl: LocomotionController,
    ledger: VisitLedger,
    behave_rng: ChaCha8Rng,
    sense_rng: ChaCha8Rng,
    track_rng: ChaCha8Rng,
    lap: usize,
    index: usize,
    /// This lap's row of the plan, reordered by claim avoidance.
    route: Vec<MarkerId>,
    task: Task,
    last_cue: Option<f64>,
    tracking_ready: bool,
    searched: bool,
    tracking_ok: bool,
    camera_on: bool,
    rewards: u64,
    completed_at: Option<f64>,
}

struct Counters {
    camera_on_ticks: u64,
    agent_ticks: u64,
    exclusion_violations: u64,
    tracking_loss_events: u64,
    search_misses: u64,
    moving_tracking_inits: u64,
    near_collisions: u64,
}

struct World<'a> {
    cfg: &'a ScenarioConfig,
    marker_pos: BTreeMap<MarkerId, Vec2>,
    laps: Vec<WaypointPlan>,
    agents: Vec<AgentSim>,
    events: Vec<SimEvent>,
    crowd: CrowdingAccumulator,
    counters: Counters,
    in_contact: BTreeSet<(usize, usize)>,
}

/// Runs one scenario to completion.
///
/// In AnchorPlay mode any tick with the camera on while ground truth is
/// moving faster than `v_eps` aborts the run with [`SimError::InvariantBreach`].
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<SimOutcome, SimError> {
    cfg.validate()?;
    let mut world = World::new(cfg)?;
    let n_ticks = cfg.n_ticks();
    for tick in 1..=n_ticks {
        let t = tick as f64 * cfg.tick_dt;
        if let Err(detail) = world.step(t) {
            return Err(world.abort(t, detail));
        }
    }
    Ok(SimOutcome { metrics: world.metrics(), events: world.events })
}

impl<'a> World<'a> {
    fn new(cfg: &'a ScenarioConfig) -> Result<Self, Error> {
        let first =
            plan_lap(cfg.planner, cfg.n_agents, &cfg.markers, cfg.path_length, stream_seed(cfg.seed, 0, 7), None)?;
        let mut world_rng = ChaCha8Rng::seed_from_u64(stream_seed(cfg.seed, u64::MAX, 0));
        let margin = 0.5f64.min(cfg.room.width / 4.0).min(cfg.room.height / 4.0);
        let agents = (0..cfg.n_agents)
            .map(|i| {
                let pos = Vec2::new(
                    world_rng.random_range(margin..cfg.room.width - margin),
                    world_rng.random_range(margin..cfg.room.height - margin),
                );
                let heading = world_rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
                let speed = bout_speed(&cfg.motion, &mut world_rng);
                let truth = AgentGroundTruth::at_rest(pos, heading, speed);
                let imu = ImuSynthesizer::new(
                    &truth,
                    cfg.imu.accel_amplitude,
                    cfg.imu.accel_noise,
                    cfg.imu.gyro_noise,
                    cfg.gating.stride_length,
                );
                let ctrl = LocomotionController::new(cfg.gating, cfg.steps, PoseEstimate::new(pos, truth.heading));
                let id = i as u64;
                AgentSim {
                    truth,
                    imu,
                    ctrl,
                    ledger: VisitLedger::default(),
                    behave_rng: ChaCha8Rng::seed_from_u64(stream_seed(cfg.seed, id, 1)),
                    sense_rng: ChaCha8Rng::seed_from_u64(stream_seed(cfg.seed, id, 2)),
                    track_rng: ChaCha8Rng::seed_from_u64(stream_seed(cfg.seed, id, 3)),
                    lap: 0,
                    index: 0,
                    route: first.paths[i].clone(),
                    task: Task::Heading,
                    last_cue: None,
                    tracking_ready: false,
                    searched: false,
                    tracking_ok: true,
                    camera_on: false,
                    rewards: 0,
                    completed_at: None,
                }
            })
            .collect();
        let mut events = vec![SimEvent::world(
            0.0,
            EventKind::RunStart {
                mode: cfg.mode,
                seed: cfg.seed,
                n_agents: cfg.n_agents,
                tick_dt: cfg.tick_dt,
                v_eps: cfg.v_eps,
                crowd_radius: cfg.crowding.crowd_radius,
                contact_radius: cfg.crowding.contact_radius,
                markers: cfg.markers.clone(),
            },
        )];
        let mut agents: Vec<AgentSim> = agents;
        if cfg.mode == Mode::BaselineAlwaysOn {
            for (i, a) in agents.iter_mut().enumerate() {
                a.camera_on = true;
                events.push(SimEvent::agent(0.0, i, EventKind::CameraEnable {}));
            }
        }
        Ok(Self {
            cfg,
            marker_pos: cfg.markers.iter().map(|m| (m.id.clone(), m.position)).collect(),
            laps: vec![first],
            agents,
            events,
            crowd: CrowdingAccumulator::new(
                &cfg.markers,
                cfg.n_agents,
                cfg.crowding.crowd_radius,
                cfg.crowding.contact_radius,
            ),
            counters: Counters {
                camera_on_ticks: 0,
                agent_ticks: 0,
                exclusion_violations: 0,
                tracking_loss_events: 0,
                search_misses: 0,
                moving_tracking_inits: 0,
                near_collisions: 0,
            },
            in_contact: BTreeSet::new(),
        })
    }

    fn target_of(&self, i: usize) -> MarkerId {
        let a = &self.agents[i];
        a.route[a.index].clone()
    }

    /// Re-plan hook: moves the agent to its next waypoint, extending the
    /// plan by a lap when it runs off the end. Under the distributed
    /// planner a waypoint another agent is currently heading for is
    /// swapped with the first later unclaimed one on the same route.
    fn advance_waypoint(&mut self, i: usize, t: f64) -> Result<(), String> {
        let cfg = self.cfg;
        let left = self.target_of(i);
        let a = &mut self.agents[i];
        a.index += 1;
        if a.index >= cfg.path_length {
            if a.lap == 0 {
                a.completed_at = Some(t);
            }
            a.lap += 1;
            a.index = 0;
            let lap = a.lap;
            while self.laps.len() <= lap {
                let prev = self.laps.last().expect("first lap exists");
                let seed = stream_seed(cfg.seed, self.laps.len() as u64, 7);
                let next = plan_lap(cfg.planner, cfg.n_agents, &cfg.markers, cfg.path_length, seed, Some(prev))
                    .map_err(|e| format!("re-plan failed: {e}"))?;
                self.laps.push(next);
            }
            self.agents[i].route = self.laps[lap].paths[i].clone();
        }
        if cfg.planner == Planner::Distributed {
            let claimed: BTreeSet<MarkerId> =
                (0..self.agents.len()).filter(|&j| j != i).map(|j| self.target_of(j)).collect();
            let a = &mut self.agents[i];
            avoid_claimed(&mut a.route, a.index, &left, &claimed, &self.marker_pos);
        }
        Ok(())
    }

    fn step(&mut self, t: f64) -> Result<(), String> {
        let cfg = self.cfg;
        for i in 0..self.agents.len() {
            self.step_agent(i, t)?;
        }

        let positions: Vec<Vec2> = self.agents.iter().map(|a| a.truth.position).collect();
        let speeds: Vec<f64> = self.agents.iter().map(|a| a.truth.speed()).collect();
        for (i, a) in self.agents.iter().enumerate() {
            self.counters.agent_ticks += 1;
            if a.camera_on {
                self.counters.camera_on_ticks += 1;
                if speeds[i] > cfg.v_eps {
                    self.counters.exclusion_violations += 1;
                    if cfg.mode == Mode::AnchorPlay {
                        return Err(format!(
                            "agent {i} camera enabled while moving at {:.3} m/s (v_eps {})",
                            speeds[i], cfg.v_eps
                        ));
                    }
                }
            }
        }
        self.crowd.observe(&positions);

        let mut contact = BTreeSet::new();
        for i in 0..positions.len() {
            for j in i + 1..positions.len() {
                let moving = speeds[i] > cfg.v_eps || speeds[j] > cfg.v_eps;
                if moving && positions[i].dist(positions[j]) <= cfg.crowding.contact_radius {
                    contact.insert((i, j));
                    if !self.in_contact.contains(&(i, j)) {
                        self.counters.near_collisions += 1;
                        self.events.push(SimEvent::agent(t, i, EventKind::NearCollision { other: j }));
                    }
                }
            }
        }
        self.in_contact = contact;

        if cfg.record_snapshots {
            self.events.push(SimEvent::world(t, EventKind::Snapshot { positions, speeds }));
        }
        Ok(())
    }

    fn step_agent(&mut self, i: usize, t: f64) -> Result<(), String> {
        let cfg = self.cfg;
        let target_id = self.target_of(i);
        let target_pos = self.marker_pos[&target_id];

        match self.agents[i].task {
            Task::Heading => {
                if self.agents[i].truth.position.dist(target_pos) <= cfg.motion.arrive_radius {
                    self.agents[i].task = Task::Holding { since: t, rewarded_at: None };
                }
            }
            Task::Holding { since, rewarded_at } => {
                let done_looking = rewarded_at.is_some_and(|r| t - r >= cfg.motion.look_duration);
                if done_looking || t - since >= cfg.motion.patience {
                    self.advance_waypoint(i, t)?;
                    self.agents[i].task = Task::Heading;
                }
            }
        }
        let target_id = self.target_of(i);
        let target_pos = self.marker_pos[&target_id];

        let a = &mut self.agents[i];
        let goal = match a.task {
            Task::Heading => Some(target_pos),
            Task::Holding { .. } => None,
        };
        a.truth = step_agent_behavior(&a.truth, goal, cfg.tick_dt, &cfg.motion, &cfg.room, &mut a.behave_rng);
        let sample = a.imu.sample(&a.truth, t, cfg.tick_dt, &mut a.sense_rng);
        let obs = a.ctrl.observe(&sample).map_err(|e| format!("agent {i} controller rejected sample: {e}"))?;
        for &step_t in &obs.steps {
            let count = a.ctrl.cadence().step_count;
            self.events.push(SimEvent::agent(t, i, EventKind::StepDetected { step_t, count }));
        }

        match cfg.mode {
            Mode::AnchorPlay => {
                let prev = a.ctrl.state().clone();
                let mut found = None;
                if prev.is_anchored() && obs.stationary {
                    if !a.tracking_ready {
                        if !obs.stationary {
                            self.counters.moving_tracking_inits += 1;
                            return Err(format!("agent {i} tracking init while moving"));
                        }
                        let out = simulate_tracking_init(
                            obs.variance.unwrap_or(0.0),
                            obs.stationary,
                            &mut a.track_rng,
                            &cfg.tracking,
                        );
                        if out.loss_event {
                            self.counters.tracking_loss_events += 1;
                            let variance = obs.variance.unwrap_or(0.0);
                            self.events.push(SimEvent::agent(t, i, EventKind::TrackingLoss { variance }));
                        }
                        a.tracking_ready = out.success;
                    }
                    if a.tracking_ready && !a.searched {
                        a.searched = true;
                        let view = PoseEstimate::new(a.truth.position, a.truth.heading);
                        match localized_search(&view, &cfg.markers, cfg.search_radius) {
                            Some(id) => found = Some(id),
                            None => {
                                self.counters.search_misses += 1;
                                self.events.push(SimEvent::agent(t, i, EventKind::SearchMiss {}));
                            }
                        }
                    }
                }

                let cmds = a.ctrl.advance(t, found.clone());
                let next = a.ctrl.state().clone();
                if prev.name() != next.name() {
                    self.events.push(SimEvent::agent(
                        t,
                        i,
                        EventKind::StateChange { from: prev.name().into(), to: next.name().into() },
                    ));
                }
                for c in cmds {
                    let kind = match c {
                        HardwareCommand::CameraEnable => EventKind::CameraEnable {},
                        HardwareCommand::CameraDisable => EventKind::CameraDisable {},
                    };
                    self.events.push(SimEvent::agent(t, i, kind));
                }
                if prev.is_anchored() && !next.is_anchored() {
                    a.ledger.end_visit();
                    a.tracking_ready = false;
                    a.searched = false;
                }
                if let Some(id) = found {
                    match a.ledger.instantiate_reward(i, &id, t, &next) {
                        Ok(Some(_)) => {
                            a.rewards += 1;
                            a.ctrl.relocalize(self.marker_pos[&id]);
                            if let Task::Holding { since, rewarded_at: None } = a.task {
                                if id == target_id {
                                    a.task = Task::Holding { since, rewarded_at: Some(t) };
                                }
                            }
                            self.events.push(SimEvent::agent(t, i, EventKind::Reward { marker: id }));
                        }
                        Ok(None) => {}
                        Err(e) => return Err(e.to_string()),
                    }
                }

                let cue = compute_cue(a.ctrl.pose(), target_pos, &next, &cfg.guidance);
                if cue.phase == CuePhase::Muted && !next.is_anchored() {
                    return Err(format!("agent {i} audio muted during {}", next.name()));
                }
                if cue_schedule(&cue, t, a.last_cue) {
                    a.last_cue = Some(t);
                    self.events.push(SimEvent::agent(
                        t,
                        i,
                        EventKind::CueEmit {
                            azimuth: cue.azimuth,
                            distance: cue.distance,
                            tempo: cue.tempo,
                            phase: cue.phase,
                        },
                    ));
                }
                a.camera_on = a.ctrl.camera_on();
                debug_assert_eq!(a.camera_on, matches!(next, MotionState::Anchored { .. }));
            }
            Mode::BaselineAlwaysOn => {
                let variance = obs.variance.unwrap_or(0.0);
                let out = simulate_tracking_init(variance, obs.stationary, &mut a.track_rng, &cfg.tracking);
                if a.tracking_ok {
                    if out.loss_event {
                        a.tracking_ok = false;
                        self.counters.tracking_loss_events += 1;
                        self.events.push(SimEvent::agent(t, i, EventKind::TrackingLoss { variance }));
                    }
                } else if out.success {
                    a.tracking_ok = true;
                }
                if let Task::Holding { since, rewarded_at: None } = a.task {
                    let view = PoseEstimate::new(a.truth.position, a.truth.heading);
                    if a.tracking_ok
                        && localized_search(&view, &cfg.markers, cfg.search_radius).as_ref() == Some(&target_id)
                    {
                        a.rewards += 1;
                        a.task = Task::Holding { since, rewarded_at: Some(t) };
                        self.events.push(SimEvent::agent(t, i, EventKind::Reward { marker: target_id.clone() }));
                    }
                }
                a.camera_on = true;
            }
        }
        Ok(())
    }

    fn metrics(&self) -> SimMetrics {
        let c = &self.counters;
        let completed: Vec<f64> = self.agents.iter().filter_map(|a| a.completed_at).collect();
        SimMetrics {
            mode: self.cfg.mode,
            seed: self.cfg.seed,
            camera_duty_cycle: if c.agent_ticks == 0 { 0.0 } else { c.camera_on_ticks as f64 / c.agent_ticks as f64 },
            camera_on_ticks: c.camera_on_ticks,
            agent_ticks: c.agent_ticks,
            exclusion_violations: c.exclusion_violations,
            tracking_loss_events: c.tracking_loss_events,
            rewards_collected: self.agents.iter().map(|a| a.rewards).sum(),
            mean_completion_time: (!completed.is_empty())
                .then(|| completed.iter().sum::<f64>() / completed.len() as f64),
            agents_completed: completed.len(),
            min_rewards_per_agent: self.agents.iter().map(|a| a.rewards).min().unwrap_or(0),
            search_misses: c.search_misses,
            moving_tracking_inits: c.moving_tracking_inits,
            near_collision_count: c.near_collisions,
            crowding: self.crowd.report().clone(),
        }
    }

    fn abort(mut self, t: f64, detail: String) -> SimError {
        self.events.push(SimEvent::world(t, EventKind::InvariantBreach { detail: detail.clone() }));
        let metrics = self.metrics();
        SimError::InvariantBreach(Box::new(Breach { t, detail, events: self.events, metrics }))
    }
}

/// Repairs `route[index]` when another agent is already heading for it or
/// it repeats the marker just left. Prefers swapping with a later entry of
/// the same route; failing that, substitutes the free marker farthest from
/// every claimed one.
fn avoid_claimed(
    route: &mut [MarkerId],
    index: usize,
    left: &MarkerId,
    claimed: &BTreeSet<MarkerId>,
    marker_pos: &BTreeMap<MarkerId, Vec2>,
) {
    let free = |m: &MarkerId| !claimed.contains(m) && m != left;
    if free(&route[index]) {
        return;
    }
    let before = |r: &[MarkerId], k: usize| if k == index { left.clone() } else { r[k - 1].clone() };
    for j in index + 1..route.len() {
        if !free(&route[j]) {
            continue;
        }
        let mut trial = route.to_vec();
        trial.swap(index, j);
        if (index..route.len()).all(|k| trial[k] != before(&trial, k)) {
            route.swap(index, j);
            return;
        }
    }
    let next = route.get(index + 1);
    let spread = |m: &MarkerId| claimed.iter().map(|c| marker_pos[m].dist(marker_pos[c])).fold(f64::INFINITY, f64::min);
    let best = marker_pos.keys().filter(|m| free(m) && Some(*m) != next).map(|m| (spread(m), m)).fold(
        None::<(f64, &MarkerId)>,
        |acc, (d, m)| match acc {
            Some((bd, _)) if bd >= d => acc,
            _ => Some((d, m)),
        },
    );
    if let Some((_, m)) = best {
        route[index] = m.clone();
    }
}
