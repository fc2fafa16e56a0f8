//! Browser demo: three operations exported to JavaScript, each returning a
//! JSON string. The plain-Rust halves are public so they can be tested
//! without a browser.

use anchorplay_core::guidance::{compute_cue, GuidanceConfig};
use anchorplay_core::locomotion::{
    detect_steps, GatingConfig, LocomotionController, MotionState, PoseEstimate, StepConfig,
};
use anchorplay_core::sim::{run_scenario, EventKind, Mode, ScenarioConfig, SimError, SimMetrics};
use anchorplay_core::telemetry::{synthesize_trace, GaitProfile, TraceSegmentSpec};
use anchorplay_core::{anchor::AnchorMarker, guidance::AudioCue, Vec2};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct Frame {
    pub t: f64,
    pub positions: Vec<Vec2>,
    pub camera: Vec<bool>,
}

#[derive(Debug, Serialize)]
pub struct RewardMark {
    pub t: f64,
    pub agent: usize,
    pub marker: String,
}

#[derive(Debug, Serialize)]
pub struct Simulation {
    pub room: [f64; 2],
    pub markers: Vec<AnchorMarker>,
    /// Camera on intervals per agent, `[start, end]` seconds.
    pub camera_intervals: Vec<Vec<[f64; 2]>>,
    pub rewards: Vec<RewardMark>,
    pub frames: Vec<Frame>,
    pub metrics: SimMetrics,
    pub breach: Option<String>,
}

/// Runs the standard scenario and keeps one frame every `stride` ticks.
pub fn simulate_scenario(seed: u64, baseline: bool, duration: f64, stride: usize) -> Result<Simulation, String> {
    let mut cfg = ScenarioConfig::standard().with_seed(seed);
    cfg.mode = if baseline { Mode::BaselineAlwaysOn } else { Mode::AnchorPlay };
    cfg.duration = duration;
    let (events, metrics, breach) = match run_scenario(&cfg) {
        Ok(o) => (o.events, o.metrics, None),
        Err(SimError::InvariantBreach(b)) => (b.events, b.metrics, Some(b.detail)),
        Err(e) => return Err(e.to_string()),
    };

    let n = cfg.n_agents;
    let mut on_since: Vec<Option<f64>> = vec![None; n];
    let mut intervals = vec![Vec::new(); n];
    let mut rewards = Vec::new();
    let mut frames = Vec::new();
    let mut snapshot = 0usize;
    let mut last_t = 0.0;
    for e in &events {
        last_t = e.t;
        match (&e.kind, e.agent) {
            (EventKind::CameraEnable {}, Some(a)) => on_since[a] = Some(e.t),
            (EventKind::CameraDisable {}, Some(a)) => {
                if let Some(s) = on_since[a].take() {
                    intervals[a].push([s, e.t]);
                }
            }
            (EventKind::Reward { marker }, Some(a)) => {
                rewards.push(RewardMark { t: e.t, agent: a, marker: marker.0.clone() })
            }
            (EventKind::Snapshot { positions, .. }, _) => {
                if snapshot.is_multiple_of(stride.max(1)) {
                    frames.push(Frame {
                        t: e.t,
                        positions: positions.clone(),
                        camera: on_since.iter().map(Option::is_some).collect(),
                    });
                }
                snapshot += 1;
            }
            _ => {}
        }
    }
    for (a, s) in on_since.iter().enumerate() {
        if let Some(s) = s {
            intervals[a].push([*s, last_t]);
        }
    }
    Ok(Simulation {
        room: [cfg.room.width, cfg.room.height],
        markers: cfg.markers.clone(),
        camera_intervals: intervals,
        rewards,
        frames,
        metrics,
        breach,
    })
}

#[derive(Debug, Serialize)]
pub struct GaitDemo {
    pub t: Vec<f64>,
    pub accel_magnitude: Vec<f64>,
    pub steps: Vec<f64>,
    /// Controller state name per sample.
    pub state: Vec<&'static str>,
    pub camera_on: Vec<bool>,
}

/// Walk, stand, walk: raw signal, detected steps and the gate's response.
pub fn gait_demo(
    step_frequency: f64,
    noise_std: f64,
    walk_s: f64,
    stand_s: f64,
    seed: u64,
) -> Result<GaitDemo, String> {
    let gait = GaitProfile { step_frequency, noise_std, ..GaitProfile::default() };
    let segments = [
        TraceSegmentSpec::walking(gait, walk_s),
        TraceSegmentSpec::standing(stand_s, noise_std.min(0.05), gait.sample_rate),
        TraceSegmentSpec::walking(gait, walk_s),
    ];
    let trace = synthesize_trace(&segments, seed).map_err(|e| e.to_string())?;
    let steps = detect_steps(&trace, &StepConfig::default());
    let mut ctrl = LocomotionController::new(GatingConfig::default(), StepConfig::default(), PoseEstimate::default());
    let mut state = Vec::with_capacity(trace.len());
    let mut camera_on = Vec::with_capacity(trace.len());
    for s in &trace {
        ctrl.observe(s).map_err(|e| e.to_string())?;
        ctrl.advance(s.t, None);
        state.push(ctrl.state().name());
        camera_on.push(ctrl.camera_on());
    }
    Ok(GaitDemo {
        t: trace.iter().map(|s| s.t).collect(),
        accel_magnitude: trace.iter().map(|s| s.accel_magnitude()).collect(),
        steps,
        state,
        camera_on,
    })
}

pub fn cue_at(x: f64, y: f64, heading: f64, tx: f64, ty: f64, anchored: bool) -> AudioCue {
    let state = if anchored { MotionState::Anchored { anchor: None } } else { MotionState::Transit };
    compute_cue(&PoseEstimate::new(Vec2::new(x, y), heading), Vec2::new(tx, ty), &state, &GuidanceConfig::default())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, JsError> {
    serde_json::to_string(value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn simulate(seed: u32, baseline: bool, duration: f64, stride: u32) -> Result<String, JsError> {
    let sim = simulate_scenario(seed as u64, baseline, duration, stride as usize).map_err(|e| JsError::new(&e))?;
    to_json(&sim)
}

#[wasm_bindgen]
pub fn synth_gait(
    step_frequency: f64,
    noise_std: f64,
    walk_s: f64,
    stand_s: f64,
    seed: u32,
) -> Result<String, JsError> {
    let demo = gait_demo(step_frequency, noise_std, walk_s, stand_s, seed as u64).map_err(|e| JsError::new(&e))?;
    to_json(&demo)
}

#[wasm_bindgen]
pub fn cue(x: f64, y: f64, heading: f64, tx: f64, ty: f64, anchored: bool) -> Result<String, JsError> {
    to_json(&cue_at(x, y, heading, tx, ty, anchored))
}
