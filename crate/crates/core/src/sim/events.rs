use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::anchor::{AnchorMarker, MarkerId};
use crate::geom::Vec2;
use crate::guidance::CuePhase;

use super::config::Mode;

/// One line of the event log: `{"t":..,"agent":..,"kind":..,"payload":{..}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimEvent {
    pub t: f64,
    /// `None` for world-level events.
    pub agent: Option<usize>,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload")]
pub enum EventKind {
    RunStart {
        mode: Mode,
        seed: u64,
        n_agents: usize,
        tick_dt: f64,
        v_eps: f64,
        crowd_radius: f64,
        contact_radius: f64,
        markers: Vec<AnchorMarker>,
    },
    StateChange {
        from: String,
        to: String,
    },
    CameraEnable {},
    CameraDisable {},
    CueEmit {
        azimuth: f64,
        distance: f64,
        tempo: f64,
        phase: CuePhase,
    },
    StepDetected {
        step_t: f64,
        count: u64,
    },
    SearchMiss {},
    TrackingLoss {
        variance: f64,
    },
    Reward {
        marker: MarkerId,
    },
    NearCollision {
        other: usize,
    },
    /// End-of-tick ground truth for every agent.
    Snapshot {
        positions: Vec<Vec2>,
        speeds: Vec<f64>,
    },
    InvariantBreach {
        detail: String,
    },
}

impl SimEvent {
    pub fn world(t: f64, kind: EventKind) -> Self {
        Self { t, agent: None, kind }
    }

    pub fn agent(t: f64, agent: usize, kind: EventKind) -> Self {
        Self { t, agent: Some(agent), kind }
    }
}

/// Writes events as JSON lines.
pub fn write_events<W: Write>(events: &[SimEvent], mut sink: W) -> std::io::Result<()> {
    for e in events {
        serde_json::to_writer(&mut sink, e)?;
        sink.write_all(b"\n")?;
    }
    Ok(())
}
