//! Offline auditor for event logs.
//!
//! Rebuilds camera state, exclusion violations, duty cycle and crowding
//! counts from the log alone and compares them with a run's metrics. It
//! shares types with the simulator but none of its checking code.

use std::collections::BTreeMap;
use std::io::BufRead;

use thiserror::Error;

use crate::anchor::MarkerId;
use crate::sim::{EventKind, Mode, SimEvent, SimMetrics};
use crate::Vec2;

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("line {line}: malformed event: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: log must start with RunStart")]
    MissingRunStart { line: usize },
    #[error("line {line}: time goes backwards")]
    TimeOrder { line: usize },
    #[error("line {line}: agent {agent} camera command {command} does not alternate")]
    Alternation { line: usize, agent: usize, command: &'static str },
    #[error("line {line}: agent {agent} has camera on while moving at {speed:.3} m/s (enabled at line {enabled_at})")]
    Exclusion { line: usize, agent: usize, speed: f64, enabled_at: usize },
    #[error("line {line}: agent index {agent} out of range")]
    UnknownAgent { line: usize, agent: usize },
    #[error("log has no snapshots; cannot recount")]
    NoSnapshots,
    #[error("line {line}: metrics mismatch on {field}: log gives {from_log}, metrics.json has {from_metrics}")]
    Mismatch { line: usize, field: &'static str, from_log: String, from_metrics: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub mode: Mode,
    pub lines: usize,
    pub snapshots: u64,
    pub camera_on_ticks: u64,
    pub agent_ticks: u64,
    pub exclusion_violations: u64,
    pub max_concurrent_per_anchor: u64,
    pub pushes_proxy: u64,
    pub occupancy: BTreeMap<MarkerId, Vec<u64>>,
    /// Running totals after each snapshot, used to locate the first line
    /// where the log departs from the reported metrics.
    pub checkpoints: Vec<Checkpoint>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Checkpoint {
    pub line: usize,
    pub camera_on_ticks: u64,
    pub agent_ticks: u64,
    pub exclusion_violations: u64,
    pub max_concurrent_per_anchor: u64,
    pub pushes_proxy: u64,
}

/// Mode, agent count, v_eps, crowd and contact radii, marker positions.
type Header = (Mode, usize, f64, f64, f64, Vec<(MarkerId, Vec2)>);

/// Replays a log, failing on the first structural or safety problem.
pub fn audit_log<R: BufRead>(reader: R) -> Result<AuditReport, AuditError> {
    let mut header: Option<Header> = None;
    let mut last_t = f64::NEG_INFINITY;
    let mut camera_on: Vec<Option<usize>> = Vec::new();
    let mut report = AuditReport {
        mode: Mode::AnchorPlay,
        lines: 0,
        snapshots: 0,
        camera_on_ticks: 0,
        agent_ticks: 0,
        exclusion_violations: 0,
        max_concurrent_per_anchor: 0,
        pushes_proxy: 0,
        occupancy: BTreeMap::new(),
        checkpoints: Vec::new(),
    };

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let text = line?;
        if text.trim().is_empty() {
            continue;
        }
        report.lines = line_no;
        let ev: SimEvent =
            serde_json::from_str(&text).map_err(|e| AuditError::Malformed { line: line_no, reason: e.to_string() })?;
        if !ev.t.is_finite() {
            return Err(AuditError::Malformed { line: line_no, reason: "non-finite time".into() });
        }
        if ev.t < last_t {
            return Err(AuditError::TimeOrder { line: line_no });
        }
        last_t = ev.t;

        let Some((mode, n_agents, v_eps, crowd_r, contact_r, markers)) = header.as_ref() else {
            match ev.kind {
                EventKind::RunStart { mode, n_agents, v_eps, crowd_radius, contact_radius, markers, .. } => {
                    let ms: Vec<(MarkerId, Vec2)> = markers.into_iter().map(|m| (m.id, m.position)).collect();
                    for (id, _) in &ms {
                        report.occupancy.insert(id.clone(), vec![0; n_agents + 1]);
                    }
                    report.mode = mode;
                    camera_on = vec![None; n_agents];
                    header = Some((mode, n_agents, v_eps, crowd_radius, contact_radius, ms));
                    continue;
                }
                _ => return Err(AuditError::MissingRunStart { line: line_no }),
            }
        };

        if let Some(agent) = ev.agent {
            if agent >= *n_agents {
                return Err(AuditError::UnknownAgent { line: line_no, agent });
            }
        }

        match ev.kind {
            EventKind::RunStart { .. } => {
                return Err(AuditError::Malformed { line: line_no, reason: "second RunStart".into() });
            }
            EventKind::CameraEnable {} => {
                let agent = ev
                    .agent
                    .ok_or(AuditError::Malformed { line: line_no, reason: "camera event without agent".into() })?;
                if camera_on[agent].is_some() {
                    return Err(AuditError::Alternation { line: line_no, agent, command: "CameraEnable" });
                }
                camera_on[agent] = Some(line_no);
            }
            EventKind::CameraDisable {} => {
                let agent = ev
                    .agent
                    .ok_or(AuditError::Malformed { line: line_no, reason: "camera event without agent".into() })?;
                if camera_on[agent].is_none() {
                    return Err(AuditError::Alternation { line: line_no, agent, command: "CameraDisable" });
                }
                camera_on[agent] = None;
            }
            EventKind::Snapshot { positions, speeds } => {
                if positions.len() != *n_agents || speeds.len() != *n_agents {
                    return Err(AuditError::Malformed { line: line_no, reason: "snapshot size mismatch".into() });
                }
                report.snapshots += 1;
                for agent in 0..*n_agents {
                    report.agent_ticks += 1;
                    if let Some(enabled_at) = camera_on[agent] {
                        report.camera_on_ticks += 1;
                        if speeds[agent] > *v_eps {
                            report.exclusion_violations += 1;
                            if *mode == Mode::AnchorPlay {
                                return Err(AuditError::Exclusion {
                                    line: line_no,
                                    agent,
                                    speed: speeds[agent],
                                    enabled_at,
                                });
                            }
                        }
                    }
                }
                for (id, at) in markers {
                    let mut inside = 0usize;
                    for p in &positions {
                        let (dx, dy) = (p.x - at.x, p.y - at.y);
                        if (dx * dx + dy * dy).sqrt() <= *crowd_r {
                            inside += 1;
                        }
                    }
                    report.max_concurrent_per_anchor = report.max_concurrent_per_anchor.max(inside as u64);
                    report.occupancy.get_mut(id).expect("marker from header")[inside] += 1;
                }
                for a in 0..positions.len() {
                    for b in a + 1..positions.len() {
                        let (dx, dy) = (positions[a].x - positions[b].x, positions[a].y - positions[b].y);
                        if (dx * dx + dy * dy).sqrt() <= *contact_r {
                            report.pushes_proxy += 1;
                        }
                    }
                }
                report.checkpoints.push(Checkpoint {
                    line: line_no,
                    camera_on_ticks: report.camera_on_ticks,
                    agent_ticks: report.agent_ticks,
                    exclusion_violations: report.exclusion_violations,
                    max_concurrent_per_anchor: report.max_concurrent_per_anchor,
                    pushes_proxy: report.pushes_proxy,
                });
            }
            _ => {}
        }
    }
    if header.is_none() {
        return Err(AuditError::MissingRunStart { line: report.lines.max(1) });
    }
    if report.snapshots == 0 {
        return Err(AuditError::NoSnapshots);
    }
    Ok(report)
}

fn mismatch<T: std::fmt::Debug>(line: usize, field: &'static str, from_log: T, from_metrics: T) -> AuditError {
    AuditError::Mismatch { line, field, from_log: format!("{from_log:?}"), from_metrics: format!("{from_metrics:?}") }
}

/// Compares a running counter with its reported total. When the log
/// overshoots, blames the first snapshot past the reported value;
/// otherwise the log ran out early and the last snapshot is blamed.
fn check_counter(
    report: &AuditReport,
    field: &'static str,
    value: fn(&Checkpoint) -> u64,
    reported: u64,
) -> Result<(), AuditError> {
    let Some(last) = report.checkpoints.last() else { return Ok(()) };
    let total = value(last);
    if total == reported {
        return Ok(());
    }
    let line = if total > reported {
        report.checkpoints.iter().find(|c| value(c) > reported).map_or(last.line, |c| c.line)
    } else {
        last.line
    };
    Err(mismatch(line, field, total, reported))
}

/// Cross-checks the recount against a run's reported metrics.
pub fn compare_with_metrics(report: &AuditReport, metrics: &SimMetrics) -> Result<(), AuditError> {
    let last_line = report.checkpoints.last().map_or(report.lines, |c| c.line);
    if report.mode != metrics.mode {
        return Err(mismatch(1, "mode", report.mode, metrics.mode));
    }
    check_counter(report, "agent_ticks", |c| c.agent_ticks, metrics.agent_ticks)?;
    check_counter(report, "camera_on_ticks", |c| c.camera_on_ticks, metrics.camera_on_ticks)?;
    let duty = if report.agent_ticks == 0 { 0.0 } else { report.camera_on_ticks as f64 / report.agent_ticks as f64 };
    if duty != metrics.camera_duty_cycle {
        return Err(mismatch(last_line, "camera_duty_cycle", duty, metrics.camera_duty_cycle));
    }
    check_counter(report, "exclusion_violations", |c| c.exclusion_violations, metrics.exclusion_violations)?;
    check_counter(
        report,
        "max_concurrent_per_anchor",
        |c| c.max_concurrent_per_anchor,
        metrics.crowding.max_concurrent_per_anchor,
    )?;
    check_counter(report, "pushes_proxy", |c| c.pushes_proxy, metrics.crowding.pushes_proxy)?;
    if report.occupancy != metrics.crowding.occupancy {
        return Err(mismatch(last_line, "occupancy", &report.occupancy, &metrics.crowding.occupancy));
    }
    Ok(())
}
