use std::f64::consts::FRAC_PI_2;

use anchorplay_core::guidance::CuePhase;
use anchorplay_demo::{cue_at, gait_demo, simulate_scenario};

#[test]
fn simulation_frames_and_intervals() {
    let sim = simulate_scenario(1, false, 30.0, 10).unwrap();
    assert_eq!(sim.frames.len(), 300);
    assert!(sim.frames.iter().all(|f| f.positions.len() == 4 && f.camera.len() == 4));
    assert!(sim.breach.is_none());
    let on_ticks: f64 = sim.camera_intervals.iter().flatten().map(|[a, b]| b - a).sum();
    let duty = on_ticks / (4.0 * 30.0);
    assert!((duty - sim.metrics.camera_duty_cycle).abs() < 0.01, "{duty} vs {}", sim.metrics.camera_duty_cycle);

    let base = simulate_scenario(1, true, 10.0, 10).unwrap();
    assert!(base.frames.iter().all(|f| f.camera.iter().all(|&c| c)));
    assert!(base.camera_intervals.iter().all(|iv| iv.len() == 1));
}

#[test]
fn gait_demo_gates_only_while_standing() {
    let d = gait_demo(2.0, 0.05, 3.0, 2.0, 4).unwrap();
    assert_eq!(d.t.len(), d.camera_on.len());
    assert_eq!(d.steps.len(), 12);
    let on: Vec<f64> = d.t.iter().zip(&d.camera_on).filter(|(_, &c)| c).map(|(t, _)| *t).collect();
    assert!(on.first().unwrap() > &3.0 && on.last().unwrap() < &5.1);
}

#[test]
fn cue_points_at_target() {
    let c = cue_at(0.0, 0.0, 0.0, 0.0, 3.0, false);
    assert!((c.azimuth - FRAC_PI_2).abs() < 1e-12);
    assert_eq!(c.phase, CuePhase::Guide);
    assert_eq!(cue_at(0.0, 0.0, 0.0, 0.1, 0.0, true).phase, CuePhase::LookPrompt);
}
