use std::io::BufReader;
use std::path::{Path, PathBuf};

use anchorplay_core::audit::{audit_log, compare_with_metrics, AuditReport};
use anchorplay_core::sim::{run_scenario, write_events, Mode, ScenarioConfig, SimError, SimMetrics};
use rayon::prelude::*;
use toml::Table;

use crate::config::{apply_override, read_table, resolve};
use crate::error::CliError;
use crate::manifest::Manifest;
use crate::output::{ensure_dir, write_atomic, write_json};

pub struct ConfigArgs {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub mode: Option<Mode>,
    pub set: Vec<String>,
}

fn build_config(args: &ConfigArgs) -> Result<ScenarioConfig, CliError> {
    let (mut table, origin) = match &args.config {
        Some(p) => (read_table(p)?, p.clone()),
        None => (Table::new(), PathBuf::from("<defaults>")),
    };
    for s in &args.set {
        apply_override(&mut table, s)?;
    }
    let mut cfg = resolve(table, &origin)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(mode) = args.mode {
        cfg.mode = mode;
    }
    Ok(cfg)
}

fn write_run(
    out: &Path,
    events: &[anchorplay_core::sim::SimEvent],
    metrics: &SimMetrics,
    manifest: &Manifest,
) -> Result<(), CliError> {
    ensure_dir(out)?;
    write_atomic(&out.join("events.jsonl"), |w| write_events(events, w))?;
    write_json(&out.join("metrics.json"), metrics)?;
    write_json(&out.join("manifest.json"), manifest)
}

pub fn run(
    args: &ConfigArgs,
    manifest: Option<&Path>,
    out: Option<PathBuf>,
    default_out: PathBuf,
) -> Result<(), CliError> {
    let (cfg, config_path, out) = match manifest {
        Some(path) => {
            let m = Manifest::load(path)?;
            let out = out.unwrap_or(m.out_dir);
            (m.config, m.config_path, out)
        }
        None => (build_config(args)?, args.config.clone(), out.unwrap_or(default_out)),
    };
    let manifest = Manifest::new("run", config_path, &out, vec![cfg.seed], cfg.clone());
    match run_scenario(&cfg) {
        Ok(outcome) => {
            write_run(&out, &outcome.events, &outcome.metrics, &manifest)?;
            let m = &outcome.metrics;
            println!(
                "{:?} seed {}: duty {:.4}, violations {}, losses {}, rewards {} -> {}",
                m.mode,
                m.seed,
                m.camera_duty_cycle,
                m.exclusion_violations,
                m.tracking_loss_events,
                m.rewards_collected,
                out.display()
            );
            Ok(())
        }
        Err(SimError::Config(e)) => Err(CliError::Config(e.to_string())),
        Err(SimError::InvariantBreach(b)) => {
            write_run(&out, &b.events, &b.metrics, &manifest)?;
            Err(CliError::Breach(format!("t = {}: {} (dump in {})", b.t, b.detail, out.display())))
        }
    }
}

/// Parses `7`, `1-20` or `1,4,9` (parts may mix) into an ordered seed list.
pub fn parse_seeds(spec: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::Config(format!("bad seed list {spec:?}"));
    let mut seeds = Vec::new();
    for part in spec.split(',').map(str::trim) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
                if a > b {
                    return Err(bad());
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(part.parse().map_err(|_| bad())?),
        }
    }
    Ok(seeds)
}

pub const COMPARE_HEADER: &str = "seed,mode,duty_cycle,losses,rewards,max_concurrent,pushes_proxy,violations";

fn csv_row(m: &SimMetrics) -> String {
    format!(
        "{},{:?},{},{},{},{},{},{}",
        m.seed,
        m.mode,
        m.camera_duty_cycle,
        m.tracking_loss_events,
        m.rewards_collected,
        m.crowding.max_concurrent_per_anchor,
        m.crowding.pushes_proxy,
        m.exclusion_violations
    )
}

pub fn compare(args: &ConfigArgs, seeds: Option<&str>, out: PathBuf) -> Result<(), CliError> {
    let base_args = ConfigArgs { seed: None, mode: None, config: args.config.clone(), set: args.set.clone() };
    let mut base = build_config(&base_args)?;
    base.record_snapshots = false;
    let seeds = match seeds {
        Some(s) => parse_seeds(s)?,
        None => vec![base.seed],
    };
    let modes: Vec<Mode> = match args.mode {
        Some(m) => vec![m],
        None => vec![Mode::AnchorPlay, Mode::BaselineAlwaysOn],
    };
    let jobs: Vec<(u64, Mode)> = seeds.iter().flat_map(|&s| modes.iter().map(move |&m| (s, m))).collect();
    let results: Vec<Result<(SimMetrics, Option<String>), CliError>> = jobs
        .par_iter()
        .map(|&(seed, mode)| match run_scenario(&base.clone().with_seed(seed).with_mode(mode)) {
            Ok(o) => Ok((o.metrics, None)),
            Err(SimError::InvariantBreach(b)) => {
                let note = format!("seed {seed} {mode:?} at t = {}: {}", b.t, b.detail);
                Ok((b.metrics, Some(note)))
            }
            Err(SimError::Config(e)) => Err(CliError::Config(e.to_string())),
        })
        .collect();

    let runs_dir = out.join("runs");
    ensure_dir(&runs_dir)?;
    let mut rows = vec![COMPARE_HEADER.to_owned()];
    let mut breaches = Vec::new();
    for r in results {
        let (metrics, breach) = r?;
        write_json(&runs_dir.join(format!("{}-{:?}.metrics.json", metrics.seed, metrics.mode)), &metrics)?;
        rows.push(csv_row(&metrics));
        breaches.extend(breach);
    }
    write_atomic(&out.join("compare.csv"), |w| {
        for row in &rows {
            writeln!(w, "{row}")?;
        }
        Ok(())
    })?;
    write_json(&out.join("manifest.json"), &Manifest::new("compare", args.config.clone(), &out, seeds.clone(), base))?;
    println!("{} runs over {} seeds -> {}", rows.len() - 1, seeds.len(), out.join("compare.csv").display());
    if breaches.is_empty() {
        Ok(())
    } else {
        Err(CliError::Breach(breaches.join("; ")))
    }
}

pub fn trace_check(events: &Path, metrics: Option<PathBuf>) -> Result<AuditReport, CliError> {
    let file = std::fs::File::open(events).map_err(|source| CliError::Read { path: events.into(), source })?;
    let report = audit_log(BufReader::new(file))?;
    let metrics_path = metrics.unwrap_or_else(|| events.with_file_name("metrics.json"));
    let text = std::fs::read_to_string(&metrics_path)
        .map_err(|source| CliError::Read { path: metrics_path.clone(), source })?;
    let metrics: SimMetrics =
        serde_json::from_str(&text).map_err(|e| CliError::Parse { path: metrics_path.clone(), msg: e.to_string() })?;
    compare_with_metrics(&report, &metrics)?;
    println!(
        "ok: {} lines, {} snapshots, duty {:.4}, violations {}, max concurrent {}, pushes {}",
        report.lines,
        report.snapshots,
        if report.agent_ticks == 0 { 0.0 } else { report.camera_on_ticks as f64 / report.agent_ticks as f64 },
        report.exclusion_violations,
        report.max_concurrent_per_anchor,
        report.pushes_proxy
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("3").unwrap(), vec![3]);
        assert_eq!(parse_seeds("1-3,7").unwrap(), vec![1, 2, 3, 7]);
        assert!(parse_seeds("5-2").is_err());
        assert!(parse_seeds("x").is_err());
    }
}
