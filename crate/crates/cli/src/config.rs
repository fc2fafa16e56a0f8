//! Scenario loading: TOML file, then `--set key=value` overrides, then
//! dedicated flags.

use std::path::Path;

use anchorplay_core::sim::ScenarioConfig;
use toml::{Table, Value};

use crate::error::CliError;

pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
    text.parse::<Table>().map_err(|e| CliError::Parse { path: path.into(), msg: e.to_string() })
}

fn parse_value(raw: &str) -> Value {
    // Anything TOML can read as a value is typed; the rest is a bare string.
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_owned()))
}

pub fn apply_override(table: &mut Table, arg: &str) -> Result<(), CliError> {
    let bad = |msg: &str| CliError::Override { arg: arg.to_owned(), msg: msg.to_owned() };
    let (key, raw) = arg.split_once('=').ok_or_else(|| bad("expected key=value"))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(bad("empty key segment"));
    }
    let (last, parents) = parts.split_last().expect("non-empty");
    let mut cur = table;
    for p in parents {
        let entry = cur.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur = entry.as_table_mut().ok_or_else(|| bad(&format!("{p} is not a table")))?;
    }
    cur.insert(last.to_string(), parse_value(raw.trim()));
    Ok(())
}

/// Deserializes and validates a scenario table.
pub fn resolve(table: Table, origin: &Path) -> Result<ScenarioConfig, CliError> {
    let cfg: ScenarioConfig = Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Parse { path: origin.into(), msg: e.to_string() })?;
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_are_typed() {
        let mut t = Table::new();
        apply_override(&mut t, "mode=BaselineAlwaysOn").unwrap();
        apply_override(&mut t, "motion.speed_mean=1.2").unwrap();
        apply_override(&mut t, "n_agents=3").unwrap();
        assert_eq!(t["mode"].as_str(), Some("BaselineAlwaysOn"));
        assert_eq!(t["motion"]["speed_mean"].as_float(), Some(1.2));
        assert_eq!(t["n_agents"].as_integer(), Some(3));
        let cfg = resolve(t, Path::new("-")).unwrap();
        assert_eq!(cfg.n_agents, 3);
    }

    #[test]
    fn malformed_override() {
        let mut t = Table::new();
        assert!(apply_override(&mut t, "novalue").is_err());
        assert!(apply_override(&mut t, "a..b=1").is_err());
        apply_override(&mut t, "seed=1").unwrap();
        assert!(apply_override(&mut t, "seed.x=1").is_err());
    }
}
