//! Run configuration.
//!
//! A config file is TOML with up to four sections. Every key is optional and
//! falls back to the built-in default; `--set section.key=value` overrides
//! are applied on top, in order.
//!
//! ```toml
//! [intersection]
//! lambda = 0.2
//! r = 3.0
//! theta = 0.6
//!
//! [model]
//! s_max = 2.0
//!
//! [sim]
//! policy = "taebp"
//! seed = 1
//!
//! [game]          # optional, analyzed by `analyze`
//! states = ["guilty", "innocent"]
//! ...
//! ```

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use taebp_core::persuasion::GameSpec;
use taebp_core::signal::{IntersectionParams, LikelihoodModel};
use taebp_core::sim::{PolicyKind, SimConfig};
use toml::{Table, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// Largest nudge; the linear likelihood model lives on `[0, s_max]`.
    pub s_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub policy: PolicyKind,
    pub n_av: usize,
    pub n_hv: usize,
    pub cruise_speed: f64,
    pub follow_gap: f64,
    pub stop_offset: f64,
    pub loop_length: f64,
    pub duration: f64,
    pub dt: f64,
    pub arrival_window: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub intersection: IntersectionParams,
    pub model: ModelSection,
    pub sim: SimSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game: Option<GameSpec>,
}

impl Default for Config {
    fn default() -> Self {
        let sim = SimConfig::default();
        Self {
            intersection: sim.params,
            model: ModelSection {
                s_max: sim.model.s_max(),
            },
            sim: SimSection {
                policy: sim.policy,
                n_av: sim.n_av,
                n_hv: sim.n_hv,
                cruise_speed: sim.cruise_speed,
                follow_gap: sim.follow_gap,
                stop_offset: sim.stop_offset,
                loop_length: sim.loop_length,
                duration: sim.duration,
                dt: sim.dt,
                arrival_window: sim.arrival_window,
                seed: sim.seed,
            },
            game: None,
        }
    }
}

impl Config {
    /// Defaults, then the file at `path` if any, then `overrides`.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let file = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                text.parse::<Table>()
                    .with_context(|| format!("parsing config {}", p.display()))?
            }
            None => Table::new(),
        };
        Self::from_table(file, overrides)
    }

    pub fn from_table(file: Table, overrides: &[String]) -> Result<Self> {
        let mut merged = Table::try_from(Config::default())?;
        merge(&mut merged, file, "")?;
        for item in overrides {
            apply_override(&mut merged, item)?;
        }
        let config: Config = Value::Table(merged).try_into()?;
        config.intersection.validate()?;
        Ok(config)
    }

    pub fn model(&self) -> Result<LikelihoodModel> {
        Ok(LikelihoodModel::linear(self.model.s_max)?)
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let s = &self.sim;
        let config = SimConfig {
            policy: s.policy,
            params: self.intersection,
            model: self.model()?,
            n_av: s.n_av,
            n_hv: s.n_hv,
            cruise_speed: s.cruise_speed,
            follow_gap: s.follow_gap,
            stop_offset: s.stop_offset,
            loop_length: s.loop_length,
            duration: s.duration,
            dt: s.dt,
            arrival_window: s.arrival_window,
            seed: s.seed,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Overlays `from` on `into`. Unknown keys are rejected except inside the
/// free-form `game` section.
fn merge(into: &mut Table, from: Table, prefix: &str) -> Result<()> {
    for (key, value) in from {
        let path = if prefix.is_empty() {
            key.clone()
        } else {
            format!("{prefix}.{key}")
        };
        match (into.get_mut(&key), value) {
            (Some(Value::Table(dst)), Value::Table(src)) => merge(dst, src, &path)?,
            (Some(slot), value) => *slot = value,
            (None, value) if path == "game" => {
                into.insert(key, value);
            }
            (None, _) => bail!("unknown config key `{path}`"),
        }
    }
    Ok(())
}

/// Applies one `section.key=value` override. The value is read as a TOML
/// literal, or as a bare string when it does not parse as one.
pub fn apply_override(table: &mut Table, item: &str) -> Result<()> {
    let (path, raw) = item
        .split_once('=')
        .with_context(|| format!("override `{item}` is not of the form key=value"))?;
    let (path, raw) = (path.trim(), raw.trim());
    let value = match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").expect("just inserted"),
        Err(_) => Value::String(raw.to_string()),
    };
    let mut parts: Vec<&str> = path.split('.').collect();
    let last = parts.pop().filter(|k| !k.is_empty());
    let Some(last) = last else {
        bail!("override `{item}` has an empty key");
    };
    let mut cursor = table;
    for part in &parts {
        cursor = match cursor.get_mut(*part) {
            Some(Value::Table(t)) => t,
            _ => bail!("unknown config key `{path}`"),
        };
    }
    match cursor.get_mut(last) {
        Some(slot) => *slot = value,
        None => bail!("unknown config key `{path}`"),
    }
    Ok(())
}
