use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use taebp_core::signal::{build_no_trust_policy, build_taebp_policy, NUDGE, STAY};
use taebp_core::sim::{metrics_to_toml, run, write_trace, MetricsReport, PolicyKind, SimConfig};

pub const METRICS_FILE: &str = "metrics.toml";
pub const TRACE_FILE: &str = "trace.csv";
pub const SCHEME_FILE: &str = "scheme.toml";

/// The committed signaling scheme, as announced to human drivers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeEcho {
    pub policy: String,
    /// Trust the scheme was built for.
    pub assumed_theta: f64,
    /// Trust the simulated drivers actually have.
    pub driver_theta: f64,
    pub signals: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi_nudge_given_go: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi_nudge_given_stop: Option<f64>,
    pub always_yields: bool,
}

pub fn scheme_echo(config: &SimConfig) -> Result<SchemeEcho> {
    let params = config.params;
    let policy = match config.policy {
        PolicyKind::NoEbp => None,
        PolicyKind::NoTrust => Some(build_no_trust_policy(
            params.lambda,
            params.r,
            &config.model,
        )?),
        PolicyKind::Taebp => Some(build_taebp_policy(&params, &config.model)?),
    }
    .filter(|p| p.persuadable);
    Ok(SchemeEcho {
        policy: config.policy.name().to_string(),
        assumed_theta: policy.as_ref().map_or(params.theta, |p| p.params.theta),
        driver_theta: params.theta,
        signals: match policy {
            Some(_) => vec![NUDGE.into(), STAY.into()],
            None => vec!["none".into()],
        },
        s_star: policy.as_ref().and_then(|p| p.s_star),
        pi_nudge_given_go: policy.as_ref().map(|_| 1.0),
        pi_nudge_given_stop: policy.as_ref().and_then(|p| p.b),
        always_yields: policy.is_none(),
    })
}

pub struct SimulateOutput {
    pub metrics: MetricsReport,
    pub files: Vec<PathBuf>,
}

/// Runs one simulation and writes metrics, trace and scheme files to `out`.
pub fn simulate(config: &SimConfig, out: &Path) -> Result<SimulateOutput> {
    let echo = scheme_echo(config)?;
    let (metrics, events) = run(config)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    let metrics_path = out.join(METRICS_FILE);
    fs::write(&metrics_path, metrics_to_toml(&metrics))?;
    let trace_path = out.join(TRACE_FILE);
    let file = fs::File::create(&trace_path)
        .with_context(|| format!("creating {}", trace_path.display()))?;
    write_trace(&events, std::io::BufWriter::new(file))?;
    let scheme_path = out.join(SCHEME_FILE);
    fs::write(&scheme_path, toml::to_string(&echo)?)?;

    Ok(SimulateOutput {
        metrics,
        files: vec![metrics_path, trace_path, scheme_path],
    })
}
