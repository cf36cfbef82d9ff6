use anyhow::Result;
use serde::Serialize;
use taebp_core::persuasion::PersuasionGame;
use taebp_core::signal::{build_taebp_policy, IntersectionParams, LikelihoodModel};
use taebp_core::threshold::{
    min_trust_general, min_trust_intersection_raw, threshold_sensitivities,
};

use crate::config::Config;

pub const SAFE_POLICY_ADVISORY: &str =
    "trust below threshold: no nudge can persuade, fall back to the default safe policy (always yield)";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    pub lambda: f64,
    pub r: f64,
    pub theta: f64,
    pub s_max: f64,
    pub theta_star: f64,
    pub theta_star_raw: f64,
    pub p_star: f64,
    pub persuadable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    pub persuaded_fraction: f64,
    pub d_theta_star_d_lambda: f64,
    pub d_theta_star_d_r: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub advisory: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub game: Option<GameAnalysis>,
}

/// Threshold report for the optional user-supplied game.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameAnalysis {
    pub default_action: String,
    /// Omitted when no alternative action is reachable at any trust.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_star: Option<f64>,
    pub thresholds: toml::Table,
}

pub fn analyze_params(params: &IntersectionParams, model: &LikelihoodModel) -> Result<Analysis> {
    let policy = build_taebp_policy(params, model)?;
    let sens = threshold_sensitivities(params.lambda, params.r)?;
    Ok(Analysis {
        lambda: params.lambda,
        r: params.r,
        theta: params.theta,
        s_max: model.s_max(),
        theta_star: policy.theta_star,
        theta_star_raw: min_trust_intersection_raw(params.lambda, params.r)?,
        p_star: policy.p_star,
        persuadable: policy.persuadable,
        s_star: policy.s_star,
        b: policy.b,
        persuaded_fraction: policy.persuaded_fraction,
        d_theta_star_d_lambda: sens.d_lambda,
        d_theta_star_d_r: sens.d_r,
        advisory: (!policy.persuadable).then(|| SAFE_POLICY_ADVISORY.to_string()),
        game: None,
    })
}

pub fn analyze(config: &Config) -> Result<Analysis> {
    let mut analysis = analyze_params(&config.intersection, &config.model()?)?;
    if let Some(spec) = &config.game {
        let game = PersuasionGame::try_from(spec.clone())?;
        let report = min_trust_general(&game)?;
        let thresholds = report
            .per_action_thresholds
            .iter()
            .filter(|(_, t)| t.is_finite())
            .map(|(a, t)| (a.clone(), toml::Value::Float(*t)))
            .collect();
        analysis.game = Some(GameAnalysis {
            default_action: report.default_action,
            theta_star: report.theta_star.is_finite().then_some(report.theta_star),
            thresholds,
        });
    }
    Ok(analysis)
}

pub fn render(analysis: &Analysis) -> Result<String> {
    Ok(toml::to_string(analysis)?)
}
