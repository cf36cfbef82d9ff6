//! Minimum persuadable trust.
//!
//! A receiver with trust `θ` weighs the prior by `1 − θ`, so their posterior can
//! only travel a `θ` fraction of the way from the prior towards any Bayesian
//! posterior. Below some `θ*` no signal moves them off their default action.
//! [`min_trust_general`] computes `θ*` for any finite game, taking the best
//! signal to be a fully revealing one; [`min_trust_two_state`] and
//! [`min_trust_intersection`] are the closed forms for two-state games and the
//! AV/HV intersection game.

use crate::persuasion::{Belief, PersuasionGame, Side, TieBreak};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport {
    /// The receiver's best response to the prior, `a₀*`.
    pub default_action: String,
    /// `θ*` clamped to `[0, 1]`; `+∞` when no alternative is reachable.
    pub theta_star: f64,
    /// Minimum over the finite per-action thresholds, before clamping.
    pub theta_star_raw: f64,
    /// One entry per alternative action in game order. `+∞` marks an action
    /// that no posterior can make preferable to the default.
    pub per_action_thresholds: Vec<(String, f64)>,
    /// `U(a′|p₀) − U(a₀*|p₀)` per alternative.
    pub delta_u0: Vec<(String, f64)>,
    /// `max_s U(a′|p_FT(·|s)) − U(a₀*|p_FT(·|s))` over fully revealing
    /// signals, per alternative.
    pub delta_u_ft_max: Vec<(String, f64)>,
}

impl ThresholdReport {
    pub fn threshold_for(&self, action: &str) -> Option<f64> {
        self.per_action_thresholds
            .iter()
            .find(|(a, _)| a == action)
            .map(|(_, t)| *t)
    }
}

pub fn min_trust_general(game: &PersuasionGame) -> Result<ThresholdReport> {
    if game.n_actions() < 2 {
        return Err(Error::NoAlternativeAction);
    }
    let prior = game.prior();
    let default = game.best_response_idx(prior.probs(), TieBreak::FavorSender);
    let u0 = |a| game.expected_utility_idx(prior.probs(), a, Side::Receiver);

    let mut per_action = Vec::new();
    let mut delta_u0 = Vec::new();
    let mut delta_ft = Vec::new();
    for a in (0..game.n_actions()).filter(|&a| a != default) {
        let label = game.actions()[a].clone();
        let d0 = u0(a) - u0(default);
        // The gain is linear in the posterior, so a vertex of the simplex
        // attains the maximum.
        let dft = (0..game.n_states())
            .map(|w| {
                let mass = Belief::point_mass(game.n_states(), w);
                game.expected_utility_idx(mass.probs(), a, Side::Receiver)
                    - game.expected_utility_idx(mass.probs(), default, Side::Receiver)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let denom = dft - d0;
        let threshold = if dft <= 0.0 || denom <= 0.0 {
            f64::INFINITY
        } else {
            -d0 / denom
        };
        per_action.push((label.clone(), threshold));
        delta_u0.push((label.clone(), d0));
        delta_ft.push((label, dft));
    }

    let raw = per_action
        .iter()
        .map(|(_, t)| *t)
        .fold(f64::INFINITY, f64::min);
    let theta_star = if raw.is_finite() {
        raw.clamp(0.0, 1.0)
    } else {
        raw
    };
    Ok(ThresholdReport {
        default_action: game.actions()[default].clone(),
        theta_star,
        theta_star_raw: raw,
        per_action_thresholds: per_action,
        delta_u0,
        delta_u_ft_max: delta_ft,
    })
}

/// Two-state closed form, unclamped. `du_1` and `du_2` are the utility gains
/// of the alternative over the default in each state; revealing state 1 is
/// what makes the alternative attractive.
pub fn min_trust_two_state(prior_1: f64, du_1: f64, du_2: f64) -> Result<f64> {
    if !(prior_1 > 0.0 && prior_1 < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "prior must lie in (0, 1), got {prior_1}"
        )));
    }
    if du_1 == du_2 {
        return Err(Error::DegenerateUtilities);
    }
    let prior_2 = 1.0 - prior_1;
    Ok(-(prior_1 * du_1 + prior_2 * du_2) / (prior_2 * (du_1 - du_2)))
}

fn check_intersection(lambda: f64, r: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must lie in (0, 1), got {lambda}"
        )));
    }
    if !(r > 1.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("r must exceed 1, got {r}")));
    }
    Ok(())
}

/// `(2(1 − λ) − rλ) / ((1 − λ)(r + 2))`, unclamped. Negative values mean the
/// prior alone already makes the human drive if clear.
pub fn min_trust_intersection_raw(lambda: f64, r: f64) -> Result<f64> {
    check_intersection(lambda, r)?;
    Ok((2.0 * (1.0 - lambda) - r * lambda) / ((1.0 - lambda) * (r + 2.0)))
}

/// Minimum trust for the intersection game, clamped to `[0, 1]`.
pub fn min_trust_intersection(lambda: f64, r: f64) -> Result<f64> {
    Ok(min_trust_intersection_raw(lambda, r)?.clamp(0.0, 1.0))
}

/// Partial derivatives of the intersection threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sensitivities {
    pub d_lambda: f64,
    pub d_r: f64,
}

pub fn threshold_sensitivities(lambda: f64, r: f64) -> Result<Sensitivities> {
    check_intersection(lambda, r)?;
    Ok(Sensitivities {
        d_lambda: -r / ((r + 2.0) * (1.0 - lambda).powi(2)),
        d_r: 2.0 / ((lambda - 1.0) * (r + 2.0).powi(2)),
    })
}
