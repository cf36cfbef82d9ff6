//! Embodied signals and the committed trust-aware policy.
//!
//! The AV signals its intent with a forward nudge of magnitude `s`. Humans
//! read a nudge through an intuitive likelihood model `p(s|Go)`, `p(s|Stop)`;
//! the ratio `L(s) = p(s|Go)/p(s|Stop)` is strictly increasing, so a bigger
//! nudge always reads as more likely Go. The policy built here announces a
//! two-signal scheme `{s*, 0}` whose posterior at `s*` coincides with the one
//! the human's intuitive model assigns to the same magnitude.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::persuasion::{PersuasionGame, SignalingScheme};
use crate::threshold::min_trust_intersection;
use crate::tol::{BISECTION_TOL, DERIVED_TOL};
use crate::{Error, Result};

/// Label of the persuasive nudge in an announced scheme.
pub const NUDGE: &str = "nudge";
/// Label of "stay put" (zero nudge) in an announced scheme.
pub const STAY: &str = "stay";

/// The AV's private intent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Intent {
    Go,
    Stop,
}

/// The human driver's action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DriverAction {
    /// Drive recklessly: proceed assuming the AV yields.
    DR,
    /// Drive if clear: proceed only once the AV has stopped or passed.
    DC,
}

type Curve = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LikelihoodKind {
    Linear,
    Custom,
}

#[derive(Clone)]
enum Shape {
    Linear,
    Custom { p_go: Curve, p_stop: Curve },
}

/// The human's intuitive model of how nudge magnitudes depend on intent.
#[derive(Clone)]
pub struct LikelihoodModel {
    s_max: f64,
    shape: Shape,
}

impl fmt::Debug for LikelihoodModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LikelihoodModel")
            .field("s_max", &self.s_max)
            .field("kind", &self.kind())
            .finish()
    }
}

impl LikelihoodModel {
    /// `p(s|Go) = s/s_max`, `p(s|Stop) = 1 − s/s_max`.
    pub fn linear(s_max: f64) -> Result<Self> {
        check_s_max(s_max)?;
        Ok(Self {
            s_max,
            shape: Shape::Linear,
        })
    }

    /// A custom pair of curves on `[0, s_max]`. Both must map into `[0, 1]`,
    /// `p_go` strictly increasing and `p_stop` strictly decreasing; this is
    /// checked on 1000 evenly spaced points.
    pub fn custom(
        s_max: f64,
        p_go: impl Fn(f64) -> f64 + Send + Sync + 'static,
        p_stop: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        check_s_max(s_max)?;
        const SAMPLES: usize = 1000;
        let mut prev: Option<(f64, f64)> = None;
        for k in 0..SAMPLES {
            let s = s_max * k as f64 / (SAMPLES - 1) as f64;
            let (go, stop) = (p_go(s), p_stop(s));
            if !(0.0..=1.0).contains(&go) || !(0.0..=1.0).contains(&stop) {
                return Err(Error::InvalidParameter(format!(
                    "likelihoods at s = {s} are outside [0, 1]"
                )));
            }
            if let Some((pg, ps)) = prev {
                if go <= pg || stop >= ps {
                    return Err(Error::InvalidParameter(format!(
                        "likelihoods are not strictly monotone near s = {s}"
                    )));
                }
            }
            prev = Some((go, stop));
        }
        Ok(Self {
            s_max,
            shape: Shape::Custom {
                p_go: Arc::new(p_go),
                p_stop: Arc::new(p_stop),
            },
        })
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    pub fn kind(&self) -> LikelihoodKind {
        match self.shape {
            Shape::Linear => LikelihoodKind::Linear,
            Shape::Custom { .. } => LikelihoodKind::Custom,
        }
    }

    pub fn p_go(&self, s: f64) -> f64 {
        match &self.shape {
            Shape::Linear => s / self.s_max,
            Shape::Custom { p_go, .. } => p_go(s),
        }
    }

    pub fn p_stop(&self, s: f64) -> f64 {
        match &self.shape {
            Shape::Linear => 1.0 - s / self.s_max,
            Shape::Custom { p_stop, .. } => p_stop(s),
        }
    }

    /// `L(s) = p(s|Go)/p(s|Stop)` on `[0, s_max)`.
    pub fn likelihood_ratio(&self, s: f64) -> Result<f64> {
        if !(0.0..=self.s_max).contains(&s) {
            return Err(Error::DomainError(s));
        }
        let stop = self.p_stop(s);
        if stop <= 0.0 {
            return Err(Error::DomainError(s));
        }
        Ok(self.p_go(s) / stop)
    }

    /// `sup L`, infinite when `p(s_max|Stop) = 0`.
    pub fn sup_ratio(&self) -> f64 {
        let stop = self.p_stop(self.s_max);
        if stop <= 0.0 {
            f64::INFINITY
        } else {
            self.p_go(self.s_max) / stop
        }
    }

    /// `L⁻¹(x)`: closed form for the linear kind, bisection otherwise.
    pub fn inverse_likelihood_ratio(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "likelihood ratio must be nonnegative, got {x}"
            )));
        }
        if x == f64::INFINITY {
            return if self.sup_ratio().is_infinite() {
                Ok(self.s_max)
            } else {
                Err(Error::OutOfRange(x, self.sup_ratio()))
            };
        }
        match self.shape {
            Shape::Linear => Ok(self.s_max * x / (1.0 + x)),
            Shape::Custom { .. } => self.bisect_ratio(x),
        }
    }

    fn bisect_ratio(&self, x: f64) -> Result<f64> {
        let sup = self.sup_ratio();
        if x > sup {
            return Err(Error::OutOfRange(x, sup));
        }
        // Compare p_go against x·p_stop so the bracket end at s_max stays
        // finite even when p_stop vanishes there.
        let excess = |s: f64| self.p_go(s) - x * self.p_stop(s);
        let (mut lo, mut hi) = (0.0, self.s_max);
        if excess(lo) >= 0.0 {
            return Ok(lo);
        }
        while hi - lo > BISECTION_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if excess(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

fn check_s_max(s_max: f64) -> Result<()> {
    if !(s_max > 0.0 && s_max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "s_max must be positive, got {s_max}"
        )));
    }
    Ok(())
}

/// Prior `λ = p₀(Go)`, collision penalty `r` and the human's trust `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntersectionParams {
    pub lambda: f64,
    pub r: f64,
    pub theta: f64,
}

impl Default for IntersectionParams {
    fn default() -> Self {
        Self {
            lambda: 0.2,
            r: 3.0,
            theta: 0.6,
        }
    }
}

impl IntersectionParams {
    pub fn new(lambda: f64, r: f64, theta: f64) -> Result<Self> {
        let params = Self { lambda, r, theta };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must lie in (0, 1), got {}",
                self.lambda
            )));
        }
        if !(self.r > 1.0 && self.r.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "r must exceed 1, got {}",
                self.r
            )));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::InvalidParameter(format!(
                "theta must lie in [0, 1], got {}",
                self.theta
            )));
        }
        Ok(())
    }

    pub fn with_theta(self, theta: f64) -> Self {
        Self { theta, ..self }
    }

    pub fn game(&self) -> PersuasionGame {
        PersuasionGame::intersection(self.lambda, self.r).expect("validated parameters")
    }
}

/// Belief in Go at which DR and DC have equal expected utility: `2/(2 + r)`.
pub fn indifference_posterior(r: f64) -> Result<f64> {
    if !(r > 1.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("r must exceed 1, got {r}")));
    }
    Ok(2.0 / (2.0 + r))
}

/// True when the prior alone already puts the human at or past indifference.
fn prior_persuades(params: &IntersectionParams, p_star: f64) -> bool {
    params.lambda >= p_star - DERIVED_TOL
}

fn check_persuadable(params: &IntersectionParams) -> Result<f64> {
    params.validate()?;
    let theta_star = min_trust_intersection(params.lambda, params.r)?;
    if params.theta < theta_star {
        return Err(Error::Unpersuadable {
            theta: params.theta,
            theta_star,
        });
    }
    Ok(theta_star)
}

/// Minimum nudge that lifts the human's trust-weighted posterior in Go to the
/// indifference point.
///
/// At `θ = θ*` only a maximally informative nudge works: the result is
/// `s_max` when `L` is unbounded, and [`Error::Boundary`] otherwise. When the
/// prior already sits at or above indifference the nudge is the
/// uninformative magnitude `L⁻¹(1)`, matching a leak probability of 1.
pub fn optimal_signal(params: &IntersectionParams, model: &LikelihoodModel) -> Result<f64> {
    check_persuadable(params)?;
    let p_star = indifference_posterior(params.r)?;
    let (lambda, theta) = (params.lambda, params.theta);
    if prior_persuades(params, p_star) {
        // The human drives if clear without being told anything; the scheme
        // degenerates to always nudging, which carries no information.
        return model.inverse_likelihood_ratio(1.0);
    }
    let num = (1.0 - lambda) * (p_star - (1.0 - theta) * lambda);
    let den = lambda * (theta + (1.0 - theta) * lambda - p_star);
    if den <= DERIVED_TOL * lambda {
        return if model.sup_ratio().is_infinite() {
            Ok(model.s_max())
        } else {
            Err(Error::Boundary)
        };
    }
    model.inverse_likelihood_ratio((num / den).max(0.0))
}

/// `π(s*|Stop)`: the largest leak probability that keeps the nudge
/// persuasive, clamped to `[0, 1]`.
pub fn scheme_parameter_b(params: &IntersectionParams) -> Result<f64> {
    check_persuadable(params)?;
    let p_star = indifference_posterior(params.r)?;
    let (lambda, theta) = (params.lambda, params.theta);
    if prior_persuades(params, p_star) {
        return Ok(1.0);
    }
    let den = (1.0 - lambda) * (p_star - (1.0 - theta) * lambda);
    if den <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "p* = {p_star} does not exceed (1 - theta) * lambda"
        )));
    }
    let b = lambda * (theta - p_star + (1.0 - theta) * lambda) / den;
    Ok(b.clamp(0.0, 1.0))
}

/// The artifact an AV commits to before it learns its own intent.
#[derive(Debug, Clone, PartialEq)]
pub struct TaebpPolicy {
    /// Parameters the policy was built for; `theta` is the assumed trust.
    pub params: IntersectionParams,
    pub persuadable: bool,
    pub theta_star: f64,
    pub p_star: f64,
    /// Nudge magnitude; `None` when unpersuadable.
    pub s_star: Option<f64>,
    /// `π(s*|Stop)`; `None` when unpersuadable.
    pub b: Option<f64>,
    /// Rows Go/Stop over signals [`NUDGE`]/[`STAY`]; `None` when unpersuadable.
    pub scheme: Option<SignalingScheme>,
    /// `P(s*) = λ + b(1 − λ)`; zero when the AV falls back to always yielding.
    pub persuaded_fraction: f64,
}

impl TaebpPolicy {
    /// Magnitude the AV emits for `intent`. Go always nudges; Stop nudges
    /// with probability `b`. Unpersuadable policies never nudge.
    pub fn emit<R: Rng + ?Sized>(&self, intent: Intent, rng: &mut R) -> f64 {
        match (self.s_star, self.b, intent) {
            (Some(s), _, Intent::Go) => s,
            (Some(s), Some(b), Intent::Stop) => {
                let draw: f64 = rng.random();
                if draw < b {
                    s
                } else {
                    0.0
                }
            }
            _ => 0.0,
        }
    }

    /// The announced scheme's label for an emitted magnitude.
    pub fn signal_label(&self, magnitude: f64) -> &'static str {
        match self.s_star {
            Some(s) if magnitude == s => NUDGE,
            _ => STAY,
        }
    }
}

/// Builds the committed policy: check persuadability against `θ*`, then size
/// the nudge and the leak probability. Unpersuadable humans get a policy with
/// no scheme, meaning the AV always yields.
pub fn build_taebp_policy(
    params: &IntersectionParams,
    model: &LikelihoodModel,
) -> Result<TaebpPolicy> {
    params.validate()?;
    let theta_star = min_trust_intersection(params.lambda, params.r)?;
    let p_star = indifference_posterior(params.r)?;
    if params.theta < theta_star {
        return Ok(TaebpPolicy {
            params: *params,
            persuadable: false,
            theta_star,
            p_star,
            s_star: None,
            b: None,
            scheme: None,
            persuaded_fraction: 0.0,
        });
    }
    let s_star = optimal_signal(params, model)?;
    let b = scheme_parameter_b(params)?;
    let scheme = SignalingScheme::new(
        vec![NUDGE.into(), STAY.into()],
        vec![vec![1.0, 0.0], vec![b, 1.0 - b]],
    )?;
    Ok(TaebpPolicy {
        params: *params,
        persuadable: true,
        theta_star,
        p_star,
        s_star: Some(s_star),
        b: Some(b),
        scheme: Some(scheme),
        persuaded_fraction: params.lambda + b * (1.0 - params.lambda),
    })
}

/// The trust-agnostic baseline: the same construction assuming `θ = 1`.
pub fn build_no_trust_policy(lambda: f64, r: f64, model: &LikelihoodModel) -> Result<TaebpPolicy> {
    build_taebp_policy(&IntersectionParams::new(lambda, r, 1.0)?, model)
}

/// The human's trust-weighted belief in Go after seeing a nudge of magnitude
/// `s`, read through their intuitive likelihood model rather than an announced
/// scheme.
pub fn intuitive_posterior_go(
    params: &IntersectionParams,
    model: &LikelihoodModel,
    s: f64,
) -> Result<f64> {
    params.validate()?;
    let lambda = params.lambda;
    let bayes = if model.p_stop(s) <= 0.0 {
        1.0
    } else {
        let ratio = model.likelihood_ratio(s)?;
        ratio * lambda / (ratio * lambda + (1.0 - lambda))
    };
    Ok((1.0 - params.theta) * lambda + params.theta * bayes)
}
