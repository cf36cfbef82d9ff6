//! Self-checks bundling the numerical oracles. Each check is a plain
//! function so that callers can feed it deliberately broken inputs.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use taebp_core::persuasion::{
    optimize_binary_scheme, PersuasionGame, SignalingScheme, TieBreak, TrustLevel,
};
use taebp_core::signal::{
    build_no_trust_policy, build_taebp_policy, indifference_posterior, Intent, IntersectionParams,
    LikelihoodModel, TaebpPolicy, NUDGE,
};
use taebp_core::sim::{run, PolicyKind, SimConfig};
use taebp_core::threshold::{
    min_trust_general, min_trust_intersection, min_trust_intersection_raw, min_trust_two_state,
    threshold_sensitivities,
};

pub const PATH_TOL: f64 = 1e-12;
pub const FLIP_EPS: f64 = 1e-6;
pub const FD_STEP: f64 = 1e-6;
pub const FD_REL_TOL: f64 = 1e-5;
pub const CONSISTENCY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, failures: Vec<String>, ok: impl Into<String>) -> Self {
        match failures.into_iter().next() {
            None => Self {
                name,
                passed: true,
                detail: ok.into(),
            },
            Some(first) => Self {
                name,
                passed: false,
                detail: first,
            },
        }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

/// λ ∈ {0.05, 0.10, …, 0.35} × r evenly spaced over [1.5, 3.5], 7 × 7.
pub fn parameter_grid() -> Vec<(f64, f64)> {
    let mut grid = Vec::new();
    for i in 0..7 {
        let lambda = 0.05 * (i + 1) as f64;
        for j in 0..7 {
            grid.push((lambda, 1.5 + 2.0 * j as f64 / 6.0));
        }
    }
    grid
}

/// Trust levels strictly between `θ*` and 1 at which to build policies.
pub fn trust_samples(theta_star: f64) -> Vec<f64> {
    (1..=3)
        .map(|k| theta_star + (1.0 - theta_star) * k as f64 / 4.0)
        .collect()
}

/// The scheme that reveals guilt and pools innocents with probability 3/7.
pub fn prosecutor_scheme() -> SignalingScheme {
    SignalingScheme::new(
        vec!["g".into(), "i".into()],
        vec![vec![1.0, 0.0], vec![3.0 / 7.0, 4.0 / 7.0]],
    )
    .expect("valid scheme")
}

pub fn check_prosecutor() -> CheckOutcome {
    let game = PersuasionGame::prosecutor();
    let scheme = prosecutor_scheme();
    let mut failures = Vec::new();
    let g = game
        .bayes_posterior(&scheme, "g")
        .map(|b| b.probs().to_vec());
    match g {
        Ok(p) if (p[0] - 0.5).abs() <= PATH_TOL && (p[1] - 0.5).abs() <= PATH_TOL => {}
        other => failures.push(format!(
            "posterior after g is {other:?}, expected (0.5, 0.5)"
        )),
    }
    let i = game
        .bayes_posterior(&scheme, "i")
        .map(|b| b.probs().to_vec());
    if i.as_deref() != Ok(&[0.0, 1.0][..]) {
        failures.push(format!("posterior after i is {i:?}, expected (0, 1)"));
    }
    match game.sender_value(&scheme, TrustLevel::FULL, TieBreak::FavorSender) {
        Ok(v) if (v - 0.6).abs() <= PATH_TOL => {}
        other => failures.push(format!("conviction probability {other:?}, expected 0.6")),
    }
    match min_trust_general(&game) {
        Ok(r) if (r.theta_star - 2.0 / 7.0).abs() <= PATH_TOL => {}
        other => failures.push(format!("prosecutor threshold {other:?}, expected 2/7")),
    }
    CheckOutcome::new(
        "prosecutor",
        failures,
        "posteriors (0.5,0.5)/(0,1), value 0.6",
    )
}

/// `π(g|innocent)` for a two-signal prosecutor scheme, where `g` is whichever
/// signal is more likely under guilt. Signal labels carry no meaning, so the
/// optimizer may return either labelling.
pub fn pooled_innocence(scheme: &SignalingScheme) -> f64 {
    let g = if scheme.prob(0, 0) >= scheme.prob(0, 1) {
        0
    } else {
        1
    };
    scheme.prob(1, g)
}

pub fn check_optimizer(grid_n: usize) -> CheckOutcome {
    let game = PersuasionGame::prosecutor();
    let step = 1.0 / (grid_n - 1) as f64;
    let mut failures = Vec::new();
    match optimize_binary_scheme(&game, TrustLevel::FULL, grid_n) {
        Ok(opt) => {
            let y = pooled_innocence(&opt.scheme);
            if (y - 3.0 / 7.0).abs() > step {
                failures.push(format!("pi(g|innocent) = {y}, expected 3/7 within {step}"));
            }
            if (opt.value - 0.6).abs() > 1e-3 {
                failures.push(format!("optimal value {}, expected 0.6", opt.value));
            }
        }
        Err(e) => failures.push(e.to_string()),
    }
    CheckOutcome::new(
        "optimizer",
        failures,
        format!("grid {grid_n}: pi(g|innocent) ~ 3/7, value ~ 0.6"),
    )
}

pub fn check_threshold_paths() -> CheckOutcome {
    let mut failures = Vec::new();
    for (lambda, r) in parameter_grid() {
        let closed = min_trust_intersection_raw(lambda, r).unwrap_or(f64::NAN);
        let corollary = min_trust_two_state(lambda, r, -2.0).unwrap_or(f64::NAN);
        let general = PersuasionGame::intersection(lambda, r)
            .and_then(|g| min_trust_general(&g))
            .map(|rep| rep.theta_star)
            .unwrap_or(f64::NAN);
        let spread = (closed - corollary).abs().max((closed - general).abs());
        if !(spread <= PATH_TOL) {
            failures.push(format!(
                "({lambda}, {r}): closed {closed}, two-state {corollary}, general {general}"
            ));
        }
    }
    CheckOutcome::new(
        "threshold-paths",
        failures,
        "three paths agree on 49 points",
    )
}

/// Revealing Go must flip the driver to DC just above `θ*` and not just
/// below it.
pub fn check_boundary_flips() -> CheckOutcome {
    let mut failures = Vec::new();
    for (lambda, r) in parameter_grid() {
        let game = PersuasionGame::intersection(lambda, r).expect("valid grid");
        let theta_star = min_trust_intersection(lambda, r).expect("valid grid");
        let revealing = SignalingScheme::fully_revealing(&game);
        let action = |theta: f64| {
            let post = game
                .trust_posterior(&revealing, "Go", TrustLevel::new(theta).expect("in range"))
                .expect("Go has positive probability");
            game.best_response(&post, TieBreak::FavorSender).to_string()
        };
        if action((theta_star + FLIP_EPS).min(1.0)) != "DC" {
            failures.push(format!(
                "({lambda}, {r}): no flip just above theta* = {theta_star}"
            ));
        }
        if theta_star - FLIP_EPS > 0.0 && action(theta_star - FLIP_EPS) != "DR" {
            failures.push(format!("({lambda}, {r}): flip below theta* = {theta_star}"));
        }
    }
    CheckOutcome::new(
        "boundary-flips",
        failures,
        "best response flips at theta* +- 1e-6",
    )
}

pub fn check_p_star_identity() -> CheckOutcome {
    let mut failures = Vec::new();
    for (lambda, r) in parameter_grid() {
        let p_star = indifference_posterior(r).expect("valid r");
        let t = min_trust_intersection(lambda, r).expect("valid grid");
        let rhs = (1.0 - t) * lambda + t;
        if !((p_star - rhs).abs() <= PATH_TOL) {
            failures.push(format!("({lambda}, {r}): p* = {p_star}, (1-t)l+t = {rhs}"));
        }
    }
    CheckOutcome::new(
        "p-star-identity",
        failures,
        "p* = (1-theta*)lambda + theta*",
    )
}

pub fn check_sensitivities() -> CheckOutcome {
    let mut failures = Vec::new();
    let f = |l: f64, r: f64| min_trust_intersection_raw(l, r).expect("valid grid");
    for (lambda, r) in parameter_grid() {
        let s = threshold_sensitivities(lambda, r).expect("valid grid");
        let fd_l = (f(lambda + FD_STEP, r) - f(lambda - FD_STEP, r)) / (2.0 * FD_STEP);
        let fd_r = (f(lambda, r + FD_STEP) - f(lambda, r - FD_STEP)) / (2.0 * FD_STEP);
        for (what, exact, fd) in [("d/dlambda", s.d_lambda, fd_l), ("d/dr", s.d_r, fd_r)] {
            if !((exact - fd).abs() <= FD_REL_TOL * exact.abs()) {
                failures.push(format!("({lambda}, {r}) {what}: {exact} vs fd {fd}"));
            }
            if !(exact < 0.0) {
                failures.push(format!("({lambda}, {r}) {what} = {exact} is not negative"));
            }
        }
    }
    CheckOutcome::new(
        "sensitivities",
        failures,
        "closed forms match finite differences, both negative",
    )
}

pub fn check_golden_nudges(model: &LikelihoodModel) -> CheckOutcome {
    let mut failures = Vec::new();
    let golden = [(0.6, 1.641), (1.0, 1.455)];
    for (theta, expected) in golden {
        let s = IntersectionParams::new(0.2, 3.0, theta)
            .and_then(|p| build_taebp_policy(&p, model))
            .map(|p| p.s_star);
        match s {
            Ok(Some(s)) if (s - expected).abs() <= 1e-3 => {}
            other => failures.push(format!(
                "theta {theta}: s* = {other:?}, expected {expected}"
            )),
        }
    }
    CheckOutcome::new(
        "golden-nudges",
        failures,
        "s*(0.6) ~ 1.641, s*(1.0) ~ 1.455",
    )
}

/// The policies checked by default: every grid point at [`trust_samples`].
pub fn grid_policies(model: &LikelihoodModel) -> Vec<TaebpPolicy> {
    let mut out = Vec::new();
    for (lambda, r) in parameter_grid() {
        let theta_star = min_trust_intersection(lambda, r).expect("valid grid");
        for theta in trust_samples(theta_star) {
            let params = IntersectionParams::new(lambda, r, theta).expect("valid grid");
            out.push(build_taebp_policy(&params, model).expect("valid grid"));
        }
    }
    out
}

/// `L(s*)·b = 1`, and the announced scheme takes the driver exactly to `p*`.
pub fn check_scheme_consistency(policies: &[TaebpPolicy], model: &LikelihoodModel) -> CheckOutcome {
    let mut failures = Vec::new();
    for policy in policies.iter().filter(|p| p.persuadable) {
        let p = policy.params;
        let (Some(s), Some(b)) = (policy.s_star, policy.b) else {
            failures.push(format!(
                "({}, {}, {}): persuadable without a nudge",
                p.lambda, p.r, p.theta
            ));
            continue;
        };
        let product = model.likelihood_ratio(s).map(|l| l * b);
        match product {
            Ok(x) if (x - 1.0).abs() <= CONSISTENCY_TOL => {}
            other => failures.push(format!(
                "({}, {}, {}): L(s*)*b = {other:?}",
                p.lambda, p.r, p.theta
            )),
        }
    }
    CheckOutcome::new(
        "scheme-consistency",
        failures,
        format!("L(s*)*b = 1 on {} policies", policies.len()),
    )
}

/// The policy built for `params` must be persuadable and its nudge must move
/// a driver with that trust exactly to indifference.
pub fn check_persuadability(params: &IntersectionParams, model: &LikelihoodModel) -> CheckOutcome {
    let mut failures = Vec::new();
    match build_taebp_policy(params, model) {
        Ok(policy) if policy.persuadable => {
            let game = params.game();
            let post = TrustLevel::new(params.theta).and_then(|t| {
                game.trust_posterior(policy.scheme.as_ref().expect("persuadable"), NUDGE, t)
            });
            match post {
                Ok(b) if (b.get(0) - policy.p_star).abs() <= CONSISTENCY_TOL => {}
                other => {
                    failures.push(format!("nudge posterior {other:?} != p* {}", policy.p_star))
                }
            }
        }
        Ok(policy) => failures.push(format!(
            "theta {} is below theta* {}",
            params.theta, policy.theta_star
        )),
        Err(e) => failures.push(e.to_string()),
    }
    CheckOutcome::new(
        "persuadability",
        failures,
        format!("theta {} is persuadable", params.theta),
    )
}

/// Fraction of `n` encounters in which the policy emits its nudge, with
/// intents drawn from the policy's prior.
pub fn sample_nudge_frequency(policy: &TaebpPolicy, n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lambda = policy.params.lambda;
    let nudges = (0..n)
        .filter(|_| {
            let intent = if rng.random::<f64>() < lambda {
                Intent::Go
            } else {
                Intent::Stop
            };
            let s = policy.emit(intent, &mut rng);
            policy.signal_label(s) == NUDGE
        })
        .count();
    nudges as f64 / n as f64
}

pub fn check_signal_frequency(policy: &TaebpPolicy, n: usize, seed: u64, tol: f64) -> CheckOutcome {
    let freq = sample_nudge_frequency(policy, n, seed);
    let failures = if (freq - policy.persuaded_fraction).abs() <= tol {
        vec![]
    } else {
        vec![format!(
            "nudge frequency {freq} vs persuaded fraction {}",
            policy.persuaded_fraction
        )]
    };
    CheckOutcome::new(
        "signal-frequency",
        failures,
        format!("{freq:.4} over {n} draws"),
    )
}

/// Short runs of each policy against the theoretical rates, with 4σ bands.
pub fn check_simulation(duration: f64, seed: u64, model: &LikelihoodModel) -> CheckOutcome {
    let params = IntersectionParams::default();
    let mut failures = Vec::new();
    let band = |p: f64, n: u64| 4.0 * (p * (1.0 - p) / n.max(1) as f64).sqrt();
    let sim = |policy| {
        run(&SimConfig {
            policy,
            params,
            model: model.clone(),
            duration,
            seed,
            ..SimConfig::default()
        })
        .map(|(m, _)| m)
    };
    let taebp = build_taebp_policy(&params, model).expect("default params");
    match sim(PolicyKind::Taebp) {
        Ok(m) => {
            let p = taebp.persuaded_fraction;
            if m.collisions != 0 {
                failures.push(format!("taebp collided {} times", m.collisions));
            }
            if (m.dc_rate - p).abs() > band(p, m.crossings) {
                failures.push(format!(
                    "taebp dc_rate {} vs {p} over {}",
                    m.dc_rate, m.crossings
                ));
            }
        }
        Err(e) => failures.push(e.to_string()),
    }
    match sim(PolicyKind::NoTrust) {
        Ok(m) => {
            // A driver whose trust is below the assumed θ = 1 may stop short
            // of indifference after the nudge; then every Go intent collides.
            let no_trust = build_no_trust_policy(params.lambda, params.r, model).expect("default");
            let post = params
                .game()
                .trust_posterior(
                    no_trust.scheme.as_ref().expect("persuadable"),
                    NUDGE,
                    TrustLevel::new(params.theta).expect("valid theta"),
                )
                .expect("nudge has positive probability");
            let expected = if post.get(0) < no_trust.p_star {
                params.lambda
            } else {
                0.0
            };
            if (m.collision_rate - expected).abs() > band(expected, m.crossings) {
                failures.push(format!(
                    "no-trust collision_rate {} vs {expected}",
                    m.collision_rate
                ));
            }
            if m.dc_count != 0 {
                failures.push(format!("no-trust drivers chose DC {} times", m.dc_count));
            }
        }
        Err(e) => failures.push(e.to_string()),
    }
    match sim(PolicyKind::NoEbp) {
        Ok(m) => {
            if m.collisions != 0 || m.dc_count != 0 {
                failures.push(format!(
                    "no-ebp: {} collisions, {} DC",
                    m.collisions, m.dc_count
                ));
            }
            if !(m.av_throughput < 0.1 * m.hv_throughput) {
                failures.push(format!(
                    "no-ebp AV throughput {} vs HV {}",
                    m.av_throughput, m.hv_throughput
                ));
            }
        }
        Err(e) => failures.push(e.to_string()),
    }
    CheckOutcome::new(
        "simulation",
        failures,
        format!("{duration} s runs match theory"),
    )
}

/// Runs every check with default inputs.
pub fn run_all() -> Vec<CheckOutcome> {
    let model = LikelihoodModel::linear(2.0).expect("positive s_max");
    let params = IntersectionParams::default();
    let taebp = build_taebp_policy(&params, &model).expect("default params");
    vec![
        check_prosecutor(),
        check_optimizer(1001),
        check_threshold_paths(),
        check_boundary_flips(),
        check_p_star_identity(),
        check_sensitivities(),
        check_golden_nudges(&model),
        check_scheme_consistency(&grid_policies(&model), &model),
        check_persuadability(&params, &model),
        check_signal_frequency(&taebp, 100_000, 1, 0.005),
        check_simulation(600.0, 1, &model),
    ]
}

/// The first failing check, if any.
pub fn first_failure(outcomes: &[CheckOutcome]) -> Option<&CheckOutcome> {
    outcomes.iter().find(|o| !o.passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear() -> LikelihoodModel {
        LikelihoodModel::linear(2.0).unwrap()
    }

    #[test]
    fn clean_build_passes() {
        let outcomes = run_all();
        for o in &outcomes {
            assert!(o.passed, "{o}");
        }
        assert!(first_failure(&outcomes).is_none());
    }

    #[test]
    fn inflated_leak_probability_is_caught() {
        let model = linear();
        let mut policies = grid_policies(&model);
        assert!(check_scheme_consistency(&policies, &model).passed);
        let victim = &mut policies[10];
        victim.b = victim.b.map(|b| b * 1.1);
        let outcome = check_scheme_consistency(&policies, &model);
        assert!(!outcome.passed);
        assert!(outcome.to_string().starts_with("FAIL scheme-consistency"));
    }

    #[test]
    fn trust_below_threshold_trips() {
        let params = IntersectionParams::new(0.2, 3.0, 0.2).unwrap();
        let outcome = check_persuadability(&params, &linear());
        assert!(!outcome.passed);
        assert!(outcome.detail.contains("below theta*"));
    }

    #[test]
    fn grid_is_seven_by_seven() {
        let grid = parameter_grid();
        assert_eq!(grid.len(), 49);
        assert!((grid[48].0 - 0.35).abs() < 1e-15 && grid[48].1 == 3.5);
    }
}
