//! Invariants of the threshold and signal construction over a parameter grid,
//! each checked against an independent recomputation.

use taebp_core::persuasion::{Belief, PersuasionGame, Side, SignalingScheme, TieBreak, TrustLevel};
use taebp_core::signal::{
    build_taebp_policy, indifference_posterior, intuitive_posterior_go, optimal_signal,
    scheme_parameter_b, IntersectionParams, LikelihoodModel, NUDGE,
};
use taebp_core::threshold::{
    min_trust_general, min_trust_intersection, min_trust_intersection_raw, threshold_sensitivities,
};

const LAMBDAS: [f64; 7] = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35];

fn rs() -> impl Iterator<Item = f64> {
    (0..7).map(|k| 1.5 + 2.0 * k as f64 / 6.0)
}

fn grid() -> impl Iterator<Item = (f64, f64)> {
    LAMBDAS.into_iter().flat_map(|l| rs().map(move |r| (l, r)))
}

/// Trust values strictly above the threshold, spread up to 1.
fn thetas_above(theta_star: f64) -> impl Iterator<Item = f64> {
    (1..=5).map(move |k| theta_star + (1.0 - theta_star) * k as f64 / 5.0)
}

fn linear() -> LikelihoodModel {
    LikelihoodModel::linear(2.0).unwrap()
}

#[test]
fn general_threshold_matches_closed_form_and_brute_force() {
    for (lambda, r) in grid() {
        let closed = min_trust_intersection(lambda, r).unwrap();
        let game = PersuasionGame::intersection(lambda, r).unwrap();
        let general = min_trust_general(&game).unwrap().theta_star;
        assert!(
            (general - closed).abs() < 1e-9,
            "({lambda}, {r}): {general} vs {closed}"
        );

        // Fine trust scan: revealing Go flips the driver exactly past θ*.
        let scheme = SignalingScheme::fully_revealing(&game);
        let steps = 20_000;
        let flip = (0..=steps)
            .map(|k| k as f64 / steps as f64)
            .find(|&t| {
                let post = game
                    .trust_posterior(&scheme, "Go", TrustLevel::new(t).unwrap())
                    .unwrap();
                game.best_response(&post, TieBreak::FavorSender) == "DC"
            })
            .unwrap();
        assert!(flip >= closed - 1e-9 && flip - closed <= 1.0 / steps as f64 + 1e-9);
    }
}

#[test]
fn sensitivities_match_finite_differences() {
    let h = 1e-6;
    for (lambda, r) in grid() {
        let f = |l: f64, r: f64| min_trust_intersection_raw(l, r).unwrap();
        let fd_lambda = (f(lambda + h, r) - f(lambda - h, r)) / (2.0 * h);
        let fd_r = (f(lambda, r + h) - f(lambda, r - h)) / (2.0 * h);
        let s = threshold_sensitivities(lambda, r).unwrap();
        assert!(
            (s.d_lambda - fd_lambda).abs() < 1e-6,
            "d_lambda at ({lambda}, {r})"
        );
        assert!((s.d_r - fd_r).abs() < 1e-6, "d_r at ({lambda}, {r})");
    }
}

#[test]
fn indifference_posterior_equalizes_utilities() {
    for r in rs() {
        let p = indifference_posterior(r).unwrap();
        let game = PersuasionGame::intersection(0.2, r).unwrap();
        let belief = Belief::new(vec![p, 1.0 - p]).unwrap();
        let dr = game
            .expected_utility(&belief, "DR", Side::Receiver)
            .unwrap();
        let dc = game
            .expected_utility(&belief, "DC", Side::Receiver)
            .unwrap();
        assert!((dr - dc).abs() < 1e-12);
    }
}

#[test]
fn nudge_and_scheme_reach_the_same_posterior() {
    let model = linear();
    for (lambda, r) in grid() {
        let theta_star = min_trust_intersection(lambda, r).unwrap();
        for theta in thetas_above(theta_star) {
            let params = IntersectionParams::new(lambda, r, theta).unwrap();
            let policy = build_taebp_policy(&params, &model).unwrap();
            let (s, b) = (policy.s_star.unwrap(), policy.b.unwrap());
            if theta < 1.0 {
                let ratio = model.likelihood_ratio(s).unwrap();
                assert!(
                    (ratio * b - 1.0).abs() < 1e-9,
                    "L(s*)·b at ({lambda}, {r}, {theta})"
                );
            }
            // Reading the nudge through the announced scheme gives the
            // indifference belief.
            let game = params.game();
            let post = game
                .trust_posterior(
                    policy.scheme.as_ref().unwrap(),
                    NUDGE,
                    TrustLevel::new(theta).unwrap(),
                )
                .unwrap();
            assert!((post.get(0) - policy.p_star).abs() < 1e-9);
            assert!(policy.persuaded_fraction >= lambda - 1e-12);
            assert!(policy.persuaded_fraction > lambda, "strict gain above θ*");
        }
    }
}

#[test]
fn nudge_is_minimal() {
    let model = linear();
    for (lambda, r) in grid() {
        let theta_star = min_trust_intersection(lambda, r).unwrap();
        for theta in thetas_above(theta_star).filter(|&t| t < 1.0) {
            let params = IntersectionParams::new(lambda, r, theta).unwrap();
            let s = optimal_signal(&params, &model).unwrap();
            let game = params.game();
            let respond = |s: f64| {
                let p = intuitive_posterior_go(&params, &model, s).unwrap();
                let belief = Belief::new(vec![p, 1.0 - p]).unwrap();
                game.best_response(&belief, TieBreak::FavorSender)
                    .to_string()
            };
            assert_eq!(respond(s), "DC", "s* persuades at ({lambda}, {r}, {theta})");
            assert_eq!(
                respond(s - 1e-4),
                "DR",
                "smaller nudge fails at ({lambda}, {r}, {theta})"
            );
        }
    }
}

#[test]
fn posterior_increases_with_nudge() {
    let model = linear();
    for (lambda, r) in grid() {
        for theta in [0.05, 0.3, 0.6, 1.0] {
            let params = IntersectionParams::new(lambda, r, theta).unwrap();
            let values: Vec<f64> = (1..=19)
                .map(|k| intuitive_posterior_go(&params, &model, 0.1 * k as f64).unwrap())
                .collect();
            assert!(values.windows(2).all(|w| w[1] > w[0]));
        }
    }
}

#[test]
fn boundary_approach_is_monotone() {
    let model = linear();
    for (lambda, r) in grid() {
        let theta_star = min_trust_intersection(lambda, r).unwrap();
        let mut last: Option<(f64, f64)> = None;
        for k in 0..24 {
            let theta = theta_star + (1.0 - theta_star) * 0.5f64.powi(k + 1);
            let params = IntersectionParams::new(lambda, r, theta).unwrap();
            let s = optimal_signal(&params, &model).unwrap();
            let b = scheme_parameter_b(&params).unwrap();
            if let Some((prev_s, prev_b)) = last {
                assert!(s >= prev_s && b <= prev_b, "({lambda}, {r}) step {k}");
            }
            last = Some((s, b));
        }
        let (s, b) = last.unwrap();
        assert!(
            b < 1e-3 && model.s_max() - s < 1e-2,
            "({lambda}, {r}): s={s} b={b}"
        );

        let at = IntersectionParams::new(lambda, r, theta_star).unwrap();
        let policy = build_taebp_policy(&at, &model).unwrap();
        assert!(policy.persuadable);
        assert_eq!(policy.s_star, Some(model.s_max()));
        assert!(policy.b.unwrap() < 1e-9);
        assert!((policy.persuaded_fraction - lambda).abs() < 1e-9);
    }
}

#[test]
fn below_threshold_is_unpersuadable() {
    let model = linear();
    for (lambda, r) in grid() {
        let theta_star = min_trust_intersection(lambda, r).unwrap();
        if theta_star <= 0.0 {
            continue;
        }
        let params = IntersectionParams::new(lambda, r, theta_star * 0.99).unwrap();
        let policy = build_taebp_policy(&params, &model).unwrap();
        assert!(!policy.persuadable && policy.scheme.is_none());
        assert!(optimal_signal(&params, &model).is_err());
    }
}
