//! Finite Bayesian persuasion primitives.
//!
//! A [`PersuasionGame`] fixes the states, the receiver's actions, a common
//! interior prior and both utility tables. A [`SignalingScheme`] is the
//! row-stochastic likelihood matrix the sender commits to. Receivers update
//! either as classic Bayesians ([`PersuasionGame::bayes_posterior`]) or with a
//! [`TrustLevel`] that mixes the Bayesian posterior back towards the prior
//! ([`PersuasionGame::trust_posterior`]).

mod optimize;

pub use optimize::{optimize_binary_scheme, BinaryOptimum};

use serde::{Deserialize, Serialize};

use crate::tol::{DERIVED_TOL, PROB_TOL, TIE_TOL};
use crate::{Error, Result};

/// A probability vector over the states of a game.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief {
    probs: Vec<f64>,
}

impl Belief {
    /// Validates entries in `[0, 1]` and a unit sum within [`DERIVED_TOL`].
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_distribution(&probs, DERIVED_TOL).map_err(Error::InvalidBelief)?;
        Ok(Self { probs })
    }

    pub fn point_mass(len: usize, index: usize) -> Self {
        let mut probs = vec![0.0; len];
        probs[index] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, index: usize) -> f64 {
        self.probs[index]
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// The receiver's trust in the sender's signals, `θ ∈ [0, 1]`.
///
/// `θ = 0` ignores every signal, `θ = 1` is a classic Bayesian updater.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TrustLevel(f64);

impl TrustLevel {
    pub const NONE: TrustLevel = TrustLevel(0.0);
    pub const FULL: TrustLevel = TrustLevel(1.0);

    pub fn new(theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::InvalidParameter(format!(
                "trust level must lie in [0, 1], got {theta}"
            )));
        }
        Ok(Self(theta))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Which utility table an expected utility is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Receiver,
    Sender,
}

/// How the receiver breaks ties between equally good actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    /// Among tied actions pick the one the sender likes best.
    #[default]
    FavorSender,
    /// Among tied actions pick the first one listed in the game.
    FirstListed,
}

/// A row-stochastic likelihood matrix `π(s|ω)`: rows are states, columns are
/// signals.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalingScheme {
    signals: Vec<String>,
    probs: Vec<Vec<f64>>,
}

impl SignalingScheme {
    pub fn new(signals: Vec<String>, probs: Vec<Vec<f64>>) -> Result<Self> {
        if signals.is_empty() {
            return Err(Error::InvalidScheme("no signals".into()));
        }
        check_unique(&signals).map_err(Error::InvalidScheme)?;
        if probs.is_empty() {
            return Err(Error::InvalidScheme("no state rows".into()));
        }
        for (i, row) in probs.iter().enumerate() {
            if row.len() != signals.len() {
                return Err(Error::InvalidScheme(format!(
                    "row {i} has {} entries for {} signals",
                    row.len(),
                    signals.len()
                )));
            }
            check_distribution(row, PROB_TOL)
                .map_err(|e| Error::InvalidScheme(format!("row {i}: {e}")))?;
        }
        Ok(Self { signals, probs })
    }

    /// Signal `k` is emitted exactly when the state is `k`; signals are named
    /// after the states.
    pub fn fully_revealing(game: &PersuasionGame) -> Self {
        let n = game.states.len();
        let probs = (0..n)
            .map(|i| (0..n).map(|k| if i == k { 1.0 } else { 0.0 }).collect())
            .collect();
        Self {
            signals: game.states.clone(),
            probs,
        }
    }

    /// A single signal emitted in every state.
    pub fn uninformative(n_states: usize) -> Self {
        Self {
            signals: vec!["none".into()],
            probs: vec![vec![1.0]; n_states],
        }
    }

    /// Two states, two signals `s1`/`s2`, with `π(s1|ω1) = x` and `π(s1|ω2) = y`.
    pub fn binary(x: f64, y: f64) -> Result<Self> {
        Self::new(
            vec!["s1".into(), "s2".into()],
            vec![vec![x, 1.0 - x], vec![y, 1.0 - y]],
        )
    }

    pub fn signals(&self) -> &[String] {
        &self.signals
    }

    pub fn n_states(&self) -> usize {
        self.probs.len()
    }

    /// `π(signal|state)` by index.
    pub fn prob(&self, state: usize, signal: usize) -> f64 {
        self.probs[state][signal]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn signal_index(&self, label: &str) -> Result<usize> {
        self.signals
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| Error::UnknownSignal(label.to_string()))
    }
}

/// States, actions, an interior common prior and both utility tables.
///
/// Utilities are stored row-major, indexed `[state * n_actions + action]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PersuasionGame {
    states: Vec<String>,
    actions: Vec<String>,
    prior: Belief,
    receiver: Vec<f64>,
    sender: Vec<f64>,
}

/// Serializable description of a [`PersuasionGame`]; utility matrices have
/// one row per state and one column per action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpec {
    pub states: Vec<String>,
    pub actions: Vec<String>,
    pub prior: Vec<f64>,
    pub receiver_utility: Vec<Vec<f64>>,
    pub sender_utility: Vec<Vec<f64>>,
}

impl TryFrom<GameSpec> for PersuasionGame {
    type Error = Error;

    fn try_from(spec: GameSpec) -> Result<Self> {
        PersuasionGame::new(
            spec.states,
            spec.actions,
            spec.prior,
            spec.receiver_utility,
            spec.sender_utility,
        )
    }
}

impl PersuasionGame {
    pub fn new(
        states: Vec<String>,
        actions: Vec<String>,
        prior: Vec<f64>,
        receiver_utility: Vec<Vec<f64>>,
        sender_utility: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if states.len() < 2 {
            return Err(Error::InvalidGame("need at least two states".into()));
        }
        if actions.len() < 2 {
            return Err(Error::InvalidGame("need at least two actions".into()));
        }
        check_unique(&states).map_err(Error::InvalidGame)?;
        check_unique(&actions).map_err(Error::InvalidGame)?;
        if prior.len() != states.len() {
            return Err(Error::InvalidGame(format!(
                "prior has {} entries for {} states",
                prior.len(),
                states.len()
            )));
        }
        check_distribution(&prior, PROB_TOL).map_err(Error::InvalidGame)?;
        if prior.iter().any(|&p| p <= 0.0) {
            return Err(Error::InvalidGame(
                "prior must lie in the interior of the simplex".into(),
            ));
        }
        let receiver = flatten_table("receiver", &receiver_utility, states.len(), actions.len())?;
        let sender = flatten_table("sender", &sender_utility, states.len(), actions.len())?;
        Ok(Self {
            states,
            actions,
            prior: Belief { probs: prior },
            receiver,
            sender,
        })
    }

    /// The prosecutor/judge game: prior guilty 0.3, the judge is rewarded for
    /// a correct verdict and the prosecutor for any conviction.
    pub fn prosecutor() -> Self {
        Self::new(
            vec!["guilty".into(), "innocent".into()],
            vec!["convict".into(), "acquit".into()],
            vec![0.3, 0.7],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![1.0, 0.0], vec![1.0, 0.0]],
        )
        .expect("prosecutor game is well formed")
    }

    /// The AV/HV intersection game with `p₀(Go) = lambda` and collision
    /// penalty `r`.
    ///
    /// | HV \ AV | Go      | Stop    |
    /// |---------|---------|---------|
    /// | DR      | -r / -1 | 1 / -1  |
    /// | DC      | 0 / 1   | -1 / 1  |
    pub fn intersection(lambda: f64, r: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "penalty r must be finite, got {r}"
            )));
        }
        Self::new(
            vec!["Go".into(), "Stop".into()],
            vec!["DR".into(), "DC".into()],
            vec![lambda, 1.0 - lambda],
            vec![vec![-r, 0.0], vec![1.0, -1.0]],
            vec![vec![-1.0, 1.0], vec![-1.0, 1.0]],
        )
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn prior(&self) -> &Belief {
        &self.prior
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn action_index(&self, label: &str) -> Result<usize> {
        self.actions
            .iter()
            .position(|a| a == label)
            .ok_or_else(|| Error::UnknownAction(label.to_string()))
    }

    pub fn state_index(&self, label: &str) -> Result<usize> {
        self.states
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| Error::InvalidGame(format!("unknown state `{label}`")))
    }

    pub fn utility(&self, side: Side, state: usize, action: usize) -> f64 {
        let table = match side {
            Side::Receiver => &self.receiver,
            Side::Sender => &self.sender,
        };
        table[state * self.actions.len() + action]
    }

    fn check_scheme(&self, scheme: &SignalingScheme) -> Result<()> {
        if scheme.n_states() != self.n_states() {
            return Err(Error::DimensionMismatch {
                scheme: scheme.n_states(),
                game: self.n_states(),
            });
        }
        Ok(())
    }

    /// Total probability `Σ_ω π(s|ω)p₀(ω)` that signal `signal` is emitted.
    pub fn signal_probability(&self, scheme: &SignalingScheme, signal: usize) -> f64 {
        (0..self.n_states())
            .map(|i| scheme.prob(i, signal) * self.prior.probs[i])
            .sum()
    }

    /// Fully-trusting posterior `p(ω|s)` by Bayes' rule.
    pub fn bayes_posterior(&self, scheme: &SignalingScheme, signal: &str) -> Result<Belief> {
        self.trust_posterior(scheme, signal, TrustLevel::FULL)
    }

    /// `(1 − θ)·p₀ + θ·p(·|s)`.
    pub fn trust_posterior(
        &self,
        scheme: &SignalingScheme,
        signal: &str,
        trust: TrustLevel,
    ) -> Result<Belief> {
        self.check_scheme(scheme)?;
        let k = scheme.signal_index(signal)?;
        let mut out = vec![0.0; self.n_states()];
        let total = trust_update(
            self.prior.probs(),
            |i| scheme.prob(i, k),
            trust.value(),
            &mut out,
        );
        if total <= 0.0 {
            return Err(Error::ZeroSignalProbability(signal.to_string()));
        }
        Ok(Belief { probs: out })
    }

    /// `Σ_ω belief(ω)·utility(ω, action)` for the chosen side.
    pub fn expected_utility(&self, belief: &Belief, action: &str, side: Side) -> Result<f64> {
        let a = self.action_index(action)?;
        Ok(self.expected_utility_idx(belief.probs(), a, side))
    }

    pub(crate) fn expected_utility_idx(&self, belief: &[f64], action: usize, side: Side) -> f64 {
        belief
            .iter()
            .enumerate()
            .map(|(i, p)| p * self.utility(side, i, action))
            .sum()
    }

    /// The receiver's utility-maximizing action. Utilities within
    /// [`TIE_TOL`] of the maximum count as tied.
    pub fn best_response(&self, belief: &Belief, tie_break: TieBreak) -> &str {
        &self.actions[self.best_response_idx(belief.probs(), tie_break)]
    }

    pub(crate) fn best_response_idx(&self, belief: &[f64], tie_break: TieBreak) -> usize {
        // Cache receiver utilities on the stack for the small games the
        // optimizer hammers; larger games recompute.
        const CACHED: usize = 8;
        let mut cache = [0.0; CACHED];
        let n = self.n_actions();
        if n <= CACHED {
            for (a, slot) in cache.iter_mut().enumerate().take(n) {
                *slot = self.expected_utility_idx(belief, a, Side::Receiver);
            }
        }
        let receiver = |a: usize| {
            if n <= CACHED {
                cache[a]
            } else {
                self.expected_utility_idx(belief, a, Side::Receiver)
            }
        };
        let best = (0..n).map(receiver).fold(f64::NEG_INFINITY, f64::max);
        let mut tied = (0..n).filter(|&a| receiver(a) >= best - TIE_TOL);
        let first = tied.next().expect("at least one action attains the max");
        match tie_break {
            TieBreak::FirstListed => first,
            TieBreak::FavorSender => {
                let mut choice = first;
                let mut choice_value = None;
                for a in tied {
                    let current = *choice_value.get_or_insert_with(|| {
                        self.expected_utility_idx(belief, choice, Side::Sender)
                    });
                    let v = self.expected_utility_idx(belief, a, Side::Sender);
                    if v > current {
                        choice = a;
                        choice_value = Some(v);
                    }
                }
                choice
            }
        }
    }

    /// Sender's expected utility `Σ_ω p₀(ω) Σ_s π(s|ω) v(ω, a*(s))` when the
    /// receiver best-responds to their trust-weighted posterior. Signals that
    /// are never emitted contribute nothing.
    pub fn sender_value(
        &self,
        scheme: &SignalingScheme,
        trust: TrustLevel,
        tie_break: TieBreak,
    ) -> Result<f64> {
        self.check_scheme(scheme)?;
        let mut posterior = vec![0.0; self.n_states()];
        let mut value = 0.0;
        for k in 0..scheme.signals.len() {
            let total = trust_update(
                self.prior.probs(),
                |i| scheme.prob(i, k),
                trust.value(),
                &mut posterior,
            );
            if total <= 0.0 {
                continue;
            }
            let action = self.best_response_idx(&posterior, tie_break);
            value += (0..self.n_states())
                .map(|i| {
                    self.prior.probs[i] * scheme.prob(i, k) * self.utility(Side::Sender, i, action)
                })
                .sum::<f64>();
        }
        Ok(value)
    }
}

/// Writes the trust-weighted posterior for one signal into `out` and returns
/// the signal's total emission probability. `out` is left untouched when that
/// probability is zero.
pub(crate) fn trust_update(
    prior: &[f64],
    likelihood: impl Fn(usize) -> f64,
    theta: f64,
    out: &mut [f64],
) -> f64 {
    let total: f64 = prior
        .iter()
        .enumerate()
        .map(|(i, p)| likelihood(i) * p)
        .sum();
    if total <= 0.0 {
        return total;
    }
    for (i, p) in prior.iter().enumerate() {
        let bayes = likelihood(i) * p / total;
        out[i] = (1.0 - theta) * p + theta * bayes;
    }
    total
}

fn check_distribution(probs: &[f64], tol: f64) -> Result<(), String> {
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(format!("entry {p} outside [0, 1]"));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(format!("entries sum to {sum}, not 1"));
    }
    Ok(())
}

fn check_unique(labels: &[String]) -> Result<(), String> {
    for (i, label) in labels.iter().enumerate() {
        if labels[..i].contains(label) {
            return Err(format!("duplicate label `{label}`"));
        }
    }
    Ok(())
}

fn flatten_table(name: &str, table: &[Vec<f64>], rows: usize, cols: usize) -> Result<Vec<f64>> {
    if table.len() != rows || table.iter().any(|row| row.len() != cols) {
        return Err(Error::InvalidGame(format!(
            "{name} utility table must be {rows} states x {cols} actions"
        )));
    }
    if table.iter().flatten().any(|u| !u.is_finite()) {
        return Err(Error::InvalidGame(format!(
            "{name} utility table has non-finite entries"
        )));
    }
    Ok(table.iter().flatten().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prosecutor_scheme() -> SignalingScheme {
        SignalingScheme::new(
            vec!["g".into(), "i".into()],
            vec![vec![1.0, 0.0], vec![3.0 / 7.0, 4.0 / 7.0]],
        )
        .unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn prosecutor_posteriors() {
        let game = PersuasionGame::prosecutor();
        let scheme = prosecutor_scheme();
        let g = game.bayes_posterior(&scheme, "g").unwrap();
        assert!(close(g.get(0), 0.5, 1e-12) && close(g.get(1), 0.5, 1e-12));
        let i = game.bayes_posterior(&scheme, "i").unwrap();
        assert_eq!(i.probs(), &[0.0, 1.0]);
    }

    #[test]
    fn fully_revealing_gives_point_masses() {
        let game = PersuasionGame::intersection(0.2, 3.0).unwrap();
        let scheme = SignalingScheme::fully_revealing(&game);
        for (k, label) in game.states().iter().enumerate() {
            let post = game.bayes_posterior(&scheme, label).unwrap();
            assert_eq!(post, Belief::point_mass(2, k));
        }
    }

    #[test]
    fn zero_probability_and_unknown_signal() {
        let game = PersuasionGame::prosecutor();
        let scheme = SignalingScheme::new(
            vec!["g".into(), "never".into()],
            vec![vec![1.0, 0.0], vec![1.0, 0.0]],
        )
        .unwrap();
        assert_eq!(
            game.bayes_posterior(&scheme, "never"),
            Err(Error::ZeroSignalProbability("never".into()))
        );
        assert_eq!(
            game.bayes_posterior(&scheme, "x"),
            Err(Error::UnknownSignal("x".into()))
        );
    }

    #[test]
    fn trust_posterior_at_indifference() {
        let game = PersuasionGame::intersection(0.2, 3.0).unwrap();
        let scheme = SignalingScheme::new(
            vec!["nudge".into(), "stay".into()],
            vec![vec![1.0, 0.0], vec![0.21875, 0.78125]],
        )
        .unwrap();
        let post = game
            .trust_posterior(&scheme, "nudge", TrustLevel::new(0.6).unwrap())
            .unwrap();
        assert!(close(post.get(0), 0.4, 1e-12));
    }

    #[test]
    fn trust_extremes() {
        let game = PersuasionGame::prosecutor();
        let scheme = prosecutor_scheme();
        let none = game
            .trust_posterior(&scheme, "g", TrustLevel::NONE)
            .unwrap();
        assert_eq!(none, *game.prior());
        let full = game
            .trust_posterior(&scheme, "g", TrustLevel::FULL)
            .unwrap();
        assert_eq!(full, game.bayes_posterior(&scheme, "g").unwrap());
    }

    #[test]
    fn expected_utility_table_one() {
        let game = PersuasionGame::intersection(0.2, 3.0).unwrap();
        let belief = Belief::new(vec![0.4, 0.6]).unwrap();
        let dr = game
            .expected_utility(&belief, "DR", Side::Receiver)
            .unwrap();
        let dc = game
            .expected_utility(&belief, "DC", Side::Receiver)
            .unwrap();
        assert!(close(dr, -0.6, 1e-12));
        assert!(close(dc, -0.6, 1e-12));
        let mass = Belief::point_mass(2, 1);
        assert_eq!(
            game.expected_utility(&mass, "DR", Side::Receiver).unwrap(),
            1.0
        );
        assert_eq!(
            game.expected_utility(&mass, "DC", Side::Sender).unwrap(),
            1.0
        );
        assert_eq!(
            game.expected_utility(&mass, "brake", Side::Receiver),
            Err(Error::UnknownAction("brake".into()))
        );
    }

    #[test]
    fn best_response_examples() {
        let judge = PersuasionGame::prosecutor();
        let half = Belief::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(judge.best_response(&half, TieBreak::FavorSender), "convict");
        assert_eq!(judge.best_response(&half, TieBreak::FirstListed), "convict");
        assert_eq!(
            judge.best_response(judge.prior(), TieBreak::FavorSender),
            "acquit"
        );

        let hv = PersuasionGame::intersection(0.2, 3.0).unwrap();
        let indifferent = Belief::new(vec![0.4, 0.6]).unwrap();
        assert_eq!(hv.best_response(&indifferent, TieBreak::FavorSender), "DC");
        assert_eq!(hv.best_response(&indifferent, TieBreak::FirstListed), "DR");
    }

    #[test]
    fn sender_value_examples() {
        let game = PersuasionGame::prosecutor();
        let tb = TieBreak::FavorSender;
        let opt = game
            .sender_value(&prosecutor_scheme(), TrustLevel::FULL, tb)
            .unwrap();
        assert!(close(opt, 0.6, 1e-12));
        let revealing = SignalingScheme::fully_revealing(&game);
        let v = game.sender_value(&revealing, TrustLevel::FULL, tb).unwrap();
        assert!(close(v, 0.3, 1e-12));
        let flat = SignalingScheme::binary(0.5, 0.5).unwrap();
        assert_eq!(game.sender_value(&flat, TrustLevel::FULL, tb).unwrap(), 0.0);
    }

    #[test]
    fn rejects_malformed_inputs() {
        assert!(PersuasionGame::intersection(0.0, 3.0).is_err());
        assert!(PersuasionGame::intersection(1.0, 3.0).is_err());
        assert!(PersuasionGame::new(
            vec!["a".into(), "a".into()],
            vec!["x".into(), "y".into()],
            vec![0.5, 0.5],
            vec![vec![0.0; 2]; 2],
            vec![vec![0.0; 2]; 2],
        )
        .is_err());
        assert!(SignalingScheme::binary(0.5, 1.2).is_err());
        assert!(SignalingScheme::new(vec!["a".into()], vec![vec![0.9]]).is_err());
        assert!(TrustLevel::new(1.5).is_err());
        assert!(Belief::new(vec![0.5, 0.4]).is_err());

        let game = PersuasionGame::prosecutor();
        let three = SignalingScheme::uninformative(3);
        assert_eq!(
            game.sender_value(&three, TrustLevel::FULL, TieBreak::FavorSender),
            Err(Error::DimensionMismatch { scheme: 3, game: 2 })
        );
    }

    #[test]
    fn game_spec_round_trip() {
        let spec: GameSpec = toml::from_str(
            r#"
            states = ["guilty", "innocent"]
            actions = ["convict", "acquit"]
            prior = [0.3, 0.7]
            receiver_utility = [[1.0, 0.0], [0.0, 1.0]]
            sender_utility = [[1.0, 0.0], [1.0, 0.0]]
            "#,
        )
        .unwrap();
        let game = PersuasionGame::try_from(spec).unwrap();
        assert_eq!(game, PersuasionGame::prosecutor());
    }
}
