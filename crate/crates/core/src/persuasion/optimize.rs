//! Brute-force search over two-state, two-signal schemes.
//!
//! Used as an oracle for the closed-form constructions elsewhere in the
//! crate: every grid point is evaluated exactly as
//! [`PersuasionGame::sender_value`] would evaluate it, without allocating.

use super::{trust_update, PersuasionGame, Side, SignalingScheme, TieBreak, TrustLevel};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryOptimum {
    pub scheme: SignalingScheme,
    pub value: f64,
}

/// Scans `π(s1|ω1), π(s1|ω2)` over a uniform `grid_n × grid_n` grid on
/// `[0, 1]²` and returns the first maximizer of the sender value in scan order.
pub fn optimize_binary_scheme(
    game: &PersuasionGame,
    trust: TrustLevel,
    grid_n: usize,
) -> Result<BinaryOptimum> {
    if game.n_states() != 2 {
        return Err(Error::NotTwoState(game.n_states()));
    }
    if grid_n < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid_n must be at least 2, got {grid_n}"
        )));
    }
    let step = 1.0 / (grid_n - 1) as f64;
    let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
    for i in 0..grid_n {
        let x = i as f64 * step;
        for j in 0..grid_n {
            let y = j as f64 * step;
            let v = binary_value(game, trust, TieBreak::FavorSender, x, y);
            if v > best.0 {
                best = (v, i, j);
            }
        }
    }
    let scheme = SignalingScheme::binary(best.1 as f64 * step, best.2 as f64 * step)?;
    let value = game.sender_value(&scheme, trust, TieBreak::FavorSender)?;
    Ok(BinaryOptimum { scheme, value })
}

// `k` indexes columns of `rows`, which clippy misreads as a row walk.
#[allow(clippy::needless_range_loop)]
fn binary_value(game: &PersuasionGame, trust: TrustLevel, tie: TieBreak, x: f64, y: f64) -> f64 {
    let prior = game.prior().probs();
    let rows = [[x, 1.0 - x], [y, 1.0 - y]];
    let mut posterior = [0.0; 2];
    let mut value = 0.0;
    for k in 0..2 {
        let total = trust_update(prior, |i| rows[i][k], trust.value(), &mut posterior);
        if total <= 0.0 {
            continue;
        }
        let a = game.best_response_idx(&posterior, tie);
        value += (0..2)
            .map(|i| prior[i] * rows[i][k] * game.utility(Side::Sender, i, a))
            .sum::<f64>();
    }
    value
}
