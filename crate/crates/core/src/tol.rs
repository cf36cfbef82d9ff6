//! Numeric tolerances shared across the crate.

/// Construction-time checks on probability vectors (priors, scheme rows).
pub const PROB_TOL: f64 = 1e-12;

/// Checks on derived probabilities (posteriors, policy invariants).
pub const DERIVED_TOL: f64 = 1e-9;

/// Two expected utilities closer than this are treated as a tie.
pub const TIE_TOL: f64 = 1e-9;

/// Bisection stopping width, in signal units.
pub const BISECTION_TOL: f64 = 1e-12;
