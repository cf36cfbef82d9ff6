//! Trust-aware embodied Bayesian persuasion.
//!
//! The crate is organised bottom-up:
//!
//! - [`persuasion`]: finite persuasion games, signaling schemes, classic and
//!   trust-weighted belief updates, receiver best response, sender value and a
//!   brute-force two-state scheme optimizer.
//! - [`threshold`]: the minimum trust level at which any scheme can move the
//!   receiver off their default action, in general form and in the closed forms
//!   for two-state games and the AV/HV intersection game.
//! - [`signal`]: grounding the persuasive signal in a continuous nudge
//!   magnitude through a monotone likelihood model, and assembling the
//!   committed signaling policy an AV announces.
//! - [`sim`]: a deterministic figure-8 intersection simulator that executes the
//!   committed policies against human drivers and reports collision and
//!   drive-if-clear rates.
//!
//! ```
//! use taebp_core::signal::{build_taebp_policy, IntersectionParams, LikelihoodModel};
//!
//! let params = IntersectionParams::new(0.2, 3.0, 0.6).unwrap();
//! let model = LikelihoodModel::linear(2.0).unwrap();
//! let policy = build_taebp_policy(&params, &model).unwrap();
//! assert!(policy.persuadable);
//! assert!((policy.b.unwrap() - 0.21875).abs() < 1e-12);
//! assert!((policy.persuaded_fraction - 0.375).abs() < 1e-12);
//! ```

// Negated float comparisons such as `!(x > 0.0)` deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
pub mod persuasion;
pub mod signal;
pub mod sim;
pub mod threshold;
pub mod tol;

pub use error::{Error, Result};
