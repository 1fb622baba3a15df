//! Differentially private covariance estimation.
//!
//! Data is a [`Dataset`] of `n` column vectors in the unit ball. The
//! estimators in [`mechanisms`] and [`adaptive`] return a [`MechanismReport`]
//! whose estimate is a noisy [`SymMatrix`] close to the empirical covariance
//! `(1/n) sum X_i X_i^T`. All randomness flows through a seeded
//! [`RandomStream`]; [`harness`] runs seeded sweeps and writes CSV results.

// parameter checks are written `!(x > 0.0)` so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adaptive;
pub mod bounds;
pub mod datagen;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod mechanisms;
pub mod privacy;
pub mod rng;

pub use error::{Error, Result};
pub use linalg::{Dataset, EigenDecomp, SymMatrix};
pub use mechanisms::{MechanismReport, Variant};
pub use privacy::{BudgetKind, PrivacyBudget};
pub use rng::RandomStream;
