//! Closed-form high-probability bounds on the norms of Gaussian and Laplace
//! noise vectors and Wigner matrices.
//!
//! All logarithms are natural. Where a logarithm of the dimension appears it
//! is floored at one (`log(x) = 1` for `x <= e`) so tiny dimensions do not
//! produce zero or negative terms.

use crate::error::{invalid, Result};

/// Constant multiplying the `log(1/beta) * log(d)` deviation term of the
/// Laplace bounds. The deviation inequality behind those bounds only
/// guarantees that *some* constant works; the default was calibrated by
/// Monte-Carlo so that every Laplace bound covers at least `1 - beta` of
/// samples for `d` in `{16, 64, 256}` and `beta` in `{0.05, 0.2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    pub lap_c: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        Self { lap_c: 4.0 }
    }
}

impl BoundConstants {
    pub fn new(lap_c: f64) -> Result<Self> {
        if !(lap_c > 0.0 && lap_c.is_finite()) {
            return Err(invalid(format!("Laplace bound constant must be positive, got {lap_c}")));
        }
        Ok(Self { lap_c })
    }
}

/// `log(x)`, except that it is 1 for `x <= e`.
pub fn log_floor(x: f64) -> f64 {
    if x <= std::f64::consts::E {
        1.0
    } else {
        x.ln()
    }
}

fn check(d: usize, beta: f64) -> Result<()> {
    if d == 0 {
        return Err(invalid("dimension must be positive"));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(invalid(format!("failure probability must lie in (0, 1), got {beta}")));
    }
    Ok(())
}

/// Bound on `||Y||_2` for `Y ~ N(0, I_d)`:
/// `sqrt(d + 2 sqrt(d log(1/beta)) + 2 log(1/beta))`.
pub fn eta(d: usize, beta: f64) -> Result<f64> {
    check(d, beta)?;
    let d = d as f64;
    let l = (1.0 / beta).ln();
    Ok((d + 2.0 * (d * l).sqrt() + 2.0 * l).sqrt())
}

/// Bound on the operator norm of a `d x d` symmetric Gaussian Wigner matrix.
pub fn upsilon(d: usize, beta: f64) -> Result<f64> {
    check(d, beta)?;
    let df = d as f64;
    let log_d = log_floor(df);
    let ratio = (log_d / df).cbrt();
    let bulk = 2.0 * df.sqrt();
    let edge = 2.0 * df.powf(1.0 / 6.0) * log_d.cbrt();
    let fluct = 6.0 * (1.0 + ratio) * log_d.sqrt() / (1.0 + ratio).ln().sqrt();
    let tail = 2.0 * (2.0 * (1.0 / beta).ln()).sqrt();
    Ok(bulk + edge + fluct + tail)
}

/// Bound on the Frobenius norm of a `d x d` symmetric Gaussian Wigner matrix:
/// `sqrt(d^2 + 2 sqrt(d log(2/beta)) (1 + sqrt(2(d-1))) + 6 log(2/beta))`.
pub fn omega(d: usize, beta: f64) -> Result<f64> {
    check(d, beta)?;
    let df = d as f64;
    let l = (2.0 / beta).ln();
    Ok((df * df + 2.0 * (df * l).sqrt() * (1.0 + (2.0 * (df - 1.0)).sqrt()) + 6.0 * l).sqrt())
}

fn lap_deviation(d: usize, beta: f64, c: &BoundConstants) -> f64 {
    c.lap_c * (1.0 / beta).ln() * log_floor(d as f64)
}

/// Bound on `||Y||_2` for `Y ~ Lap(1)^d`: `1.5 sqrt(d) + c log(1/beta) log(d)`.
pub fn lap_vec_bound(d: usize, beta: f64, c: &BoundConstants) -> Result<f64> {
    check(d, beta)?;
    Ok(1.5 * (d as f64).sqrt() + lap_deviation(d, beta, c))
}

/// Bound on the operator norm of a symmetric Laplace Wigner matrix:
/// `3 sqrt(d) + c log(1/beta) log(d)`.
pub fn slw_op_bound(d: usize, beta: f64, c: &BoundConstants) -> Result<f64> {
    check(d, beta)?;
    Ok(3.0 * (d as f64).sqrt() + lap_deviation(d, beta, c))
}

/// Bound on the Frobenius norm of a symmetric Laplace Wigner matrix:
/// `1.5 d + c log(1/beta) log(d)`.
pub fn slw_frob_bound(d: usize, beta: f64, c: &BoundConstants) -> Result<f64> {
    check(d, beta)?;
    Ok(1.5 * d as f64 + lap_deviation(d, beta, c))
}
