//! Private covariance estimators: the Gaussian and Laplace baselines, the
//! eigendecomposition-based estimator that privatizes eigenvalues and
//! eigenvectors separately (zCDP and pure-DP), their clipped variants and the
//! all-zero baseline.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::adaptive::AdaptiveDetails;
use crate::error::{invalid, Error, Result};
use crate::linalg::{covariance, eig_sym, eigvals_sym, l2_norm, reconstruct, Dataset, SymMatrix};
use crate::privacy::{compose, gaussian_scale, laplace_scale, BudgetKind, PrivacyBudget};
use crate::rng::{gaussian_vector, laplace_vector, sgw_matrix, slw_matrix, RandomStream};

/// Which estimator produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Gauss,
    Lap,
    Separate,
    SeparatePure,
    Zero,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Gauss => "gauss",
            Variant::Lap => "lap",
            Variant::Separate => "separate",
            Variant::SeparatePure => "separate_pure",
            Variant::Zero => "zero",
        }
    }

    /// The budget kind the variant consumes (`None` for the zero baseline).
    pub fn budget_kind(&self) -> Option<BudgetKind> {
        match self {
            Variant::Gauss | Variant::Separate => Some(BudgetKind::Zcdp),
            Variant::Lap | Variant::SeparatePure => Some(BudgetKind::Pure),
            Variant::Zero => None,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MechanismReport {
    pub estimate: SymMatrix,
    /// `None` only for the zero baseline, which touches no data.
    pub budget_spent: Option<PrivacyBudget>,
    pub clip_threshold: Option<f64>,
    pub variant: Variant,
    /// Filled in by the adaptive estimators.
    pub adaptive: Option<AdaptiveDetails>,
}

impl MechanismReport {
    fn new(estimate: SymMatrix, budget: PrivacyBudget, variant: Variant) -> Self {
        Self { estimate, budget_spent: Some(budget), clip_threshold: None, variant, adaptive: None }
    }
}

/// Post-processing switches for [`separate_cov_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SeparateOptions {
    /// Clamp negative noisy eigenvalues to zero before reconstructing.
    pub project_nonnegative: bool,
}

fn check_input(x: &Dataset) -> Result<()> {
    if x.is_empty() {
        return Err(Error::EmptyDataset);
    }
    x.ensure_ball_constrained()
}

fn zcdp(rho: f64) -> Result<PrivacyBudget> {
    PrivacyBudget::zcdp(rho)
}

fn pure(eps: f64) -> Result<PrivacyBudget> {
    PrivacyBudget::pure(eps)
}

/// Splits `b` in halves and checks they compose back to `b`.
fn halves(b: PrivacyBudget) -> Result<PrivacyBudget> {
    let half = b.fraction(0.5);
    let total = compose(&[half, half])?;
    debug_assert_eq!(total.value, b.value);
    Ok(half)
}

pub(crate) fn gauss_from_cov(sigma: &SymMatrix, n: usize, rho: f64, stream: &mut RandomStream) -> Result<SymMatrix> {
    let scale = gaussian_scale(2f64.sqrt() / n as f64, rho)?;
    let w = sgw_matrix(stream, sigma.dim());
    sigma.add_scaled(&w, scale)
}

pub(crate) fn lap_from_cov(sigma: &SymMatrix, n: usize, eps: f64, stream: &mut RandomStream) -> Result<SymMatrix> {
    let d = sigma.dim() as f64;
    let scale = laplace_scale(2f64.sqrt() * d / n as f64, eps)?;
    let w = slw_matrix(stream, sigma.dim());
    sigma.add_scaled(&w, scale)
}

/// Shared body of both eigendecomposition-based estimators: perturb the
/// eigenvalues with `noise`, take eigenvectors from `noisy_cov`.
fn separate_from_parts(
    sigma: &SymMatrix,
    noise: Vec<f64>,
    value_scale: f64,
    noisy_cov: SymMatrix,
    opts: SeparateOptions,
) -> Result<SymMatrix> {
    let mut values = eigvals_sym(sigma)?;
    for (v, z) in values.iter_mut().zip(noise) {
        *v += value_scale * z;
        if opts.project_nonnegative && *v < 0.0 {
            *v = 0.0;
        }
    }
    let vectors = eig_sym(&noisy_cov)?;
    reconstruct(vectors.basis(), &values)
}

pub(crate) fn separate_from_cov(
    sigma: &SymMatrix,
    n: usize,
    rho: f64,
    stream: &mut RandomStream,
    opts: SeparateOptions,
) -> Result<SymMatrix> {
    let half = halves(zcdp(rho)?)?.value;
    let value_scale = gaussian_scale(2f64.sqrt() / n as f64, half)?;
    let noise = gaussian_vector(stream, sigma.dim());
    let noisy = gauss_from_cov(sigma, n, half, stream)?;
    separate_from_parts(sigma, noise, value_scale, noisy, opts)
}

pub(crate) fn separate_pure_from_cov(
    sigma: &SymMatrix,
    n: usize,
    eps: f64,
    stream: &mut RandomStream,
    opts: SeparateOptions,
) -> Result<SymMatrix> {
    let half = halves(pure(eps)?)?.value;
    let value_scale = laplace_scale(2.0 / n as f64, half)?;
    let noise = laplace_vector(stream, sigma.dim());
    let noisy = lap_from_cov(sigma, n, half, stream)?;
    separate_from_parts(sigma, noise, value_scale, noisy, opts)
}

/// Runs `variant` on a precomputed covariance of `n` points, so repeated runs
/// on one dataset skip recomputing it. The caller is responsible for the
/// covariance coming from `n` points inside the unit ball.
pub fn run_on_cov(
    variant: Variant,
    sigma: &SymMatrix,
    n: usize,
    budget: PrivacyBudget,
    stream: &mut RandomStream,
) -> Result<SymMatrix> {
    if let Some(kind) = variant.budget_kind() {
        if kind != budget.kind {
            return Err(Error::MixedBudgetKinds);
        }
    }
    let opts = SeparateOptions::default();
    match variant {
        Variant::Gauss => gauss_from_cov(sigma, n, budget.value, stream),
        Variant::Lap => lap_from_cov(sigma, n, budget.value, stream),
        Variant::Separate => separate_from_cov(sigma, n, budget.value, stream, opts),
        Variant::SeparatePure => separate_pure_from_cov(sigma, n, budget.value, stream, opts),
        Variant::Zero => Ok(SymMatrix::zeros(sigma.dim())),
    }
}

/// `Sigma + W / (sqrt(rho) n)` with `W` a symmetric Gaussian Wigner matrix.
pub fn gauss_cov(x: &Dataset, rho: f64, stream: &mut RandomStream) -> Result<MechanismReport> {
    check_input(x)?;
    let b = zcdp(rho)?;
    let est = gauss_from_cov(&covariance(x)?, x.len(), rho, stream)?;
    Ok(MechanismReport::new(est, b, Variant::Gauss))
}

/// `Sigma + (sqrt(2) d / (eps n)) W` with `W` a symmetric Laplace Wigner matrix.
pub fn lap_cov(x: &Dataset, eps: f64, stream: &mut RandomStream) -> Result<MechanismReport> {
    check_input(x)?;
    let b = pure(eps)?;
    let est = lap_from_cov(&covariance(x)?, x.len(), eps, stream)?;
    Ok(MechanismReport::new(est, b, Variant::Lap))
}

/// Eigenvalues with Gaussian noise (half the budget), eigenvectors of a
/// Gaussian-mechanism estimate (other half), recombined without re-sorting.
pub fn separate_cov(x: &Dataset, rho: f64, stream: &mut RandomStream) -> Result<MechanismReport> {
    separate_cov_with(x, rho, stream, SeparateOptions::default())
}

pub fn separate_cov_with(
    x: &Dataset,
    rho: f64,
    stream: &mut RandomStream,
    opts: SeparateOptions,
) -> Result<MechanismReport> {
    check_input(x)?;
    let b = zcdp(rho)?;
    let est = separate_from_cov(&covariance(x)?, x.len(), rho, stream, opts)?;
    Ok(MechanismReport::new(est, b, Variant::Separate))
}

/// Pure-DP counterpart of [`separate_cov`]: Laplace noise of scale
/// `4 / (eps n)` on the eigenvalues, eigenvectors from [`lap_cov`] at `eps/2`.
pub fn separate_cov_pure(x: &Dataset, eps: f64, stream: &mut RandomStream) -> Result<MechanismReport> {
    check_input(x)?;
    let b = pure(eps)?;
    let est = separate_pure_from_cov(&covariance(x)?, x.len(), eps, stream, SeparateOptions::default())?;
    Ok(MechanismReport::new(est, b, Variant::SeparatePure))
}

/// `(1/tau) Clip(X, tau)`, computed column by column as `x / max(||x||, tau)`.
pub(crate) fn unit_clipped(x: &Dataset, tau: f64) -> Result<Dataset> {
    let mut data = Vec::with_capacity(x.dim() * x.len());
    for c in x.columns() {
        let f = 1.0 / l2_norm(c).max(tau);
        data.extend(c.iter().map(|v| v * f));
    }
    Dataset::from_column_major(x.dim(), data)
}

/// Runs `base` on `(1/tau) Clip(X, tau)` and scales the result by `tau^2`.
///
/// When `tau^2` underflows the estimate is the zero matrix; the budget is still
/// reported as spent.
pub fn clip_mechanism(
    x: &Dataset,
    budget: PrivacyBudget,
    tau: f64,
    stream: &mut RandomStream,
    base: Variant,
) -> Result<MechanismReport> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(invalid(format!("clipping threshold must lie in (0, 1], got {tau}")));
    }
    if base == Variant::Zero {
        return Err(invalid("the zero baseline has no clipped form"));
    }
    check_input(x)?;
    if base.budget_kind() != Some(budget.kind) {
        return Err(Error::MixedBudgetKinds);
    }
    let t2 = tau * tau;
    let estimate = if t2 == 0.0 {
        SymMatrix::zeros(x.dim())
    } else {
        let sigma = covariance(&unit_clipped(x, tau)?)?;
        run_on_cov(base, &sigma, x.len(), budget, stream)?.scaled(t2)
    };
    Ok(MechanismReport {
        estimate,
        budget_spent: Some(budget),
        clip_threshold: Some(tau),
        variant: base,
        adaptive: None,
    })
}

/// The all-zero estimate. Touches no data and spends no budget.
pub fn zero_cov(x: &Dataset) -> Result<MechanismReport> {
    if x.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(MechanismReport {
        estimate: SymMatrix::zeros(x.dim()),
        budget_spent: None,
        clip_threshold: None,
        variant: Variant::Zero,
        adaptive: None,
    })
}

/// Distances between the exact statistics of two datasets of equal shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityProbe {
    /// `||Sigma - Sigma'||_F`
    pub cov_frob: f64,
    /// `||Lambda - Lambda'||_2` of the sorted spectra
    pub eig_frob: f64,
    /// entrywise `||Sigma - Sigma'||_1`
    pub cov_l1: f64,
    /// `||Lambda - Lambda'||_1`
    pub eig_l1: f64,
}

pub fn sensitivity_probe(x: &Dataset, y: &Dataset) -> Result<SensitivityProbe> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), got: y.dim() });
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    let (sx, sy) = (covariance(x)?, covariance(y)?);
    let diff = sx.add_scaled(&sy, -1.0)?;
    let (lx, ly) = (eigvals_sym(&sx)?, eigvals_sym(&sy)?);
    let dl: Vec<f64> = lx.iter().zip(&ly).map(|(a, b)| a - b).collect();
    Ok(SensitivityProbe {
        cov_frob: diff.frobenius_norm(),
        eig_frob: l2_norm(&dl),
        cov_l1: diff.entrywise_l1(),
        eig_l1: dl.iter().map(|v| v.abs()).sum(),
    })
}
