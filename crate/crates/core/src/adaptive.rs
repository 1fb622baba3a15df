//! Tail-adaptive covariance estimation.
//!
//! The estimator privately finds a radius `r` containing almost all points,
//! clips to it, privately bounds the trace of the clipped data and then runs
//! the sparse vector technique down the dyadic grid `r, r/2, r/4, ...` to find
//! where the (estimated) clipping bias starts to dominate the (estimated)
//! mechanism noise. The final clipped mechanism is whichever of the Gaussian
//! and eigendecomposition-based estimators promises less noise at the chosen
//! threshold.
//!
//! Radii and thresholds are powers of two and are carried around as `i32`
//! exponents. Bias and noise are evaluated relative to `r^2`, so thresholds far
//! below the smallest positive `f64` remain well defined; the final estimate
//! only underflows to zero once `tau^2` does.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bounds::{eta, lap_vec_bound, omega, slw_frob_bound, slw_op_bound, upsilon, BoundConstants};
use crate::error::{invalid, Error, Result};
use crate::linalg::{Dataset, SymMatrix, BALL_TOLERANCE};
use crate::mechanisms::{clip_mechanism, MechanismReport, Variant};
use crate::privacy::{gaussian_scale, laplace_scale, BudgetKind, BudgetLedger, PrivacyBudget};
use crate::rng::{laplace_scalar, RandomStream};

/// Default lower limit on threshold exponents.
pub const DEFAULT_TAU_CAP_EXPONENT: i32 = 4096;

/// `2^e` as an `f64`, including subnormals; 0 below `2^-1074`, infinity above
/// `2^1023`.
pub fn pow2(e: i32) -> f64 {
    if e > 1023 {
        f64::INFINITY
    } else if e >= -1022 {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else if e >= -1074 {
        f64::from_bits(1u64 << (e + 1074))
    } else {
        0.0
    }
}

/// `x * 2^e` without intermediate overflow or underflow of the factor.
pub(crate) fn ldexp(mut x: f64, mut e: i32) -> f64 {
    while e > 1000 {
        x *= pow2(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= pow2(-1000);
        e += 1000;
    }
    x * pow2(e)
}

/// The `s` with `2^s < r <= 2^(s+1)`, for `r > 0`.
pub fn dyadic_bucket(r: f64) -> i32 {
    assert!(r > 0.0 && r.is_finite(), "bucket of non-positive norm {r}");
    let bits = r.to_bits();
    let exp_field = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (p, exact) = if exp_field == 0 {
        // subnormal: r = frac * 2^-1074
        (63 - frac.leading_zeros() as i32 - 1074, frac.is_power_of_two())
    } else {
        (exp_field - 1023, frac == 0)
    };
    if exact {
        p - 1
    } else {
        p
    }
}

/// Sparse vector technique ("above threshold").
///
/// Perturbs the threshold with `Lap(2 sensitivity / eps)` and each query with
/// `Lap(4 sensitivity / eps)`, returning the 1-based index of the first query
/// whose noisy value reaches the noisy threshold, or `count + 1` if none does.
/// Queries are pulled lazily.
pub fn svt<I>(queries: I, sensitivity: f64, threshold: f64, eps: f64, stream: &mut RandomStream) -> Result<usize>
where
    I: IntoIterator<Item = f64>,
{
    if !(sensitivity > 0.0 && eps > 0.0) {
        return Err(invalid("sparse vector needs positive sensitivity and epsilon"));
    }
    let noisy_t = threshold + laplace_scalar(stream, 2.0 * sensitivity / eps)?;
    let mut k = 0;
    for f in queries {
        k += 1;
        if f + laplace_scalar(stream, 4.0 * sensitivity / eps)? >= noisy_t {
            return Ok(k);
        }
    }
    Ok(k + 1)
}

/// Outcome of the private radius search, as a dyadic exponent.
fn priv_radius_core(norms: &[f64], eps: f64, beta: f64, j_max: u32, stream: &mut RandomStream) -> Result<Option<i32>> {
    let mut sorted = norms.to_vec();
    sorted.sort_by(f64::total_cmp);
    let above = |r: f64| (sorted.len() - sorted.partition_point(|&v| v <= r)) as f64;
    let t = (6.0 / eps) * (2.0 * (j_max as f64 + 1.0) / beta).ln();
    let k = svt((0..=j_max).map(|j| above(pow2(-(j as i32)))), 1.0, t, eps, stream)?;
    if k as u32 > j_max + 1 {
        return Ok(None);
    }
    let j = (k - 1) as i32;
    Ok(Some((1 - j).min(0)))
}

/// Private estimate of the largest column norm, clipping few points.
///
/// Runs [`svt`] over the candidate radii `2^-j`, `j = 0..=ceil(log2(1/b))`,
/// with queries `|{i : ||X_i|| > 2^-j}|` and threshold
/// `(6/eps) ln(2(J+1)/beta)`. Returns `min(1, 2^(1-j))` for the first
/// triggering `j` and `b` if none triggers.
pub fn priv_radius(x: &Dataset, eps: f64, beta: f64, b: f64, stream: &mut RandomStream) -> Result<f64> {
    if !(b > 0.0 && b < 1.0) {
        return Err(invalid(format!("radius floor must lie in (0, 1), got {b}")));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(invalid(format!("beta must lie in (0, 1), got {beta}")));
    }
    let j_max = (1.0 / b).log2().ceil() as u32;
    Ok(match priv_radius_core(&x.norms(), eps, beta, j_max, stream)? {
        Some(e) => pow2(e),
        None => b,
    })
}

/// Counts of column norms per dyadic interval `(2^s, 2^(s+1)]`. Zero columns
/// are not counted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormHistogram {
    n: usize,
    counts: BTreeMap<i32, u64>,
}

impl NormHistogram {
    pub fn from_norms(norms: &[f64]) -> Self {
        let mut counts = BTreeMap::new();
        for &r in norms.iter().filter(|&&r| r > 0.0) {
            *counts.entry(dyadic_bucket(r)).or_insert(0) += 1;
        }
        Self { n: norms.len(), counts }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn counts(&self) -> &BTreeMap<i32, u64> {
        &self.counts
    }

    pub fn count(&self, s: i32) -> u64 {
        self.counts.get(&s).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Histogram after clipping every norm to `2^e` and dividing by `2^e`.
    fn clipped_relative(&self, e: i32) -> Self {
        let mut counts = BTreeMap::new();
        for (&s, &c) in &self.counts {
            *counts.entry(s.min(e - 1) - e).or_insert(0) += c;
        }
        Self { n: self.n, counts }
    }

    fn suffix(&self) -> BiasTable {
        let mut buckets = Vec::new();
        let mut cnt = Vec::new();
        let mut mass = Vec::new();
        let (mut c_acc, mut m_acc) = (0.0, 0.0);
        for (&s, &c) in self.counts.iter().rev().filter(|(&s, _)| s < 0) {
            c_acc += c as f64;
            m_acc += c as f64 * pow2(2 * s + 2);
            buckets.push(s);
            cnt.push(c_acc);
            mass.push(m_acc);
        }
        BiasTable { n: self.n as f64, buckets, cnt, mass }
    }
}

pub fn build_histogram(x: &Dataset) -> NormHistogram {
    NormHistogram::from_norms(&x.norms())
}

/// Suffix sums over negative buckets in descending order, for constant-time
/// bias evaluation down the threshold grid.
struct BiasTable {
    n: f64,
    buckets: Vec<i32>,
    cnt: Vec<f64>,
    mass: Vec<f64>,
}

impl BiasTable {
    /// `(1/n) sum_{t <= s < 0} Count_s (4^(s+1) - 4^t)`.
    fn bias(&self, t: i32) -> f64 {
        // buckets are descending; those >= t form a prefix
        let k = self.buckets.partition_point(|&s| s >= t);
        if k == 0 {
            return 0.0;
        }
        let v = (self.mass[k - 1] - pow2(2 * t) * self.cnt[k - 1]) / self.n;
        v.max(0.0)
    }
}

/// Estimated clipping bias at threshold `tau`, which must be a power of two
/// in `(0, 1]`.
pub fn bias_hat(h: &NormHistogram, tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau <= 1.0) || tau.to_bits() & ((1u64 << 52) - 1) != 0 {
        return Err(invalid(format!("threshold must be a power of two in (0, 1], got {tau}")));
    }
    if h.n == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok(h.suffix().bias(dyadic_bucket(tau) + 1))
}

/// High-probability bounds on the error of the final clipped mechanism.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    /// Gaussian and eigendecomposition-based estimators at `rho`.
    Zcdp { rho: f64, beta: f64 },
    /// Laplace and pure eigendecomposition-based estimators at `eps`.
    Pure { eps: f64, beta: f64, constants: BoundConstants },
}

impl NoiseModel {
    /// Error bound of the clipped worst-case estimator.
    pub fn gauss(&self, tau: f64, d: usize, n: usize) -> Result<f64> {
        let n = n as f64;
        Ok(match *self {
            NoiseModel::Zcdp { rho, beta } => tau * tau * omega(d, beta)? / (rho.sqrt() * n),
            NoiseModel::Pure { eps, beta, constants } => {
                tau * tau * (2f64.sqrt() * d as f64 / (eps * n)) * slw_frob_bound(d, beta, &constants)?
            }
        })
    }

    /// Error bound of the clipped eigendecomposition-based estimator.
    /// Negative trace estimates are treated as zero.
    pub fn separate(&self, trace: f64, tau: f64, d: usize, n: usize) -> Result<f64> {
        let tr = trace.max(0.0);
        let nf = n as f64;
        Ok(match *self {
            NoiseModel::Zcdp { rho, beta } => {
                tau * 2f64.powf(1.25) * tr.sqrt() / (rho.powf(0.25) * nf.sqrt()) * upsilon(d, beta / 2.0)?.sqrt()
                    + tau * tau * 2f64.sqrt() / (rho.sqrt() * nf) * eta(d, beta / 2.0)?
            }
            NoiseModel::Pure { eps, beta, constants } => {
                let s = 2.0 * 2f64.sqrt() * d as f64 / (eps * nf);
                tau * 2.0 * (tr * s * slw_op_bound(d, beta / 2.0, &constants)?).sqrt()
                    + tau * tau * (4.0 / (eps * nf)) * lap_vec_bound(d, beta / 2.0, &constants)?
            }
        })
    }

    pub fn hat(&self, trace: f64, tau: f64, d: usize, n: usize) -> Result<f64> {
        Ok(self.gauss(tau, d, n)?.min(self.separate(trace, tau, d, n)?))
    }
}

/// `tau^2 omega(d, beta) / (sqrt(rho) n)`.
pub fn gauss_noise_bound(tau: f64, rho: f64, beta: f64, d: usize, n: usize) -> Result<f64> {
    NoiseModel::Zcdp { rho, beta }.gauss(tau, d, n)
}

/// `tau 2^1.25 sqrt(tr) sqrt(upsilon(d, beta/2)) / (rho^1/4 sqrt(n))
///  + tau^2 sqrt(2) eta(d, beta/2) / (sqrt(rho) n)`.
pub fn separate_noise_bound(trace: f64, tau: f64, rho: f64, beta: f64, d: usize, n: usize) -> Result<f64> {
    NoiseModel::Zcdp { rho, beta }.separate(trace, tau, d, n)
}

pub fn noise_hat(trace: f64, tau: f64, rho: f64, beta: f64, d: usize, n: usize) -> Result<f64> {
    NoiseModel::Zcdp { rho, beta }.hat(trace, tau, d, n)
}

/// Noisy upper bound on a trace with sensitivity `r2 / n`, capped at `r2`.
fn trace_ub_core(tr: f64, r2: f64, n: usize, budget: PrivacyBudget, beta: f64, stream: &mut RandomStream) -> Result<f64> {
    let sens = r2 / n as f64;
    let noisy = match budget.kind {
        BudgetKind::Zcdp => {
            let scale = gaussian_scale(sens, budget.value)?;
            tr + scale * stream.normal() + scale * (2.0 * (8.0 / beta).ln()).sqrt()
        }
        BudgetKind::Pure => {
            let scale = laplace_scale(sens, budget.value)?;
            tr + scale * stream.laplace_unit() + scale * (8.0 / beta).ln()
        }
    };
    Ok(noisy.min(r2))
}

/// Private upper bound on the trace of data clipped to radius `r`.
///
/// Adds Gaussian (zCDP) or Laplace (pure) noise calibrated to the trace's
/// sensitivity `r^2/n`, shifts it up by its `beta/8` tail quantile and caps
/// the result at `r^2`.
pub fn private_trace_ub(
    clipped: &Dataset,
    r: f64,
    budget: PrivacyBudget,
    beta: f64,
    stream: &mut RandomStream,
) -> Result<f64> {
    if clipped.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(r > 0.0) {
        return Err(invalid("radius must be positive"));
    }
    let norms = clipped.norms();
    if norms.iter().any(|&v| v > r * (1.0 + BALL_TOLERANCE)) {
        return Err(invalid("trace bound needs data clipped to the radius"));
    }
    let tr = norms.iter().map(|v| v * v).sum::<f64>() / norms.len() as f64;
    trace_ub_core(tr, r * r, clipped.len(), budget, beta, stream)
}

/// `(n / (4 r^2)) (BiasHat - NoiseHat)` for data clipped to `r`.
#[allow(clippy::too_many_arguments)]
pub fn diff_query(
    h: &NormHistogram,
    trace: f64,
    tau: f64,
    rho: f64,
    beta: f64,
    r: f64,
    d: usize,
    n: usize,
) -> Result<f64> {
    let noise = noise_hat(trace, tau, rho, beta, d, n)?;
    Ok(n as f64 / (4.0 * r * r) * (bias_hat(h, tau)? - noise))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveConfig {
    pub beta: f64,
    /// Thresholds and the radius floor never go below `2^-tau_cap_exponent`.
    pub tau_cap_exponent: i32,
    pub constants: BoundConstants,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self { beta: 0.05, tau_cap_exponent: DEFAULT_TAU_CAP_EXPONENT, constants: BoundConstants::default() }
    }
}

impl AdaptiveConfig {
    pub fn with_beta(beta: f64) -> Self {
        Self { beta, ..Self::default() }
    }

    /// Smallest threshold exponent on the grid: `max(-d n, -cap)`.
    pub fn smallest_tau_exponent(&self, d: usize, n: usize) -> i32 {
        neg_capped(d as u64 * n as u64, self.tau_cap_exponent)
    }

    /// Exponent of the radius floor `b`: `max(-2 d n, -cap)`.
    pub fn radius_floor_exponent(&self, d: usize, n: usize) -> i32 {
        neg_capped(2 * d as u64 * n as u64, self.tau_cap_exponent)
    }

    fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(invalid(format!("beta must lie in (0, 1), got {}", self.beta)));
        }
        if self.tau_cap_exponent < 1 {
            return Err(invalid("threshold cap exponent must be at least 1"));
        }
        Ok(())
    }
}

fn neg_capped(v: u64, cap: i32) -> i32 {
    -(v.min(cap as u64) as i32)
}

/// What the adaptive estimator decided along the way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveDetails {
    pub radius_exponent: i32,
    pub radius: f64,
    /// Private trace upper bound of the radius-clipped data.
    pub trace_ub: f64,
    /// Index returned by the threshold search.
    pub svt_index: usize,
    pub tau_exponent: i32,
    pub tau: f64,
    pub branch: Variant,
    pub ledger: BudgetLedger,
}

/// Threshold search shared by both privacy notions. Returns the decision and
/// the budget left for the final mechanism.
fn choose_threshold(
    x: &Dataset,
    budget: PrivacyBudget,
    cfg: &AdaptiveConfig,
    stream: &mut RandomStream,
) -> Result<(AdaptiveDetails, PrivacyBudget)> {
    cfg.validate()?;
    if x.is_empty() {
        return Err(Error::EmptyDataset);
    }
    x.ensure_ball_constrained()?;
    let (d, n) = (x.dim(), x.len());
    let beta = cfg.beta;

    let mut ledger = BudgetLedger::new(budget);
    let (radius_b, trace_b, svt_b, final_b, model) = match budget.kind {
        BudgetKind::Zcdp => {
            let (r, t, s, f) = (
                ledger.spend("radius", 0.125),
                ledger.spend("trace", 0.125),
                ledger.spend("svt", 0.25),
                ledger.spend("final", 0.5),
            );
            let model = NoiseModel::Zcdp { rho: f.value, beta: beta / 2.0 };
            (r, t, s, f, model)
        }
        BudgetKind::Pure => {
            let (r, t, s, f) = (
                ledger.spend("radius", 0.25),
                ledger.spend("trace", 0.25),
                ledger.spend("svt", 0.25),
                ledger.spend("final", 0.25),
            );
            let model = NoiseModel::Pure { eps: f.value, beta: beta / 2.0, constants: cfg.constants };
            (r, t, s, f, model)
        }
    };
    ledger.check()?;
    // pure-DP epsilon of a step, for the sparse-vector based steps
    let eps_of = |b: PrivacyBudget| match b.kind {
        BudgetKind::Zcdp => (2.0 * b.value).sqrt(),
        BudgetKind::Pure => b.value,
    };

    let norms = x.norms();
    let floor = cfg.radius_floor_exponent(d, n);
    let e_r = priv_radius_core(&norms, eps_of(radius_b), beta / 8.0, (-floor) as u32, &mut stream.substream_named("radius"))?
        .unwrap_or(floor);

    let hist = NormHistogram::from_norms(&norms).clipped_relative(e_r);
    let tr_rel = norms
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| if dyadic_bucket(v) >= e_r { 1.0 } else { ldexp(v, -e_r).powi(2) })
        .sum::<f64>()
        / n as f64;
    let trace_rel = trace_ub_core(tr_rel, 1.0, n, trace_b, beta, &mut stream.substream_named("trace"))?;

    // grid of relative exponents 0, -1, ..., down to the smallest threshold
    let smallest = cfg.smallest_tau_exponent(d, n);
    let steps = (e_r - smallest).max(0) as usize + 1;
    let table = hist.suffix();
    let mut failure = None;
    let diffs = (0..steps).map(|k| {
        let t = -(k as i32);
        match model.hat(trace_rel, pow2(t), d, n) {
            Ok(noise) => n as f64 / 4.0 * (table.bias(t) - noise),
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    });
    let k = svt(diffs, 1.0, 0.0, eps_of(svt_b), &mut stream.substream_named("svt"))?;
    if let Some(e) = failure {
        return Err(e);
    }
    // t~ = e_r + 1 - k; the threshold one step above it, capped at the radius
    let t_tilde = e_r + 1 - k as i32;
    let tau_exponent = (t_tilde + 1).min(e_r);
    let tau_rel = pow2(tau_exponent - e_r);
    let sep_wins = model.separate(trace_rel, tau_rel, d, n)? < model.gauss(tau_rel, d, n)?;
    let branch = match (budget.kind, sep_wins) {
        (BudgetKind::Zcdp, false) => Variant::Gauss,
        (BudgetKind::Zcdp, true) => Variant::Separate,
        (BudgetKind::Pure, false) => Variant::Lap,
        (BudgetKind::Pure, true) => Variant::SeparatePure,
    };
    let details = AdaptiveDetails {
        radius_exponent: e_r,
        radius: pow2(e_r),
        trace_ub: ldexp(trace_rel, 2 * e_r),
        svt_index: k,
        tau_exponent,
        tau: pow2(tau_exponent),
        branch,
        ledger,
    };
    Ok((details, final_b))
}

fn adaptive_run(
    x: &Dataset,
    budget: PrivacyBudget,
    cfg: &AdaptiveConfig,
    stream: &mut RandomStream,
) -> Result<MechanismReport> {
    let (details, final_b) = choose_threshold(x, budget, cfg, stream)?;
    let tau = details.tau;
    let estimate = if tau * tau == 0.0 {
        SymMatrix::zeros(x.dim())
    } else {
        clip_mechanism(x, final_b, tau, &mut stream.substream_named("final"), details.branch)?.estimate
    };
    let spent = details.ledger.check()?;
    Ok(MechanismReport {
        estimate,
        budget_spent: Some(spent),
        clip_threshold: Some(tau),
        variant: details.branch,
        adaptive: Some(details),
    })
}

/// Tail-adaptive estimator under `rho`-zCDP with default settings.
pub fn adaptive_cov(x: &Dataset, rho: f64, beta: f64, stream: &mut RandomStream) -> Result<MechanismReport> {
    adaptive_cov_with(x, PrivacyBudget::zcdp(rho)?, &AdaptiveConfig::with_beta(beta), stream)
}

/// Tail-adaptive estimator under `eps`-DP with default settings.
pub fn adaptive_cov_pure(x: &Dataset, eps: f64, beta: f64, stream: &mut RandomStream) -> Result<MechanismReport> {
    adaptive_cov_with(x, PrivacyBudget::pure(eps)?, &AdaptiveConfig::with_beta(beta), stream)
}

/// Tail-adaptive estimator for either budget kind. zCDP budgets are split
/// 1/8 radius, 1/8 trace, 1/4 threshold search, 1/2 final mechanism; pure
/// budgets in four equal parts.
pub fn adaptive_cov_with(
    x: &Dataset,
    budget: PrivacyBudget,
    cfg: &AdaptiveConfig,
    stream: &mut RandomStream,
) -> Result<MechanismReport> {
    adaptive_run(x, budget, cfg, stream)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{clip_dataset, covariance, l2_norm, tail_gamma};

    fn dataset_with_norms(d: usize, norms: &[f64], seed: u64) -> Dataset {
        let mut s = RandomStream::new(seed);
        let cols: Vec<Vec<f64>> = norms
            .iter()
            .map(|&r| {
                let v: Vec<f64> = (0..d).map(|_| s.raw_normal()).collect();
                let l = l2_norm(&v);
                v.iter().map(|x| x * r / l).collect()
            })
            .collect();
        Dataset::from_columns(&cols).unwrap()
    }

    #[test]
    fn pow2_and_buckets() {
        assert_eq!(pow2(0), 1.0);
        assert_eq!(pow2(-3), 0.125);
        assert_eq!(pow2(-1074), f64::from_bits(1));
        assert_eq!(pow2(-1075), 0.0);
        assert_eq!(ldexp(pow2(-1030), 1030), 1.0);
        assert_eq!(pow2(1030), f64::INFINITY);
        assert_eq!(dyadic_bucket(0.3), -2);
        assert_eq!(dyadic_bucket(0.6), -1);
        assert_eq!(dyadic_bucket(1.0), -1);
        assert_eq!(dyadic_bucket(0.5), -2);
        assert_eq!(dyadic_bucket(0.500001), -1);
        assert_eq!(dyadic_bucket(f64::from_bits(1)), -1075);
        assert_eq!(dyadic_bucket(f64::from_bits(3)), -1073);
        for r in [1e-5, 0.07, 0.99, 3.0, 1e-310] {
            let s = dyadic_bucket(r);
            assert!(2f64.powi(s) < r || pow2(s) < r);
            assert!(r <= ldexp(1.0, s + 1));
        }
        assert_eq!(ldexp(3.0, -1100), 3.0 * pow2(-1074) * pow2(-26));
        assert_eq!(ldexp(pow2(-1074), 1074), 1.0);
    }

    #[test]
    fn svt_zero_noise() {
        let mut s = RandomStream::zero_noise(0);
        assert_eq!(svt([-5.0, -3.0, 2.0], 1.0, 0.0, 1.0, &mut s).unwrap(), 3);
        assert_eq!(svt([-5.0, -3.0, -2.0], 1.0, 0.0, 1.0, &mut s).unwrap(), 4);
        assert_eq!(svt(std::iter::empty(), 1.0, 0.0, 1.0, &mut s).unwrap(), 1);
        assert!(svt([1.0], 0.0, 0.0, 1.0, &mut s).is_err());
        // queries after the trigger are never evaluated
        let mut pulled = 0;
        let q = (0..100).map(|i| {
            pulled += 1;
            i as f64
        });
        assert_eq!(svt(q, 1.0, 4.5, 1.0, &mut s).unwrap(), 6);
        assert_eq!(pulled, 6);
    }

    #[test]
    fn priv_radius_zero_noise() {
        let mut s = RandomStream::zero_noise(0);
        let x = dataset_with_norms(3, &vec![1.0; 200], 1);
        assert_eq!(priv_radius(&x, 1.0, 0.1, 2f64.powi(-20), &mut s).unwrap(), 1.0);
        let z = Dataset::from_columns(&vec![vec![0.0; 3]; 50]).unwrap();
        let b = 2f64.powi(-20);
        assert_eq!(priv_radius(&z, 1.0, 0.1, b, &mut s).unwrap(), b);
        // all norms 0.1: count above 2^-j is n once 2^-j < 0.1, i.e. j = 4
        let x = dataset_with_norms(3, &vec![0.1; 200], 2);
        assert_eq!(priv_radius(&x, 1.0, 0.1, b, &mut s).unwrap(), 0.125);
        assert!(priv_radius(&x, 1.0, 0.1, 0.0, &mut s).is_err());
        assert!(priv_radius(&x, 1.0, 0.1, 1.0, &mut s).is_err());
    }

    #[test]
    fn histogram_cases() {
        let z = Dataset::from_columns(&vec![vec![0.0, 0.0]; 4]).unwrap();
        assert!(build_histogram(&z).counts().is_empty());
        let h = NormHistogram::from_norms(&[0.3, 0.6]);
        assert_eq!(h.count(-2), 1);
        assert_eq!(h.count(-1), 1);
        assert_eq!(h.total(), 2);
        let c = NormHistogram::from_norms(&[0.3, 0.6, 0.01]).clipped_relative(-2);
        // 0.6 and 0.3 clip to 0.25 -> relative bucket -1; 0.01/0.25 = 0.04 -> -5
        assert_eq!(c.count(-1), 2);
        assert_eq!(c.count(-5), 1);
    }

    #[test]
    fn bias_hat_cases() {
        let h = NormHistogram::from_norms(&[0.6]);
        assert!((bias_hat(&h, 0.5).unwrap() - 0.75).abs() < 1e-15);
        let small = NormHistogram::from_norms(&[0.1, 0.2, 0.0]);
        assert_eq!(bias_hat(&small, 0.25).unwrap(), 0.0);
        assert!(bias_hat(&h, 0.3).is_err());
        assert!(bias_hat(&h, 2.0).is_err());
        assert_eq!(bias_hat(&h, 1.0).unwrap(), 0.0);

        // direct formula over norms versus the suffix table
        let norms = [0.9, 0.45, 0.3, 0.3, 0.07, 0.001, 0.0];
        let h = NormHistogram::from_norms(&norms);
        for t in -12..=0 {
            let tau = 2f64.powi(t);
            let direct: f64 = norms
                .iter()
                .filter(|&&r| r > tau)
                .map(|&r| {
                    let s = (r.log2().ceil() as i32) - 1;
                    4f64.powi(s + 1) - tau * tau
                })
                .sum::<f64>()
                / norms.len() as f64;
            assert!((bias_hat(&h, tau).unwrap() - direct).abs() < 1e-15, "t={t}");
            let x = dataset_with_norms(2, &norms, 3);
            assert!(bias_hat(&h, tau).unwrap() <= 2.0 * tail_gamma(&x, tau) + 1e-15);
        }
    }

    #[test]
    fn noise_bounds() {
        let (rho, beta, d, n) = (0.1, 0.05, 64, 1000);
        let g = gauss_noise_bound(1.0, rho, beta, d, n).unwrap();
        let independent = {
            let l = (2.0f64 / beta).ln();
            let w = (64.0f64 * 64.0 + 2.0 * (64.0 * l).sqrt() * (1.0 + 126f64.sqrt()) + 6.0 * l).sqrt();
            w / (rho.sqrt() * 1000.0)
        };
        assert!((g - independent).abs() < 1e-12);
        assert_eq!(gauss_noise_bound(0.0, rho, beta, d, n).unwrap(), 0.0);
        assert!((gauss_noise_bound(0.5, rho, beta, d, n).unwrap() * 4.0 - g).abs() < 1e-15);

        let tr = 0.3;
        let tau = 0.25;
        let s1 = separate_noise_bound(tr, tau, rho, beta, d, n).unwrap();
        let s2 = separate_noise_bound(tr, 2.0 * tau, rho, beta, d, n).unwrap();
        let quad = 2.0 * tau * tau * 2f64.sqrt() / (rho.sqrt() * 1000.0) * eta(d, beta / 2.0).unwrap();
        assert!((s2 - 2.0 * s1 - quad).abs() < 1e-12);
        assert_eq!(separate_noise_bound(tr, 0.0, rho, beta, d, n).unwrap(), 0.0);

        for tau in [1e-4, 1e-2, 0.1, 0.5, 1.0] {
            let h = noise_hat(tr, tau, rho, beta, d, n).unwrap();
            let a = gauss_noise_bound(tau, rho, beta, d, n).unwrap();
            let b = separate_noise_bound(tr, tau, rho, beta, d, n).unwrap();
            assert_eq!(h, a.min(b));
        }
    }

    #[test]
    fn private_trace_cases() {
        let x = dataset_with_norms(3, &[0.5, 0.25, 0.5, 0.0], 4);
        let tr = (0.25 + 0.0625 + 0.25) / 4.0;
        let b = PrivacyBudget::zcdp(0.1 / 8.0).unwrap();
        let beta = 0.05;
        let got = private_trace_ub(&x, 0.5, b, beta, &mut RandomStream::zero_noise(0)).unwrap();
        let offset = 2.0 * 2f64.sqrt() * 0.25 / (0.1f64.sqrt() * 4.0) * (8.0 / beta).ln().sqrt();
        assert!((got - (tr + offset).min(0.25)).abs() < 1e-12);
        assert!(got <= 0.25);
        let pure = private_trace_ub(&x, 0.5, PrivacyBudget::pure(100.0).unwrap(), beta, &mut RandomStream::zero_noise(0))
            .unwrap();
        assert!((pure - (tr + 0.25 / 400.0 * (8.0 / beta).ln())).abs() < 1e-12);
        assert!(private_trace_ub(&x, 0.3, b, beta, &mut RandomStream::new(0)).is_err());

        let mut s = RandomStream::new(9);
        let covered = (0..10_000).filter(|_| private_trace_ub(&x, 0.5, b, beta, &mut s).unwrap() >= tr).count();
        assert!(covered as f64 >= 10_000.0 * (1.0 - beta / 8.0) - 30.0, "{covered}");
    }

    #[test]
    fn diff_is_monotone_along_grid() {
        let norms: Vec<f64> = (0..300).map(|i| 0.9f64.powi(i % 60)).collect();
        let x = dataset_with_norms(10, &norms, 5);
        let h = build_histogram(&x);
        let mut prev = f64::NEG_INFINITY;
        for t in 0..40 {
            let v = diff_query(&h, 0.2, 2f64.powi(-t), 0.1, 0.05, 1.0, 10, 300).unwrap();
            assert!(v >= prev - 1e-12, "t={t}");
            prev = v;
        }
        assert!(diff_query(&h, 0.2, 1.0, 0.1, 0.05, 1.0, 10, 300).unwrap() < 0.0);
    }

    #[test]
    fn adaptive_zero_data_gives_zero() {
        let z = Dataset::from_columns(&vec![vec![0.0; 4]; 30]).unwrap();
        for b in [PrivacyBudget::zcdp(0.5).unwrap(), PrivacyBudget::pure(0.5).unwrap()] {
            let r = adaptive_cov_with(&z, b, &AdaptiveConfig::default(), &mut RandomStream::zero_noise(1)).unwrap();
            assert_eq!(r.estimate, SymMatrix::zeros(4));
            assert_eq!(r.budget_spent, Some(b));
            let det = r.adaptive.unwrap();
            assert_eq!(det.radius_exponent, -240);
        }
    }

    #[test]
    fn adaptive_is_seeded_and_accounted() {
        let norms: Vec<f64> = (0..400).map(|i| if i < 4 { 1.0 } else { 0.05 }).collect();
        let x = dataset_with_norms(12, &norms, 6);
        for b in [PrivacyBudget::zcdp(1.0).unwrap(), PrivacyBudget::pure(2.0).unwrap()] {
            let a = adaptive_cov_with(&x, b, &AdaptiveConfig::default(), &mut RandomStream::new(3)).unwrap();
            let c = adaptive_cov_with(&x, b, &AdaptiveConfig::default(), &mut RandomStream::new(3)).unwrap();
            assert_eq!(a, c);
            assert!(a.estimate.is_symmetric());
            let det = a.adaptive.unwrap();
            assert_eq!(det.ledger.check().unwrap().value, b.value);
            assert_eq!(det.ledger.entries.len(), 4);
            assert!(det.tau <= det.radius);
            assert_eq!(Some(det.branch.budget_kind().unwrap()), Some(b.kind));
        }
    }

    #[test]
    fn adaptive_zero_noise_matches_clipped_covariance() {
        let norms: Vec<f64> = (0..500).map(|i| if i < 3 { 1.0 } else { 0.1 }).collect();
        let x = dataset_with_norms(6, &norms, 7);
        let r = adaptive_cov(&x, 1.0, 0.05, &mut RandomStream::zero_noise(0)).unwrap();
        let tau = r.clip_threshold.unwrap();
        let exact = covariance(&clip_dataset(&x, tau)).unwrap();
        let diff = crate::linalg::frobenius_dist(&r.estimate, &exact).unwrap();
        assert!(diff <= 1e-12 * exact.frobenius_norm().max(1e-300), "{diff}");
    }

    #[test]
    fn config_exponents() {
        let c = AdaptiveConfig::default();
        assert_eq!(c.smallest_tau_exponent(3, 10), -30);
        assert_eq!(c.radius_floor_exponent(3, 10), -60);
        assert_eq!(c.smallest_tau_exponent(64, 1000), -4096);
        let c = AdaptiveConfig { tau_cap_exponent: 50, ..c };
        assert_eq!(c.radius_floor_exponent(3, 10), -50);
        assert!(AdaptiveConfig { tau_cap_exponent: 0, ..c }.validate().is_err());
    }
}
