//! Experiment runner: mechanisms x datasets x repetitions, Frobenius errors,
//! per-configuration summaries and CSV/JSON output.
//!
//! Every `(configuration, repetition)` pair draws from its own sub-stream of
//! the master seed, and each sweep value's dataset is generated once and
//! shared by all mechanisms and repetitions, so results do not depend on the
//! number of worker threads.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::adaptive::{adaptive_cov_with, AdaptiveConfig, AdaptiveDetails, DEFAULT_TAU_CAP_EXPONENT};
use crate::bounds::BoundConstants;
use crate::datagen::{load_csv, rescale_radius, synth, SynthSpec};
use crate::error::{invalid, Error, Result};
use crate::linalg::{covariance, frobenius_dist, Dataset, SymMatrix};
use crate::mechanisms::{run_on_cov, Variant};
use crate::privacy::{zcdp_to_approx, BudgetKind, PrivacyBudget};
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum MechanismKind {
    Gauss,
    Lap,
    Separate,
    SeparatePure,
    Adaptive,
    AdaptivePure,
    Zero,
}

impl MechanismKind {
    pub const ALL: [MechanismKind; 7] = [
        MechanismKind::Gauss,
        MechanismKind::Lap,
        MechanismKind::Separate,
        MechanismKind::SeparatePure,
        MechanismKind::Adaptive,
        MechanismKind::AdaptivePure,
        MechanismKind::Zero,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MechanismKind::Gauss => "gauss",
            MechanismKind::Lap => "lap",
            MechanismKind::Separate => "separate",
            MechanismKind::SeparatePure => "separate-pure",
            MechanismKind::Adaptive => "adaptive",
            MechanismKind::AdaptivePure => "adaptive-pure",
            MechanismKind::Zero => "zero",
        }
    }

    /// `None` for the zero baseline, which runs under either kind.
    pub fn budget_kind(&self) -> Option<BudgetKind> {
        match self {
            MechanismKind::Gauss | MechanismKind::Separate | MechanismKind::Adaptive => Some(BudgetKind::Zcdp),
            MechanismKind::Lap | MechanismKind::SeparatePure | MechanismKind::AdaptivePure => Some(BudgetKind::Pure),
            MechanismKind::Zero => None,
        }
    }
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MechanismKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|m| m.name() == norm)
            .ok_or_else(|| invalid(format!("unknown mechanism {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Csv(PathBuf),
    Synthetic(SynthSpec),
}

impl DataSource {
    /// Parses `n=1000,d=64,N=4,s=3[,seed=7]`. Missing keys default to
    /// `n=1000, d=64, N=1, s=3, seed=0`.
    pub fn parse_synthetic(text: &str) -> Result<SynthSpec> {
        let mut spec = SynthSpec::new(1000, 64, 1);
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| invalid(format!("expected key=value, got {part:?}")))?;
            let bad = || invalid(format!("bad value for {k}: {v:?}"));
            match k.trim() {
                "n" => spec.n = v.trim().parse().map_err(|_| bad())?,
                "d" => spec.d = v.trim().parse().map_err(|_| bad())?,
                "N" => spec.bins = v.trim().parse().map_err(|_| bad())?,
                "s" => spec.skew = v.trim().parse().map_err(|_| bad())?,
                "seed" => spec.seed = v.trim().parse().map_err(|_| bad())?,
                other => return Err(invalid(format!("unknown synthetic key {other:?}"))),
            }
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    D,
    N,
    Bins,
    Rho,
    Eps,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::D => "d",
            SweepAxis::N => "n",
            SweepAxis::Bins => "N",
            SweepAxis::Rho => "rho",
            SweepAxis::Eps => "eps",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

impl FromStr for Sweep {
    type Err = Error;

    /// `AXIS=v1,v2,...` with `AXIS` one of `d`, `n`, `N`, `rho`, `eps`.
    fn from_str(s: &str) -> Result<Self> {
        let (axis, vals) = s.split_once('=').ok_or_else(|| invalid(format!("expected AXIS=v1,v2,..., got {s:?}")))?;
        let axis = match axis.trim() {
            "d" => SweepAxis::D,
            "n" => SweepAxis::N,
            "N" => SweepAxis::Bins,
            "rho" => SweepAxis::Rho,
            "eps" => SweepAxis::Eps,
            other => return Err(invalid(format!("unknown sweep axis {other:?}"))),
        };
        let values = vals
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| invalid(format!("bad sweep value {v:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if values.is_empty() {
            return Err(invalid("sweep needs at least one value"));
        }
        Ok(Sweep { axis, values })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub mechanisms: Vec<MechanismKind>,
    pub source: DataSource,
    pub budget: PrivacyBudget,
    /// Used only to report the approximate-DP equivalent of zCDP budgets.
    pub delta: f64,
    pub beta: f64,
    pub reps: usize,
    pub sweep: Option<Sweep>,
    pub seed: u64,
    pub zero_noise: bool,
    pub lap_constant: f64,
    pub tau_cap_exponent: i32,
    /// Worker threads; `None` uses the rayon default.
    pub workers: Option<usize>,
    /// Record wall-clock time per run (makes the results file non-reproducible).
    pub timing: bool,
}

impl ExperimentPlan {
    pub fn new(mechanisms: Vec<MechanismKind>, source: DataSource, budget: PrivacyBudget) -> Self {
        Self {
            mechanisms,
            source,
            budget,
            delta: 1e-10,
            beta: 0.05,
            reps: 50,
            sweep: None,
            seed: 0,
            zero_noise: false,
            lap_constant: BoundConstants::default().lap_c,
            tau_cap_exponent: DEFAULT_TAU_CAP_EXPONENT,
            workers: None,
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mechanisms.is_empty() {
            return Err(invalid("no mechanism selected"));
        }
        if self.reps == 0 {
            return Err(invalid("repetitions must be at least 1"));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(invalid(format!("beta must lie in (0, 1), got {}", self.beta)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        BoundConstants::new(self.lap_constant)?;
        for m in &self.mechanisms {
            if let Some(kind) = m.budget_kind() {
                if kind != self.budget.kind {
                    let flag = if kind == BudgetKind::Zcdp { "--rho" } else { "--eps" };
                    return Err(invalid(format!("mechanism {m} needs a {flag} budget")));
                }
            }
        }
        if let Some(sw) = &self.sweep {
            match sw.axis {
                SweepAxis::D | SweepAxis::N | SweepAxis::Bins => {
                    if !matches!(self.source, DataSource::Synthetic(_)) {
                        return Err(invalid(format!("sweeping {} needs synthetic data", sw.axis.name())));
                    }
                    if sw.values.iter().any(|&v| v < 1.0 || v.fract() != 0.0) {
                        return Err(invalid(format!("{} values must be positive integers", sw.axis.name())));
                    }
                }
                SweepAxis::Rho | SweepAxis::Eps => {
                    let kind = if sw.axis == SweepAxis::Rho { BudgetKind::Zcdp } else { BudgetKind::Pure };
                    if kind != self.budget.kind {
                        return Err(invalid(format!("cannot sweep {} with this budget kind", sw.axis.name())));
                    }
                    for &v in &sw.values {
                        PrivacyBudget::new(kind, v)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn points(&self) -> Vec<SweepPoint> {
        match &self.sweep {
            None => vec![SweepPoint { value: None, source: self.source.clone(), budget: self.budget }],
            Some(sw) => sw
                .values
                .iter()
                .map(|&v| {
                    let mut source = self.source.clone();
                    let mut budget = self.budget;
                    match (&mut source, sw.axis) {
                        (DataSource::Synthetic(s), SweepAxis::D) => s.d = v as usize,
                        (DataSource::Synthetic(s), SweepAxis::N) => s.n = v as usize,
                        (DataSource::Synthetic(s), SweepAxis::Bins) => s.bins = v as usize,
                        (_, SweepAxis::Rho | SweepAxis::Eps) => budget.value = v,
                        _ => unreachable!("validated"),
                    }
                    SweepPoint { value: Some(v), source, budget }
                })
                .collect(),
        }
    }

    fn adaptive_config(&self) -> AdaptiveConfig {
        AdaptiveConfig {
            beta: self.beta,
            tau_cap_exponent: self.tau_cap_exponent,
            constants: BoundConstants { lap_c: self.lap_constant },
        }
    }
}

struct SweepPoint {
    value: Option<f64>,
    source: DataSource,
    budget: PrivacyBudget,
}

/// One mechanism run.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub mechanism: MechanismKind,
    pub d: usize,
    pub n: usize,
    /// Number of norm bins, for synthetic data.
    pub bins: Option<usize>,
    pub budget_kind: BudgetKind,
    pub budget_value: f64,
    pub beta: f64,
    /// Seed of the run's random stream.
    pub seed: u64,
    pub rep: usize,
    pub frobenius_error: f64,
    pub elapsed_ms: Option<f64>,
    pub chosen_tau: Option<f64>,
    pub chosen_branch: Option<Variant>,
    /// Index into the sweep values, if any.
    pub sweep_index: Option<usize>,
    pub details: Option<AdaptiveDetails>,
}

/// Mean and sample standard deviation of the error per configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub mechanism: MechanismKind,
    pub sweep_axis: Option<SweepAxis>,
    pub sweep_value: Option<f64>,
    pub d: usize,
    pub n: usize,
    pub bins: Option<usize>,
    pub budget_kind: BudgetKind,
    pub budget_value: f64,
    pub reps: usize,
    pub mean_error: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
}

fn kind_name(k: BudgetKind) -> &'static str {
    match k {
        BudgetKind::Zcdp => "zcdp",
        BudgetKind::Pure => "pure",
    }
}

fn load_point(point: &SweepPoint, master: &RandomStream, index: usize) -> Result<(Dataset, Option<usize>)> {
    match &point.source {
        DataSource::Csv(path) => Ok((rescale_radius(&load_csv(path)?)?, None)),
        DataSource::Synthetic(spec) => {
            // an explicit data seed wins; otherwise derive one from the master seed
            let seed = if spec.seed != 0 { spec.seed } else { master.substream_named("data").substream(index as u64).seed() };
            Ok((synth(&spec.with_seed(seed))?, Some(spec.bins)))
        }
    }
}

struct Prepared {
    x: Dataset,
    sigma: SymMatrix,
    bins: Option<usize>,
}

fn run_one(
    plan: &ExperimentPlan,
    prep: &Prepared,
    budget: PrivacyBudget,
    mech: MechanismKind,
    stream: &mut RandomStream,
) -> Result<(SymMatrix, Option<AdaptiveDetails>)> {
    let n = prep.x.len();
    let fixed = |v: Variant, stream: &mut RandomStream| run_on_cov(v, &prep.sigma, n, budget, stream);
    Ok(match mech {
        MechanismKind::Gauss => (fixed(Variant::Gauss, stream)?, None),
        MechanismKind::Lap => (fixed(Variant::Lap, stream)?, None),
        MechanismKind::Separate => (fixed(Variant::Separate, stream)?, None),
        MechanismKind::SeparatePure => (fixed(Variant::SeparatePure, stream)?, None),
        MechanismKind::Zero => (SymMatrix::zeros(prep.x.dim()), None),
        MechanismKind::Adaptive | MechanismKind::AdaptivePure => {
            let r = adaptive_cov_with(&prep.x, budget, &plan.adaptive_config(), stream)?;
            (r.estimate, r.adaptive)
        }
    })
}

/// Runs every `(sweep value, mechanism, repetition)` combination.
pub fn run_plan(plan: &ExperimentPlan) -> Result<ExperimentOutput> {
    plan.validate()?;
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(w) = plan.workers {
            b = b.num_threads(w.max(1));
        }
        b.build().map_err(|e| invalid(format!("cannot start worker pool: {e}")))?
    };
    let master = RandomStream::new(plan.seed).with_zero_noise(plan.zero_noise);
    let runs = master.substream_named("runs");
    let n_mech = plan.mechanisms.len();
    let mut rows = Vec::new();
    for (pi, point) in plan.points().iter().enumerate() {
        let (x, bins) = load_point(point, &master, pi)?;
        x.ensure_ball_constrained()?;
        let sigma = covariance(&x)?;
        let prep = Prepared { x, sigma, bins };
        let jobs: Vec<(usize, usize)> = (0..n_mech).flat_map(|m| (0..plan.reps).map(move |r| (m, r))).collect();
        let chunk: Vec<Result<ResultRow>> = pool.install(|| {
            jobs.par_iter()
                .map(|&(mi, rep)| {
                    let mech = plan.mechanisms[mi];
                    let config = (pi * n_mech + mi) as u64;
                    let mut stream = runs.substream(config).substream(rep as u64);
                    let seed = stream.seed();
                    let start = Instant::now();
                    let (est, details) = run_one(plan, &prep, point.budget, mech, &mut stream)?;
                    let elapsed = start.elapsed().as_secs_f64() * 1e3;
                    let err = frobenius_dist(&est, &prep.sigma)?;
                    if !err.is_finite() {
                        return Err(Error::NonFiniteMatrix);
                    }
                    Ok(ResultRow {
                        mechanism: mech,
                        d: prep.x.dim(),
                        n: prep.x.len(),
                        bins: prep.bins,
                        budget_kind: point.budget.kind,
                        budget_value: point.budget.value,
                        beta: plan.beta,
                        seed,
                        rep,
                        frobenius_error: err,
                        elapsed_ms: plan.timing.then_some(elapsed),
                        chosen_tau: details.as_ref().map(|d| d.tau),
                        chosen_branch: details.as_ref().map(|d| d.branch),
                        sweep_index: point.value.map(|_| pi),
                        details,
                    })
                })
                .collect()
        });
        for r in chunk {
            rows.push(r?);
        }
    }
    let summary = summarize_with(&rows, plan.sweep.as_ref())?;
    Ok(ExperimentOutput { rows, summary })
}

/// Mean and sample standard deviation (0 for a single row) of the error per
/// configuration, in order of first appearance.
pub fn summarize(rows: &[ResultRow]) -> Result<Vec<SummaryRow>> {
    summarize_with(rows, None)
}

fn summarize_with(rows: &[ResultRow], sweep: Option<&Sweep>) -> Result<Vec<SummaryRow>> {
    if rows.is_empty() {
        return Err(invalid("nothing to summarize"));
    }
    type Key = (MechanismKind, usize, usize, Option<usize>, BudgetKind, u64, Option<usize>);
    let key = |r: &ResultRow| -> Key {
        (r.mechanism, r.d, r.n, r.bins, r.budget_kind, r.budget_value.to_bits(), r.sweep_index)
    };
    let mut groups: Vec<(Key, Vec<&ResultRow>)> = Vec::new();
    for r in rows {
        let k = key(r);
        match groups.iter_mut().find(|(g, _)| *g == k) {
            Some((_, v)) => v.push(r),
            None => groups.push((k, vec![r])),
        }
    }
    Ok(groups
        .into_iter()
        .map(|(_, g)| {
            let first = g[0];
            let m = g.len() as f64;
            let mean = g.iter().map(|r| r.frobenius_error).sum::<f64>() / m;
            let std = if g.len() > 1 {
                (g.iter().map(|r| (r.frobenius_error - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
            } else {
                0.0
            };
            SummaryRow {
                mechanism: first.mechanism,
                sweep_axis: sweep.map(|s| s.axis),
                sweep_value: sweep.zip(first.sweep_index).map(|(s, i)| s.values[i]),
                d: first.d,
                n: first.n,
                bins: first.bins,
                budget_kind: first.budget_kind,
                budget_value: first.budget_value,
                reps: g.len(),
                mean_error: mean,
                std_error: std,
            }
        })
        .collect())
}

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

pub const RESULT_HEADER: &str = "mechanism,d,n,N,budget_kind,budget_value,beta,seed,rep,frobenius_error,elapsed_ms,chosen_tau,chosen_branch";

pub fn write_results(rows: &[ResultRow], w: &mut impl Write) -> Result<()> {
    writeln!(w, "{RESULT_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.mechanism,
            r.d,
            r.n,
            opt(r.bins, |b| b.to_string()),
            kind_name(r.budget_kind),
            float(r.budget_value),
            float(r.beta),
            r.seed,
            r.rep,
            float(r.frobenius_error),
            opt(r.elapsed_ms, float),
            opt(r.chosen_tau, float),
            opt(r.chosen_branch, |b| b.name().to_string()),
        )?;
    }
    Ok(())
}

pub fn write_summary(rows: &[SummaryRow], w: &mut impl Write) -> Result<()> {
    writeln!(w, "mechanism,sweep_axis,sweep_value,d,n,N,budget_kind,budget_value,reps,mean_error,std_error")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.mechanism,
            opt(r.sweep_axis, |a| a.name().to_string()),
            opt(r.sweep_value, float),
            r.d,
            r.n,
            opt(r.bins, |b| b.to_string()),
            kind_name(r.budget_kind),
            float(r.budget_value),
            r.reps,
            float(r.mean_error),
            float(r.std_error),
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct BudgetMeta {
    kind: &'static str,
    value: f64,
    approx_epsilon: f64,
    approx_delta: f64,
}

fn budget_meta(b: PrivacyBudget, delta: f64) -> Result<BudgetMeta> {
    Ok(match b.kind {
        BudgetKind::Zcdp => BudgetMeta { kind: "zcdp", value: b.value, approx_epsilon: zcdp_to_approx(b.value, delta)?, approx_delta: delta },
        BudgetKind::Pure => BudgetMeta { kind: "pure", value: b.value, approx_epsilon: b.value, approx_delta: 0.0 },
    })
}

/// Run metadata, including the `(epsilon, delta)` equivalent of each budget.
pub fn metadata_json(plan: &ExperimentPlan) -> Result<String> {
    let budgets = plan.points().iter().map(|p| budget_meta(p.budget, plan.delta)).collect::<Result<Vec<_>>>()?;
    let v = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "mechanisms": plan.mechanisms.iter().map(|m| m.name()).collect::<Vec<_>>(),
        "source": plan.source,
        "budgets": budgets,
        "delta": plan.delta,
        "beta": plan.beta,
        "reps": plan.reps,
        "sweep": plan.sweep,
        "seed": plan.seed,
        "zero_noise": plan.zero_noise,
        "lap_constant": plan.lap_constant,
        "tau_cap_exponent": plan.tau_cap_exponent,
        "timing": plan.timing,
    });
    serde_json::to_string_pretty(&v).map_err(|e| invalid(format!("metadata: {e}")))
}

/// `results.csv` -> (`results.summary.csv`, `results.meta.json`).
pub fn companion_paths(out: &Path) -> (PathBuf, PathBuf) {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "results".into());
    let dir = out.parent().unwrap_or_else(|| Path::new(""));
    (dir.join(format!("{stem}.summary.csv")), dir.join(format!("{stem}.meta.json")))
}

/// Writes the results file and its summary and metadata companions.
pub fn write_outputs(plan: &ExperimentPlan, output: &ExperimentOutput, out: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_results(&output.rows, &mut buf)?;
    fs::write(out, buf)?;
    let (summary_path, meta_path) = companion_paths(out);
    let mut buf = Vec::new();
    write_summary(&output.summary, &mut buf)?;
    fs::write(summary_path, buf)?;
    fs::write(meta_path, metadata_json(plan)? + "\n")?;
    Ok(())
}
