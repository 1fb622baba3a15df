//! Synthetic skewed-norm datasets, radius normalization and CSV input/output.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par};
use serde::{Deserialize, Serialize};

use crate::adaptive::{dyadic_bucket, ldexp};
use crate::error::{invalid, Error, Result};
use crate::linalg::{l2_norm, radius, Dataset};
use crate::rng::RandomStream;

/// Parameters of the synthetic generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n: usize,
    pub d: usize,
    /// Number of norm bins `N`. Bin `k` (1-based) holds vectors of norm
    /// `2^(k-N)`, so `N = 1` gives unit-norm data.
    pub bins: usize,
    /// Zipf exponent: bin `k` receives a share proportional to `k^-skew`.
    pub skew: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(n: usize, d: usize, bins: usize) -> Self {
        Self { n, d, bins, skew: 3.0, seed: 0 }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_skew(self, skew: f64) -> Self {
        Self { skew, ..self }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 || self.bins == 0 {
            return Err(invalid("synthetic n, d and N must all be positive"));
        }
        if self.n < self.bins {
            return Err(invalid(format!("cannot fill {} bins with {} vectors", self.bins, self.n)));
        }
        if self.bins > 1000 {
            return Err(invalid("at most 1000 bins are supported"));
        }
        if !self.skew.is_finite() {
            return Err(invalid("skew must be finite"));
        }
        Ok(())
    }
}

/// Splits `n` into bins with shares proportional to `k^-skew`, `k = 1..=bins`,
/// rounding by largest remainder (ties go to the smaller `k`).
pub fn bin_counts(n: usize, bins: usize, skew: f64) -> Result<Vec<usize>> {
    if bins == 0 {
        return Err(invalid("need at least one bin"));
    }
    let w: Vec<f64> = (1..=bins).map(|k| (k as f64).powf(-skew)).collect();
    let total: f64 = w.iter().sum();
    let quotas: Vec<f64> = w.iter().map(|v| n as f64 * v / total).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..bins).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (quotas[a] - quotas[a].floor(), quotas[b] - quotas[b].floor());
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &k in order.iter().take(n - assigned) {
        counts[k] += 1;
    }
    Ok(counts)
}

/// Draws `X = Z U` (rows of `Z` standard normal, `U` uniform on `[0,1)`),
/// centers the points, then rescales them so that the Zipf-sized bins have
/// norms `2^(k-N)`. Bin labels are shuffled over the columns.
pub fn synth(spec: &SynthSpec) -> Result<Dataset> {
    spec.validate()?;
    let (n, d) = (spec.n, spec.d);
    let root = RandomStream::new(spec.seed);
    let mut s = root.substream_named("basis");
    let u: Vec<f64> = (0..d * d).map(|_| s.uniform()).collect();
    let mut s = root.substream_named("gaussian");
    let z: Vec<f64> = (0..d * n).map(|_| s.raw_normal()).collect();

    // column i of the result is U^T z_i
    let uf = MatRef::from_column_major_slice(&u, d, d);
    let zf = MatRef::from_column_major_slice(&z, d, n);
    let mut x = Mat::<f64>::zeros(d, n);
    matmul(x.as_mut(), Accum::Replace, uf.transpose(), zf, 1.0, Par::Seq);

    let mut data = Vec::with_capacity(d * n);
    for i in 0..n {
        data.extend((0..d).map(|j| x[(j, i)]));
    }
    let mut mean = vec![0.0; d];
    for c in data.chunks_exact(d) {
        for (m, v) in mean.iter_mut().zip(c) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    for c in data.chunks_exact_mut(d) {
        for (v, m) in c.iter_mut().zip(&mean) {
            *v -= m;
        }
    }

    let counts = bin_counts(n, spec.bins, spec.skew)?;
    let mut labels: Vec<usize> = counts.iter().enumerate().flat_map(|(k, &c)| std::iter::repeat_n(k + 1, c)).collect();
    root.substream_named("bins").shuffle(&mut labels);
    for (c, &k) in data.chunks_exact_mut(d).zip(&labels) {
        let norm = l2_norm(c);
        if norm == 0.0 {
            return Err(Error::DegenerateDataset("centered point is zero".into()));
        }
        let target = ldexp(1.0, k as i32 - spec.bins as i32);
        c.iter_mut().for_each(|v| *v = *v / norm * target);
    }
    Dataset::from_column_major(d, data)
}

/// Divides by `2^ceil(log2 rad(X))` so the radius lands in `(1/2, 1]`.
pub fn rescale_radius(x: &Dataset) -> Result<Dataset> {
    let rad = radius(x)?;
    if rad == 0.0 {
        return Err(Error::DegenerateDataset("all points are zero".into()));
    }
    let e = dyadic_bucket(rad) + 1;
    if e == 0 {
        return Ok(x.clone());
    }
    let data = x.as_slice().iter().map(|&v| ldexp(v, -e)).collect();
    Dataset::from_column_major(x.dim(), data)
}

/// Reads one point per row. A first row that does not parse as numbers is
/// taken as a header.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::Csv(format!("{}: {e}", path.display())))?;
    parse_csv(file)
}

pub fn parse_csv(reader: impl Read) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut dim = 0;
    let mut data = Vec::new();
    let mut first = true;
    for (idx, rec) in rdr.records().enumerate() {
        let row = idx + 1;
        let rec = rec.map_err(|e| Error::Csv(format!("row {row}: {e}")))?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if first {
            first = false;
            dim = rec.len();
            if rec.iter().any(|c| c.parse::<f64>().is_err()) {
                continue;
            }
        }
        if rec.len() != dim {
            return Err(Error::Csv(format!("row {row}: expected {dim} fields, found {}", rec.len())));
        }
        for (col, cell) in rec.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| Error::Csv(format!("row {row}, column {}: non-numeric value {cell:?}", col + 1)))?;
            if !v.is_finite() {
                return Err(Error::Csv(format!("row {row}, column {}: non-finite value {cell:?}", col + 1)));
            }
            data.push(v);
        }
    }
    if data.is_empty() {
        return Err(Error::Csv("empty file: no data rows".into()));
    }
    Dataset::from_column_major(dim, data)
}

/// Writes one point per row with 17 significant digits, which round-trips
/// exactly through [`load_csv`].
pub fn write_csv(x: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_csv_to(x, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_csv_to(x: &Dataset, w: &mut impl Write) -> Result<()> {
    for c in x.columns() {
        let line: Vec<String> = c.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}
