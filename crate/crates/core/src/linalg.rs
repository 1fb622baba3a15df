//! Exact (non-private) linear algebra on symmetric matrices and column datasets.
//!
//! Storage conventions: a [`SymMatrix`] keeps all `d*d` entries (row-major and
//! column-major coincide), a [`Dataset`] keeps its `n` columns contiguously,
//! i.e. a column-major `d x n` matrix.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par, Side};

use crate::error::{invalid, Error, Result};

/// Slack allowed when checking that every column lies in the unit ball.
pub const BALL_TOLERANCE: f64 = 1e-9;

/// Dense real symmetric `d x d` matrix. Entries `(j, k)` and `(k, j)` are
/// bitwise identical.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for j in 0..dim {
            m.data[j * dim + j] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (j, &v) in diag.iter().enumerate() {
            m.data[j * diag.len() + j] = v;
        }
        m
    }

    /// Builds a matrix by evaluating `f(j, k)` for `j <= k` and mirroring.
    pub fn from_upper_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for j in 0..dim {
            for k in j..dim {
                let v = f(j, k);
                m.data[j * dim + k] = v;
                m.data[k * dim + j] = v;
            }
        }
        m
    }

    /// Builds a matrix from explicit rows; the input must be square and
    /// exactly symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(invalid("matrix must have at least one row"));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: row.len() });
            }
            data.extend_from_slice(row);
        }
        let m = Self { dim, data };
        if !m.is_symmetric() {
            return Err(invalid("matrix is not symmetric"));
        }
        Ok(m)
    }

    /// Wraps a square buffer, replacing it by `(M + M^T) / 2`.
    pub(crate) fn symmetrized(dim: usize, mut data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        for j in 0..dim {
            for k in (j + 1)..dim {
                let v = 0.5 * (data[j * dim + k] + data[k * dim + j]);
                data[j * dim + k] = v;
                data[k * dim + j] = v;
            }
        }
        Self { dim, data }
    }

    /// Copies the lower triangle of a faer matrix and mirrors it.
    fn from_faer_lower(m: MatRef<'_, f64>) -> Self {
        let dim = m.nrows();
        let mut data = vec![0.0; dim * dim];
        for k in 0..dim {
            for j in k..dim {
                let v = m[(j, k)];
                data[j * dim + k] = v;
                data[k * dim + j] = v;
            }
        }
        Self { dim, data }
    }

    pub(crate) fn as_faer(&self) -> MatRef<'_, f64> {
        MatRef::from_column_major_slice(&self.data, self.dim, self.dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.data[j * self.dim + k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|j| ((j + 1)..self.dim).all(|k| self.get(j, k) == self.get(k, j)))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|v| v * c).collect() }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &SymMatrix, c: f64) -> Result<Self> {
        check_same_dim(self, other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + c * b).collect();
        Ok(Self { dim: self.dim, data })
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|j| self.get(j, j)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Entry-wise absolute sum, the `l1` norm of the matrix seen as a vector.
    pub fn entrywise_l1(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    /// Largest absolute eigenvalue.
    pub fn operator_norm(&self) -> Result<f64> {
        let vals = eigvals_sym(self)?;
        Ok(vals.first().unwrap().abs().max(vals.last().unwrap().abs()))
    }
}

fn check_same_dim(a: &SymMatrix, b: &SymMatrix) -> Result<()> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { expected: a.dim, got: b.dim });
    }
    Ok(())
}

/// A collection of `n` column vectors in `R^d`, one per individual.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    len: usize,
    data: Vec<f64>,
}

impl Dataset {
    /// Wraps `n` contiguous columns of length `dim`.
    pub fn from_column_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dataset dimension must be positive"));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: data.len() % dim });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!(
                "non-finite entry in column {} row {}",
                pos / dim,
                pos % dim
            )));
        }
        Ok(Self { dim, len: data.len() / dim, data })
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let dim = columns.first().map(Vec::len).ok_or(Error::EmptyDataset)?;
        let mut data = Vec::with_capacity(dim * columns.len());
        for c in columns {
            if c.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: c.len() });
            }
            data.extend_from_slice(c);
        }
        Self::from_column_major(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn column(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn columns(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn norms(&self) -> Vec<f64> {
        self.columns().map(l2_norm).collect()
    }

    pub fn is_ball_constrained(&self) -> bool {
        self.columns().all(|c| l2_norm(c) <= 1.0 + BALL_TOLERANCE)
    }

    /// Errors with "norms exceed 1" unless every column has norm at most one.
    pub fn ensure_ball_constrained(&self) -> Result<()> {
        let max_norm = self.columns().map(l2_norm).fold(0.0, f64::max);
        if max_norm > 1.0 + BALL_TOLERANCE {
            return Err(Error::NormsExceedOne { max_norm });
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { dim: self.dim, len: self.len, data: self.data.iter().map(|v| v * c).collect() }
    }

    /// Copy of the dataset with column `i` replaced; the result is a neighbor.
    pub fn with_column(&self, i: usize, column: &[f64]) -> Result<Self> {
        if column.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: column.len() });
        }
        if i >= self.len {
            return Err(invalid(format!("column index {i} out of range for {} columns", self.len)));
        }
        let mut out = self.clone();
        out.data[i * self.dim..(i + 1) * self.dim].copy_from_slice(column);
        Ok(out)
    }

    pub(crate) fn as_faer(&self) -> MatRef<'_, f64> {
        MatRef::from_column_major_slice(&self.data, self.dim, self.len)
    }
}

/// Euclidean norm, scaled so that tiny entries do not underflow when squared.
pub fn l2_norm(v: &[f64]) -> f64 {
    let m = v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    if (1e-150..1e150).contains(&m) {
        return v.iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    m * v.iter().map(|x| (x / m) * (x / m)).sum::<f64>().sqrt()
}

/// Empirical second-moment matrix `(1/n) X X^T`.
pub fn covariance(x: &Dataset) -> Result<SymMatrix> {
    if x.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let d = x.dim();
    let mut out = Mat::<f64>::zeros(d, d);
    let xf = x.as_faer();
    matmul(out.as_mut(), Accum::Replace, xf, xf.transpose(), 1.0 / x.len() as f64, Par::Seq);
    Ok(SymMatrix::from_faer_lower(out.as_ref()))
}

/// Orthonormal eigenbasis (columns, column-major) with eigenvalues in
/// descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomp {
    dim: usize,
    basis: Vec<f64>,
    values: Vec<f64>,
}

impl EigenDecomp {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column-major `d x d` matrix whose `k`-th column pairs with `values()[k]`.
    pub fn basis(&self) -> &[f64] {
        &self.basis
    }

    pub fn vector(&self, k: usize) -> &[f64] {
        &self.basis[k * self.dim..(k + 1) * self.dim]
    }

    pub fn reconstruct(&self) -> SymMatrix {
        reconstruct(&self.basis, &self.values).expect("decomposition has consistent shape")
    }

    /// Sorts pairs into descending eigenvalue order (stable with respect to
    /// the solver's output order) and fixes each vector's sign so that its
    /// largest-magnitude component is positive.
    fn normalized(dim: usize, basis: Vec<f64>, values: Vec<f64>) -> Self {
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
        let mut sorted_basis = Vec::with_capacity(dim * dim);
        let mut sorted_values = Vec::with_capacity(dim);
        for &k in &order {
            let col = &basis[k * dim..(k + 1) * dim];
            let max_abs = col.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            // first component within rounding of the maximum decides the sign
            let lead = col.iter().find(|v| v.abs() >= max_abs - 1e-12).copied().unwrap_or(1.0);
            let sign = if lead < 0.0 { -1.0 } else { 1.0 };
            sorted_basis.extend(col.iter().map(|v| sign * v));
            sorted_values.push(values[k]);
        }
        Self { dim, basis: sorted_basis, values: sorted_values }
    }
}

/// Symmetric eigendecomposition with deterministic ordering and signs.
pub fn eig_sym(a: &SymMatrix) -> Result<EigenDecomp> {
    if !a.is_finite() {
        return Err(Error::NonFiniteMatrix);
    }
    let evd = a
        .as_faer()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigensolver did not converge: {e:?}")))?;
    let d = a.dim();
    let s = evd.S().column_vector();
    let u = evd.U();
    let values: Vec<f64> = (0..d).map(|k| s[k]).collect();
    let mut basis = Vec::with_capacity(d * d);
    for k in 0..d {
        basis.extend((0..d).map(|j| u[(j, k)]));
    }
    Ok(EigenDecomp::normalized(d, basis, values))
}

/// Eigenvalues only, in descending order.
pub fn eigvals_sym(a: &SymMatrix) -> Result<Vec<f64>> {
    if !a.is_finite() {
        return Err(Error::NonFiniteMatrix);
    }
    let mut vals = a
        .as_faer()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigensolver did not converge: {e:?}")))?;
    vals.sort_by(|a, b| b.total_cmp(a));
    Ok(vals)
}

/// Cyclic Jacobi eigensolver. Much slower than [`eig_sym`] for large `d`
/// but entirely self-contained; it stops once the off-diagonal Frobenius
/// mass drops below `1e-12 * ||A||_F`.
pub fn eig_sym_jacobi(a: &SymMatrix) -> Result<EigenDecomp> {
    const MAX_SWEEPS: usize = 100;
    if !a.is_finite() {
        return Err(Error::NonFiniteMatrix);
    }
    let d = a.dim();
    let tol = 1e-12 * a.frobenius_norm();
    let mut m = a.data.clone();
    let mut v = SymMatrix::identity(d).data;

    let off_mass = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for j in 0..d {
            for k in 0..d {
                if j != k {
                    s += m[j * d + k] * m[j * d + k];
                }
            }
        }
        s.sqrt()
    };

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_mass(&m) <= tol {
            converged = true;
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = m[p * d + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q * d + q] - m[p * d + p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let (mkp, mkq) = (m[k * d + p], m[k * d + q]);
                    m[k * d + p] = c * mkp - s * mkq;
                    m[k * d + q] = s * mkp + c * mkq;
                }
                for k in 0..d {
                    let (mpk, mqk) = (m[p * d + k], m[q * d + k]);
                    m[p * d + k] = c * mpk - s * mqk;
                    m[q * d + k] = s * mpk + c * mqk;
                }
                // basis columns p and q live at offsets p*d and q*d
                for k in 0..d {
                    let (vp, vq) = (v[p * d + k], v[q * d + k]);
                    v[p * d + k] = c * vp - s * vq;
                    v[q * d + k] = s * vp + c * vq;
                }
            }
        }
    }
    if !converged && off_mass(&m) > tol {
        return Err(Error::Numerical("Jacobi iteration did not converge".into()));
    }
    let values = (0..d).map(|j| m[j * d + j]).collect();
    Ok(EigenDecomp::normalized(d, v, values))
}

/// `P diag(values) P^T`, symmetrized. `basis` is column-major `d x d`.
/// Negative values are allowed.
pub fn reconstruct(basis: &[f64], values: &[f64]) -> Result<SymMatrix> {
    let d = values.len();
    if d == 0 {
        return Err(invalid("empty spectrum"));
    }
    if basis.len() != d * d {
        return Err(Error::DimensionMismatch { expected: d * d, got: basis.len() });
    }
    let p = MatRef::from_column_major_slice(basis, d, d);
    let scaled = Mat::<f64>::from_fn(d, d, |j, k| p[(j, k)] * values[k]);
    let mut out = Mat::<f64>::zeros(d, d);
    matmul(out.as_mut(), Accum::Replace, scaled.as_ref(), p.transpose(), 1.0, Par::Seq);
    let data = (0..d).flat_map(|j| (0..d).map(move |k| (j, k))).map(|(j, k)| out[(j, k)]).collect();
    Ok(SymMatrix::symmetrized(d, data))
}

/// Frobenius distance `||A - B||_F`.
pub fn frobenius_dist(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    check_same_dim(a, b)?;
    Ok(a.data.iter().zip(&b.data).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
}

/// `min(1, tau / ||x||) * x`. The zero vector maps to itself and `tau = 0`
/// maps every vector to zero.
pub fn clip_vector(x: &[f64], tau: f64) -> Vec<f64> {
    assert!(tau >= 0.0, "clipping threshold must be nonnegative, got {tau}");
    let norm = l2_norm(x);
    if norm <= tau {
        return x.to_vec();
    }
    let factor = tau / norm;
    x.iter().map(|v| v * factor).collect()
}

/// Column-wise [`clip_vector`].
pub fn clip_dataset(x: &Dataset, tau: f64) -> Dataset {
    assert!(tau >= 0.0, "clipping threshold must be nonnegative, got {tau}");
    let mut data = Vec::with_capacity(x.data.len());
    for c in x.columns() {
        let norm = l2_norm(c);
        if norm <= tau {
            data.extend_from_slice(c);
        } else {
            let factor = tau / norm;
            data.extend(c.iter().map(|v| v * factor));
        }
    }
    Dataset { dim: x.dim, len: x.len, data }
}

/// Average squared column norm; equals the trace of the covariance.
pub fn trace_stat(x: &Dataset) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.columns().map(|c| l2_norm(c).powi(2)).sum::<f64>() / x.len() as f64
}

/// Average squared norm mass carried by columns with norm strictly above `tau`.
pub fn tail_gamma(x: &Dataset, tau: f64) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.columns()
        .map(l2_norm)
        .filter(|&r| r > tau)
        .map(|r| r * r)
        .sum::<f64>()
        / x.len() as f64
}

/// Largest column norm.
pub fn radius(x: &Dataset) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(x.columns().map(l2_norm).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lcg_dataset(d: usize, n: usize, seed: u64) -> Dataset {
        let mut s = seed;
        let data = (0..d * n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect();
        Dataset::from_column_major(d, data).unwrap()
    }

    fn lcg_sym(d: usize, seed: u64) -> SymMatrix {
        let x = lcg_dataset(d, d, seed);
        SymMatrix::from_upper_fn(d, |j, k| x.column(j)[k])
    }

    #[test]
    fn covariance_small_cases() {
        let x = Dataset::from_columns(&[vec![1.0, 0.0]]).unwrap();
        assert_eq!(covariance(&x).unwrap(), SymMatrix::from_diagonal(&[1.0, 0.0]));
        let x = Dataset::from_columns(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(covariance(&x).unwrap(), SymMatrix::from_diagonal(&[0.5, 0.5]));
    }

    #[test]
    fn covariance_matches_double_loop() {
        let x = lcg_dataset(6, 20, 7);
        let c = covariance(&x).unwrap();
        assert!(c.is_symmetric());
        for j in 0..6 {
            for k in 0..6 {
                let brute: f64 = x.columns().map(|col| col[j] * col[k]).sum::<f64>() / 20.0;
                assert_abs_diff_eq!(c.get(j, k), brute, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn covariance_of_empty_dataset_fails() {
        let x = Dataset::from_column_major(3, vec![]).unwrap();
        assert_eq!(covariance(&x).unwrap_err().to_string(), "empty dataset");
    }

    #[test]
    fn eig_diagonal_and_swap() {
        let e = eig_sym(&SymMatrix::from_diagonal(&[1.0, 2.0])).unwrap();
        assert_eq!(e.values(), &[2.0, 1.0]);
        assert_abs_diff_eq!(e.vector(0)[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.vector(1)[0], 1.0, epsilon = 1e-15);

        let a = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        for e in [eig_sym(&a).unwrap(), eig_sym_jacobi(&a).unwrap()] {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            assert_abs_diff_eq!(e.values()[0], 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(e.values()[1], -1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(e.vector(0)[0], h, epsilon = 1e-14);
            assert_abs_diff_eq!(e.vector(0)[1], h, epsilon = 1e-14);
            assert_abs_diff_eq!(e.vector(1)[0], h, epsilon = 1e-14);
            assert_abs_diff_eq!(e.vector(1)[1], -h, epsilon = 1e-14);
        }
    }

    #[test]
    fn eig_rejects_non_finite() {
        let a = SymMatrix::from_diagonal(&[1.0, f64::NAN]);
        assert_eq!(eig_sym(&a).unwrap_err().to_string(), "non-finite matrix");
        assert!(eig_sym_jacobi(&a).is_err());
    }

    fn orthonormality_defect(e: &EigenDecomp) -> f64 {
        let d = e.dim();
        let mut s = 0.0;
        for a in 0..d {
            for b in 0..d {
                let dot: f64 = e.vector(a).iter().zip(e.vector(b)).map(|(x, y)| x * y).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                s += (dot - target).powi(2);
            }
        }
        s.sqrt()
    }

    #[test]
    fn eig_random_reconstructs_and_agrees_with_jacobi() {
        let a = lcg_sym(8, 3);
        let fast = eig_sym(&a).unwrap();
        let slow = eig_sym_jacobi(&a).unwrap();
        for e in [&fast, &slow] {
            assert!(frobenius_dist(&e.reconstruct(), &a).unwrap() <= 1e-10);
            assert!(orthonormality_defect(e) <= 1e-10);
            assert!(e.values().windows(2).all(|w| w[0] >= w[1]));
        }
        for (x, y) in fast.values().iter().zip(slow.values()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-10);
        }
        // distinct eigenvalues, so the sign convention makes vectors agree too
        for (x, y) in fast.basis().iter().zip(slow.basis()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-8);
        }
    }

    #[test]
    fn reconstruct_contract() {
        let m = reconstruct(&SymMatrix::identity(2).data, &[3.0, 1.0]).unwrap();
        assert_eq!(m, SymMatrix::from_diagonal(&[3.0, 1.0]));
        let m = reconstruct(&SymMatrix::identity(2).data, &[-2.0, 1.0]).unwrap();
        assert_eq!(m.get(0, 0), -2.0);
        assert!(matches!(
            reconstruct(&[1.0, 0.0, 0.0], &[1.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn frobenius_cases() {
        let a = SymMatrix::from_diagonal(&[1.0, 0.0]);
        assert_eq!(frobenius_dist(&a, &a).unwrap(), 0.0);
        assert_eq!(frobenius_dist(&a, &SymMatrix::zeros(2)).unwrap(), 1.0);
        assert!(frobenius_dist(&a, &SymMatrix::zeros(3)).is_err());
        let b = lcg_sym(5, 11);
        let c = lcg_sym(5, 12);
        let mut brute = 0.0;
        for j in 0..5 {
            for k in 0..5 {
                brute += (b.get(j, k) - c.get(j, k)).powi(2);
            }
        }
        assert_abs_diff_eq!(frobenius_dist(&b, &c).unwrap(), brute.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn clip_cases() {
        assert_eq!(clip_vector(&[2.0, 0.0], 1.0), vec![1.0, 0.0]);
        assert_eq!(clip_vector(&[0.3, 0.0], 1.0), vec![0.3, 0.0]);
        assert_eq!(clip_vector(&[0.0, 0.0], 0.0), vec![0.0, 0.0]);
        assert_eq!(clip_vector(&[0.6, 0.8], 0.0), vec![0.0, 0.0]);

        // ||x x^T - c c^T||_F = ||x||^2 - tau^2 for a clipped unit vector
        let x = [0.6, 0.8];
        let c = clip_vector(&x, 0.5);
        let outer = |v: &[f64]| SymMatrix::from_upper_fn(2, |j, k| v[j] * v[k]);
        let gap = frobenius_dist(&outer(&x), &outer(&c)).unwrap();
        assert_abs_diff_eq!(gap, 0.75, epsilon = 1e-15);
    }

    #[test]
    fn trace_and_tail() {
        let zeros = Dataset::from_column_major(2, vec![0.0; 6]).unwrap();
        assert_eq!(trace_stat(&zeros), 0.0);
        let units = Dataset::from_columns(&[vec![1.0, 0.0], vec![0.6, 0.8]]).unwrap();
        assert_abs_diff_eq!(trace_stat(&units), 1.0, epsilon = 1e-15);
        assert_eq!(tail_gamma(&units, 1.0), 0.0);
        assert_abs_diff_eq!(tail_gamma(&units, 0.0), trace_stat(&units), epsilon = 1e-15);

        let x = Dataset::from_columns(&[vec![1.0, 0.0], vec![0.0, 0.2]]).unwrap();
        // only the unit column exceeds 0.5: (1/2) * 1
        assert_abs_diff_eq!(tail_gamma(&x, 0.5), 0.5, epsilon = 1e-15);

        let r = lcg_dataset(5, 30, 99);
        let eig_sum: f64 = eig_sym(&covariance(&r).unwrap()).unwrap().values().iter().sum();
        assert_abs_diff_eq!(trace_stat(&r), eig_sum, epsilon = 1e-10);
    }

    #[test]
    fn radius_cases() {
        assert!(radius(&Dataset::from_column_major(2, vec![]).unwrap()).is_err());
        assert_eq!(radius(&Dataset::from_column_major(2, vec![0.0; 4]).unwrap()).unwrap(), 0.0);
        let r = lcg_dataset(4, 15, 5);
        let brute = r
            .columns()
            .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        assert_abs_diff_eq!(radius(&r).unwrap(), brute, epsilon = 1e-15);
    }

    #[test]
    fn tiny_norms_do_not_underflow() {
        let v = [1e-200, 1e-200];
        assert_abs_diff_eq!(l2_norm(&v) / 1e-200, 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn ball_check() {
        let x = Dataset::from_columns(&[vec![1.0, 1.0]]).unwrap();
        assert_eq!(
            x.ensure_ball_constrained().unwrap_err().to_string(),
            format!("norms exceed 1 (largest column norm {})", 2f64.sqrt())
        );
    }
}
