//! Dense real matrices with the spectral and pseudoinverse machinery the
//! splitting theory runs on: tolerance-aware entrywise order, spectral
//! radius (shifted power iteration for nonnegative matrices, real Schur
//! otherwise), SVD-based Moore-Penrose pseudoinverse, and pivoted solves.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// Dense real rectangular matrix, row-major storage.
///
/// Every public constructor rejects NaN/Inf entries, so downstream code can
/// assume finiteness.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        for (k, &v) in entries.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: k / cols,
                    col: k % cols,
                    value: v,
                });
            }
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, vec![0.0; rows * cols]).expect("positive dims")
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Dimension("no rows given".into()));
        }
        let cols = rows[0].len();
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::Dimension("ragged rows".into()));
            }
            entries.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, entries)
    }

    pub fn from_diag(d: &[f64]) -> Result<Self> {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in d.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { row: i, col: i, value: v });
            }
            m.entries[i * n + i] = v;
        }
        Ok(m)
    }

    pub fn column_vector(v: &[f64]) -> Result<Self> {
        Self::new(v.len(), 1, v.to_vec())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.entries[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::Dimension(format!(
                "shape mismatch: {:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::new(self.rows, self.cols, entries)
    }

    pub fn scale(&self, c: f64) -> Self {
        let entries = self.entries.iter().map(|&v| c * v).collect();
        Self::new(self.rows, self.cols, entries).expect("scaling preserves shape")
    }

    pub fn dot(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {:?} by {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.entries[i * other.cols + j] += aik * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector length {} does not match {} columns",
                v.len(),
                self.cols
            )));
        }
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut acc = 0.0;
            for j in 0..self.cols {
                acc += self.get(i, j) * v[j];
            }
            out[i] = acc;
        }
        Ok(out)
    }

    /// Diagonal part as a square matrix (zero off-diagonal).
    pub fn diagonal_part(&self) -> Self {
        let n = self.rows.min(self.cols);
        let mut m = Self::zeros(self.rows, self.cols);
        for i in 0..n {
            m.set(i, i, self.get(i, i));
        }
        m
    }

    /// Tridiagonal part (main diagonal plus first super/sub diagonals).
    pub fn tridiagonal_part(&self) -> Self {
        let mut m = Self::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i.abs_diff(j) <= 1 {
                    m.set(i, j, self.get(i, j));
                }
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|&v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.entries.iter().all(|&v| v >= 0.0)
    }

    pub fn is_symmetric(&self, eps: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if (self.get(i, j) - self.get(j, i)).abs() > eps {
                    return false;
                }
            }
        }
        true
    }

    /// Assemble `[[a, b], [c, d]]` from four conforming blocks.
    pub fn from_blocks(a: &Self, b: &Self, c: &Self, d: &Self) -> Result<Self> {
        if a.rows != b.rows || c.rows != d.rows || a.cols != c.cols || b.cols != d.cols {
            return Err(Error::Dimension("non-conforming blocks".into()));
        }
        let rows = a.rows + c.rows;
        let cols = a.cols + b.cols;
        let mut out = Self::zeros(rows, cols);
        for i in 0..a.rows {
            for j in 0..a.cols {
                out.set(i, j, a.get(i, j));
            }
            for j in 0..b.cols {
                out.set(i, a.cols + j, b.get(i, j));
            }
        }
        for i in 0..c.rows {
            for j in 0..c.cols {
                out.set(a.rows + i, j, c.get(i, j));
            }
            for j in 0..d.cols {
                out.set(a.rows + i, c.cols + j, d.get(i, j));
            }
        }
        Ok(out)
    }

    /// Permute rows and columns by the same permutation (similarity).
    pub fn permute_symmetric(&self, perm: &[usize]) -> Result<Self> {
        if !self.is_square() || perm.len() != self.rows {
            return Err(Error::Dimension("permutation length mismatch".into()));
        }
        let mut out = Self::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(perm[i], perm[j], self.get(i, j));
            }
        }
        Ok(out)
    }

    pub(crate) fn to_na(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.entries)
    }

    pub(crate) fn from_na(m: &DMatrix<f64>) -> Self {
        let mut entries = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                entries.push(m[(i, j)]);
            }
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            entries,
        }
    }

    /// Shared text format: first line `rows cols`, then one whitespace-separated
    /// row per line. Written at 17 significant digits so values round-trip
    /// bit-exactly.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| format!("{:.16e}", self.get(i, j)))
                .collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (lno, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty matrix text".into(),
        })?;
        let mut it = header.split_whitespace();
        let parse_dim = |tok: Option<&str>, lno: usize| -> Result<usize> {
            tok.ok_or(Error::Parse {
                line: lno + 1,
                message: "header must be 'rows cols'".into(),
            })?
            .parse()
            .map_err(|e| Error::Parse {
                line: lno + 1,
                message: format!("bad dimension: {e}"),
            })
        };
        let rows = parse_dim(it.next(), lno)?;
        let cols = parse_dim(it.next(), lno)?;
        let mut entries = Vec::with_capacity(rows * cols);
        for (lno, line) in lines {
            for tok in line.split_whitespace() {
                let v: f64 = tok.parse().map_err(|e| Error::Parse {
                    line: lno + 1,
                    message: format!("bad float '{tok}': {e}"),
                })?;
                entries.push(v);
            }
        }
        if entries.len() != rows * cols {
            return Err(Error::Parse {
                line: text.lines().count(),
                message: format!(
                    "expected {} entries for {rows}x{cols}, found {}",
                    rows * cols,
                    entries.len()
                ),
            });
        }
        Self::new(rows, cols, entries)
    }
}

/// Floating-point slacks used throughout. The entrywise-order and equality
/// slacks are scaled by the magnitude of the operands before use.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Entrywise-order slack (scaled by max-abs entry).
    pub nonneg_eps: f64,
    /// Eigenvalue convergence tolerance.
    pub spectral_eps: f64,
    /// Relative singular-value cutoff (multiplied by the largest singular value).
    pub rank_eps: f64,
    /// Matrix-equality slack (scaled by max-abs entry).
    pub equal_eps: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            nonneg_eps: 1e-9,
            spectral_eps: 1e-10,
            rank_eps: 1e-12,
            equal_eps: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn scaled(self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::Parameter(format!(
                "tolerance scale must be positive and finite, got {factor}"
            )));
        }
        Ok(Self {
            nonneg_eps: self.nonneg_eps * factor,
            spectral_eps: self.spectral_eps * factor,
            rank_eps: self.rank_eps * factor,
            equal_eps: self.equal_eps * factor,
        })
    }

    fn order_slack(&self, x: &Matrix, y: &Matrix) -> f64 {
        self.nonneg_eps * x.max_abs().max(y.max_abs()).max(1.0)
    }

    pub fn equality_slack(&self, scale: f64) -> f64 {
        self.equal_eps * scale.max(1.0)
    }
}

/// True iff every entry of `x - y` is at least `-nonneg_eps` (scaled).
pub fn entrywise_geq(x: &Matrix, y: &Matrix, tol: &Tolerances) -> Result<bool> {
    Ok(geq_violation(x, y, tol)?.is_none())
}

/// Strict variant: every entry of `x - y` exceeds `+nonneg_eps` (scaled).
pub fn entrywise_gt(x: &Matrix, y: &Matrix, tol: &Tolerances) -> Result<bool> {
    let d = x.sub(y)?;
    let slack = tol.order_slack(x, y);
    Ok(d.entries.iter().all(|&v| v > slack))
}

/// Worst violation of `x >= y`, if any: `(row, col, x-y entry)` with the
/// most negative difference below the slack.
pub fn geq_violation(
    x: &Matrix,
    y: &Matrix,
    tol: &Tolerances,
) -> Result<Option<(usize, usize, f64)>> {
    let d = x.sub(y)?;
    let slack = tol.order_slack(x, y);
    let mut worst: Option<(usize, usize, f64)> = None;
    for i in 0..d.rows {
        for j in 0..d.cols {
            let v = d.get(i, j);
            if v < -slack && worst.map_or(true, |(_, _, w)| v < w) {
                worst = Some((i, j, v));
            }
        }
    }
    Ok(worst)
}

/// Entrywise approximate equality with scaled slack.
pub fn approx_eq(x: &Matrix, y: &Matrix, tol: &Tolerances) -> bool {
    match x.sub(y) {
        Ok(d) => d.max_abs() <= tol.equality_slack(x.max_abs().max(y.max_abs())),
        Err(_) => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralMethod {
    QrHessenberg,
    PowerIteration,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub radius: f64,
    pub dominant_eigvec: Option<Vec<f64>>,
    pub method: SpectralMethod,
    pub iterations: usize,
    pub residual: f64,
}

/// Spectral radius. Entrywise-nonnegative matrices take a shifted power
/// iteration fast path (the Perron root equals the radius); anything else,
/// and nonnegative inputs on which the power iteration stalls, go through
/// Hessenberg reduction plus shifted QR.
pub fn spectral_radius(x: &Matrix, tol: &Tolerances) -> Result<SpectralReport> {
    if !x.is_square() {
        return Err(Error::Dimension(format!(
            "spectral radius needs a square matrix, got {:?}",
            x.shape()
        )));
    }
    if x.is_nonnegative() {
        if let Ok(rep) = power_iteration(x, tol) {
            return Ok(rep);
        }
    }
    qr_spectral_radius(x, tol)
}

/// Convenience: just the radius.
pub fn rho(x: &Matrix, tol: &Tolerances) -> Result<f64> {
    Ok(spectral_radius(x, tol)?.radius)
}

/// Perron-root power iteration for entrywise-nonnegative square matrices.
/// Iterates on `X + cI` so the Perron eigenvalue strictly dominates in
/// modulus; the shift is subtracted off the Rayleigh quotient at the end.
pub fn power_iteration(x: &Matrix, tol: &Tolerances) -> Result<SpectralReport> {
    if !x.is_square() {
        return Err(Error::Dimension("power iteration needs a square matrix".into()));
    }
    if !x.is_nonnegative() {
        return Err(Error::Parameter(
            "power iteration fast path requires an entrywise-nonnegative matrix".into(),
        ));
    }
    let n = x.rows();
    let shift = x.max_abs().max(1.0);
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut est = 0.0f64;
    let max_iter = 100_000usize;
    let mut stable = 0usize;
    for k in 1..=max_iter {
        let mut w = x.mul_vec(&v)?;
        for i in 0..n {
            w[i] += shift * v[i];
        }
        let norm = w.iter().map(|&t| t * t).sum::<f64>().sqrt();
        if norm == 0.0 {
            // X + cI annihilated the iterate: only possible for X = 0, c = 0.
            return Ok(SpectralReport {
                radius: 0.0,
                dominant_eigvec: Some(v),
                method: SpectralMethod::PowerIteration,
                iterations: k,
                residual: 0.0,
            });
        }
        for wi in &mut w {
            *wi /= norm;
        }
        let new_est = norm - shift;
        if (new_est - est).abs() <= tol.spectral_eps * new_est.abs().max(1.0) {
            stable += 1;
        } else {
            stable = 0;
        }
        est = new_est;
        v = w;
        if stable >= 4 {
            let xv = x.mul_vec(&v)?;
            let residual = xv
                .iter()
                .zip(&v)
                .map(|(&a, &b)| (a - est * b).abs())
                .fold(0.0f64, f64::max);
            // Demand a residual consistent with the eigenpair; otherwise the
            // dominant eigenvalue is defective or multiple and the caller
            // should fall back to the QR path.
            if residual <= 1e-9 * est.abs().max(1.0) {
                return Ok(SpectralReport {
                    radius: est.max(0.0),
                    dominant_eigvec: Some(v),
                    method: SpectralMethod::PowerIteration,
                    iterations: k,
                    residual,
                });
            }
            stable = 0;
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        partial: est,
    })
}

fn qr_spectral_radius(x: &Matrix, tol: &Tolerances) -> Result<SpectralReport> {
    let n = x.rows();
    let cap = 100 * n.max(10);
    let m = x.to_na();
    let schur = nalgebra::linalg::Schur::try_new(m, tol.spectral_eps, cap).ok_or(
        Error::NonConvergence {
            iterations: cap,
            partial: f64::NAN,
        },
    )?;
    let eig = schur.complex_eigenvalues();
    let radius = eig.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    Ok(SpectralReport {
        radius,
        dominant_eigvec: None,
        method: SpectralMethod::QrHessenberg,
        iterations: cap,
        residual: 0.0,
    })
}

#[derive(Debug, Clone)]
pub struct SvdFactors {
    /// m x r, orthonormal columns.
    pub left_vectors: Matrix,
    /// Strictly positive, nonincreasing, length r.
    pub singular_values: Vec<f64>,
    /// n x r, orthonormal columns.
    pub right_vectors: Matrix,
    pub numerical_rank: usize,
}

pub fn svd_factors(x: &Matrix, tol: &Tolerances) -> Result<SvdFactors> {
    let m = x.to_na();
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = sigma.iter().copied().fold(0.0f64, f64::max);
    let cutoff = tol.rank_eps * smax;
    // nalgebra returns singular values in nonincreasing order.
    let r = sigma.iter().take_while(|&&s| s > cutoff && s > 0.0).count();
    let mut left = DMatrix::zeros(x.rows(), r.max(1));
    let mut right = DMatrix::zeros(x.cols(), r.max(1));
    for k in 0..r {
        for i in 0..x.rows() {
            left[(i, k)] = u[(i, k)];
        }
        for j in 0..x.cols() {
            right[(j, k)] = vt[(k, j)];
        }
    }
    let mut values = sigma[..r].to_vec();
    if r > 0 {
        refine_svd(&m, &mut left, &mut values, &mut right);
    }
    Ok(SvdFactors {
        left_vectors: Matrix::from_na(&left),
        singular_values: values,
        right_vectors: Matrix::from_na(&right),
        numerical_rank: r,
    })
}

/// Subspace-iteration polish of a truncated SVD. The one-pass bidiagonal
/// reduction occasionally loses several digits; two rounds of orthogonal
/// iteration plus a small core SVD restore them. Each round is kept only if
/// the reconstruction residual drops.
fn refine_svd(
    a: &DMatrix<f64>,
    left: &mut DMatrix<f64>,
    values: &mut Vec<f64>,
    right: &mut DMatrix<f64>,
) {
    let recon_resid = |l: &DMatrix<f64>, s: &[f64], rt: &DMatrix<f64>| -> f64 {
        let mut recon = DMatrix::zeros(a.nrows(), a.ncols());
        for k in 0..s.len() {
            for i in 0..a.nrows() {
                for j in 0..a.ncols() {
                    recon[(i, j)] += s[k] * l[(i, k)] * rt[(j, k)];
                }
            }
        }
        (recon - a).norm()
    };
    let mut best = recon_resid(left, values, right);
    for _ in 0..2 {
        let u_new = (a * &*right).qr().q();
        let v_new = (a.transpose() * &u_new).qr().q();
        let core = u_new.transpose() * a * &v_new;
        let core_svd = core.svd(true, true);
        let ub = core_svd.u.as_ref().expect("u requested");
        let vbt = core_svd.v_t.as_ref().expect("v_t requested");
        let l = &u_new * ub;
        let rt = &v_new * vbt.transpose();
        let s: Vec<f64> = core_svd.singular_values.iter().copied().collect();
        let resid = recon_resid(&l, &s, &rt);
        if !(resid < best) {
            break;
        }
        best = resid;
        *left = l;
        *right = rt;
        *values = s;
    }
}

/// Numerical rank: count of singular values above the relative cutoff.
pub fn numerical_rank(x: &Matrix, tol: &Tolerances) -> Result<usize> {
    Ok(svd_factors(x, tol)?.numerical_rank)
}

/// Moore-Penrose pseudoinverse via SVD with relative rank truncation,
/// polished by Newton-Schulz steps. The SVD route alone loses accuracy on
/// ill-conditioned full-rank matrices; each polish step squares the residual
/// and preserves the row and column spaces of the truncated estimate.
pub fn pseudoinverse(x: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    let f = svd_factors(x, tol)?;
    let mut out = Matrix::zeros(x.cols(), x.rows());
    for k in 0..f.numerical_rank {
        let inv_s = 1.0 / f.singular_values[k];
        for i in 0..x.cols() {
            let vik = f.right_vectors.get(i, k) * inv_s;
            if vik == 0.0 {
                continue;
            }
            for j in 0..x.rows() {
                let cur = out.get(i, j);
                out.set(i, j, cur + vik * f.left_vectors.get(j, k));
            }
        }
    }
    let penrose = |p: &Matrix| -> Result<f64> {
        let pxp = p.dot(x)?.dot(p)?;
        let xpx = x.dot(p)?.dot(x)?;
        Ok(pxp.sub(p)?.frobenius_norm() / p.frobenius_norm().max(1.0)
            + xpx.sub(x)?.frobenius_norm() / x.frobenius_norm().max(1.0))
    };
    let mut best = penrose(&out)?;
    for _ in 0..2 {
        // X <- X(2I - AX), accepted only if the Penrose residual drops
        let ax = x.dot(&out)?;
        let mut two_i_minus = ax.scale(-1.0);
        for i in 0..two_i_minus.rows() {
            two_i_minus.set(i, i, two_i_minus.get(i, i) + 2.0);
        }
        let refined = out.dot(&two_i_minus)?;
        let resid = penrose(&refined)?;
        if !(resid < best) {
            break;
        }
        best = resid;
        out = refined;
    }
    Ok(out)
}

/// Solve `X Y = B` for numerically nonsingular square `X` by pivoted LU.
pub fn solve_dense(x: &Matrix, b: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    if !x.is_square() {
        return Err(Error::Dimension("solve_dense needs a square matrix".into()));
    }
    if b.rows() != x.rows() {
        return Err(Error::Dimension(format!(
            "rhs has {} rows, matrix has {}",
            b.rows(),
            x.rows()
        )));
    }
    let m = x.to_na();
    let sv = m.singular_values();
    let smax = sv.iter().copied().fold(0.0f64, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if !(smin > tol.rank_eps * smax) {
        return Err(Error::Singular { sigma: smin });
    }
    let lu = x.to_na().lu();
    let sol = lu
        .solve(&b.to_na())
        .ok_or(Error::Singular { sigma: smin })?;
    Ok(Matrix::from_na(&sol))
}

/// Solve `X Y = B` for symmetric positive definite `X` by Cholesky.
/// Bypasses the relative-rank gate: an SPD matrix with a tiny but positive
/// smallest eigenvalue (a heavily regularized Gram matrix) is still exactly
/// solvable.
pub fn solve_spd(x: &Matrix, b: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    if !x.is_square() {
        return Err(Error::Dimension("solve_spd needs a square matrix".into()));
    }
    if b.rows() != x.rows() {
        return Err(Error::Dimension(format!(
            "rhs has {} rows, matrix has {}",
            b.rows(),
            x.rows()
        )));
    }
    if x.sub(&x.transpose())?.max_abs() > tol.equal_eps * x.max_abs().max(1.0) {
        return Err(Error::Consistency("solve_spd needs a symmetric matrix".into()));
    }
    let xn = x.to_na();
    let chol = xn
        .clone()
        .cholesky()
        .ok_or(Error::Singular { sigma: 0.0 })?;
    let bn = b.to_na();
    let mut sol = chol.solve(&bn);
    // iterative refinement recovers the accuracy lost to heavy conditioning
    for _ in 0..2 {
        let resid = &bn - &xn * &sol;
        sol += chol.solve(&resid);
    }
    Ok(Matrix::from_na(&sol))
}

/// Solve `X y = b` for a vector right-hand side.
pub fn solve_dense_vec(x: &Matrix, b: &[f64], tol: &Tolerances) -> Result<Vec<f64>> {
    let sol = solve_dense(x, &Matrix::column_vector(b)?, tol)?;
    Ok(sol.entries().to_vec())
}

/// Inverse of a numerically nonsingular square matrix.
pub fn inverse(x: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    solve_dense(x, &Matrix::identity(x.rows()), tol)
}

pub(crate) fn vec_norm2(v: &[f64]) -> f64 {
    v.iter().map(|&t| t * t).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn constructor_rejects_nonfinite_and_bad_shape() {
        assert!(Matrix::new(2, 2, vec![1.0, 2.0, 3.0]).is_err());
        assert!(Matrix::new(0, 2, vec![]).is_err());
        let err = Matrix::new(2, 2, vec![1.0, f64::NAN, 0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { row: 0, col: 1, .. }));
    }

    #[test]
    fn entrywise_order_basics() {
        let x = Matrix::identity(2);
        let y = Matrix::zeros(2, 2);
        assert!(entrywise_geq(&x, &y, &t()).unwrap());
        assert!(!entrywise_gt(&x, &y, &t()).unwrap());
        let z = Matrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        assert!(entrywise_gt(&z, &y, &t()).unwrap());
        assert!(entrywise_geq(&x, &Matrix::zeros(3, 3), &t()).is_err());
    }

    #[test]
    fn geq_violation_reports_worst_entry() {
        let x = Matrix::from_rows(&[&[1.0, -0.5], &[0.0, -2.0]]).unwrap();
        let y = Matrix::zeros(2, 2);
        let (i, j, v) = geq_violation(&x, &y, &t()).unwrap().unwrap();
        assert_eq!((i, j), (1, 1));
        assert!((v + 2.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_radius_diagonal_and_nilpotent() {
        let d = Matrix::from_diag(&[0.3, -0.9]).unwrap();
        let rep = spectral_radius(&d, &t()).unwrap();
        assert!((rep.radius - 0.9).abs() < 1e-9);

        let nil = Matrix::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let rep = spectral_radius(&nil, &t()).unwrap();
        assert!(rep.radius.abs() < 1e-9);
    }

    #[test]
    fn spectral_radius_rejects_rectangular() {
        let m = Matrix::zeros(2, 3);
        assert!(spectral_radius(&m, &t()).is_err());
    }

    #[test]
    fn power_iteration_matches_qr_on_nonnegative() {
        let m = Matrix::from_rows(&[&[2.0, 1.0, 0.0], &[1.0, 3.0, 1.0], &[0.0, 1.0, 2.0]])
            .unwrap();
        let p = power_iteration(&m, &t()).unwrap();
        let q = qr_spectral_radius(&m, &t()).unwrap();
        assert!((p.radius - q.radius).abs() < 1e-8);
        let v = p.dominant_eigvec.unwrap();
        assert!(v.iter().all(|&x| x >= -1e-12));
    }

    #[test]
    fn power_iteration_handles_periodic_via_fallback() {
        // Permutation matrix: eigenvalues on the unit circle; the shifted
        // iteration still isolates the Perron root 1.
        let m = Matrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let rep = spectral_radius(&m, &t()).unwrap();
        assert!((rep.radius - 1.0).abs() < 1e-8);
    }

    #[test]
    fn pseudoinverse_identity_and_zero() {
        let i3 = Matrix::identity(3);
        assert!(approx_eq(&pseudoinverse(&i3, &t()).unwrap(), &i3, &t()));
        let z = Matrix::zeros(2, 3);
        let zp = pseudoinverse(&z, &t()).unwrap();
        assert_eq!(zp.shape(), (3, 2));
        assert_eq!(zp.max_abs(), 0.0);
    }

    #[test]
    fn penrose_equations_hold() {
        let a = Matrix::from_rows(&[
            &[4.0, 0.0, 2.0],
            &[0.0, 4.0, 2.0],
            &[2.0, 2.0, -4.0],
            &[2.0, 2.0, 0.0],
        ])
        .unwrap();
        let ap = pseudoinverse(&a, &t()).unwrap();
        let aapa = a.dot(&ap).unwrap().dot(&a).unwrap();
        assert!(aapa.sub(&a).unwrap().max_abs() < 1e-10 * a.max_abs());
        let apaap = ap.dot(&a).unwrap().dot(&ap).unwrap();
        assert!(apaap.sub(&ap).unwrap().max_abs() < 1e-10);
        let aap = a.dot(&ap).unwrap();
        assert!(aap.sub(&aap.transpose()).unwrap().max_abs() < 1e-10);
        let apa = ap.dot(&a).unwrap();
        assert!(apa.sub(&apa.transpose()).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn solve_dense_diagonal_and_singularity() {
        let x = Matrix::from_diag(&[2.0, 4.0]).unwrap();
        let b = Matrix::column_vector(&[2.0, 4.0]).unwrap();
        let y = solve_dense(&x, &b, &t()).unwrap();
        assert!((y.get(0, 0) - 1.0).abs() < 1e-12);
        assert!((y.get(1, 0) - 1.0).abs() < 1e-12);

        let sing = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert!(matches!(
            solve_dense(&sing, &b, &t()),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn text_format_round_trips() {
        let m = Matrix::from_rows(&[&[1.0 / 3.0, -2.5e-13], &[7.0, 0.1]]).unwrap();
        let back = Matrix::parse_text(&m.to_text()).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn parse_error_carries_line_number() {
        let err = Matrix::parse_text("2 2\n1.0 2.0\n3.0 oops\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
