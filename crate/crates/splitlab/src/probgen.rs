//! Ill-posed test-problem generators (Fredholm first-kind discretization,
//! Neumann Laplacian) and seeded random-instance generators used by the
//! property and soundness suites.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dense::{Matrix, Tolerances};
use crate::error::{Error, Result};
use crate::splittings::DoubleSplitting;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    FredholmGauss,
    PoissonNeumann,
    File,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub n: usize,
    pub kernel_width: f64,
    pub seed: u64,
    pub noise_level: f64,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Parameter(format!("n must be >= 2, got {}", self.n)));
        }
        if !(self.kernel_width > 0.0) {
            return Err(Error::Parameter(format!(
                "kernel_width must be positive, got {}",
                self.kernel_width
            )));
        }
        if !(0.0..1.0).contains(&self.noise_level) {
            return Err(Error::Parameter(format!(
                "noise_level must lie in [0, 1), got {}",
                self.noise_level
            )));
        }
        Ok(())
    }
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Fixed bimodal smooth profile on [0, 1].
fn bimodal(t: f64) -> f64 {
    (-60.0 * (t - 0.3) * (t - 0.3)).exp() + 0.8 * (-40.0 * (t - 0.7) * (t - 0.7)).exp()
}

/// Gaussian-kernel Fredholm discretization on uniform grids:
/// `A_ij = h exp(-(s_i - t_j)^2 / (2 w^2))`, `h = 1/n`. Returns
/// `(A, b, x_true)` with `b = A x_true` plus seeded relative noise.
pub fn gen_fredholm(spec: &ProblemSpec) -> Result<(Matrix, Vec<f64>, Vec<f64>)> {
    if spec.kind != ProblemKind::FredholmGauss {
        return Err(Error::Parameter("spec kind must be fredholm-gauss".into()));
    }
    spec.validate()?;
    let n = spec.n;
    let h = 1.0 / n as f64;
    let grid: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
    let w2 = 2.0 * spec.kernel_width * spec.kernel_width;
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let d = grid[i] - grid[j];
            a.set(i, j, h * (-d * d / w2).exp());
        }
    }
    let x_true: Vec<f64> = grid.iter().map(|&t| bimodal(t)).collect();
    let mut b = a.mul_vec(&x_true)?;
    if spec.noise_level > 0.0 {
        let scale = spec.noise_level * crate::dense::vec_norm2(&b) / (n as f64).sqrt();
        let mut rng = seeded_rng(spec.seed);
        for bi in &mut b {
            *bi += scale * rng.random_range(-1.0..1.0);
        }
    }
    Ok((a, b, x_true))
}

/// Five-point graph Laplacian on the (n+1) x (n+1) grid with Neumann
/// closure: symmetric, row sums zero, null space spanned by the constant
/// vector (rank deficiency exactly 1).
pub fn gen_poisson_neumann(n: usize) -> Result<Matrix> {
    if n < 2 {
        return Err(Error::Parameter(format!("n must be >= 2, got {n}")));
    }
    let side = n + 1;
    let dim = side * side;
    let idx = |i: usize, j: usize| i * side + j;
    let mut a = Matrix::zeros(dim, dim);
    for i in 0..side {
        for j in 0..side {
            let k = idx(i, j);
            let mut degree = 0.0;
            let mut neighbors = Vec::new();
            if i > 0 {
                neighbors.push(idx(i - 1, j));
            }
            if i + 1 < side {
                neighbors.push(idx(i + 1, j));
            }
            if j > 0 {
                neighbors.push(idx(i, j - 1));
            }
            if j + 1 < side {
                neighbors.push(idx(i, j + 1));
            }
            for &m in &neighbors {
                a.set(k, m, -1.0);
                degree += 1.0;
            }
            a.set(k, k, degree);
        }
    }
    Ok(a)
}

/// Uniform random matrix with entries in [lo, hi).
pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Matrix {
    let entries = (0..rows * cols).map(|_| rng.random_range(lo..hi)).collect();
    Matrix::new(rows, cols, entries).expect("finite entries by construction")
}

/// Random matrix of rank exactly `r` (as a product of full-rank factors).
pub fn random_rank_deficient(
    rng: &mut ChaCha8Rng,
    rows: usize,
    cols: usize,
    r: usize,
) -> Result<Matrix> {
    if r == 0 || r > rows.min(cols) {
        return Err(Error::Parameter(format!(
            "rank {r} out of range for {rows}x{cols}"
        )));
    }
    let left = random_matrix(rng, rows, r, -1.0, 1.0);
    let right = random_matrix(rng, r, cols, -1.0, 1.0);
    left.dot(&right)
}

/// Nonnegative matrix with disjoint column supports: rows are partitioned
/// across columns, so `A^T A` is diagonal, `A^+ >= 0`, and `A^+ A = I`.
pub fn random_disjoint_nonneg(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Result<Matrix> {
    if rows < cols {
        return Err(Error::Parameter(format!(
            "need rows >= cols for disjoint supports, got {rows}x{cols}"
        )));
    }
    let mut a = Matrix::zeros(rows, cols);
    for i in 0..rows {
        // round-robin guarantees every column gets at least one row
        let j = i % cols;
        a.set(i, j, rng.random_range(0.2..2.0));
    }
    Ok(a)
}

/// Random nonsingular M-matrix: `sI - B` with `B >= 0` and `s > rho(B)`,
/// so the inverse is entrywise nonnegative.
pub fn random_m_matrix(rng: &mut ChaCha8Rng, n: usize, tol: &Tolerances) -> Result<Matrix> {
    let b = random_matrix(rng, n, n, 0.0, 1.0);
    let radius = crate::dense::rho(&b, tol)?;
    let s = radius * rng.random_range(1.2..2.5) + 0.5;
    let mut a = b.scale(-1.0);
    for i in 0..n {
        a.set(i, i, a.get(i, i) + s);
    }
    Ok(a)
}

/// Random symmetric matrix with nonpositive off-diagonal entries and a
/// diagonal shift; `shift_above_radius` makes it positive definite (an
/// M-matrix), otherwise it may be indefinite but stays nonsingular with
/// high probability.
pub fn random_symmetric_z(rng: &mut ChaCha8Rng, n: usize, spd: bool) -> Matrix {
    let mut a = Matrix::zeros(n, n);
    let mut row_sums = vec![0.0; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = -rng.random_range(0.0..1.0);
            a.set(i, j, v);
            a.set(j, i, v);
            row_sums[i] += v.abs();
            row_sums[j] += v.abs();
        }
    }
    for i in 0..n {
        let d = if spd {
            row_sums[i] + rng.random_range(0.5..2.0)
        } else {
            rng.random_range(0.3..0.8) * row_sums[i].max(1.0)
        };
        a.set(i, i, d);
    }
    a
}

/// Random double weak splitting of type II (and type I) of a symmetric
/// nonsingular matrix: `P` diagonal positive with `T = P - A >= 0`, then
/// `R` drawn entrywise from `[0, T]` and `S = R - T <= 0`.
pub fn random_type2_double(
    rng: &mut ChaCha8Rng,
    a: &Matrix,
    tol: &Tolerances,
) -> Result<DoubleSplitting> {
    let n = a.rows();
    let mut p = Matrix::zeros(n, n);
    for i in 0..n {
        let mut above = a.get(i, i).max(0.0);
        above += rng.random_range(0.1..2.0) * a.max_abs().max(1.0);
        p.set(i, i, above);
    }
    // T >= 0 needs nonpositive off-diagonal A entries; clamp by lifting P
    // handles the diagonal only, so callers pass symmetric Z-matrices.
    let t = p.sub(a)?;
    let mut r = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let tv = t.get(i, j);
            if tv > 0.0 {
                r.set(i, j, rng.random_range(0.0..=1.0) * tv);
            }
        }
    }
    let s = r.sub(&t)?;
    DoubleSplitting::new(a.clone(), p, r, s, tol)
}
