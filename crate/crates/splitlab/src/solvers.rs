//! Stationary iterations: the single-splitting scheme
//! `x_{k+1} = U^+ V x_k + U^+ b` and the two-term double-splitting schemes
//! with their 2n x 2n block iteration matrices.

use serde::Serialize;

use crate::dense::{rho, vec_norm2, Matrix, Tolerances};
use crate::error::{Error, Result};
use crate::splittings::{DoubleSplitting, SingleSplitting};

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Initial iterate; zero vector when absent.
    pub x0: Option<Vec<f64>>,
    /// Second initial iterate, double schemes only; zero vector when absent.
    pub x1: Option<Vec<f64>>,
    /// Threshold on the step norm `||x_{k+1} - x_k||_2`.
    pub stop_eps: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            x0: None,
            x1: None,
            stop_eps: 1e-10,
            max_iter: 100_000,
        }
    }
}

impl SolverConfig {
    fn validate(&self, n: usize) -> Result<()> {
        if !(self.stop_eps > 0.0 && self.stop_eps.is_finite()) {
            return Err(Error::Parameter(format!(
                "stop_eps must be positive, got {}",
                self.stop_eps
            )));
        }
        for (name, v) in [("x0", &self.x0), ("x1", &self.x1)] {
            if let Some(v) = v {
                if v.len() != n {
                    return Err(Error::Dimension(format!(
                        "{name} has length {}, expected {n}",
                        v.len()
                    )));
                }
            }
        }
        Ok(())
    }

    fn start(&self, n: usize) -> Vec<f64> {
        self.x0.clone().unwrap_or_else(|| vec![0.0; n])
    }

    fn second(&self, n: usize) -> Vec<f64> {
        self.x1.clone().unwrap_or_else(|| vec![0.0; n])
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationReport {
    /// Final iterate (the limit when converged).
    pub limit: Vec<f64>,
    /// Iterate one step before the final one.
    pub previous: Vec<f64>,
    pub k_final: usize,
    pub step_norms: Vec<f64>,
    pub converged: bool,
    pub diverged: bool,
    /// Geometric mean of consecutive step-norm ratios over the last 20 steps.
    pub rate_estimate: f64,
}

/// Geometric-mean ratio over (at most) the trailing `window` steps.
fn trailing_rate(step_norms: &[f64], window: usize) -> f64 {
    let n = step_norms.len();
    if n < 2 {
        return 0.0;
    }
    let span = window.min(n - 1);
    let first = step_norms[n - 1 - span];
    let last = step_norms[n - 1];
    if first <= 0.0 || last <= 0.0 {
        return 0.0;
    }
    (last / first).powf(1.0 / span as f64)
}

/// Shared loop: `step` maps (x_k, x_{k-1}) to x_{k+1}. Divergence is flagged
/// when the step norm grows 10x over 50 steps.
fn run_recurrence(
    mut x_prev: Vec<f64>,
    mut x_cur: Vec<f64>,
    cfg: &SolverConfig,
    mut step: impl FnMut(&[f64], &[f64]) -> Result<Vec<f64>>,
) -> Result<IterationReport> {
    let mut step_norms: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut diverged = false;
    let mut k = 0usize;
    while k < cfg.max_iter {
        let x_next = step(&x_cur, &x_prev)?;
        let norm = x_next
            .iter()
            .zip(&x_cur)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        step_norms.push(norm);
        x_prev = x_cur;
        x_cur = x_next;
        k += 1;
        if norm <= cfg.stop_eps {
            converged = true;
            break;
        }
        let len = step_norms.len();
        if len > 50 && step_norms[len - 1] > 10.0 * step_norms[len - 51] {
            diverged = true;
            break;
        }
        if !norm.is_finite() {
            diverged = true;
            break;
        }
    }
    let rate_estimate = trailing_rate(&step_norms, 20);
    Ok(IterationReport {
        limit: x_cur,
        previous: x_prev,
        k_final: k,
        step_norms,
        converged,
        diverged,
        rate_estimate,
    })
}

/// Single-splitting scheme `x_{k+1} = U^+ V x_k + U^+ b` (for nonsingular
/// square `U` the pseudoinverse is the inverse, so this covers the
/// `M^{-1}N` form as well). For the regularized system the caller passes
/// `b' = A^T b` so the limit approximates `B_lambda^{-1} A^T b`.
pub fn iterate_single(
    s: &SingleSplitting,
    b: &[f64],
    cfg: &SolverConfig,
) -> Result<IterationReport> {
    if b.len() != s.a().rows() {
        return Err(Error::Dimension(format!(
            "rhs length {} does not match {} rows",
            b.len(),
            s.a().rows()
        )));
    }
    let n = s.a().cols();
    cfg.validate(n)?;
    let h = s.iteration_matrix()?;
    let c = s.u_pinv().mul_vec(b)?;
    let x0 = cfg.start(n);
    run_recurrence(x0.clone(), x0, cfg, |x, _| {
        let hx = h.mul_vec(x)?;
        Ok(hx.iter().zip(&c).map(|(&a, &b)| a + b).collect())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockVariant {
    /// Type I form: blocks `P^{-1}R`, `-P^{-1}S`.
    HatW,
    /// Type II transposed form: blocks `(RP^{-1})^T`, `-(SP^{-1})^T`.
    TildeW,
    /// Pseudoinverse form: blocks `P^+R`, `-P^+S`.
    ProperW,
    /// Regularized form: same blocks as `HatW`, built from a splitting of
    /// `B_lambda` and driven by the right-hand side `A^T b`.
    LambdaW,
}

impl BlockVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            BlockVariant::HatW => "hat-w",
            BlockVariant::TildeW => "tilde-w",
            BlockVariant::ProperW => "proper-w",
            BlockVariant::LambdaW => "lambda-w",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockIterationMatrix {
    pub variant: BlockVariant,
    #[serde(skip)]
    pub w: Matrix,
    pub rho: f64,
}

/// Top-row operator pair of the block scheme: `(H, G)` with the recurrence
/// `x_{k+1} = H x_k - G x_{k-1} + c`. No admissibility gating.
pub(crate) fn double_operators(
    d: &DoubleSplitting,
    variant: BlockVariant,
) -> Result<(Matrix, Matrix)> {
    match variant {
        BlockVariant::HatW | BlockVariant::LambdaW | BlockVariant::ProperW => {
            Ok((d.p_pinv().dot(d.r())?, d.p_pinv().dot(d.s())?))
        }
        BlockVariant::TildeW => Ok((
            d.r().dot(d.p_pinv())?.transpose(),
            d.s().dot(d.p_pinv())?.transpose(),
        )),
    }
}

/// Assemble `[[H, -G], [I, 0]]` without gating.
pub(crate) fn assemble_block_unchecked(
    d: &DoubleSplitting,
    variant: BlockVariant,
) -> Result<Matrix> {
    let (h, g) = double_operators(d, variant)?;
    let n = h.rows();
    Matrix::from_blocks(&h, &g.scale(-1.0), &Matrix::identity(n), &Matrix::zeros(n, n))
}

fn check_admissible(d: &DoubleSplitting, variant: BlockVariant, tol: &Tolerances) -> Result<()> {
    match variant {
        BlockVariant::TildeW => {
            if !d.flags().type2 {
                return Err(Error::Hypothesis(
                    "tilde-w requires a double weak splitting of type II".into(),
                ));
            }
        }
        BlockVariant::ProperW => {
            if !d.flags().double_proper {
                return Err(Error::Hypothesis(
                    "proper-w requires a double proper splitting".into(),
                ));
            }
        }
        BlockVariant::HatW | BlockVariant::LambdaW => {
            if !d.p_nonsingular(tol)? {
                return Err(Error::Hypothesis(format!(
                    "{} requires a nonsingular P",
                    variant.as_str()
                )));
            }
        }
    }
    Ok(())
}

pub fn build_double_iteration_matrix(
    d: &DoubleSplitting,
    variant: BlockVariant,
    tol: &Tolerances,
) -> Result<BlockIterationMatrix> {
    check_admissible(d, variant, tol)?;
    let w = assemble_block_unchecked(d, variant)?;
    let rho = rho(&w, tol)?;
    Ok(BlockIterationMatrix { variant, w, rho })
}

/// Two-term double-splitting recurrence `x_{k+1} = H x_k - G x_{k-1} + c`.
/// The constant term is `P^{-1}b`, `(P^{-1})^T b`, or `P^+ b` per variant;
/// in the regularized usage the caller passes `b' = A^T b`.
pub fn iterate_double(
    d: &DoubleSplitting,
    b: &[f64],
    variant: BlockVariant,
    cfg: &SolverConfig,
) -> Result<IterationReport> {
    if b.len() != d.a().rows() {
        return Err(Error::Dimension(format!(
            "rhs length {} does not match {} rows",
            b.len(),
            d.a().rows()
        )));
    }
    let n = d.a().cols();
    cfg.validate(n)?;
    check_admissible(d, variant, &Tolerances::default())?;
    let (h, g) = double_operators(d, variant)?;
    let c = match variant {
        BlockVariant::TildeW => d.p_pinv().transpose().mul_vec(b)?,
        _ => d.p_pinv().mul_vec(b)?,
    };
    run_recurrence(cfg.start(n), cfg.second(n), cfg, |x_cur, x_prev| {
        let hx = h.mul_vec(x_cur)?;
        let gx = g.mul_vec(x_prev)?;
        Ok(hx
            .iter()
            .zip(&gx)
            .zip(&c)
            .map(|((&a, &b), &cc)| (a - b) + cc)
            .collect())
    })
}

/// Residual of the block fixed-point equation `x = H x - G x + c` at `x`.
pub fn double_fixed_point_residual(
    d: &DoubleSplitting,
    b: &[f64],
    variant: BlockVariant,
    x: &[f64],
) -> Result<f64> {
    let (h, g) = double_operators(d, variant)?;
    let c = match variant {
        BlockVariant::TildeW => d.p_pinv().transpose().mul_vec(b)?,
        _ => d.p_pinv().mul_vec(b)?,
    };
    let hx = h.mul_vec(x)?;
    let gx = g.mul_vec(x)?;
    let resid: Vec<f64> = x
        .iter()
        .zip(hx.iter().zip(&gx).zip(&c))
        .map(|(&xi, ((&a, &b), &cc))| xi - (a - b + cc))
        .collect();
    Ok(vec_norm2(&resid))
}

/// Empirical convergence rate of a finished run: geometric-mean step-norm
/// ratio over the last 20 steps. Needs at least 30 recorded norms.
pub fn asymptotic_rate(rep: &IterationReport) -> Result<f64> {
    if rep.step_norms.len() < 30 {
        return Err(Error::Insufficient(format!(
            "need at least 30 step norms, have {}",
            rep.step_norms.len()
        )));
    }
    Ok(trailing_rate(&rep.step_norms, 20))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::pseudoinverse;
    use crate::splittings::generate_proper_splitting;

    fn t() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn trivial_single_converges_in_one_step() {
        let a = Matrix::from_diag(&[2.0, 4.0]).unwrap();
        let s = SingleSplitting::new(a.clone(), a, Matrix::zeros(2, 2), &t()).unwrap();
        let rep = iterate_single(&s, &[2.0, 4.0], &SolverConfig::default()).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.k_final, 2);
        assert!((rep.limit[0] - 1.0).abs() < 1e-14);
        assert!((rep.limit[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn proper_splitting_reaches_pinv_solution_at_analytic_rate() {
        let a = Matrix::from_rows(&[&[4.0, 2.0, 0.0], &[2.0, 1.0, 0.0], &[0.0, 0.0, 2.0]])
            .unwrap();
        let s = generate_proper_splitting(&a, 2.0, &t()).unwrap();
        let b = [1.0, 2.0, 3.0];
        let cfg = SolverConfig {
            stop_eps: 1e-12,
            ..Default::default()
        };
        let rep = iterate_single(&s, &b, &cfg).unwrap();
        assert!(rep.converged);
        let want = pseudoinverse(&a, &t()).unwrap().mul_vec(&b).unwrap();
        for (got, want) in rep.limit.iter().zip(&want) {
            assert!((got - want).abs() < 1e-8);
        }
        let rate = asymptotic_rate(&rep).unwrap();
        assert!((rate - 0.5).abs() < 0.05, "rate {rate}");
    }

    #[test]
    fn divergence_flagged_for_expanding_iteration() {
        let a = Matrix::from_diag(&[-0.5, -0.5]).unwrap();
        let u = Matrix::identity(2);
        let v = u.sub(&a).unwrap(); // H = V, rho = 1.5
        let s = SingleSplitting::new(a, u, v, &t()).unwrap();
        let rep = iterate_single(&s, &[1.0, 1.0], &SolverConfig::default()).unwrap();
        assert!(rep.diverged);
        assert!(!rep.converged);
    }

    #[test]
    fn trivial_double_converges_in_one_step() {
        let a = Matrix::from_rows(&[&[10.0, -4.0], &[-4.0, 6.0]]).unwrap();
        let z = Matrix::zeros(2, 2);
        let d = DoubleSplitting::new(a.clone(), a.clone(), z.clone(), z, &t()).unwrap();
        let b = [1.0, 2.0];
        let rep = iterate_double(&d, &b, BlockVariant::HatW, &SolverConfig::default()).unwrap();
        assert!(rep.converged);
        let want = crate::dense::solve_dense_vec(&a, &b, &t()).unwrap();
        for (got, want) in rep.limit.iter().zip(&want) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn double_with_zero_s_matches_single_bitwise() {
        let a = Matrix::from_rows(&[&[4.0, -1.0], &[-1.0, 4.0]]).unwrap();
        let u = a.diagonal_part();
        let v = u.sub(&a).unwrap();
        let s = SingleSplitting::new(a.clone(), u.clone(), v.clone(), &t()).unwrap();
        let d = DoubleSplitting::new(a, u, v, Matrix::zeros(2, 2), &t()).unwrap();
        let b = [1.0, -2.0];
        let cfg = SolverConfig {
            max_iter: 40,
            stop_eps: 1e-300,
            ..Default::default()
        };
        let rs = iterate_single(&s, &b, &cfg).unwrap();
        let rd = iterate_double(&d, &b, BlockVariant::HatW, &cfg).unwrap();
        assert_eq!(rs.limit, rd.limit);
        assert_eq!(rs.step_norms, rd.step_norms);
    }

    #[test]
    fn block_matrix_structure_and_nilpotent_case() {
        let a = Matrix::from_rows(&[&[10.0, -4.0], &[-4.0, 6.0]]).unwrap();
        let z = Matrix::zeros(2, 2);
        let d = DoubleSplitting::new(a.clone(), a, z.clone(), z, &t()).unwrap();
        let blk = build_double_iteration_matrix(&d, BlockVariant::TildeW, &t()).unwrap();
        assert!(blk.rho.abs() < 1e-9);
        // bottom-left block I, bottom-right 0, exact
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_eq!(blk.w.get(2 + i, j), want);
                assert_eq!(blk.w.get(2 + i, 2 + j), 0.0);
            }
        }
    }

    #[test]
    fn tilde_w_nonnegative_for_type2() {
        let a = Matrix::from_rows(&[&[10.0, -4.0], &[-4.0, 6.0]]).unwrap();
        let p = Matrix::from_diag(&[12.0, 8.0]).unwrap();
        let r = Matrix::from_rows(&[&[2.0, 2.0], &[4.0, 2.0]]).unwrap();
        let s = Matrix::from_rows(&[&[0.0, -2.0], &[0.0, 0.0]]).unwrap();
        let d = DoubleSplitting::new(a, p, r, s, &t()).unwrap();
        assert!(d.flags().type2);
        let blk = build_double_iteration_matrix(&d, BlockVariant::TildeW, &t()).unwrap();
        assert!(blk.w.is_nonnegative());
        assert!(blk.rho < 1.0);
    }

    #[test]
    fn inadmissible_variant_rejected() {
        let a = Matrix::from_rows(&[&[2.0, 1.0], &[0.0, 3.0]]).unwrap();
        let z = Matrix::zeros(2, 2);
        let d = DoubleSplitting::new(a.clone(), a, z.clone(), z, &t()).unwrap();
        assert!(!d.flags().type2);
        assert!(matches!(
            build_double_iteration_matrix(&d, BlockVariant::TildeW, &t()),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn converged_double_limit_satisfies_fixed_point() {
        let a = Matrix::from_rows(&[&[10.0, -4.0], &[-4.0, 6.0]]).unwrap();
        let p = Matrix::from_diag(&[12.0, 8.0]).unwrap();
        let r = Matrix::from_rows(&[&[2.0, 2.0], &[4.0, 2.0]]).unwrap();
        let s = Matrix::from_rows(&[&[0.0, -2.0], &[0.0, 0.0]]).unwrap();
        let d = DoubleSplitting::new(a, p, r, s, &t()).unwrap();
        let b = [1.0, 1.0];
        let rep = iterate_double(&d, &b, BlockVariant::TildeW, &SolverConfig::default()).unwrap();
        assert!(rep.converged);
        let resid = double_fixed_point_residual(&d, &b, BlockVariant::TildeW, &rep.limit).unwrap();
        assert!(resid <= 10.0 * 1e-10, "residual {resid}");
    }

    #[test]
    fn asymptotic_rate_requires_enough_history() {
        let a = Matrix::from_diag(&[2.0, 4.0]).unwrap();
        let s = SingleSplitting::new(a.clone(), a, Matrix::zeros(2, 2), &t()).unwrap();
        let rep = iterate_single(&s, &[2.0, 4.0], &SolverConfig::default()).unwrap();
        assert!(matches!(
            asymptotic_rate(&rep),
            Err(Error::Insufficient(_))
        ));
    }

    #[test]
    fn block_rho_invariant_under_similarity_permutation() {
        let a = Matrix::from_rows(&[&[10.0, -4.0], &[-4.0, 6.0]]).unwrap();
        let p = Matrix::from_diag(&[12.0, 8.0]).unwrap();
        let r = Matrix::from_rows(&[&[2.0, 2.0], &[4.0, 2.0]]).unwrap();
        let s = Matrix::from_rows(&[&[0.0, -2.0], &[0.0, 0.0]]).unwrap();
        let d = DoubleSplitting::new(a, p, r, s, &t()).unwrap();
        let blk = build_double_iteration_matrix(&d, BlockVariant::TildeW, &t()).unwrap();
        let perm = [2usize, 0, 3, 1];
        let permuted = blk.w.permute_symmetric(&perm).unwrap();
        let r2 = rho(&permuted, &t()).unwrap();
        assert!((blk.rho - r2).abs() < 1e-8);
    }
}
