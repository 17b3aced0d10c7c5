//! Tikhonov regularization: the well-posed system `B_lambda x = A^T b` with
//! `B_lambda = A^T A + lambda I`, lambda-sweeps toward the pseudoinverse
//! limit, and splitting families of `B_lambda` parameterized by lambda so
//! limit hypotheses can be evaluated by sweep stability.

use std::sync::OnceLock;

use serde::Serialize;

use crate::dense::{pseudoinverse, svd_factors, Matrix, Tolerances};
use crate::error::{Error, Result};
use crate::splittings::{DoubleSplitting, SingleSplitting};

/// `(A, lambda, B = A^T A + lambda I)` with the map `B^{-1} A^T` cached on
/// first use.
#[derive(Debug)]
pub struct RegularizedSystem {
    a: Matrix,
    lambda: f64,
    b: Matrix,
    rhs_map: OnceLock<Matrix>,
}

impl Clone for RegularizedSystem {
    fn clone(&self) -> Self {
        Self {
            a: self.a.clone(),
            lambda: self.lambda,
            b: self.b.clone(),
            rhs_map: OnceLock::new(),
        }
    }
}

pub fn build_regularized(a: &Matrix, lambda: f64) -> Result<RegularizedSystem> {
    RegularizedSystem::new(a.clone(), lambda)
}

impl RegularizedSystem {
    pub fn new(a: Matrix, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Parameter(format!(
                "regularization parameter must be positive, got {lambda}"
            )));
        }
        let b = gram_plus_lambda(&a, lambda)?;
        Ok(Self {
            a,
            lambda,
            b,
            rhs_map: OnceLock::new(),
        })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `B_lambda`, symmetrized after formation.
    pub fn b(&self) -> &Matrix {
        &self.b
    }

    /// `B_lambda^{-1} A^T`, computed once and cached. Built from the SVD of
    /// `A` as `sum_k v_k (sigma_k / (sigma_k^2 + lambda)) u_k^T`: forming
    /// and solving against `B_lambda` would square the condition number and
    /// drown small lambdas in roundoff.
    pub fn tikhonov_map(&self, tol: &Tolerances) -> Result<&Matrix> {
        if let Some(m) = self.rhs_map.get() {
            return Ok(m);
        }
        let f = svd_factors(&self.a, tol)?;
        let mut computed = Matrix::zeros(self.a.cols(), self.a.rows());
        for k in 0..f.numerical_rank {
            let sigma = f.singular_values[k];
            let filt = sigma / (sigma * sigma + self.lambda);
            for i in 0..self.a.cols() {
                let vik = f.right_vectors.get(i, k) * filt;
                if vik == 0.0 {
                    continue;
                }
                for j in 0..self.a.rows() {
                    let cur = computed.get(i, j);
                    computed.set(i, j, cur + vik * f.left_vectors.get(j, k));
                }
            }
        }
        Ok(self.rhs_map.get_or_init(|| computed))
    }
}

/// `A^T A + lambda I`, symmetrized by averaging with its transpose.
fn gram_plus_lambda(a: &Matrix, lambda: f64) -> Result<Matrix> {
    let at = a.transpose();
    let gram = at.dot(a)?;
    let n = a.cols();
    let mut b = gram.add(&gram.transpose())?.scale(0.5);
    for i in 0..n {
        b.set(i, i, b.get(i, i) + lambda);
    }
    Ok(b)
}

/// Default lambda schedule: decades from 1e-2 down to 1e-12.
pub fn default_schedule() -> Vec<f64> {
    (2..=12).map(|k| 10f64.powi(-k)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaSweep {
    pub schedule: Vec<f64>,
    /// Frobenius distances from `B_lambda^{-1} A^T` to the pseudoinverse.
    pub errors: Vec<f64>,
    #[serde(skip)]
    pub limit_estimate: Matrix,
}

/// Sweep lambda down the schedule, measuring the distance of the
/// regularized map from `A^\dagger`.
pub fn limit_sweep(a: &Matrix, schedule: &[f64], tol: &Tolerances) -> Result<LambdaSweep> {
    if schedule.is_empty() {
        return Err(Error::Parameter("empty lambda schedule".into()));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) || schedule.iter().any(|&l| l <= 0.0) {
        return Err(Error::Parameter(
            "schedule must be strictly decreasing and positive".into(),
        ));
    }
    let a_pinv = pseudoinverse(a, tol)?;
    let mut errors = Vec::with_capacity(schedule.len());
    let mut limit_estimate = a_pinv.clone();
    for &lambda in schedule {
        let sys = RegularizedSystem::new(a.clone(), lambda)?;
        let map = sys.tikhonov_map(tol)?;
        errors.push(map.sub(&a_pinv)?.frobenius_norm());
        limit_estimate = map.clone();
    }
    Ok(LambdaSweep {
        schedule: schedule.to_vec(),
        errors,
        limit_estimate,
    })
}

/// Rule producing one splitting part of `B_lambda` as a function of lambda.
#[derive(Debug, Clone)]
pub enum PartRule {
    /// The same matrix at every lambda.
    Fixed(Matrix),
    /// Base matrix plus `lambda I` (absorbs the regularization shift).
    FixedPlusLambdaI(Matrix),
    /// Diagonal of `B_lambda`.
    Jacobi,
    /// Tridiagonal part of `B_lambda`.
    Tridiag,
    /// `B_lambda G` for a fixed right factor `G`.
    ScaledRight(Matrix),
}

impl PartRule {
    fn evaluate(&self, b: &Matrix, lambda: f64) -> Result<Matrix> {
        match self {
            PartRule::Fixed(m) => Ok(m.clone()),
            PartRule::FixedPlusLambdaI(m) => {
                if !m.is_square() {
                    return Err(Error::Strategy("lambda-shift rule needs a square base".into()));
                }
                let mut out = m.clone();
                for i in 0..out.rows() {
                    out.set(i, i, out.get(i, i) + lambda);
                }
                Ok(out)
            }
            PartRule::Jacobi => {
                let d = b.diagonal_part();
                for i in 0..d.rows() {
                    if d.get(i, i) == 0.0 {
                        return Err(Error::Strategy(format!(
                            "jacobi strategy hit a zero diagonal at index {i}"
                        )));
                    }
                }
                Ok(d)
            }
            PartRule::Tridiag => Ok(b.tridiagonal_part()),
            PartRule::ScaledRight(g) => b.dot(g),
        }
    }
}

/// A single-splitting family of `B_lambda = M_lambda - N_lambda`:
/// `M_lambda` comes from the rule, `N_lambda = M_lambda - B_lambda`.
#[derive(Debug, Clone)]
pub struct SingleFamily {
    pub a: Matrix,
    pub m_rule: PartRule,
}

impl SingleFamily {
    pub fn new(a: Matrix, m_rule: PartRule) -> Self {
        Self { a, m_rule }
    }

    pub fn at(&self, lambda: f64, tol: &Tolerances) -> Result<SingleSplitting> {
        let sys = RegularizedSystem::new(self.a.clone(), lambda)?;
        let b = sys.b().clone();
        let m = self.m_rule.evaluate(&b, lambda)?;
        if m.shape() != b.shape() {
            return Err(Error::Strategy(format!(
                "strategy part shape {:?} does not match B_lambda {:?}",
                m.shape(),
                b.shape()
            )));
        }
        let n = m.sub(&b)?;
        SingleSplitting::new(b, m, n, tol)
    }

    pub fn system(&self, lambda: f64) -> Result<RegularizedSystem> {
        RegularizedSystem::new(self.a.clone(), lambda)
    }
}

/// A double-splitting family of `B_lambda = P_lambda - R_lambda + S_lambda`:
/// `P_lambda` and `R_lambda` come from rules, `S_lambda` is implied.
#[derive(Debug, Clone)]
pub struct DoubleFamily {
    pub a: Matrix,
    pub p_rule: PartRule,
    pub r_rule: PartRule,
}

impl DoubleFamily {
    pub fn new(a: Matrix, p_rule: PartRule, r_rule: PartRule) -> Self {
        Self { a, p_rule, r_rule }
    }

    pub fn at(&self, lambda: f64, tol: &Tolerances) -> Result<DoubleSplitting> {
        let sys = RegularizedSystem::new(self.a.clone(), lambda)?;
        let b = sys.b().clone();
        let p = self.p_rule.evaluate(&b, lambda)?;
        let r = self.r_rule.evaluate(&b, lambda)?;
        let s = b.sub(&p)?.add(&r)?;
        DoubleSplitting::new(b, p, r, s, tol)
    }

    pub fn system(&self, lambda: f64) -> Result<RegularizedSystem> {
        RegularizedSystem::new(self.a.clone(), lambda)
    }
}

/// Splitting strategies accepted by `split_regularized`.
#[derive(Debug, Clone)]
pub enum SplitStrategy {
    Jacobi,
    Tridiag,
    CustomSingle { m: Matrix, n: Matrix },
    CustomDouble { p: Matrix, r: Matrix, s: Matrix },
}

#[derive(Debug)]
pub enum SplitOutcome {
    Single(SingleSplitting),
    Double(DoubleSplitting),
}

/// Build and classify a splitting of `B_lambda` per the chosen strategy.
/// Custom parts are checked for consistency with `B_lambda` on admission.
pub fn split_regularized(
    sys: &RegularizedSystem,
    strategy: &SplitStrategy,
    tol: &Tolerances,
) -> Result<SplitOutcome> {
    let b = sys.b().clone();
    match strategy {
        SplitStrategy::Jacobi => {
            let m = PartRule::Jacobi.evaluate(&b, sys.lambda())?;
            let n = m.sub(&b)?;
            Ok(SplitOutcome::Single(SingleSplitting::new(b, m, n, tol)?))
        }
        SplitStrategy::Tridiag => {
            let m = b.tridiagonal_part();
            let n = m.sub(&b)?;
            Ok(SplitOutcome::Single(SingleSplitting::new(b, m, n, tol)?))
        }
        SplitStrategy::CustomSingle { m, n } => Ok(SplitOutcome::Single(SingleSplitting::new(
            b,
            m.clone(),
            n.clone(),
            tol,
        )?)),
        SplitStrategy::CustomDouble { p, r, s } => Ok(SplitOutcome::Double(DoubleSplitting::new(
            b,
            p.clone(),
            r.clone(),
            s.clone(),
            tol,
        )?)),
    }
}

/// Evaluate a boolean lambda-limit hypothesis by sweep stability: the
/// verdict at the smallest lambda counts, and must agree across the last
/// three schedule points. Returns `(holds, lambda_used, stable)`.
pub fn stable_limit_verdict(
    schedule: &[f64],
    mut predicate: impl FnMut(f64) -> Result<bool>,
) -> Result<(bool, f64, bool)> {
    if schedule.is_empty() {
        return Err(Error::Parameter("empty lambda schedule".into()));
    }
    let tail_start = schedule.len().saturating_sub(3);
    let tail = &schedule[tail_start..];
    let mut verdicts = Vec::with_capacity(tail.len());
    for &lambda in tail {
        verdicts.push(predicate(lambda)?);
    }
    let last = *verdicts.last().expect("nonempty tail");
    let stable = verdicts.iter().all(|&v| v == last);
    Ok((last && stable, *schedule.last().unwrap(), stable))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{approx_eq, entrywise_geq, spectral_radius};

    fn t() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn build_regularized_small_example() {
        let a = Matrix::from_rows(&[&[1.0, 0.0], &[0.0, 0.0]]).unwrap();
        let sys = RegularizedSystem::new(a, 1.0).unwrap();
        let expected = Matrix::from_rows(&[&[2.0, 0.0], &[0.0, 1.0]]).unwrap();
        assert!(approx_eq(sys.b(), &expected, &t()));
    }

    #[test]
    fn rejects_nonpositive_lambda() {
        let a = Matrix::identity(2);
        assert!(RegularizedSystem::new(a.clone(), 0.0).is_err());
        assert!(RegularizedSystem::new(a, -1.0).is_err());
    }

    #[test]
    fn tikhonov_map_analytic_rank_deficient() {
        // A = [[1,0],[0,0]]: map is [[1/(1+lambda),0],[0,0]].
        let a = Matrix::from_rows(&[&[1.0, 0.0], &[0.0, 0.0]]).unwrap();
        for lambda in [1.0, 1e-3, 1e-8] {
            let sys = RegularizedSystem::new(a.clone(), lambda).unwrap();
            let map = sys.tikhonov_map(&t()).unwrap();
            assert!((map.get(0, 0) - 1.0 / (1.0 + lambda)).abs() < 1e-12);
            assert!(map.get(1, 1).abs() < 1e-12);
        }
    }

    #[test]
    fn tikhonov_map_identity() {
        let a = Matrix::identity(3);
        let sys = RegularizedSystem::new(a, 1.0).unwrap();
        let map = sys.tikhonov_map(&t()).unwrap();
        assert!(approx_eq(map, &Matrix::identity(3).scale(0.5), &t()));
    }

    #[test]
    fn sweep_identity_errors_are_lambda_over_one_plus_lambda() {
        let a = Matrix::identity(2);
        let schedule = vec![1e-1, 1e-2, 1e-3];
        let sweep = limit_sweep(&a, &schedule, &t()).unwrap();
        for (k, &lambda) in schedule.iter().enumerate() {
            let expected = (2f64).sqrt() * lambda / (1.0 + lambda);
            assert!((sweep.errors[k] - expected).abs() < 1e-10);
        }
        assert!(sweep.errors.windows(2).all(|w| w[1] <= w[0] * 1.1));
    }

    #[test]
    fn sweep_rejects_bad_schedules() {
        let a = Matrix::identity(2);
        assert!(limit_sweep(&a, &[], &t()).is_err());
        assert!(limit_sweep(&a, &[1e-2, 1e-1], &t()).is_err());
        assert!(limit_sweep(&a, &[1e-2, -1e-3], &t()).is_err());
    }

    #[test]
    fn jacobi_strategy_detects_zero_diagonal() {
        // A with a zero column makes B_lambda's diagonal strictly positive
        // (lambda shifts it), so build an artificial failure through the rule.
        let b = Matrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        assert!(PartRule::Jacobi.evaluate(&b, 0.0).is_err());
    }

    #[test]
    fn custom_single_consistency_enforced() {
        let a = Matrix::identity(2);
        let sys = RegularizedSystem::new(a, 1.0).unwrap();
        let m = Matrix::identity(2).scale(3.0);
        let bad_n = Matrix::identity(2); // 3I - I = 2I = B is fine; make it bad
        let ok = split_regularized(
            &sys,
            &SplitStrategy::CustomSingle {
                m: m.clone(),
                n: bad_n,
            },
            &t(),
        );
        assert!(ok.is_ok());
        let bad = split_regularized(
            &sys,
            &SplitStrategy::CustomSingle {
                m,
                n: Matrix::identity(2).scale(0.5),
            },
            &t(),
        );
        assert!(matches!(bad, Err(Error::Consistency(_))));
    }

    #[test]
    fn spd_and_eigenvalue_shift() {
        let a = Matrix::from_rows(&[&[1.0, 2.0, 0.0], &[0.0, 1.0, 1.0]]).unwrap();
        let lambda = 0.37;
        let sys = RegularizedSystem::new(a.clone(), lambda).unwrap();
        // eigenvalues of B are sigma_i^2 + lambda (zeros included)
        let f = crate::dense::svd_factors(&a, &t()).unwrap();
        let mut expected: Vec<f64> = f.singular_values.iter().map(|s| s * s + lambda).collect();
        while expected.len() < a.cols() {
            expected.push(lambda);
        }
        let b_min_shift = sys.b().clone();
        let rep = spectral_radius(&b_min_shift, &t()).unwrap();
        let max_expected = expected.iter().cloned().fold(0.0f64, f64::max);
        assert!((rep.radius - max_expected).abs() < 1e-8);
    }

    #[test]
    fn stable_limit_verdict_detects_instability() {
        let schedule = [1e-2, 1e-3, 1e-4, 1e-5];
        let (holds, lambda, stable) =
            stable_limit_verdict(&schedule, |l| Ok(l < 5e-3)).unwrap();
        assert!(holds && stable);
        assert_eq!(lambda, 1e-5);
        let (holds, _, stable) =
            stable_limit_verdict(&schedule, |l| Ok(l < 5e-5)).unwrap();
        assert!(!holds);
        assert!(!stable);
    }

    #[test]
    fn family_reconstructs_custom_fixed_rule() {
        let a = Matrix::from_rows(&[&[1.0, 0.0], &[0.0, 0.0]]).unwrap();
        let m = Matrix::from_rows(&[&[3.0, 0.0], &[0.0, 2.0]]).unwrap();
        let fam = SingleFamily::new(a, PartRule::Fixed(m.clone()));
        let s = fam.at(1e-3, &t()).unwrap();
        assert_eq!(s.u(), &m);
        // N = M - B
        let b = s.a();
        assert!(approx_eq(&s.u().sub(s.v()).unwrap(), b, &t()));
    }

    #[test]
    fn entrywise_map_bound_holds() {
        // ||B^{-1}A^T||_2 <= 1/(2 sqrt(lambda)); spot-check via Frobenius
        // bound on a small random-ish matrix.
        let a = Matrix::from_rows(&[&[0.8, -0.3], &[0.2, 0.5], &[-0.1, 0.9]]).unwrap();
        for lambda in [1e-2, 1e-4, 1e-6] {
            let sys = RegularizedSystem::new(a.clone(), lambda).unwrap();
            let map = sys.tikhonov_map(&t()).unwrap();
            let bound = 1.0 / (2.0 * lambda.sqrt());
            // spectral norm <= Frobenius norm, so check the cheap direction
            let f = crate::dense::svd_factors(map, &t()).unwrap();
            let sigma_max = f.singular_values.first().copied().unwrap_or(0.0);
            assert!(sigma_max <= bound * (1.0 + 1e-12));
        }
        // silence unused warning pattern for entrywise_geq import in this module
        let z = Matrix::zeros(1, 1);
        assert!(entrywise_geq(&z, &z, &t()).unwrap());
    }
}
