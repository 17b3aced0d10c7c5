//! Embedded literature instances: the worked examples' matrices, the
//! values printed alongside them, and the lambda-families that reproduce
//! the regularized splittings. Everything here is data; computation lives
//! in the other modules.

use crate::dense::Matrix;
use crate::regularization::{DoubleFamily, PartRule, SingleFamily};

fn m(rows: &[&[f64]]) -> Matrix {
    Matrix::from_rows(rows).expect("fixture matrices are well formed")
}

/// Rectangular rank-deficient comparison instance: weak proper splitting of
/// the first type of `A`, plus a fixed-`M` splitting family of `B_lambda`
/// whose printed parts appear at `lambda = 1e-4`.
pub struct RectangularComparison {
    pub a: Matrix,
    pub m: Matrix,
    pub n: Matrix,
    pub lambda: f64,
    pub b_lambda_printed: Matrix,
    pub m_lambda: Matrix,
    pub n_lambda_printed: Matrix,
    /// rho(M_lambda^{-1} N_lambda) as printed.
    pub rho_regularized: f64,
    /// rho(M^+ N) as printed.
    pub rho_original: f64,
}

pub fn rectangular_comparison() -> RectangularComparison {
    RectangularComparison {
        a: m(&[
            &[4.0, 0.0, 2.0],
            &[0.0, 4.0, 2.0],
            &[2.0, 2.0, -4.0],
            &[2.0, 2.0, 0.0],
        ]),
        m: m(&[
            &[160.0, 80.0, 60.0],
            &[120.0, 160.0, 60.0],
            &[80.0, 80.0, -4.0],
            &[80.0, 80.0, 0.0],
        ]),
        n: m(&[
            &[156.0, 80.0, 58.0],
            &[120.0, 156.0, 58.0],
            &[78.0, 78.0, 0.0],
            &[78.0, 78.0, 0.0],
        ]),
        lambda: 1e-4,
        b_lambda_printed: m(&[
            &[24.0001, 8.0, 0.0],
            &[8.0, 24.0001, 0.0],
            &[0.0, 0.0, 24.0001],
        ]),
        m_lambda: m(&[
            &[100.0, 20.0, 2.0],
            &[35.0, 40.0, 1.0],
            &[5.0, 3.0, 40.0],
        ]),
        n_lambda_printed: m(&[
            &[75.9999, 12.0, 2.0],
            &[27.0, 15.9999, 1.0],
            &[5.0, 3.0, 15.9999],
        ]),
        rho_regularized: 0.7594,
        rho_original: 0.9823,
    }
}

/// Lambda-family matching the rectangular comparison instance: `M_lambda`
/// is fixed, so `N_lambda = M_lambda - B_lambda` absorbs the shift.
pub fn rectangular_comparison_family() -> SingleFamily {
    let fx = rectangular_comparison();
    SingleFamily::new(fx.a, PartRule::Fixed(fx.m_lambda))
}

/// Printed values of the converse (non-necessity) probe on the same
/// instance: `NM^+` and the hypothesis difference
/// `A^+NM^+ - M_lambda^{-1}N_lambda A^+`, which has a negative entry.
pub struct ConverseMixedBound {
    pub nm_pinv_printed: Matrix,
    pub difference_printed: Matrix,
}

pub fn converse_mixed_bound() -> ConverseMixedBound {
    ConverseMixedBound {
        nm_pinv_printed: m(&[
            &[0.9556, 0.0112, 0.0013, 0.0208],
            &[0.0222, 0.9445, 0.0003, 0.0385],
            &[0.0108, 0.0215, 0.4843, 0.4369],
            &[0.0108, 0.0215, 0.4843, 0.4369],
        ]),
        difference_printed: m(&[
            &[0.0393, -0.0168, 0.0123, 0.0058],
            &[-0.0346, 0.1124, 0.0384, 0.0375],
            &[0.0436, 0.0368, -0.0187, -0.0724],
        ]),
    }
}

/// Symmetric 2x2 instance carrying two double weak splittings of type II,
/// with the printed scaled-part tables and block radii.
pub struct SymmetricDoublePair {
    pub a: Matrix,
    pub p1: Matrix,
    pub r1: Matrix,
    pub s1: Matrix,
    pub p2: Matrix,
    pub r2: Matrix,
    pub s2: Matrix,
    pub p1_a_inv_printed: Matrix,
    pub p2_a_inv_printed: Matrix,
    pub s1_a_inv_printed: Matrix,
    pub s2_a_inv_printed: Matrix,
    /// rho(tilde-W_1) as printed.
    pub rho_first: f64,
    /// rho(tilde-W_2) as printed.
    pub rho_second: f64,
    /// Converse probe: `R_1P_1^{-1} - R_2P_2^{-1}` as printed (not >= 0).
    pub diff_rp_printed: Matrix,
    /// Converse probe: `AP_1^{-1} - AP_2^{-1}` as printed (not >= 0).
    pub diff_ap_printed: Matrix,
}

pub fn symmetric_double_pair() -> SymmetricDoublePair {
    SymmetricDoublePair {
        a: m(&[&[10.0, -4.0], &[-4.0, 6.0]]),
        p1: m(&[&[12.0, 0.0], &[0.0, 8.0]]),
        r1: m(&[&[2.0, 2.0], &[4.0, 2.0]]),
        s1: m(&[&[0.0, -2.0], &[0.0, 0.0]]),
        p2: m(&[&[16.0, 0.0], &[0.0, 10.0]]),
        r2: m(&[&[6.0, 2.0], &[0.0, 4.0]]),
        s2: m(&[&[0.0, -2.0], &[-4.0, 0.0]]),
        p1_a_inv_printed: m(&[&[1.6364, 1.0909], &[0.7273, 1.8182]]),
        p2_a_inv_printed: m(&[&[2.1818, 1.4545], &[0.9091, 2.2727]]),
        s1_a_inv_printed: m(&[&[-0.1818, -0.4545], &[0.0, 0.0]]),
        s2_a_inv_printed: m(&[&[-0.1818, -0.4545], &[-0.5455, -0.3636]]),
        rho_first: 0.6667,
        rho_second: 0.7729,
        diff_rp_printed: m(&[&[-0.2083, 0.0500], &[0.3333, -0.1500]]),
        diff_ap_printed: m(&[&[0.2083, -0.1000], &[-0.0833, 0.1500]]),
    }
}

/// Singular symmetric 3x3 instance with a double splitting of the original
/// matrix and a lambda-family of double splittings of `B_lambda` whose
/// printed parts appear at `lambda = 1e-4`.
///
/// The printed original-side parts do not recompose to the printed `A`
/// (entry (1,0) of `P - R + S` is 0, not 2), and the range of the printed
/// `P` differs from the range of `A`; the fixture carries the parts exactly
/// as printed, so consumers must build it without the recomposition check
/// and must expect the properness hypothesis to evaluate false.
pub struct RegularizedDoubleComparison {
    pub a: Matrix,
    pub p: Matrix,
    pub r: Matrix,
    pub s: Matrix,
    pub lambda: f64,
    pub b_lambda_printed: Matrix,
    pub p_lambda_printed: Matrix,
    pub r_lambda: Matrix,
    pub s_lambda_printed: Matrix,
    /// `P_lambda` base matrix: `P_lambda = p_hat + lambda I`.
    pub p_hat: Matrix,
    /// `P^+R - P_lambda^{-1}R_lambda` as printed.
    pub diff_r_printed: Matrix,
    /// `P_lambda^{-1}S_lambda - P^+S` as printed.
    pub diff_s_printed: Matrix,
    /// rho(W_lambda) as printed.
    pub rho_lambda: f64,
    /// rho(W) as printed.
    pub rho_w: f64,
}

pub fn regularized_double_comparison() -> RegularizedDoubleComparison {
    RegularizedDoubleComparison {
        a: m(&[&[4.0, 2.0, 0.0], &[2.0, 1.0, 0.0], &[0.0, 0.0, 2.0]]),
        p: m(&[&[12.0, 6.0, 0.0], &[4.0, 2.0, 0.0], &[0.0, 0.0, 3.0]]),
        r: m(&[&[7.0, 3.0, 0.0], &[3.0, 0.5, 0.0], &[0.0, 0.0, 0.5]]),
        s: m(&[&[-1.0, -1.0, 0.0], &[-1.0, -0.5, 0.0], &[0.0, 0.0, -0.5]]),
        lambda: 1e-4,
        b_lambda_printed: m(&[
            &[20.0001, 10.0, 0.0],
            &[10.0, 5.0001, 0.0],
            &[0.0, 0.0, 4.0001],
        ]),
        p_lambda_printed: m(&[
            &[24.0001, 12.0, 0.0],
            &[12.0, 6.0001, 0.0],
            &[0.0, 0.0, 4.5001],
        ]),
        r_lambda: m(&[&[2.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 0.5]]),
        s_lambda_printed: m(&[
            &[-2.0, -2.0, 0.0],
            &[-1.0, -1.0, 0.0],
            &[0.0, 0.0, 0.0],
        ]),
        p_hat: m(&[&[24.0, 12.0, 0.0], &[12.0, 6.0, 0.0], &[0.0, 0.0, 4.5]]),
        diff_r_printed: m(&[
            &[0.4133, 0.1900, 0.0],
            &[0.2067, 0.0950, 0.0],
            &[0.0, 0.0, 0.0556],
        ]),
        diff_s_printed: m(&[
            &[0.0133, 0.0033, 0.0],
            &[0.0067, 0.0017, 0.0],
            &[0.0, 0.0, 0.1667],
        ]),
        rho_lambda: 0.35192,
        rho_w: 0.7321,
    }
}

/// Lambda-family matching the regularized double comparison instance:
/// `P_lambda` is the fixed base plus `lambda I`, `R_lambda` is fixed, and
/// `S_lambda = B_lambda - P_lambda + R_lambda` is implied.
pub fn regularized_double_family() -> DoubleFamily {
    let fx = regularized_double_comparison();
    DoubleFamily::new(
        fx.a,
        PartRule::FixedPlusLambdaI(fx.p_hat),
        PartRule::Fixed(fx.r_lambda),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{approx_eq, Tolerances};

    fn close(x: &Matrix, y: &Matrix, eps: f64) -> bool {
        x.sub(y).map(|d| d.max_abs() <= eps).unwrap_or(false)
    }

    #[test]
    fn rectangular_instance_is_internally_consistent() {
        let fx = rectangular_comparison();
        assert!(approx_eq(
            &fx.m.sub(&fx.n).unwrap(),
            &fx.a,
            &Tolerances::default()
        ));
        // B_lambda computed from A matches the printed matrix closely
        let sys = crate::regularization::RegularizedSystem::new(fx.a.clone(), fx.lambda).unwrap();
        assert!(close(sys.b(), &fx.b_lambda_printed, 1e-3));
        // printed regularized parts recompose to the printed B_lambda
        let diff = fx.m_lambda.sub(&fx.n_lambda_printed).unwrap();
        assert!(close(&diff, &fx.b_lambda_printed, 1e-12));
    }

    #[test]
    fn symmetric_pair_recomposes() {
        let fx = symmetric_double_pair();
        for (p, r, s) in [(&fx.p1, &fx.r1, &fx.s1), (&fx.p2, &fx.r2, &fx.s2)] {
            let re = p.sub(r).unwrap().add(s).unwrap();
            assert_eq!(re, fx.a);
        }
    }

    #[test]
    fn regularized_double_parts_recompose_on_the_lambda_side() {
        let fx = regularized_double_comparison();
        let re = fx
            .p_lambda_printed
            .sub(&fx.r_lambda)
            .unwrap()
            .add(&fx.s_lambda_printed)
            .unwrap();
        assert!(close(&re, &fx.b_lambda_printed, 1e-12));
        // original-side parts do NOT recompose: entry (1,0) is off by 2
        let re_a = fx.p.sub(&fx.r).unwrap().add(&fx.s).unwrap();
        let dev = re_a.sub(&fx.a).unwrap();
        assert!((dev.get(1, 0).abs() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn families_reproduce_printed_parts_at_printed_lambda() {
        let tol = Tolerances::default();
        let fx = rectangular_comparison();
        let fam = rectangular_comparison_family();
        let s = fam.at(fx.lambda, &tol).unwrap();
        assert!(close(s.a(), &fx.b_lambda_printed, 1e-3));
        assert_eq!(s.u(), &fx.m_lambda);
        assert!(close(s.v(), &fx.n_lambda_printed, 1e-3));

        let fx = regularized_double_comparison();
        let fam = regularized_double_family();
        let d = fam.at(fx.lambda, &tol).unwrap();
        assert!(close(d.p(), &fx.p_lambda_printed, 1e-3));
        assert_eq!(d.r(), &fx.r_lambda);
        assert!(close(d.s(), &fx.s_lambda_printed, 1e-3));
    }
}
