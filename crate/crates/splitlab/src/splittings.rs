//! Single splittings `A = U - V` and double splittings `A = P - R + S`,
//! validated on construction and eagerly classified against the taxonomy
//! used by the comparison theory: proper, weak of the first/second type,
//! double proper, double weak of type I/II.

use serde::Serialize;

use crate::dense::{
    approx_eq, entrywise_geq, pseudoinverse, rho, spectral_radius, Matrix, Tolerances,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct SplittingClass {
    pub proper: bool,
    pub weak1: bool,
    pub weak2: bool,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct DoubleClass {
    pub double_proper: bool,
    pub type1: bool,
    pub type2: bool,
}

/// A validated decomposition `A = U - V` with `U`'s pseudoinverse and the
/// classification flags cached at construction.
#[derive(Debug, Clone)]
pub struct SingleSplitting {
    a: Matrix,
    u: Matrix,
    v: Matrix,
    u_pinv: Matrix,
    a_pinv: Matrix,
    flags: SplittingClass,
}

impl SingleSplitting {
    pub fn new(a: Matrix, u: Matrix, v: Matrix, tol: &Tolerances) -> Result<Self> {
        if a.shape() != u.shape() || a.shape() != v.shape() {
            return Err(Error::Dimension(format!(
                "splitting parts must share A's shape {:?}",
                a.shape()
            )));
        }
        let diff = u.sub(&v)?;
        if !approx_eq(&a, &diff, tol) {
            return Err(Error::Consistency(format!(
                "A != U - V (max deviation {:.3e})",
                a.sub(&diff)?.max_abs()
            )));
        }
        let u_pinv = pseudoinverse(&u, tol)?;
        let a_pinv = pseudoinverse(&a, tol)?;
        let flags = classify_parts(&a, &u, &v, &u_pinv, &a_pinv, tol)?;
        Ok(Self {
            a,
            u,
            v,
            u_pinv,
            a_pinv,
            flags,
        })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn u(&self) -> &Matrix {
        &self.u
    }

    pub fn v(&self) -> &Matrix {
        &self.v
    }

    /// Cached `U^\dagger` (equals `U^{-1}` for nonsingular square `U`).
    pub fn u_pinv(&self) -> &Matrix {
        &self.u_pinv
    }

    pub fn a_pinv(&self) -> &Matrix {
        &self.a_pinv
    }

    pub fn flags(&self) -> SplittingClass {
        self.flags
    }

    /// Iteration matrix `H = U^\dagger V`.
    pub fn iteration_matrix(&self) -> Result<Matrix> {
        self.u_pinv.dot(&self.v)
    }
}

fn classify_parts(
    a: &Matrix,
    u: &Matrix,
    v: &Matrix,
    u_pinv: &Matrix,
    a_pinv: &Matrix,
    tol: &Tolerances,
) -> Result<SplittingClass> {
    let proper = projectors_match(a, u, a_pinv, u_pinv, tol)?;
    let zero_nn = Matrix::zeros(u.cols(), u.cols());
    let zero_mm = Matrix::zeros(u.rows(), u.rows());
    let weak1 = entrywise_geq(&u_pinv.dot(v)?, &zero_nn, tol)?;
    let weak2 = entrywise_geq(&v.dot(u_pinv)?, &zero_mm, tol)?;
    Ok(SplittingClass {
        proper,
        weak1,
        weak2,
    })
}

fn projectors_match(
    a: &Matrix,
    u: &Matrix,
    a_pinv: &Matrix,
    u_pinv: &Matrix,
    tol: &Tolerances,
) -> Result<bool> {
    let range_ok = approx_eq(&u.dot(u_pinv)?, &a.dot(a_pinv)?, tol);
    let null_ok = approx_eq(&u_pinv.dot(u)?, &a_pinv.dot(a)?, tol);
    Ok(range_ok && null_ok)
}

/// True iff `R(U) = R(A)` and `N(U) = N(A)`, tested through the projector
/// equalities `UU^\dagger = AA^\dagger` and `U^\dagger U = A^\dagger A`.
pub fn validate_proper(s: &SingleSplitting, tol: &Tolerances) -> Result<bool> {
    projectors_match(&s.a, &s.u, &s.a_pinv, &s.u_pinv, tol)
}

/// Re-derive the classification flags (construction already caches them).
/// A square `U` that is singular to tolerance is rejected, since the
/// nonsingular-form definitions read `U^{-1}` there.
pub fn classify_single(s: &SingleSplitting, tol: &Tolerances) -> Result<SplittingClass> {
    if s.u.is_square() {
        let f = crate::dense::svd_factors(&s.u, tol)?;
        if f.numerical_rank < s.u.rows() && !s.flags.proper {
            let sigma = f.singular_values.last().copied().unwrap_or(0.0);
            return Err(Error::Singular { sigma });
        }
    }
    classify_parts(&s.a, &s.u, &s.v, &s.u_pinv, &s.a_pinv, tol)
}

#[derive(Debug, Clone, Serialize)]
pub struct PerronLink {
    pub rho_iter: f64,
    pub rho_aux: f64,
    pub relation_residual: f64,
}

/// The Perron link `rho(U^\dagger V) = rho(A^\dagger V) / (1 + rho(A^\dagger V))`,
/// gated on the weak-splitting nonnegativity hypotheses.
pub fn perron_link(s: &SingleSplitting, tol: &Tolerances) -> Result<PerronLink> {
    if !s.flags.proper {
        return Err(Error::Hypothesis("splitting is not proper".into()));
    }
    let aux_first = s.a_pinv.dot(&s.v)?;
    let aux_second = s.v.dot(&s.a_pinv)?;
    let zero_n = Matrix::zeros(aux_first.rows(), aux_first.cols());
    let zero_m = Matrix::zeros(aux_second.rows(), aux_second.cols());
    let first_ok = s.flags.weak1 && entrywise_geq(&aux_first, &zero_n, tol)?;
    let second_ok = s.flags.weak2 && entrywise_geq(&aux_second, &zero_m, tol)?;
    if !first_ok && !second_ok {
        return Err(Error::Hypothesis(
            "need weak1 with A^+V >= 0 or weak2 with VA^+ >= 0".into(),
        ));
    }
    let aux = if first_ok { aux_first } else { aux_second };
    perron_link_raw_with_aux(s, &aux, tol)
}

/// Ungated Perron-link computation (the identity itself is pure algebra for
/// e.g. scaled proper splittings even when the sign hypotheses fail).
pub fn perron_link_raw(s: &SingleSplitting, tol: &Tolerances) -> Result<PerronLink> {
    let aux = s.a_pinv.dot(&s.v)?;
    perron_link_raw_with_aux(s, &aux, tol)
}

fn perron_link_raw_with_aux(
    s: &SingleSplitting,
    aux: &Matrix,
    tol: &Tolerances,
) -> Result<PerronLink> {
    let rho_iter = rho(&s.iteration_matrix()?, tol)?;
    let rho_aux = rho(aux, tol)?;
    let relation_residual = (rho_iter - rho_aux / (1.0 + rho_aux)).abs();
    Ok(PerronLink {
        rho_iter,
        rho_aux,
        relation_residual,
    })
}

/// The scaling splitting `U = alpha A`, `V = (alpha - 1) A`; always proper,
/// with `rho(U^\dagger V) = (alpha - 1)/alpha`.
pub fn generate_proper_splitting(
    a: &Matrix,
    alpha: f64,
    tol: &Tolerances,
) -> Result<SingleSplitting> {
    if !(alpha > 1.0) {
        return Err(Error::Parameter(format!("alpha must exceed 1, got {alpha}")));
    }
    SingleSplitting::new(a.clone(), a.scale(alpha), a.scale(alpha - 1.0), tol)
}

/// A validated decomposition `A = P - R + S` with `P`'s pseudoinverse and
/// the double-splitting classification cached.
#[derive(Debug, Clone)]
pub struct DoubleSplitting {
    a: Matrix,
    p: Matrix,
    r: Matrix,
    s: Matrix,
    p_pinv: Matrix,
    a_pinv: Matrix,
    flags: DoubleClass,
}

impl DoubleSplitting {
    pub fn new(a: Matrix, p: Matrix, r: Matrix, s: Matrix, tol: &Tolerances) -> Result<Self> {
        let recomposed = p.sub(&r)?.add(&s)?;
        if !approx_eq(&a, &recomposed, tol) {
            return Err(Error::Consistency(format!(
                "A != P - R + S (max deviation {:.3e})",
                a.sub(&recomposed)?.max_abs()
            )));
        }
        Self::new_unchecked(a, p, r, s, tol)
    }

    /// Builds without the `A = P - R + S` identity check. Classification and
    /// caching still run. Needed for literature instances whose printed
    /// parts do not recompose exactly.
    pub fn new_unchecked(
        a: Matrix,
        p: Matrix,
        r: Matrix,
        s: Matrix,
        tol: &Tolerances,
    ) -> Result<Self> {
        if a.shape() != p.shape() || a.shape() != r.shape() || a.shape() != s.shape() {
            return Err(Error::Dimension(format!(
                "double splitting parts must share A's shape {:?}",
                a.shape()
            )));
        }
        // the LU inverse is noticeably more accurate than the SVD route on
        // ill-conditioned nonsingular P, and P^+ = P^{-1} in that case
        let p_pinv = match crate::dense::inverse(&p, tol) {
            Ok(inv) => inv,
            Err(_) => pseudoinverse(&p, tol)?,
        };
        let a_pinv = pseudoinverse(&a, tol)?;
        let flags = classify_double_parts(&a, &p, &r, &s, &p_pinv, &a_pinv, tol)?;
        Ok(Self {
            a,
            p,
            r,
            s,
            p_pinv,
            a_pinv,
            flags,
        })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn p(&self) -> &Matrix {
        &self.p
    }

    pub fn r(&self) -> &Matrix {
        &self.r
    }

    pub fn s(&self) -> &Matrix {
        &self.s
    }

    pub fn p_pinv(&self) -> &Matrix {
        &self.p_pinv
    }

    pub fn a_pinv(&self) -> &Matrix {
        &self.a_pinv
    }

    pub fn flags(&self) -> DoubleClass {
        self.flags
    }

    /// True when `P` is square and numerically nonsingular.
    pub fn p_nonsingular(&self, tol: &Tolerances) -> Result<bool> {
        if !self.p.is_square() {
            return Ok(false);
        }
        Ok(crate::dense::numerical_rank(&self.p, tol)? == self.p.rows())
    }
}

fn classify_double_parts(
    a: &Matrix,
    p: &Matrix,
    r: &Matrix,
    s: &Matrix,
    p_pinv: &Matrix,
    a_pinv: &Matrix,
    tol: &Tolerances,
) -> Result<DoubleClass> {
    let double_proper = {
        let range_ok = approx_eq(&p.dot(p_pinv)?, &a.dot(a_pinv)?, tol);
        let null_ok = approx_eq(&p_pinv.dot(p)?, &a_pinv.dot(a)?, tol);
        range_ok && null_ok
    };
    // Type I in pseudoinverse form: P^+R >= 0 and P^+S <= 0.
    let zero = Matrix::zeros(p.cols(), p.cols());
    let pr = p_pinv.dot(r)?;
    let ps = p_pinv.dot(s)?;
    let type1 =
        entrywise_geq(&pr, &zero, tol)? && entrywise_geq(&zero, &ps, tol)?;
    // Type II is only admitted for square symmetric nonsingular A with
    // nonsingular P; RP^{-1} >= 0 and -SP^{-1} >= 0.
    let type2 = if a.is_square()
        && a.is_symmetric(tol.equality_slack(a.max_abs()))
        && crate::dense::numerical_rank(a, tol)? == a.rows()
        && p.is_square()
        && crate::dense::numerical_rank(p, tol)? == p.rows()
    {
        let zero_m = Matrix::zeros(p.rows(), p.rows());
        let rp = r.dot(p_pinv)?;
        let sp = s.dot(p_pinv)?;
        entrywise_geq(&rp, &zero_m, tol)? && entrywise_geq(&zero_m, &sp, tol)?
    } else {
        false
    };
    Ok(DoubleClass {
        double_proper,
        type1,
        type2,
    })
}

/// Re-derive the double classification flags.
pub fn classify_double(d: &DoubleSplitting, tol: &Tolerances) -> Result<DoubleClass> {
    classify_double_parts(&d.a, &d.p, &d.r, &d.s, &d.p_pinv, &d.a_pinv, tol)
}

/// Lift a single splitting to a double one: `P = U`, `R = V + C`, `S = C`.
/// The identity `A = P - R + S` then holds exactly.
pub fn generate_double_from_single(
    s: &SingleSplitting,
    c: &Matrix,
    tol: &Tolerances,
) -> Result<DoubleSplitting> {
    if c.shape() != s.a().shape() {
        return Err(Error::Dimension(format!(
            "C must share A's shape {:?}, got {:?}",
            s.a().shape(),
            c.shape()
        )));
    }
    DoubleSplitting::new(
        s.a().clone(),
        s.u().clone(),
        s.v().add(c)?,
        c.clone(),
        tol,
    )
}

/// Splitting bundle file: matrices in the shared text format, concatenated
/// with `---` separator lines. Order A,U,V for singles and A,P,R,S for
/// doubles.
pub fn parse_bundle(text: &str) -> Result<Vec<Matrix>> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut base_line = 0usize;
    let mut lineno = 0usize;
    for line in text.lines() {
        lineno += 1;
        if line.trim() == "---" {
            if !current.trim().is_empty() {
                out.push(parse_section(&current, base_line)?);
            }
            current.clear();
            base_line = lineno;
        } else {
            current.push_str(line);
            current.push('\n');
        }
    }
    if !current.trim().is_empty() {
        out.push(parse_section(&current, base_line)?);
    }
    if out.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "bundle contains no matrices".into(),
        });
    }
    Ok(out)
}

fn parse_section(section: &str, base_line: usize) -> Result<Matrix> {
    Matrix::parse_text(section).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line: base_line + line,
            message,
        },
        other => other,
    })
}

pub fn write_bundle(parts: &[&Matrix]) -> String {
    parts
        .iter()
        .map(|m| m.to_text())
        .collect::<Vec<_>>()
        .join("---\n")
}

/// `rho(U^\dagger V)` of a single splitting, as a spectral report.
pub fn iteration_spectral_report(
    s: &SingleSplitting,
    tol: &Tolerances,
) -> Result<crate::dense::SpectralReport> {
    spectral_radius(&s.iteration_matrix()?, tol)
}
