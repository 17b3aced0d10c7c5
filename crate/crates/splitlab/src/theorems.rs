//! Machine-checks of the convergence and comparison theorems on concrete
//! instances: each checker evaluates the stated hypotheses entrywise or
//! spectrally, computes both sides' spectral radii, and reports a verdict.
//! Mathematical failures are recorded in the verdict; only structural
//! misuse (wrong splitting type, shape mismatch) raises an error.

use serde::Serialize;

use crate::dense::{
    approx_eq, entrywise_geq, entrywise_gt, geq_violation, inverse, numerical_rank, rho, Matrix,
    Tolerances,
};
use crate::error::{Error, Result};
use crate::regularization::{DoubleFamily, SingleFamily};
use crate::solvers::{assemble_block_unchecked, BlockVariant};
use crate::splittings::{DoubleSplitting, SingleSplitting};

/// Slack on non-strict radius comparisons; also the margin on strict ones.
pub const CONCLUSION_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TheoremId {
    #[serde(rename = "SINGLE_CONV")]
    SingleConv,
    #[serde(rename = "CMP_FIRST")]
    CmpFirst,
    #[serde(rename = "CMP_SECOND")]
    CmpSecond,
    #[serde(rename = "CMP_MIX_A")]
    CmpMixA,
    #[serde(rename = "CMP_MIX_B")]
    CmpMixB,
    #[serde(rename = "CMP_SAME_I")]
    CmpSameI,
    #[serde(rename = "CMP_SAME_I_ALT")]
    CmpSameIAlt,
    #[serde(rename = "CMP_I_TO_II")]
    CmpIToII,
    #[serde(rename = "POWER_DOM")]
    PowerDom,
    #[serde(rename = "EQUIV_I")]
    EquivI,
    #[serde(rename = "EQUIV_II")]
    EquivII,
    #[serde(rename = "DW2_MONO")]
    Dw2Mono,
    #[serde(rename = "DW2_SCALED")]
    Dw2Scaled,
    #[serde(rename = "DW2_RATE")]
    Dw2Rate,
    #[serde(rename = "DW2_PSD")]
    Dw2Psd,
    #[serde(rename = "DW2_TWOMAT")]
    Dw2Twomat,
    #[serde(rename = "DW_II_VS_I")]
    DwIIVsI,
    #[serde(rename = "DW_I_VS_II")]
    DwIVsII,
    #[serde(rename = "RD_CONV")]
    RdConv,
    #[serde(rename = "RD_CMP_I")]
    RdCmpI,
    #[serde(rename = "RD_CMP_II")]
    RdCmpII,
}

#[derive(Debug, Clone, Serialize)]
pub struct Hypothesis {
    pub name: String,
    pub holds: bool,
    /// Offending entry or value when the hypothesis fails.
    pub witness: Option<String>,
}

impl Hypothesis {
    fn new(name: &str, holds: bool, witness: Option<String>) -> Self {
        Self {
            name: name.to_string(),
            holds,
            witness,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremVerdict {
    pub theorem_id: TheoremId,
    pub hypotheses: Vec<Hypothesis>,
    pub rho_left: f64,
    pub rho_right: f64,
    pub conclusion_holds: bool,
    pub lambda_used: Option<f64>,
}

impl TheoremVerdict {
    pub fn all_hypotheses_hold(&self) -> bool {
        self.hypotheses.iter().all(|h| h.holds)
    }
}

/// `rho_left <= rho_right < 1` with slack on both comparisons.
fn radii_conclusion(rho_left: f64, rho_right: f64) -> bool {
    rho_left <= rho_right + CONCLUSION_SLACK && rho_right < 1.0 - CONCLUSION_SLACK
}

fn hyp_geq(name: &str, x: &Matrix, y: &Matrix, tol: &Tolerances) -> Result<Hypothesis> {
    let violation = geq_violation(x, y, tol)?;
    Ok(Hypothesis::new(
        name,
        violation.is_none(),
        violation.map(|(i, j, v)| format!("entry ({i},{j}) of the difference is {v:.4e}")),
    ))
}

fn hyp_nonneg(name: &str, x: &Matrix, tol: &Tolerances) -> Result<Hypothesis> {
    hyp_geq(name, x, &Matrix::zeros(x.rows(), x.cols()), tol)
}

fn hyp_positive(name: &str, x: &Matrix, tol: &Tolerances) -> Result<Hypothesis> {
    let zero = Matrix::zeros(x.rows(), x.cols());
    let holds = entrywise_gt(x, &zero, tol)?;
    Ok(Hypothesis::new(
        name,
        holds,
        (!holds).then(|| "some entry is not strictly positive".to_string()),
    ))
}

/// Evaluate a lambda-limit hypothesis by sweep stability: verdict at the
/// smallest lambda, required to agree across the last three points.
fn stable_hyp(
    name: &str,
    schedule: &[f64],
    mut eval: impl FnMut(f64) -> Result<(bool, Option<String>)>,
) -> Result<Hypothesis> {
    if schedule.is_empty() {
        return Err(Error::Parameter("empty lambda schedule".into()));
    }
    let tail = &schedule[schedule.len().saturating_sub(3)..];
    let mut last = (false, None);
    let mut stable = true;
    let mut prev: Option<bool> = None;
    for &lambda in tail {
        last = eval(lambda)?;
        if let Some(p) = prev {
            if p != last.0 {
                stable = false;
            }
        }
        prev = Some(last.0);
    }
    let holds = last.0 && stable;
    let witness = if !stable {
        Some("verdict not stable across the last three lambda points".into())
    } else {
        last.1
    };
    Ok(Hypothesis::new(name, holds, witness))
}

fn smallest(schedule: &[f64]) -> Result<f64> {
    schedule
        .last()
        .copied()
        .ok_or_else(|| Error::Parameter("empty lambda schedule".into()))
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Hypothesis(msg.to_string()))
    }
}

fn geq_witness(x: &Matrix, y: &Matrix, tol: &Tolerances) -> Result<(bool, Option<String>)> {
    let violation = geq_violation(x, y, tol)?;
    Ok((
        violation.is_none(),
        violation.map(|(i, j, v)| format!("entry ({i},{j}) of the difference is {v:.4e}")),
    ))
}

/// Convergence of the regularized single scheme: a weak splitting of
/// `B_lambda` of either type with nonnegative limit matrix converges, i.e.
/// `rho(M_lambda^{-1} N_lambda) < 1` at the smallest lambda.
pub fn check_single_convergence(
    fam: &SingleFamily,
    schedule: &[f64],
    tol: &Tolerances,
) -> Result<TheoremVerdict> {
    let lambda_min = smallest(schedule)?;
    let first_route = stable_hyp(
        "first type: M_lambda^{-1}N_lambda >= 0 and lim B_lambda^{-1}N_lambda >= 0",
        schedule,
        |lambda| {
            let s = fam.at(lambda, tol)?;
            if !s.flags().weak1 {
                return Ok((false, Some("not a weak splitting of the first type".into())));
            }
            let b_inv_n = crate::dense::solve_dense(s.a(), s.v(), tol)?;
            geq_witness(&b_inv_n, &Matrix::zeros(b_inv_n.rows(), b_inv_n.cols()), tol)
        },
    )?;
    let second_route = stable_hyp(
        "second type: N_lambda M_lambda^{-1} >= 0 and lim N_lambda B_lambda^{-1} >= 0",
        schedule,
        |lambda| {
            let s = fam.at(lambda, tol)?;
            if !s.flags().weak2 {
                return Ok((false, Some("not a weak splitting of the second type".into())));
            }
            let n_b_inv = crate::dense::solve_dense(
                &s.a().transpose(),
                &s.v().transpose(),
                tol,
            )?
            .transpose();
            geq_witness(&n_b_inv, &Matrix::zeros(n_b_inv.rows(), n_b_inv.cols()), tol)
        },
    )?;
    let either = Hypothesis::new(
        "weak splitting of the first or second type with nonnegative limit",
        first_route.holds || second_route.holds,
        if first_route.holds || second_route.holds {
            None
        } else {
            first_route.witness.clone().or(second_route.witness.clone())
        },
    );
    let s_min = fam.at(lambda_min, tol)?;
    let rho_left = rho(&s_min.iteration_matrix()?, tol)?;
    Ok(TheoremVerdict {
        theorem_id: TheoremId::SingleConv,
        hypotheses: vec![either],
        rho_left,
        rho_right: 1.0,
        conclusion_holds: rho_left < 1.0 - CONCLUSION_SLACK,
        lambda_used: Some(lambda_min),
    })
}

/// Comparison theorems between a splitting `A = M - N` and a lambda-family
/// of splittings `B_lambda = M_lambda - N_lambda`. The required splitting
/// types on each side are structural preconditions; the order conditions
/// are recorded hypotheses.
pub fn check_comparison_single(
    theorem_id: TheoremId,
    s: &SingleSplitting,
    fam: &SingleFamily,
    schedule: &[f64],
    tol: &Tolerances,
) -> Result<TheoremVerdict> {
    let lambda_min = smallest(schedule)?;
    let s_min = fam.at(lambda_min, tol)?;
    let (needs_weak1_a, needs_weak1_b) = match theorem_id {
        TheoremId::CmpFirst => (true, true),
        TheoremId::CmpSecond => (false, false),
        TheoremId::CmpMixA | TheoremId::CmpMixB => (false, true),
        TheoremId::CmpSameI | TheoremId::CmpSameIAlt => (true, true),
        TheoremId::CmpIToII => (true, false),
        other => {
            return Err(Error::Parameter(format!(
                "{other:?} is not a single-splitting comparison theorem"
            )))
        }
    };
    if needs_weak1_a {
        require(
            s.flags().weak1,
            "A = M - N must be a weak proper splitting of the first type",
        )?;
    } else {
        require(
            s.flags().weak2,
            "A = M - N must be a weak proper splitting of the second type",
        )?;
    }
    if needs_weak1_b {
        require(
            s_min.flags().weak1,
            "B_lambda = M_lambda - N_lambda must be a weak splitting of the first type",
        )?;
    } else {
        require(
            s_min.flags().weak2,
            "B_lambda = M_lambda - N_lambda must be a weak splitting of the second type",
        )?;
    }

    let a_pinv = s.a_pinv();
    let m_pinv = s.u_pinv();
    let n = s.v();
    let mut hypotheses: Vec<Hypothesis> = Vec::new();
    let proper = s.flags().proper;
    hypotheses.push(Hypothesis::new(
        "A = M - N is a proper splitting",
        proper,
        (!proper).then(|| "R(M) != R(A) or N(M) != N(A)".to_string()),
    ));
    let b_inv_n_at = |lambda: f64| -> Result<Matrix> {
        let sl = fam.at(lambda, tol)?;
        crate::dense::solve_dense(sl.a(), sl.v(), tol)
    };
    match theorem_id {
        TheoremId::CmpFirst => {
            let an = a_pinv.dot(n)?;
            hypotheses.push(stable_hyp(
                "A^+N >= lim B_lambda^{-1}N_lambda",
                schedule,
                |lambda| geq_witness(&an, &b_inv_n_at(lambda)?, tol),
            )?);
            hypotheses.push(stable_hyp(
                "lim B_lambda^{-1}N_lambda >= 0",
                schedule,
                |lambda| {
                    let x = b_inv_n_at(lambda)?;
                    geq_witness(&x, &Matrix::zeros(x.rows(), x.cols()), tol)
                },
            )?);
        }
        TheoremId::CmpSecond => {
            let na = n.dot(a_pinv)?;
            let n_b_inv_at = |lambda: f64| -> Result<Matrix> {
                let sl = fam.at(lambda, tol)?;
                Ok(crate::dense::solve_dense(&sl.a().transpose(), &sl.v().transpose(), tol)?
                    .transpose())
            };
            hypotheses.push(hyp_bool_square_singular(s.a(), tol)?);
            hypotheses.push(stable_hyp(
                "NA^+ >= lim N_lambda B_lambda^{-1}",
                schedule,
                |lambda| geq_witness(&na, &n_b_inv_at(lambda)?, tol),
            )?);
            hypotheses.push(stable_hyp(
                "lim N_lambda B_lambda^{-1} >= 0",
                schedule,
                |lambda| {
                    let x = n_b_inv_at(lambda)?;
                    geq_witness(&x, &Matrix::zeros(x.rows(), x.cols()), tol)
                },
            )?);
        }
        TheoremId::CmpMixA => {
            hypotheses.push(hyp_bool_square_singular(s.a(), tol)?);
            hypotheses.push(hyp_nonneg("A^+ >= 0 (semi-monotone)", a_pinv, tol)?);
            hypotheses.push(hyp_nonneg("NA^+ >= 0", &n.dot(a_pinv)?, tol)?);
            hypotheses.push(stable_hyp(
                "lim B_lambda^{-1}N_lambda >= 0",
                schedule,
                |lambda| {
                    let x = b_inv_n_at(lambda)?;
                    geq_witness(&x, &Matrix::zeros(x.rows(), x.cols()), tol)
                },
            )?);
            hypotheses.push(stable_hyp(
                "lim M_lambda^{-1}A^T >= M^+",
                schedule,
                |lambda| {
                    let sl = fam.at(lambda, tol)?;
                    let m_inv_at = crate::dense::solve_dense(sl.u(), &fam.a.transpose(), tol)?;
                    geq_witness(&m_inv_at, m_pinv, tol)
                },
            )?);
        }
        TheoremId::CmpMixB | TheoremId::CmpSameI | TheoremId::CmpSameIAlt => {
            if theorem_id == TheoremId::CmpMixB {
                hypotheses.push(hyp_nonneg("NA^+ >= 0", &n.dot(a_pinv)?, tol)?);
            } else {
                hypotheses.push(hyp_bool_square_singular(s.a(), tol)?);
                hypotheses.push(hyp_nonneg("A^+N >= 0", &a_pinv.dot(n)?, tol)?);
            }
            hypotheses.push(stable_hyp(
                "lim B_lambda^{-1}N_lambda >= 0",
                schedule,
                |lambda| {
                    let x = b_inv_n_at(lambda)?;
                    geq_witness(&x, &Matrix::zeros(x.rows(), x.cols()), tol)
                },
            )?);
            let bound = match theorem_id {
                TheoremId::CmpMixB => a_pinv.dot(n)?.dot(m_pinv)?,
                TheoremId::CmpSameI => a_pinv.dot(m_pinv)?.dot(n)?,
                _ => a_pinv.dot(n)?.dot(m_pinv)?,
            };
            let bound_name = match theorem_id {
                TheoremId::CmpMixB => "lim M_lambda^{-1}N_lambda A^+ <= A^+NM^+",
                TheoremId::CmpSameI => "lim M_lambda^{-1}N_lambda A^+ <= A^+M^+N",
                _ => "lim M_lambda^{-1}N_lambda A^+ <= A^+NM^+ (swapped order)",
            };
            hypotheses.push(stable_hyp(bound_name, schedule, |lambda| {
                let sl = fam.at(lambda, tol)?;
                let h = sl.iteration_matrix()?;
                geq_witness(&bound, &h.dot(a_pinv)?, tol)
            })?);
        }
        TheoremId::CmpIToII => {
            hypotheses.push(hyp_nonneg("A^+N >= 0", &a_pinv.dot(n)?, tol)?);
            let n_m_inv_at = |lambda: f64| -> Result<Matrix> {
                let sl = fam.at(lambda, tol)?;
                Ok(crate::dense::solve_dense(&sl.u().transpose(), &sl.v().transpose(), tol)?
                    .transpose())
            };
            hypotheses.push(stable_hyp(
                "lim N_lambda B_lambda^{-1} >= 0",
                schedule,
                |lambda| {
                    let sl = fam.at(lambda, tol)?;
                    let x = crate::dense::solve_dense(
                        &sl.a().transpose(),
                        &sl.v().transpose(),
                        tol,
                    )?
                    .transpose();
                    geq_witness(&x, &Matrix::zeros(x.rows(), x.cols()), tol)
                },
            )?);
            let mn = m_pinv.dot(n)?;
            hypotheses.push(stable_hyp(
                "lim N_lambda M_lambda^{-1} <= M^+N",
                schedule,
                |lambda| geq_witness(&mn, &n_m_inv_at(lambda)?, tol),
            )?);
        }
        _ => unreachable!(),
    }

    let rho_left = rho(&s_min.iteration_matrix()?, tol)?;
    let rho_right = rho(&s.iteration_matrix()?, tol)?;
    Ok(TheoremVerdict {
        theorem_id,
        hypotheses,
        rho_left,
        rho_right,
        conclusion_holds: radii_conclusion(rho_left, rho_right),
        lambda_used: Some(lambda_min),
    })
}

fn hyp_bool_square_singular(a: &Matrix, tol: &Tolerances) -> Result<Hypothesis> {
    let holds = a.is_square() && numerical_rank(a, tol)? < a.rows();
    Ok(Hypothesis::new(
        "A is square and singular",
        holds,
        (!holds).then(|| "A is rectangular or has full rank".to_string()),
    ))
}

/// Power-dominance comparison for two weak splittings of the second type of
/// a nonsingular `A` (`N_i = M_i - A`): if `(M_1 A^{-1})^j <= alpha (M_2
/// A^{-1})^j` then `rho(N_1 M_1^{-1}) < rho(N_2 M_2^{-1})` (non-strict when
/// `alpha = 1`).
pub fn check_power_dominance(
    m1: &Matrix,
    m2: &Matrix,
    a: &Matrix,
    j: usize,
    alpha: f64,
    tol: &Tolerances,
) -> Result<TheoremVerdict> {
    if j == 0 || !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Parameter(format!(
            "need j >= 1 and alpha in (0, 1], got j = {j}, alpha = {alpha}"
        )));
    }
    let a_inv = inverse(a, tol)?;
    let m1_inv = inverse(m1, tol)?;
    let m2_inv = inverse(m2, tol)?;
    let n1 = m1.sub(a)?;
    let n2 = m2.sub(a)?;

    let mut hypotheses = vec![
        hyp_nonneg("N_1M_1^{-1} >= 0 (weak type II)", &n1.dot(&m1_inv)?, tol)?,
        hyp_nonneg("N_2M_2^{-1} >= 0 (weak type II)", &n2.dot(&m2_inv)?, tol)?,
        hyp_nonneg("M_1A^{-1} >= 0", &m1.dot(&a_inv)?, tol)?,
        hyp_nonneg("M_2A^{-1} >= 0", &m2.dot(&a_inv)?, tol)?,
    ];
    let mut p1 = Matrix::identity(a.rows());
    let mut p2 = Matrix::identity(a.rows());
    let g1 = m1.dot(&a_inv)?;
    let g2 = m2.dot(&a_inv)?;
    for _ in 0..j {
        p1 = p1.dot(&g1)?;
        p2 = p2.dot(&g2)?;
    }
    hypotheses.push(hyp_geq(
        &format!("(M_1A^{{-1}})^{j} <= {alpha} (M_2A^{{-1}})^{j}"),
        &p2.scale(alpha),
        &p1,
        tol,
    )?);

    let rho_left = rho(&n1.dot(&m1_inv)?, tol)?;
    let rho_right = rho(&n2.dot(&m2_inv)?, tol)?;
    let conclusion_holds = if alpha < 1.0 {
        rho_left < rho_right - CONCLUSION_SLACK
    } else {
        rho_left <= rho_right + CONCLUSION_SLACK
    };
    Ok(TheoremVerdict {
        theorem_id: TheoremId::PowerDom,
        hypotheses,
        rho_left,
        rho_right,
        conclusion_holds,
        lambda_used: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquivalenceForm {
    TypeI,
    TypeII,
}

/// Equivalence chains: every listed condition is evaluated as a boolean and
/// the conclusion holds when all of them agree (all true or all false).
pub fn check_double_equivalences(
    d: &DoubleSplitting,
    form: EquivalenceForm,
    tol: &Tolerances,
) -> Result<TheoremVerdict> {
    let a = d.a();
    require(a.is_square(), "A must be square")?;
    require(
        numerical_rank(a, tol)? == a.rows(),
        "A must be nonsingular",
    )?;
    let a_inv = inverse(a, tol)?;
    let p_inv = d.p_pinv();
    let rms = d.r().sub(d.s())?;
    let i_n = Matrix::identity(a.rows());
    let zero = Matrix::zeros(a.rows(), a.cols());

    let (theorem_id, conditions, rho_left, rho_right) = match form {
        EquivalenceForm::TypeI => {
            require(
                d.flags().type1,
                "splitting must be a double weak splitting of type I",
            )?;
            require(d.p_nonsingular(tol)?, "P must be nonsingular")?;
            let w = assemble_block_unchecked(d, BlockVariant::HatW)?;
            let rho_w = rho(&w, tol)?;
            let rho_h = rho(&p_inv.dot(&rms)?, tol)?;
            let a_inv_p = a_inv.dot(d.p())?;
            let conds = vec![
                ("rho(hat-W) < 1", rho_w < 1.0),
                ("rho(P^{-1}(R-S)) < 1", rho_h < 1.0),
                ("A^{-1}P >= 0", entrywise_geq(&a_inv_p, &zero, tol)?),
                ("A^{-1}P >= I", entrywise_geq(&a_inv_p, &i_n, tol)?),
            ];
            (TheoremId::EquivI, conds, rho_w, rho_h)
        }
        EquivalenceForm::TypeII => {
            require(
                d.flags().type2,
                "splitting must be a double weak splitting of type II",
            )?;
            let w = assemble_block_unchecked(d, BlockVariant::TildeW)?;
            let rho_w = rho(&w, tol)?;
            let pa = d.p().dot(&a_inv)?;
            let rsa = rms.dot(&a_inv)?;
            let core = i_n.sub(&rms.transpose().dot(&p_inv.transpose())?)?;
            let core_inv = inverse(&core, tol)?;
            let rho_h = rho(&rms.dot(p_inv)?, tol)?;
            let conds = vec![
                ("rho(tilde-W) < 1", rho_w < 1.0),
                ("PA^{-1} >= 0", entrywise_geq(&pa, &zero, tol)?),
                ("PA^{-1} >= I", entrywise_geq(&pa, &i_n, tol)?),
                ("(R-S)A^{-1} >= 0", entrywise_geq(&rsa, &zero, tol)?),
                (
                    "(R-S)A^{-1} >= -I",
                    entrywise_geq(&rsa, &i_n.scale(-1.0), tol)?,
                ),
                (
                    "(I-(R-S)^T(P^{-1})^T)^{-1} >= 0",
                    entrywise_geq(&core_inv, &zero, tol)?,
                ),
                (
                    "(I-(R-S)^T(P^{-1})^T)^{-1} >= I",
                    entrywise_geq(&core_inv, &i_n, tol)?,
                ),
            ];
            (TheoremId::EquivII, conds, rho_w, rho_h)
        }
    };
    let hypotheses: Vec<Hypothesis> = conditions
        .iter()
        .map(|(name, holds)| Hypothesis::new(name, *holds, None))
        .collect();
    let all_equal = conditions.iter().all(|(_, h)| *h == conditions[0].1);
    Ok(TheoremVerdict {
        theorem_id,
        hypotheses,
        rho_left,
        rho_right,
        conclusion_holds: all_equal,
        lambda_used: None,
    })
}

fn block_radius(d: &DoubleSplitting, variant: BlockVariant, tol: &Tolerances) -> Result<f64> {
    rho(&assemble_block_unchecked(d, variant)?, tol)
}

fn hyp_convergent(
    name: &str,
    d: &DoubleSplitting,
    variant: BlockVariant,
    tol: &Tolerances,
) -> Result<(Hypothesis, f64)> {
    let r = block_radius(d, variant, tol)?;
    Ok((
        Hypothesis::new(
            name,
            r < 1.0 - CONCLUSION_SLACK,
            (r >= 1.0 - CONCLUSION_SLACK).then(|| format!("spectral radius {r:.6}")),
        ),
        r,
    ))
}

/// Comparison theorems for pairs of double splittings. Splitting-type
/// admission is a structural precondition; the displayed order conditions
/// and convergence requirements are recorded hypotheses.
pub fn check_double_comparison(
    theorem_id: TheoremId,
    d1: &DoubleSplitting,
    d2: &DoubleSplitting,
    tol: &Tolerances,
) -> Result<TheoremVerdict> {
    let shared_a = matches!(
        theorem_id,
        TheoremId::Dw2Mono | TheoremId::Dw2Scaled | TheoremId::Dw2Rate | TheoremId::Dw2Psd
    );
    if shared_a {
        require(
            approx_eq(d1.a(), d2.a(), tol),
            "both splittings must decompose the same matrix",
        )?;
    }
    let (v1, v2) = match theorem_id {
        TheoremId::DwIIVsI => (BlockVariant::TildeW, BlockVariant::HatW),
        TheoremId::DwIVsII => (BlockVariant::HatW, BlockVariant::TildeW),
        _ => (BlockVariant::TildeW, BlockVariant::TildeW),
    };
    for (d, v, which) in [(d1, v1, "first"), (d2, v2, "second")] {
        match v {
            BlockVariant::TildeW => require(
                d.flags().type2,
                &format!("{which} splitting must be a double weak splitting of type II"),
            )?,
            _ => {
                require(
                    d.flags().type1,
                    &format!("{which} splitting must be a double weak splitting of type I"),
                )?;
                require(
                    d.p_nonsingular(tol)?,
                    &format!("{which} splitting needs a nonsingular P"),
                )?;
            }
        }
    }

    let p1_inv = d1.p_pinv();
    let p2_inv = d2.p_pinv();
    let mut hypotheses: Vec<Hypothesis> = Vec::new();
    let (c1, rho_left) = hyp_convergent("first splitting convergent", d1, v1, tol)?;
    let (c2, rho_right) = hyp_convergent("second splitting convergent", d2, v2, tol)?;
    match theorem_id {
        TheoremId::Dw2Mono => {
            let a_inv = inverse(d1.a(), tol)?;
            hypotheses.push(hyp_nonneg("A^{-1} >= 0 (monotone)", &a_inv, tol)?);
            hypotheses.push(c1);
            hypotheses.push(c2);
            hypotheses.push(hyp_geq("P_1 <= P_2", d2.p(), d1.p(), tol)?);
            hypotheses.push(hyp_geq("S_2 <= S_1", d1.s(), d2.s(), tol)?);
        }
        TheoremId::Dw2Scaled => {
            let a_inv = inverse(d1.a(), tol)?;
            let p1a = d1.p().dot(&a_inv)?;
            let p2a = d2.p().dot(&a_inv)?;
            let s1a = d1.s().dot(&a_inv)?;
            let s2a = d2.s().dot(&a_inv)?;
            let zero = Matrix::zeros(p1a.rows(), p1a.cols());
            hypotheses.push(hyp_geq("P_2A^{-1} >= P_1A^{-1}", &p2a, &p1a, tol)?);
            hypotheses.push(hyp_geq("P_1A^{-1} >= 0", &p1a, &zero, tol)?);
            hypotheses.push(hyp_geq("S_2A^{-1} <= S_1A^{-1}", &s1a, &s2a, tol)?);
            hypotheses.push(hyp_geq("S_1A^{-1} <= 0", &zero, &s1a, tol)?);
        }
        TheoremId::Dw2Rate | TheoremId::Dw2Twomat => {
            hypotheses.push(c1);
            hypotheses.push(c2);
            hypotheses.push(hyp_geq(
                "R_1P_1^{-1} >= R_2P_2^{-1}",
                &d1.r().dot(p1_inv)?,
                &d2.r().dot(p2_inv)?,
                tol,
            )?);
            let name = if theorem_id == TheoremId::Dw2Rate {
                "AP_1^{-1} >= AP_2^{-1}"
            } else {
                "A_1P_1^{-1} >= A_2P_2^{-1}"
            };
            hypotheses.push(hyp_geq(
                name,
                &d1.a().dot(p1_inv)?,
                &d2.a().dot(p2_inv)?,
                tol,
            )?);
        }
        TheoremId::Dw2Psd => {
            hypotheses.push(c1);
            hypotheses.push(c2);
            let i_n = Matrix::identity(d1.a().rows());
            let cond_i = entrywise_geq(&d2.p().dot(p1_inv)?, &i_n, tol)?
                && entrywise_geq(&d1.s().dot(p1_inv)?, &d2.s().dot(p1_inv)?, tol)?;
            let cond_ii = entrywise_geq(&i_n, &d1.p().dot(p2_inv)?, tol)?
                && entrywise_geq(&d1.s().dot(p2_inv)?, &d2.s().dot(p2_inv)?, tol)?;
            hypotheses.push(Hypothesis::new(
                "(i) P_2P_1^{-1} >= I and S_1P_1^{-1} >= S_2P_1^{-1}, or (ii) P_1P_2^{-1} <= I and S_1P_2^{-1} >= S_2P_2^{-1}",
                cond_i || cond_ii,
                (!(cond_i || cond_ii)).then(|| "neither condition holds".to_string()),
            ));
        }
        TheoremId::DwIIVsI => {
            hypotheses.push(c1);
            hypotheses.push(c2);
            hypotheses.push(hyp_geq(
                "P_2^{-1}R_2 <= (R_1P_1^{-1})^T",
                &d1.r().dot(p1_inv)?.transpose(),
                &p2_inv.dot(d2.r())?,
                tol,
            )?);
            hypotheses.push(hyp_geq(
                "P_2^{-1}A_2 <= (P_1^{-1})^T A_1",
                &p1_inv.transpose().dot(d1.a())?,
                &p2_inv.dot(d2.a())?,
                tol,
            )?);
        }
        TheoremId::DwIVsII => {
            hypotheses.push(c1);
            hypotheses.push(c2);
            hypotheses.push(hyp_geq(
                "(R_2P_2^{-1})^T <= P_1^{-1}R_1",
                &p1_inv.dot(d1.r())?,
                &d2.r().dot(p2_inv)?.transpose(),
                tol,
            )?);
            hypotheses.push(hyp_geq(
                "(P_2^{-1})^T A_2 <= P_1^{-1}A_1",
                &p1_inv.dot(d1.a())?,
                &p2_inv.transpose().dot(d2.a())?,
                tol,
            )?);
        }
        other => {
            return Err(Error::Parameter(format!(
                "{other:?} is not a double-splitting comparison theorem"
            )))
        }
    }

    Ok(TheoremVerdict {
        theorem_id,
        hypotheses,
        rho_left,
        rho_right,
        conclusion_holds: radii_conclusion(rho_left, rho_right),
        lambda_used: None,
    })
}

/// Regularized double-splitting theorems: a double splitting of `A` is
/// compared against a lambda-family of double splittings of `B_lambda`.
pub fn check_regularized_double(
    theorem_id: TheoremId,
    d: &DoubleSplitting,
    fam: &DoubleFamily,
    schedule: &[f64],
    tol: &Tolerances,
) -> Result<TheoremVerdict> {
    let lambda_min = smallest(schedule)?;
    let d_min = fam.at(lambda_min, tol)?;
    match theorem_id {
        TheoremId::RdConv => {
            let first = stable_hyp(
                "type I with lim B_lambda^{-1}P_lambda >= 0",
                schedule,
                |lambda| {
                    let dl = fam.at(lambda, tol)?;
                    if !dl.flags().type1 {
                        return Ok((false, Some("not a double weak splitting of type I".into())));
                    }
                    let x = crate::dense::solve_dense(dl.a(), dl.p(), tol)?;
                    geq_witness(&x, &Matrix::zeros(x.rows(), x.cols()), tol)
                },
            )?;
            let second = stable_hyp(
                "type II with lim P_lambda B_lambda^{-1} >= 0",
                schedule,
                |lambda| {
                    let dl = fam.at(lambda, tol)?;
                    if !dl.flags().type2 {
                        return Ok((false, Some("not a double weak splitting of type II".into())));
                    }
                    let x = crate::dense::solve_dense(
                        &dl.a().transpose(),
                        &dl.p().transpose(),
                        tol,
                    )?
                    .transpose();
                    geq_witness(&x, &Matrix::zeros(x.rows(), x.cols()), tol)
                },
            )?;
            let variant = if d_min.flags().type1 {
                BlockVariant::LambdaW
            } else {
                BlockVariant::TildeW
            };
            let rho_left = block_radius(&d_min, variant, tol)?;
            let either = Hypothesis::new(
                "double weak splitting of type I or II with nonnegative limit",
                first.holds || second.holds,
                if first.holds || second.holds {
                    None
                } else {
                    first.witness.clone().or(second.witness.clone())
                },
            );
            Ok(TheoremVerdict {
                theorem_id,
                hypotheses: vec![either],
                rho_left,
                rho_right: 1.0,
                conclusion_holds: rho_left < 1.0 - CONCLUSION_SLACK,
                lambda_used: Some(lambda_min),
            })
        }
        TheoremId::RdCmpI => {
            require(
                d.flags().type1,
                "A = P - R + S must satisfy P^+R >= 0 and P^+S <= 0",
            )?;
            require(
                d_min.flags().type1,
                "B_lambda splitting must be a double weak splitting of type I",
            )?;
            require(
                d_min.p_nonsingular(tol)?,
                "B_lambda splitting needs a nonsingular P_lambda",
            )?;
            let p_pinv = d.p_pinv();
            let pr = p_pinv.dot(d.r())?;
            let ps = p_pinv.dot(d.s())?;
            let mut hypotheses = vec![
                hyp_double_proper(d, tol)?,
                hyp_nonneg("A^+P >= 0", &d.a_pinv().dot(d.p())?, tol)?,
                stable_hyp("B_lambda^{-1}P_lambda >= 0", schedule, |lambda| {
                    let dl = fam.at(lambda, tol)?;
                    let x = crate::dense::solve_dense(dl.a(), dl.p(), tol)?;
                    geq_witness(&x, &Matrix::zeros(x.rows(), x.cols()), tol)
                })?,
            ];
            let cond_i = stable_hyp(
                "(i) P^+R >= lim P_lambda^{-1}R_lambda and lim P_lambda^{-1}S_lambda >= P^+S",
                schedule,
                |lambda| {
                    let dl = fam.at(lambda, tol)?;
                    let plr = crate::dense::solve_dense(dl.p(), dl.r(), tol)?;
                    let pls = crate::dense::solve_dense(dl.p(), dl.s(), tol)?;
                    let (ok_r, wit_r) = geq_witness(&pr, &plr, tol)?;
                    let (ok_s, wit_s) = geq_witness(&pls, &ps, tol)?;
                    Ok((ok_r && ok_s, wit_r.or(wit_s)))
                },
            )?;
            let i_n = Matrix::identity(d.a().cols());
            let cond_ii = entrywise_geq(&pr.sub(&ps)?, &i_n, tol)?;
            hypotheses.push(Hypothesis::new(
                "(i) lambda-limit part ordering, or (ii) P^+(R-S) >= I",
                cond_i.holds || cond_ii,
                (!(cond_i.holds || cond_ii)).then(|| {
                    cond_i
                        .witness
                        .clone()
                        .unwrap_or_else(|| "neither condition holds".into())
                }),
            ));
            let rho_left = block_radius(&d_min, BlockVariant::LambdaW, tol)?;
            let rho_right = block_radius(d, BlockVariant::ProperW, tol)?;
            Ok(TheoremVerdict {
                theorem_id,
                hypotheses,
                rho_left,
                rho_right,
                conclusion_holds: radii_conclusion(rho_left, rho_right),
                lambda_used: Some(lambda_min),
            })
        }
        TheoremId::RdCmpII => {
            require(
                d.flags().type1,
                "A = P - R + S must satisfy P^+R >= 0 and P^+S <= 0",
            )?;
            require(
                d_min.flags().type2,
                "B_lambda splitting must be a double weak splitting of type II",
            )?;
            let a = d.a();
            let sym = a.is_square() && a.is_symmetric(tol.equality_slack(a.max_abs()));
            let p_pinv = d.p_pinv();
            let pr = p_pinv.dot(d.r())?;
            let ps = p_pinv.dot(d.s())?;
            let rho_right = block_radius(d, BlockVariant::ProperW, tol)?;
            let hypotheses = vec![
                Hypothesis::new(
                    "A is symmetric",
                    sym,
                    (!sym).then(|| "A is not symmetric".to_string()),
                ),
                hyp_double_proper(d, tol)?,
                Hypothesis::new(
                    "A splitting convergent (rho(W) < 1)",
                    rho_right < 1.0 - CONCLUSION_SLACK,
                    (rho_right >= 1.0 - CONCLUSION_SLACK)
                        .then(|| format!("spectral radius {rho_right:.6}")),
                ),
                stable_hyp(
                    "B_lambda splitting convergent (rho(tilde-W_lambda) < 1)",
                    schedule,
                    |lambda| {
                        let dl = fam.at(lambda, tol)?;
                        let r = block_radius(&dl, BlockVariant::TildeW, tol)?;
                        Ok((
                            r < 1.0 - CONCLUSION_SLACK,
                            (r >= 1.0 - CONCLUSION_SLACK)
                                .then(|| format!("spectral radius {r:.6}")),
                        ))
                    },
                )?,
                stable_hyp(
                    "lim (R_lambda P_lambda^{-1})^T >= P^+R",
                    schedule,
                    |lambda| {
                        let dl = fam.at(lambda, tol)?;
                        let rp = dl.r().dot(dl.p_pinv())?.transpose();
                        geq_witness(&rp, &pr, tol)
                    },
                )?,
                stable_hyp(
                    "lim (P_lambda^{-1})^T B_lambda^T >= P^+A",
                    schedule,
                    |lambda| {
                        let dl = fam.at(lambda, tol)?;
                        let pb = dl.p_pinv().transpose().dot(&dl.a().transpose())?;
                        geq_witness(&pb, &p_pinv.dot(a)?, tol)
                    },
                )?,
                hyp_positive("P^+R > 0", &pr, tol)?,
                hyp_positive("-P^+S > 0", &ps.scale(-1.0), tol)?,
            ];
            let rho_left = block_radius(&d_min, BlockVariant::TildeW, tol)?;
            Ok(TheoremVerdict {
                theorem_id,
                hypotheses,
                rho_left,
                rho_right,
                conclusion_holds: radii_conclusion(rho_left, rho_right),
                lambda_used: Some(lambda_min),
            })
        }
        other => Err(Error::Parameter(format!(
            "{other:?} is not a regularized double-splitting theorem"
        ))),
    }
}

fn hyp_double_proper(d: &DoubleSplitting, tol: &Tolerances) -> Result<Hypothesis> {
    let range_ok = approx_eq(
        &d.p().dot(d.p_pinv())?,
        &d.a().dot(d.a_pinv())?,
        tol,
    );
    let null_ok = approx_eq(
        &d.p_pinv().dot(d.p())?,
        &d.a_pinv().dot(d.a())?,
        tol,
    );
    let holds = range_ok && null_ok;
    Ok(Hypothesis::new(
        "R(P) = R(A) and N(P) = N(A) (double proper)",
        holds,
        (!holds).then(|| "range or null space of P differs from A".to_string()),
    ))
}

#[derive(Debug, Clone)]
pub struct BlockEmbedding {
    /// `[[A, -I], [0, I]]`.
    pub abb: Matrix,
    /// `[[P, 0], [-S, I]]`.
    pub m: Matrix,
    /// `[[R-S, I], [-S, 0]]`.
    pub n: Matrix,
    /// Max-abs deviation of `tilde-W` from `(N M^{-1})^T`.
    pub identity_residual: f64,
}

fn embed_one(d: &DoubleSplitting, tol: &Tolerances) -> Result<BlockEmbedding> {
    let a = d.a();
    require(a.is_square(), "A must be square")?;
    require(numerical_rank(a, tol)? == a.rows(), "A must be nonsingular")?;
    let n_dim = a.rows();
    let i_n = Matrix::identity(n_dim);
    let z = Matrix::zeros(n_dim, n_dim);
    let abb = Matrix::from_blocks(a, &i_n.scale(-1.0), &z, &i_n)?;
    let m = Matrix::from_blocks(d.p(), &z, &d.s().scale(-1.0), &i_n)?;
    let n = Matrix::from_blocks(&d.r().sub(d.s())?, &i_n, &d.s().scale(-1.0), &z)?;
    let m_inv = inverse(&m, tol)?;
    let w_via_embed = n.dot(&m_inv)?.transpose();
    let w_direct = assemble_block_unchecked(d, BlockVariant::TildeW)?;
    let identity_residual = w_via_embed.sub(&w_direct)?.max_abs();
    Ok(BlockEmbedding {
        abb,
        m,
        n,
        identity_residual,
    })
}

/// Embed both double splittings into the 2n x 2n block system
/// `Abb = M_i - N_i` and verify `tilde-W_i = (N_i M_i^{-1})^T`.
pub fn block_embed(
    d1: &DoubleSplitting,
    d2: &DoubleSplitting,
    tol: &Tolerances,
) -> Result<(BlockEmbedding, BlockEmbedding)> {
    Ok((embed_one(d1, tol)?, embed_one(d2, tol)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regularization::PartRule;

    fn t() -> Tolerances {
        Tolerances::default()
    }

    fn ex313_pair() -> (DoubleSplitting, DoubleSplitting) {
        let a = Matrix::from_rows(&[&[10.0, -4.0], &[-4.0, 6.0]]).unwrap();
        let d1 = DoubleSplitting::new(
            a.clone(),
            Matrix::from_diag(&[12.0, 8.0]).unwrap(),
            Matrix::from_rows(&[&[2.0, 2.0], &[4.0, 2.0]]).unwrap(),
            Matrix::from_rows(&[&[0.0, -2.0], &[0.0, 0.0]]).unwrap(),
            &t(),
        )
        .unwrap();
        let d2 = DoubleSplitting::new(
            a,
            Matrix::from_diag(&[16.0, 10.0]).unwrap(),
            Matrix::from_rows(&[&[6.0, 2.0], &[0.0, 4.0]]).unwrap(),
            Matrix::from_rows(&[&[0.0, -2.0], &[-4.0, 0.0]]).unwrap(),
            &t(),
        )
        .unwrap();
        (d1, d2)
    }

    #[test]
    fn equivalence_chain_type1_trivial() {
        let a = Matrix::from_rows(&[&[10.0, -4.0], &[-4.0, 6.0]]).unwrap();
        let z = Matrix::zeros(2, 2);
        let d = DoubleSplitting::new(a.clone(), a, z.clone(), z, &t()).unwrap();
        let v = check_double_equivalences(&d, EquivalenceForm::TypeI, &t()).unwrap();
        assert!(v.conclusion_holds);
        assert!(v.hypotheses.iter().all(|h| h.holds));
    }

    #[test]
    fn equivalence_chain_type2_on_example_pair() {
        let (d1, d2) = ex313_pair();
        for d in [&d1, &d2] {
            let v = check_double_equivalences(d, EquivalenceForm::TypeII, &t()).unwrap();
            assert!(v.conclusion_holds, "chain not all-equal: {:?}", v.hypotheses);
            assert!(v.hypotheses.iter().all(|h| h.holds));
        }
    }

    #[test]
    fn equivalence_chain_all_false_when_divergent() {
        // scale R up so rho((R-S)P^{-1}) crosses 1; all conditions flip.
        let a = Matrix::from_rows(&[&[10.0, -4.0], &[-4.0, 6.0]]).unwrap();
        let p = Matrix::from_diag(&[12.0, 8.0]).unwrap();
        let r = Matrix::from_rows(&[&[2.0, 2.0], &[4.0, 2.0]])
            .unwrap()
            .scale(20.0);
        let s = a.sub(&p).unwrap().add(&r).unwrap();
        let d = DoubleSplitting::new(a, p, r, s, &t()).unwrap();
        if d.flags().type2 {
            let v = check_double_equivalences(&d, EquivalenceForm::TypeII, &t()).unwrap();
            assert!(v.conclusion_holds);
            assert!(v.hypotheses.iter().all(|h| !h.holds));
        }
    }

    #[test]
    fn dw2_scaled_on_example_pair() {
        let (d1, d2) = ex313_pair();
        let v = check_double_comparison(TheoremId::Dw2Scaled, &d1, &d2, &t()).unwrap();
        assert!(v.all_hypotheses_hold(), "{:?}", v.hypotheses);
        assert!(v.conclusion_holds);
        assert!((v.rho_left - 0.6667).abs() < 5e-4);
        assert!((v.rho_right - 0.7729).abs() < 5e-4);
    }

    #[test]
    fn dw2_rate_converse_shows_non_necessity() {
        let (d1, d2) = ex313_pair();
        let v = check_double_comparison(TheoremId::Dw2Rate, &d1, &d2, &t()).unwrap();
        assert!(!v.all_hypotheses_hold());
        assert!(v.conclusion_holds);
    }

    #[test]
    fn identical_pair_compares_with_equality() {
        let (d1, _) = ex313_pair();
        let v = check_double_comparison(TheoremId::Dw2Rate, &d1, &d1, &t()).unwrap();
        assert!(v.all_hypotheses_hold());
        assert!(v.conclusion_holds);
        assert!((v.rho_left - v.rho_right).abs() < 1e-12);
    }

    #[test]
    fn power_dominance_trivial_and_scaled() {
        let a = Matrix::from_rows(&[&[10.0, -4.0], &[-4.0, 6.0]]).unwrap();
        let m = a.scale(2.0);
        let v = check_power_dominance(&m, &m, &a, 1, 1.0, &t()).unwrap();
        assert!(v.all_hypotheses_hold());
        assert!((v.rho_left - v.rho_right).abs() < 1e-10);
        assert!(v.conclusion_holds);

        let m2 = a.scale(4.0);
        let v = check_power_dominance(&m, &m2, &a, 1, 0.5, &t()).unwrap();
        assert!(v.all_hypotheses_hold(), "{:?}", v.hypotheses);
        assert!(v.conclusion_holds);
        assert!(v.rho_left < v.rho_right);
    }

    #[test]
    fn power_dominance_on_embedded_example_pair() {
        let (d1, d2) = ex313_pair();
        let (e1, e2) = block_embed(&d1, &d2, &t()).unwrap();
        assert!(e1.identity_residual < 1e-10);
        assert!(e2.identity_residual < 1e-10);
        // M_i of the embedding vs the block system Abb: j = 1, alpha = 1.
        let v = check_power_dominance(&e1.m, &e2.m, &e1.abb, 1, 1.0, &t()).unwrap();
        assert!(v.all_hypotheses_hold(), "{:?}", v.hypotheses);
        assert!(v.conclusion_holds);
        assert!((v.rho_left - 0.6667).abs() < 5e-4);
        assert!((v.rho_right - 0.7729).abs() < 5e-4);
    }

    #[test]
    fn block_embedding_invariants() {
        let (d1, _) = ex313_pair();
        let (e1, _) = block_embed(&d1, &d1, &t()).unwrap();
        // Abb = M - N exactly
        assert_eq!(e1.abb, e1.m.sub(&e1.n).unwrap());
        // Abb^{-1} = [[A^{-1}, A^{-1}], [0, I]]
        let a_inv = inverse(d1.a(), &t()).unwrap();
        let i2 = Matrix::identity(2);
        let z = Matrix::zeros(2, 2);
        let want = Matrix::from_blocks(&a_inv, &a_inv, &z, &i2).unwrap();
        let got = inverse(&e1.abb, &t()).unwrap();
        assert!(approx_eq(&got, &want, &t()));
    }

    #[test]
    fn single_convergence_trivial_jacobi_of_identity() {
        let fam = SingleFamily::new(Matrix::identity(2), PartRule::Jacobi);
        let v = check_single_convergence(&fam, &[1.0, 0.5, 0.25], &t()).unwrap();
        assert!(v.all_hypotheses_hold());
        assert!(v.conclusion_holds);
        assert!(v.rho_left.abs() < 1e-9);
    }

    #[test]
    fn cross_type_comparison_identical_splittings() {
        // d1 type II and d2 type I built from the same diagonal data on the
        // same matrix; radii coincide.
        let a = Matrix::from_rows(&[&[10.0, -4.0], &[-4.0, 6.0]]).unwrap();
        let p = Matrix::from_diag(&[12.0, 8.0]).unwrap();
        let r = Matrix::from_rows(&[&[2.0, 2.0], &[4.0, 2.0]]).unwrap();
        let s = Matrix::from_rows(&[&[0.0, -2.0], &[0.0, 0.0]]).unwrap();
        let d = DoubleSplitting::new(a, p, r, s, &t()).unwrap();
        assert!(d.flags().type1 && d.flags().type2);
        let v = check_double_comparison(TheoremId::DwIVsII, &d, &d, &t());
        // the hypothesis matrices need not be ordered; just ensure no error
        let v = v.unwrap();
        assert!(v.rho_left < 1.0 && v.rho_right < 1.0);
    }
}
