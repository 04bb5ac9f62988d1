//! Membership of a matrix in the classes `(X, Y)` with `X` a wrapped space
//! and `Y` one of `c0`, `c`, `linf`, and the operator norm on the wrapped
//! `linf`-type spaces.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::duality::{column_limits, functional_norm, RowKernel, RowSup, Variant};
use crate::error::{Error, Result};
use crate::matrix::RowMatrix;
use crate::policy::{LimitTarget, Outcome, TruncationPolicy, Verdict};
use crate::scalar::Field;
use crate::spaces::Base;
use crate::weights::Weights;

/// Condition identifiers used in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Condition {
    Co1i,
    Co1ii,
    Co2,
    Co3,
    Co4,
    Co5,
    Co6,
}

impl Condition {
    pub fn formula(self) -> &'static str {
        match self {
            Condition::Co1i => {
                "sup_{n,m} [ sum_{k<m} Q_k |(1/q_{k+1} - 1/q_k) sum_{j=k+1..m} a_nj| + |Q_m a_nm / q_m| ] < inf"
            }
            Condition::Co1ii => "(a_nk Q_k / q_k)_k in c0 for every n",
            Condition::Co2 => "(a_nk Q_k / q_k)_k in c for every n",
            Condition::Co3 => "lim_n a_nk = 0 for every k",
            Condition::Co4 => "lim_n a_nk = alpha_k exists for every k",
            Condition::Co5 => "lim_n sum_k a_nk = 0",
            Condition::Co6 => "lim_n sum_k a_nk = alpha exists",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Conditions characterizing `(wrapped domain, codomain)`.
pub fn required_conditions(domain: Base, codomain: Base) -> Result<&'static [Condition]> {
    use Condition::*;
    Ok(match (domain, codomain) {
        (Base::Linf, Base::Linf) => &[Co1i, Co1ii],
        (Base::C, Base::Linf) => &[Co1i, Co2],
        (Base::C0, Base::Linf) => &[Co1i],
        (Base::C0, Base::C0) => &[Co1i, Co3],
        (Base::C0, Base::C) => &[Co1i, Co4],
        (Base::C, Base::C0) => &[Co1i, Co1ii, Co3, Co5],
        (Base::C, Base::C) => &[Co1i, Co1ii, Co4, Co6],
        (d, c) => {
            return Err(Error::UnsupportedClass {
                domain: format!("wrapped {d}"),
                codomain: c.to_string(),
            })
        }
    })
}

#[derive(Debug, Clone)]
pub struct ClassQuery<S> {
    pub matrix: RowMatrix<S>,
    /// Base of the wrapped domain space.
    pub domain: Base,
    pub codomain: Base,
    pub weights: Arc<Weights<S>>,
    pub policy: TruncationPolicy,
}

#[derive(Debug, Clone)]
pub struct ConditionReport<S> {
    pub domain: Base,
    pub codomain: Base,
    pub outcome: Outcome,
    pub conditions: Vec<(Condition, Verdict<S>)>,
    /// Estimate of the double supremum in `Co1i`.
    pub sup_value: Option<S>,
    /// Column limits `alpha_k`, `k <= policy.n_start`, when `Co3`/`Co4` ran.
    pub alpha_k: Vec<Option<S>>,
    /// Limit of the row sums when `Co5`/`Co6` ran.
    pub alpha: Option<S>,
}

impl<S: Field> ConditionReport<S> {
    pub fn get(&self, c: Condition) -> Option<&Verdict<S>> {
        self.conditions
            .iter()
            .find(|(k, _)| *k == c)
            .map(|(_, v)| v)
    }
}

/// Lazily extended per-row suprema of the printed per-`m` C-matrix values.
pub(crate) struct PrintedRows<'a, S> {
    w: &'a Weights<S>,
    a: &'a RowMatrix<S>,
    rows: Vec<RowSup<'a, S>>,
}

impl<'a, S: Field> PrintedRows<'a, S> {
    pub(crate) fn new(w: &'a Weights<S>, a: &'a RowMatrix<S>) -> Self {
        PrintedRows {
            w,
            a,
            rows: Vec::new(),
        }
    }

    /// `sup_{first <= n <= c} sup_{m <= c}` of the per-`(n, m)` values
    /// (exact in `m` for finitely supported rows).
    pub(crate) fn square(&mut self, first: usize, c: usize) -> S {
        while self.rows.len() <= c {
            let kernel = RowKernel::new(self.w, Box::new(self.a.row(self.rows.len())));
            self.rows.push(RowSup::new(kernel, Variant::Printed));
        }
        self.rows[first.min(c + 1)..=c]
            .iter_mut()
            .fold(S::zero(), |acc, r| acc.max_of(r.sup_upto(c)))
    }

    /// Growing-square scan over rows `n > skip` (all rows when `skip` is `None`).
    pub(crate) fn scan(&mut self, skip: Option<usize>, policy: &TruncationPolicy) -> Verdict<S> {
        let first = skip.map_or(0, |s| s + 1);
        let policy = match skip {
            Some(s) => policy.after(s),
            None => policy.clone(),
        };
        policy.scan_sup(|c| self.square(first, c))
    }
}

/// Windowed estimate of the `Co1i` double supremum over `(n, m)`.
pub fn cond_co1i<S: Field>(
    w: &Weights<S>,
    a: &RowMatrix<S>,
    policy: &TruncationPolicy,
) -> Verdict<S> {
    PrintedRows::new(w, a).scan(None, policy)
}

/// Whether `(a_nk Q_k / q_k)_k` lies in `c0` (`target = C0`) or `c` (`target = C`).
pub fn cond_row_tail<S: Field>(
    w: &Weights<S>,
    a: &RowMatrix<S>,
    n: usize,
    target: Base,
    policy: &TruncationPolicy,
) -> Verdict<S> {
    if a.row_support(n).is_some() {
        return Verdict::new(Outcome::Holds, Some(S::zero()), Vec::new(), None);
    }
    let mode = match target {
        Base::C0 => LimitTarget::Zero,
        _ => LimitTarget::Exists,
    };
    policy.scan_limit(mode, |k| a.entry(n, k) * w.ratio(k))
}

/// Row-tail condition over rows `0..=policy.n_start`.
fn row_tails<S: Field>(
    w: &Weights<S>,
    a: &RowMatrix<S>,
    target: Base,
    policy: &TruncationPolicy,
) -> Verdict<S> {
    let mut worst: Option<Verdict<S>> = None;
    for n in 0..=policy.n_start {
        let v = cond_row_tail(w, a, n, target, policy);
        if v.outcome == Outcome::Fails {
            return v.with_reason(format!("row {n} tail is not in {target}"));
        }
        if v.outcome == Outcome::Inconclusive && worst.as_ref().is_none_or(|w| w.holds()) {
            let reason = format!("row {n}: {}", v.reason.clone().unwrap_or_default());
            worst = Some(v.with_reason(reason));
        } else if worst.is_none() {
            worst = Some(v);
        }
    }
    worst.expect("at least one row")
}

/// Column limits `alpha_k` for `k <= policy.n_start`; `target = Zero` also
/// requires each limit to vanish.
pub fn cond_column_limits<S: Field>(
    a: &RowMatrix<S>,
    target: LimitTarget,
    policy: &TruncationPolicy,
) -> (Vec<Option<S>>, Verdict<S>) {
    column_limits(policy, policy.n_start, target, |n, k| a.entry(n, k))
}

/// Sum of row `n`: exact for finitely supported rows, windowed otherwise.
pub fn row_sum<S: Field>(a: &RowMatrix<S>, n: usize, policy: &TruncationPolicy) -> Result<S> {
    if let Some(last) = a.row_support(n) {
        return Ok((0..=last).fold(S::zero(), |acc, k| acc + a.entry(n, k)));
    }
    let mut partial = S::zero();
    let v = policy.scan_limit(LimitTarget::Exists, |k| {
        partial = partial.clone() + a.entry(n, k);
        partial.clone()
    });
    match (v.outcome, v.estimate) {
        (Outcome::Holds, Some(s)) => Ok(s),
        _ => Err(Error::RowSumDivergence { row: n }),
    }
}

/// Windowed limit of the row sums.
pub fn cond_row_sum_limit<S: Field>(
    a: &RowMatrix<S>,
    target: LimitTarget,
    policy: &TruncationPolicy,
) -> Result<Verdict<S>> {
    let mut err = None;
    let v = policy.scan_limit(target, |n| match row_sum(a, n, policy) {
        Ok(s) => s,
        Err(e) => {
            err.get_or_insert(e);
            S::zero()
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Evaluates exactly the conditions characterizing the queried class.
pub fn class_membership<S: Field>(query: &ClassQuery<S>) -> Result<ConditionReport<S>> {
    let required = required_conditions(query.domain, query.codomain)?;
    let (w, a, p) = (&*query.weights, &query.matrix, &query.policy);
    let mut report = ConditionReport {
        domain: query.domain,
        codomain: query.codomain,
        outcome: Outcome::Holds,
        conditions: Vec::new(),
        sup_value: None,
        alpha_k: Vec::new(),
        alpha: None,
    };
    for &c in required {
        let verdict = match c {
            Condition::Co1i => {
                let v = cond_co1i(w, a, p);
                report.sup_value = v.estimate.clone();
                v
            }
            Condition::Co1ii => row_tails(w, a, Base::C0, p),
            Condition::Co2 => row_tails(w, a, Base::C, p),
            Condition::Co3 | Condition::Co4 => {
                let target = if c == Condition::Co3 {
                    LimitTarget::Zero
                } else {
                    LimitTarget::Exists
                };
                let (limits, v) = cond_column_limits(a, target, p);
                report.alpha_k = limits;
                v
            }
            Condition::Co5 | Condition::Co6 => {
                let target = if c == Condition::Co5 {
                    LimitTarget::Zero
                } else {
                    LimitTarget::Exists
                };
                let v = cond_row_sum_limit(a, target, p)?;
                if v.holds() {
                    report.alpha = v.estimate.clone();
                }
                v
            }
        };
        report.outcome = report.outcome.and(verdict.outcome);
        report.conditions.push((c, verdict));
    }
    Ok(report)
}

/// `sup_n ||A_n||` with each row norm taken as a functional on the wrapped
/// spaces (the stabilized derived C-matrix value of the row).
pub fn operator_norm<S: Field>(
    w: &Weights<S>,
    a: &RowMatrix<S>,
    policy: &TruncationPolicy,
) -> Verdict<S> {
    let mut undecided: Option<String> = None;
    let v = policy.scan_sup_terms(|n| {
        let row = functional_norm(w, &a.row(n), policy);
        if !row.holds() && undecided.is_none() {
            undecided = Some(format!(
                "norm of row {n} did not stabilize: {}",
                row.reason.clone().unwrap_or_default()
            ));
        }
        row.estimate.unwrap_or_else(S::zero)
    });
    match undecided {
        Some(reason) if v.holds() => Verdict {
            outcome: Outcome::Inconclusive,
            reason: Some(reason),
            ..v
        },
        _ => v,
    }
}
