//! Hausdorff measure of noncompactness of `L_A`: the tail quantity
//! `||A||^(s)`, the bounds it yields per codomain, and a compactness verdict.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::classes::{class_membership, ClassQuery, PrintedRows};
use crate::discrepancy::{self, Discrepancy};
use crate::duality::{RowKernel, Variant};
use crate::error::{Error, Result};
use crate::matrix::RowMatrix;
use crate::policy::{Outcome, TruncationPolicy, Verdict};
use crate::scalar::Field;
use crate::spaces::Base;
use crate::weights::Weights;

/// How the limit of `||A||^(s)` bounds `||L_A||_chi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `||L_A||_chi = lim`
    C0Exact,
    /// `lim / 2 <= ||L_A||_chi <= lim`
    CSandwich,
    /// `0 <= ||L_A||_chi <= lim`
    LinfUpper,
}

impl Regime {
    pub fn for_codomain(codomain: Base) -> Regime {
        match codomain {
            Base::C0 => Regime::C0Exact,
            Base::C => Regime::CSandwich,
            Base::Linf => Regime::LinfUpper,
        }
    }

    pub fn bounds<S: Field>(self, limit: &S) -> (S, S) {
        match self {
            Regime::C0Exact => (limit.clone(), limit.clone()),
            Regime::CSandwich => (limit.clone() / S::from_i64(2), limit.clone()),
            Regime::LinfUpper => (S::zero(), limit.clone()),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::C0Exact => "c0-exact",
            Regime::CSandwich => "c-sandwich",
            Regime::LinfUpper => "linf-upper",
        })
    }
}

/// Windowed `||A||^(s)`: supremum over rows `n > s` and all `m` of the
/// printed per-`(n, m)` values.
pub fn a_norm_s<S: Field>(
    w: &Weights<S>,
    a: &RowMatrix<S>,
    s: usize,
    policy: &TruncationPolicy,
) -> Verdict<S> {
    PrintedRows::new(w, a).scan(Some(s), policy)
}

/// `||A||^(s)` over the fixed window `s < n <= n_max`, `m <= m_max`.
pub fn a_norm_s_window<S: Field>(
    w: &Weights<S>,
    a: &RowMatrix<S>,
    s: usize,
    n_max: usize,
    m_max: usize,
) -> S {
    let mut best = S::zero();
    for n in s + 1..=n_max {
        let mut kernel = RowKernel::new(w, Box::new(a.row(n)));
        for m in 0..=m_max {
            best = best.max_of(kernel.abs_sum(m, Variant::Printed));
        }
    }
    best
}

/// Values of `s` at which the tail quantity is evaluated: `0` and every
/// checkpoint that still leaves `window` row checkpoints above it.
pub fn s_checkpoints(policy: &TruncationPolicy) -> Vec<usize> {
    let mut out = vec![0];
    out.extend(
        policy
            .checkpoints()
            .into_iter()
            .filter(|&c| policy.after(c).checkpoints().len() >= policy.window),
    );
    out.dedup();
    out
}

#[derive(Debug, Clone)]
pub struct MncEstimate<S> {
    pub regime: Regime,
    /// `(s, verdict on ||A||^(s))`.
    pub values: Vec<(usize, Verdict<S>)>,
    /// Stabilization of `||A||^(s)` in `s`; its estimate is the limit.
    pub verdict: Verdict<S>,
    pub lower: Option<S>,
    pub upper: Option<S>,
    /// Outcome of the class check, `None` when membership was assumed.
    pub membership: Option<Outcome>,
    pub discrepancies: Vec<Discrepancy>,
}

impl<S: Field> MncEstimate<S> {
    pub fn limit(&self) -> Option<&S> {
        self.verdict.estimate.as_ref()
    }
}

/// Evaluates `||A||^(s)` along [`s_checkpoints`] and the limit in `s`.
pub fn tail_estimate<S: Field>(
    w: &Weights<S>,
    a: &RowMatrix<S>,
    codomain: Base,
    policy: &TruncationPolicy,
) -> MncEstimate<S> {
    let regime = Regime::for_codomain(codomain);
    let mut rows = PrintedRows::new(w, a);
    let values: Vec<(usize, Verdict<S>)> = s_checkpoints(policy)
        .into_iter()
        .map(|s| (s, rows.scan(Some(s), policy)))
        .collect();
    let series: Vec<(usize, S)> = values
        .iter()
        .map(|(s, v)| (*s, v.estimate.clone().unwrap_or_else(S::zero)))
        .collect();
    let last = series.last().map(|p| p.1.clone());
    let verdict = if let Some((s, v)) = values.iter().find(|(_, v)| v.outcome == Outcome::Fails) {
        let reason = format!(
            "||A||^({s}) diverges: {}",
            v.reason.clone().unwrap_or_default()
        );
        Verdict::new(Outcome::Fails, None, series, Some(reason))
    } else if values.len() < policy.window {
        Verdict::new(
            Outcome::Inconclusive,
            last,
            series,
            Some(format!(
                "fewer than {} values of s fit below n_max = {}",
                policy.window, policy.n_max
            )),
        )
    } else {
        let recent = &values[values.len() - policy.window..];
        let tol: S = policy.tol.get();
        let lo = recent
            .iter()
            .filter_map(|(_, v)| v.estimate.clone())
            .reduce(Field::min_of);
        let hi = recent
            .iter()
            .filter_map(|(_, v)| v.estimate.clone())
            .reduce(Field::max_of);
        let all_hold = recent.iter().all(|(_, v)| v.holds());
        match (lo, hi) {
            (Some(lo), Some(hi)) if all_hold && hi.clone() - lo.clone() <= tol => {
                Verdict::new(Outcome::Holds, last, series, None)
            }
            _ if !all_hold => Verdict::new(
                Outcome::Inconclusive,
                last,
                series,
                Some("||A||^(s) did not stabilize in n for the largest s".into()),
            ),
            _ => Verdict::new(
                Outcome::Inconclusive,
                last,
                series,
                Some(format!(
                    "||A||^(s) did not settle within tol over the last {} values of s",
                    policy.window
                )),
            ),
        }
    };
    let (lower, upper) = match verdict.estimate.as_ref() {
        Some(l) => {
            let (lo, up) = regime.bounds(l);
            (Some(lo), Some(up))
        }
        None => (None, None),
    };
    let mut discrepancies = Vec::new();
    if discrepancy::is_worked_example(w, a) {
        let computed = verdict
            .estimate
            .as_ref()
            .map(|l| format!("{l} for every s checked (limit estimate {l})"));
        discrepancies.push(discrepancy::mnc_worked_example(computed));
    }
    if regime == Regime::CSandwich {
        discrepancies.extend(discrepancy::lookup(discrepancy::C_SANDWICH_RAW_ROWS));
    }
    MncEstimate {
        regime,
        values,
        verdict,
        lower,
        upper,
        membership: None,
        discrepancies,
    }
}

/// Bounds on `||L_A||_chi` for `A` in `(wrapped domain, codomain)`. Unless
/// `assume_member`, the class conditions are checked first and a failing
/// condition rejects the query.
pub fn mnc_bounds<S: Field>(
    w: &Arc<Weights<S>>,
    a: &RowMatrix<S>,
    domain: Base,
    codomain: Base,
    policy: &TruncationPolicy,
    assume_member: bool,
) -> Result<MncEstimate<S>> {
    let mut membership = None;
    let mut co1i = None;
    if !assume_member {
        let report = class_membership(&ClassQuery {
            matrix: a.clone(),
            domain,
            codomain,
            weights: Arc::clone(w),
            policy: policy.clone(),
        })?;
        if let Some((c, v)) = report
            .conditions
            .iter()
            .find(|(_, v)| v.outcome == Outcome::Fails)
        {
            return Err(Error::NotMember {
                condition: c.to_string(),
                outcome: v.reason.clone().unwrap_or_else(|| v.outcome.to_string()),
            });
        }
        membership = Some(report.outcome);
        co1i = report.sup_value;
    } else {
        crate::classes::required_conditions(domain, codomain)?;
    }
    let mut est = tail_estimate(w, a, codomain, policy);
    est.membership = membership;
    if discrepancy::is_worked_example(w, a) {
        let computed = co1i.map(|v| format!("{v} (attained at m = 1)"));
        est.discrepancies
            .insert(0, discrepancy::co1i_worked_example(computed));
    }
    Ok(est)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Compactness {
    Compact,
    NotCompact,
    Inconclusive,
}

impl fmt::Display for Compactness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Compactness::Compact => "compact",
            Compactness::NotCompact => "not-compact",
            Compactness::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone)]
pub struct CompactnessVerdict<S> {
    pub outcome: Compactness,
    pub reason: String,
    pub limit: Option<S>,
    pub estimate: MncEstimate<S>,
}

/// Compact when the limit of `||A||^(s)` vanishes. A limit bounded away
/// from zero (the last `window` values all above `2 tol`) proves
/// noncompactness only for codomains `c0` and `c`.
pub fn classify_compact<S: Field>(
    w: &Arc<Weights<S>>,
    a: &RowMatrix<S>,
    domain: Base,
    codomain: Base,
    policy: &TruncationPolicy,
    assume_member: bool,
) -> Result<CompactnessVerdict<S>> {
    let mut estimate = mnc_bounds(w, a, domain, codomain, policy, assume_member)?;
    let tol: S = policy.tol.get();
    let limit = estimate.limit().cloned();
    let stabilized = estimate.verdict.holds();
    let recent: Vec<S> = estimate
        .values
        .iter()
        .rev()
        .take(policy.window)
        .filter_map(|(_, v)| v.estimate.clone())
        .collect();
    let twice_tol = tol.clone() + tol.clone();
    let away = stabilized && recent.len() == policy.window && recent.iter().all(|v| *v > twice_tol);
    let (outcome, reason) = match &limit {
        Some(l) if stabilized && l.abs() <= tol => {
            (Compactness::Compact, format!("lim ||A||^(s) = {l} within tol"))
        }
        Some(l) if away && codomain != Base::Linf => (
            Compactness::NotCompact,
            format!("lim ||A||^(s) = {l} is bounded away from 0 ({} regime)", estimate.regime),
        ),
        Some(l) if away => (
            Compactness::Inconclusive,
            format!(
                "lim ||A||^(s) = {l} is nonzero; with codomain linf a vanishing limit is only sufficient for compactness"
            ),
        ),
        _ => (
            Compactness::Inconclusive,
            estimate
                .verdict
                .reason
                .clone()
                .unwrap_or_else(|| "the limit of ||A||^(s) was not determined".into()),
        ),
    };
    if codomain == Base::Linf
        && outcome == Compactness::Inconclusive
        && discrepancy::is_worked_example(w, a)
    {
        let computed = limit
            .as_ref()
            .map(|l| format!("limit of ||A||^(s) is {l}; verdict inconclusive"));
        estimate
            .discrepancies
            .push(discrepancy::linf_compactness(computed));
    }
    Ok(CompactnessVerdict {
        outcome,
        reason,
        limit,
        estimate,
    })
}
