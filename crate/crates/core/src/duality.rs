//! The C-matrix of a sequence `a`, beta-dual conditions and the dual norm.
//!
//! Writing `x = M y` with `M` the composed inverse, partial sums of `a_k x_k`
//! become `(C y)_n` where, with `d_k = Q_k (1/q_{k+1} - 1/q_k)`,
//!
//! ```text
//! c_{nk} = d_k * sum_{j=k+1..n} a_j - Q_k a_k / q_k     (k <= n)
//! ```
//!
//! That is the [`Variant::Derived`] matrix. [`Variant::Printed`] drops the
//! `-Q_k a_k / q_k` term below the diagonal; it is kept for comparison with the
//! published display and does not satisfy the pairing identity.

use std::fmt;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::policy::{LimitTarget, Outcome, TruncationPolicy, Verdict};
use crate::scalar::Field;
use crate::sequence::Sequence;
use crate::spaces::{Base, SpaceTag};
use crate::triangle::{make_composed_inverse, Triangle};
use crate::weights::Weights;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Derived,
    Printed,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Derived => "derived",
            Variant::Printed => "printed",
        })
    }
}

/// Cached terms and partial sums of a sequence, with the C-matrix row kernels.
pub(crate) struct RowKernel<'w, S> {
    w: &'w Weights<S>,
    a: Box<dyn Sequence<S> + 'w>,
    terms: Vec<S>,
    /// `prefix[k] = a_0 + ... + a_k`
    prefix: Vec<S>,
    /// `(Q_k / q_k, d_k)`
    coeffs: Vec<(S, S)>,
}

impl<'w, S: Field> RowKernel<'w, S> {
    pub(crate) fn new(w: &'w Weights<S>, a: Box<dyn Sequence<S> + 'w>) -> Self {
        RowKernel {
            w,
            a,
            terms: Vec::new(),
            prefix: Vec::new(),
            coeffs: Vec::new(),
        }
    }

    pub(crate) fn support(&self) -> Option<usize> {
        self.a.support()
    }

    fn fill(&mut self, n: usize) {
        while self.terms.len() <= n {
            let k = self.terms.len();
            let v = self.a.term(k);
            let p = match self.prefix.last() {
                Some(prev) => prev.clone() + v.clone(),
                None => v.clone(),
            };
            self.terms.push(v);
            self.prefix.push(p);
            self.coeffs.push((self.w.ratio(k), self.w.diff_coeff(k)));
        }
    }

    /// `c_{nk}` for `k <= n`.
    pub(crate) fn entry(&mut self, n: usize, k: usize, variant: Variant) -> S {
        self.fill(n);
        let (ratio, diff) = &self.coeffs[k];
        let diag = ratio.clone() * self.terms[k].clone();
        if k == n {
            return -diag;
        }
        let tail = self.prefix[n].clone() - self.prefix[k].clone();
        let off = diff.clone() * tail;
        match variant {
            Variant::Derived => off - diag,
            Variant::Printed => off,
        }
    }

    /// `sum_{k<=n} |c_{nk}|`.
    pub(crate) fn abs_sum(&mut self, n: usize, variant: Variant) -> S {
        (0..=n).fold(S::zero(), |acc, k| acc + self.entry(n, k, variant).abs())
    }

    /// `abs_sum(m)` for every `m` in `first..=last`, in `O(last log last)`.
    ///
    /// Off-diagonal terms are `|d_k| |P_m - x_k|` with `x_k = P_k + e_k / d_k`
    /// (`e_k` the subtracted diagonal part, zero for the printed variant), so
    /// each row is a weighted absolute deviation of `P_m` from the points
    /// inserted so far.
    pub(crate) fn abs_sums(&mut self, first: usize, last: usize, variant: Variant) -> Vec<S> {
        self.fill(last);
        let mut points = Vec::with_capacity(last);
        for k in 0..last {
            let (ratio, diff) = &self.coeffs[k];
            points.push(if diff.is_zero() {
                None
            } else {
                let shift = match variant {
                    Variant::Derived => ratio.clone() * self.terms[k].clone() / diff.clone(),
                    Variant::Printed => S::zero(),
                };
                Some(self.prefix[k].clone() + shift)
            });
        }
        let mut xs: Vec<S> = points.iter().flatten().cloned().collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        xs.dedup();
        let rank = |x: &S| xs.partition_point(|y| y < x);
        let mut tree = Fenwick::<S>::new(xs.len());
        let (mut w_tot, mut wx_tot, mut flat) = (S::zero(), S::zero(), S::zero());
        let mut out = Vec::with_capacity(last + 1 - first.min(last + 1));
        for m in 0..=last {
            if m >= first {
                let p = self.prefix[m].clone();
                let (w_le, wx_le) = tree.prefix(xs.partition_point(|y| *y <= p));
                let below = p.clone() * w_le.clone() - wx_le.clone();
                let above = (wx_tot.clone() - wx_le) - p.clone() * (w_tot.clone() - w_le);
                let diag = (self.coeffs[m].0.clone() * self.terms[m].clone()).abs();
                out.push(below + above + flat.clone() + diag);
            }
            if m < last {
                match &points[m] {
                    Some(x) => {
                        let w = self.coeffs[m].1.abs();
                        let wx = w.clone() * x.clone();
                        tree.add(rank(x), &w, &wx);
                        w_tot = w_tot + w;
                        wx_tot = wx_tot + wx;
                    }
                    None => {
                        if variant == Variant::Derived {
                            flat = flat + (self.coeffs[m].0.clone() * self.terms[m].clone()).abs();
                        }
                    }
                }
            }
        }
        out
    }
}

/// `sup_m` of the per-`m` C-matrix values of one matrix row, extended lazily;
/// keeps prefix maxima so any cap can be answered after a longer scan.
pub(crate) struct RowSup<'w, S> {
    kernel: RowKernel<'w, S>,
    variant: Variant,
    /// `best[m] = max_{m' <= m}` of the per-`m'` values.
    best: Vec<S>,
}

impl<'w, S: Field> RowSup<'w, S> {
    pub(crate) fn new(kernel: RowKernel<'w, S>, variant: Variant) -> Self {
        RowSup {
            kernel,
            variant,
            best: Vec::new(),
        }
    }

    /// Supremum over `m <= m_cap`. For a row supported on `0..=L` the values
    /// are constant from `m = L + 1` on, so the exact supremum is taken over
    /// `m <= L + 1` whatever `m_cap` is.
    pub(crate) fn sup_upto(&mut self, m_cap: usize) -> S {
        let last = self.kernel.support().map_or(m_cap, |l| l + 1);
        let first = self.best.len();
        if last >= first {
            let values = if last - first < BATCH_MIN {
                (first..=last)
                    .map(|m| self.kernel.abs_sum(m, self.variant))
                    .collect()
            } else {
                self.kernel.abs_sums(first, last, self.variant)
            };
            for v in values {
                let b = match self.best.last() {
                    Some(prev) => prev.clone().max_of(v),
                    None => v,
                };
                self.best.push(b);
            }
        }
        self.best[last].clone()
    }
}

const BATCH_MIN: usize = 48;

/// Fenwick tree of `(weight, weight * point)` pairs.
struct Fenwick<S> {
    tree: Vec<(S, S)>,
}

impl<S: Field> Fenwick<S> {
    fn new(n: usize) -> Self {
        Fenwick {
            tree: vec![(S::zero(), S::zero()); n + 1],
        }
    }

    fn add(&mut self, rank: usize, w: &S, wx: &S) {
        let mut i = rank + 1;
        while i < self.tree.len() {
            let (a, b) = &mut self.tree[i];
            *a = a.clone() + w.clone();
            *b = b.clone() + wx.clone();
            i += i & i.wrapping_neg();
        }
    }

    /// Sums over ranks `< count`.
    fn prefix(&self, count: usize) -> (S, S) {
        let (mut a, mut b) = (S::zero(), S::zero());
        let mut i = count;
        while i > 0 {
            a = a + self.tree[i].0.clone();
            b = b + self.tree[i].1.clone();
            i -= i & i.wrapping_neg();
        }
        (a, b)
    }
}

/// `sum_{k<=n} |c_{nk}|` for `n = 0..=last` (derived or printed entries).
pub fn row_values<S: Field>(w: &Weights<S>, a: &[S], variant: Variant) -> Vec<S> {
    let owned = crate::sequence::Finite(a.to_vec());
    let mut kernel = RowKernel::new(w, Box::new(owned));
    (0..a.len()).map(|n| kernel.abs_sum(n, variant)).collect()
}

/// The C-matrix of `a` as a lazily evaluated, memoized triangle.
pub struct CMatrix<S> {
    w: Arc<Weights<S>>,
    a: Arc<dyn Sequence<S>>,
    variant: Variant,
    prefix: Arc<RwLock<Vec<S>>>,
}

impl<S: Field> CMatrix<S> {
    pub fn variant(&self) -> Variant {
        self.variant
    }

    fn prefix(&self, n: usize) -> S {
        if let Some(v) = self.prefix.read().expect("prefix poisoned").get(n) {
            return v.clone();
        }
        let mut p = self.prefix.write().expect("prefix poisoned");
        while p.len() <= n {
            let k = p.len();
            let next = match p.last() {
                Some(prev) => prev.clone() + self.a.term(k),
                None => self.a.term(0),
            };
            p.push(next);
        }
        p[n].clone()
    }

    pub fn entry(&self, n: usize, k: usize) -> S {
        if k > n {
            return S::zero();
        }
        let diag = self.w.ratio(k) * self.a.term(k);
        if k == n {
            return -diag;
        }
        let off = self.w.diff_coeff(k) * (self.prefix(n) - self.prefix(k));
        match self.variant {
            Variant::Derived => off - diag,
            Variant::Printed => off,
        }
    }

    pub fn row_abs_sum(&self, n: usize) -> S {
        (0..=n).fold(S::zero(), |acc, k| acc + self.entry(n, k).abs())
    }

    pub fn row_sum(&self, n: usize) -> S {
        (0..=n).fold(S::zero(), |acc, k| acc + self.entry(n, k))
    }

    pub fn to_triangle(&self) -> Triangle<S> {
        let me = self.clone();
        Triangle::from_rule(format!("c-matrix({})", self.variant), move |n, k| {
            me.entry(n, k)
        })
    }
}

impl<S> Clone for CMatrix<S> {
    fn clone(&self) -> Self {
        CMatrix {
            w: Arc::clone(&self.w),
            a: Arc::clone(&self.a),
            variant: self.variant,
            prefix: Arc::clone(&self.prefix),
        }
    }
}

pub fn c_matrix<S: Field>(
    w: &Arc<Weights<S>>,
    a: Arc<dyn Sequence<S>>,
    variant: Variant,
) -> CMatrix<S> {
    CMatrix {
        w: Arc::clone(w),
        a,
        variant,
        prefix: Arc::default(),
    }
}

/// `max_{n<=N} |sum_{k<=n} a_k x_k - (C y)_n|` where `x` is the composed inverse applied to `y`.
pub fn pairing_check<S: Field>(
    w: &Arc<Weights<S>>,
    a: Arc<dyn Sequence<S>>,
    y: &dyn Sequence<S>,
    n: usize,
    variant: Variant,
) -> S {
    let m = make_composed_inverse(w);
    let ys = y.terms(n);
    let xs: Vec<S> = (0..=n)
        .map(|i| (0..=i).fold(S::zero(), |acc, k| acc + m.entry(i, k) * ys[k].clone()))
        .collect();
    let c = c_matrix(w, Arc::clone(&a), variant);
    let mut lhs = S::zero();
    let mut worst = S::zero();
    for i in 0..=n {
        lhs = lhs + a.term(i) * xs[i].clone();
        let rhs = (0..=i).fold(S::zero(), |acc, k| acc + c.entry(i, k) * ys[k].clone());
        worst = worst.max_of((lhs.clone() - rhs).abs());
    }
    worst
}

/// Condition sets on the C-matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DualSet {
    /// `sup_n sum_k |c_{nk}| < inf`
    C1,
    /// `lim_n c_{nk}` exists for each `k`
    C2,
    /// `lim_n sum_k |c_{nk}| = sum_k |lim_n c_{nk}|`
    C3,
    /// `lim_n sum_k c_{nk}` exists
    C4,
}

impl fmt::Display for DualSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DualSet::C1 => "c1",
            DualSet::C2 => "c2",
            DualSet::C3 => "c3",
            DualSet::C4 => "c4",
        })
    }
}

impl DualSet {
    /// Sets whose intersection is the beta-dual of the wrapped space over `base`.
    pub fn required_for(base: Base) -> &'static [DualSet] {
        match base {
            Base::C0 => &[DualSet::C1, DualSet::C2],
            Base::C => &[DualSet::C1, DualSet::C2, DualSet::C4],
            Base::Linf => &[DualSet::C2, DualSet::C3],
        }
    }
}

#[derive(Debug, Clone)]
pub struct BetaDualReport<S> {
    pub tag: SpaceTag,
    pub variant: Variant,
    pub outcome: Outcome,
    pub sets: Vec<(DualSet, Verdict<S>)>,
    /// Column limits `alpha_k` backing set c2, for `k <= policy.n_start`.
    pub column_limits: Vec<Option<S>>,
}

impl<S: Field> BetaDualReport<S> {
    pub fn failed_sets(&self) -> Vec<DualSet> {
        self.sets
            .iter()
            .filter(|(_, v)| v.outcome == Outcome::Fails)
            .map(|(s, _)| *s)
            .collect()
    }
}

/// Per-column windowed limits of a row-indexed family, columns `0..=columns`.
pub(crate) fn column_limits<S: Field>(
    policy: &TruncationPolicy,
    columns: usize,
    target: LimitTarget,
    mut entry: impl FnMut(usize, usize) -> S,
) -> (Vec<Option<S>>, Verdict<S>) {
    let mut limits = Vec::with_capacity(columns + 1);
    let mut combined: Option<Verdict<S>> = None;
    for k in 0..=columns {
        let v = policy.scan_limit(target, |n| entry(n, k));
        limits.push(v.holds().then(|| v.estimate.clone()).flatten());
        let worse = match &combined {
            None => true,
            Some(c) => rank(v.outcome) > rank(c.outcome),
        };
        if worse {
            let reason = v.reason.clone().map(|r| format!("column {k}: {r}"));
            combined = Some(Verdict { reason, ..v });
        }
    }
    let mut verdict = combined.expect("at least one column");
    if verdict.holds() {
        verdict.reason = None;
    }
    (limits, verdict)
}

fn rank(o: Outcome) -> u8 {
    match o {
        Outcome::Holds => 0,
        Outcome::Inconclusive => 1,
        Outcome::Fails => 2,
    }
}

/// Tests `a` against the condition sets characterizing the beta-dual of the
/// wrapped space over `tag.base`.
///
/// Set c3 is estimated as: `sum_k |c_{nk}|` converges and the mass carried by
/// columns beyond `n/2` tends to zero.
pub fn beta_dual_membership<S: Field>(
    w: &Arc<Weights<S>>,
    a: Arc<dyn Sequence<S>>,
    tag: SpaceTag,
    policy: &TruncationPolicy,
    variant: Variant,
) -> BetaDualReport<S> {
    let c = c_matrix(w, a, variant);
    let mut sets = Vec::new();
    let mut column_limit_values = Vec::new();
    for &set in DualSet::required_for(tag.base) {
        let verdict = match set {
            DualSet::C1 => policy.scan_sup_terms(|n| c.row_abs_sum(n)),
            DualSet::C2 => {
                let (limits, v) =
                    column_limits(policy, policy.n_start, LimitTarget::Exists, |n, k| {
                        c.entry(n, k)
                    });
                column_limit_values = limits;
                v
            }
            DualSet::C3 => {
                let total = policy.scan_limit(LimitTarget::Exists, |n| c.row_abs_sum(n));
                let escaping = policy.scan_limit(LimitTarget::Zero, |n| {
                    (n / 2 + 1..=n).fold(S::zero(), |acc, k| acc + c.entry(n, k).abs())
                });
                let outcome = total.outcome.and(escaping.outcome);
                let reason = match (total.outcome, escaping.outcome) {
                    (Outcome::Holds, Outcome::Holds) => None,
                    (Outcome::Holds, _) => escaping
                        .reason
                        .map(|r| format!("mass beyond column n/2: {r}")),
                    _ => total.reason.map(|r| format!("row absolute sums: {r}")),
                };
                Verdict {
                    outcome,
                    reason,
                    ..total
                }
            }
            DualSet::C4 => policy.scan_limit(LimitTarget::Exists, |n| c.row_sum(n)),
        };
        sets.push((set, verdict));
    }
    let outcome = sets
        .iter()
        .fold(Outcome::Holds, |acc, (_, v)| acc.and(v.outcome));
    BetaDualReport {
        tag,
        variant,
        outcome,
        sets,
        column_limits: column_limit_values,
    }
}

/// Per-`n` values of the dual-norm expression and their running supremum.
#[derive(Debug, Clone)]
pub struct DualNormValue<S> {
    pub variant: Variant,
    /// `sum_{k<=n} |c_{nk}|` for every scanned `n`.
    pub per_n: Vec<S>,
    pub sup: S,
    pub argmax: usize,
    pub verdict: Verdict<S>,
}

/// Running `sup_n sum_{k<=n} |c_{nk}|` under the policy.
pub fn dual_norm<S: Field>(
    w: &Weights<S>,
    a: &dyn Sequence<S>,
    policy: &TruncationPolicy,
    variant: Variant,
) -> DualNormValue<S> {
    let mut kernel = RowKernel::new(w, Box::new(a));
    let mut per_n = Vec::new();
    let verdict = policy.scan_sup_terms(|n| {
        let v = kernel.abs_sum(n, variant);
        per_n.push(v.clone());
        v
    });
    let (argmax, sup) = per_n
        .iter()
        .enumerate()
        .fold((0, S::zero()), |(bi, bv), (i, v)| {
            if *v > bv {
                (i, v.clone())
            } else {
                (bi, bv)
            }
        });
    DualNormValue {
        variant,
        per_n,
        sup,
        argmax,
        verdict,
    }
}

/// Norm of the functional `x -> sum_k a_k x_k` on the wrapped spaces:
/// the limit of the derived per-`n` values. Exact for finitely supported `a`
/// (the values are constant from the last support index on).
pub fn functional_norm<S: Field>(
    w: &Weights<S>,
    a: &dyn Sequence<S>,
    policy: &TruncationPolicy,
) -> Verdict<S> {
    let mut kernel = RowKernel::new(w, Box::new(a));
    match a.support() {
        Some(last) => {
            let v = kernel.abs_sum(last, Variant::Derived);
            let checkpoints = vec![(last, v.clone()); policy.window];
            Verdict::new(Outcome::Holds, Some(v), checkpoints, None)
        }
        None => policy.scan_limit(LimitTarget::Exists, |n| kernel.abs_sum(n, Variant::Derived)),
    }
}

/// `sup` over finite subsets `K` of the first `n_terms` indices of `|sum_{k in K} a_k|`,
/// i.e. the larger of the positive-part sum and the negative-part sum.
pub fn finite_subset_sup<S: Field>(row: &dyn Sequence<S>, n_terms: usize) -> S {
    let (pos, neg) = (0..n_terms).fold((S::zero(), S::zero()), |(p, m), k| {
        let v = row.term(k);
        if v.is_positive() {
            (p + v, m)
        } else {
            (p, m - v)
        }
    });
    pos.max_of(neg)
}

/// Finite-subset supremum of row `n`, maximized over rows `0..=rows`.
pub fn finite_subset_sup_rows<S: Field>(
    matrix: &crate::matrix::RowMatrix<S>,
    rows: usize,
    n_terms: usize,
) -> S {
    (0..=rows).fold(S::zero(), |acc, n| {
        acc.max_of(finite_subset_sup(&matrix.row(n), n_terms))
    })
}
