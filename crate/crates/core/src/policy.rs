//! Finite-window estimation of suprema and limits over infinite index sets.
//!
//! Every infinite `sup_n` or `lim_n` is evaluated on an increasing list of
//! checkpoint indices. A quantity is declared stable once the last `window`
//! checkpoints agree within `tol`, divergent once it exceeds
//! `divergence_threshold`, and left undecided when `n_max` is reached first.

use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Field, Mode, Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub n_start: usize,
    pub n_max: usize,
    pub growth: f64,
    pub window: usize,
    pub tol: Rational,
    pub divergence_threshold: Rational,
}

impl TruncationPolicy {
    /// Defaults: checkpoints 8, 16, ..., 4096; three stable checkpoints; tolerance
    /// `0` in exact mode and `1e-9` in float mode; divergence at `1e12`.
    pub fn for_mode(mode: Mode) -> Self {
        TruncationPolicy {
            n_start: 8,
            n_max: 4096,
            growth: 2.0,
            window: 3,
            tol: match mode {
                Mode::Exact => Rational::integer(0),
                Mode::Float => Rational::new(1, 1_000_000_000),
            },
            divergence_threshold: Rational::integer(1_000_000_000_000),
        }
    }

    pub fn exact() -> Self {
        Self::for_mode(Mode::Exact)
    }

    pub fn float() -> Self {
        Self::for_mode(Mode::Float)
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn with_tol(mut self, tol: Rational) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_divergence_threshold(mut self, threshold: Rational) -> Self {
        self.divergence_threshold = threshold;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidPolicy(m.to_string()));
        if self.n_start > self.n_max {
            return fail("n_start must not exceed n_max");
        }
        if !(self.growth > 1.0) || !self.growth.is_finite() {
            return fail("growth must be a finite factor greater than 1");
        }
        if self.window < 2 {
            return fail("window must be at least 2");
        }
        if self.tol.0 < BigRational::from_integer(0.into()) {
            return fail("tol must be nonnegative");
        }
        if !self.divergence_threshold.is_positive() {
            return fail("divergence_threshold must be positive");
        }
        Ok(())
    }

    /// Increasing checkpoint indices from `n_start` up to and including `n_max`.
    pub fn checkpoints(&self) -> Vec<usize> {
        let mut out = vec![self.n_start];
        let mut c = self.n_start;
        while c < self.n_max {
            let grown = (c as f64 * self.growth).ceil() as usize;
            c = grown.max(c + 1).min(self.n_max);
            out.push(c);
        }
        out
    }

    /// The same policy with checkpoints restricted to indices `> s`. When no
    /// checkpoint is left the single checkpoint `s + 1` remains.
    pub fn after(&self, s: usize) -> TruncationPolicy {
        let mut out = self.clone();
        match self.checkpoints().into_iter().find(|&c| c > s) {
            Some(c) => out.n_start = c,
            None => {
                out.n_start = s + 1;
                out.n_max = s + 1;
            }
        }
        out
    }

    fn tol_as<S: Field>(&self) -> S {
        self.tol.get()
    }

    fn threshold_as<S: Field>(&self) -> S {
        self.divergence_threshold.get()
    }

    /// Windowed supremum. `sup_upto(c)` returns the supremum over the scan
    /// region indexed up to checkpoint `c`; it must be nondecreasing in `c`.
    pub fn scan_sup<S: Field>(&self, mut sup_upto: impl FnMut(usize) -> S) -> Verdict<S> {
        let tol = self.tol_as::<S>();
        let threshold = self.threshold_as::<S>();
        let mut checkpoints: Vec<(usize, S)> = Vec::new();
        for c in self.checkpoints() {
            let v = sup_upto(c);
            checkpoints.push((c, v));
            let last = &checkpoints.last().expect("just pushed").1;
            if checkpoints.len() < self.window {
                continue;
            }
            if *last > threshold {
                return Verdict::new(
                    Outcome::Fails,
                    Some(last.clone()),
                    checkpoints,
                    Some("supremum exceeds the divergence threshold".into()),
                );
            }
            if spread(&checkpoints[checkpoints.len() - self.window..]) <= tol {
                let est = last.clone();
                return Verdict::new(Outcome::Holds, Some(est), checkpoints, None);
            }
        }
        let est = checkpoints.last().map(|(_, v)| v.clone());
        Verdict::new(
            Outcome::Inconclusive,
            est,
            checkpoints,
            Some(format!(
                "running supremum did not stabilize over {} checkpoints before n_max = {}",
                self.window, self.n_max
            )),
        )
    }

    /// Windowed supremum of `values(0), values(1), ...`; `values` is called
    /// once per index in increasing order.
    pub fn scan_sup_terms<S: Field>(&self, mut values: impl FnMut(usize) -> S) -> Verdict<S> {
        let mut next = 0usize;
        let mut running: Option<S> = None;
        self.scan_sup(|c| {
            while next <= c {
                let v = values(next);
                running = Some(match running.take() {
                    Some(m) => m.max_of(v),
                    None => v,
                });
                next += 1;
            }
            running.clone().expect("at least one index scanned")
        })
    }

    /// Windowed limit of `values(0), values(1), ...`; `values` is called once
    /// per index in increasing order.
    pub fn scan_limit<S: Field>(
        &self,
        target: LimitTarget,
        mut values: impl FnMut(usize) -> S,
    ) -> Verdict<S> {
        let tol = self.tol_as::<S>();
        let threshold = self.threshold_as::<S>();
        let mut checkpoints: Vec<(usize, S)> = Vec::new();
        let mut blocks: Vec<(S, S)> = Vec::new();
        let mut next = 0usize;
        let mut diverged = false;
        for c in self.checkpoints() {
            let mut lo: Option<S> = None;
            let mut hi: Option<S> = None;
            let mut last = None;
            while next <= c {
                let v = values(next);
                if v.abs() > threshold {
                    diverged = true;
                }
                lo = Some(match lo.take() {
                    Some(m) => m.min_of(v.clone()),
                    None => v.clone(),
                });
                hi = Some(match hi.take() {
                    Some(m) => m.max_of(v.clone()),
                    None => v.clone(),
                });
                last = Some(v);
                next += 1;
            }
            let (Some(lo), Some(hi), Some(last)) = (lo, hi, last) else {
                continue;
            };
            blocks.push((lo, hi));
            checkpoints.push((c, last.clone()));
            if checkpoints.len() < self.window {
                continue;
            }
            if diverged {
                return Verdict::new(
                    Outcome::Fails,
                    Some(last),
                    checkpoints,
                    Some("terms exceed the divergence threshold".into()),
                );
            }
            let recent = &blocks[blocks.len() - self.window..];
            let lo = recent
                .iter()
                .map(|b| b.0.clone())
                .reduce(Field::min_of)
                .expect("window >= 2");
            let hi = recent
                .iter()
                .map(|b| b.1.clone())
                .reduce(Field::max_of)
                .expect("window >= 2");
            if hi.clone() - lo.clone() <= tol {
                return match target {
                    LimitTarget::Exists => {
                        Verdict::new(Outcome::Holds, Some(last), checkpoints, None)
                    }
                    LimitTarget::Zero => {
                        if lo.abs() <= tol && hi.abs() <= tol {
                            Verdict::new(Outcome::Holds, Some(last), checkpoints, None)
                        } else {
                            Verdict::new(
                                Outcome::Fails,
                                Some(last),
                                checkpoints,
                                Some("terms stabilize at a nonzero limit".into()),
                            )
                        }
                    }
                };
            }
        }
        let est = checkpoints.last().map(|(_, v)| v.clone());
        Verdict::new(
            Outcome::Inconclusive,
            est,
            checkpoints,
            Some(format!(
                "terms did not settle within tol over {} checkpoints before n_max = {}",
                self.window, self.n_max
            )),
        )
    }
}

fn spread<S: Field>(points: &[(usize, S)]) -> S {
    let lo = points.iter().map(|p| p.1.clone()).reduce(Field::min_of);
    let hi = points.iter().map(|p| p.1.clone()).reduce(Field::max_of);
    match (lo, hi) {
        (Some(lo), Some(hi)) => hi - lo,
        _ => S::zero(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitTarget {
    /// The limit must exist and equal zero.
    Zero,
    /// The limit must exist.
    Exists,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Holds,
    Fails,
    Inconclusive,
}

impl Outcome {
    /// Conjunction: any failure fails, otherwise any undecided part is undecided.
    pub fn and(self, other: Outcome) -> Outcome {
        match (self, other) {
            (Outcome::Fails, _) | (_, Outcome::Fails) => Outcome::Fails,
            (Outcome::Inconclusive, _) | (_, Outcome::Inconclusive) => Outcome::Inconclusive,
            _ => Outcome::Holds,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Outcome::Holds => "Holds",
            Outcome::Fails => "Fails",
            Outcome::Inconclusive => "Inconclusive",
        };
        f.write_str(s)
    }
}

/// Three-valued result of a windowed estimate, with its evidence trail.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict<S> {
    pub outcome: Outcome,
    pub estimate: Option<S>,
    pub checkpoints: Vec<(usize, S)>,
    /// Which criterion was not met (undecided or failed verdicts).
    pub reason: Option<String>,
}

impl<S: Field> Verdict<S> {
    pub fn new(
        outcome: Outcome,
        estimate: Option<S>,
        checkpoints: Vec<(usize, S)>,
        reason: Option<String>,
    ) -> Self {
        Verdict {
            outcome,
            estimate,
            checkpoints,
            reason,
        }
    }

    pub fn holds(&self) -> bool {
        self.outcome == Outcome::Holds
    }

    pub fn with_reason(mut self, reason: impl Into<String>) -> Self {
        self.reason = Some(reason.into());
        self
    }

    pub fn report(&self) -> VerdictReport {
        VerdictReport {
            outcome: self.outcome,
            estimate: self.estimate.as_ref().map(Field::to_scalar),
            checkpoints: self
                .checkpoints
                .iter()
                .map(|(index, v)| Checkpoint {
                    index: *index,
                    value: v.to_scalar(),
                })
                .collect(),
            reason: self.reason.clone(),
        }
    }
}

/// Mode-erased, serializable view of a [`Verdict`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictReport {
    pub outcome: Outcome,
    pub estimate: Option<Scalar>,
    pub checkpoints: Vec<Checkpoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Checkpoint {
    pub index: usize,
    pub value: Scalar,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> TruncationPolicy {
        TruncationPolicy {
            n_start: 4,
            n_max: 256,
            growth: 2.0,
            window: 3,
            tol: Rational::integer(0),
            divergence_threshold: Rational::integer(1000),
        }
    }

    #[test]
    fn checkpoint_schedule() {
        assert_eq!(
            TruncationPolicy::exact().checkpoints(),
            vec![8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096]
        );
        let p = TruncationPolicy {
            n_start: 3,
            n_max: 10,
            growth: 1.5,
            ..small()
        };
        assert_eq!(p.checkpoints(), vec![3, 5, 8, 10]);
    }

    #[test]
    fn policy_validation() {
        assert!(TruncationPolicy::exact().validate().is_ok());
        let mut p = small();
        p.window = 1;
        assert!(p.validate().is_err());
        let mut p = small();
        p.growth = 1.0;
        assert!(p.validate().is_err());
        let mut p = small();
        p.n_start = 1000;
        assert!(p.validate().is_err());
        let mut p = small();
        p.tol = Rational::integer(-1);
        assert!(p.validate().is_err());
    }

    #[test]
    fn bounded_sup_holds() {
        let v = small().scan_sup_terms(|n| if n == 2 { 5.0 } else { 1.0 });
        assert_eq!(v.outcome, Outcome::Holds);
        assert_eq!(v.estimate, Some(5.0));
        assert!(v.checkpoints.len() >= 3);
    }

    #[test]
    fn growing_sup_fails() {
        let v = small().scan_sup_terms(|n| (n * n) as f64);
        assert_eq!(v.outcome, Outcome::Fails);
        assert!(v.checkpoints.len() >= 3);
    }

    #[test]
    fn slowly_growing_sup_is_inconclusive() {
        let v = small().scan_sup_terms(|n| (n as f64).ln_1p());
        assert_eq!(v.outcome, Outcome::Inconclusive);
        assert!(v.reason.is_some());
    }

    #[test]
    fn limits() {
        let p = small();
        assert_eq!(
            p.scan_limit(LimitTarget::Zero, |n| if n < 3 { 1.0 } else { 0.0 })
                .outcome,
            Outcome::Holds
        );
        let v = p.scan_limit(LimitTarget::Zero, |_| 2.0);
        assert_eq!(v.outcome, Outcome::Fails);
        let v = p.scan_limit(LimitTarget::Exists, |_| 2.0);
        assert_eq!((v.outcome, v.estimate), (Outcome::Holds, Some(2.0)));
        let v = p.scan_limit(LimitTarget::Exists, |n| if n % 2 == 0 { 1.0 } else { -1.0 });
        assert_eq!(v.outcome, Outcome::Inconclusive);
        let v = p.scan_limit(LimitTarget::Exists, |n| (n * n) as f64);
        assert_eq!(v.outcome, Outcome::Fails);
    }

    #[test]
    fn outcome_conjunction() {
        use Outcome::*;
        assert_eq!(Holds.and(Holds), Holds);
        assert_eq!(Holds.and(Inconclusive), Inconclusive);
        assert_eq!(Inconclusive.and(Fails), Fails);
    }
}
