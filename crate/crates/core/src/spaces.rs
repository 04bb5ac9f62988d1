//! The matrix domains of `c0`, `c` and `l_inf` under the weighted mean of
//! backward differences, with their norm, basis and membership tests.
//!
//! For a sequence `x` the transform is
//!
//! ```text
//! tau_n = (1/Q_n) * sum_{k<=n} q_k (x_{k-1} - x_k),   x_{-1} = 0,
//! ```
//!
//! and `x` lies in the wrapped space over `X` exactly when `tau(x)` lies in `X`.
//! The norm is `sup_n |tau_n|`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::policy::{LimitTarget, TruncationPolicy, Verdict};
use crate::scalar::Field;
use crate::scalar::Rational;
use crate::sequence::{Sequence, SequenceSpec, Tail};
use crate::triangle::{make_composed_inverse, Transformed};
use crate::weights::Weights;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Base {
    C0,
    C,
    Linf,
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Base::C0 => "c0",
            Base::C => "c",
            Base::Linf => "linf",
        })
    }
}

/// A base space, either plain or wrapped as its weighted-difference domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceTag {
    pub base: Base,
    pub wrapped: bool,
}

impl SpaceTag {
    pub fn wrapped(base: Base) -> Self {
        SpaceTag {
            base,
            wrapped: true,
        }
    }

    pub fn plain(base: Base) -> Self {
        SpaceTag {
            base,
            wrapped: false,
        }
    }
}

impl fmt::Display for SpaceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.wrapped {
            write!(f, "wrapped {}", self.base)
        } else {
            write!(f, "{}", self.base)
        }
    }
}

/// `tau_0..=tau_N` of a sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct TauSequence<S>(pub Vec<S>);

impl<S: Field> TauSequence<S> {
    pub fn values(&self) -> &[S] {
        &self.0
    }
}

/// Streaming evaluation of `tau_n` for increasing `n`.
pub struct TauStream<'a, S> {
    w: &'a Weights<S>,
    x: &'a dyn Sequence<S>,
    n: usize,
    prev_x: S,
    acc: S,
}

impl<'a, S: Field> TauStream<'a, S> {
    pub fn new(w: &'a Weights<S>, x: &'a dyn Sequence<S>) -> Self {
        TauStream {
            w,
            x,
            n: 0,
            prev_x: S::zero(),
            acc: S::zero(),
        }
    }
}

impl<S: Field> Iterator for TauStream<'_, S> {
    type Item = S;

    fn next(&mut self) -> Option<S> {
        let xn = self.x.term(self.n);
        self.acc = self.acc.clone() + self.w.q(self.n) * (self.prev_x.clone() - xn.clone());
        let tau = self.acc.clone() / self.w.big_q(self.n);
        self.prev_x = xn;
        self.n += 1;
        Some(tau)
    }
}

pub fn tau_transform<S: Field>(w: &Weights<S>, x: &dyn Sequence<S>, n: usize) -> TauSequence<S> {
    TauSequence(TauStream::new(w, x).take(n + 1).collect())
}

/// `sup_n |tau_n(x)|` with its stabilization verdict.
pub fn space_norm<S: Field>(
    w: &Weights<S>,
    x: &dyn Sequence<S>,
    policy: &TruncationPolicy,
) -> (S, Verdict<S>) {
    let mut tau = TauStream::new(w, x);
    let verdict = policy.scan_sup_terms(|_| tau.next().expect("endless stream").abs());
    (verdict.estimate.clone().unwrap_or_else(S::zero), verdict)
}

/// Column `k` of the composed inverse: the basis element whose transform is `e^(k)`.
///
/// Term `n` is `0` for `n < k`, `-Q_k/q_k` at `n = k` and `Q_k (1/q_{k+1} - 1/q_k)` after.
pub fn basis_vector<S: Field>(w: &Weights<S>, k: usize) -> SequenceSpec {
    let exact = |v: S| Rational(v.to_rational().expect("weights are finite"));
    let mut values = vec![Rational::integer(0); k];
    values.push(exact(-w.ratio(k)));
    values.push(exact(w.diff_coeff(k)));
    SequenceSpec::explicit(values, Tail::RepeatLast)
}

/// The sequence whose transform is `tau`, i.e. the composed inverse applied to `tau`.
pub fn preimage<S: Field>(w: &Arc<Weights<S>>, tau: Arc<dyn Sequence<S>>) -> Transformed<S> {
    Transformed::new(make_composed_inverse(w), tau)
}

/// The element with transform `e = (1, 1, ...)`, completing the basis for the convergent domain.
pub fn limit_basis_vector<S: Field>(w: &Arc<Weights<S>>) -> Transformed<S> {
    preimage(w, Arc::new(SequenceSpec::ones()))
}

/// Coefficients of `x` in the basis and the quality of the truncated expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation<S> {
    /// `lambda_k = tau_k(x)` for `k <= n_terms`.
    pub lambda: Vec<S>,
    /// Limit of `tau(x)`, present only once convergence of the transform is established.
    pub limit: Option<S>,
    pub limit_verdict: Option<Verdict<S>>,
    /// `max_{n <= check_upto} |x_n - reconstruction_n|`.
    pub residual: S,
}

/// Expands `x` as `sum_{k<=n_terms} lambda_k s^(k)` (target `c0`) or as
/// `l s^(-1) + sum_{k<=n_terms} (lambda_k - l) s^(k)` (target `c`), and measures
/// the reconstruction error on indices `0..=check_upto`.
pub fn coefficients_and_reconstruct<S: Field>(
    w: &Arc<Weights<S>>,
    x: &dyn Sequence<S>,
    n_terms: usize,
    check_upto: usize,
    target: Base,
    policy: &TruncationPolicy,
) -> Representation<S> {
    let lambda = tau_transform(w, x, n_terms).0;
    let (limit, limit_verdict) = match target {
        Base::C => {
            let v = space_membership(w, x, SpaceTag::wrapped(Base::C), policy);
            (v.holds().then(|| v.estimate.clone()).flatten(), Some(v))
        }
        Base::C0 | Base::Linf => (None, None),
    };
    let basis = make_composed_inverse(w);
    let l = limit.clone().unwrap_or_else(S::zero);
    let mut residual = S::zero();
    // The l * s^(-1) part contributes l * sum_{k<=n} M(n, k) at index n.
    for n in 0..=check_upto {
        let mut rec = S::zero();
        for k in 0..=n {
            let m = basis.entry(n, k);
            let coeff = if k <= n_terms {
                lambda[k].clone()
            } else {
                l.clone()
            };
            rec = rec + coeff * m;
        }
        residual = residual.max_of((x.term(n) - rec).abs());
    }
    Representation {
        lambda,
        limit,
        limit_verdict,
        residual,
    }
}

/// Windowed membership test of `x` in the tagged space.
pub fn space_membership<S: Field>(
    w: &Weights<S>,
    x: &dyn Sequence<S>,
    tag: SpaceTag,
    policy: &TruncationPolicy,
) -> Verdict<S> {
    let mut tau = TauStream::new(w, x);
    let mut value = |n: usize| {
        if tag.wrapped {
            tau.next().expect("endless stream")
        } else {
            x.term(n)
        }
    };
    match tag.base {
        Base::C0 => policy.scan_limit(LimitTarget::Zero, value),
        Base::C => policy.scan_limit(LimitTarget::Exists, value),
        Base::Linf => policy.scan_sup_terms(|n| value(n).abs()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::Outcome;
    use crate::sequence::{Combination, Finite, FnSequence};
    use crate::triangle::{apply, make_composed};
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(p: i64, d: i64) -> Q {
        Q::new(p.into(), d.into())
    }

    fn families() -> Vec<Arc<Weights<Q>>> {
        [
            SequenceSpec::ones(),
            SequenceSpec::geometric(2, 1),
            SequenceSpec::geometric(3, 1),
            SequenceSpec::power(1),
        ]
        .into_iter()
        .map(|s| Arc::new(Weights::new(s).unwrap()))
        .collect()
    }

    /// Direct evaluation of the defining double sum.
    fn tau_oracle(w: &Weights<Q>, x: &dyn Sequence<Q>, n: usize) -> Q {
        let mut s = Q::from_i64(0);
        for k in 0..=n {
            let prev = if k == 0 {
                Q::from_i64(0)
            } else {
                x.term(k - 1)
            };
            s = s + w.q(k) * (prev - x.term(k));
        }
        s / w.big_q(n)
    }

    #[test]
    fn tau_examples() {
        for w in families() {
            let t = tau_transform(&w, &SequenceSpec::zero(), 10);
            assert!(t.values().iter().all(|v| *v == q(0, 1)));
        }
        let w = &families()[0];
        let t = tau_transform(w, &SequenceSpec::ones(), 10);
        for (n, v) in t.values().iter().enumerate() {
            assert_eq!(*v, q(-1, n as i64 + 1));
            assert_eq!(*v, tau_oracle(w, &SequenceSpec::ones(), n));
        }
    }

    #[test]
    fn tau_matches_triangle_application() {
        for w in families() {
            let x = SequenceSpec::power(2);
            assert_eq!(
                tau_transform(&w, &x, 20).0,
                apply(&make_composed(&w), &x, 20)
            );
        }
    }

    #[test]
    fn basis_examples() {
        let w = &families()[0];
        let s2 = basis_vector(w, 2);
        for n in 0..10 {
            let expected = if n == 2 { q(-3, 1) } else { q(0, 1) };
            assert_eq!(s2.eval::<Q>(n), expected);
        }
        let g = &families()[2];
        assert_eq!(basis_vector(g, 0).eval::<Q>(1), q(-2, 3));
        for w in families() {
            for k in 0..6 {
                let t = tau_transform(&w, &basis_vector(&w, k), 12);
                for (n, v) in t.values().iter().enumerate() {
                    assert_eq!(*v, if n == k { q(1, 1) } else { q(0, 1) });
                }
            }
        }
    }

    #[test]
    fn norm_examples() {
        let p = TruncationPolicy::exact();
        for w in families() {
            let (v, verdict) = space_norm(&w, &SequenceSpec::zero(), &p);
            assert_eq!((v, verdict.outcome), (q(0, 1), Outcome::Holds));
            let (v, verdict) = space_norm(&w, &SequenceSpec::ones(), &p);
            assert_eq!((v, verdict.outcome), (q(1, 1), Outcome::Holds));
            let (v, _) = space_norm(&w, &basis_vector(&w, 3), &p);
            assert_eq!(v, q(1, 1));
        }
    }

    #[test]
    fn representation_examples() {
        let p = TruncationPolicy::exact();
        for w in families() {
            let s3 = basis_vector(&w, 3);
            let r = coefficients_and_reconstruct(&w, &s3, 8, 40, Base::C0, &p);
            assert_eq!(r.lambda, Finite::<Q>::unit(3).terms(8));
            assert_eq!(r.residual, q(0, 1));
            assert!(r.limit.is_none());

            let x = Combination {
                alpha: q(1, 1),
                x: basis_vector(&w, 0),
                beta: q(2, 1),
                y: basis_vector(&w, 2),
            };
            let r = coefficients_and_reconstruct(&w, &x, 5, 40, Base::C0, &p);
            assert_eq!(
                r.lambda,
                vec![q(1, 1), q(0, 1), q(2, 1), q(0, 1), q(0, 1), q(0, 1)]
            );
            assert_eq!(r.residual, q(0, 1));

            let r = coefficients_and_reconstruct(&w, &SequenceSpec::zero(), 5, 20, Base::C0, &p);
            assert!(r.lambda.iter().all(|v| *v == q(0, 1)));
            assert_eq!(r.residual, q(0, 1));
        }
    }

    #[test]
    fn convergent_representation_reports_limit() {
        let p = TruncationPolicy::exact();
        for w in families() {
            // tau = (5, -1, 2, 2, 2, ...): limit 2.
            let tau = Arc::new(SequenceSpec::explicit(
                vec![5.into(), (-1).into(), 2.into()],
                Tail::RepeatLast,
            ));
            let x = preimage(&w, tau);
            let r = coefficients_and_reconstruct(&w, &x, 4, 40, Base::C, &p);
            assert_eq!(r.limit, Some(q(2, 1)));
            assert_eq!(r.residual, q(0, 1));
            assert_eq!(r.lambda[..3], [q(5, 1), q(-1, 1), q(2, 1)]);
        }
    }

    #[test]
    fn membership_examples() {
        let p = TruncationPolicy::exact();
        for w in families() {
            let v = space_membership(&w, &basis_vector(&w, 4), SpaceTag::wrapped(Base::C0), &p);
            assert_eq!(v.outcome, Outcome::Holds);
            let s_minus = limit_basis_vector(&w);
            let v = space_membership(&w, &s_minus, SpaceTag::wrapped(Base::C), &p);
            assert_eq!((v.outcome, v.estimate), (Outcome::Holds, Some(q(1, 1))));
            let v = space_membership(&w, &s_minus, SpaceTag::wrapped(Base::C0), &p);
            assert_eq!(v.outcome, Outcome::Fails);

            let growth: Arc<dyn Sequence<Q>> =
                Arc::new(FnSequence::new(|n| Q::from_i64(n as i64 + 1)));
            let x = preimage(&w, growth);
            let small = p.clone().with_divergence_threshold(Rational::integer(100));
            let v = space_membership(&w, &x, SpaceTag::wrapped(Base::Linf), &small);
            assert_eq!(v.outcome, Outcome::Fails);
        }
        let plain = space_membership(
            &families()[0],
            &SequenceSpec::unit(2),
            SpaceTag::plain(Base::C0),
            &p,
        );
        assert_eq!(plain.outcome, Outcome::Holds);
    }

    proptest::proptest! {
        #[test]
        fn tau_is_linear(
            xs in proptest::collection::vec(-20i64..20, 1..12),
            ys in proptest::collection::vec(-20i64..20, 1..12),
            a in -5i64..5, b in -5i64..5, fam in 0usize..4,
        ) {
            let w = &families()[fam];
            let x = Finite(xs.iter().map(|&v| Q::from_i64(v)).collect());
            let y = Finite(ys.iter().map(|&v| Q::from_i64(v)).collect());
            let combo = Combination { alpha: Q::from_i64(a), x: x.clone(), beta: Q::from_i64(b), y: y.clone() };
            let lhs = tau_transform(w, &combo, 30).0;
            let tx = tau_transform(w, &x, 30).0;
            let ty = tau_transform(w, &y, 30).0;
            for n in 0..=30 {
                proptest::prop_assert_eq!(
                    lhs[n].clone(),
                    Q::from_i64(a) * tx[n].clone() + Q::from_i64(b) * ty[n].clone()
                );
            }
        }

        #[test]
        fn zero_norm_means_zero_transform(
            xs in proptest::collection::vec(-1i64..=1, 1..4),
            fam in 0usize..4,
        ) {
            let w = &families()[fam];
            let x = Finite(xs.iter().map(|&v| Q::from_i64(v)).collect());
            let (v, verdict) = space_norm(w, &x, &TruncationPolicy::exact());
            if verdict.outcome == Outcome::Holds && v == Q::from_i64(0) {
                let last = verdict.checkpoints.last().unwrap().0;
                proptest::prop_assert!(tau_transform(w, &x, last).0.iter().all(|t| *t == Q::from_i64(0)));
            }
        }
    }
}
