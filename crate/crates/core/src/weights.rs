//! Positive weight sequences `q` and their partial sums `Q`.

use std::sync::RwLock;

use crate::error::{Error, Result};
use crate::scalar::Field;
use crate::sequence::SequenceSpec;

#[derive(Debug, Default)]
struct Memo<S> {
    q: Vec<S>,
    big_q: Vec<S>,
}

/// Weight sequence `q_k > 0` with memoized partial sums `Q_n = q_0 + ... + q_n`.
///
/// The memo grows on demand behind a lock; concurrent readers either see an
/// already filled prefix or fill it identically.
#[derive(Debug)]
pub struct Weights<S> {
    spec: SequenceSpec,
    memo: RwLock<Memo<S>>,
}

impl<S: Field> Weights<S> {
    /// Rejects any rule that is not strictly positive at every index.
    pub fn new(spec: SequenceSpec) -> Result<Self> {
        spec.validate()
            .map_err(|e| Error::InvalidWeights(e.to_string()))?;
        spec.is_everywhere_positive()
            .map_err(|index| Error::NonPositiveWeight { index })?;
        Ok(Weights {
            spec,
            memo: RwLock::new(Memo {
                q: Vec::new(),
                big_q: Vec::new(),
            }),
        })
    }

    pub fn spec(&self) -> &SequenceSpec {
        &self.spec
    }

    fn ensure(&self, n: usize) {
        if self.memo.read().expect("weights memo poisoned").q.len() > n {
            return;
        }
        let mut memo = self.memo.write().expect("weights memo poisoned");
        while memo.q.len() <= n {
            let k = memo.q.len();
            let qk: S = self.spec.eval(k);
            let next = match memo.big_q.last() {
                Some(prev) => prev.clone() + qk.clone(),
                None => qk.clone(),
            };
            memo.q.push(qk);
            memo.big_q.push(next);
        }
    }

    /// `q_k`.
    pub fn q(&self, k: usize) -> S {
        self.ensure(k);
        self.memo.read().expect("weights memo poisoned").q[k].clone()
    }

    /// `Q_n`.
    pub fn big_q(&self, n: usize) -> S {
        self.ensure(n);
        self.memo.read().expect("weights memo poisoned").big_q[n].clone()
    }

    /// `Q_0, ..., Q_n`.
    pub fn partial_sums(&self, n: usize) -> Vec<S> {
        self.ensure(n);
        self.memo.read().expect("weights memo poisoned").big_q[..=n].to_vec()
    }

    /// `Q_k / q_k`.
    pub fn ratio(&self, k: usize) -> S {
        self.big_q(k) / self.q(k)
    }

    /// `Q_k (1/q_{k+1} - 1/q_k)`, the off-diagonal coefficient of the composed inverse.
    pub fn diff_coeff(&self, k: usize) -> S {
        self.ensure(k + 1);
        let memo = self.memo.read().expect("weights memo poisoned");
        memo.big_q[k].clone() * (S::one() / memo.q[k + 1].clone() - S::one() / memo.q[k].clone())
    }
}

impl<S: Field> Clone for Weights<S> {
    fn clone(&self) -> Self {
        let memo = self.memo.read().expect("weights memo poisoned");
        Weights {
            spec: self.spec.clone(),
            memo: RwLock::new(Memo {
                q: memo.q.clone(),
                big_q: memo.big_q.clone(),
            }),
        }
    }
}

/// `Q_0..=Q_n` for the weights described by `spec`.
pub fn partial_sums<S: Field>(spec: &SequenceSpec, n: usize) -> Result<Vec<S>> {
    Ok(Weights::<S>::new(spec.clone())?.partial_sums(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::Tail;
    use num_rational::BigRational;
    use std::sync::Arc;

    type Q = BigRational;

    fn ints(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&x| Q::from_i64(x)).collect()
    }

    #[test]
    fn partial_sum_examples() {
        assert_eq!(
            partial_sums::<Q>(&SequenceSpec::geometric(3, 1), 3).unwrap(),
            ints(&[1, 4, 13, 40])
        );
        assert_eq!(
            partial_sums::<Q>(&SequenceSpec::ones(), 4).unwrap(),
            ints(&[1, 2, 3, 4, 5])
        );
        let bad = SequenceSpec::explicit(vec![1.into(), (-1).into()], Tail::RepeatLast);
        assert_eq!(
            partial_sums::<Q>(&bad, 1).unwrap_err(),
            Error::NonPositiveWeight { index: 1 }
        );
    }

    #[test]
    fn rejects_non_positive_families() {
        assert!(Weights::<Q>::new(SequenceSpec::unit(0)).is_err());
        assert!(Weights::<Q>::new(SequenceSpec::zero()).is_err());
        assert!(Weights::<Q>::new(SequenceSpec::geometric(-2, 1)).is_err());
        assert!(Weights::<Q>::new(SequenceSpec::explicit(vec![1.into()], Tail::Zeros)).is_err());
        assert!(Weights::<Q>::new(SequenceSpec::power(-3)).is_ok());
    }

    #[test]
    fn diff_coeff_geometric() {
        let w = Weights::<Q>::new(SequenceSpec::geometric(3, 1)).unwrap();
        // Q_0 (1/3 - 1) = -2/3
        assert_eq!(w.diff_coeff(0), Q::new((-2).into(), 3.into()));
        assert_eq!(w.ratio(1), Q::new(4.into(), 3.into()));
    }

    #[test]
    fn concurrent_fill_is_consistent() {
        let w = Arc::new(Weights::<Q>::new(SequenceSpec::power(1)).unwrap());
        let handles: Vec<_> = (0..4)
            .map(|t| {
                let w = Arc::clone(&w);
                std::thread::spawn(move || w.big_q(40 + 10 * t))
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        // Q_n = (n+1)(n+2)/2 for q_k = k+1.
        for n in 0..=70 {
            assert_eq!(w.big_q(n), Q::from_i64(((n + 1) * (n + 2) / 2) as i64));
        }
    }

    proptest::proptest! {
        #[test]
        fn consecutive_partial_sums_differ_by_q(r in 1i64..5, s in 1i64..5, n in 0usize..60) {
            let w = Weights::<Q>::new(SequenceSpec::geometric(crate::scalar::Rational::new(r, 2), s)).unwrap();
            proptest::prop_assert_eq!(w.big_q(n + 1) - w.big_q(n), w.q(n + 1));
            proptest::prop_assert!(w.big_q(n + 1) > w.big_q(n));
            proptest::prop_assert_eq!(w.big_q(0), w.q(0));
        }
    }
}
