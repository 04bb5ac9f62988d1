//! Rule-based infinite sequences.

use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{powi, powu, Field, Rational};

/// Anything that can be evaluated at every index `k >= 0`.
pub trait Sequence<S>: Send + Sync {
    fn term(&self, k: usize) -> S;

    /// Last index that can hold a nonzero term, when that is known.
    fn support(&self) -> Option<usize> {
        None
    }

    fn terms(&self, n: usize) -> Vec<S> {
        (0..=n).map(|k| self.term(k)).collect()
    }
}

impl<S, T: Sequence<S> + ?Sized> Sequence<S> for Arc<T> {
    fn term(&self, k: usize) -> S {
        (**self).term(k)
    }
    fn support(&self) -> Option<usize> {
        (**self).support()
    }
}

impl<S, T: Sequence<S> + ?Sized> Sequence<S> for &T {
    fn term(&self, k: usize) -> S {
        (**self).term(k)
    }
    fn support(&self) -> Option<usize> {
        (**self).support()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tail {
    Zeros,
    RepeatLast,
}

/// Declarative description of a sequence, with a canonical JSON encoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SequenceSpec {
    /// `c, c, c, ...`
    Constant { value: Rational },
    /// `k -> scale * ratio^k`
    Geometric { ratio: Rational, scale: Rational },
    /// `k -> (k + 1)^exponent`
    Power { exponent: i64 },
    /// `e^(index)`
    Unit { index: usize },
    /// Finite prefix followed by a tail rule.
    Explicit { values: Vec<Rational>, tail: Tail },
}

impl SequenceSpec {
    pub fn constant(c: impl Into<Rational>) -> Self {
        SequenceSpec::Constant { value: c.into() }
    }

    pub fn ones() -> Self {
        SequenceSpec::constant(1)
    }

    pub fn zero() -> Self {
        SequenceSpec::constant(0)
    }

    pub fn geometric(ratio: impl Into<Rational>, scale: impl Into<Rational>) -> Self {
        SequenceSpec::Geometric {
            ratio: ratio.into(),
            scale: scale.into(),
        }
    }

    pub fn power(exponent: i64) -> Self {
        SequenceSpec::Power { exponent }
    }

    pub fn unit(index: usize) -> Self {
        SequenceSpec::Unit { index }
    }

    pub fn explicit(values: Vec<Rational>, tail: Tail) -> Self {
        SequenceSpec::Explicit { values, tail }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SequenceSpec::Explicit { values, .. } if values.is_empty() => Err(
                Error::InvalidSequence("explicit sequence needs at least one value".into()),
            ),
            SequenceSpec::Geometric { ratio, .. } if ratio.0.is_zero() => Err(
                Error::InvalidSequence("geometric ratio must be nonzero".into()),
            ),
            _ => Ok(()),
        }
    }

    pub fn eval<S: Field>(&self, k: usize) -> S {
        match self {
            SequenceSpec::Constant { value } => value.get(),
            SequenceSpec::Geometric { ratio, scale } => {
                scale.get::<S>() * powu(&ratio.get::<S>(), k)
            }
            SequenceSpec::Power { exponent } => powi(&S::from_i64(k as i64 + 1), *exponent),
            SequenceSpec::Unit { index } => {
                if k == *index {
                    S::one()
                } else {
                    S::zero()
                }
            }
            SequenceSpec::Explicit { values, tail } => match values.get(k) {
                Some(v) => v.get(),
                None => match tail {
                    Tail::Zeros => S::zero(),
                    Tail::RepeatLast => values.last().map(Rational::get).unwrap_or_else(S::zero),
                },
            },
        }
    }

    /// Last index holding a possibly nonzero term.
    pub fn last_nonzero(&self) -> Option<usize> {
        match self {
            SequenceSpec::Constant { value } if value.0.is_zero() => Some(0),
            SequenceSpec::Geometric { scale, .. } if scale.0.is_zero() => Some(0),
            SequenceSpec::Unit { index } => Some(*index),
            SequenceSpec::Explicit { values, tail } => {
                let tail_zero =
                    matches!(tail, Tail::Zeros) || values.last().map_or(true, |v| v.0.is_zero());
                if tail_zero {
                    Some(values.iter().rposition(|v| !v.0.is_zero()).unwrap_or(0))
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// True when every term is strictly positive. Decided from the rule alone.
    pub fn is_everywhere_positive(&self) -> std::result::Result<(), usize> {
        match self {
            SequenceSpec::Constant { value } => value.is_positive().then_some(()).ok_or(0),
            SequenceSpec::Geometric { ratio, scale } => {
                if !scale.is_positive() {
                    Err(0)
                } else if !ratio.is_positive() {
                    Err(1)
                } else {
                    Ok(())
                }
            }
            SequenceSpec::Power { .. } => Ok(()),
            SequenceSpec::Unit { index } => Err(if *index == 0 { 1 } else { 0 }),
            SequenceSpec::Explicit { values, tail } => {
                if let Some(i) = values.iter().position(|v| !v.is_positive()) {
                    return Err(i);
                }
                match tail {
                    Tail::Zeros => Err(values.len()),
                    Tail::RepeatLast if values.is_empty() => Err(0),
                    Tail::RepeatLast => Ok(()),
                }
            }
        }
    }
}

impl<S: Field> Sequence<S> for SequenceSpec {
    fn term(&self, k: usize) -> S {
        self.eval(k)
    }

    fn support(&self) -> Option<usize> {
        self.last_nonzero()
    }
}

/// Finitely supported sequence given by its leading terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Finite<S>(pub Vec<S>);

impl<S: Field> Finite<S> {
    pub fn unit(index: usize) -> Self {
        let mut v = vec![S::zero(); index + 1];
        v[index] = S::one();
        Finite(v)
    }
}

impl<S: Field> Sequence<S> for Finite<S> {
    fn term(&self, k: usize) -> S {
        self.0.get(k).cloned().unwrap_or_else(S::zero)
    }

    fn support(&self) -> Option<usize> {
        Some(self.0.len().saturating_sub(1))
    }
}

/// Sequence defined by a closure.
pub struct FnSequence<S> {
    rule: Arc<dyn Fn(usize) -> S + Send + Sync>,
    support: Option<usize>,
}

impl<S> FnSequence<S> {
    pub fn new(rule: impl Fn(usize) -> S + Send + Sync + 'static) -> Self {
        FnSequence {
            rule: Arc::new(rule),
            support: None,
        }
    }

    pub fn with_support(mut self, last: usize) -> Self {
        self.support = Some(last);
        self
    }
}

impl<S: Field> Sequence<S> for FnSequence<S> {
    fn term(&self, k: usize) -> S {
        (self.rule)(k)
    }

    fn support(&self) -> Option<usize> {
        self.support
    }
}

/// `alpha * x + beta * y`, termwise.
pub struct Combination<S, X, Y> {
    pub alpha: S,
    pub x: X,
    pub beta: S,
    pub y: Y,
}

impl<S: Field, X: Sequence<S>, Y: Sequence<S>> Sequence<S> for Combination<S, X, Y> {
    fn term(&self, k: usize) -> S {
        self.alpha.clone() * self.x.term(k) + self.beta.clone() * self.y.term(k)
    }

    fn support(&self) -> Option<usize> {
        Some(self.x.support()?.max(self.y.support()?))
    }
}

/// Largest absolute term among the first `n + 1` terms.
pub fn max_abs<S: Field>(x: &dyn Sequence<S>, n: usize) -> S {
    (0..=n).fold(S::zero(), |m, k| m.max_of(x.term(k).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(p: i64) -> Q {
        Q::from_i64(p)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(SequenceSpec::unit(1).eval::<Q>(1), q(1));
        assert_eq!(SequenceSpec::unit(1).eval::<Q>(0), q(0));
        assert_eq!(SequenceSpec::geometric(3, 1).eval::<Q>(4), q(81));
        let ex = SequenceSpec::explicit(vec![5.into(), 7.into()], Tail::Zeros);
        assert_eq!(ex.eval::<Q>(2), q(0));
        assert_eq!(ex.eval::<Q>(1), q(7));
        let rep = SequenceSpec::explicit(vec![5.into(), 7.into()], Tail::RepeatLast);
        assert_eq!(rep.eval::<Q>(100), q(7));
        assert_eq!(SequenceSpec::power(2).eval::<Q>(3), q(16));
        assert_eq!(
            SequenceSpec::power(-1).eval::<Q>(3),
            Q::new(1.into(), 4.into())
        );
    }

    #[test]
    fn json_encoding_matches_canonical_form() {
        let g: SequenceSpec =
            serde_json::from_str(r#"{"kind":"geometric","ratio":"3","scale":"1"}"#).unwrap();
        assert_eq!(g, SequenceSpec::geometric(3, 1));
        let u: SequenceSpec = serde_json::from_str(r#"{"kind":"unit","index":1}"#).unwrap();
        assert_eq!(u, SequenceSpec::unit(1));
        let e: SequenceSpec =
            serde_json::from_str(r#"{"kind":"explicit","values":["5","7"],"tail":"zeros"}"#)
                .unwrap();
        assert_eq!(
            e,
            SequenceSpec::explicit(vec![5.into(), 7.into()], Tail::Zeros)
        );
        assert_eq!(
            serde_json::to_string(&g).unwrap(),
            r#"{"kind":"geometric","ratio":"3","scale":"1"}"#
        );
        assert!(serde_json::from_str::<SequenceSpec>(r#"{"kind":"bogus"}"#).is_err());
    }

    #[test]
    fn supports() {
        assert_eq!(SequenceSpec::unit(4).last_nonzero(), Some(4));
        assert_eq!(SequenceSpec::ones().last_nonzero(), None);
        assert_eq!(SequenceSpec::zero().last_nonzero(), Some(0));
        let ex = SequenceSpec::explicit(vec![1.into(), 2.into(), 0.into()], Tail::Zeros);
        assert_eq!(ex.last_nonzero(), Some(1));
    }

    #[test]
    fn float_mode_evaluation() {
        let v: f64 = SequenceSpec::geometric(Rational::new(1, 2), 3).eval(2);
        assert_eq!(v, 0.75);
    }

    #[test]
    fn validation() {
        assert!(SequenceSpec::explicit(vec![], Tail::Zeros)
            .validate()
            .is_err());
        assert!(SequenceSpec::geometric(0, 1).validate().is_err());
        assert!(SequenceSpec::ones().validate().is_ok());
    }

    proptest::proptest! {
        #[test]
        fn evaluation_is_pure(p in -5i64..5, r in 1i64..6, k in 0usize..64) {
            let spec = SequenceSpec::geometric(Rational::new(r, 2), p);
            let a: Q = spec.eval(k);
            let b: Q = spec.eval(k);
            proptest::prop_assert_eq!(a, b);
            let fa: f64 = spec.eval(k);
            let fb: f64 = spec.eval(k);
            proptest::prop_assert_eq!(fa.to_bits(), fb.to_bits());
        }
    }
}
