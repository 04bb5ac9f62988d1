//! Infinite lower-triangular matrices given by entry rules.
//!
//! Triangles are never stored densely. Dense views are produced only by
//! [`invert`] and [`Triangle::truncate`] at a caller-chosen size.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::scalar::Field;
use crate::sequence::Sequence;
use crate::weights::Weights;

type Rule<S> = Arc<dyn Fn(usize, usize) -> S + Send + Sync>;

/// Lower-triangular matrix: `entry(n, k)` is zero for `k > n`.
#[derive(Clone)]
pub struct Triangle<S> {
    name: String,
    rule: Rule<S>,
    /// Entries with `n - k > band` vanish.
    band: Option<usize>,
    inverse: Option<Arc<Triangle<S>>>,
}

impl<S> fmt::Debug for Triangle<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Triangle")
            .field("name", &self.name)
            .field("band", &self.band)
            .field("closed_inverse", &self.inverse.is_some())
            .finish()
    }
}

impl<S: Field> Triangle<S> {
    /// `rule` is only ever called with `k <= n`.
    pub fn from_rule(
        name: impl Into<String>,
        rule: impl Fn(usize, usize) -> S + Send + Sync + 'static,
    ) -> Self {
        Triangle {
            name: name.into(),
            rule: Arc::new(rule),
            band: None,
            inverse: None,
        }
    }

    pub fn with_band(mut self, band: usize) -> Self {
        self.band = Some(band);
        self
    }

    pub fn with_inverse(mut self, inverse: Triangle<S>) -> Self {
        self.inverse = Some(Arc::new(inverse));
        self
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn band(&self) -> Option<usize> {
        self.band
    }

    pub fn closed_form_inverse(&self) -> Option<&Triangle<S>> {
        self.inverse.as_deref()
    }

    pub fn entry(&self, n: usize, k: usize) -> S {
        if k > n || self.band.is_some_and(|b| n - k > b) {
            S::zero()
        } else {
            (self.rule)(n, k)
        }
    }

    /// Lowest column index that can be nonzero in row `n`.
    pub fn row_start(&self, n: usize) -> usize {
        self.band.map_or(0, |b| n.saturating_sub(b))
    }

    /// Caches every evaluated entry. Useful when a sup-scan revisits entries
    /// of an expensive composition.
    pub fn memoized(self) -> Self {
        let cache: Arc<RwLock<HashMap<(usize, usize), S>>> = Arc::default();
        let inner = Arc::clone(&self.rule);
        let rule = move |n: usize, k: usize| {
            if let Some(v) = cache.read().expect("memo poisoned").get(&(n, k)) {
                return v.clone();
            }
            let v = inner(n, k);
            cache
                .write()
                .expect("memo poisoned")
                .insert((n, k), v.clone());
            v
        };
        Triangle {
            rule: Arc::new(rule),
            ..self
        }
    }

    /// Dense copy of rows `0..=n`.
    pub fn truncate(&self, n: usize) -> DenseTriangle<S> {
        DenseTriangle {
            rows: (0..=n)
                .map(|i| (0..=i).map(|k| self.entry(i, k)).collect())
                .collect(),
        }
    }

    pub fn scaled(&self, factor: S) -> Triangle<S> {
        let inner = self.clone();
        let mut t = Triangle::from_rule(format!("{factor}*{}", self.name), move |n, k| {
            factor.clone() * inner.entry(n, k)
        });
        t.band = self.band;
        t
    }
}

pub fn identity<S: Field>() -> Triangle<S> {
    let base = Triangle::from_rule("identity", |_, _| S::one()).with_band(0);
    base.clone().with_inverse(base)
}

fn delta_minus_base<S: Field>() -> Triangle<S> {
    Triangle::from_rule(
        "delta-minus",
        |n, k| if n == k { -S::one() } else { S::one() },
    )
    .with_band(1)
}

fn delta_minus_inverse_base<S: Field>() -> Triangle<S> {
    Triangle::from_rule("delta-minus-inverse", |_, _| -S::one())
}

/// Backward difference `x_k -> x_{k-1} - x_k` with `x_{-1} = 0`.
pub fn make_delta_minus<S: Field>() -> Triangle<S> {
    delta_minus_base().with_inverse(delta_minus_inverse_base())
}

/// Inverse of the backward difference: every entry on and below the diagonal is `-1`.
pub fn make_delta_minus_inverse<S: Field>() -> Triangle<S> {
    delta_minus_inverse_base().with_inverse(delta_minus_base())
}

fn riesz_base<S: Field>(w: &Arc<Weights<S>>) -> Triangle<S> {
    let w = Arc::clone(w);
    Triangle::from_rule("riesz", move |n, k| w.q(k) / w.big_q(n))
}

fn riesz_inverse_base<S: Field>(w: &Arc<Weights<S>>) -> Triangle<S> {
    let w = Arc::clone(w);
    Triangle::from_rule("riesz-inverse", move |n, k| {
        if k == n {
            w.big_q(n) / w.q(n)
        } else {
            -(w.big_q(k) / w.q(n))
        }
    })
    .with_band(1)
}

/// Weighted mean: `e(n, k) = q_k / Q_n`.
pub fn make_riesz<S: Field>(w: &Arc<Weights<S>>) -> Triangle<S> {
    riesz_base(w).with_inverse(riesz_inverse_base(w))
}

/// Closed-form inverse of the weighted mean: `Q_n/q_n` on the diagonal,
/// `-Q_{n-1}/q_n` just below it.
pub fn make_riesz_inverse<S: Field>(w: &Arc<Weights<S>>) -> Triangle<S> {
    riesz_inverse_base(w).with_inverse(riesz_base(w))
}

fn composed_inverse_base<S: Field>(w: &Arc<Weights<S>>) -> Triangle<S> {
    let w = Arc::clone(w);
    Triangle::from_rule("composed-inverse", move |n, k| {
        if k == n {
            -w.ratio(n)
        } else {
            w.diff_coeff(k)
        }
    })
}

/// The weighted mean of backward differences, `x -> tau(x)`.
pub fn make_composed<S: Field>(w: &Arc<Weights<S>>) -> Triangle<S> {
    compose(&riesz_base(w), &delta_minus_base())
        .named("composed")
        .with_inverse(composed_inverse_base(w))
}

/// Closed form of the inverse of [`make_composed`]:
/// `Q_k (1/q_{k+1} - 1/q_k)` below the diagonal and `-Q_n/q_n` on it.
pub fn make_composed_inverse<S: Field>(w: &Arc<Weights<S>>) -> Triangle<S> {
    composed_inverse_base(w)
        .with_inverse(compose(&riesz_base(w), &delta_minus_base()).named("composed"))
}

/// Lazy product: `e(n, k) = sum_{j=k..n} left(n, j) right(j, k)`.
pub fn compose<S: Field>(left: &Triangle<S>, right: &Triangle<S>) -> Triangle<S> {
    let band = match (left.band, right.band) {
        (Some(a), Some(b)) => Some(a + b),
        _ => None,
    };
    let (l, r) = (left.clone(), right.clone());
    let rule = move |n: usize, k: usize| {
        let lo = k.max(l.row_start(n));
        let hi = r.band.map_or(n, |b| n.min(k + b));
        let mut acc = S::zero();
        for j in lo..=hi {
            acc = acc + l.entry(n, j) * r.entry(j, k);
        }
        acc
    };
    let mut t = Triangle::from_rule(format!("{}*{}", left.name, right.name), rule);
    t.band = band;
    if let (Some(li), Some(ri)) = (&left.inverse, &right.inverse) {
        t.inverse = Some(Arc::new(compose(ri, li)));
    }
    t
}

/// Diagonal matrix with the given sequence on the diagonal.
pub fn diagonal<S: Field>(d: Arc<dyn Sequence<S>>) -> Triangle<S> {
    Triangle::from_rule("diagonal", move |n, _| d.term(n)).with_band(0)
}

/// `(Tx)_n = sum_{k<=n} t(n, k) x_k` for `n = 0..=n_max`.
pub fn apply<S: Field>(t: &Triangle<S>, x: &dyn Sequence<S>, n_max: usize) -> Vec<S> {
    let xs: Vec<S> = x.terms(n_max);
    (0..=n_max)
        .map(|n| (t.row_start(n)..=n).fold(S::zero(), |acc, k| acc + t.entry(n, k) * xs[k].clone()))
        .collect()
}

/// Truncated inverse by forward substitution, rows `0..=n`.
pub fn invert<S: Field>(t: &Triangle<S>, n: usize) -> Result<DenseTriangle<S>> {
    let mut rows: Vec<Vec<S>> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let diag = t.entry(i, i);
        if diag.is_zero() {
            return Err(Error::SingularTriangle { index: i });
        }
        let start = t.row_start(i);
        let row_entries: Vec<S> = (start..i).map(|j| t.entry(i, j)).collect();
        let mut row = Vec::with_capacity(i + 1);
        for k in 0..i {
            let mut acc = S::zero();
            for j in start.max(k)..i {
                acc = acc + row_entries[j - start].clone() * rows[j][k].clone();
            }
            row.push(-acc / diag.clone());
        }
        row.push(S::one() / diag);
        rows.push(row);
    }
    Ok(DenseTriangle { rows })
}

/// The `n`-th row `(e(n, k))_k` of a triangle as a sequence.
pub struct TriangleRow<S> {
    triangle: Triangle<S>,
    n: usize,
}

impl<S: Field> Triangle<S> {
    pub fn row(&self, n: usize) -> TriangleRow<S> {
        TriangleRow {
            triangle: self.clone(),
            n,
        }
    }
}

impl<S: Field> Sequence<S> for TriangleRow<S> {
    fn term(&self, k: usize) -> S {
        self.triangle.entry(self.n, k)
    }

    fn support(&self) -> Option<usize> {
        Some(self.n)
    }
}

/// `T y` as a sequence, evaluated term by term.
pub struct Transformed<S> {
    triangle: Triangle<S>,
    input: Arc<dyn Sequence<S>>,
}

impl<S: Field> Transformed<S> {
    pub fn new(triangle: Triangle<S>, input: Arc<dyn Sequence<S>>) -> Self {
        Transformed { triangle, input }
    }
}

impl<S: Field> Sequence<S> for Transformed<S> {
    fn term(&self, n: usize) -> S {
        (self.triangle.row_start(n)..=n).fold(S::zero(), |acc, k| {
            acc + self.triangle.entry(n, k) * self.input.term(k)
        })
    }
}

/// Dense rows `0..=dim` of a lower-triangular matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTriangle<S> {
    rows: Vec<Vec<S>>,
}

impl<S: Field> DenseTriangle<S> {
    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        DenseTriangle { rows }
    }

    /// Largest row index held.
    pub fn dim(&self) -> usize {
        self.rows.len() - 1
    }

    /// Panics when `n` exceeds [`Self::dim`].
    pub fn entry(&self, n: usize, k: usize) -> S {
        if k > n {
            S::zero()
        } else {
            self.rows[n][k].clone()
        }
    }

    pub fn rows(&self) -> &[Vec<S>] {
        &self.rows
    }

    pub fn is_identity(&self) -> bool {
        self.rows.iter().enumerate().all(|(n, row)| {
            row.iter()
                .enumerate()
                .all(|(k, v)| if k == n { v.is_one() } else { v.is_zero() })
        })
    }

    /// Lifts the truncation back to a rule; rows beyond `dim` are zero.
    pub fn into_triangle(self, name: impl Into<String>) -> Triangle<S> {
        let dim = self.dim();
        let rows = Arc::new(self.rows);
        Triangle::from_rule(name, move |n, k| {
            if n > dim {
                S::zero()
            } else {
                rows[n][k].clone()
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::{Finite, SequenceSpec};
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(p: i64, d: i64) -> Q {
        Q::new(p.into(), d.into())
    }

    fn w(spec: SequenceSpec) -> Arc<Weights<Q>> {
        Arc::new(Weights::new(spec).unwrap())
    }

    /// Dense product of rows `0..=n`, written independently of `compose`.
    fn product_oracle(a: &Triangle<Q>, b: &Triangle<Q>, n: usize) -> Vec<Vec<Q>> {
        let da: Vec<Vec<Q>> = (0..=n)
            .map(|i| (0..=n).map(|j| a.entry(i, j)).collect())
            .collect();
        let db: Vec<Vec<Q>> = (0..=n)
            .map(|i| (0..=n).map(|j| b.entry(i, j)).collect())
            .collect();
        (0..=n)
            .map(|i| {
                (0..=n)
                    .map(|k| {
                        (0..=n).fold(Q::from_i64(0), |s, j| {
                            s + da[i][j].clone() * db[j][k].clone()
                        })
                    })
                    .collect()
            })
            .collect()
    }

    fn is_identity_grid(g: &[Vec<Q>]) -> bool {
        g.iter().enumerate().all(|(i, r)| {
            r.iter().enumerate().all(|(k, v)| {
                *v == if i == k {
                    Q::from_i64(1)
                } else {
                    Q::from_i64(0)
                }
            })
        })
    }

    #[test]
    fn delta_minus_entries() {
        let d = make_delta_minus::<Q>();
        assert_eq!(d.entry(0, 0), q(-1, 1));
        assert_eq!(d.entry(5, 4), q(1, 1));
        assert_eq!(d.entry(5, 2), q(0, 1));
        assert_eq!(d.entry(2, 5), q(0, 1));
        let s = make_delta_minus_inverse::<Q>();
        assert_eq!(s.entry(3, 0), q(-1, 1));
        assert_eq!(s.entry(3, 3), q(-1, 1));
        assert!(is_identity_grid(&product_oracle(&d, &s, 8)));
    }

    #[test]
    fn riesz_entries() {
        let cesaro = make_riesz(&w(SequenceSpec::ones()));
        assert_eq!(cesaro.entry(2, 1), q(1, 3));
        let g = make_riesz(&w(SequenceSpec::geometric(3, 1)));
        assert_eq!(g.entry(1, 1), q(3, 4));
        for n in 0..10 {
            let s = (0..=n).fold(Q::from_i64(0), |a, k| a + g.entry(n, k));
            assert_eq!(s, q(1, 1));
        }
    }

    #[test]
    fn riesz_inverse_entries() {
        let wc = w(SequenceSpec::ones());
        let inv = make_riesz_inverse(&wc);
        assert_eq!(inv.entry(3, 3), q(4, 1));
        assert_eq!(inv.entry(3, 2), q(-3, 1));
        assert_eq!(inv.entry(3, 1), q(0, 1));
        let wg = w(SequenceSpec::geometric(3, 1));
        let prod = product_oracle(&make_riesz(&wg), &make_riesz_inverse(&wg), 16);
        assert!(is_identity_grid(&prod));
    }

    #[test]
    fn compose_examples() {
        let t = make_riesz(&w(SequenceSpec::geometric(2, 1)));
        let id_t = compose(&identity(), &t);
        for n in 0..=8 {
            for k in 0..=n {
                assert_eq!(id_t.entry(n, k), t.entry(n, k));
            }
        }
        let ds = compose(&make_delta_minus::<Q>(), &make_delta_minus_inverse());
        assert!(ds.truncate(8).is_identity());
        let nd = compose(&make_riesz(&w(SequenceSpec::ones())), &make_delta_minus());
        for n in 0..8 {
            assert_eq!(nd.entry(n, n), q(-1, n as i64 + 1));
        }
        // Banded composition agrees with the dense oracle.
        let wg = w(SequenceSpec::geometric(3, 1));
        let c = compose(&make_riesz(&wg), &make_delta_minus());
        let oracle = product_oracle(&make_riesz(&wg), &make_delta_minus(), 12);
        for n in 0..=12 {
            for k in 0..=12 {
                assert_eq!(c.entry(n, k), oracle[n][k], "({n},{k})");
            }
        }
    }

    #[test]
    fn composed_inverse_examples() {
        let wc = w(SequenceSpec::ones());
        let m = make_composed_inverse(&wc);
        for n in 0..8usize {
            for k in 0..n {
                assert_eq!(m.entry(n, k), q(0, 1));
            }
            assert_eq!(m.entry(n, n), q(-(n as i64) - 1, 1));
        }
        let wg = w(SequenceSpec::geometric(3, 1));
        assert_eq!(make_composed_inverse(&wg).entry(2, 0), q(-2, 3));
        let prod = product_oracle(&make_composed(&wg), &make_composed_inverse(&wg), 16);
        assert!(is_identity_grid(&prod));
    }

    #[test]
    fn invert_examples() {
        let s = invert(&make_delta_minus::<Q>(), 8).unwrap();
        for n in 0..=8 {
            for k in 0..=n {
                assert_eq!(s.entry(n, k), q(-1, 1));
            }
        }
        let wg = w(SequenceSpec::geometric(3, 1));
        let inv = invert(&make_riesz(&wg), 8).unwrap();
        let closed = make_riesz_inverse(&wg);
        for n in 0..=8 {
            for k in 0..=n {
                assert_eq!(inv.entry(n, k), closed.entry(n, k));
            }
        }
        let singular = Triangle::from_rule("singular", |n, _| {
            if n == 2 {
                Q::from_i64(0)
            } else {
                Q::from_i64(1)
            }
        });
        assert_eq!(
            invert(&singular, 4).unwrap_err(),
            Error::SingularTriangle { index: 2 }
        );
    }

    #[test]
    fn apply_examples() {
        let d = make_delta_minus::<Q>();
        let ones = SequenceSpec::ones();
        assert_eq!(
            apply(&d, &ones, 3),
            vec![q(-1, 1), q(0, 1), q(0, 1), q(0, 1)]
        );
        assert_eq!(
            apply(&d, &SequenceSpec::unit(0), 3),
            vec![q(-1, 1), q(1, 1), q(0, 1), q(0, 1)]
        );
        let r = make_riesz(&w(SequenceSpec::power(1)));
        assert_eq!(apply(&r, &ones, 3), vec![q(1, 1); 4]);
    }

    #[test]
    fn closed_inverse_of_composition_is_reversed_product() {
        let wg = w(SequenceSpec::geometric(2, 1));
        let t = compose(&make_riesz(&wg), &make_delta_minus());
        let inv = t.closed_form_inverse().unwrap();
        let closed = make_composed_inverse(&wg);
        for n in 0..10 {
            for k in 0..=n {
                assert_eq!(inv.entry(n, k), closed.entry(n, k));
            }
        }
    }

    #[test]
    fn memoized_matches_plain() {
        let wg = w(SequenceSpec::geometric(3, 1));
        let t = make_composed(&wg);
        let m = t.clone().memoized();
        for n in 0..12 {
            for k in 0..=n {
                assert_eq!(t.entry(n, k), m.entry(n, k));
                assert_eq!(t.entry(n, k), m.entry(n, k));
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn composition_acts_like_successive_application(
            xs in proptest::collection::vec(-9i64..9, 1..10),
            ratio in 1i64..4,
        ) {
            let wg = w(SequenceSpec::geometric(ratio, 1));
            let x = Finite(xs.iter().map(|&v| Q::from_i64(v)).collect());
            let n = 12;
            let lhs = apply(&make_composed(&wg), &x, n);
            let inner = Finite(apply(&make_delta_minus(), &x, n));
            let rhs = apply(&make_riesz(&wg), &inner, n);
            proptest::prop_assert_eq!(lhs, rhs);
        }
    }
}
