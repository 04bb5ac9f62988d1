//! General infinite matrices described row by row, and their JSON specs.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Field, Rational};
use crate::sequence::{Sequence, SequenceSpec, Tail};
use crate::triangle::{self, Triangle};
use crate::weights::Weights;

type Rule<S> = Arc<dyn Fn(usize, usize) -> S + Send + Sync>;
type SupportRule = Arc<dyn Fn(usize) -> Option<usize> + Send + Sync>;

/// Infinite matrix `(a_{nk})` given by an entry rule and, per row, the last
/// column that may be nonzero (`None` when the row is not finitely supported).
#[derive(Clone)]
pub struct RowMatrix<S> {
    name: String,
    rule: Rule<S>,
    support: SupportRule,
    triangle: Option<Triangle<S>>,
}

impl<S> fmt::Debug for RowMatrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RowMatrix")
            .field("name", &self.name)
            .finish()
    }
}

impl<S: Field> RowMatrix<S> {
    pub fn from_rule(
        name: impl Into<String>,
        rule: impl Fn(usize, usize) -> S + Send + Sync + 'static,
        support: impl Fn(usize) -> Option<usize> + Send + Sync + 'static,
    ) -> Self {
        RowMatrix {
            name: name.into(),
            rule: Arc::new(rule),
            support: Arc::new(support),
            triangle: None,
        }
    }

    pub fn zero() -> Self {
        RowMatrix::from_rule("zero", |_, _| S::zero(), |_| Some(0))
    }

    /// Every row equals `row`.
    pub fn repeat_row(row: Arc<dyn Sequence<S>>) -> Self {
        let last = row.support();
        let r = Arc::clone(&row);
        RowMatrix::from_rule("repeat-row", move |_, k| r.term(k), move |_| last)
    }

    /// Every row equals `e^(j)`.
    pub fn unit_column(j: usize) -> Self {
        RowMatrix::from_rule(
            format!("unit-column({j})"),
            move |_, k| if k == j { S::one() } else { S::zero() },
            move |_| Some(j),
        )
    }

    /// Finite list of rows followed by zero rows or repetitions of the last row.
    pub fn explicit(rows: Vec<Vec<S>>, tail: Tail) -> Self {
        let rows = Arc::new(rows);
        let pick = {
            let rows = Arc::clone(&rows);
            move |n: usize| -> Option<usize> {
                match rows.get(n) {
                    Some(_) => Some(n),
                    None if matches!(tail, Tail::RepeatLast) && !rows.is_empty() => {
                        Some(rows.len() - 1)
                    }
                    None => None,
                }
            }
        };
        let pick_support = pick.clone();
        let rows_support = Arc::clone(&rows);
        RowMatrix::from_rule(
            "explicit",
            move |n, k| {
                pick(n)
                    .and_then(|i| rows[i].get(k).cloned())
                    .unwrap_or_else(S::zero)
            },
            move |n| {
                let row = pick_support(n).map(|i| &rows_support[i]);
                Some(
                    row.and_then(|r| r.iter().rposition(|v| !v.is_zero()))
                        .unwrap_or(0),
                )
            },
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn entry(&self, n: usize, k: usize) -> S {
        (self.rule)(n, k)
    }

    pub fn row_support(&self, n: usize) -> Option<usize> {
        (self.support)(n)
    }

    pub fn row(&self, n: usize) -> RowFunctional<S> {
        RowFunctional {
            matrix: self.clone(),
            n,
        }
    }

    /// Leading entries `a_{n0}..=a_{n,last}` of row `n`.
    pub fn row_prefix(&self, n: usize, last: usize) -> Vec<S> {
        (0..=last).map(|k| self.entry(n, k)).collect()
    }

    /// The triangle this matrix was built from, when it is lower triangular.
    pub fn as_triangle(&self) -> Option<&Triangle<S>> {
        self.triangle.as_ref()
    }

    pub fn scaled(&self, factor: S) -> RowMatrix<S> {
        let inner = self.clone();
        let support = Arc::clone(&self.support);
        let f = factor.clone();
        RowMatrix {
            name: format!("{factor}*{}", self.name),
            rule: Arc::new(move |n, k| f.clone() * inner.entry(n, k)),
            support,
            triangle: self.triangle.as_ref().map(|t| t.scaled(factor)),
        }
    }
}

impl<S: Field> From<Triangle<S>> for RowMatrix<S> {
    fn from(t: Triangle<S>) -> Self {
        let rule_t = t.clone();
        RowMatrix {
            name: t.name().to_string(),
            rule: Arc::new(move |n, k| rule_t.entry(n, k)),
            support: Arc::new(Some),
            triangle: Some(t),
        }
    }
}

/// Row `A_n = (a_{nk})_k` of a matrix as a sequence.
pub struct RowFunctional<S> {
    matrix: RowMatrix<S>,
    n: usize,
}

impl<S: Field> Sequence<S> for RowFunctional<S> {
    fn term(&self, k: usize) -> S {
        self.matrix.entry(self.n, k)
    }

    fn support(&self) -> Option<usize> {
        self.matrix.row_support(self.n)
    }
}

/// Matrix description with a canonical JSON encoding. Constructors that need
/// weights (`riesz` and friends) use the problem's weight sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MatrixSpec {
    Identity,
    Zero,
    DeltaMinus,
    DeltaMinusInverse,
    Riesz,
    RieszInverse,
    /// Weighted mean of backward differences.
    Composed,
    ComposedInverse,
    /// Every row equals `e^(index)`.
    UnitColumn {
        index: usize,
    },
    /// Every row equals `seq`.
    RepeatRow {
        seq: SequenceSpec,
    },
    Diagonal {
        seq: SequenceSpec,
    },
    Explicit {
        rows: Vec<Vec<Rational>>,
        tail: Tail,
    },
    /// Product of triangles, leftmost factor first.
    Compose {
        of: Vec<MatrixSpec>,
    },
    Scale {
        factor: Rational,
        of: Box<MatrixSpec>,
    },
}

impl MatrixSpec {
    pub fn build<S: Field>(&self, w: &Arc<Weights<S>>) -> Result<RowMatrix<S>> {
        if let Ok(t) = self.build_triangle(w) {
            if matches!(self, MatrixSpec::Zero) {
                return Ok(RowMatrix {
                    triangle: Some(t),
                    ..RowMatrix::zero()
                });
            }
            return Ok(t.into());
        }
        Ok(match self {
            MatrixSpec::UnitColumn { index } => RowMatrix::unit_column(*index),
            MatrixSpec::RepeatRow { seq } => {
                seq.validate()?;
                RowMatrix::repeat_row(Arc::new(seq.clone()))
            }
            MatrixSpec::Explicit { rows, tail } => RowMatrix::explicit(
                rows.iter()
                    .map(|r| r.iter().map(Rational::get).collect())
                    .collect(),
                *tail,
            ),
            MatrixSpec::Scale { factor, of } => of.build(w)?.scaled(factor.get()),
            other => return Err(Error::NotTriangular(other.kind_name())),
        })
    }

    /// Builds the matrix as a lower triangle, or reports why it is not one.
    pub fn build_triangle<S: Field>(&self, w: &Arc<Weights<S>>) -> Result<Triangle<S>> {
        Ok(match self {
            MatrixSpec::Identity => triangle::identity(),
            MatrixSpec::Zero => Triangle::from_rule("zero", |_, _| S::zero()).with_band(0),
            MatrixSpec::DeltaMinus => triangle::make_delta_minus(),
            MatrixSpec::DeltaMinusInverse => triangle::make_delta_minus_inverse(),
            MatrixSpec::Riesz => triangle::make_riesz(w),
            MatrixSpec::RieszInverse => triangle::make_riesz_inverse(w),
            MatrixSpec::Composed => triangle::make_composed(w),
            MatrixSpec::ComposedInverse => triangle::make_composed_inverse(w),
            MatrixSpec::Diagonal { seq } => {
                seq.validate()?;
                triangle::diagonal(Arc::new(seq.clone()))
            }
            MatrixSpec::Explicit { rows, tail } => {
                let lower = rows.iter().enumerate().all(|(n, r)| {
                    r.iter()
                        .skip(n + 1)
                        .all(|v| v.0 == num_rational::BigRational::from_integer(0.into()))
                });
                if !lower {
                    return Err(Error::NotTriangular("explicit".into()));
                }
                let m = RowMatrix::<S>::explicit(
                    rows.iter()
                        .map(|r| r.iter().map(Rational::get).collect())
                        .collect(),
                    *tail,
                );
                Triangle::from_rule("explicit", move |n, k| m.entry(n, k))
            }
            MatrixSpec::Compose { of } => {
                let mut acc = triangle::identity();
                for (i, f) in of.iter().enumerate() {
                    let t = f.build_triangle(w)?;
                    acc = if i == 0 {
                        t
                    } else {
                        triangle::compose(&acc, &t)
                    };
                }
                acc
            }
            MatrixSpec::Scale { factor, of } => of.build_triangle(w)?.scaled(factor.get()),
            other => return Err(Error::NotTriangular(other.kind_name())),
        })
    }

    pub fn kind_name(&self) -> String {
        match self {
            MatrixSpec::Identity => "identity".into(),
            MatrixSpec::Zero => "zero".into(),
            MatrixSpec::DeltaMinus => "delta-minus".into(),
            MatrixSpec::DeltaMinusInverse => "delta-minus-inverse".into(),
            MatrixSpec::Riesz => "riesz".into(),
            MatrixSpec::RieszInverse => "riesz-inverse".into(),
            MatrixSpec::Composed => "composed".into(),
            MatrixSpec::ComposedInverse => "composed-inverse".into(),
            MatrixSpec::UnitColumn { index } => format!("unit-column({index})"),
            MatrixSpec::RepeatRow { .. } => "repeat-row".into(),
            MatrixSpec::Diagonal { .. } => "diagonal".into(),
            MatrixSpec::Explicit { .. } => "explicit".into(),
            MatrixSpec::Compose { .. } => "compose".into(),
            MatrixSpec::Scale { .. } => "scale".into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    fn weights() -> Arc<Weights<Q>> {
        Arc::new(Weights::new(SequenceSpec::ones()).unwrap())
    }

    #[test]
    fn unit_column_is_not_triangular() {
        let spec: MatrixSpec = serde_json::from_str(r#"{"kind":"unit-column","index":2}"#).unwrap();
        assert!(matches!(
            spec.build_triangle(&weights()),
            Err(Error::NotTriangular(_))
        ));
        let m = spec.build(&weights()).unwrap();
        assert_eq!(m.entry(0, 2), Q::from_i64(1));
        assert_eq!(m.entry(7, 1), Q::from_i64(0));
        assert_eq!(m.row_support(0), Some(2));
    }

    #[test]
    fn json_forms_parse() {
        for text in [
            r#"{"kind":"delta-minus"}"#,
            r#"{"kind":"riesz"}"#,
            r#"{"kind":"diagonal","seq":{"kind":"constant","value":"2"}}"#,
            r#"{"kind":"explicit","rows":[["1"],["1/2","1/2"]],"tail":"zeros"}"#,
            r#"{"kind":"compose","of":[{"kind":"riesz"},{"kind":"delta-minus"}]}"#,
        ] {
            let spec: MatrixSpec = serde_json::from_str(text).unwrap();
            assert!(spec.build_triangle(&weights()).is_ok(), "{text}");
        }
        assert!(serde_json::from_str::<MatrixSpec>(r#"{"kind":"dense"}"#).is_err());
    }

    #[test]
    fn explicit_rows_and_tails() {
        let rows = vec![vec![Q::from_i64(1)], vec![Q::from_i64(2), Q::from_i64(3)]];
        let z = RowMatrix::explicit(rows.clone(), Tail::Zeros);
        assert_eq!(z.entry(5, 0), Q::from_i64(0));
        assert_eq!(z.row_support(1), Some(1));
        let r = RowMatrix::explicit(rows, Tail::RepeatLast);
        assert_eq!(r.entry(5, 1), Q::from_i64(3));
        assert_eq!(r.row_support(9), Some(1));
    }

    #[test]
    fn non_lower_explicit_is_rejected_as_triangle() {
        let spec = MatrixSpec::Explicit {
            rows: vec![vec![Rational::integer(1), Rational::integer(1)]],
            tail: Tail::Zeros,
        };
        assert!(spec.build_triangle(&weights()).is_err());
        assert!(spec.build(&weights()).is_ok());
    }

    #[test]
    fn compose_spec_matches_composed() {
        let w = Arc::new(Weights::<Q>::new(SequenceSpec::geometric(3, 1)).unwrap());
        let spec: MatrixSpec = serde_json::from_str(
            r#"{"kind":"compose","of":[{"kind":"riesz"},{"kind":"delta-minus"}]}"#,
        )
        .unwrap();
        let a = spec.build_triangle(&w).unwrap();
        let b = triangle::make_composed(&w);
        for n in 0..10 {
            for k in 0..=n {
                assert_eq!(a.entry(n, k), b.entry(n, k));
            }
        }
    }
}
