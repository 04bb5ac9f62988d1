//! Weighted-mean difference sequence spaces.
//!
//! The spaces studied here are the matrix domains of `c0`, `c` and `l_inf`
//! under the triangle `N_q * D`, where `D` is the backward difference
//! `x_k -> x_{k-1} - x_k` and `N_q` is the weighted mean with positive weights
//! `q`. The crate provides exact (rational) and float evaluation of
//!
//! - the triangles, their compositions and inverses ([`triangle`]),
//! - the space norm, basis and membership tests ([`spaces`]),
//! - the C-matrix, beta-dual conditions and dual norm ([`duality`]),
//! - the matrix-class conditions and operator norm ([`classes`]),
//! - measure-of-noncompactness estimates and a compactness classifier ([`mnc`]).
//!
//! Infinite suprema and limits are estimated on growing windows governed by a
//! [`TruncationPolicy`]; every such estimate returns a three-valued [`Verdict`].

pub mod classes;
pub mod discrepancy;
pub mod duality;
pub mod error;
pub mod matrix;
pub mod mnc;
pub mod policy;
pub mod scalar;
pub mod sequence;
pub mod spaces;
pub mod triangle;
pub mod weights;

pub use error::{Error, Result};
pub use matrix::{MatrixSpec, RowMatrix};
pub use policy::{LimitTarget, Outcome, TruncationPolicy, Verdict, VerdictReport};
pub use scalar::{Field, Mode, Rational, Scalar};
pub use sequence::{Finite, Sequence, SequenceSpec, Tail};
pub use triangle::{DenseTriangle, Triangle};
pub use weights::Weights;

/// Exact rational scalar.
pub type Exact = num_rational::BigRational;
