//! Published claims that disagree with what the formulas compute, surfaced
//! next to the computed values in reports. Longer notes live in
//! `docs/discrepancies.md`.

use serde::Serialize;

use crate::matrix::RowMatrix;
use crate::scalar::Field;
use crate::weights::Weights;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Discrepancy {
    pub id: &'static str,
    pub subject: &'static str,
    pub published: String,
    pub computed: String,
    pub note: &'static str,
}

pub const BASIS_DISPLAY: &str = "basis-display";
pub const C_MATRIX_DISPLAY: &str = "c-matrix-display";
pub const PAIRING_INDEX_SHIFT: &str = "pairing-index-shift";
pub const DUAL_NORM_SUP: &str = "dual-norm-sup";
pub const CO1I_STRENGTH: &str = "co1i-strength";
pub const CO1I_WORKED_EXAMPLE: &str = "co1i-worked-example";
pub const MNC_WORKED_EXAMPLE: &str = "mnc-worked-example";
pub const LINF_COMPACTNESS: &str = "linf-compactness";
pub const C_SANDWICH_RAW_ROWS: &str = "c-sandwich-raw-rows";
pub const MNC_ABOVE_OPERATOR_NORM: &str = "mnc-above-operator-norm";

/// Every known entry with its generic wording.
pub fn catalog() -> Vec<Discrepancy> {
    vec![
        Discrepancy {
            id: BASIS_DISPLAY,
            subject: "Schauder basis of the wrapped spaces",
            published: "basis vectors displayed with entries that do not transform to unit vectors".into(),
            computed: "b^(k) = M e^(k) (columns of the composed inverse), s^(-1) = M e".into(),
            note: "the implemented vectors satisfy tau(b^(k)) = e^(k) exactly",
        },
        Discrepancy {
            id: C_MATRIX_DISPLAY,
            subject: "C-matrix of a sequence a",
            published: "c_nk = Q_k (1/q_{k+1} - 1/q_k) sum_{j=k+1..n} a_j for k < n".into(),
            computed: "c_nk = Q_k (1/q_{k+1} - 1/q_k) sum_{j=k+1..n} a_j - Q_k a_k / q_k for k < n".into(),
            note: "without the last term the pairing sum_k a_k x_k = (C y)_n fails; the display is kept as the `printed` variant",
        },
        Discrepancy {
            id: PAIRING_INDEX_SHIFT,
            subject: "pairing identity",
            published: "partial sums shifted by one index in the summation-by-parts step".into(),
            computed: "sum_{k<=n} a_k x_k = (C y)_n with x = M y, checked exactly".into(),
            note: "the unshifted form is the one that holds",
        },
        Discrepancy {
            id: DUAL_NORM_SUP,
            subject: "norm of a functional on the wrapped spaces",
            published: "sup_n sum_k |c_nk|".into(),
            computed: "lim_n sum_k |c_nk| (for q_k = 3^k and a = row 2 of the composed triangle: 1, while the supremum is 14/13)".into(),
            note: "the supremum over partial indices bounds the norm from above but is not equal to it",
        },
        Discrepancy {
            id: CO1I_STRENGTH,
            subject: "double supremum condition Co1i",
            published: "necessary and sufficient for membership".into(),
            computed: "for q_k = 2^k the composed triangle gives values growing like n/2 although it maps the wrapped c0 onto c0".into(),
            note: "the supremum over partial indices m makes the condition stronger than membership",
        },
        Discrepancy {
            id: C_SANDWICH_RAW_ROWS,
            subject: "bounds on the noncompactness measure for codomain c",
            published: "lim_s ||A||^(s) / 2 <= ||L_A||_chi with ||A||^(s) built from the raw rows a_nk".into(),
            computed: "the raw-row bound is applied as published".into(),
            note: "for a rank-one matrix such as unit-column(j) the raw rows give a positive lower bound although the operator is compact; the usual form subtracts the column limits alpha_k",
        },
        Discrepancy {
            id: MNC_ABOVE_OPERATOR_NORM,
            subject: "tail quantity ||A||^(s) against the operator norm",
            published: "lim_s ||A||^(s) bounds ||L_A||_chi, which never exceeds ||L_A||".into(),
            computed: "for q_k = 3^k and every row equal to (1, -3/2, 0, ...): ||A||^(s) = 3 for all s, ||L_A|| = 2".into(),
            note: "the per-m terms drop -Q_k a_k / q_k, so at intermediate m they can exceed the row norm",
        },
        co1i_worked_example(None),
        mnc_worked_example(None),
        linf_compactness(None),
    ]
}

pub fn lookup(id: &str) -> Option<Discrepancy> {
    catalog().into_iter().find(|d| d.id == id)
}

/// Worked example `q_k = 3^k`, `A = unit-column(1)`: the double supremum.
pub fn co1i_worked_example(computed: Option<String>) -> Discrepancy {
    Discrepancy {
        id: CO1I_WORKED_EXAMPLE,
        subject: "Co1i for q_k = 3^k, A = unit-column(1)",
        published: "< 2, via 2/3 + (1 - 3^-n)/2".into(),
        computed: computed
            .unwrap_or_else(|| "2 (attained at m = 1: 2/3 + Q_1/q_1 = 2/3 + 4/3)".into()),
        note: "the printed formula is evaluated verbatim; no corrected variant is guessed",
    }
}

/// Worked example `q_k = 3^k`, `A = unit-column(1)`: the tail quantity.
pub fn mnc_worked_example(computed: Option<String>) -> Discrepancy {
    Discrepancy {
        id: MNC_WORKED_EXAMPLE,
        subject: "||A||^(s) for q_k = 3^k, A = unit-column(1)",
        published: "7/6 - 1/(2 * 3^(s+1)), limit 7/6".into(),
        computed: computed.unwrap_or_else(|| "2 for every s".into()),
        note: "the published value is recovered only if the last term used Q_{m-1}/q_m and m = 1 were excluded",
    }
}

/// Worked example: compactness with an `linf` codomain.
pub fn linf_compactness(computed: Option<String>) -> Discrepancy {
    Discrepancy {
        id: LINF_COMPACTNESS,
        subject: "compactness of L_A for q_k = 3^k, A = unit-column(1), codomain linf",
        published: "compact (A(x) = x_1 for every row)".into(),
        computed: computed.unwrap_or_else(|| "limit of ||A||^(s) is nonzero; verdict inconclusive".into()),
        note: "with an linf codomain a vanishing limit is only sufficient, so a nonzero limit decides nothing",
    }
}

/// Whether `(w, a)` is the worked example, checked on indices `<= 8`.
pub fn is_worked_example<S: Field>(w: &Weights<S>, a: &RowMatrix<S>) -> bool {
    let three = S::from_i64(3);
    let mut p = S::one();
    for k in 0..=8 {
        if w.q(k) != p {
            return false;
        }
        p = p * three.clone();
    }
    (0..=8).all(|n| (0..=8).all(|k| a.entry(n, k) == if k == 1 { S::one() } else { S::zero() }))
}
