use serde::{Deserialize, Serialize};

use nqdelta_core::duality::Variant;
use nqdelta_core::spaces::Base;
use nqdelta_core::{MatrixSpec, Mode, Rational, SequenceSpec, TruncationPolicy};

/// Problem description read from `--spec`. Flag overrides are folded in
/// before the spec is echoed, so the echo reproduces the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub weights: SequenceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixSpec>,
    /// The sequence `x` (transform, norm, member) or `a` (beta-dual, dual-norm).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<SequenceSpec>,
    #[serde(default, skip_serializing_if = "PolicyOverrides::is_empty")]
    pub policy: PolicyOverrides,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    /// Space for `member` (`wrapped` defaults to true) and `beta-dual`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Base>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codomain: Option<Base>,
    /// Basis index for `basis`; `s` for a single `mnc` evaluation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    /// Last index for `transform`, `basis` and `invert`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub assume_member: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub base: Base,
    #[serde(default = "yes")]
    pub wrapped: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_start: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divergence_threshold: Option<Rational>,
}

impl PolicyOverrides {
    pub fn is_empty(&self) -> bool {
        *self == PolicyOverrides::default()
    }

    pub fn resolve(&self, mode: Mode) -> TruncationPolicy {
        let mut p = TruncationPolicy::for_mode(mode);
        if let Some(v) = self.n_start {
            p.n_start = v;
        }
        if let Some(v) = self.n_max {
            p.n_max = v;
        }
        if let Some(v) = self.growth {
            p.growth = v;
        }
        if let Some(v) = self.window {
            p.window = v;
        }
        if let Some(v) = &self.tol {
            p.tol = v.clone();
        }
        if let Some(v) = &self.divergence_threshold {
            p.divergence_threshold = v.clone();
        }
        p
    }
}

impl ProblemSpec {
    pub fn mode(&self) -> Mode {
        self.mode.unwrap_or(Mode::Exact)
    }

    pub fn variant(&self) -> Variant {
        self.variant.unwrap_or_default()
    }
}
