use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use nqdelta_core::discrepancy::Discrepancy;
use nqdelta_core::policy::Checkpoint;
use nqdelta_core::{Mode, Outcome, Scalar, TruncationPolicy, VerdictReport};

use crate::spec::ProblemSpec;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub spec: ProblemSpec,
    pub mode: Mode,
    pub policy: TruncationPolicy,
    /// `None` for plain computations that carry no verdict.
    pub outcome: Option<Outcome>,
    pub estimate: Option<Scalar>,
    pub checkpoints: Vec<Checkpoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub details: Value,
    pub discrepancies: Vec<Discrepancy>,
    /// Seconds since the Unix epoch; omitted with `--no-timestamp`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<u64>,
}

impl Report {
    pub fn new(command: &str, spec: &ProblemSpec, policy: &TruncationPolicy) -> Self {
        Report {
            command: command.to_string(),
            spec: spec.clone(),
            mode: spec.mode(),
            policy: policy.clone(),
            outcome: None,
            estimate: None,
            checkpoints: Vec::new(),
            reason: None,
            details: Value::Null,
            discrepancies: Vec::new(),
            generated_at: None,
        }
    }

    pub fn with_verdict(mut self, v: VerdictReport) -> Self {
        self.outcome = Some(v.outcome);
        self.estimate = v.estimate;
        self.checkpoints = v.checkpoints;
        self.reason = v.reason;
        self
    }

    pub fn exit_code(&self) -> i32 {
        match self.outcome {
            None | Some(Outcome::Holds) => 0,
            Some(Outcome::Fails) => 1,
            Some(Outcome::Inconclusive) => 2,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Checkpoint series as `index,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,value\n");
        for c in &self.checkpoints {
            let _ = writeln!(out, "{},{}", c.index, c.value);
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let row = |out: &mut String, k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(out, "{k:<14} {v}");
        };
        row(&mut out, "command", &self.command);
        row(&mut out, "mode", &self.mode);
        row(
            &mut out,
            "policy",
            &format!(
                "n_start={} n_max={} growth={} window={} tol={} divergence={}",
                self.policy.n_start,
                self.policy.n_max,
                self.policy.growth,
                self.policy.window,
                self.policy.tol,
                self.policy.divergence_threshold
            ),
        );
        if let Some(o) = self.outcome {
            row(&mut out, "outcome", &o);
        }
        if let Some(e) = &self.estimate {
            row(&mut out, "estimate", e);
        }
        if let Some(r) = &self.reason {
            row(&mut out, "reason", r);
        }
        if !self.checkpoints.is_empty() {
            let _ = writeln!(out, "\n{:>8}  value", "index");
            for c in &self.checkpoints {
                let _ = writeln!(out, "{:>8}  {}", c.index, c.value);
            }
        }
        if !self.details.is_null() {
            let _ = writeln!(
                out,
                "\ndetails\n{}",
                serde_json::to_string_pretty(&self.details).expect("details serialize")
            );
        }
        for d in &self.discrepancies {
            let _ = writeln!(out, "\ndiscrepancy [{}] {}", d.id, d.subject);
            let _ = writeln!(out, "  published: {}", d.published);
            let _ = writeln!(out, "  computed:  {}", d.computed);
            let _ = writeln!(out, "  note:      {}", d.note);
        }
        out
    }
}
