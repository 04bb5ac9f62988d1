use std::sync::Arc;

use serde_json::{json, Value};

use nqdelta_core::classes::{class_membership, operator_norm, ClassQuery};
use nqdelta_core::discrepancy::{self, lookup};
use nqdelta_core::duality::{beta_dual_membership, dual_norm, functional_norm, Variant};
use nqdelta_core::mnc::{a_norm_s, classify_compact, mnc_bounds, Compactness, MncEstimate};
use nqdelta_core::spaces::{
    basis_vector, space_membership, space_norm, tau_transform, Base, SpaceTag,
};
use nqdelta_core::triangle::invert;
use nqdelta_core::{
    Field, Outcome, RowMatrix, Sequence, SequenceSpec, TruncationPolicy, Verdict, Weights,
};

use crate::error::CliError;
use crate::report::Report;
use crate::spec::ProblemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Transform,
    Norm,
    Basis,
    Member,
    BetaDual,
    DualNorm,
    ClassCheck,
    Mnc,
    ClassifyCompact,
    Invert,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Transform => "transform",
            Command::Norm => "norm",
            Command::Basis => "basis",
            Command::Member => "member",
            Command::BetaDual => "beta-dual",
            Command::DualNorm => "dual-norm",
            Command::ClassCheck => "class-check",
            Command::Mnc => "mnc",
            Command::ClassifyCompact => "classify-compact",
            Command::Invert => "invert",
        }
    }
}

const DEFAULT_N: usize = 16;

struct Ctx<'a, S> {
    cmd: Command,
    spec: &'a ProblemSpec,
    policy: TruncationPolicy,
    w: Arc<Weights<S>>,
}

impl<S: Field> Ctx<'_, S> {
    fn sequence(&self) -> Result<SequenceSpec, CliError> {
        let s = self
            .spec
            .sequence
            .clone()
            .ok_or_else(|| CliError::missing("sequence", self.cmd.name()))?;
        s.validate()?;
        Ok(s)
    }

    fn matrix(&self) -> Result<RowMatrix<S>, CliError> {
        let m = self
            .spec
            .matrix
            .as_ref()
            .ok_or_else(|| CliError::missing("matrix", self.cmd.name()))?;
        Ok(m.build(&self.w)?)
    }

    fn pair(&self) -> Result<(Base, Base), CliError> {
        let d = self
            .spec
            .domain
            .ok_or_else(|| CliError::missing("domain", self.cmd.name()))?;
        let c = self
            .spec
            .codomain
            .ok_or_else(|| CliError::missing("codomain", self.cmd.name()))?;
        Ok((d, c))
    }

    fn report(&self) -> Report {
        Report::new(self.cmd.name(), self.spec, &self.policy)
    }
}

fn scalars<S: Field>(v: &[S]) -> Value {
    Value::Array(v.iter().map(|x| json!(x.to_scalar())).collect())
}

fn verdict_json<S: Field>(v: &Verdict<S>) -> Value {
    serde_json::to_value(v.report()).expect("verdict serializes")
}

pub fn run(cmd: Command, spec: &ProblemSpec) -> Result<Report, CliError> {
    match spec.mode() {
        nqdelta_core::Mode::Exact => run_in::<nqdelta_core::Exact>(cmd, spec),
        nqdelta_core::Mode::Float => run_in::<f64>(cmd, spec),
    }
}

fn run_in<S: Field>(cmd: Command, spec: &ProblemSpec) -> Result<Report, CliError> {
    let policy = spec.policy.resolve(spec.mode());
    policy.validate()?;
    let w = Arc::new(Weights::<S>::new(spec.weights.clone())?);
    let ctx = Ctx {
        cmd,
        spec,
        policy,
        w,
    };
    match cmd {
        Command::Transform => transform(&ctx),
        Command::Norm => norm(&ctx),
        Command::Basis => basis(&ctx),
        Command::Member => member(&ctx),
        Command::BetaDual => beta_dual(&ctx),
        Command::DualNorm => dual_norm_cmd(&ctx),
        Command::ClassCheck => class_check(&ctx),
        Command::Mnc => mnc(&ctx),
        Command::ClassifyCompact => classify(&ctx),
        Command::Invert => invert_cmd(&ctx),
    }
}

fn transform<S: Field>(ctx: &Ctx<S>) -> Result<Report, CliError> {
    let x = ctx.sequence()?;
    let n = ctx.spec.n.unwrap_or(DEFAULT_N);
    let tau = tau_transform(&ctx.w, &x, n);
    let mut r = ctx.report();
    r.details = json!({ "tau": scalars(tau.values()) });
    Ok(r)
}

fn norm<S: Field>(ctx: &Ctx<S>) -> Result<Report, CliError> {
    let x = ctx.sequence()?;
    let (_, v) = space_norm(&ctx.w, &x, &ctx.policy);
    Ok(ctx.report().with_verdict(v.report()))
}

fn basis<S: Field>(ctx: &Ctx<S>) -> Result<Report, CliError> {
    let k = ctx
        .spec
        .index
        .ok_or_else(|| CliError::missing("index", "basis"))?;
    let n = ctx.spec.n.unwrap_or(k + DEFAULT_N);
    let b = basis_vector(&ctx.w, k);
    let terms: Vec<S> = b.terms(n);
    let tau = tau_transform(&ctx.w, &b, n);
    let mut r = ctx.report();
    r.details = json!({
        "index": k,
        "vector": b,
        "terms": scalars(&terms),
        "tau": scalars(tau.values()),
    });
    r.discrepancies.extend(lookup(discrepancy::BASIS_DISPLAY));
    Ok(r)
}

fn member<S: Field>(ctx: &Ctx<S>) -> Result<Report, CliError> {
    let x = ctx.sequence()?;
    let space = ctx
        .spec
        .space
        .ok_or_else(|| CliError::missing("space", "member"))?;
    let tag = SpaceTag {
        base: space.base,
        wrapped: space.wrapped,
    };
    let v = space_membership(&ctx.w, &x, tag, &ctx.policy);
    let mut r = ctx.report().with_verdict(v.report());
    r.details = json!({ "space": tag.to_string() });
    Ok(r)
}

fn beta_dual<S: Field>(ctx: &Ctx<S>) -> Result<Report, CliError> {
    let a = ctx.sequence()?;
    let space = ctx
        .spec
        .space
        .ok_or_else(|| CliError::missing("space", "beta-dual"))?;
    let variant = ctx.spec.variant();
    let rep = beta_dual_membership(
        &ctx.w,
        Arc::new(a),
        SpaceTag::wrapped(space.base),
        &ctx.policy,
        variant,
    );
    let mut r = ctx.report();
    r.outcome = Some(rep.outcome);
    r.details = json!({
        "space": rep.tag.to_string(),
        "variant": variant,
        "sets": rep.sets.iter().map(|(s, v)| json!({ "set": s.to_string(), "verdict": verdict_json(v) })).collect::<Vec<_>>(),
        "failed_sets": rep.failed_sets().iter().map(ToString::to_string).collect::<Vec<_>>(),
        "column_limits": rep.column_limits.iter().map(|l| l.as_ref().map(Field::to_scalar)).collect::<Vec<_>>(),
    });
    if variant == Variant::Printed {
        r.discrepancies
            .extend(lookup(discrepancy::C_MATRIX_DISPLAY));
    }
    Ok(r)
}

fn dual_norm_cmd<S: Field>(ctx: &Ctx<S>) -> Result<Report, CliError> {
    let a = ctx.sequence()?;
    let variant = ctx.spec.variant();
    let d = dual_norm(&ctx.w, &a, &ctx.policy, variant);
    let f = functional_norm(&ctx.w, &a, &ctx.policy);
    let mut r = ctx.report().with_verdict(d.verdict.report());
    r.details = json!({
        "variant": variant,
        "sup": d.sup.to_scalar(),
        "argmax": d.argmax,
        "per_n": scalars(&d.per_n),
        "functional_norm": verdict_json(&f),
    });
    if let Some(fv) = &f.estimate {
        if d.sup > *fv {
            r.discrepancies.extend(lookup(discrepancy::DUAL_NORM_SUP));
        }
    }
    if variant == Variant::Printed {
        r.discrepancies
            .extend(lookup(discrepancy::C_MATRIX_DISPLAY));
    }
    Ok(r)
}

fn class_check<S: Field>(ctx: &Ctx<S>) -> Result<Report, CliError> {
    let a = ctx.matrix()?;
    let (domain, codomain) = ctx.pair()?;
    let rep = class_membership(&ClassQuery {
        matrix: a.clone(),
        domain,
        codomain,
        weights: Arc::clone(&ctx.w),
        policy: ctx.policy.clone(),
    })?;
    let opnorm = operator_norm(&ctx.w, &a, &ctx.policy);
    let mut r = ctx.report();
    r.outcome = Some(rep.outcome);
    r.estimate = rep.sup_value.as_ref().map(Field::to_scalar);
    r.details = json!({
        "domain": format!("wrapped {domain}"),
        "codomain": codomain.to_string(),
        "conditions": rep.conditions.iter().map(|(c, v)| json!({
            "condition": c.to_string(),
            "formula": c.formula(),
            "verdict": verdict_json(v),
        })).collect::<Vec<_>>(),
        "alpha_k": rep.alpha_k.iter().map(|l| l.as_ref().map(Field::to_scalar)).collect::<Vec<_>>(),
        "alpha": rep.alpha.as_ref().map(Field::to_scalar),
        "operator_norm": verdict_json(&opnorm),
    });
    if discrepancy::is_worked_example(&ctx.w, &a) {
        let computed = rep
            .sup_value
            .as_ref()
            .map(|v| format!("{v} (attained at m = 1)"));
        r.discrepancies
            .push(discrepancy::co1i_worked_example(computed));
    }
    Ok(r)
}

fn mnc_details<S: Field>(est: &MncEstimate<S>) -> Value {
    json!({
        "regime": est.regime.to_string(),
        "values": est.values.iter().map(|(s, v)| json!({ "s": s, "verdict": verdict_json(v) })).collect::<Vec<_>>(),
        "limit": est.limit().map(Field::to_scalar),
        "lower": est.lower.as_ref().map(Field::to_scalar),
        "upper": est.upper.as_ref().map(Field::to_scalar),
        "membership": est.membership,
    })
}

fn mnc<S: Field>(ctx: &Ctx<S>) -> Result<Report, CliError> {
    let a = ctx.matrix()?;
    let (domain, codomain) = ctx.pair()?;
    if let Some(s) = ctx.spec.index {
        nqdelta_core::classes::required_conditions(domain, codomain)?;
        let v = a_norm_s(&ctx.w, &a, s, &ctx.policy);
        let mut r = ctx.report().with_verdict(v.report());
        r.details = json!({ "s": s });
        if discrepancy::is_worked_example(&ctx.w, &a) {
            r.discrepancies.push(discrepancy::mnc_worked_example(
                v.estimate.as_ref().map(|e| format!("{e} at s = {s}")),
            ));
        }
        return Ok(r);
    }
    let est = mnc_bounds(
        &ctx.w,
        &a,
        domain,
        codomain,
        &ctx.policy,
        ctx.spec.assume_member,
    )?;
    let mut r = ctx.report().with_verdict(est.verdict.report());
    r.details = mnc_details(&est);
    r.discrepancies = est.discrepancies.clone();
    Ok(r)
}

fn classify<S: Field>(ctx: &Ctx<S>) -> Result<Report, CliError> {
    let a = ctx.matrix()?;
    let (domain, codomain) = ctx.pair()?;
    let v = classify_compact(
        &ctx.w,
        &a,
        domain,
        codomain,
        &ctx.policy,
        ctx.spec.assume_member,
    )?;
    let mut r = ctx.report().with_verdict(v.estimate.verdict.report());
    r.outcome = Some(match v.outcome {
        Compactness::Compact => Outcome::Holds,
        Compactness::NotCompact => Outcome::Fails,
        Compactness::Inconclusive => Outcome::Inconclusive,
    });
    r.reason = Some(v.reason.clone());
    let mut details = mnc_details(&v.estimate);
    details["compactness"] = json!(v.outcome);
    r.details = details;
    r.discrepancies = v.estimate.discrepancies.clone();
    Ok(r)
}

fn invert_cmd<S: Field>(ctx: &Ctx<S>) -> Result<Report, CliError> {
    let spec = ctx
        .spec
        .matrix
        .as_ref()
        .ok_or_else(|| CliError::missing("matrix", "invert"))?;
    let t = spec.build_triangle(&ctx.w)?;
    let n = ctx.spec.n.unwrap_or(DEFAULT_N);
    let inv = invert(&t, n)?;
    let mut r = ctx.report();
    r.details = json!({
        "n": n,
        "inverse": inv.rows().iter().map(|row| scalars(row)).collect::<Vec<_>>(),
    });
    Ok(r)
}
