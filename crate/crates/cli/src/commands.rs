use std::io::Read;

use serde_json::{json, Value};

use onshell_core::chi::{
    alpha_coefficient, chi_crosscheck_with, chi_explicit, covariance_check, lambda_contraction,
    ChiConfig, ConstCoeffOperator,
};
use onshell_core::degree::{
    bound_derivative, bound_monomial, bound_operator, bound_tensor, bound_vanishing_factor,
    deg_delta, Degree, DegreeBound,
};
use onshell_core::deltaspace::{
    enumerate, inner, pair, smap, tmap, DeltaVector, MultiIndex, Polynomial,
};
use onshell_core::extension::{
    apply_counterterm, casimir_correction, existence_check, homogeneous_extension_unique,
    linearity_precondition, multi_commuting_correction, onshell_correction,
    order_raising_correction, renorm_map, verify_casimir_hypotheses, CasimirReport, CasimirSpec,
    ExtensionRecord,
};
use onshell_core::opalg::{essential_order, euler, normal_form, OperatorExpr, Signature};
use onshell_core::scalar::{scalar_text, Gaussian, Rational, Scalar};
use onshell_core::spectral::{
    adjoint_restriction, kernel_basis, minimal_polynomial, projector_onto_kernel,
    pseudoinverse_correction, range_membership, restrict, ProjectionData, RangeMembership,
    RestrictionMatrix,
};
use onshell_core::Error;

use crate::args::{Command, Problem, Residues, Space};
use crate::json;
use crate::parse::{parse_rational, parse_scalar, parse_with, ParseContext};

type Op = OperatorExpr<Gaussian>;
type D = DeltaVector<Gaussian>;
type Record = ExtensionRecord<Gaussian>;

/// Result of a subcommand. `negative` marks a mathematical "no".
pub struct Outcome {
    pub value: Value,
    pub text: String,
    pub negative: bool,
}

impl Outcome {
    fn yes(value: Value, text: String) -> Self {
        Outcome {
            value,
            text,
            negative: false,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
    /// 1 for usage errors, 2 for failed hypotheses.
    pub exit: u8,
}

impl CliError {
    pub fn usage(code: &'static str, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
            exit: 1,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({"ok": false, "error": {"code": self.code, "message": self.message}})
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let (code, exit) = match &e {
            Error::DimensionMismatch { .. } => ("dimension_mismatch", 1),
            Error::DegreeOverflow { .. } => ("degree_overflow", 1),
            Error::SingularPullback => ("singular_pullback", 1),
            Error::PullbackShape { .. } => ("pullback_shape", 1),
            Error::InvalidSignature(_) => ("invalid_signature", 1),
            Error::IndexOutOfRange { .. } => ("index_out_of_range", 1),
            Error::MissingResidue(_) => ("missing_residue", 1),
            Error::Precondition(_) => ("precondition", 1),
            Error::ZeroNormalization => ("zero_normalization", 1),
            Error::ZeroDenominator { .. } => ("zero_denominator", 2),
            Error::NonNormal => ("non_normal", 2),
            Error::NonCommuting { .. } => ("non_commuting", 2),
            Error::NotOrderZero(_) => ("not_order_zero", 2),
            Error::HypothesisFailure(_) => ("hypothesis_failure", 2),
        };
        CliError {
            code,
            message: e.to_string(),
            exit,
        }
    }
}

type Res<T> = std::result::Result<T, CliError>;

/// Library operation and the subcommand that exposes it.
pub const OPERATIONS: &[(&str, &str)] = &[
    ("enumerate", "restrict"),
    ("apply_delta", "restrict"),
    ("restrict", "restrict"),
    ("pair", "adjoint"),
    ("smap", "adjoint"),
    ("tmap", "adjoint"),
    ("inner", "adjoint"),
    ("transpose", "adjoint"),
    ("apply_poly", "adjoint"),
    ("adjoint_restriction", "adjoint"),
    ("parse_operator", "essord"),
    ("normal_form", "essord"),
    ("essential_order", "essord"),
    ("operator_equal", "essord"),
    ("commutator", "essord"),
    ("euler", "essord"),
    ("dalembert", "essord"),
    ("lorentz_generator", "essord"),
    ("casimir", "essord"),
    ("reflection", "essord"),
    ("monomial_derivative", "essord"),
    ("minimal_polynomial", "minpoly"),
    ("projection_polynomial", "projpoly"),
    ("projector_onto_kernel", "projpoly"),
    ("linearity_precondition", "projpoly"),
    ("kernel_basis", "kernel"),
    ("range_membership", "kernel"),
    ("pseudoinverse_correction", "kernel"),
    ("existence_check", "extend-check"),
    ("onshell_correction", "counterterm"),
    ("apply_counterterm", "counterterm"),
    ("multi_commuting_correction", "counterterm"),
    ("order_raising_correction", "order-raise"),
    ("verify_casimir_hypotheses", "casimir-check"),
    ("casimir_correction", "casimir-check"),
    ("renorm_map", "renorm"),
    ("homogeneous_extension_unique", "homog-unique"),
    ("theta_counterterm", "chi"),
    ("chi_projection", "chi"),
    ("lambda_contraction", "chi"),
    ("alpha_coefficient", "chi"),
    ("chi_explicit", "chi"),
    ("chi_crosscheck", "chi-verify"),
    ("deg_delta", "degree"),
    ("bound_derivative", "degree"),
    ("bound_monomial", "degree"),
    ("bound_vanishing_factor", "degree"),
    ("bound_tensor", "degree"),
    ("bound_operator", "degree"),
];

pub fn run(cmd: &Command) -> Res<Outcome> {
    match cmd {
        Command::Restrict { problem, vector } => cmd_restrict(problem, vector.as_deref()),
        Command::Adjoint {
            problem,
            left,
            right,
            poly,
        } => cmd_adjoint(problem, left.as_deref(), right.as_deref(), poly.as_deref()),
        Command::Essord {
            space,
            ops,
            probe_depth,
        } => cmd_essord(space, ops, *probe_depth),
        Command::Minpoly { problem } => cmd_minpoly(problem),
        Command::Projpoly { problem } => cmd_projpoly(problem),
        Command::Kernel { problem, residues } => cmd_kernel(problem, residues),
        Command::ExtendCheck { problem, residues } => cmd_extend_check(problem, residues),
        Command::Counterterm { problem, residues } => cmd_counterterm(problem, residues),
        Command::OrderRaise {
            problem,
            residues,
            k,
        } => cmd_order_raise(problem, residues, *k),
        Command::CasimirCheck {
            space,
            ops,
            degree,
            words,
            residues,
        } => cmd_casimir(space, ops, degree, words, residues),
        Command::Renorm {
            space,
            degree,
            degrees,
            lorentz,
            residues,
        } => cmd_renorm(space, degree, degrees, *lorentz, residues),
        Command::HomogUnique { dim, a, degree } => cmd_homog(*dim, a, degree),
        Command::Chi {
            space,
            m2,
            indices,
            c,
            route,
        } => cmd_chi(space, m2, indices, c, route),
        Command::ChiVerify {
            dim,
            metric,
            m2,
            k_max,
        } => cmd_chi_verify(*dim, metric.as_deref(), m2, *k_max),
        Command::Degree {
            dim,
            residue,
            bound,
            op,
            gamma,
            beta,
            vanish,
            tensor,
        } => cmd_degree(
            *dim,
            residue.as_deref(),
            bound.as_deref(),
            op.as_deref(),
            gamma.as_deref(),
            beta.as_deref(),
            *vanish,
            tensor.as_deref(),
        ),
    }
}

// ---------------------------------------------------------------- inputs

fn signature(dim: usize, metric: Option<&str>) -> Res<Signature> {
    if dim == 0 {
        return Err(CliError::usage("bad_dimension", "--dim must be at least 1"));
    }
    let sig = match metric {
        Some(m) => m.parse::<Signature>()?,
        None => Signature::default_for(dim),
    };
    if sig.dim() != dim {
        return Err(CliError::usage(
            "invalid_signature",
            format!("metric {sig} has {} entries but --dim is {dim}", sig.dim()),
        ));
    }
    Ok(sig)
}

fn context(space: &Space) -> Res<ParseContext> {
    let sig = signature(space.dim, space.metric.as_deref())?;
    Ok(ParseContext::with_signature(space.dim, sig))
}

fn operator(text: &str, ctx: &ParseContext) -> Res<Op> {
    parse_with(text, ctx).map_err(|e| CliError::usage("parse_error", e.render(text)))
}

fn single_op(problem: &Problem, ctx: &ParseContext) -> Res<Op> {
    match problem.ops.as_slice() {
        [one] => operator(one, ctx),
        _ => Err(CliError::usage(
            "usage",
            "this subcommand takes exactly one --op",
        )),
    }
}

fn rational(text: &str, what: &str) -> Res<Rational> {
    parse_rational(text.trim())
        .map_err(|e| CliError::usage("parse_error", format!("{what}: {}", e.render(text))))
}

/// Integer degree (floored) together with the rational it came from.
fn degree(text: &str) -> Res<(i64, Rational)> {
    let q = rational(text, "--degree")?;
    let r = q.floor().to_integer();
    let r = i64::try_from(r).map_err(|_| CliError::usage("usage", "--degree out of range"))?;
    Ok((r, q))
}

fn read_json(text: &str) -> Res<Value> {
    let owned;
    let src = if text.trim() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::usage("io_error", e.to_string()))?;
        owned = s;
        owned.as_str()
    } else {
        text
    };
    serde_json::from_str(src).map_err(|e| CliError::usage("json_error", format!("{e} in {src:?}")))
}

fn delta_arg(text: &str, n: usize) -> Res<D> {
    json::decode_delta(&read_json(text)?, n).map_err(|e| CliError::usage("json_error", e.0))
}

/// `IDX=JSON`, `JSON` (index 0) or `-` (index 0, from standard input).
fn residues(r: &Residues, n: usize) -> Res<Vec<(usize, D)>> {
    let mut out: Vec<(usize, D)> = Vec::new();
    for item in &r.residues {
        let (idx, body) = match item.split_once('=') {
            Some((k, v)) if !k.is_empty() && k.trim().bytes().all(|b| b.is_ascii_digit()) => {
                (k.trim().parse::<usize>().expect("digits"), v)
            }
            _ => (0, item.as_str()),
        };
        if out.iter().any(|(i, _)| *i == idx) {
            return Err(CliError::usage(
                "usage",
                format!("residue {idx} given twice"),
            ));
        }
        out.push((idx, delta_arg(body, n)?));
    }
    Ok(out)
}

fn record(n: usize, q: &Rational, slots: &[Op], given: &[(usize, D)]) -> Res<Record> {
    let mut rec = Record::from_degree(n, q);
    for (idx, w) in given {
        let op = slots.get(*idx).ok_or_else(|| {
            CliError::usage(
                "usage",
                format!(
                    "residue index {idx} has no operator (there are {})",
                    slots.len()
                ),
            )
        })?;
        rec = rec.with_residue(op.clone(), w.clone())?;
    }
    Ok(rec)
}

fn indices(text: &str) -> Res<Vec<usize>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| CliError::usage("usage", format!("bad index {s:?}")))
        })
        .collect()
}

fn multi_index(text: &str, n: usize) -> Res<MultiIndex> {
    let e: Vec<u32> = indices(text)?.into_iter().map(|k| k as u32).collect();
    if e.len() != n {
        return Err(CliError::usage(
            "usage",
            format!("multi-index {text:?} needs {n} entries"),
        ));
    }
    Ok(MultiIndex::new(e))
}

fn polynomial_of(op: &Op, text: &str) -> Res<Polynomial<Gaussian>> {
    let mut out = Polynomial::zero(op.dim());
    for (key, a) in op.terms() {
        if key.derivative.order() > 0 || key.pullback.is_some() {
            return Err(CliError::usage(
                "usage",
                format!("{text:?} is not a polynomial (it contains derivatives or pullbacks)"),
            ));
        }
        out = &out + a;
    }
    Ok(out)
}

// --------------------------------------------------------------- outputs

fn ess_json(q: &Op, depth: u32) -> Value {
    let eo = essential_order(q, depth);
    json!({"q": eo.q, "exact": eo.exact})
}

fn degree_json(d: &DegreeBound) -> Value {
    json!({
        "value": d.value.to_string(),
        "exact": d.is_exact(),
        "original": d.original.as_ref().map(|q| q.to_string()),
        "text": d.to_string(),
    })
}

fn residue_list(rec: &Record) -> Value {
    Value::Array(
        rec.residues()
            .map(|(q, w)| json!({"operator": q.to_string(), "residue": json::delta(w)}))
            .collect(),
    )
}

fn basis_text(b: &[MultiIndex]) -> String {
    b.iter()
        .map(|a| a.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn matrix_text(m: &RestrictionMatrix<Gaussian>) -> String {
    format!(
        "{}\ndomain:   {}\ncodomain: {}\n{}",
        m.provenance,
        basis_text(&m.domain_basis()),
        basis_text(&m.codomain_basis()),
        m.matrix
    )
}

// -------------------------------------------------------------- commands

fn cmd_restrict(problem: &Problem, vector: Option<&str>) -> Res<Outcome> {
    let ctx = context(&problem.space)?;
    let q = single_op(problem, &ctx)?;
    let (r, _) = degree(&problem.degree)?;
    let m = restrict(&q, r);
    let basis: Vec<Value> = (0..=r.max(-1))
        .filter(|&k| k >= 0)
        .map(|k| json!({"order": k, "indices": enumerate(ctx.n, k as u32).iter().map(json::multi_index).collect::<Vec<_>>()}))
        .collect();
    let mut value = json!({
        "operator": q.to_string(),
        "degree": r,
        "essential_order": ess_json(&q, r.max(0) as u32),
        "basis_by_order": basis,
        "restriction": json::restriction(&m),
    });
    let mut text = matrix_text(&m);
    if let Some(v) = vector {
        let v = delta_arg(v, ctx.n)?;
        let image = q.apply_delta(&v)?;
        debug_assert_eq!(Ok(&image), m.apply(&v).as_ref());
        text.push_str(&format!("\nimage: {image}"));
        value["image"] = json::delta(&image);
    }
    Ok(Outcome::yes(value, text))
}

fn cmd_adjoint(
    problem: &Problem,
    left: Option<&str>,
    right: Option<&str>,
    poly: Option<&str>,
) -> Res<Outcome> {
    let ctx = context(&problem.space)?;
    let q = single_op(problem, &ctx)?;
    let (r, _) = degree(&problem.degree)?;
    let m = restrict(&q, r);
    let adj = adjoint_restriction(&q, r);
    let qt = q.transpose();
    let mut value = json!({
        "operator": q.to_string(),
        "transpose": qt.to_string(),
        "adjoint": json::restriction(&adj),
    });
    let mut text = format!("transpose: {qt}\n{}", matrix_text(&adj));
    let right = right.map(|t| delta_arg(t, ctx.n)).transpose()?;
    if let Some(l) = left {
        let l = delta_arg(l, ctx.n)?;
        let w = right
            .clone()
            .ok_or_else(|| CliError::usage("usage", "--left needs --right"))?;
        let lhs = inner(m.r_codomain, &l, &m.apply(&w)?)?;
        let rhs = inner(r, &adj.apply(&l)?, &w)?;
        text.push_str(&format!(
            "\ninner(v, Qw) = {}\ninner(Q*v, w) = {}",
            scalar_text(&lhs),
            scalar_text(&rhs)
        ));
        value["pairing"] =
            json!({"lhs": json::scalar(&lhs), "rhs": json::scalar(&rhs), "equal": lhs == rhs});
    }
    if let Some(w) = &right {
        let s = smap(r, w)?;
        text.push_str(&format!("\nS_r(w) = {s}"));
        value["smap"] = json!(s.to_string());
    }
    if let Some(ptext) = poly {
        let f = polynomial_of(&operator(ptext, &ctx)?, ptext)?;
        let qtf = qt.apply_poly(&f)?;
        let t = tmap(r, &f);
        text.push_str(&format!("\nQ^t f = {qtf}\nT_r(f) = {t}"));
        value["transpose_on_poly"] = json!(qtf.to_string());
        value["tmap"] = json::delta(&t);
        if let Some(w) = &right {
            let lhs = pair(&q.apply_delta(w)?, &f)?;
            let rhs = pair(w, &qtf)?;
            text.push_str(&format!(
                "\n<Qw, f> = {}\n<w, Q^t f> = {}",
                scalar_text(&lhs),
                scalar_text(&rhs)
            ));
            value["pair"] =
                json!({"lhs": json::scalar(&lhs), "rhs": json::scalar(&rhs), "equal": lhs == rhs});
        }
    }
    Ok(Outcome::yes(value, text))
}

fn cmd_essord(space: &Space, ops: &[String], depth: u32) -> Res<Outcome> {
    let ctx = context(space)?;
    if ops.len() > 2 {
        return Err(CliError::usage("usage", "essord takes one or two --op"));
    }
    let parsed = ops
        .iter()
        .map(|t| operator(t, &ctx))
        .collect::<Res<Vec<_>>>()?;
    let mut items = Vec::new();
    let mut text = Vec::new();
    for q in &parsed {
        let nf = normal_form(q);
        let eo = essential_order(q, depth);
        text.push(format!(
            "{nf}: essential order {}{}",
            eo.q,
            if eo.exact { "" } else { " (upper bound)" }
        ));
        items.push(json!({"normal_form": nf.to_string(), "essential_order": ess_json(q, depth)}));
    }
    let mut value = json!({"operators": items});
    if let [a, b] = parsed.as_slice() {
        let c = a.commutator(b);
        text.push(format!("equal: {}\ncommutator: {c}", a == b));
        value["equal"] = json!(a == b);
        value["commutator"] = json!(c.to_string());
    }
    Ok(Outcome::yes(value, text.join("\n")))
}

fn cmd_minpoly(problem: &Problem) -> Res<Outcome> {
    let ctx = context(&problem.space)?;
    let q = single_op(problem, &ctx)?;
    let (r, _) = degree(&problem.degree)?;
    let m = restrict(&q, r);
    let own = if m.is_square() {
        Some(minimal_polynomial(&m)?)
    } else {
        None
    };
    let data = ProjectionData::new(m);
    let text = format!(
        "restriction: {}\ngram: {}",
        own.as_ref()
            .map_or("not square".to_string(), |p| p.to_string()),
        data.minimal_polynomial
    );
    let value = json!({
        "operator": q.to_string(),
        "degree": r,
        "restriction": own.as_ref().map(json::unipoly),
        "gram": json::unipoly(&data.minimal_polynomial),
    });
    Ok(Outcome::yes(value, text))
}

fn cmd_projpoly(problem: &Problem) -> Res<Outcome> {
    let ctx = context(&problem.space)?;
    let q = single_op(problem, &ctx)?;
    let (r, _) = degree(&problem.degree)?;
    let data = ProjectionData::of(&q, r);
    let p = projector_onto_kernel(&q, r);
    let linear = linearity_precondition(&q, r);
    let value = json!({
        "operator": q.to_string(),
        "degree": r,
        "projection_polynomial": json::unipoly(&data.projection_polynomial),
        "projector": json::restriction(&p),
        "linearity_precondition": linear,
    });
    let text = format!(
        "p_r(z) = {}\nlinearity precondition: {linear}\n{}",
        data.projection_polynomial,
        matrix_text(&p)
    );
    Ok(Outcome::yes(value, text))
}

fn cmd_kernel(problem: &Problem, res: &Residues) -> Res<Outcome> {
    let ctx = context(&problem.space)?;
    let q = single_op(problem, &ctx)?;
    let (r, _) = degree(&problem.degree)?;
    let m = restrict(&q, r);
    let ker = kernel_basis(&m);
    let mut text = vec![format!("kernel dimension {}", ker.len())];
    text.extend(ker.iter().map(|v| format!("  {v}")));
    let mut value = json!({
        "operator": q.to_string(),
        "degree": r,
        "kernel": ker.iter().map(json::delta).collect::<Vec<_>>(),
    });
    let mut negative = false;
    let given = residues(res, ctx.n)?;
    if let Some((_, w)) = given.iter().find(|(i, _)| *i == 0) {
        let membership = range_membership(&m, w)?;
        let member = membership.is_member();
        negative = !member;
        let kind = match membership {
            RangeMembership::Preimage(_) => "preimage",
            RangeMembership::Obstruction(_) => "obstruction",
        };
        text.push(format!(
            "in range: {member} ({kind} {})",
            membership.certificate()
        ));
        value["member"] = json!(member);
        value["certificate"] =
            json!({"kind": kind, "vector": json::delta(membership.certificate())});
        match pseudoinverse_correction(&m, w) {
            Ok(v) => {
                text.push(format!("pseudoinverse correction: {v}"));
                value["pseudoinverse"] = json::delta(&v);
            }
            Err(Error::NonNormal) => {
                text.push("pseudoinverse correction: restriction is not normal".into());
                value["pseudoinverse"] = Value::Null;
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Outcome {
        value,
        text: text.join("\n"),
        negative,
    })
}

fn cmd_extend_check(problem: &Problem, res: &Residues) -> Res<Outcome> {
    let ctx = context(&problem.space)?;
    let q = single_op(problem, &ctx)?;
    let (_, rq) = degree(&problem.degree)?;
    let rec = record(ctx.n, &rq, std::slice::from_ref(&q), &residues(res, ctx.n)?)?;
    let rep = existence_check(&rec, &q)?;
    let value = json!({
        "operator": q.to_string(),
        "degree": rec.r,
        "exists": rep.exists,
        "certificate": json::delta(&rep.certificate),
        "criterion": rep.criterion.to_string(),
    });
    let text = format!(
        "exists: {}\n{}: {}\ncriterion: {}",
        rep.exists,
        if rep.exists { "preimage" } else { "witness" },
        rep.certificate,
        rep.criterion
    );
    Ok(Outcome {
        value,
        text,
        negative: !rep.exists,
    })
}

fn cmd_counterterm(problem: &Problem, res: &Residues) -> Res<Outcome> {
    let ctx = context(&problem.space)?;
    let ops = problem
        .ops
        .iter()
        .map(|t| operator(t, &ctx))
        .collect::<Res<Vec<_>>>()?;
    let (_, rq) = degree(&problem.degree)?;
    let rec = record(ctx.n, &rq, &ops, &residues(res, ctx.n)?)?;
    let v = match ops.as_slice() {
        [q] => onshell_correction(&rec, q)?,
        _ => multi_commuting_correction(&rec, &ops)?,
    };
    let fixed = apply_counterterm(&rec, &v)?;
    let mut text = vec![format!("counterterm: {v}")];
    for (q, w) in fixed.residues() {
        text.push(format!("residue of {q}: {w}"));
    }
    let value = json!({
        "degree": rec.r,
        "counterterm": json::delta(&v),
        "corrected_residues": residue_list(&fixed),
    });
    Ok(Outcome::yes(value, text.join("\n")))
}

fn cmd_order_raise(problem: &Problem, res: &Residues, k: u32) -> Res<Outcome> {
    let ctx = context(&problem.space)?;
    let q = single_op(problem, &ctx)?;
    let (_, rq) = degree(&problem.degree)?;
    let slot = if k == 0 { q.clone() } else { q.pow(k) };
    let rec = record(
        ctx.n,
        &rq,
        std::slice::from_ref(&slot),
        &residues(res, ctx.n)?,
    )?;
    let v = order_raising_correction(&rec, &q, k)?;
    let fixed = apply_counterterm(&rec, &v)?;
    let w = fixed.residue(&slot).expect("residue registered").clone();
    let raised = q.apply_delta(&w)?;
    let value = json!({
        "operator": q.to_string(),
        "k": k,
        "power": slot.to_string(),
        "counterterm": json::delta(&v),
        "corrected_residue": json::delta(&w),
        "raised_residue": json::delta(&raised),
    });
    let text = format!(
        "counterterm: {v}\ncorrected residue of R^{}: {w}\nresidue of R^{}: {raised}",
        k.max(1),
        k + 1
    );
    Ok(Outcome::yes(value, text))
}

fn casimir_json(rep: &CasimirReport) -> Value {
    json!({
        "level": rep.level,
        "shape": rep.shape,
        "order_zero": rep.order_zero,
        "self_adjoint": rep.self_adjoint,
        "non_commuting": rep.non_commuting.iter().map(|(i, c)| json!({"generator": i, "commutator": c})).collect::<Vec<_>>(),
        "kernel_dims": [rep.kernel_dims.0, rep.kernel_dims.1],
        "passed": rep.passed(),
        "failures": rep.failures(),
    })
}

fn word(text: &str, count: usize) -> Res<(Gaussian, Vec<usize>)> {
    let (c, ix) = text
        .split_once(':')
        .ok_or_else(|| CliError::usage("usage", format!("word {text:?} must look like c:i,j")))?;
    let c = parse_scalar(c.trim()).map_err(|e| CliError::usage("parse_error", e.render(c)))?;
    let ix = indices(ix)?;
    if let Some(bad) = ix.iter().find(|&&i| i >= count) {
        return Err(CliError::usage(
            "usage",
            format!("word {text:?} uses generator {bad}, only {count} given"),
        ));
    }
    Ok((c, ix))
}

fn cmd_casimir(
    space: &Space,
    ops: &[String],
    degree_text: &str,
    words: &[String],
    res: &Residues,
) -> Res<Outcome> {
    let ctx = context(space)?;
    let (r, rq) = degree(degree_text)?;
    let spec = if ops.is_empty() {
        if !words.is_empty() {
            return Err(CliError::usage("usage", "--word needs --op"));
        }
        CasimirSpec::lorentz(ctx.n, &ctx.sig)?
    } else {
        let parsed = ops
            .iter()
            .map(|t| operator(t, &ctx))
            .collect::<Res<Vec<_>>>()?;
        let generators = parsed[1..].to_vec();
        let words = words
            .iter()
            .map(|w| word(w, generators.len()))
            .collect::<Res<Vec<_>>>()?;
        CasimirSpec {
            casimir: parsed[0].clone(),
            generators,
            words,
        }
    };
    let rep = verify_casimir_hypotheses(&spec, r);
    let mut text = vec![format!(
        "level {r}: {}",
        if rep.passed() {
            "all hypotheses hold"
        } else {
            "hypotheses fail"
        }
    )];
    text.extend(rep.failures().into_iter().map(|f| format!("  {f}")));
    let mut value = json!({
        "casimir": spec.casimir.to_string(),
        "generators": spec.generators.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
        "report": casimir_json(&rep),
    });
    let given = residues(res, ctx.n)?;
    if !given.is_empty() && rep.passed() {
        let mut slots = vec![spec.casimir.clone()];
        slots.extend(spec.generators.iter().cloned());
        let rec = record(ctx.n, &rq, &slots, &given)?;
        let v = casimir_correction(&rec, &spec)?;
        let fixed = apply_counterterm(&rec, &v)?;
        text.push(format!("counterterm: {v}"));
        value["counterterm"] = json::delta(&v);
        value["corrected_residues"] = residue_list(&fixed);
    }
    Ok(Outcome {
        value,
        text: text.join("\n"),
        negative: !rep.passed(),
    })
}

fn cmd_renorm(
    space: &Space,
    degree_text: &str,
    degrees: &str,
    lorentz: bool,
    res: &Residues,
) -> Res<Outcome> {
    let ctx = context(space)?;
    let (_, rq) = degree(degree_text)?;
    let pairs = degrees
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|p| {
            let (a, k) = p.split_once(':').ok_or_else(|| {
                CliError::usage("usage", format!("degree {p:?} must look like a:N"))
            })?;
            let a = a
                .trim()
                .parse::<i64>()
                .map_err(|_| CliError::usage("usage", format!("bad homogeneity degree {a:?}")))?;
            let k = k
                .trim()
                .parse::<u32>()
                .map_err(|_| CliError::usage("usage", format!("bad multiplicity {k:?}")))?;
            Ok((a, k))
        })
        .collect::<Res<Vec<_>>>()?;
    let n = ctx.n;
    let p_op = pairs.iter().fold(Op::identity(n), |acc, &(a, k)| {
        acc.compose(&euler(n, Gaussian::from_integer(a)).pow(k))
    });
    let spec = lorentz
        .then(|| CasimirSpec::lorentz(n, &ctx.sig))
        .transpose()?;
    let mut slots = vec![p_op.clone()];
    if let Some(s) = &spec {
        slots.extend(s.generators.iter().cloned());
    }
    let rec = record(n, &rq, &slots, &residues(res, n)?)?;
    let v = renorm_map(&rec, &pairs, spec.as_ref())?;
    let fixed = apply_counterterm(&rec, &v)?;
    let value = json!({
        "product": p_op.to_string(),
        "degree": rec.r,
        "counterterm": json::delta(&v),
        "corrected_residues": residue_list(&fixed),
    });
    let text = format!("P = {p_op}\ncounterterm: {v}");
    Ok(Outcome::yes(value, text))
}

fn cmd_homog(dim: usize, a: &str, degree_text: &str) -> Res<Outcome> {
    signature(dim, None)?;
    let a_val = parse_scalar(a.trim()).map_err(|e| CliError::usage("parse_error", e.render(a)))?;
    let (r, _) = degree(degree_text)?;
    let rep = homogeneous_extension_unique(dim, a_val.clone(), r);
    let value = json!({
        "dim": dim,
        "a": json::scalar(&a_val),
        "degree": r,
        "unique": rep.unique,
        "kernel_levels": rep.kernel_levels,
    });
    let text = format!(
        "unique: {}\nkernel levels: {:?}",
        rep.unique, rep.kernel_levels
    );
    Ok(Outcome {
        value,
        text,
        negative: !rep.unique,
    })
}

fn cmd_chi(space: &Space, m2: &str, idx: &str, c: &str, route: &str) -> Res<Outcome> {
    let sig = signature(space.dim, space.metric.as_deref())?;
    let m2 = rational(m2, "--m2")?;
    let ix = indices(idx)?;
    let c = parse_scalar(c.trim()).map_err(|e| CliError::usage("parse_error", e.render(c)))?;
    let cfg = ChiConfig::<Gaussian>::new(sig.clone(), m2.clone());
    let s = ConstCoeffOperator::monomial(&ix, &sig, &m2)?;
    let (result, counterterm) = match route {
        "projection" => {
            let res = cfg.chi_projection(&s, &c)?;
            let v = cfg.theta_counterterm(&s, &c)?;
            (res, Some(v))
        }
        "explicit" => (cfg.chi_explicit_result(&ix)?, None),
        other => {
            return Err(CliError::usage(
                "usage",
                format!("unknown route {other:?}; use projection or explicit"),
            ))
        }
    };
    let k = ix.len() as u32;
    let lambda: Vec<Value> = lambda_contraction(&ix, &sig)?
        .into_iter()
        .map(|(w, rest)| json!({"weight": w, "indices": rest}))
        .collect();
    let alpha = (0..=k / 2)
        .map(|j| alpha_coefficient::<Gaussian>(j, k, &sig, &m2).map(|a| a.to_string()))
        .collect::<onshell_core::Result<Vec<_>>>()?;
    let closed = chi_explicit::<Gaussian>(&ix, &sig, &m2)?;
    let value = json!({
        "source": s.to_string(),
        "chi": result.chi.to_string(),
        "chi1": result.chi1.to_string(),
        "form": result.to_string(),
        "s": result.s,
        "provenance": result.provenance.to_string(),
        "counterterm": counterterm.as_ref().map(json::delta),
        "lambda": lambda,
        "alpha": alpha,
        "agrees_with_closed_form": closed == result.chi,
    });
    Ok(Outcome::yes(value, result.to_string()))
}

fn cmd_chi_verify(dim: usize, metric: Option<&str>, m2: &str, k_max: u32) -> Res<Outcome> {
    let sigs = match metric {
        Some(_) => vec![signature(dim, metric)?],
        None => {
            let s = signature(dim, None)?;
            vec![s.clone(), s.flipped()]
        }
    };
    let m2s = m2
        .split(',')
        .map(|t| rational(t, "--m2"))
        .collect::<Res<Vec<_>>>()?;
    let rep = chi_crosscheck_with::<Gaussian, _>(k_max, &sigs, &m2s, chi_explicit::<Gaussian>);
    let mut cov = Vec::new();
    let mut cov_ok = true;
    for sig in &sigs {
        for m in &m2s {
            let c = covariance_check::<Gaussian>(k_max, sig, m);
            cov_ok &= c.passed();
            cov.push(json!({"metric": sig.to_string(), "m2": m.to_string(), "checked": c.checked, "failures": c.failures}));
        }
    }
    let mismatches: Vec<Value> = rep
        .mismatches
        .iter()
        .map(|m| {
            json!({
                "metric": m.signature.to_string(),
                "m2": m.m2.to_string(),
                "indices": m.indices,
                "projection": m.projection,
                "explicit": m.explicit,
            })
        })
        .collect();
    let passed = rep.passed() && cov_ok;
    let mut text = vec![format!(
        "{} comparisons, {} mismatches; covariance {}",
        rep.checked,
        rep.mismatches.len(),
        if cov_ok { "holds" } else { "fails" }
    )];
    text.extend(rep.mismatches.iter().map(|m| format!("  {m}")));
    let value = json!({
        "checked": rep.checked,
        "mismatches": mismatches,
        "covariance": cov,
        "passed": passed,
    });
    Ok(Outcome {
        value,
        text: text.join("\n"),
        negative: !passed,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_degree(
    dim: usize,
    residue: Option<&str>,
    bound: Option<&str>,
    op: Option<&str>,
    gamma: Option<&str>,
    beta: Option<&str>,
    vanish: Option<u32>,
    tensor: Option<&str>,
) -> Res<Outcome> {
    let sig = signature(dim, None)?;
    let mut value = json!({"dim": dim});
    let mut text = Vec::new();
    if let Some(v) = residue {
        let d = deg_delta(&delta_arg(v, dim)?);
        text.push(format!("deg_delta: {d}"));
        value["deg_delta"] = degree_json(&d);
    }
    let start = match bound {
        None => None,
        Some(t) if t.trim() == "-inf" => Some(DegreeBound::exact(Degree::NegInfinity)),
        Some(t) => Some(DegreeBound::from_rational(&rational(t, "--bound")?)),
    };
    let needs_bound =
        op.is_some() || gamma.is_some() || beta.is_some() || vanish.is_some() || tensor.is_some();
    let Some(d) = start else {
        if needs_bound {
            return Err(CliError::usage("usage", "bound propagation needs --bound"));
        }
        return Ok(Outcome::yes(value, text.join("\n")));
    };
    text.push(format!("bound: {d}"));
    value["bound"] = degree_json(&d);
    let mut rules = Vec::new();
    if let Some(g) = gamma {
        rules.push(("derivative", bound_derivative(&d, &multi_index(g, dim)?)));
    }
    if let Some(b) = beta {
        rules.push(("monomial", bound_monomial(&d, &multi_index(b, dim)?)));
    }
    if let Some(k) = vanish {
        rules.push(("vanishing_factor", bound_vanishing_factor(&d, k)));
    }
    if let Some(t) = tensor {
        let (d2, n2) = t
            .split_once(':')
            .ok_or_else(|| CliError::usage("usage", "--tensor must look like d:m"))?;
        let d2 = DegreeBound::from_rational(&rational(d2, "--tensor")?);
        let n2 = n2
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::usage("usage", "bad tensor dimension"))?;
        rules.push(("tensor", bound_tensor(&d, dim, &d2, n2)));
    }
    if let Some(t) = op {
        let q = operator(t, &ParseContext::with_signature(dim, sig))?;
        rules.push(("operator", bound_operator(&d, &q)));
    }
    for (name, b) in &rules {
        text.push(format!("{name}: {b}"));
        value[*name] = degree_json(b);
    }
    Ok(Outcome::yes(value, text.join("\n")))
}
