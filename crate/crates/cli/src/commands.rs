//! One function per subcommand; each returns machine-readable JSON plus the
//! process exit code.

use crate::config::{BuiltParams, FlowKindSpec, MetricSpec, RunConfig};
use crate::trace_io;
use anyhow::{anyhow, bail};
use nalgebra::DMatrix;
use num_complex::Complex64;
use otflow_core::exterior::del_delbar;
use otflow_core::flow::{
    chern_ricci_trace, convergence_report, generalized_flow, generalized_flow_closed_form,
    integrate_pluriclosed, FlowControls, FlowKind, PluriclosedSystem,
};
use otflow_core::hermitian::{
    bismut_ricci, bismut_ricci_11, bismut_ricci_closed_form, chern_ricci,
    classify_pluriclosed_shape, closedness_defect, form_to_matrix, fundamental_form,
};
use otflow_core::lie::StructureConstants;
use otflow_core::linalg;
use otflow_core::ot::OTParams;
use otflow_core::scalar::{CExact, C64};
use otflow_core::soliton::{
    chern_ricci_soliton_criteria, classify_chern_ricci_soliton, detect_algebraic_soliton,
};
use otflow_core::Error as CoreError;
use serde_json::{json, Value};
use std::fs::File;
use std::io::Write as _;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit codes, documented in `--help`.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INTERNAL: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const VALIDATION: i32 = 3;
    pub const METRIC: i32 = 4;
    pub const NEGATIVE: i32 = 5;
    pub const FLOW: i32 = 6;
}

pub struct Outcome {
    pub json: Value,
    pub exit: i32,
}

pub fn core_exit_code(e: &CoreError) -> i32 {
    match e {
        CoreError::NotHermitian(_)
        | CoreError::NotPositiveDefinite
        | CoreError::SingularMetric
        | CoreError::NotNormalForm(_) => exit::METRIC,
        CoreError::NegativeTime(_)
        | CoreError::InvariantBreach { .. }
        | CoreError::HypothesesUnmet(_) => exit::FLOW,
        _ => exit::VALIDATION,
    }
}

fn core<T>(r: otflow_core::Result<T>) -> anyhow::Result<T> {
    r.map_err(|e| {
        anyhow!(CliFailure {
            code: core_exit_code(&e),
            message: e.to_string()
        })
    })
}

/// Error carrying its exit code through anyhow.
#[derive(Debug)]
pub struct CliFailure {
    pub code: i32,
    pub message: String,
}

impl std::fmt::Display for CliFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliFailure {}

pub fn failure(code: i32, message: impl Into<String>) -> anyhow::Error {
    anyhow!(CliFailure {
        code,
        message: message.into()
    })
}

pub struct Context_ {
    pub config: RunConfig,
    pub tol: f64,
    pub strict: bool,
    pub exact: bool,
}

fn complex_json(z: Complex64) -> Value {
    json!({"re": z.re, "im": z.im})
}

fn matrix_json(m: &DMatrix<Complex64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex_json(m[(i, j)])).collect()))
            .collect(),
    )
}

/// Builds the structure constants for either parameter flavor, together
/// with the condition flags when semidirect.
fn build_params(ctx: &Context_) -> anyhow::Result<BuiltParams> {
    ctx.config
        .params
        .build()
        .map_err(|e| failure(exit::VALIDATION, format!("{e:#}")))
}

fn build_algebra(
    ctx: &Context_,
) -> anyhow::Result<(
    StructureConstants<C64>,
    Option<otflow_core::ot::SemidirectConditions>,
    Option<OTParams>,
)> {
    match build_params(ctx)? {
        BuiltParams::Ot(p) => {
            let sc = p.build_algebra::<C64>();
            Ok((sc, None, Some(p)))
        }
        BuiltParams::Semidirect(sd) => {
            let (sc, flags) = sd.build_algebra(ctx.tol);
            Ok((sc, Some(flags), None))
        }
    }
}

fn metric_spec(ctx: &Context_) -> anyhow::Result<&MetricSpec> {
    ctx.config
        .metric
        .as_ref()
        .ok_or_else(|| failure(exit::CONFIG, "this command needs a \"metric\" entry"))
}

pub fn validate(ctx: &Context_) -> anyhow::Result<Outcome> {
    let (sc, flags, params) = build_algebra(ctx)?;
    let report = sc.validate();
    let integrable = sc.check_integrability(ctx.tol);
    let pass = report.passes(ctx.tol) && integrable;
    let mut json = json!({
        "tool_version": TOOL_VERSION,
        "command": "validate",
        "tol": ctx.tol,
        "dimension": sc.dim(),
        "max_antisymmetry_defect": report.max_antisymmetry,
        "max_jacobi_defect": report.max_jacobi,
        "max_conjugation_defect": report.max_conjugation,
        "max_ideal_defect": report.max_ideal,
        "integrable": integrable,
        "pass": pass,
    });
    if let Some(flags) = flags {
        json["semidirect_conditions"] = serde_json::to_value(flags)?;
    }
    if let Some(p) = params {
        if let Ok(idx) = p.admissible_mixed_indices() {
            json["admissible_mixed_indices"] =
                Value::Array(idx.iter().map(|&i| json!(i + 1)).collect());
        }
        json["pluriclosed_admissible"] = json!(p.is_pluriclosed_admissible());
    }
    let code = if pass || !ctx.strict {
        exit::OK
    } else {
        exit::VALIDATION
    };
    Ok(Outcome { json, exit: code })
}

pub fn classify_pluriclosed(ctx: &Context_) -> anyhow::Result<Outcome> {
    let params = match build_params(ctx)? {
        BuiltParams::Ot(p) => p,
        BuiltParams::Semidirect(_) => {
            bail!(failure(
                exit::VALIDATION,
                "classify-pluriclosed needs OT parameters (r, s, b, c)"
            ))
        }
    };
    let spec = metric_spec(ctx)?;
    let g = spec
        .metric(params.r(), params.s())
        .map_err(|e| failure(exit::METRIC, format!("{e:#}")))?;
    let shape = core(classify_pluriclosed_shape(&params, g.matrix(), ctx.tol))?;
    let sc = params.build_algebra::<C64>();
    let rows = g.rows();
    let omega = fundamental_form(sc.n_h(), sc.n_i(), &rows);
    let oracle_defect = core(del_delbar(&omega, &sc))?.max_abs();
    let oracle = oracle_defect <= ctx.tol;

    let mut json = json!({
        "tool_version": TOOL_VERSION,
        "command": "classify-pluriclosed",
        "tol": ctx.tol,
        "pluriclosed": oracle,
        "shape_classifier": shape,
        "oracle_defect": oracle_defect,
        "agree": shape == oracle,
        "exact": ctx.exact,
        "admissible_mixed_indices": params
            .admissible_mixed_indices()
            .map(|v| Value::Array(v.iter().map(|&i| json!(i + 1)).collect()))
            .unwrap_or(Value::Null),
    });
    if ctx.exact {
        let sce = params.build_algebra::<CExact>();
        let ge = linalg::convert::<CExact>(&rows);
        let omega = fundamental_form(sce.n_h(), sce.n_i(), &ge);
        let exact_zero = core(del_delbar(&omega, &sce))?.is_empty();
        json["pluriclosed_exact"] = json!(exact_zero);
        json["pluriclosed"] = json!(exact_zero);
    }
    let negative = !json["pluriclosed"].as_bool().unwrap_or(false);
    let code = if negative && ctx.strict {
        exit::NEGATIVE
    } else {
        exit::OK
    };
    Ok(Outcome { json, exit: code })
}

pub fn curvature(ctx: &Context_, which: &str) -> anyhow::Result<Outcome> {
    let (sc, _, params) = build_algebra(ctx)?;
    let spec = metric_spec(ctx)?;
    let g = spec
        .metric(sc.n_h(), sc.n_i())
        .map_err(|e| failure(exit::METRIC, format!("{e:#}")))?;
    // closedness refers to the full form; the (1,1) part alone is the
    // flow driver
    let (full, rho) = match which {
        "chern" => {
            let rho = core(chern_ricci(&sc, &g))?;
            (rho.clone(), rho.projection(1, 1))
        }
        "bismut" => {
            let full = core(bismut_ricci(&sc, &g.rows()))?;
            let rho = full.projection(1, 1);
            (full, rho)
        }
        other => bail!(failure(exit::CONFIG, format!("unknown curvature {other}"))),
    };
    let r = form_to_matrix(&rho);
    let mut json = json!({
        "tool_version": TOOL_VERSION,
        "command": "curvature",
        "which": which,
        "coefficients": matrix_json(&r),
        "closed_defect": core(closedness_defect(&full, &sc))?,
        "reality_defect": rho.reality_defect(),
    });
    if which == "bismut" {
        if let (Some(p), Ok(Some(nf))) = (&params, spec.normal_form()) {
            if nf.check_admissible(p).is_ok() {
                let closed = core(bismut_ricci_closed_form::<C64>(p, &nf))?;
                json["closed_form_deviation"] = json!(core(rho.sub(&closed))?.max_abs());
                if ctx.exact {
                    let sce = p.build_algebra::<CExact>();
                    let ge = linalg::convert::<CExact>(&linalg::from_nalgebra(&nf.to_matrix()));
                    let direct = core(bismut_ricci(&sce, &ge))?.projection(1, 1);
                    let closed = core(bismut_ricci_closed_form::<CExact>(p, &nf))?;
                    json["closed_form_exact_match"] = json!(direct == closed);
                }
            }
        }
    }
    Ok(Outcome {
        json,
        exit: exit::OK,
    })
}

pub fn soliton(ctx: &Context_, flow: FlowKindSpec) -> anyhow::Result<Outcome> {
    let (sc, _, params) = build_algebra(ctx)?;
    let spec = metric_spec(ctx)?;
    let g = spec
        .metric(sc.n_h(), sc.n_i())
        .map_err(|e| failure(exit::METRIC, format!("{e:#}")))?;
    let rho = match flow {
        FlowKindSpec::ChernRicci => core(chern_ricci(&sc, &g))?.projection(1, 1),
        FlowKindSpec::Pluriclosed | FlowKindSpec::Generalized => core(bismut_ricci_11(&sc, &g))?,
    };
    let cert = core(detect_algebraic_soliton(&sc, &g, &rho))?;
    let mut json = json!({
        "tool_version": TOOL_VERSION,
        "command": "soliton",
        "flow": serde_json::to_value(flow)?,
        "found": cert.is_some(),
        "certificate": cert
            .as_ref()
            .map(|c| serde_json::to_value(c).expect("serializable"))
            .unwrap_or(Value::Null),
    });
    match flow {
        FlowKindSpec::ChernRicci => {
            let shape = classify_chern_ricci_soliton(&g, ctx.tol);
            json["shape_classifier"] = json!(shape);
            json["classifier_agrees"] = json!(shape == cert.is_some());
            let criteria = core(chern_ricci_soliton_criteria(&sc, &g, &rho))?;
            json["criteria"] = serde_json::to_value(&criteria)?;
        }
        FlowKindSpec::Pluriclosed => {
            if let (Some(p), Ok(Some(nf))) = (&params, spec.normal_form()) {
                if nf.check_admissible(p).is_ok() {
                    let equal_a = nf
                        .a()
                        .iter()
                        .all(|&a| (a - nf.a()[0]).abs() <= ctx.tol * (1.0 + nf.a()[0].abs()));
                    let shape = nf.mixed().is_empty() && equal_a;
                    json["shape_classifier"] = json!(shape);
                    json["classifier_agrees"] = json!(shape == cert.is_some());
                }
            }
        }
        FlowKindSpec::Generalized => {}
    }
    let code = if cert.is_none() && ctx.strict {
        exit::NEGATIVE
    } else {
        exit::OK
    };
    Ok(Outcome { json, exit: code })
}

fn flow_controls(ctx: &Context_) -> FlowControls {
    let mut ctl = FlowControls::default();
    if let Some(f) = &ctx.config.flow {
        if let Some(rtol) = f.rtol {
            ctl.rtol = rtol;
        }
        if let Some(atol) = f.atol {
            ctl.atol = atol;
        }
        if let Some(first) = f.first_sample {
            ctl.first_sample = first;
        }
        if let Some(factor) = f.sample_factor {
            ctl.sample_factor = factor;
        }
    }
    ctl
}

fn write_output(path: Option<&str>, bytes: &[u8]) -> anyhow::Result<()> {
    if let Some(path) = path {
        let mut f = File::create(path)
            .map_err(|e| failure(exit::CONFIG, format!("cannot create {path}: {e}")))?;
        f.write_all(bytes)
            .map_err(|e| failure(exit::CONFIG, format!("cannot write {path}: {e}")))?;
    }
    Ok(())
}

pub fn flow(ctx: &Context_, kind: FlowKindSpec) -> anyhow::Result<Outcome> {
    let flow_spec = ctx
        .config
        .flow
        .ok_or_else(|| failure(exit::CONFIG, "this command needs a \"flow\" entry"))?;
    let t_max = flow_spec.t_max;
    let ctl = flow_controls(ctx);
    let (sc, flags, params) = build_algebra(ctx)?;
    let spec = metric_spec(ctx)?;
    let g0 = spec
        .metric(sc.n_h(), sc.n_i())
        .map_err(|e| failure(exit::METRIC, format!("{e:#}")))?;
    let output = ctx.config.output.clone().unwrap_or_default();

    let mut json = json!({
        "tool_version": TOOL_VERSION,
        "command": "flow",
        "flow": serde_json::to_value(kind)?,
        "t_max": t_max,
        "rtol": ctl.rtol,
        "atol": ctl.atol,
    });

    let samples;
    match kind {
        FlowKindSpec::ChernRicci => {
            samples = core(chern_ricci_trace(&g0, t_max, &ctl))?;
            if output.trace_csv.is_some() {
                let mut buf = Vec::new();
                trace_io::write_matrix_csv(&mut buf, &samples)?;
                write_output(output.trace_csv.as_deref(), &buf)?;
            }
        }
        FlowKindSpec::Pluriclosed => {
            let p = params
                .ok_or_else(|| failure(exit::VALIDATION, "pluriclosed flow needs OT parameters"))?;
            let nf = spec.normal_form()?.ok_or_else(|| {
                failure(
                    exit::METRIC,
                    "pluriclosed flow needs a normal-form metric (A/B/C)",
                )
            })?;
            let system = core(PluriclosedSystem::new(p, &nf))?;
            let trace = core(integrate_pluriclosed(
                &system,
                &system.initial_state(&nf),
                t_max,
                &ctl,
            ))?;
            if output.trace_csv.is_some() {
                let mut buf = Vec::new();
                core(trace.write_csv(&mut buf))?;
                write_output(output.trace_csv.as_deref(), &buf)?;
            }
            let end = trace.final_state();
            json["final_state"] = json!({
                "t": end.t,
                "A": end.a,
                "B": end.b,
                "C": end.c.iter().map(|z| complex_json(*z)).collect::<Vec<_>>(),
            });
            json["max_flow_residual"] = json!(trace
                .samples()
                .iter()
                .map(|s| s.residual)
                .fold(0.0, f64::max));
            samples = core(trace.metric_samples())?;
        }
        FlowKindSpec::Generalized => {
            let trace = core(generalized_flow(&sc, &g0, t_max, &ctl))?;
            samples = trace.samples;
            if output.trace_csv.is_some() {
                let mut buf = Vec::new();
                trace_io::write_matrix_csv(&mut buf, &samples)?;
                write_output(output.trace_csv.as_deref(), &buf)?;
            }
            if let Some(flags) = &flags {
                json["semidirect_conditions"] = serde_json::to_value(flags)?;
                if generalized_flow_closed_form(&sc, flags, &g0, 0.0).is_ok() {
                    let mut worst: f64 = 0.0;
                    for (t, gt) in &samples {
                        let closed = core(generalized_flow_closed_form(&sc, flags, &g0, *t))?;
                        let scale = gt.iter().map(|z| z.norm()).fold(1.0, f64::max);
                        let dev = (gt - closed).iter().map(|z| z.norm()).fold(0.0, f64::max);
                        worst = worst.max(dev / scale);
                    }
                    json["closed_form_max_rel_dev"] = json!(worst);
                }
            }
        }
    }

    let report_kind = match kind {
        FlowKindSpec::ChernRicci => FlowKind::ChernRicci,
        FlowKindSpec::Pluriclosed => FlowKind::Pluriclosed,
        FlowKindSpec::Generalized => FlowKind::Generalized,
    };
    let report = core(convergence_report(&samples, sc.n_h(), report_kind, 0.01))?;
    json["convergence"] = serde_json::to_value(&report)?;
    if let Some(path) = output.report_json.as_deref() {
        write_output(Some(path), serde_json::to_string_pretty(&json)?.as_bytes())?;
    }
    Ok(Outcome {
        json,
        exit: exit::OK,
    })
}

pub fn report(
    ctx: &Context_,
    trace_path: Option<&str>,
    kind: FlowKindSpec,
) -> anyhow::Result<Outcome> {
    let path = trace_path
        .map(str::to_string)
        .or_else(|| ctx.config.output.as_ref().and_then(|o| o.trace_csv.clone()))
        .ok_or_else(|| {
            failure(
                exit::CONFIG,
                "report needs a trace path (--trace or output.trace_csv)",
            )
        })?;
    let file =
        File::open(&path).map_err(|e| failure(exit::CONFIG, format!("cannot open {path}: {e}")))?;
    let samples = trace_io::read_trace_csv(file)
        .map_err(|e| failure(exit::CONFIG, format!("cannot parse {path}: {e:#}")))?;
    let (sc, _, _) = build_algebra(ctx)?;
    let report_kind = match kind {
        FlowKindSpec::ChernRicci => FlowKind::ChernRicci,
        FlowKindSpec::Pluriclosed => FlowKind::Pluriclosed,
        FlowKindSpec::Generalized => FlowKind::Generalized,
    };
    let report = core(convergence_report(&samples, sc.n_h(), report_kind, 0.01))?;
    let json = json!({
        "tool_version": TOOL_VERSION,
        "command": "report",
        "trace": path,
        "flow": serde_json::to_value(kind)?,
        "samples": samples.len(),
        "convergence": serde_json::to_value(&report)?,
    });
    let output = ctx.config.output.clone().unwrap_or_default();
    if let Some(p) = output.report_json.as_deref() {
        write_output(Some(p), serde_json::to_string_pretty(&json)?.as_bytes())?;
    }
    Ok(Outcome {
        json,
        exit: exit::OK,
    })
}
