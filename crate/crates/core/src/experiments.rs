//! The command-line experiments as library calls.
//!
//! Each `cmd_*` validates its parameters before computing anything and
//! returns a [`RunOutput`]: a JSON document, optional file artifacts and the
//! manifest that reproduces them.

use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use crate::constants::{
    alpha_of_beta, beta_roots, classify_region, counterexample_coefficient, counterexample_roots,
    critical_exponents, delta, discriminant, gamma_coefficients, gamma_of_beta, gamma_one, m_of_beta,
    region_sweep, ExtReal, FlowSpec, Params, SweepGrid,
};
use crate::counterexamples::{first_obstruction, second_obstruction, sign_certificate, write_sign_certificate};
use crate::discretization::Basis;
use crate::error::{Error, Result};
use crate::flows::{evolve, FlowConfig, FlowForm};
use crate::improvements::{estimate_lambda_star_with, verify_inequality_on, OptimizerConfig, SampleFamily};
use crate::init::InitSpec;
use crate::manifest::{RunManifest, RunOutput};
use crate::verify::{self, VerifyOptions};

fn to_json<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    f(&mut out)?;
    Ok(out)
}

/// Every closed-form exponent and coefficient at `(d, p)`, and at `beta`
/// when given.
pub fn cmd_constants(d: f64, p: f64, beta: Option<f64>) -> Result<RunOutput> {
    let params = Params::new(d, p)?;
    if let Some(b) = beta {
        if !b.is_finite() {
            return Err(Error::param(format!("beta = {b} must be finite")));
        }
    }
    let (two_star, two_sharp) = critical_exponents(&params);
    let gc = gamma_coefficients(&params);
    let roots = if d >= 1.0 { beta_roots(&params).ok() } else { None };
    let b_roots = if d >= 3.0 { counterexample_roots(&params) } else { None };
    let mut doc = json!({
        "schema_version": crate::SCHEMA_VERSION,
        "d": d,
        "p": p,
        "two_star": two_star,
        "two_sharp": two_sharp,
        "gamma_a": gc.a,
        "gamma_b": gc.b,
        "discriminant": discriminant(&params),
        "delta": delta(&params),
        "gamma1": gamma_one(&params),
        "beta_roots": roots,
        "counterexample_roots": b_roots.map(|(m, p)| json!({"B_minus": m, "B_plus": p})),
    });
    if let Some(beta) = beta {
        let region = classify_region(&params, beta)?;
        doc["beta"] = json!({
            "beta": beta,
            "gamma": gamma_of_beta(&params, beta),
            "m": m_of_beta(p, beta),
            "kappa": beta * (p - 2.0) + 1.0,
            "alpha": alpha_of_beta(&params, beta),
            "A": counterexample_coefficient(&params, beta),
            "admissible": region.admissible,
        });
    }
    let manifest = RunManifest::new("constants", json!({"d": d, "p": p, "beta": beta}));
    Ok(RunOutput::new(manifest, doc))
}

/// Arguments of [`cmd_region`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionArgs {
    pub grid: SweepGrid,
    /// Also tabulate `beta_-` and `beta_+` for `d = 3..=10`.
    pub curves: bool,
}

/// `(p, beta)` classification grid, written as `region.csv`.
pub fn cmd_region(args: RegionArgs) -> Result<RunOutput> {
    let sweep = region_sweep(args.grid)?;
    let summary = sweep.summary();
    let mut doc = json!({ "summary": to_json(&summary)? });
    let csv = csv_bytes(|out| sweep.write_csv(out))?;
    let mut output = RunOutput::new(RunManifest::new("region", to_json(&args)?), Value::Null);
    output = output.artifact("region.csv", csv);
    if args.curves {
        let dims: Vec<f64> = (3..=10).map(f64::from).collect();
        let curves = beta_curves(&dims, args.grid.n_p)?;
        output = output.artifact("beta_curves.csv", csv_bytes(|out| write_beta_curves(&curves, out))?);
        doc["curves"] = json!({ "dims": dims, "rows": curves.len() });
    }
    output.json = doc;
    Ok(output)
}

/// One point of the curves `p -> beta_+-(p, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaCurvePoint {
    pub d: f64,
    pub p: f64,
    pub beta_minus: ExtReal,
    pub beta_plus: ExtReal,
}

/// `beta_+-(p, d)` on `n_p` equispaced points of `[1, 2^*]` per dimension.
pub fn beta_curves(dims: &[f64], n_p: usize) -> Result<Vec<BetaCurvePoint>> {
    let mut rows = Vec::with_capacity(dims.len() * n_p);
    for &d in dims {
        let hi = Params::new(d, 1.0)?.two_star().finite().ok_or_else(|| {
            Error::Range { what: "dimension d", detail: format!("d = {d}: curves need a finite 2^*") }
        })?;
        for i in 0..n_p {
            let p = crate::constants::lin(1.0, hi, i, n_p);
            let r = beta_roots(&Params::new(d, p)?)?;
            rows.push(BetaCurvePoint { d, p, beta_minus: r.beta_minus, beta_plus: r.beta_plus });
        }
    }
    Ok(rows)
}

pub fn write_beta_curves<W: std::io::Write>(rows: &[BetaCurvePoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["d", "p", "beta_minus", "beta_plus"])?;
    for r in rows {
        w.write_record([format!("{}", r.d), format!("{}", r.p), r.beta_minus.to_field(), r.beta_plus.to_field()])?;
    }
    w.flush()?;
    Ok(())
}

/// Arguments of [`cmd_flow`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowArgs {
    pub form: FlowForm,
    pub d: f64,
    pub p: f64,
    /// `None` selects `beta_-(p, d)` for the nonlinear forms.
    pub beta: Option<ExtReal>,
    pub init: String,
    pub t_end: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub config: FlowConfig,
}

/// Flow selected by `form` and `beta`.
pub fn flow_spec(form: FlowForm, params: &Params, beta: Option<ExtReal>) -> Result<FlowSpec> {
    match form {
        FlowForm::RhoHeat | FlowForm::ULinear => match beta {
            None | Some(ExtReal::Finite(1.0)) => Ok(FlowSpec::heat(params)),
            Some(b) => Err(Error::param(format!("{} is the heat flow; beta = {b:?} is not 1", form.name()))),
        },
        FlowForm::RhoFde | FlowForm::WNonlinear => {
            let beta = match beta {
                Some(b) => b,
                None => beta_roots(params)?.beta_minus,
            };
            match beta {
                ExtReal::Finite(b) => FlowSpec::nonlinear(params, b),
                _ => FlowSpec::infinite_beta(params),
            }
        }
    }
}

/// Evolves the initial datum and records `F`, the entropy, the Fisher
/// information, the conserved quantity and `int z u^p`.
pub fn cmd_flow(args: &FlowArgs) -> Result<RunOutput> {
    let params = Params::new(args.d, args.p)?;
    let init: InitSpec = args.init.parse()?;
    if !(args.t_end > 0.0) || !args.t_end.is_finite() {
        return Err(Error::param(format!("t_end = {} must be positive", args.t_end)));
    }
    let spec = flow_spec(args.form, &params, args.beta)?;
    let basis: Arc<Basis> = Basis::new(args.d, args.n)?;
    let state = init.state(&basis, args.form, spec)?;
    let (_, traj) = evolve(&state, args.t_end, &args.config, &mut |_, _| {})?;
    let admissible = match spec.beta_finite() {
        Some(b) => Some(classify_region(&params, b)?.admissible),
        None => None,
    };
    let csv = csv_bytes(|out| traj.write_csv(out))?;
    let doc = json!({
        "schema_version": crate::SCHEMA_VERSION,
        "form": args.form,
        "spec": spec,
        "init": init.to_string(),
        "t_end": args.t_end,
        "N": args.n,
        "admissible": admissible,
        "monotone": traj.is_monotone(args.config.tol_mono),
        "max_increase": traj.max_increase(),
        "max_drift": traj.max_drift(),
        "F_initial": traj.samples[0].F,
        "F_final": traj.last().F,
        "samples": traj.samples,
    });
    let seed = match init {
        InitSpec::Random { seed, .. } => Some(seed),
        _ => None,
    };
    let mut manifest = RunManifest::new("flow", to_json(args)?)
        .with_tolerances(to_json(&args.config)?)
        .with_order(args.n);
    if let Some(s) = seed {
        manifest = manifest.with_seed(s);
    }
    Ok(RunOutput::new(manifest, doc).artifact("trajectory.csv", csv))
}

/// Arguments of [`cmd_counterexample`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleArgs {
    pub d: f64,
    pub p: f64,
    pub a: f64,
    pub b: f64,
    #[serde(rename = "N")]
    pub n: usize,
    /// Dimensions of an additional sign certificate of `A(p, beta_-)`.
    pub certificate_dims: Vec<f64>,
    pub certificate_points: usize,
}

/// First obstruction at `p = 2^*`, second obstruction for `2^# < p < 2^*`.
pub fn cmd_counterexample(args: &CounterexampleArgs) -> Result<RunOutput> {
    let params = Params::new(args.d, args.p)?;
    if !(args.d >= 3.0) {
        return Err(Error::Range { what: "dimension d", detail: format!("d = {} must be at least 3", args.d) });
    }
    let star = params.two_star().finite().expect("d >= 3");
    let sharp = params.two_sharp().finite().expect("d >= 3");
    let at_star = (args.p - star).abs() <= 1e-12 * star;
    let report = if at_star {
        json!({ "obstruction": "first", "report": to_json(&first_obstruction(args.d, args.a, args.b, args.n)?)? })
    } else if args.p > sharp && args.p < star {
        json!({ "obstruction": "second", "report": to_json(&second_obstruction(args.d, args.p, args.a, args.b, args.n)?)? })
    } else {
        return Err(Error::Range {
            what: "exponent p",
            detail: format!("p = {} must equal 2^* = {star} or lie in ({sharp}, {star})", args.p),
        });
    };
    let mut out = RunOutput::new(RunManifest::new("counterexample", to_json(args)?).with_order(args.n), report);
    if !args.certificate_dims.is_empty() {
        let rows = sign_certificate(&args.certificate_dims, args.certificate_points)?;
        out.json["certificate"] = json!({
            "rows": rows.len(),
            "min_A": rows.iter().map(|r| r.a_coef).fold(f64::INFINITY, f64::min),
            "all_positive": rows.iter().all(|r| r.a_coef > 0.0),
        });
        out = out.artifact("sign_certificate.csv", csv_bytes(|o| write_sign_certificate(&rows, o))?);
    }
    Ok(out)
}

/// Arguments of [`cmd_improve`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImproveArgs {
    pub d: f64,
    pub p: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Moment-projected samples checked against the derived constant.
    pub verify_samples: usize,
}

pub fn cmd_improve(args: &ImproveArgs) -> Result<RunOutput> {
    Params::new(args.d, args.p)?;
    let cfg = OptimizerConfig { seed: args.seed, ..Default::default() };
    let est = estimate_lambda_star_with(args.d, args.p, args.n, args.restarts, &cfg)?;
    let mut doc = to_json(&est)?;
    if args.verify_samples > 0 {
        if let Some(lambda) = est.lambda_bound {
            let r = verify_inequality_on(
                SampleFamily::MomentProjected,
                args.d,
                args.p,
                lambda,
                args.verify_samples,
                args.n,
                args.seed,
            )?;
            doc["verification"] = to_json(&r)?;
        }
    }
    let csv = csv_bytes(|out| est.minimizer.write_csv(out))?;
    let tol = json!({ "gtol": cfg.gtol, "ctol": cfg.ctol, "max_iter": cfg.max_iter });
    let manifest = RunManifest::new("improve", to_json(args)?)
        .with_tolerances(tol)
        .with_order(args.n)
        .with_seed(args.seed);
    Ok(RunOutput::new(manifest, doc).artifact("minimizer.csv", csv))
}

/// Runs a verification suite; exit code 4 when a check fails.
pub fn cmd_verify(suite: &str, opts: &VerifyOptions) -> Result<RunOutput> {
    let report = verify::run_suite(suite, opts)?;
    let mut out = RunOutput::new(RunManifest::new("verify", json!({ "suite": suite, "options": opts })), to_json(&report)?);
    out.text = Some(report.tap());
    out.exit_code = if report.passed() { 0 } else { 4 };
    Ok(out.artifact("report.tap", report.tap().into_bytes()))
}
