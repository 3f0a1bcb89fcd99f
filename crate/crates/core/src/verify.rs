//! Invariant suites with TAP output.

use serde::Serialize;

use crate::constants::{
    beta_roots, counterexample_coefficient, counterexample_roots, gamma_of_beta, FlowSpec, Params,
};
use crate::counterexamples::{first_obstruction, second_obstruction, sign_certificate};
use crate::discretization::Basis;
use crate::error::{Error, Result};
use crate::flows::{evolve, moment_decay_check, verify_exact_solution, FlowConfig, FlowForm, FlowState};
use crate::functionals::lemma_identities;
use crate::improvements::{
    antipodal_constants, antipodal_spectral_check, estimate_lambda_star, improved_constant, logsob_improvement,
    verify_improved_inequality,
};
use crate::sampling;

pub const SUITES: [&str; 12] = [
    "quadrature",
    "roots",
    "lemma-identities",
    "heat-monotone",
    "nonlinear-monotone",
    "first-obstruction",
    "second-obstruction",
    "exact-solution",
    "moment-decay",
    "improve",
    "antipodal",
    "logsob",
];

/// Overrides for the suites that take parameters; `None` keeps each
/// suite's default.
#[derive(Debug, Clone, Default, Serialize)]
pub struct VerifyOptions {
    pub d: Option<f64>,
    pub p: Option<f64>,
    pub samples: Option<usize>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub suite: String,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn tap(&self) -> String {
        let mut out = format!("TAP version 13\n1..{}\n", self.checks.len());
        for (i, c) in self.checks.iter().enumerate() {
            let status = if c.passed { "ok" } else { "not ok" };
            out.push_str(&format!("{status} {} - {} # {}\n", i + 1, c.name, c.detail));
        }
        out
    }
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.0.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    /// `value <= bound`, failing on NaN.
    fn at_most(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        self.push(name, value <= bound, format!("{value:e} <= {bound:e}"));
    }

    fn at_least(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        self.push(name, value >= bound, format!("{value:e} >= {bound:e}"));
    }
}

/// Runs one suite, or every suite for `"all"`.
pub fn run_suite(suite: &str, opts: &VerifyOptions) -> Result<VerifyReport> {
    let names: Vec<&str> = match suite {
        "all" => SUITES.to_vec(),
        s if SUITES.contains(&s) => vec![s],
        s => {
            return Err(Error::param(format!("unknown suite '{s}'; expected one of {} or all", SUITES.join(", "))))
        }
    };
    validate(opts)?;
    let mut checks = Checks::default();
    for name in names {
        run_one(name, opts, &mut checks)?;
    }
    Ok(VerifyReport { schema_version: crate::SCHEMA_VERSION, suite: suite.to_string(), checks: checks.0 })
}

fn validate(opts: &VerifyOptions) -> Result<()> {
    if let Some(d) = opts.d {
        Params::new(d, opts.p.unwrap_or(2.0))?;
    }
    if let Some(p) = opts.p {
        Params::new(opts.d.unwrap_or(5.0), p)?;
    }
    if opts.samples == Some(0) {
        return Err(Error::param("samples must be positive"));
    }
    Ok(())
}

fn run_one(name: &str, o: &VerifyOptions, c: &mut Checks) -> Result<()> {
    match name {
        "quadrature" => quadrature(o, c),
        "roots" => roots(c),
        "lemma-identities" => lemma(o, c),
        "heat-monotone" => heat_monotone(o, c),
        "nonlinear-monotone" => nonlinear_monotone(o, c),
        "first-obstruction" => first(o, c),
        "second-obstruction" => second(o, c),
        "exact-solution" => exact(o, c),
        "moment-decay" => moment(o, c),
        "improve" => improve(o, c),
        "antipodal" => antipodal(o, c),
        "logsob" => logsob(c),
        _ => unreachable!(),
    }
}

fn quadrature(o: &VerifyOptions, c: &mut Checks) -> Result<()> {
    let dims = match o.d {
        Some(d) => vec![d],
        None => vec![1.0, 2.0, 2.5, 3.0, 4.0, 5.0, 8.0, 10.0],
    };
    for d in dims {
        let q = Basis::new(d, o.n.unwrap_or(64))?;
        let q = q.quadrature();
        c.at_most(format!("mass d={d}"), (q.integrate(|_| 1.0) - 1.0).abs(), 1e-13);
        c.at_most(format!("second moment d={d}"), (q.integrate(|z| z * z) - 1.0 / (d + 1.0)).abs(), 1e-12);
    }
    Ok(())
}

fn roots(c: &mut Checks) -> Result<()> {
    let mut worst_gamma: f64 = 0.0;
    let mut worst_a: f64 = 0.0;
    for d in [3.0, 4.0, 5.0, 6.0, 8.0] {
        let star = 2.0 * d / (d - 2.0);
        for i in 0..10 {
            let p = 1.0 + (star - 1.0) * (i as f64 + 0.5) / 10.0;
            let params = Params::new(d, p)?;
            let r = beta_roots(&params)?;
            for b in [r.beta_minus, r.beta_plus].into_iter().filter_map(|b| b.finite()) {
                worst_gamma = worst_gamma.max(gamma_of_beta(&params, b).abs());
            }
            if let Some((lo, hi)) = counterexample_roots(&params) {
                for b in [lo, hi] {
                    worst_a = worst_a.max(counterexample_coefficient(&params, b).abs());
                }
            }
        }
    }
    c.at_most("gamma vanishes at beta roots", worst_gamma, 1e-10);
    c.at_most("A vanishes at its roots", worst_a, 1e-10);
    for d in 4..=10 {
        let d = f64::from(d);
        let r = beta_roots(&Params::new(d, 2.0 * d / (d - 2.0))?)?;
        let want = (d - 2.0) / (d - 3.0);
        let err = [r.beta_minus, r.beta_plus]
            .iter()
            .map(|b| b.finite().map_or(f64::INFINITY, |b| (b - want).abs()))
            .fold(0.0, f64::max);
        c.at_most(format!("double root at 2^* d={d}"), err, 1e-13);
    }
    Ok(())
}

fn lemma(o: &VerifyOptions, c: &mut Checks) -> Result<()> {
    let dims = o.d.map_or(vec![3.0, 5.0], |d| vec![d]);
    for d in dims {
        let basis = Basis::new(d, o.n.unwrap_or(128))?;
        let mut rng = sampling::rng(o.seed);
        let (mut first, mut second): (f64, f64) = (0.0, 0.0);
        for _ in 0..o.samples.unwrap_or(20) {
            let f = sampling::random_positive(&basis, &mut rng, 12);
            let l = lemma_identities(&f)?;
            first = first.max(l.first_residual);
            second = second.max(l.second_residual);
        }
        c.at_most(format!("first identity d={d}"), first, 1e-9);
        c.at_most(format!("second identity d={d}"), second, 1e-9);
    }
    Ok(())
}

fn heat_monotone(o: &VerifyOptions, c: &mut Checks) -> Result<()> {
    let (d, p) = (o.d.unwrap_or(5.0), o.p.unwrap_or(3.0));
    let params = Params::new(d, p)?;
    let basis = Basis::new(d, o.n.unwrap_or(128))?;
    let cfg = FlowConfig::default();
    let mut rng = sampling::rng(o.seed);
    let (mut rise, mut drift) = (f64::NEG_INFINITY, 0.0f64);
    for _ in 0..o.samples.unwrap_or(50) {
        let rho = sampling::random_positive(&basis, &mut rng, 8).powf(p)?;
        let s = FlowState::new(FlowForm::RhoHeat, FlowSpec::heat(&params), rho)?;
        let (_, traj) = evolve(&s, 1.0, &cfg, &mut |_, _| {})?;
        rise = rise.max(traj.max_increase());
        drift = drift.max(traj.max_drift());
    }
    c.at_most(format!("heat flow F nonincreasing d={d} p={p}"), rise, cfg.tol_mono);
    c.at_most("mass drift", drift, 1e-13);
    Ok(())
}

fn nonlinear_monotone(o: &VerifyOptions, c: &mut Checks) -> Result<()> {
    let (d, p) = (o.d.unwrap_or(5.0), o.p.unwrap_or(3.3));
    let params = Params::new(d, p)?;
    let cfg = FlowConfig::default();
    let basis = Basis::new(d, o.n.unwrap_or(64))?;
    let spec = crate::experiments::flow_spec(FlowForm::WNonlinear, &params, None)?;
    let mut rng = sampling::rng(o.seed);
    let (mut rise, mut drift) = (f64::NEG_INFINITY, 0.0f64);
    for _ in 0..o.samples.unwrap_or(10) {
        let u = sampling::random_positive(&basis, &mut rng, 8);
        let s = match spec.beta_finite() {
            Some(beta) => FlowState::new(FlowForm::WNonlinear, spec, u.powf(1.0 / beta)?)?,
            None => FlowState::new(FlowForm::RhoFde, spec, u.powf(p)?)?,
        };
        let (_, traj) = evolve(&s, 1.0, &cfg, &mut |_, _| {})?;
        rise = rise.max(traj.max_increase());
        drift = drift.max(traj.max_drift());
    }
    c.at_most(format!("nonlinear flow F nonincreasing d={d} p={p}"), rise, cfg.tol_mono);
    c.at_most("conserved drift", drift, cfg.tol_cons);
    if o.d.is_none() && o.p.is_none() {
        let params = Params::new(3.0, 6.0)?;
        let spec = FlowSpec::infinite_beta(&params)?;
        let basis = Basis::new(3.0, o.n.unwrap_or(64))?;
        let u = sampling::random_positive(&basis, &mut sampling::rng(o.seed), 8);
        let s = FlowState::new(FlowForm::RhoFde, spec, u.powf(6.0)?)?;
        let (_, traj) = evolve(&s, 1.0, &cfg, &mut |_, _| {})?;
        c.at_most("d=3 p=6 m=2/3 F nonincreasing", traj.max_increase(), cfg.tol_mono);
    }
    Ok(())
}

fn first(o: &VerifyOptions, c: &mut Checks) -> Result<()> {
    let d = o.d.unwrap_or(5.0);
    let r = first_obstruction(d, 1.0, 0.4, o.n.unwrap_or(128))?;
    c.at_most(format!("conformal datum is optimal d={d}"), r.deficit.abs(), 1e-12);
    c.at_most("fast-diffusion dissipation vanishes", r.fde_dissipation.abs(), 1e-10);
    c.at_most("fast-diffusion solves through the datum", r.fde_mismatch, 1e-8);
    c.at_least("heat flow leaves the family", r.heat_mismatch, 1e-3);
    c.push(
        "heat flow raises F",
        r.heat_max_deficit > r.deficit + 1e-10,
        format!("max F = {:e} over [0, {}]", r.heat_max_deficit, r.heat_horizon),
    );
    Ok(())
}

fn second(o: &VerifyOptions, c: &mut Checks) -> Result<()> {
    let (d, p) = (o.d.unwrap_or(5.0), o.p.unwrap_or(3.25));
    let r = second_obstruction(d, p, 1.0, 0.4, o.n.unwrap_or(128))?;
    c.push(format!("dF/dt positive d={d} p={p}"), r.positive && r.dFdt_numeric > 0.0, format!("dF/dt = {:e}", r.rhs));
    c.at_most("carre du champ expansion matches A J_cc", r.analytic_rel_error, 1e-4);
    c.at_most("finite difference matches A J_cc", r.numeric_rel_error, 1e-4);
    if o.d.is_none() {
        let rows = sign_certificate(&[3.0, 4.0, 5.0, 8.0], 100)?;
        let min = rows.iter().map(|r| r.a_coef).fold(f64::INFINITY, f64::min);
        c.push("A(p, beta_-) > 0 on (2^#, 2^*)", min > 0.0, format!("min A = {min:e} over {} points", rows.len()));
    }
    Ok(())
}

fn exact(o: &VerifyOptions, c: &mut Checks) -> Result<()> {
    let d = o.d.unwrap_or(4.0);
    let r = verify_exact_solution(d, 1.0, 0.5, 1.0, o.n.unwrap_or(128))?;
    c.at_most(format!("explicit family solves the fast-diffusion flow d={d}"), r.max_fde_residual, 1e-8);
    c.at_least("explicit family does not solve the heat flow", r.min_heat_residual, 1e-3);
    Ok(())
}

fn moment(o: &VerifyOptions, c: &mut Checks) -> Result<()> {
    let (d, p) = (o.d.unwrap_or(4.0), o.p.unwrap_or(3.0));
    let params = Params::new(d, p)?;
    let basis = Basis::new(d, o.n.unwrap_or(64))?;
    let mut rng = sampling::rng(o.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..o.samples.unwrap_or(5) {
        let u = sampling::random_positive(&basis, &mut rng, 8);
        let s = FlowState::new(FlowForm::ULinear, FlowSpec::heat(&params), u)?;
        worst = worst.max(moment_decay_check(&s, 1.0, &FlowConfig::default())?.max_error);
    }
    c.at_most(format!("int z u^p decays like exp(-d t) d={d} p={p}"), worst, 1e-7);
    Ok(())
}

fn improve(o: &VerifyOptions, c: &mut Checks) -> Result<()> {
    let (d, p) = (o.d.unwrap_or(4.0), o.p.unwrap_or(3.0));
    let est = estimate_lambda_star(d, p, o.n.unwrap_or(64), 8)?;
    let top = 2.0 * (d + 1.0) + 1e-6;
    c.push(
        format!("lambda* in (d, 2(d+1)] d={d} p={p}"),
        est.lambda_star > d && est.lambda_star <= top,
        format!("lambda* = {}", est.lambda_star),
    );
    match improved_constant(d, p, est.lambda_star) {
        Ok(lambda) => {
            c.push("improved constant exceeds d", lambda > d, format!("lambda = {lambda}"));
            let r = verify_improved_inequality(d, p, lambda, o.samples.unwrap_or(500))?;
            c.push(
                "improved inequality on moment-projected samples",
                r.violations == 0 && r.min_slack >= 0.0,
                format!("min slack {:e}, {} violations of {}", r.min_slack, r.violations, r.samples),
            );
        }
        Err(e) => c.push("improved constant exceeds d", false, e.to_string()),
    }
    Ok(())
}

fn antipodal(o: &VerifyOptions, c: &mut Checks) -> Result<()> {
    let dims = o.d.map_or(vec![3.0, 4.0, 5.0, 8.0, 10.0], |d| vec![d]);
    for &d in &dims {
        let sharp = Params::new(d, 1.0)?.two_sharp().finite().unwrap_or(2.0 * d * d + 1.0);
        let mut worst = f64::INFINITY;
        for i in 0..50 {
            let p = 1.0 + (sharp - 1.0) * i as f64 / 49.0;
            let k = antipodal_constants(d, p)?;
            if let (Some(prop), Some(lb)) = (k.prop_lambda, k.gap_lower_bound) {
                worst = worst.min((k.thm_lambda - prop - lb) / k.thm_lambda);
            }
        }
        c.at_least(format!("constant gap above its lower bound d={d}"), worst, -1e-12);
    }
    let d = o.d.unwrap_or(3.0);
    let r = antipodal_spectral_check(d, o.n.unwrap_or(64), o.samples.unwrap_or(100), o.seed)?;
    c.at_least(format!("even spectral ratio d={d}"), r.min_ratio, 2.0 * (d + 1.0) - 1e-9);
    Ok(())
}

fn logsob(c: &mut Checks) -> Result<()> {
    let mut worst: f64 = 0.0;
    for d in 2..=10 {
        worst = worst.max(logsob_improvement(f64::from(d))?.crossing_residual);
    }
    c.at_most("crossing equation at b* for d=2..10", worst, 1e-10);
    Ok(())
}
