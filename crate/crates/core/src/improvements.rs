//! Improved constants under a moment constraint or antipodal symmetry.
//!
//! `lambda*` is the infimum of `int (L v)^2 / int |v'|^2 nu` over nonnegative
//! `v` with `int v = 1` and `int z v^p = 0`. The estimate is an achieved value
//! of the quotient and therefore bounds the infimum from above; every constant
//! derived from it is an estimate in the same sense.
//!
//! Nonnegativity is built into the parametrisation: every nonnegative
//! polynomial on `[-1, 1]` is `s1^2 + (1 - z^2) s2^2` with polynomials `s1`,
//! `s2`, so the search runs over the coefficients of `s1` and `s2` and only
//! the moment constraint needs a projection.

use std::sync::Arc;

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{ExtReal, Params};
use crate::discretization::{Basis, GridFn};
use crate::error::{Error, Result};
use crate::functionals::functionals_of_root;
use crate::sampling;

/// Bound `d + (d-1)^2 / (d (d+2)) (2^# - p) (lambda* - d)` on the constant of
/// the moment-constrained inequality.
///
/// `(d-1)^2 2^# = 2 d^2 + 1` is used in expanded form, so the bound is
/// defined for `d = 1` as well. Valid for `p <= 2^#`.
pub fn improved_constant(d: f64, p: f64, lambda_star: f64) -> Result<f64> {
    let params = Params::new(d, p)?;
    if let ExtReal::Finite(sharp) = params.two_sharp() {
        if p > sharp * (1.0 + 1e-15) {
            return Err(Error::Range {
                what: "p".into(),
                detail: format!("p = {p} exceeds 2^# = {sharp}"),
            });
        }
    }
    if !lambda_star.is_finite() {
        return Err(Error::param(format!("lambda* = {lambda_star} is not finite")));
    }
    Ok(d + improvement_slope(d, p) * (lambda_star - d))
}

/// Coefficient of `lambda* - d` in [`improved_constant`].
pub fn improvement_slope(d: f64, p: f64) -> f64 {
    let sharp_gap = 2.0 * d * d + 1.0 - (d - 1.0).powi(2) * p;
    sharp_gap / (d * (d + 2.0))
}

/// Residuals of the constraints at a reported minimiser.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintResiduals {
    /// `|int v - 1|`.
    pub mass: f64,
    /// `|int z v^p|`.
    pub moment: f64,
    /// Smallest value of `v` on the oversampled grid.
    pub positivity_min: f64,
}

/// Result of [`estimate_lambda_star`].
#[derive(Debug, Clone, Serialize)]
pub struct ImprovementEstimate {
    pub schema_version: u32,
    pub d: f64,
    pub p: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub restarts: usize,
    /// Smallest quotient reached; an upper bound on the infimum.
    pub lambda_star: f64,
    /// [`improved_constant`] at `lambda_star`; `None` for `p > 2^#`.
    pub lambda_bound: Option<f64>,
    /// Smallest `int |u'|^2 nu / int |u - 1|^2` found on the same constraint
    /// set, never above `lambda_star`.
    pub relaxed_quotient: f64,
    pub residuals: ConstraintResiduals,
    /// Restarts whose projected gradient fell below tolerance.
    pub converged: usize,
    /// Projected gradient norm at the reported minimiser.
    pub gradient_norm: f64,
    pub note: &'static str,
    #[serde(skip)]
    pub minimizer: GridFn,
}

/// Settings of the constrained descent.
#[derive(Debug, Clone, Copy)]
pub struct OptimizerConfig {
    pub max_iter: usize,
    /// Projected gradient norm accepted as stationary.
    pub gtol: f64,
    /// Accepted `|int z v^p|` after projection.
    pub ctol: f64,
    pub seed: u64,
    /// Amplitude of the random perturbations of the constant start.
    pub spread: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig { max_iter: 4000, gtol: 1e-7, ctol: 1e-13, seed: 0, spread: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Objective {
    /// `log (int (L v)^2 / int |v'|^2 nu)`.
    Main,
    /// `log (int |v'|^2 nu / int |v - mean v|^2)`.
    Relaxed,
}

/// The parametrised constraint problem on one basis.
struct Problem {
    basis: Arc<Basis>,
    p: f64,
    /// Number of coefficients of each of `s1`, `s2`.
    m: usize,
    objective: Objective,
}

/// Quantities at one parameter vector `x = (s1 coeffs, s2 coeffs)`.
struct Eval {
    v: Vec<f64>,
    coeffs: Vec<f64>,
    value: f64,
    mass: f64,
    moment: f64,
    grad: DVector<f64>,
    moment_grad: DVector<f64>,
}

impl Problem {
    fn new(basis: &Arc<Basis>, p: f64, objective: Objective) -> Self {
        let m = (basis.order() - 1) / 2;
        Problem { basis: basis.clone(), p, m, objective }
    }

    fn split(&self, x: &DVector<f64>) -> (Vec<f64>, Vec<f64>) {
        let n = self.basis.order();
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        a[..self.m].copy_from_slice(&x.as_slice()[..self.m]);
        b[..self.m].copy_from_slice(&x.as_slice()[self.m..]);
        (a, b)
    }

    fn values(&self, x: &DVector<f64>) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (a, b) = self.split(x);
        let s1 = self.basis.fine_eval(&a).0;
        let s2 = self.basis.fine_eval(&b).0;
        let nu = self.basis.fine_nu();
        let v = (0..s1.len()).map(|j| s1[j] * s1[j] + nu[j] * s2[j] * s2[j]).collect();
        (v, s1, s2)
    }

    fn eval(&self, x: &DVector<f64>) -> Result<Eval> {
        let basis = &self.basis;
        let n = basis.order();
        let fine = basis.fine_quadrature();
        let (w, z) = (&fine.weights, &fine.nodes);
        let nu = basis.fine_nu();
        let lam = basis.eigenvalues();
        let (v, s1, s2) = self.values(x);
        let nf = v.len();

        // exact coefficients: v has degree < N and the fine rule is exact to 4N - 1
        let wv: Vec<f64> = (0..nf).map(|j| w[j] * v[j]).collect();
        let coeffs = basis.fine_transpose(&wv);

        let (value, h) = match self.objective {
            Objective::Main => {
                let top: f64 = (0..n).map(|k| lam[k] * lam[k] * coeffs[k] * coeffs[k]).sum();
                let bot: f64 = (0..n).map(|k| lam[k] * coeffs[k] * coeffs[k]).sum();
                if !(bot > 0.0) {
                    return Err(Error::DivisionByZero("the quotient of a constant function".into()));
                }
                let h: Vec<f64> =
                    (0..n).map(|k| 2.0 * coeffs[k] * (lam[k] * lam[k] / top - lam[k] / bot)).collect();
                ((top / bot).ln(), h)
            }
            Objective::Relaxed => {
                let top: f64 = (0..n).map(|k| lam[k] * coeffs[k] * coeffs[k]).sum();
                let bot: f64 = (1..n).map(|k| coeffs[k] * coeffs[k]).sum();
                if !(bot > 0.0) {
                    return Err(Error::DivisionByZero("the quotient of a constant function".into()));
                }
                let h: Vec<f64> = (0..n)
                    .map(|k| 2.0 * coeffs[k] * (lam[k] / top - if k == 0 { 0.0 } else { 1.0 / bot }))
                    .collect();
                ((top / bot).ln(), h)
            }
        };
        // d value / d v_j = w_j sum_k h_k p_k(z_j)
        let dv = basis.fine_eval(&h).0;
        let p = self.p;
        let mut mass = 0.0;
        let mut moment = 0.0;
        let mut gv = vec![0.0; nf];
        let mut mv = vec![0.0; nf];
        for j in 0..nf {
            mass += w[j] * v[j];
            moment += w[j] * z[j] * v[j].powf(p);
            gv[j] = w[j] * dv[j];
            mv[j] = w[j] * p * z[j] * v[j].powf(p - 1.0);
        }
        let grad = self.pull_back(&gv, &s1, &s2, nu);
        let moment_grad = self.pull_back(&mv, &s1, &s2, nu);
        Ok(Eval { v, coeffs, value, mass, moment, grad, moment_grad })
    }

    /// Chain rule through `v = s1^2 + nu s2^2`.
    fn pull_back(&self, dv: &[f64], s1: &[f64], s2: &[f64], nu: &[f64]) -> DVector<f64> {
        let ga: Vec<f64> = (0..dv.len()).map(|j| 2.0 * dv[j] * s1[j]).collect();
        let gb: Vec<f64> = (0..dv.len()).map(|j| 2.0 * dv[j] * nu[j] * s2[j]).collect();
        let ca = self.basis.fine_transpose(&ga);
        let cb = self.basis.fine_transpose(&gb);
        DVector::from_iterator(2 * self.m, ca[..self.m].iter().chain(&cb[..self.m]).copied())
    }

    /// Scales `x` so that `int v = 1`.
    fn normalize(&self, x: &mut DVector<f64>) -> Result<()> {
        let (v, _, _) = self.values(x);
        let w = &self.basis.fine_quadrature().weights;
        let mass: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::Convergence("iterate lost all mass".into()));
        }
        *x /= mass.sqrt();
        Ok(())
    }

    /// Newton iteration on `int z v^p = 0` along the constraint gradient,
    /// followed by mass normalisation.
    fn project(&self, x: &mut DVector<f64>, ctol: f64) -> Result<Eval> {
        self.normalize(x)?;
        for _ in 0..60 {
            let e = self.eval(x)?;
            if e.moment.abs() <= ctol {
                return Ok(e);
            }
            let g2 = e.moment_grad.norm_squared();
            if !(g2 > 0.0) {
                return Err(Error::Convergence("moment constraint has a vanishing gradient".into()));
            }
            x.axpy(-e.moment / g2, &e.moment_grad, 1.0);
            self.normalize(x)?;
        }
        Err(Error::Convergence("moment projection did not converge".into()))
    }
}

/// Component of `g` tangent to the constraint `{moment = 0}`.
fn tangent(g: &DVector<f64>, normal: &DVector<f64>) -> DVector<f64> {
    let n2 = normal.norm_squared();
    if n2 > 0.0 {
        g - normal * (g.dot(normal) / n2)
    } else {
        g.clone()
    }
}

struct Descent {
    x: DVector<f64>,
    eval: Eval,
    gradient_norm: f64,
    converged: bool,
}

fn descend(prob: &Problem, mut x: DVector<f64>, cfg: &OptimizerConfig) -> Result<Descent> {
    let mut e = prob.project(&mut x, cfg.ctol)?;
    let mut g = tangent(&e.grad, &e.moment_grad);
    let mut step = 1e-2 / g.norm().max(1e-300);
    for _ in 0..cfg.max_iter {
        let gn = g.norm();
        if gn <= cfg.gtol {
            return Ok(Descent { x, eval: e, gradient_norm: gn, converged: true });
        }
        let mut accepted = None;
        let mut t = step;
        for _ in 0..40 {
            let mut trial = &x - &g * t;
            if let Ok(et) = prob.project(&mut trial, cfg.ctol) {
                if et.value <= e.value - 1e-4 * t * gn * gn {
                    accepted = Some((trial, et, t));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((xn, en, _t)) = accepted else {
            let gn = g.norm();
            return Ok(Descent { x, eval: e, gradient_norm: gn, converged: gn <= cfg.gtol });
        };
        let gn_new = tangent(&en.grad, &en.moment_grad);
        let s = &xn - &x;
        let y = &gn_new - &g;
        let sy = s.dot(&y);
        step = if sy > 0.0 { (s.norm_squared() / sy).min(1e6) } else { 2.0 * t };
        x = xn;
        e = en;
        g = gn_new;
    }
    let gn = g.norm();
    Ok(Descent { x, eval: e, gradient_norm: gn, converged: gn <= cfg.gtol })
}

/// Start `v = 1 + eps (1 - z^2)`: a constant plus a multiple of the degree-2
/// eigenfunction, whose quotient is exactly `2(d+1)`.
fn designated_start(prob: &Problem) -> DVector<f64> {
    let mut x = DVector::zeros(2 * prob.m);
    x[0] = 1.0;
    x[prob.m] = 0.3;
    x
}

fn random_start(prob: &Problem, seed: u64, spread: f64) -> DVector<f64> {
    let mut rng = sampling::rng(seed);
    let modes = 8.min(prob.m);
    let mut x = DVector::zeros(2 * prob.m);
    x[0] = 1.0;
    for k in 1..modes {
        x[k] = spread * rng.random_range(-1.0..1.0) / k as f64;
    }
    for k in 0..modes {
        x[prob.m + k] = spread * rng.random_range(-1.0..1.0) / (k + 1) as f64;
    }
    x
}

fn minimize(prob: &Problem, restarts: usize, cfg: &OptimizerConfig) -> Result<(Descent, usize)> {
    let runs: Vec<Result<Descent>> = (0..restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let x0 = if r == 0 {
                designated_start(prob)
            } else {
                random_start(prob, cfg.seed.wrapping_add(r as u64), cfg.spread)
            };
            descend(prob, x0, cfg)
        })
        .collect();
    let mut best: Option<Descent> = None;
    let mut converged = 0;
    let mut first_err = None;
    for run in runs {
        match run {
            Ok(d) => {
                converged += usize::from(d.converged);
                if best.as_ref().is_none_or(|b| d.eval.value < b.eval.value) {
                    best = Some(d);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match best {
        Some(b) => Ok((b, converged)),
        None => Err(first_err.unwrap_or_else(|| Error::Convergence("no restart completed".into()))),
    }
}

/// Estimates `lambda*` by constrained descent from `restarts` starting points
/// (one designated, the others random perturbations of the constant).
pub fn estimate_lambda_star(d: f64, p: f64, n: usize, restarts: usize) -> Result<ImprovementEstimate> {
    estimate_lambda_star_with(d, p, n, restarts, &OptimizerConfig::default())
}

pub fn estimate_lambda_star_with(
    d: f64,
    p: f64,
    n: usize,
    restarts: usize,
    cfg: &OptimizerConfig,
) -> Result<ImprovementEstimate> {
    let params = Params::new(d, p)?;
    let star = params.two_star().finite().unwrap_or(f64::INFINITY);
    if !(p > 2.0 && p < star) {
        return Err(Error::Range { what: "p".into(), detail: format!("p = {p} must lie in (2, 2^*)") });
    }
    if n < 64 {
        return Err(Error::param(format!("N = {n} must be at least 64")));
    }
    let basis = Basis::new(d, n)?;
    let main = Problem::new(&basis, p, Objective::Main);
    let (best, converged) = minimize(&main, restarts, cfg)?;
    if converged == 0 {
        return Err(Error::Convergence(format!(
            "no restart reached a stationary point (gradient norm {:.3e})",
            best.gradient_norm
        )));
    }
    let lambda_star = best.eval.value.exp();

    let relaxed = Problem::new(&basis, p, Objective::Relaxed);
    let at_best = relaxed.eval(&best.x)?.value;
    let relaxed_quotient = match minimize(&relaxed, restarts, cfg) {
        Ok((r, _)) => r.eval.value.min(at_best),
        Err(_) => at_best,
    }
    .exp();

    let lambda_bound = match params.two_sharp() {
        ExtReal::Finite(sharp) if p > sharp => None,
        _ => Some(improved_constant(d, p, lambda_star)?),
    };
    let e = &best.eval;
    let residuals = ConstraintResiduals {
        mass: (e.mass - 1.0).abs(),
        moment: e.moment.abs(),
        positivity_min: e.v.iter().copied().fold(f64::INFINITY, f64::min),
    };
    let minimizer = GridFn::from_coeffs(&basis, e.coeffs.clone())?;
    Ok(ImprovementEstimate {
        schema_version: crate::SCHEMA_VERSION,
        d,
        p,
        n,
        restarts,
        lambda_star,
        lambda_bound,
        relaxed_quotient,
        residuals,
        converged,
        gradient_norm: best.gradient_norm,
        note: "lambda_star is an achieved quotient and bounds the infimum from above; lambda_bound is an estimate built from it",
        minimizer,
    })
}


/// `int |f'|^2 nu - lambda / (p - 2) (||f||_p^2 - ||f||_2^2)` for positive `f`.
pub fn improved_slack(f: &GridFn, p: f64, lambda: f64) -> Result<f64> {
    let fu = functionals_of_root(f, p)?;
    Ok(fu.fisher - lambda / (p - 2.0) * (fu.mass.powf(2.0 / p) - fu.l2))
}

/// Rescales positive `f` to `f (1 + t z)` with `t` chosen so that
/// `int z (f (1 + t z))^p = 0`.
///
/// The moment is increasing in `t`; the root is bracketed in `|t| < 1` and
/// refined by safeguarded Newton steps.
pub fn project_moment(f: &GridFn, p: f64) -> Result<GridFn> {
    f.require_positive()?;
    let basis = f.basis();
    let pr = f.profile()?;
    let fine = basis.fine_quadrature();
    let (w, z) = (&fine.weights, &fine.nodes);
    let moment = |t: f64| -> (f64, f64) {
        let mut h = 0.0;
        let mut dh = 0.0;
        for j in 0..w.len() {
            let g = pr.f[j] * (1.0 + t * z[j]);
            let gp = g.powf(p - 1.0);
            h += w[j] * z[j] * gp * g;
            dh += w[j] * p * z[j] * z[j] * pr.f[j] * gp;
        }
        (h, dh)
    };
    let edge = 1.0 - 1e-3;
    let (mut lo, mut hi) = (-edge, edge);
    let (h_lo, h_hi) = (moment(lo).0, moment(hi).0);
    if h_lo > 0.0 || h_hi < 0.0 {
        return Err(Error::Domain(format!(
            "moment cannot be cancelled by a factor 1 + t z with |t| < {edge}"
        )));
    }
    let scale = (0..w.len()).map(|j| w[j] * pr.f[j].powf(p)).sum::<f64>();
    let mut t = 0.0;
    for _ in 0..200 {
        let (h, dh) = moment(t);
        if h.abs() <= 1e-15 * scale {
            break;
        }
        if h > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let newton = t - h / dh;
        t = if dh > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= 1e-16 {
            break;
        }
    }
    let g = f.map_with_node(|zi, fi| fi * (1.0 + t * zi));
    g.require_positive()?;
    Ok(g)
}

/// Test functions drawn by [`verify_inequality_on`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SampleFamily {
    /// Positive functions with `int z f^p = 0`.
    MomentProjected,
    /// Positive even functions.
    Even,
}

/// Negative slack within this multiple of the size of the terms counts as
/// rounding, not as a violation.
pub const ROUNDING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub schema_version: u32,
    pub d: f64,
    pub p: f64,
    pub lambda: f64,
    pub family: SampleFamily,
    pub samples: usize,
    /// Draws discarded because the moment could not be cancelled.
    pub rejected: usize,
    pub min_slack: f64,
    /// `min_slack` relative to `int |f'|^2 nu` of the same sample.
    pub min_relative_slack: f64,
    pub violations: usize,
    /// Largest `|int z f^p| / int f^p` over the accepted samples.
    pub max_moment: f64,
}

/// Checks `int |f'|^2 nu + lambda/(p-2) ||f||_2^2 >= lambda/(p-2) ||f||_p^2`
/// on `samples` random moment-projected positive functions.
pub fn verify_improved_inequality(d: f64, p: f64, lambda: f64, samples: usize) -> Result<InequalityReport> {
    verify_inequality_on(SampleFamily::MomentProjected, d, p, lambda, samples, 64, 0)
}

pub fn verify_inequality_on(
    family: SampleFamily,
    d: f64,
    p: f64,
    lambda: f64,
    samples: usize,
    n: usize,
    seed: u64,
) -> Result<InequalityReport> {
    Params::new(d, p)?;
    if (p - 2.0).abs() < 1e-12 {
        return Err(Error::param("the inequality is stated for p != 2"));
    }
    let basis = Basis::new(d, n)?;
    let mut rng = sampling::rng(seed);
    let mut report = InequalityReport {
        schema_version: crate::SCHEMA_VERSION,
        d,
        p,
        lambda,
        family,
        samples: 0,
        rejected: 0,
        min_slack: f64::INFINITY,
        min_relative_slack: f64::INFINITY,
        violations: 0,
        max_moment: 0.0,
    };
    while report.samples < samples {
        let modes = rng.random_range(2..=10);
        let raw = if rng.random_bool(0.5) {
            sampling::random_positive(&basis, &mut rng, modes)
        } else {
            let eps = 10f64.powf(rng.random_range(-3.0..0.0));
            let g = sampling::random_band_limited(&basis, &mut rng, modes);
            let amp = g.profile()?.f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            GridFn::constant(&basis, 1.0).add(&g.scale(eps / (2.0 * amp.max(1e-300))))?
        };
        let f = match family {
            SampleFamily::Even => raw.even_part(),
            SampleFamily::MomentProjected => match project_moment(&raw, p) {
                Ok(f) => f,
                Err(Error::Domain(_)) => {
                    report.rejected += 1;
                    continue;
                }
                Err(e) => return Err(e),
            },
        };
        let fu = functionals_of_root(&f, p)?;
        let moment = f.profile()?.powf(p)?.integrate(|s| s.z * s.f);
        let slack = fu.fisher - lambda / (p - 2.0) * (fu.mass.powf(2.0 / p) - fu.l2);
        report.samples += 1;
        report.max_moment = report.max_moment.max(moment.abs() / fu.mass);
        report.min_slack = report.min_slack.min(slack);
        if fu.fisher > 0.0 {
            report.min_relative_slack = report.min_relative_slack.min(slack / fu.fisher);
        }
        let scale = fu.fisher + (lambda / (p - 2.0)).abs() * fu.l2;
        if slack < -ROUNDING_TOL * scale {
            report.violations += 1;
        }
    }
    Ok(report)
}

/// Closed-form constants of the log-Sobolev improvement under
/// `int x |u|^2 = 0` on the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogSobolevImprovement {
    pub schema_version: u32,
    pub d: f64,
    /// `d + 2(d+2) / (2(d+3) + sqrt(2(d+3)(2d+3)))`.
    pub lambda_star_bound: f64,
    /// `(2/9)(2 sqrt(2(d+3)(2d+3)) + 5d + 9)/(d+1)`.
    pub b_star: f64,
    /// `d + (2/d)(4d-1) / (2(d+3) + sqrt(2(d+3)(2d+3)))`.
    pub delta: f64,
    /// `e(b/2 - 1) - e(2 sqrt(b^2 + b/(d+1)) - 2b)` at `b = b_star`.
    pub crossing_residual: f64,
    /// `e(b_star/2 - 1) - lambda_star_bound`.
    pub bound_mismatch: f64,
}

/// `e(c) = (d b + 2(d+1) c) / (b + c)`.
pub fn logsob_energy(d: f64, b: f64, c: f64) -> f64 {
    (d * b + 2.0 * (d + 1.0) * c) / (b + c)
}

/// Lower bound on `c` from positivity of `1 + a.x + v`.
pub fn logsob_first_estimate(b: f64) -> f64 {
    b / 2.0 - 1.0
}

/// Lower bound on `c` from the moment constraint.
pub fn logsob_second_estimate(d: f64, b: f64) -> f64 {
    2.0 * (b * b + b / (d + 1.0)).sqrt() - 2.0 * b
}

pub fn logsob_improvement(d: f64) -> Result<LogSobolevImprovement> {
    if !d.is_finite() || d < 2.0 {
        return Err(Error::Range { what: "d".into(), detail: format!("d = {d} must be at least 2") });
    }
    let root = (2.0 * (d + 3.0) * (2.0 * d + 3.0)).sqrt();
    let denom = 2.0 * (d + 3.0) + root;
    let lambda_star_bound = d + 2.0 * (d + 2.0) / denom;
    let b_star = 2.0 / 9.0 * (2.0 * root + 5.0 * d + 9.0) / (d + 1.0);
    let delta = d + 2.0 / d * (4.0 * d - 1.0) / denom;
    let first = logsob_energy(d, b_star, logsob_first_estimate(b_star));
    let second = logsob_energy(d, b_star, logsob_second_estimate(d, b_star));
    Ok(LogSobolevImprovement {
        schema_version: crate::SCHEMA_VERSION,
        d,
        lambda_star_bound,
        b_star,
        delta,
        crossing_residual: first - second,
        bound_mismatch: first - lambda_star_bound,
    })
}

/// Constants of the inequalities restricted to antipodally symmetric
/// functions.
///
/// `*_lambda` are the constants multiplying `(||u||_p^2 - ||u||_2^2)/(p-2)`;
/// `*_const` are the constants in front of `||u||_p^2 - ||u||_2^2`, replaced
/// at `p = 2` by the factor in front of `int u^2 log(u^2/||u||_2^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AntipodalConstants {
    pub schema_version: u32,
    pub d: f64,
    pub p: f64,
    /// `d^2 + (d-1)^2 (2^# - p)) / d`; `None` for `p > 2^#`.
    pub prop_lambda: Option<f64>,
    /// `d [1 + (d^2-4)(2^* - p) / (d(d+2) + p - 1)]`.
    pub thm_lambda: f64,
    pub prop_const: Option<f64>,
    pub thm_const: f64,
    /// `1 + (d^2-4)(2^* - p) / (d(d+2) + p - 1)`.
    pub improvement_factor: f64,
    /// `(d-1)^2 (p-1) / (d(d+2) + p - 1)`.
    pub theta: f64,
    /// `(d+2) / (d+3-p)`.
    pub beta: ExtReal,
    /// `(1 - theta) 2(d+1) + theta d`.
    pub lambda_star_antipodal: f64,
    /// `(d-1)^2 (p-1)^2 / (d (d(d+2) + p - 1))`; `None` for `p > 2^#`.
    pub gap_lower_bound: Option<f64>,
}

pub fn antipodal_constants(d: f64, p: f64) -> Result<AntipodalConstants> {
    let params = Params::new(d, p)?;
    let sharp = params.two_sharp().finite().unwrap_or(f64::INFINITY);
    let within_sharp = p <= sharp * (1.0 + 1e-15);
    let den = d * (d + 2.0) + p - 1.0;
    // (d^2 - 4)(2^* - p) = (d + 2)(2d - (d - 2)p), finite for every d
    let improvement_factor = 1.0 + (d + 2.0) * (2.0 * d - (d - 2.0) * p) / den;
    let thm_lambda = d * improvement_factor;
    let prop_lambda = within_sharp.then(|| (2.0 * d * d + 1.0 + d * d - (d - 1.0).powi(2) * p) / d);
    let log = (p - 2.0).abs() < 1e-12;
    let to_const = |lambda: f64| if log { lambda / 2.0 } else { lambda / (p - 2.0) };
    let theta = (d - 1.0).powi(2) * (p - 1.0) / den;
    let beta = if d + 3.0 - p > 0.0 { ExtReal::Finite((d + 2.0) / (d + 3.0 - p)) } else { ExtReal::PosInf };
    Ok(AntipodalConstants {
        schema_version: crate::SCHEMA_VERSION,
        d,
        p,
        prop_lambda,
        thm_lambda,
        prop_const: prop_lambda.map(to_const),
        thm_const: to_const(thm_lambda),
        improvement_factor,
        theta,
        beta,
        lambda_star_antipodal: (1.0 - theta) * 2.0 * (d + 1.0) + theta * d,
        gap_lower_bound: within_sharp.then(|| (d - 1.0).powi(2) * (p - 1.0).powi(2) / (d * den)),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralCheckReport {
    pub schema_version: u32,
    pub d: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub samples: usize,
    /// `2(d+1)`.
    pub bound: f64,
    /// Smallest `int (L f)^2 / int |f'|^2 nu` over the even samples.
    pub min_ratio: f64,
    /// Ratio at the degree-2 eigenfunction.
    pub eigenfunction_ratio: f64,
    /// Ratio at `f = z`, which is odd.
    pub odd_ratio: f64,
    /// Largest relative residual of
    /// `int |f''|^2 nu^2 = int (L f)^2 - d int |f'|^2 nu`.
    pub identity_residual: f64,
}

/// `(int (L f)^2, int |f'|^2 nu, int |f''|^2 nu^2)` from nodal derivatives.
fn second_order_integrals(f: &GridFn) -> Result<(f64, f64, f64)> {
    let d = f.d();
    let f1 = f.derivative()?;
    let f2 = f.second_derivative()?;
    let w = f.basis().weights();
    let (mut ll, mut grad, mut hess) = (0.0, 0.0, 0.0);
    for (i, &z) in f.nodes().iter().enumerate() {
        let nu = 1.0 - z * z;
        let lf = nu * f2.values()[i] - d * z * f1.values()[i];
        ll += w[i] * lf * lf;
        grad += w[i] * f1.values()[i] * f1.values()[i] * nu;
        hess += w[i] * f2.values()[i] * f2.values()[i] * nu * nu;
    }
    Ok((ll, grad, hess))
}

/// `int (L f)^2 / int |f'|^2 nu` and the relative residual of
/// `int |f''|^2 nu^2 = int (L f)^2 - d int |f'|^2 nu`.
pub fn spectral_ratio(f: &GridFn) -> Result<(f64, f64)> {
    let (ll, grad, hess) = second_order_integrals(f)?;
    if !(grad > 0.0) {
        return Err(Error::DivisionByZero("the ratio of a constant function".into()));
    }
    let residual = (hess - (ll - f.d() * grad)).abs() / ll.max(f64::MIN_POSITIVE);
    Ok((ll / grad, residual))
}

/// Compares `int (L f)^2` with `2(d+1) int |f'|^2 nu` on random even
/// band-limited functions.
pub fn antipodal_spectral_check(d: f64, n: usize, samples: usize, seed: u64) -> Result<SpectralCheckReport> {
    if n < 64 {
        return Err(Error::param(format!("N = {n} must be at least 64")));
    }
    let basis = Basis::new(d, n)?;
    let eigen = GridFn::from_fn(&basis, |z| z * z - 1.0 / (d + 1.0));
    let odd = GridFn::from_fn(&basis, |z| z);
    let (eigenfunction_ratio, r0) = spectral_ratio(&eigen)?;
    let (odd_ratio, r1) = spectral_ratio(&odd)?;
    let mut identity_residual = r0.max(r1);
    let mut rng = sampling::rng(seed);
    let mut min_ratio = f64::INFINITY;
    for _ in 0..samples {
        let modes = rng.random_range(2..=24);
        let f = sampling::random_band_limited(&basis, &mut rng, modes).even_part();
        if f.coeffs()[1..].iter().all(|&c| c == 0.0) {
            continue;
        }
        let (ratio, res) = spectral_ratio(&f)?;
        min_ratio = min_ratio.min(ratio);
        identity_residual = identity_residual.max(res);
    }
    Ok(SpectralCheckReport {
        schema_version: crate::SCHEMA_VERSION,
        d,
        n,
        samples,
        bound: 2.0 * (d + 1.0),
        min_ratio,
        eigenfunction_ratio,
        odd_ratio,
        identity_residual,
    })
}
