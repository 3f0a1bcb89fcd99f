//! Time integration of the heat flow, the fast-diffusion flow and their
//! pointwise reformulations.
//!
//! | form | unknown | equation | conserved |
//! |---|---|---|---|
//! | `RhoHeat` | `rho` | `rho_t = L rho` | `int rho` |
//! | `RhoFde` | `rho` | `rho_t = L rho^m` | `int rho` |
//! | `ULinear` | `u` | `u_t = L u + (p-1) nu |u'|^2 / u` | `int u^p` |
//! | `WNonlinear` | `w` | `w_s = w^(2-2 beta) (L w + kappa nu |w'|^2 / w)` | `int w^(beta p)` |
//!
//! `rho = u^p` solves the heat flow when `u` solves `ULinear`, and
//! `rho(t) = w(m t)^(beta p)` solves the fast-diffusion flow when `w` solves
//! `WNonlinear`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::constants::{FlowKind, FlowSpec};
use crate::discretization::{Basis, GridFn, POSITIVITY_FLOOR};
use crate::error::{Error, Result};
use crate::functionals::{
    dissipation_heat, dissipation_nonlinear, functionals_of_density, functionals_of_root,
    DissipationReport,
};
use crate::integrator::{self, StepTolerances, System};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlowForm {
    #[serde(rename = "Rho_Heat")]
    RhoHeat,
    #[serde(rename = "Rho_FDE")]
    RhoFde,
    #[serde(rename = "U_Linear")]
    ULinear,
    #[serde(rename = "W_Nonlinear")]
    WNonlinear,
}

impl FlowForm {
    pub fn name(self) -> &'static str {
        match self {
            FlowForm::RhoHeat => "Rho_Heat",
            FlowForm::RhoFde => "Rho_FDE",
            FlowForm::ULinear => "U_Linear",
            FlowForm::WNonlinear => "W_Nonlinear",
        }
    }
}

impl std::str::FromStr for FlowForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "rho_heat" | "heat" => Ok(FlowForm::RhoHeat),
            "rho_fde" | "fde" => Ok(FlowForm::RhoFde),
            "u_linear" | "linear" => Ok(FlowForm::ULinear),
            "w_nonlinear" | "nonlinear" => Ok(FlowForm::WNonlinear),
            _ => Err(Error::param(format!("unknown flow form '{s}'"))),
        }
    }
}

/// Tolerances and cadence of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    /// Bound on `|C(t) - C(0)|` relative to `max(1, |C(0)|)`.
    pub tol_cons: f64,
    /// Allowed increase of `F` between recorded samples.
    pub tol_mono: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Number of recorded intervals per run.
    pub samples: usize,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    /// Disables error control and uses this step size.
    pub fixed_step: Option<f64>,
    pub max_substeps: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            tol_cons: 1e-9,
            tol_mono: 1e-9,
            rtol: 1e-10,
            atol: 1e-12,
            samples: 50,
            h_init: 1e-5,
            h_min: 1e-13,
            h_max: 0.05,
            fixed_step: None,
            max_substeps: 1_000_000,
        }
    }
}

impl FlowConfig {
    fn step_tolerances(&self) -> StepTolerances {
        StepTolerances { rtol: self.rtol, atol: self.atol, ..Default::default() }
    }
}

/// The evolved unknown with its flow family and time.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub f: GridFn,
    pub form: FlowForm,
    pub spec: FlowSpec,
    pub conserved0: f64,
    h: f64,
}

fn nodal_integral(basis: &Basis, values: impl Iterator<Item = f64>) -> f64 {
    basis.weights().iter().zip(values).map(|(w, v)| w * v).sum()
}

impl FlowState {
    pub fn new(form: FlowForm, spec: FlowSpec, f: GridFn) -> Result<Self> {
        match form {
            FlowForm::RhoHeat | FlowForm::ULinear if spec.kind != FlowKind::Heat => {
                return Err(Error::param(format!("{} needs the heat flow spec", form.name())))
            }
            FlowForm::WNonlinear if spec.beta_finite().is_none() => {
                return Err(Error::param("W_Nonlinear needs a finite beta"))
            }
            _ => {}
        }
        f.require_positive()?;
        let mut s = FlowState { t: 0.0, f, form, spec, conserved0: 0.0, h: 0.0 };
        s.conserved0 = s.conserved();
        Ok(s)
    }

    pub fn at_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    pub fn basis(&self) -> &Arc<Basis> {
        self.f.basis()
    }

    pub fn p(&self) -> f64 {
        self.spec.p
    }

    fn beta(&self) -> f64 {
        self.spec.beta_finite().unwrap_or(1.0)
    }

    /// Exponent `e` with `rho = f^e`.
    fn density_exponent(&self) -> f64 {
        match self.form {
            FlowForm::RhoHeat | FlowForm::RhoFde => 1.0,
            FlowForm::ULinear => self.p(),
            FlowForm::WNonlinear => self.beta() * self.p(),
        }
    }

    /// The conserved quantity: the constant coefficient for densities, the
    /// nodal rule otherwise.
    pub fn conserved(&self) -> f64 {
        match self.form {
            FlowForm::RhoHeat | FlowForm::RhoFde => self.f.integral(),
            _ => {
                let e = self.density_exponent();
                nodal_integral(self.basis(), self.f.values().iter().map(|v| v.powf(e)))
            }
        }
    }

    /// `|C(t) - C(0)| / max(1, |C(0)|)`.
    pub fn relative_drift(&self) -> f64 {
        (self.conserved() - self.conserved0).abs() / self.conserved0.abs().max(1.0)
    }

    /// `int z rho d nu_d`.
    pub fn moment_z(&self) -> f64 {
        let e = self.density_exponent();
        nodal_integral(
            self.basis(),
            self.f.values().iter().zip(self.basis().nodes()).map(|(v, z)| z * v.powf(e)),
        )
    }

    pub fn density(&self) -> Result<GridFn> {
        let e = self.density_exponent();
        if e == 1.0 {
            Ok(self.f.clone())
        } else {
            self.f.powf(e)
        }
    }

    /// Time of the density equation.
    pub fn rho_time(&self) -> f64 {
        match self.form {
            FlowForm::WNonlinear => self.t / self.spec.m,
            _ => self.t,
        }
    }

    /// Functionals of the current density.
    pub fn functionals(&self) -> Result<crate::functionals::Functionals> {
        let p = self.p();
        match self.form {
            FlowForm::RhoHeat | FlowForm::RhoFde => functionals_of_density(&self.f, p),
            FlowForm::ULinear => functionals_of_root(&self.f, p),
            FlowForm::WNonlinear => functionals_of_root(&self.f.powf(self.beta())?, p),
        }
    }

    pub fn deficit(&self) -> Result<f64> {
        Ok(self.functionals()?.deficit)
    }

    /// Analytic dissipation at the current state; `dF_ds_analytic` is the
    /// derivative in the time of this form.
    pub fn dissipation(&self) -> Result<Option<DissipationReport>> {
        let p = self.p();
        Ok(match (self.form, self.spec.kind) {
            (FlowForm::ULinear, _) => Some(dissipation_heat(&self.f, p)?),
            (FlowForm::RhoHeat, _) | (FlowForm::RhoFde, FlowKind::Heat) => {
                Some(dissipation_heat(&self.f.powf(1.0 / p)?, p)?)
            }
            (FlowForm::WNonlinear, _) => Some(dissipation_nonlinear(&self.f, p, self.beta())?),
            (FlowForm::RhoFde, FlowKind::Nonlinear) => match self.spec.beta_finite() {
                Some(beta) => {
                    let w = self.f.powf(1.0 / (beta * p))?;
                    let mut r = dissipation_nonlinear(&w, p, beta)?;
                    r.dF_ds_analytic = r.dF_dt_analytic;
                    Some(r)
                }
                None => None,
            },
        })
    }

    fn system(&self) -> NodalSystem<'_> {
        NodalSystem {
            basis: self.basis(),
            form: self.form,
            p: self.p(),
            m: self.spec.m,
            beta: self.beta(),
            kappa: self.spec.kappa.unwrap_or(self.p() - 1.0),
        }
    }

    /// Advances in place by `dt`; see [`step`].
    pub fn advance(&mut self, dt: f64, cfg: &FlowConfig) -> Result<()> {
        if !(dt >= 0.0) || !dt.is_finite() {
            return Err(Error::param(format!("time step {dt} must be nonnegative")));
        }
        if dt == 0.0 {
            return Ok(());
        }
        if self.form == FlowForm::RhoHeat {
            self.f = heat_propagate(&self.f, dt)?;
            self.t += dt;
            return Ok(());
        }
        let t_start = self.t;
        self.integrate(dt, cfg).map_err(|e| match e {
            Error::StepFailed { .. } => e,
            other => Error::StepFailed { t: t_start, source: Box::new(other) },
        })
    }

    fn integrate(&mut self, dt: f64, cfg: &FlowConfig) -> Result<()> {
        let t_end = self.t + dt;
        let tol = cfg.step_tolerances();
        let basis = self.basis().clone();
        let scale = self.conserved0.abs().max(1.0);
        let mut y = DVector::from_column_slice(self.f.values());
        if self.h <= 0.0 {
            self.h = cfg.h_init;
        }
        let mut substeps = 0usize;
        while self.t < t_end {
            substeps += 1;
            if substeps > cfg.max_substeps {
                return Err(Error::StepFailed {
                    t: self.t,
                    source: Box::new(Error::Convergence("substep budget exhausted".into())),
                });
            }
            let remaining = t_end - self.t;
            let (h, last) = match cfg.fixed_step {
                Some(hf) => (hf.min(remaining), hf >= remaining),
                None => {
                    let h = self.h.min(cfg.h_max);
                    if h >= remaining * (1.0 - 1e-12) {
                        (remaining, true)
                    } else {
                        (h, false)
                    }
                }
            };
            let sys = self.system();
            let attempt = integrator::step(&sys, &y, h, &tol);
            let reject = |state: &mut FlowState, reason: Error| -> Result<()> {
                if cfg.fixed_step.is_some() || h / 4.0 < cfg.h_min {
                    return Err(Error::StepFailed { t: state.t, source: Box::new(reason) });
                }
                state.h = h / 4.0;
                Ok(())
            };
            let res = match attempt {
                Ok(r) => r,
                Err(e @ (Error::Positivity { .. } | Error::Convergence(_))) => {
                    reject(self, e)?;
                    continue;
                }
                Err(e) => return Err(e),
            };
            if cfg.fixed_step.is_none() && res.error > 1.0 {
                let h_new = integrator::next_step(h, res.error);
                if h_new < cfg.h_min {
                    return Err(Error::StepFailed {
                        t: self.t,
                        source: Box::new(Error::Convergence("step size underflow".into())),
                    });
                }
                self.h = h_new;
                continue;
            }
            let min = res.y.iter().copied().fold(f64::INFINITY, f64::min);
            if !(min > POSITIVITY_FLOOR) {
                reject(self, Error::Positivity { min, floor: POSITIVITY_FLOOR })?;
                continue;
            }
            let c = match self.form {
                FlowForm::RhoHeat | FlowForm::RhoFde => nodal_integral(&basis, res.y.iter().copied()),
                _ => {
                    let e = self.density_exponent();
                    nodal_integral(&basis, res.y.iter().map(|v| v.powf(e)))
                }
            };
            let drift = (c - self.conserved0).abs();
            if drift > cfg.tol_cons * scale {
                reject(self, Error::ConservationDrift { drift, tol: cfg.tol_cons * scale })?;
                continue;
            }
            y = res.y;
            self.t = if last { t_end } else { self.t + h };
            if cfg.fixed_step.is_none() && !last {
                self.h = integrator::next_step(h, res.error);
            }
        }
        self.f = GridFn::from_values(&basis, y.as_slice().to_vec())?;
        Ok(())
    }
}

/// Heat semigroup in coefficient space: `c_k -> exp(-k(k+d-1) tau) c_k`.
///
/// Small negative `tau` is accepted for finite differences.
pub fn heat_propagate(rho: &GridFn, tau: f64) -> Result<GridFn> {
    let c: Vec<f64> = rho
        .coeffs()
        .iter()
        .zip(rho.basis().eigenvalues())
        .map(|(c, l)| c * (-l * tau).exp())
        .collect();
    GridFn::from_coeffs(rho.basis(), c)
}

struct NodalSystem<'a> {
    basis: &'a Basis,
    form: FlowForm,
    p: f64,
    m: f64,
    beta: f64,
    kappa: f64,
}

fn check_positive(y: &DVector<f64>) -> Result<()> {
    let min = y.iter().copied().fold(f64::INFINITY, f64::min);
    if min > POSITIVITY_FLOOR {
        Ok(())
    } else {
        Err(Error::Positivity { min, floor: POSITIVITY_FLOOR })
    }
}

impl NodalSystem<'_> {
    fn nu(&self) -> impl Iterator<Item = f64> + '_ {
        self.basis.nodes().iter().map(|&z| crate::discretization::nu(z))
    }

    /// `L y + k nu |y'|^2 / y` and `y'`.
    fn drift(&self, y: &DVector<f64>, k: f64) -> (DVector<f64>, DVector<f64>) {
        let dy = self.basis.d1() * y;
        let mut g = self.basis.lap() * y;
        for (i, nu) in self.nu().enumerate() {
            g[i] += k * nu * dy[i] * dy[i] / y[i];
        }
        (g, dy)
    }

    /// Jacobian of `y -> L y + k nu |y'|^2 / y`.
    fn drift_jacobian(&self, y: &DVector<f64>, dy: &DVector<f64>, k: f64) -> DMatrix<f64> {
        let mut j = self.basis.lap().clone();
        let d1 = self.basis.d1();
        for (i, nu) in self.nu().enumerate() {
            let r = dy[i] / y[i];
            let a = k * nu * 2.0 * r;
            for c in 0..y.len() {
                j[(i, c)] += a * d1[(i, c)];
            }
            j[(i, i)] -= k * nu * r * r;
        }
        j
    }
}

impl System for NodalSystem<'_> {
    fn rhs(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        check_positive(y)?;
        Ok(match self.form {
            FlowForm::RhoHeat => self.basis.lap() * y,
            FlowForm::RhoFde => self.basis.lap() * y.map(|v| v.powf(self.m)),
            FlowForm::ULinear => self.drift(y, self.p - 1.0).0,
            FlowForm::WNonlinear => {
                let (g, _) = self.drift(y, self.kappa);
                let e = 2.0 - 2.0 * self.beta;
                g.zip_map(y, |gi, yi| yi.powf(e) * gi)
            }
        })
    }

    fn jacobian(&self, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        check_positive(y)?;
        Ok(match self.form {
            FlowForm::RhoHeat => self.basis.lap().clone(),
            FlowForm::RhoFde => {
                let mut j = self.basis.lap().clone();
                for c in 0..y.len() {
                    let s = self.m * y[c].powf(self.m - 1.0);
                    j.column_mut(c).scale_mut(s);
                }
                j
            }
            FlowForm::ULinear => {
                let dy = self.basis.d1() * y;
                self.drift_jacobian(y, &dy, self.p - 1.0)
            }
            FlowForm::WNonlinear => {
                let (g, dy) = self.drift(y, self.kappa);
                let mut j = self.drift_jacobian(y, &dy, self.kappa);
                let e = 2.0 - 2.0 * self.beta;
                for i in 0..y.len() {
                    let s = y[i].powf(e);
                    j.row_mut(i).scale_mut(s);
                    j[(i, i)] += e * y[i].powf(e - 1.0) * g[i];
                }
                j
            }
        })
    }
}

/// Advances a copy of `state` by `dt`.
pub fn step(state: &FlowState, dt: f64, cfg: &FlowConfig) -> Result<FlowState> {
    let mut s = state.clone();
    s.advance(dt, cfg)?;
    Ok(s)
}

/// One recorded point of a trajectory.
#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub rho_time: f64,
    pub F: f64,
    pub E_p: f64,
    pub I_p: f64,
    pub conserved: f64,
    pub moment_z: f64,
    /// Analytic `dF/dt` in the time of the form, when available.
    pub dF_dt: Option<f64>,
}

pub fn observe(state: &FlowState) -> Result<TrajectorySample> {
    let fun = state.functionals()?;
    let dissipation = state.dissipation()?;
    Ok(TrajectorySample {
        t: state.t,
        rho_time: state.rho_time(),
        F: fun.deficit,
        E_p: fun.entropy,
        I_p: fun.fisher,
        conserved: state.conserved(),
        moment_z: state.moment_z(),
        dF_dt: dissipation.map(|r| r.dF_ds_analytic),
    })
}

/// Append-only record of an evolution.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub form: FlowForm,
    pub spec: FlowSpec,
    pub conserved0: f64,
    pub samples: Vec<TrajectorySample>,
}

impl Trajectory {
    /// Largest increase of `F` between consecutive samples (negative if
    /// strictly decreasing).
    pub fn max_increase(&self) -> f64 {
        self.samples.windows(2).map(|w| w[1].F - w[0].F).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_monotone(&self, tol_mono: f64) -> bool {
        self.samples.len() < 2 || self.max_increase() <= tol_mono
    }

    /// Largest `|C(t) - C(0)| / max(1, |C(0)|)` over the samples.
    pub fn max_drift(&self) -> f64 {
        let scale = self.conserved0.abs().max(1.0);
        self.samples.iter().map(|s| (s.conserved - self.conserved0).abs() / scale).fold(0.0, f64::max)
    }

    pub fn last(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectories start with the initial sample")
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "F", "E_p", "I_p", "conserved", "moment_z"])?;
        for s in &self.samples {
            w.write_record([s.t, s.F, s.E_p, s.I_p, s.conserved, s.moment_z].map(|x| format!("{x}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Integrates to `t_end`, recording `cfg.samples` equal intervals.
pub fn evolve(
    state: &FlowState,
    t_end: f64,
    cfg: &FlowConfig,
    recorder: &mut dyn FnMut(&FlowState, &TrajectorySample),
) -> Result<(FlowState, Trajectory)> {
    if !(t_end > state.t) {
        return Err(Error::param(format!("t_end = {t_end} must exceed the current time {}", state.t)));
    }
    if cfg.samples == 0 {
        return Err(Error::param("at least one recorded interval is required"));
    }
    let mut s = state.clone();
    let t0 = s.t;
    let mut traj = Trajectory { form: s.form, spec: s.spec, conserved0: s.conserved0, samples: Vec::new() };
    let first = observe(&s)?;
    recorder(&s, &first);
    traj.samples.push(first);
    for k in 1..=cfg.samples {
        let target = if k == cfg.samples {
            t_end
        } else {
            t0 + (t_end - t0) * k as f64 / cfg.samples as f64
        };
        s.advance(target - s.t, cfg)?;
        s.t = target;
        let obs = observe(&s).map_err(|e| Error::StepFailed { t: s.t, source: Box::new(e) })?;
        recorder(&s, &obs);
        traj.samples.push(obs);
    }
    Ok((s, traj))
}

/// Changes the unknown between equivalent forms.
///
/// `RhoHeat <-> ULinear` uses `rho = u^p`; `RhoFde <-> WNonlinear` uses
/// `rho = w^(beta p)` and maps the time by `s = m t`.
pub fn convert(state: &FlowState, target: FlowForm) -> Result<FlowState> {
    use FlowForm::*;
    if state.form == target {
        return Ok(state.clone());
    }
    let p = state.p();
    let spec = state.spec;
    let (f, t) = match (state.form, target) {
        (RhoHeat, ULinear) => (state.f.powf(1.0 / p)?, state.t),
        (ULinear, RhoHeat) => (state.f.powf(p)?, state.t),
        (RhoHeat, RhoFde) | (RhoFde, RhoHeat) if spec.m == 1.0 => (state.f.clone(), state.t),
        (RhoFde, WNonlinear) => {
            let beta = spec.beta_finite().ok_or_else(|| Error::param("W_Nonlinear needs a finite beta"))?;
            (state.f.powf(1.0 / (beta * p))?, state.t * spec.m)
        }
        (WNonlinear, RhoFde) => (state.density()?, state.rho_time()),
        _ => {
            return Err(Error::param(format!(
                "no conversion from {} to {}",
                state.form.name(),
                target.name()
            )))
        }
    };
    Ok(FlowState::new(target, spec, f)?.at_time(t))
}

/// Time derivative of `F` at the current state by finite differences.
///
/// The heat flow is propagated exactly in both time directions and a
/// centred 4-point stencil is used; other forms use a one-sided 5-point
/// stencil. Both are refined by one Richardson step. The result is in the
/// time of the form.
pub fn numeric_dfdt(state: &FlowState, cfg: &FlowConfig) -> Result<f64> {
    if state.form == FlowForm::RhoHeat {
        // modes at rounding level would blow up backwards in time
        let rho = &GridFn::from_coeffs(state.f.basis(), crate::discretization::chop(state.f.coeffs()))?;
        let p = state.p();
        let h = stencil_step(rho);
        let f_at = |tau: f64| -> Result<f64> { Ok(functionals_of_density(&heat_propagate(rho, tau)?, p)?.deficit) };
        let central = |h: f64| -> Result<f64> {
            Ok((-f_at(2.0 * h)? + 8.0 * f_at(h)? - 8.0 * f_at(-h)? + f_at(-2.0 * h)?) / (12.0 * h))
        };
        let d1 = central(h)?;
        let d2 = central(h / 2.0)?;
        return Ok((16.0 * d2 - d1) / 15.0);
    }
    let tight = FlowConfig { rtol: cfg.rtol.min(1e-12), atol: cfg.atol.min(1e-14), ..*cfg };
    let forward = |h: f64| -> Result<f64> {
        let mut s = state.clone();
        let mut vals = [0.0; 5];
        vals[0] = s.deficit()?;
        for v in vals.iter_mut().skip(1) {
            s.advance(h, &tight)?;
            *v = s.deficit()?;
        }
        Ok((-25.0 * vals[0] + 48.0 * vals[1] - 36.0 * vals[2] + 16.0 * vals[3] - 3.0 * vals[4])
            / (12.0 * h))
    };
    let h = stencil_step(&state.f);
    let d1 = forward(h)?;
    let d2 = forward(h / 2.0)?;
    Ok((16.0 * d2 - d1) / 15.0)
}

/// Step of the difference stencils: small against the fastest mode that the
/// state actually carries.
fn stencil_step(f: &GridFn) -> f64 {
    let c = crate::discretization::chop(f.coeffs());
    let active = c.iter().rposition(|&c| c != 0.0).unwrap_or(1).max(1);
    (0.05 / f.basis().eigenvalues()[active]).min(1e-3)
}

/// `M(t) = int z u^p` along `ULinear` against `M(0) exp(-d t)`.
#[derive(Debug, Clone, Serialize)]
pub struct MomentDecayReport {
    pub d: f64,
    pub p: f64,
    pub m0: f64,
    pub times: Vec<f64>,
    pub moments: Vec<f64>,
    pub predicted: Vec<f64>,
    pub max_error: f64,
    /// Least-squares rate of `log |M|`, when `M(0) != 0`.
    pub empirical_rate: Option<f64>,
}

pub fn moment_decay_check(state: &FlowState, t_end: f64, cfg: &FlowConfig) -> Result<MomentDecayReport> {
    if state.form != FlowForm::ULinear {
        return Err(Error::param("moment decay is checked along U_Linear"));
    }
    let d = state.f.d();
    let t0 = state.t;
    let m0 = state.moment_z();
    let mut times = Vec::new();
    let mut moments = Vec::new();
    let mut predicted = Vec::new();
    evolve(state, t_end, cfg, &mut |s, obs| {
        times.push(s.t);
        moments.push(obs.moment_z);
        predicted.push(m0 * (-d * (s.t - t0)).exp());
    })?;
    let max_error = moments.iter().zip(&predicted).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let empirical_rate = if m0.abs() > 1e-12 {
        let pts: Vec<(f64, f64)> = times
            .iter()
            .zip(&moments)
            .filter(|(_, m)| m.abs() > 1e-13)
            .map(|(t, m)| (t - t0, m.abs().ln()))
            .collect();
        let n = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, (x, y)| (a.0 + x, a.1 + y));
        let (sxx, sxy) = pts.iter().fold((0.0, 0.0), |a, (x, y)| (a.0 + x * x, a.1 + x * y));
        Some(-(n * sxy - sx * sy) / (n * sxx - sx * sx))
    } else {
        None
    };
    Ok(MomentDecayReport { d, p: state.p(), m0, times, moments, predicted, max_error, empirical_rate })
}

/// The explicit fast-diffusion solution `rho = (a(t) + b(t) z)^(-d)` with
/// `m = 1 - 1/d`, `a = omega coth((d-1) omega (t+t0))`,
/// `b = omega csch((d-1) omega (t+t0))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactFdeSolution {
    pub d: f64,
    pub omega: f64,
    pub t0: f64,
}

impl ExactFdeSolution {
    pub fn new(d: f64, omega: f64, t0: f64) -> Result<Self> {
        if !(d >= 3.0) {
            return Err(Error::Range { what: "dimension d", detail: format!("d = {d} must be at least 3") });
        }
        if !(omega > 0.0) || !(t0 > 0.0) {
            return Err(Error::param("omega and t0 must be positive"));
        }
        Ok(ExactFdeSolution { d, omega, t0 })
    }

    pub fn m(&self) -> f64 {
        1.0 - 1.0 / self.d
    }

    /// `(a, b)` at time `t`.
    pub fn coefficients(&self, t: f64) -> (f64, f64) {
        let x = (self.d - 1.0) * self.omega * (t + self.t0);
        (self.omega / x.tanh(), self.omega / x.sinh())
    }

    /// `(a', b') = (-(d-1) b^2, -(d-1) a b)`.
    pub fn derivatives(&self, t: f64) -> (f64, f64) {
        let (a, b) = self.coefficients(t);
        (-(self.d - 1.0) * b * b, -(self.d - 1.0) * a * b)
    }

    pub fn density(&self, basis: &Arc<Basis>, t: f64) -> Result<GridFn> {
        let (a, b) = self.coefficients(t);
        if !(a > b.abs()) {
            return Err(Error::Positivity { min: a - b.abs(), floor: 0.0 });
        }
        Ok(GridFn::from_fn(basis, |z| (a + b * z).powf(-self.d)))
    }

    /// `d rho / dt` from the coefficient ODE.
    pub fn time_derivative(&self, basis: &Arc<Basis>, t: f64) -> GridFn {
        let (a, b) = self.coefficients(t);
        let (da, db) = self.derivatives(t);
        let d = self.d;
        GridFn::from_fn(basis, |z| -d * (a + b * z).powf(-d - 1.0) * (da + db * z))
    }
}

/// PDE residuals of the explicit solution on a time grid.
#[derive(Debug, Clone, Serialize)]
pub struct ExactSolutionReport {
    pub d: f64,
    pub omega: f64,
    pub t0: f64,
    pub t_end: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub times: Vec<f64>,
    /// `max |rho_t - L rho^m|` at the nodes, per time.
    pub fde_residuals: Vec<f64>,
    /// `max |rho_t - L rho|`, per time.
    pub heat_residuals: Vec<f64>,
    pub max_fde_residual: f64,
    pub min_heat_residual: f64,
    /// `max |a^2 - b^2 - omega^2|`.
    pub invariant_error: f64,
}

pub fn verify_exact_solution(d: f64, omega: f64, t0: f64, t_end: f64, n: usize) -> Result<ExactSolutionReport> {
    let sol = ExactFdeSolution::new(d, omega, t0)?;
    if !(t_end >= 0.0) {
        return Err(Error::param("t_end must be nonnegative"));
    }
    let basis = Basis::new(d, n)?;
    let steps = 20;
    let mut times = Vec::new();
    let mut fde = Vec::new();
    let mut heat = Vec::new();
    let mut invariant_error: f64 = 0.0;
    for k in 0..=steps {
        let t = t_end * k as f64 / steps as f64;
        let (a, b) = sol.coefficients(t);
        invariant_error = invariant_error.max((a * a - b * b - omega * omega).abs());
        let rho = sol.density(&basis, t)?;
        let dt = sol.time_derivative(&basis, t);
        let l_rho_m = rho.powf(sol.m())?.apply_l()?;
        let l_rho = rho.apply_l()?;
        fde.push(dt.max_abs_diff(&l_rho_m)?);
        heat.push(dt.max_abs_diff(&l_rho)?);
        times.push(t);
    }
    Ok(ExactSolutionReport {
        d,
        omega,
        t0,
        t_end,
        n,
        max_fde_residual: fde.iter().copied().fold(0.0, f64::max),
        min_heat_residual: heat.iter().copied().fold(f64::INFINITY, f64::min),
        times,
        fde_residuals: fde,
        heat_residuals: heat,
        invariant_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::Params;

    #[test]
    fn heat_eigenmode_decays_exactly() {
        let d = 5.0;
        let b = Basis::new(d, 32).unwrap();
        let eps = 0.2;
        let rho = GridFn::from_fn(&b, |z| 1.0 + eps * z);
        let params = Params::new(d, 3.0).unwrap();
        let s = FlowState::new(FlowForm::RhoHeat, FlowSpec::heat(&params), rho).unwrap();
        let s = step(&s, 0.3, &FlowConfig::default()).unwrap();
        for (&z, &v) in b.nodes().iter().zip(s.f.values()) {
            assert!((v - (1.0 + eps * z * (-d * 0.3f64).exp())).abs() < 1e-12);
        }
        assert!((s.conserved() - s.conserved0).abs() < 1e-13);
    }

    #[test]
    fn w_state_rejects_infinite_beta() {
        let params = Params::new(3.0, 6.0).unwrap();
        let spec = FlowSpec::infinite_beta(&params).unwrap();
        let b = Basis::new(3.0, 16).unwrap();
        assert!(FlowState::new(FlowForm::WNonlinear, spec, GridFn::constant(&b, 1.0)).is_err());
        assert!(FlowState::new(FlowForm::RhoFde, spec, GridFn::constant(&b, 1.0)).is_ok());
    }

    #[test]
    fn exact_solution_invariant() {
        let sol = ExactFdeSolution::new(4.0, 1.3, 0.2).unwrap();
        for t in [0.0, 0.5, 2.0] {
            let (a, b) = sol.coefficients(t);
            assert!((a * a - b * b - 1.69).abs() < 1e-12);
        }
    }

    #[test]
    fn form_names_parse() {
        for f in [FlowForm::RhoHeat, FlowForm::RhoFde, FlowForm::ULinear, FlowForm::WNonlinear] {
            assert_eq!(f.name().parse::<FlowForm>().unwrap(), f);
        }
    }
}
