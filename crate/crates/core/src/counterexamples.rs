//! Explicit functions on which the dissipation identities can be checked by
//! hand: the conformal family `u = (a + b z)^(-(d-2)/2)`, which minimises the
//! deficit at `p = 2^*`, and the power-law witness `w = (a + b z)^(1/(1-alpha))`
//! along which the heat flow increases the deficit for `2^# < p < 2^*`.

use std::sync::Arc;

use serde::Serialize;

use crate::constants::{
    alpha_of_beta, beta_roots, counterexample_coefficient, ExtReal, FlowSpec, Params,
};
use crate::discretization::{Basis, GridFn};
use crate::error::{Error, Result};
use crate::flows::{self, ExactFdeSolution, FlowConfig, FlowForm, FlowState};
use crate::functionals::{cdc_triple, dissipation_heat, dissipation_nonlinear, functionals_of_root};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FamilyKind {
    Conformal,
    PowerLaw,
}

/// A member of one of the two explicit families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExplicitFamily {
    pub kind: FamilyKind,
    pub a: f64,
    pub b: f64,
    pub params: Params,
    /// `alpha = (d-1) beta (p-1) / (d+2)`; power law only.
    pub alpha: Option<f64>,
    /// `beta_-(p, d)`; power law only.
    pub beta: Option<f64>,
}

fn check_ab(a: f64, b: f64) -> Result<()> {
    if !(a > b.abs()) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("a = {a}, b = {b} violate a > |b|")));
    }
    Ok(())
}

impl ExplicitFamily {
    pub fn conformal(params: Params, a: f64, b: f64) -> Result<Self> {
        check_ab(a, b)?;
        Ok(ExplicitFamily { kind: FamilyKind::Conformal, a, b, params, alpha: None, beta: None })
    }

    /// Power law with `beta = beta_-(p, d)`.
    pub fn power_law(params: Params, a: f64, b: f64) -> Result<Self> {
        check_ab(a, b)?;
        let beta = match beta_roots(&params)?.beta_minus {
            ExtReal::Finite(beta) => beta,
            _ => {
                return Err(Error::SingularExponent(format!(
                    "beta_- is infinite at d = {}, p = {}",
                    params.d, params.p
                )))
            }
        };
        Self::power_law_with_beta(params, a, b, beta)
    }

    pub fn power_law_with_beta(params: Params, a: f64, b: f64, beta: f64) -> Result<Self> {
        check_ab(a, b)?;
        let alpha = alpha_of_beta(&params, beta);
        if (alpha - 1.0).abs() < 1e-12 {
            return Err(Error::SingularExponent("alpha = 1".into()));
        }
        Ok(ExplicitFamily { kind: FamilyKind::PowerLaw, a, b, params, alpha: Some(alpha), beta: Some(beta) })
    }

    /// Exponent `e` with the materialised function equal to `(a + b z)^e`.
    pub fn exponent(&self) -> f64 {
        match self.kind {
            FamilyKind::Conformal => -(self.params.d - 2.0) / 2.0,
            FamilyKind::PowerLaw => 1.0 / (1.0 - self.alpha.expect("power law")),
        }
    }

    pub fn eval(&self, z: f64) -> f64 {
        (self.a + self.b * z).powf(self.exponent())
    }

    /// `u` for the conformal family, `w` for the power law.
    pub fn materialize(&self, basis: &Arc<Basis>) -> Result<GridFn> {
        let f = GridFn::from_fn(basis, |z| self.eval(z));
        f.require_positive()?;
        f.require_resolved()?;
        Ok(f)
    }

    /// `u = w^beta` for the power law, `u` itself for the conformal family.
    pub fn materialize_root(&self, basis: &Arc<Basis>) -> Result<GridFn> {
        let e = self.exponent() * self.beta.unwrap_or(1.0);
        let f = GridFn::from_fn(basis, |z| (self.a + self.b * z).powf(e));
        f.require_positive()?;
        f.require_resolved()?;
        Ok(f)
    }
}

/// Nodal residual of `f'' = s |f'|^2 / f`, weighted by `1 - z^2` and taken
/// relative to `max (1 - z^2) |f''|`.
pub fn power_ode_residual(f: &GridFn, s: f64) -> Result<f64> {
    let f1 = f.derivative()?;
    let f2 = f.second_derivative()?;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (i, z) in f.nodes().iter().enumerate() {
        let nu = 1.0 - z * z;
        let (v, v1, v2) = (f.values()[i], f1.values()[i], f2.values()[i]);
        worst = worst.max(nu * (v2 - s * v1 * v1 / v).abs());
        scale = scale.max(nu * v2.abs());
    }
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

#[derive(Debug, Clone, Serialize)]
pub struct FirstObstructionReport {
    pub schema_version: u32,
    pub d: f64,
    pub p: f64,
    pub a: f64,
    pub b: f64,
    #[serde(rename = "N")]
    pub n: usize,
    /// `beta = (d-2)/(d-3)`, infinite at `d = 3`.
    pub beta: ExtReal,
    /// Deficit of the conformal datum.
    pub deficit: f64,
    /// `dF/dt` along the fast-diffusion flow at the datum.
    pub fde_dissipation: f64,
    /// `dF/dt` along the heat flow at the datum.
    pub heat_dissipation: f64,
    /// `(int (rho_t - L rho)^2 d nu_d)^(1/2)` with `rho_t` from the explicit
    /// fast-diffusion solution through the datum.
    pub heat_mismatch: f64,
    /// Same with `L rho^m`; vanishes up to discretisation error.
    pub fde_mismatch: f64,
    /// Residual of `w'' = ((d-1)/(d-3)) |w'|^2 / w`, when `d > 3`.
    pub w_ode_residual: Option<f64>,
    /// Largest value of `F` along the heat flow on `[0, heat_horizon]`.
    pub heat_max_deficit: f64,
    pub heat_horizon: f64,
}

/// Conformal datum at `p = 2^*`: both dissipations vanish there, while the
/// heat flow leaves the family and raises the deficit.
pub fn first_obstruction(d: f64, a: f64, b: f64, n: usize) -> Result<FirstObstructionReport> {
    if !(d >= 3.0) {
        return Err(Error::Range { what: "dimension d", detail: format!("d = {d} must be at least 3") });
    }
    let p = 2.0 * d / (d - 2.0);
    let params = Params::new(d, p)?;
    let fam = ExplicitFamily::conformal(params, a, b)?;
    let basis = Basis::new(d, n)?;
    let u = fam.materialize(&basis)?;
    let rho = u.powf(p)?;
    let deficit = functionals_of_root(&u, p)?.deficit;
    let heat_dissipation = dissipation_heat(&u, p)?.dF_dt_analytic;
    let m = 1.0 - 1.0 / d;

    let (beta, fde_dissipation, w_ode_residual) = if d > 3.0 + 1e-12 {
        let beta = (d - 2.0) / (d - 3.0);
        let w = GridFn::from_fn(&basis, |z| (a + b * z).powf(-(d - 3.0) / 2.0));
        let r = dissipation_nonlinear(&w, p, beta)?;
        (ExtReal::Finite(beta), r.dF_dt_analytic, Some(power_ode_residual(&w, (d - 1.0) / (d - 3.0))?))
    } else {
        let spec = FlowSpec::infinite_beta(&params)?;
        let state = FlowState::new(FlowForm::RhoFde, spec, rho.clone())?;
        (ExtReal::PosInf, flows::numeric_dfdt(&state, &FlowConfig::default())?, None)
    };

    // rho_t of the explicit solution through (a, b): a' = -(d-1) b^2, b' = -(d-1) a b
    let (da, db) = (-(d - 1.0) * b * b, -(d - 1.0) * a * b);
    let rho_t = GridFn::from_fn(&basis, |z| -d * (a + b * z).powf(-d - 1.0) * (da + db * z));
    let heat_mismatch = rho_t.dist(&rho.apply_l()?)?;
    let fde_mismatch = rho_t.dist(&rho.powf(m)?.apply_l()?)?;

    let spec = FlowSpec::heat(&params);
    let state = FlowState::new(FlowForm::RhoHeat, spec, rho)?;
    let heat_horizon = 0.5;
    let cfg = FlowConfig { samples: 50, ..Default::default() };
    let (_, traj) = flows::evolve(&state, heat_horizon, &cfg, &mut |_, _| {})?;
    let heat_max_deficit = traj.samples.iter().map(|s| s.F).fold(f64::NEG_INFINITY, f64::max);

    Ok(FirstObstructionReport {
        schema_version: crate::SCHEMA_VERSION,
        d,
        p,
        a,
        b,
        n,
        beta,
        deficit,
        fde_dissipation,
        heat_dissipation,
        heat_mismatch,
        fde_mismatch,
        w_ode_residual,
        heat_max_deficit,
        heat_horizon,
    })
}

/// First obstruction evaluated on the explicit fast-diffusion solution at a
/// given time, as an alternative entry point.
pub fn first_obstruction_on_exact(sol: &ExactFdeSolution, t: f64, n: usize) -> Result<FirstObstructionReport> {
    let (a, b) = sol.coefficients(t);
    first_obstruction(sol.d, a, b, n)
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, Serialize)]
pub struct SecondObstructionReport {
    pub schema_version: u32,
    pub d: f64,
    pub p: f64,
    pub a: f64,
    pub b: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub beta: f64,
    pub alpha: f64,
    pub A_closed_form: f64,
    /// `int |u'|^4 / u^2 nu^2 d nu_d` at `u = w^beta`.
    pub J_cc: f64,
    /// `A J_cc`, the derivative of `I_p - d E_p` up to the factor `2/beta^2`.
    pub rhs_unnormalized: f64,
    /// `2 A J_cc / (d beta^2)`: `dF/dt` in the normalisation of `F`.
    pub rhs: f64,
    pub dFdt_analytic: f64,
    pub dFdt_numeric: f64,
    pub analytic_rel_error: f64,
    pub numeric_rel_error: f64,
    pub positive: bool,
    /// Set when `b = 0`: the datum is constant and every quantity vanishes.
    pub vacuous: bool,
    pub w_ode_residual: f64,
    /// Nodal residuals of the two identities relating `u = w^beta` to `w`.
    pub u_from_w_residuals: [f64; 2],
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

/// Residuals of `(1/beta) w^(1-beta) u'' = (alpha+beta-1) |w'|^2 / w` and
/// `(1/beta) w^(1-beta) |u'|^2 / u = beta |w'|^2 / w`, relative to the size of
/// the right-hand sides.
fn u_from_w(w: &GridFn, u: &GridFn, alpha: f64, beta: f64) -> Result<[f64; 2]> {
    let w1 = w.derivative()?;
    let u1 = u.derivative()?;
    let u2 = u.second_derivative()?;
    let (mut r1, mut r2, mut s): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for i in 0..w.order() {
        let wv = w.values()[i];
        let q = w1.values()[i].powi(2) / wv;
        let pre = wv.powf(1.0 - beta) / beta;
        r1 = r1.max((pre * u2.values()[i] - (alpha + beta - 1.0) * q).abs());
        r2 = r2.max((pre * u1.values()[i].powi(2) / u.values()[i] - beta * q).abs());
        s = s.max(q.abs());
    }
    Ok([r1 / s.max(f64::MIN_POSITIVE), r2 / s.max(f64::MIN_POSITIVE)])
}

/// Power-law witness: closed form, carré du champ expansion and a finite
/// difference along the heat flow for `dF/dt` at `t = 0`.
pub fn second_obstruction(d: f64, p: f64, a: f64, b: f64, n: usize) -> Result<SecondObstructionReport> {
    if !(d >= 3.0) {
        return Err(Error::Range { what: "dimension d", detail: format!("d = {d} must be at least 3") });
    }
    let params = Params::new(d, p)?;
    let two_sharp = params.two_sharp().finite().expect("d > 1");
    let two_star = params.two_star().finite().expect("d > 2");
    if !(p > two_sharp && p < two_star) {
        return Err(Error::Range {
            what: "exponent p",
            detail: format!("p = {p} is outside ({two_sharp}, {two_star})"),
        });
    }
    let fam = ExplicitFamily::power_law(params, a, b)?;
    let (alpha, beta) = (fam.alpha.unwrap(), fam.beta.unwrap());
    let basis = Basis::new(d, n)?;
    let w = fam.materialize(&basis)?;
    let u = fam.materialize_root(&basis)?;
    let a_coef = counterexample_coefficient(&params, beta);
    let j_cc = cdc_triple(&u)?.j_cc;
    let rhs_unnormalized = a_coef * j_cc;
    let rhs = 2.0 * a_coef * j_cc / (d * beta * beta);
    let dfdt_analytic = dissipation_heat(&u, p)?.dF_dt_analytic;
    let state = FlowState::new(FlowForm::RhoHeat, FlowSpec::heat(&params), u.powf(p)?)?;
    let dfdt_numeric = flows::numeric_dfdt(&state, &FlowConfig::default())?;
    let vacuous = b == 0.0;
    Ok(SecondObstructionReport {
        schema_version: crate::SCHEMA_VERSION,
        d,
        p,
        a,
        b,
        n,
        beta,
        alpha,
        A_closed_form: a_coef,
        J_cc: j_cc,
        rhs_unnormalized,
        rhs,
        dFdt_analytic: dfdt_analytic,
        dFdt_numeric: dfdt_numeric,
        analytic_rel_error: rel(dfdt_analytic, rhs),
        numeric_rel_error: rel(dfdt_numeric, rhs),
        positive: rhs > 0.0 && dfdt_analytic > 0.0 && dfdt_numeric > 0.0,
        vacuous,
        w_ode_residual: power_ode_residual(&w, alpha)?,
        u_from_w_residuals: u_from_w(&w, &u, alpha, beta)?,
    })
}

/// One row of the sign certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignRow {
    pub d: f64,
    pub p: f64,
    pub beta_minus: f64,
    #[serde(rename = "A")]
    pub a_coef: f64,
}

/// `A(p, beta_-(p, d))` on `n_p` interior points of `(2^#, 2^*)` per dimension.
pub fn sign_certificate(dims: &[f64], n_p: usize) -> Result<Vec<SignRow>> {
    let mut rows = Vec::with_capacity(dims.len() * n_p);
    for &d in dims {
        if !(d > 2.0) {
            return Err(Error::Range { what: "dimension d", detail: format!("d = {d} must exceed 2") });
        }
        let lo = (2.0 * d * d + 1.0) / ((d - 1.0) * (d - 1.0));
        let hi = 2.0 * d / (d - 2.0);
        for i in 0..n_p {
            let p = lo + (hi - lo) * (i + 1) as f64 / (n_p + 1) as f64;
            let params = Params::new(d, p)?;
            let beta_minus = beta_roots(&params)?.beta_minus.finite().ok_or_else(|| {
                Error::SingularExponent(format!("beta_- is infinite at d = {d}, p = {p}"))
            })?;
            rows.push(SignRow { d, p, beta_minus, a_coef: counterexample_coefficient(&params, beta_minus) });
        }
    }
    Ok(rows)
}

pub fn write_sign_certificate<W: std::io::Write>(rows: &[SignRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["d", "p", "beta_minus", "A"])?;
    for r in rows {
        w.write_record([r.d, r.p, r.beta_minus, r.a_coef].map(|x| format!("{x}")))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conformal_with_zero_slope_is_constant() {
        let params = Params::new(5.0, 10.0 / 3.0).unwrap();
        let fam = ExplicitFamily::conformal(params, 2.0, 0.0).unwrap();
        let b = Basis::new(5.0, 16).unwrap();
        let u = fam.materialize(&b).unwrap();
        let c = 2.0f64.powf(-1.5);
        assert!(u.values().iter().all(|v| (v - c).abs() < 1e-15));
    }

    #[test]
    fn rejects_nonpositive_family() {
        let params = Params::new(5.0, 3.25).unwrap();
        assert!(ExplicitFamily::power_law(params, 1.0, 1.0).is_err());
        assert!(ExplicitFamily::conformal(params, 0.5, -0.7).is_err());
    }

    #[test]
    fn second_obstruction_range() {
        assert!(matches!(second_obstruction(5.0, 3.0, 1.0, 0.4, 64), Err(Error::Range { .. })));
        assert!(matches!(second_obstruction(2.0, 3.0, 1.0, 0.4, 64), Err(Error::Range { .. })));
    }

    #[test]
    fn sign_certificate_grid_is_interior() {
        let rows = sign_certificate(&[5.0], 10).unwrap();
        assert_eq!(rows.len(), 10);
        assert!(rows.iter().all(|r| r.p > 51.0 / 16.0 && r.p < 10.0 / 3.0 && r.a_coef > 0.0));
    }
}
