//! Entropy, Fisher information, deficit and quotient of a positive density,
//! and the carré du champ integrals governing their decay.
//!
//! Conventions, with `rho = u^p` and all integrals against `d nu_d`:
//!
//! * `E_p[rho] = ((int rho)^(2/p) - int rho^(2/p)) / (p - 2)`, and
//!   `E_2[rho] = (1/2) int rho log(rho / int rho)` (its limit at `p = 2`);
//! * `I_p[rho] = int |(rho^(1/p))'|^2 nu`;
//! * `F[rho] = I_p / d - E_p`, nonnegative exactly when the interpolation
//!   inequality holds for `u`;
//! * `Q_p[u] = I_p / E_p`, so `F >= 0` is the statement `Q_p >= d`.

use serde::Serialize;

use crate::constants::{gamma_of_beta, gamma_one, Params};
use crate::discretization::{GridFn, Profile};
use crate::error::{Error, Result};

/// Below this distance to 2 the logarithmic branch is used.
pub const LOG_BRANCH_TOL: f64 = 1e-9;

/// Relative agreement required between the expanded and completed-square
/// dissipation forms.
pub const IDENTITY_TOL: f64 = 1e-10;

fn is_log(p: f64) -> bool {
    (p - 2.0).abs() < LOG_BRANCH_TOL
}

/// The scalar functionals of `rho = u^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Functionals {
    /// `int rho`.
    pub mass: f64,
    /// `int u^2`.
    pub l2: f64,
    pub entropy: f64,
    pub fisher: f64,
    pub deficit: f64,
    /// `None` for constant `u`.
    pub quotient: Option<f64>,
}

/// Evaluates the functionals from fine-grid samples of `rho` and of
/// `u = rho^(1/p)` with its derivative.
fn evaluate(rho: &[f64], u: &Profile, p: f64, d: f64) -> Functionals {
    let w = &u.basis().fine_quadrature().weights;
    let nu = u.basis().fine_nu();
    let mut mass = 0.0;
    let mut l2 = 0.0;
    let mut fisher = 0.0;
    for i in 0..rho.len() {
        mass += w[i] * rho[i];
        l2 += w[i] * u.f[i] * u.f[i];
        fisher += w[i] * u.f1[i] * u.f1[i] * nu[i];
    }
    let entropy = if is_log(p) {
        0.5 * (0..rho.len()).map(|i| w[i] * rho[i] * (rho[i] / mass).ln()).sum::<f64>()
    } else {
        (mass.powf(2.0 / p) - l2) / (p - 2.0)
    };
    let deficit = fisher / d - entropy;
    let quotient = if fisher <= 1e-28 * l2 { None } else { Some(fisher / entropy) };
    Functionals { mass, l2, entropy, fisher, deficit, quotient }
}

fn check_p(p: f64) -> Result<()> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::param(format!("exponent p = {p} must be a finite number >= 1")));
    }
    Ok(())
}

/// Functionals of the density `rho`.
pub fn functionals_of_density(rho: &GridFn, p: f64) -> Result<Functionals> {
    check_p(p)?;
    rho.require_positive()?;
    let pr = rho.profile()?;
    let u = pr.powf(1.0 / p)?;
    Ok(evaluate(&pr.f, &u, p, rho.d()))
}

/// Functionals of `rho = u^p` computed from `u`.
pub fn functionals_of_root(u: &GridFn, p: f64) -> Result<Functionals> {
    check_p(p)?;
    u.require_positive()?;
    let up = u.profile()?;
    let rho = up.powf(p)?;
    Ok(evaluate(&rho.f, &up, p, u.d()))
}

/// `E_p[rho]`.
pub fn entropy(rho: &GridFn, p: f64) -> Result<f64> {
    Ok(functionals_of_density(rho, p)?.entropy)
}

/// `I_p[rho] = int |(rho^(1/p))'|^2 nu d nu_d`.
pub fn fisher(rho: &GridFn, p: f64) -> Result<f64> {
    Ok(functionals_of_density(rho, p)?.fisher)
}

/// `F[rho] = I_p / d - E_p`.
pub fn deficit(rho: &GridFn, p: f64) -> Result<f64> {
    Ok(functionals_of_density(rho, p)?.deficit)
}

/// `Q_p[u] = (p - 2) int |u'|^2 nu / (||u||_p^2 - ||u||_2^2)`.
pub fn quotient(u: &GridFn, p: f64) -> Result<f64> {
    functionals_of_root(u, p)?
        .quotient
        .ok_or_else(|| Error::DivisionByZero("the quotient of a constant function".into()))
}

/// `(J_ff, J_fc, J_cc)`: the integrals of `|u''|^2`, `u'' |u'|^2 / u` and
/// `|u'|^4 / u^2` against `nu^2 d nu_d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CdcTriple {
    #[serde(rename = "J_ff")]
    pub j_ff: f64,
    #[serde(rename = "J_fc")]
    pub j_fc: f64,
    #[serde(rename = "J_cc")]
    pub j_cc: f64,
}

fn triple_of(pr: &Profile) -> Result<CdcTriple> {
    pr.require_positive()?;
    let w = &pr.basis().fine_quadrature().weights;
    let nu = pr.basis().fine_nu();
    let (mut j_ff, mut j_fc, mut j_cc) = (0.0, 0.0, 0.0);
    for i in 0..pr.len() {
        let nu2 = nu[i] * nu[i];
        let ratio = pr.f1[i] * pr.f1[i] / pr.f[i];
        j_ff += w[i] * pr.f2[i] * pr.f2[i] * nu2;
        j_fc += w[i] * pr.f2[i] * ratio * nu2;
        j_cc += w[i] * ratio * ratio * nu2;
    }
    Ok(CdcTriple { j_ff, j_fc, j_cc })
}

pub fn cdc_triple(u: &GridFn) -> Result<CdcTriple> {
    u.require_positive()?;
    triple_of(&u.profile()?)
}

/// `int |u'' - s |u'|^2 / u|^2 nu^2 d nu_d`.
fn shifted_square(pr: &Profile, s: f64) -> f64 {
    pr.integrate(|x| {
        let r = x.f2 - s * x.f1 * x.f1 / x.f;
        r * r * x.nu * x.nu
    })
}

/// Analytic deficit dissipation together with the functionals at the same
/// state.
#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DissipationReport {
    pub schema_version: u32,
    pub d: f64,
    pub p: f64,
    pub beta: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub E_p: f64,
    pub I_p: f64,
    pub F: f64,
    pub Q_p: Option<f64>,
    pub J_ff: f64,
    pub J_fc: f64,
    pub J_cc: f64,
    /// `dF/dt` along the density equation, from the expanded form.
    pub dF_dt_analytic: f64,
    /// Same value from the completed square plus `gamma J_cc`.
    pub dF_dt_square: f64,
    /// Derivative in the time of the `w` equation; equals `dF_dt_analytic / m`.
    pub dF_ds_analytic: f64,
    /// Finite-difference value, filled in by the flows module.
    pub dF_dt_numeric: Option<f64>,
    /// `gamma(beta)`, the coefficient of `J_cc` in the square form.
    pub gamma: f64,
    /// Value of `int |w'' - s |w'|^2/w|^2 nu^2` in the square form.
    pub square: f64,
    /// Relative gap between the expanded and square forms.
    pub identity_residual: f64,
}

impl DissipationReport {
    /// `dF/dt` in the normalisation without the `1/d` of `F`, i.e. the time
    /// derivative of `I_p - d E_p`.
    pub fn d_unnormalized(&self) -> f64 {
        self.d * self.dF_dt_analytic
    }
}

fn relative_gap(a: f64, b: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        (a - b).abs()
    } else {
        (a - b).abs() / scale
    }
}

/// Dissipation of `F[u^p]` along the heat flow `rho_t = L rho`.
///
/// `dF/dt = -(2/d) [J_ff - 2 c (p-1) J_fc + d/(d+2) (p-1) J_cc]` with
/// `c = (d-1)/(d+2)`, and the bracket equals the square with shift
/// `c (p-1)` plus `gamma_1 J_cc`.
pub fn dissipation_heat(u: &GridFn, p: f64) -> Result<DissipationReport> {
    let d = u.d();
    let params = Params::new(d, p)?;
    u.require_positive()?;
    let up = u.profile()?;
    let rho = up.powf(p)?;
    let fun = evaluate(&rho.f, &up, p, d);
    let t = triple_of(&up)?;
    let c = (d - 1.0) / (d + 2.0);
    let bracket = t.j_ff - 2.0 * c * (p - 1.0) * t.j_fc + d / (d + 2.0) * (p - 1.0) * t.j_cc;
    let gamma = gamma_one(&params);
    let square = shifted_square(&up, c * (p - 1.0));
    let completed = square + gamma * t.j_cc;
    let scale = t.j_ff + 2.0 * (c * (p - 1.0) * t.j_fc).abs() + (p - 1.0) * t.j_cc;
    Ok(DissipationReport {
        schema_version: crate::SCHEMA_VERSION,
        d,
        p,
        beta: 1.0,
        n: u.order(),
        E_p: fun.entropy,
        I_p: fun.fisher,
        F: fun.deficit,
        Q_p: fun.quotient,
        J_ff: t.j_ff,
        J_fc: t.j_fc,
        J_cc: t.j_cc,
        dF_dt_analytic: -2.0 / d * bracket,
        dF_dt_square: -2.0 / d * completed,
        dF_ds_analytic: -2.0 / d * bracket,
        dF_dt_numeric: None,
        gamma,
        square,
        identity_residual: relative_gap(bracket, completed, scale),
    })
}

/// Dissipation of `F[w^(beta p)]` along `w_s = w^(2-2 beta) (L w + kappa nu |w'|^2 / w)`.
///
/// In `w` time, `dF/ds = -(2 beta^2 / d) [J_ff - 2 c (kappa+beta-1) J_fc
/// + (kappa (beta-1) + d/(d+2) (kappa+beta-1)) J_cc]` with the triple taken
/// at `w`; the density time is `t = s / m`.
pub fn dissipation_nonlinear(w: &GridFn, p: f64, beta: f64) -> Result<DissipationReport> {
    let d = w.d();
    let params = Params::new(d, p)?;
    let spec = crate::constants::FlowSpec::nonlinear(&params, beta)?;
    let kappa = spec.kappa.expect("finite beta");
    w.require_positive()?;
    let wp = w.profile()?;
    let up = wp.powf(beta)?;
    let rho = wp.powf(beta * p)?;
    let fun = evaluate(&rho.f, &up, p, d);
    let t = triple_of(&wp)?;
    let c = (d - 1.0) / (d + 2.0);
    let s = kappa + beta - 1.0;
    let bracket = t.j_ff - 2.0 * c * s * t.j_fc
        + (kappa * (beta - 1.0) + d / (d + 2.0) * s) * t.j_cc;
    let gamma = gamma_of_beta(&params, beta);
    let square = shifted_square(&wp, c * s);
    let completed = square + gamma * t.j_cc;
    let scale = t.j_ff + 2.0 * (c * s * t.j_fc).abs() + (kappa * (beta - 1.0)).abs() * t.j_cc
        + d / (d + 2.0) * s.abs() * t.j_cc;
    let factor = -2.0 * beta * beta / d;
    Ok(DissipationReport {
        schema_version: crate::SCHEMA_VERSION,
        d,
        p,
        beta,
        n: w.order(),
        E_p: fun.entropy,
        I_p: fun.fisher,
        F: fun.deficit,
        Q_p: fun.quotient,
        J_ff: t.j_ff,
        J_fc: t.j_fc,
        J_cc: t.j_cc,
        dF_dt_analytic: spec.m * factor * bracket,
        dF_dt_square: spec.m * factor * completed,
        dF_ds_analytic: factor * bracket,
        dF_dt_numeric: None,
        gamma,
        square,
        identity_residual: relative_gap(bracket, completed, scale),
    })
}

/// Both sides of the two integration-by-parts identities for `L`:
///
/// * `int (L f)^2 = int |f''|^2 nu^2 + d int |f'|^2 nu`;
/// * `<(|f'|^2 / f) nu, L f> = d/(d+2) int |f'|^4/f^2 nu^2
///   - 2 (d-1)/(d+2) int |f'|^2 f'' / f nu^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaIdentities {
    pub first_lhs: f64,
    pub first_rhs: f64,
    pub second_lhs: f64,
    pub second_rhs: f64,
    /// `|lhs - rhs|` relative to the sum of the magnitudes of the terms.
    pub first_residual: f64,
    pub second_residual: f64,
}

pub fn lemma_identities(f: &GridFn) -> Result<LemmaIdentities> {
    f.require_positive()?;
    let d = f.d();
    let pr = f.profile()?;
    let lf = f.apply_l()?.profile()?;
    pr.require_positive()?;
    let w = &pr.basis().fine_quadrature().weights;
    let nu = pr.basis().fine_nu();
    let (mut ll, mut hess, mut grad) = (0.0, 0.0, 0.0);
    let (mut mixed, mut quart, mut cross) = (0.0, 0.0, 0.0);
    for i in 0..pr.len() {
        let (v, v1, v2) = (pr.f[i], pr.f1[i], pr.f2[i]);
        let q = v1 * v1 / v;
        ll += w[i] * lf.f[i] * lf.f[i];
        hess += w[i] * v2 * v2 * nu[i] * nu[i];
        grad += w[i] * v1 * v1 * nu[i];
        mixed += w[i] * q * nu[i] * lf.f[i];
        quart += w[i] * q * q * nu[i] * nu[i];
        cross += w[i] * q * v2 * nu[i] * nu[i];
    }
    let a = d / (d + 2.0);
    let b = 2.0 * (d - 1.0) / (d + 2.0);
    let first_rhs = hess + d * grad;
    let second_rhs = a * quart - b * cross;
    let gap = |x: f64, y: f64, s: f64| if s > 0.0 { (x - y).abs() / s } else { (x - y).abs() };
    Ok(LemmaIdentities {
        first_lhs: ll,
        first_rhs,
        second_lhs: mixed,
        second_rhs,
        first_residual: gap(ll, first_rhs, ll.abs() + hess.abs() + d * grad.abs()),
        second_residual: gap(mixed, second_rhs, mixed.abs() + a * quart.abs() + b * cross.abs()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::Basis;

    #[test]
    fn constants_have_zero_functionals() {
        let b = Basis::new(5.0, 32).unwrap();
        let one = GridFn::constant(&b, 2.0);
        for p in [1.5, 2.0, 3.0] {
            let f = functionals_of_density(&one, p).unwrap();
            assert!(f.entropy.abs() < 1e-14 && f.fisher == 0.0 && f.deficit.abs() < 1e-14);
            assert!(f.quotient.is_none());
        }
        assert!(matches!(quotient(&one, 3.0), Err(Error::DivisionByZero(_))));
        let r = dissipation_heat(&one, 3.0).unwrap();
        assert!(r.dF_dt_analytic.abs() < 1e-14 && r.J_cc == 0.0);
    }

    #[test]
    fn root_and_density_paths_agree() {
        let b = Basis::new(4.0, 48).unwrap();
        let u = GridFn::from_fn(&b, |z| 1.0 + 0.3 * z + 0.1 * z * z);
        let rho = u.powf(3.0).unwrap();
        let a = functionals_of_root(&u, 3.0).unwrap();
        let c = functionals_of_density(&rho, 3.0).unwrap();
        assert!((a.deficit - c.deficit).abs() < 1e-12);
        assert!((a.fisher - c.fisher).abs() < 1e-12);
    }

    #[test]
    fn heat_forms_agree() {
        let b = Basis::new(5.0, 48).unwrap();
        let u = GridFn::from_fn(&b, |z| 1.2 + 0.5 * z - 0.3 * z * z * z);
        let r = dissipation_heat(&u, 3.0).unwrap();
        assert!(r.identity_residual < IDENTITY_TOL);
        assert!(r.dF_dt_analytic < 0.0);
    }

    #[test]
    fn nonlinear_at_beta_one_is_heat() {
        let b = Basis::new(5.0, 48).unwrap();
        let u = GridFn::from_fn(&b, |z| (0.4 * z).exp() + 0.2);
        let h = dissipation_heat(&u, 3.1).unwrap();
        let n = dissipation_nonlinear(&u, 3.1, 1.0).unwrap();
        assert!((h.dF_dt_analytic - n.dF_dt_analytic).abs() < 1e-12 * h.dF_dt_analytic.abs());
        assert!((h.F - n.F).abs() < 1e-14);
    }
}
