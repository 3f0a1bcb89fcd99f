//! Initial data from short textual specifications.
//!
//! | spec | `u` |
//! |---|---|
//! | `const:c` | `c` |
//! | `conformal:a,b` | `(a + b z)^(-(d-2)/2)` |
//! | `powerlaw:a,b` | `w^beta` with `w = (a + b z)^(1/(1-alpha))`, `beta = beta_-` |
//! | `random:seed,modes` | random positive polynomial of degree `modes` |
//! | `perturb:eps,mode` | `1 + eps p_mode / p_mode(1)` |
//!
//! A spec always describes `u`; the unknown of a flow form is derived from
//! it (`rho = u^p`, `w = u^(1/beta)`).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::constants::{FlowSpec, Params};
use crate::counterexamples::ExplicitFamily;
use crate::discretization::{Basis, GridFn};
use crate::error::{Error, Result};
use crate::flows::{FlowForm, FlowState};
use crate::sampling;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitSpec {
    Const(f64),
    Conformal { a: f64, b: f64 },
    PowerLaw { a: f64, b: f64 },
    Random { seed: u64, modes: usize },
    Perturb { eps: f64, mode: usize },
}

fn numbers(kind: &str, args: &str, n: usize) -> Result<Vec<f64>> {
    let vals: Vec<f64> = args
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::param(format!("{kind}: {e}")))?;
    if vals.len() != n {
        return Err(Error::param(format!("{kind} takes {n} argument(s), got {}", vals.len())));
    }
    Ok(vals)
}

fn count(kind: &str, x: f64) -> Result<usize> {
    if x < 0.0 || x.fract() != 0.0 || x > 1e9 {
        return Err(Error::param(format!("{kind}: {x} is not a nonnegative integer")));
    }
    Ok(x as usize)
}

impl FromStr for InitSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| Error::param(format!("init spec '{s}' lacks a ':'")))?;
        match kind.trim() {
            "const" => Ok(InitSpec::Const(numbers(kind, args, 1)?[0])),
            "conformal" => {
                let v = numbers(kind, args, 2)?;
                Ok(InitSpec::Conformal { a: v[0], b: v[1] })
            }
            "powerlaw" => {
                let v = numbers(kind, args, 2)?;
                Ok(InitSpec::PowerLaw { a: v[0], b: v[1] })
            }
            "random" => {
                let v = numbers(kind, args, 2)?;
                Ok(InitSpec::Random { seed: count(kind, v[0])? as u64, modes: count(kind, v[1])? })
            }
            "perturb" => {
                let v = numbers(kind, args, 2)?;
                Ok(InitSpec::Perturb { eps: v[0], mode: count(kind, v[1])? })
            }
            other => Err(Error::param(format!("unknown init spec kind '{other}'"))),
        }
    }
}

impl fmt::Display for InitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            InitSpec::Const(c) => write!(f, "const:{c}"),
            InitSpec::Conformal { a, b } => write!(f, "conformal:{a},{b}"),
            InitSpec::PowerLaw { a, b } => write!(f, "powerlaw:{a},{b}"),
            InitSpec::Random { seed, modes } => write!(f, "random:{seed},{modes}"),
            InitSpec::Perturb { eps, mode } => write!(f, "perturb:{eps},{mode}"),
        }
    }
}

impl InitSpec {
    /// The function `u` on `basis`.
    pub fn root(&self, basis: &Arc<Basis>, params: &Params) -> Result<GridFn> {
        let u = match *self {
            InitSpec::Const(c) => {
                if !(c > 0.0) || !c.is_finite() {
                    return Err(Error::param(format!("const:{c} must be positive")));
                }
                GridFn::constant(basis, c)
            }
            InitSpec::Conformal { a, b } => ExplicitFamily::conformal(*params, a, b)?.materialize_root(basis)?,
            InitSpec::PowerLaw { a, b } => ExplicitFamily::power_law(*params, a, b)?.materialize_root(basis)?,
            InitSpec::Random { seed, modes } => {
                if modes == 0 {
                    return Err(Error::param("random: at least one mode is required"));
                }
                sampling::random_positive(basis, &mut sampling::rng(seed), modes)
            }
            InitSpec::Perturb { eps, mode } => {
                if mode >= basis.order() {
                    return Err(Error::param(format!("perturb: mode {mode} exceeds the basis order")));
                }
                if !(eps.abs() < 1.0) {
                    return Err(Error::param(format!("perturb: |eps| = {} must be below 1", eps.abs())));
                }
                let phi = GridFn::basis_function(basis, mode)?;
                let top = phi.eval(1.0).abs();
                GridFn::constant(basis, 1.0).add(&phi.scale(eps / top))?
            }
        };
        u.require_positive()?;
        Ok(u)
    }

    /// Initial state of `form` for the flow `spec`.
    pub fn state(&self, basis: &Arc<Basis>, form: FlowForm, spec: FlowSpec) -> Result<FlowState> {
        let params = Params::new(basis.d(), spec.p)?;
        let u = self.root(basis, &params)?;
        let f = match form {
            FlowForm::ULinear => u,
            FlowForm::RhoHeat | FlowForm::RhoFde => u.powf(spec.p)?,
            FlowForm::WNonlinear => {
                let beta = spec.beta_finite().ok_or_else(|| Error::param("W_Nonlinear needs a finite beta"))?;
                u.powf(1.0 / beta)?
            }
        };
        FlowState::new(form, spec, f)
    }
}
