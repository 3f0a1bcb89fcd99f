//! Deficit along the heat flow below the threshold exponent, with the
//! analytic and finite-difference dissipation at the start.

use ultraflow::constants::{FlowSpec, Params};
use ultraflow::discretization::Basis;
use ultraflow::flows::{evolve, numeric_dfdt, FlowConfig, FlowForm};
use ultraflow::init::InitSpec;

fn main() -> ultraflow::Result<()> {
    let (d, p) = (5.0, 3.0);
    let params = Params::new(d, p)?;
    let b = Basis::new(d, 96)?;
    let state = InitSpec::Random { seed: 3, modes: 6 }.state(&b, FlowForm::RhoHeat, FlowSpec::heat(&params))?;
    let cfg = FlowConfig { samples: 10, ..Default::default() };
    let analytic = state.dissipation()?.expect("heat flow").dF_dt_analytic;
    println!("dF/dt at t = 0: analytic {analytic:.10e}, numeric {:.10e}", numeric_dfdt(&state, &cfg)?);
    let (_, traj) = evolve(&state, 0.5, &cfg, &mut |_, s| {
        println!("t = {:.3}  F = {:.12e}  int rho = {:.15}", s.t, s.F, s.conserved)
    })?;
    println!("monotone: {}, mass drift {:.1e}", traj.is_monotone(cfg.tol_mono), traj.max_drift());
    Ok(())
}
