//! The `w` flow with `beta = beta_-` above the heat threshold, and the
//! limiting `m = 2/3` flow at `d = 3`, `p = 6`.

use ultraflow::constants::{beta_roots, FlowSpec, Params};
use ultraflow::discretization::Basis;
use ultraflow::flows::{evolve, FlowConfig, FlowForm};
use ultraflow::init::InitSpec;

fn main() -> ultraflow::Result<()> {
    let cfg = FlowConfig { samples: 8, ..Default::default() };
    let params = Params::new(5.0, 3.3)?;
    let beta = beta_roots(&params)?.beta_minus.finite().unwrap();
    let spec = FlowSpec::nonlinear(&params, beta)?;
    println!("d = 5, p = 3.3: beta_- = {beta:.10}, m = {:.10}", spec.m);
    let b = Basis::new(5.0, 64)?;
    let state = InitSpec::Random { seed: 9, modes: 6 }.state(&b, FlowForm::WNonlinear, spec)?;
    let (_, traj) = evolve(&state, 1.0, &cfg, &mut |_, s| println!("s = {:.3}  F = {:.12e}", s.t, s.F))?;
    println!("monotone {}, drift of int w^(beta p) {:.1e}\n", traj.is_monotone(cfg.tol_mono), traj.max_drift());

    let params = Params::new(3.0, 6.0)?;
    let spec = FlowSpec::infinite_beta(&params)?;
    let b = Basis::new(3.0, 64)?;
    let state = InitSpec::Perturb { eps: 0.3, mode: 2 }.state(&b, FlowForm::RhoFde, spec)?;
    let (_, traj) = evolve(&state, 1.0, &cfg, &mut |_, _| {})?;
    println!("d = 3, p = 6, m = {:.6}: F {:.6e} -> {:.6e}", spec.m, traj.samples[0].F, traj.last().F);
    Ok(())
}
