mod common;

use common::rel;
use ultraflow::constants::{beta_roots, FlowSpec, Params};
use ultraflow::discretization::{Basis, GridFn};
use ultraflow::flows::{
    convert, evolve, heat_propagate, moment_decay_check, verify_exact_solution, ExactFdeSolution, FlowConfig,
    FlowForm, FlowState,
};
use ultraflow::init::InitSpec;
use ultraflow::sampling;
use ultraflow::Error;

#[test]
fn heat_propagation_damps_each_mode_by_its_eigenvalue() {
    let d = 3.5;
    let b = Basis::new(d, 32).unwrap();
    let rho = GridFn::from_coeffs(&b, (0..32).map(|k| if k < 6 { 1.0 / (k + 1) as f64 } else { 0.0 }).collect())
        .unwrap();
    let t = 0.2;
    let out = heat_propagate(&rho, t).unwrap();
    for k in 0..6 {
        let lam = (k as f64) * (k as f64 + d - 1.0);
        assert!((out.coeffs()[k] - rho.coeffs()[k] * (-lam * t).exp()).abs() < 1e-15);
    }
}

#[test]
fn density_and_w_forms_follow_the_same_density() {
    let d = 5.0;
    let p = 3.3;
    let params = Params::new(d, p).unwrap();
    let beta = beta_roots(&params).unwrap().beta_minus.finite().unwrap();
    let spec = FlowSpec::nonlinear(&params, beta).unwrap();
    let b = Basis::new(d, 64).unwrap();
    let init = InitSpec::Random { seed: 21, modes: 5 };
    let rho0 = init.state(&b, FlowForm::RhoFde, spec).unwrap();
    let w0 = init.state(&b, FlowForm::WNonlinear, spec).unwrap();
    let cfg = FlowConfig { samples: 4, ..Default::default() };
    let t = 0.2;
    let (rho, _) = evolve(&rho0, t, &cfg, &mut |_, _| {}).unwrap();
    let (w, _) = evolve(&w0, t * spec.m, &cfg, &mut |_, _| {}).unwrap();
    let back = convert(&w, FlowForm::RhoFde).unwrap();
    assert!((back.t - t).abs() < 1e-14);
    let diff = back.f.max_abs_diff(&rho.f).unwrap();
    assert!(diff < 1e-7 * rho.f.max_value(), "{diff}");
}

#[test]
fn heat_and_linear_forms_agree() {
    let d = 4.0;
    let params = Params::new(d, 3.0).unwrap();
    let b = Basis::new(d, 64).unwrap();
    let init = InitSpec::Perturb { eps: 0.3, mode: 2 };
    let spec = FlowSpec::heat(&params);
    let cfg = FlowConfig { samples: 5, ..Default::default() };
    let (rho, tr_rho) = evolve(&init.state(&b, FlowForm::RhoHeat, spec).unwrap(), 0.5, &cfg, &mut |_, _| {}).unwrap();
    let (u, tr_u) = evolve(&init.state(&b, FlowForm::ULinear, spec).unwrap(), 0.5, &cfg, &mut |_, _| {}).unwrap();
    let back = convert(&u, FlowForm::RhoHeat).unwrap();
    assert!(back.f.max_abs_diff(&rho.f).unwrap() < 1e-8);
    for (a, b) in tr_rho.samples.iter().zip(&tr_u.samples) {
        assert!((a.F - b.F).abs() < 1e-8);
    }
}

#[test]
fn conversion_round_trips() {
    let params = Params::new(5.0, 3.2).unwrap();
    let beta = beta_roots(&params).unwrap().beta_minus.finite().unwrap();
    let spec = FlowSpec::nonlinear(&params, beta).unwrap();
    let b = Basis::new(5.0, 48).unwrap();
    let s = InitSpec::Conformal { a: 1.0, b: 0.3 }.state(&b, FlowForm::RhoFde, spec).unwrap().at_time(0.4);
    let there = convert(&s, FlowForm::WNonlinear).unwrap();
    assert!((there.t - 0.4 * spec.m).abs() < 1e-15);
    let back = convert(&there, FlowForm::RhoFde).unwrap();
    assert!(back.f.max_abs_diff(&s.f).unwrap() < 1e-12 * s.f.max_value());
    assert!(convert(&s, FlowForm::ULinear).is_err());
}

#[test]
fn explicit_solution_follows_fast_diffusion_only() {
    for d in [3.0, 4.0, 6.0] {
        let r = verify_exact_solution(d, 1.0, 0.5, 1.0, 128).unwrap();
        assert!(r.max_fde_residual < 1e-8, "d={d}: {}", r.max_fde_residual);
        assert!(r.min_heat_residual > 1e-3);
        assert!(r.invariant_error < 1e-12);
    }
}

#[test]
fn explicit_solution_matches_the_evolved_density() {
    let d = 4.0;
    let sol = ExactFdeSolution::new(d, 1.0, 0.5).unwrap();
    let b = Basis::new(d, 96).unwrap();
    let params = Params::new(d, 2.0 * d / (d - 2.0)).unwrap();
    let beta = beta_roots(&params).unwrap().beta_minus.finite().unwrap();
    let spec = FlowSpec::nonlinear(&params, beta).unwrap();
    assert!(rel(spec.m, sol.m()) < 1e-14);
    let s = FlowState::new(FlowForm::RhoFde, spec, sol.density(&b, 0.0).unwrap()).unwrap();
    let (end, traj) = evolve(&s, 0.5, &FlowConfig { samples: 5, ..Default::default() }, &mut |_, _| {}).unwrap();
    let want = sol.density(&b, 0.5).unwrap();
    assert!(end.f.max_abs_diff(&want).unwrap() < 1e-7 * want.max_value());
    // optimal along the whole orbit
    assert!(traj.samples.iter().all(|x| x.F.abs() < 1e-9));
}

#[test]
fn first_moment_decays_at_rate_d() {
    let d = 4.0;
    let params = Params::new(d, 3.0).unwrap();
    let b = Basis::new(d, 64).unwrap();
    let u = sampling::random_positive(&b, &mut sampling::rng(31), 6);
    let s = FlowState::new(FlowForm::ULinear, FlowSpec::heat(&params), u).unwrap();
    let r = moment_decay_check(&s, 1.0, &FlowConfig::default()).unwrap();
    assert!(r.max_error < 1e-7);
    assert!((r.empirical_rate.unwrap() - d).abs() < 1e-5);
}

#[test]
fn rejects_bad_states() {
    let params = Params::new(5.0, 3.0).unwrap();
    let b = Basis::new(5.0, 32).unwrap();
    let neg = GridFn::from_fn(&b, |z| z);
    assert!(matches!(
        FlowState::new(FlowForm::RhoHeat, FlowSpec::heat(&params), neg),
        Err(Error::Positivity { .. })
    ));
    let s = FlowState::new(FlowForm::RhoHeat, FlowSpec::heat(&params), GridFn::constant(&b, 1.0)).unwrap();
    assert!(evolve(&s, 0.0, &FlowConfig::default(), &mut |_, _| {}).is_err());
    let spec = FlowSpec::nonlinear(&params, 1.2).unwrap();
    assert!(FlowState::new(FlowForm::ULinear, spec, GridFn::constant(&b, 1.0)).is_err());
}

#[test]
fn trajectory_csv_header() {
    let params = Params::new(5.0, 3.0).unwrap();
    let b = Basis::new(5.0, 32).unwrap();
    let s = InitSpec::Perturb { eps: 0.2, mode: 1 }.state(&b, FlowForm::RhoHeat, FlowSpec::heat(&params)).unwrap();
    let (_, traj) = evolve(&s, 0.1, &FlowConfig { samples: 3, ..Default::default() }, &mut |_, _| {}).unwrap();
    let mut out = Vec::new();
    traj.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,F,E_p,I_p,conserved,moment_z");
    assert_eq!(text.lines().count(), 5);
}
