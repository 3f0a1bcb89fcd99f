mod common;

use common::{nu_integral, rel};
use proptest::prelude::*;
use ultraflow::constants::{beta_roots, gamma_one, FlowSpec, Params};
use ultraflow::discretization::{Basis, GridFn};
use ultraflow::flows::{numeric_dfdt, FlowConfig, FlowForm, FlowState};
use ultraflow::functionals::{
    cdc_triple, dissipation_heat, dissipation_nonlinear, functionals_of_root, lemma_identities,
};
use ultraflow::sampling;

fn sample_root(d: f64) -> (impl Fn(f64) -> f64, impl Fn(f64) -> f64, impl Fn(f64) -> f64) {
    let c = 1.0 / (d + 1.0);
    (
        move |z: f64| 1.0 + 0.3 * z + 0.2 * (z * z - c),
        move |z: f64| 0.3 + 0.4 * z,
        move |_z: f64| 0.4,
    )
}

#[test]
fn functionals_match_direct_integration() {
    for (d, p) in [(3.0, 3.5), (5.0, 3.0), (2.5, 1.5), (4.0, 4.0)] {
        let (u, u1, _) = sample_root(d);
        let b = Basis::new(d, 64).unwrap();
        let f = functionals_of_root(&GridFn::from_fn(&b, &u), p).unwrap();
        let mass = nu_integral(d, |z| u(z).powf(p));
        let l2 = nu_integral(d, |z| u(z) * u(z));
        let fisher = nu_integral(d, |z| u1(z) * u1(z) * (1.0 - z * z));
        let entropy = (mass.powf(2.0 / p) - l2) / (p - 2.0);
        assert!(rel(f.mass, mass) < 1e-11, "mass d={d}");
        assert!(rel(f.l2, l2) < 1e-11);
        assert!(rel(f.fisher, fisher) < 1e-10);
        assert!(rel(f.entropy, entropy) < 1e-9, "{} {entropy}", f.entropy);
        assert!(rel(f.deficit, fisher / d - entropy) < 1e-8);
    }
}

#[test]
fn log_entropy_is_the_limit_of_the_power_entropy() {
    let d = 4.0;
    let (u, _, _) = sample_root(d);
    let b = Basis::new(d, 64).unwrap();
    let g = GridFn::from_fn(&b, &u);
    let at_two = functionals_of_root(&g, 2.0).unwrap().entropy;
    let h = 1e-4;
    let e = |p: f64| {
        let m = nu_integral(d, |z| u(z).powf(p));
        (m.powf(2.0 / p) - nu_integral(d, |z| u(z) * u(z))) / (p - 2.0)
    };
    let limit = 0.5 * (e(2.0 + h) + e(2.0 - h));
    assert!(rel(at_two, limit) < 1e-6, "{at_two} {limit}");
}

#[test]
fn cdc_triple_matches_direct_integration() {
    let d = 5.0;
    let (u, u1, u2) = sample_root(d);
    let b = Basis::new(d, 64).unwrap();
    let t = cdc_triple(&GridFn::from_fn(&b, &u)).unwrap();
    let nu2 = |z: f64| (1.0 - z * z) * (1.0 - z * z);
    let j_ff = nu_integral(d, |z| u2(z) * u2(z) * nu2(z));
    let j_fc = nu_integral(d, |z| u2(z) * u1(z) * u1(z) / u(z) * nu2(z));
    let j_cc = nu_integral(d, |z| (u1(z) * u1(z) / u(z)).powi(2) * nu2(z));
    assert!(rel(t.j_ff, j_ff) < 1e-10);
    assert!(rel(t.j_fc, j_fc) < 1e-10);
    assert!(rel(t.j_cc, j_cc) < 1e-10);
}

#[test]
fn heat_dissipation_agrees_with_finite_differences() {
    let d = 5.0;
    let b = Basis::new(d, 96).unwrap();
    let mut rng = sampling::rng(11);
    for p in [1.5, 3.0, 3.3] {
        let params = Params::new(d, p).unwrap();
        let u = sampling::random_positive(&b, &mut rng, 6);
        let rep = dissipation_heat(&u, p).unwrap();
        assert!(rep.identity_residual < 1e-12);
        let s = FlowState::new(FlowForm::RhoHeat, FlowSpec::heat(&params), u.powf(p).unwrap()).unwrap();
        let num = numeric_dfdt(&s, &FlowConfig::default()).unwrap();
        assert!(rel(num, rep.dF_dt_analytic) < 1e-6, "p={p}: {num} vs {}", rep.dF_dt_analytic);
    }
}

#[test]
fn nonlinear_dissipation_agrees_with_finite_differences() {
    let d = 5.0;
    let p = 3.3;
    let params = Params::new(d, p).unwrap();
    let beta = beta_roots(&params).unwrap().beta_minus.finite().unwrap();
    let spec = FlowSpec::nonlinear(&params, beta).unwrap();
    let b = Basis::new(d, 64).unwrap();
    let w = sampling::random_positive(&b, &mut sampling::rng(12), 5);
    let rep = dissipation_nonlinear(&w, p, beta).unwrap();
    assert!(rep.gamma.abs() < 1e-12);
    let s = FlowState::new(FlowForm::WNonlinear, spec, w).unwrap();
    let num = numeric_dfdt(&s, &FlowConfig::default()).unwrap();
    assert!(rel(num, rep.dF_ds_analytic) < 1e-6, "{num} vs {}", rep.dF_ds_analytic);
    assert!(rel(rep.dF_dt_analytic, spec.m * rep.dF_ds_analytic) < 1e-15);
}

#[test]
fn gamma_one_vanishes_at_the_heat_threshold() {
    for d in [3.0, 5.0, 8.0] {
        let sharp = (2.0 * d * d + 1.0) / ((d - 1.0) * (d - 1.0));
        assert!(gamma_one(&Params::new(d, sharp).unwrap()).abs() < 1e-12);
        assert!(gamma_one(&Params::new(d, sharp - 0.1).unwrap()) > 0.0);
        let star = 2.0 * d / (d - 2.0);
        assert!(gamma_one(&Params::new(d, 0.5 * (sharp + star)).unwrap()) < 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lemma_identities_hold(seed in any::<u64>(), modes in 1usize..14, d in 1.5f64..9.0) {
        let b = Basis::new(d, 64).unwrap();
        let f = sampling::random_positive(&b, &mut sampling::rng(seed), modes);
        let l = lemma_identities(&f).unwrap();
        prop_assert!(l.first_residual < 1e-11);
        prop_assert!(l.second_residual < 1e-11);
    }

    #[test]
    fn expanded_square_is_nonnegative(seed in any::<u64>(), modes in 1usize..10, s in -3.0f64..3.0) {
        let b = Basis::new(4.0, 64).unwrap();
        let u = sampling::random_positive(&b, &mut sampling::rng(seed), modes);
        let t = cdc_triple(&u).unwrap();
        let expanded = t.j_ff - 2.0 * s * t.j_fc + s * s * t.j_cc;
        prop_assert!(expanded >= -1e-12 * (t.j_ff + 2.0 * (s * t.j_fc).abs() + s * s * t.j_cc));
        prop_assert!(t.j_fc * t.j_fc <= t.j_ff * t.j_cc * (1.0 + 1e-12));
    }

    #[test]
    fn heat_flow_dissipates_below_threshold(seed in any::<u64>(), modes in 1usize..10, p in 1.01f64..3.1875) {
        let b = Basis::new(5.0, 64).unwrap();
        let u = sampling::random_positive(&b, &mut sampling::rng(seed), modes);
        let rep = dissipation_heat(&u, p).unwrap();
        prop_assert!(rep.dF_dt_analytic <= 1e-12 * rep.J_ff);
    }
}
