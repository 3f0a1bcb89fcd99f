mod common;

use common::{nu_integral, rel};
use proptest::prelude::*;
use ultraflow::constants::{beta_roots, counterexample_coefficient, Params};
use ultraflow::counterexamples::{first_obstruction, second_obstruction, sign_certificate, write_sign_certificate};
use ultraflow::Error;

fn exponents(d: f64) -> (f64, f64) {
    (2.0 * d / (d - 2.0), (2.0 * d * d + 1.0) / ((d - 1.0) * (d - 1.0)))
}

/// `A` from `-A = (alpha + beta - 1)^2 - 2 c (p-1)(alpha + beta - 1) beta + d/(d+2) (p-1) beta^2`.
fn a_from_alpha(d: f64, p: f64, beta: f64) -> f64 {
    let c = (d - 1.0) / (d + 2.0);
    let alpha = c * beta * (p - 1.0);
    let s = alpha + beta - 1.0;
    -(s * s - 2.0 * c * (p - 1.0) * s * beta + d / (d + 2.0) * (p - 1.0) * beta * beta)
}

#[test]
fn witness_matches_direct_integration() {
    let (d, p, a, b) = (5.0, 3.25, 1.0, 0.4);
    let r = second_obstruction(d, p, a, b, 128).unwrap();
    let e = r.beta / (1.0 - r.alpha);
    let u = |z: f64| (a + b * z).powf(e);
    let u1 = |z: f64| e * b * (a + b * z).powf(e - 1.0);
    let j_cc = nu_integral(d, |z| (u1(z) * u1(z) / u(z)).powi(2) * (1.0 - z * z).powi(2));
    assert!(rel(r.J_cc, j_cc) < 1e-10, "{} {j_cc}", r.J_cc);
    let a_coef = a_from_alpha(d, p, r.beta);
    assert!(rel(r.A_closed_form, a_coef) < 1e-12);
    assert!(rel(r.rhs, 2.0 * a_coef * j_cc / (d * r.beta * r.beta)) < 1e-10);
    assert!(r.w_ode_residual < 1e-9);
    assert!(r.u_from_w_residuals.iter().all(|&x| x < 1e-8));
}

#[test]
fn witness_raises_f_across_the_gap() {
    for d in [4.0, 5.0, 6.0, 8.0] {
        let (star, sharp) = exponents(d);
        for t in [0.2, 0.5, 0.8] {
            let p = sharp + t * (star - sharp);
            let r = second_obstruction(d, p, 1.0, 0.3, 128).unwrap();
            assert!(r.positive, "d={d} p={p}");
            assert!(r.analytic_rel_error < 1e-8);
            assert!(r.numeric_rel_error < 1e-4, "d={d} p={p}: {}", r.numeric_rel_error);
        }
    }
}

#[test]
fn conformal_datum_stalls_both_flows() {
    for d in [3.0, 4.0, 6.0] {
        let r = first_obstruction(d, 1.0, 0.4, 128).unwrap();
        assert!(r.deficit.abs() < 1e-12, "d={d}");
        assert!(r.fde_dissipation.abs() < 1e-10);
        assert!(r.heat_dissipation.abs() < 1e-10);
        assert!(r.fde_mismatch < 1e-8);
        assert!(r.heat_mismatch > 1e-3);
        assert!(r.heat_max_deficit > 1e-8);
        assert_eq!(r.w_ode_residual.is_some(), d > 3.0);
    }
}

#[test]
fn obstructions_reject_other_exponents() {
    assert!(matches!(second_obstruction(5.0, 3.0, 1.0, 0.4, 64), Err(Error::Range { .. })));
    assert!(matches!(second_obstruction(5.0, 10.0 / 3.0, 1.0, 0.4, 64), Err(Error::Range { .. })));
    assert!(matches!(first_obstruction(2.0, 1.0, 0.4, 64), Err(Error::Range { .. })));
    assert!(second_obstruction(5.0, 3.25, 1.0, 1.5, 64).is_err());
}

#[test]
fn sign_certificate_csv() {
    let rows = sign_certificate(&[3.0, 4.0, 5.0, 8.0], 100).unwrap();
    assert_eq!(rows.len(), 400);
    assert!(rows.iter().all(|r| r.a_coef > 0.0));
    let mut out = Vec::new();
    write_sign_certificate(&rows, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().next().unwrap(), "d,p,beta_minus,A");
    assert_eq!(text.lines().count(), 401);
}

proptest! {
    #[test]
    fn a_is_positive_at_beta_minus(d in 3.0f64..20.0, t in 0.001f64..0.999) {
        let (star, sharp) = exponents(d);
        let p = sharp + t * (star - sharp);
        let params = Params::new(d, p).unwrap();
        let Some(beta) = beta_roots(&params).unwrap().beta_minus.finite() else {
            return Ok(());
        };
        let a = counterexample_coefficient(&params, beta);
        prop_assert!(a > 0.0);
        prop_assert!((a - a_from_alpha(d, p, beta)).abs() < 1e-11 * (1.0 + beta * beta));
    }
}
