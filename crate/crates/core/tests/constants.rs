mod common;

use common::bisect;
use proptest::prelude::*;
use ultraflow::constants::{
    beta_roots, classify_region, counterexample_coefficient, counterexample_coefficient_unreduced,
    counterexample_roots, critical_exponents, gamma_of_beta, region_sweep, ExtReal, Params, SweepGrid,
};
use ultraflow::experiments::beta_curves;

fn params(d: f64, p: f64) -> Params {
    Params::new(d, p).unwrap()
}

fn exponents(d: f64) -> (f64, f64) {
    let (s, h) = critical_exponents(&params(d, 2.0));
    (s.finite().unwrap(), h.finite().unwrap())
}

#[test]
fn beta_roots_match_bisection() {
    for d in [4.0, 5.0, 7.0, 10.0] {
        let (star, _) = exponents(d);
        for p in [1.3, 2.0, 0.5 * (2.0 + star)] {
            let pr = params(d, p);
            let r = beta_roots(&pr).unwrap();
            let (Some(lo), Some(hi)) = (r.beta_minus.finite(), r.beta_plus.finite()) else {
                assert!(d == 4.0, "only d = 4 has a root at infinity in this range");
                continue;
            };
            if hi < lo {
                continue;
            }
            let mid = 0.5 * (lo + hi);
            assert!(gamma_of_beta(&pr, mid) > 0.0);
            let g = |b: f64| gamma_of_beta(&pr, b);
            assert!((bisect(g, 0.0, mid) - lo).abs() < 1e-12, "d={d} p={p}");
            assert!((bisect(g, mid, hi + 10.0) - hi).abs() < 1e-11);
        }
    }
}

#[test]
fn counterexample_roots_match_bisection() {
    for d in [4.0, 5.0, 8.0] {
        let (star, sharp) = exponents(d);
        let p = 0.5 * (sharp + star);
        let pr = params(d, p);
        let (bm, bp) = counterexample_roots(&pr).unwrap();
        let (lo, hi) = (bm.min(bp), bm.max(bp));
        let a = |b: f64| counterexample_coefficient(&pr, b);
        assert!((bisect(a, 0.1, 0.5 * (lo + hi)) - lo).abs() < 1e-12);
        assert!((bisect(a, 0.5 * (lo + hi), hi + 5.0) - hi).abs() < 1e-11);
        // the minus root of beta sits between the roots of A
        let beta = beta_roots(&pr).unwrap().beta_minus.finite().unwrap();
        assert!(lo < beta && beta < hi && a(beta) > 0.0);
    }
}

#[test]
fn beta_minus_crosses_one_at_the_heat_threshold() {
    let curves = beta_curves(&(3..=10).map(f64::from).collect::<Vec<_>>(), 41).unwrap();
    for d in 3..=10 {
        let d = f64::from(d);
        let (star, sharp) = exponents(d);
        let at = beta_roots(&params(d, sharp)).unwrap().beta_minus.finite().unwrap();
        assert!((at - 1.0).abs() < 1e-12, "d={d}: {at}");
        for r in curves.iter().filter(|r| r.d == d && r.p > 1.0 && r.p < star) {
            let b = r.beta_minus.finite().unwrap();
            if r.p < sharp - 1e-9 {
                assert!(b < 1.0, "d={d} p={}", r.p);
            } else if r.p > sharp + 1e-9 {
                assert!(b > 1.0, "d={d} p={}", r.p);
            }
        }
    }
}

#[test]
fn infinite_sentinels() {
    let (s, h) = critical_exponents(&params(2.0, 7.0));
    assert_eq!(s, ExtReal::PosInf);
    assert_eq!(h, ExtReal::Finite(9.0));
    let (s, h) = critical_exponents(&params(1.0, 7.0));
    assert_eq!((s, h), (ExtReal::PosInf, ExtReal::PosInf));
    assert!(beta_roots(&params(3.0, 6.0)).unwrap().beta_minus.is_infinite());
}

#[test]
fn positive_a_meets_the_admissible_band_above_threshold() {
    let (star, sharp) = exponents(5.0);
    let grid = SweepGrid { d: 5.0, p_min: sharp, p_max: star, beta_min: 0.5, beta_max: 3.0, n_p: 41, n_beta: 401 };
    let sweep = region_sweep(grid).unwrap();
    for line in sweep.rows.chunks(grid.n_beta) {
        let p = line[0].p;
        if p <= sharp + 1e-9 || p >= star - 1e-9 {
            continue;
        }
        assert!(line.iter().any(|r| r.admissible && r.a_positive), "p = {p}");
    }
}

#[test]
fn region_csv_has_the_documented_header() {
    let grid = SweepGrid { d: 5.0, p_min: 1.0, p_max: 3.0, beta_min: 0.0, beta_max: 2.0, n_p: 3, n_beta: 3 };
    let mut out = Vec::new();
    region_sweep(grid).unwrap().write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().next().unwrap(), "p,beta,m,gamma,admissible,A,A_positive");
    assert_eq!(text.lines().count(), 10);
}

proptest! {
    #[test]
    fn reduced_and_unreduced_a_agree(d in 3.0f64..12.0, t in 0.0f64..1.0, beta in 0.2f64..4.0) {
        let (star, _) = exponents(d);
        let pr = params(d, 1.0 + t * (star - 1.0));
        let a = counterexample_coefficient(&pr, beta);
        let b = counterexample_coefficient_unreduced(&pr, beta);
        prop_assert!((a - b).abs() <= 1e-11 * (1.0 + beta * beta));
    }

    #[test]
    fn admissible_points_have_nonnegative_gamma(d in 4.0f64..12.0, t in 0.0f64..0.999, beta in 0.0f64..6.0) {
        let (star, _) = exponents(d);
        let pr = params(d, 1.0 + t * (star - 1.0));
        let r = classify_region(&pr, beta).unwrap();
        prop_assert_eq!(r.admissible, r.gamma >= -1e-12 * (1.0 + beta * beta));
    }
}
