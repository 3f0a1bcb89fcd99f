//! Reproducible random test functions.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::discretization::{Basis, GridFn};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random polynomial of degree `modes` that is positive on `[-1, 1]`.
///
/// `modes` is capped at [`Basis::resolved_degree`].
///
/// Coefficients of modes `1..=modes` are uniform in `(-1, 1)` and decay like
/// `1/k`; the constant mode is set so that the minimum over the oversampled
/// grid sits a random fraction of the range above zero.
pub fn random_positive<R: Rng>(basis: &Arc<Basis>, rng: &mut R, modes: usize) -> GridFn {
    let modes = modes.min(basis.resolved_degree());
    let mut c = vec![0.0; basis.order()];
    for (k, ck) in c.iter_mut().enumerate().take(modes + 1).skip(1) {
        *ck = rng.random_range(-1.0..1.0) / k as f64;
    }
    let fine = GridFn::from_coeffs(basis, c.clone()).expect("order checked");
    let pr = fine.profile().expect("band-limited");
    let lo = pr.f.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = pr.f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lift = rng.random_range(0.1..1.0) * (hi - lo).max(1e-3);
    c[0] = lift - lo;
    GridFn::from_coeffs(basis, c).expect("order checked")
}

/// Random even polynomial of degree at most `modes`, positive on `[-1, 1]`.
pub fn random_even_positive<R: Rng>(basis: &Arc<Basis>, rng: &mut R, modes: usize) -> GridFn {
    let f = random_positive(basis, rng, modes).even_part();
    let min = f.profile().expect("band-limited").min_value();
    if min > 0.0 {
        f
    } else {
        f.map(|v| v - min + 0.1)
    }
}

/// Random band-limited function without sign constraint, `modes` modes above
/// the constant.
pub fn random_band_limited<R: Rng>(basis: &Arc<Basis>, rng: &mut R, modes: usize) -> GridFn {
    let modes = modes.min(basis.resolved_degree());
    let mut c = vec![0.0; basis.order()];
    for ck in c.iter_mut().take(modes + 1) {
        *ck = rng.random_range(-1.0..1.0);
    }
    GridFn::from_coeffs(basis, c).expect("order checked")
}
