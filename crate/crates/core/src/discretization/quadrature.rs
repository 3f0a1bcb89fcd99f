use nalgebra::DMatrix;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Smallest supported quadrature order.
pub const MIN_ORDER: usize = 4;

/// `nu(z) = 1 - z^2`.
#[inline]
pub fn nu(z: f64) -> f64 {
    (1.0 - z) * (1.0 + z)
}

/// `Z_d = sqrt(pi) Gamma(d/2) / Gamma((d+1)/2)`, the total mass of
/// `(1 - z^2)^(d/2 - 1) dz` on `(-1, 1)`.
pub fn normalization_constant(d: f64) -> f64 {
    (0.5 * std::f64::consts::PI.ln() + ln_gamma(0.5 * d) - ln_gamma(0.5 * (d + 1.0))).exp()
}

/// Square root of the monic three-term coefficient `beta_k` of the
/// polynomials orthogonal for `(1 - z^2)^(d/2 - 1)`.
pub fn recurrence_coefficient(d: f64, k: usize) -> f64 {
    debug_assert!(k >= 1);
    if k == 1 {
        return (1.0 / (d + 1.0)).sqrt();
    }
    let k = k as f64;
    (k * (k + d - 2.0) / ((2.0 * k + d - 1.0) * (2.0 * k + d - 3.0))).sqrt()
}

/// Values of the orthonormal polynomials `p_0, ..., p_{n-1}` and their first
/// two derivatives at `x`.
pub fn orthonormal_with_derivatives(
    d: f64,
    n: usize,
    x: f64,
    p: &mut [f64],
    p1: &mut [f64],
    p2: &mut [f64],
) {
    if n == 0 {
        return;
    }
    p[0] = 1.0;
    p1[0] = 0.0;
    p2[0] = 0.0;
    if n == 1 {
        return;
    }
    let b1 = recurrence_coefficient(d, 1);
    p[1] = x / b1;
    p1[1] = 1.0 / b1;
    p2[1] = 0.0;
    for k in 1..n - 1 {
        let bk = recurrence_coefficient(d, k);
        let bn = recurrence_coefficient(d, k + 1);
        p[k + 1] = (x * p[k] - bk * p[k - 1]) / bn;
        p1[k + 1] = (p[k] + x * p1[k] - bk * p1[k - 1]) / bn;
        p2[k + 1] = (2.0 * p1[k] + x * p2[k] - bk * p2[k - 1]) / bn;
    }
}

/// `(p_n(x), p_n'(x), sum_{k<n} p_k(x)^2)`.
fn top_polynomial(d: f64, n: usize, x: f64) -> (f64, f64, f64) {
    let mut prev = 0.0;
    let mut prev_d = 0.0;
    let mut cur = 1.0;
    let mut cur_d = 0.0;
    let mut sum = 0.0;
    for k in 0..n {
        sum += cur * cur;
        let bn = recurrence_coefficient(d, k + 1);
        let bk = if k == 0 { 0.0 } else { recurrence_coefficient(d, k) };
        let next = (x * cur - bk * prev) / bn;
        let next_d = (cur + x * cur_d - bk * prev_d) / bn;
        prev = cur;
        prev_d = cur_d;
        cur = next;
        cur_d = next_d;
    }
    (cur, cur_d, sum)
}

/// Gauss quadrature for the probability measure `d nu_d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quadrature {
    pub d: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&z, &w)| w * f(z)).sum()
    }

    pub fn same_as(&self, other: &Quadrature) -> bool {
        self.d == other.d && self.nodes.len() == other.nodes.len()
    }
}

/// Gauss nodes and weights for `d nu_d` with `n` points.
///
/// Nodes are the eigenvalues of the symmetric Jacobi matrix, polished by
/// Newton steps on the three-term recurrence. Weights are the reciprocal
/// Christoffel function, so they sum to one.
pub fn build_quadrature(d: f64, n: usize) -> Result<Quadrature> {
    if !d.is_finite() || d < 1.0 {
        return Err(Error::param(format!("dimension d = {d} must be a finite number >= 1")));
    }
    if n < MIN_ORDER {
        return Err(Error::param(format!("quadrature order {n} is below {MIN_ORDER}")));
    }
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = recurrence_coefficient(d, k);
        jacobi[(k, k - 1)] = b;
        jacobi[(k - 1, k)] = b;
    }
    let mut nodes: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        let mut last = f64::INFINITY;
        for _ in 0..20 {
            let (pn, dpn, _) = top_polynomial(d, n, *x);
            let step = pn / dpn;
            *x -= step;
            last = step.abs();
            if last <= 1e-16 {
                break;
            }
        }
        if last > 1e-12 || !x.is_finite() {
            return Err(Error::Convergence(format!(
                "Gauss node refinement for d = {d}, N = {n}"
            )));
        }
        let (_, _, sum) = top_polynomial(d, n, *x);
        weights.push(1.0 / sum);
    }
    // symmetric measure: enforce exact symmetry of the rule
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -x;
        nodes[j] = x;
        let w = 0.5 * (weights[i] + weights[j]);
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    let ok = nodes.windows(2).all(|w| w[0] < w[1])
        && nodes[0] > -1.0
        && nodes[n - 1] < 1.0
        && weights.iter().all(|&w| w > 0.0 && w.is_finite());
    if !ok {
        return Err(Error::Convergence(format!(
            "Gauss nodes for d = {d}, N = {n} are not strictly interior and increasing"
        )));
    }
    Ok(Quadrature { d, nodes, weights })
}
