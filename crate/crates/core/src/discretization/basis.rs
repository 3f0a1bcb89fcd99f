use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::quadrature::{build_quadrature, nu, orthonormal_with_derivatives, Quadrature};
use crate::error::{Error, Result};

/// Default number of quadrature nodes.
pub const DEFAULT_ORDER: usize = 128;

/// Default oversampling factor of the grid used for nonlinear integrands.
pub const DEFAULT_PADDING: usize = 2;

/// Relative energy allowed in the top modes before a function counts as
/// under-resolved.
pub const RESOLUTION_LIMIT: f64 = 1e-8;

/// Trailing coefficients below this multiple of `eps * max|c|` are dropped
/// before differentiation.
pub const CHOP_FACTOR: f64 = 16.0;

/// Spectral basis of polynomials orthonormal for `d nu_d`, with transform
/// matrices and the nodal operators built from them.
///
/// Immutable after construction; share it through `Arc`.
#[derive(Debug)]
pub struct Basis {
    quad: Quadrature,
    fine: Quadrature,
    padding: usize,
    /// `synth[(i, k)] = p_k(x_i)`.
    synth: DMatrix<f64>,
    synth1: DMatrix<f64>,
    synth2: DMatrix<f64>,
    /// `coeffs = analysis * values`.
    analysis: DMatrix<f64>,
    fine_p: DMatrix<f64>,
    fine_p1: DMatrix<f64>,
    fine_p2: DMatrix<f64>,
    d1: DMatrix<f64>,
    d2: DMatrix<f64>,
    lap: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    fine_nu: Vec<f64>,
}

fn eval_matrices(d: f64, n: usize, xs: &[f64]) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let m = xs.len();
    let mut p = DMatrix::zeros(m, n);
    let mut p1 = DMatrix::zeros(m, n);
    let mut p2 = DMatrix::zeros(m, n);
    let (mut a, mut b, mut c) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for (i, &x) in xs.iter().enumerate() {
        orthonormal_with_derivatives(d, n, x, &mut a, &mut b, &mut c);
        for k in 0..n {
            p[(i, k)] = a[k];
            p1[(i, k)] = b[k];
            p2[(i, k)] = c[k];
        }
    }
    (p, p1, p2)
}

impl Basis {
    pub fn new(d: f64, n: usize) -> Result<Arc<Basis>> {
        Self::with_padding(d, n, DEFAULT_PADDING)
    }

    pub fn with_padding(d: f64, n: usize, padding: usize) -> Result<Arc<Basis>> {
        if padding == 0 {
            return Err(Error::param("padding factor must be at least 1"));
        }
        let quad = build_quadrature(d, n)?;
        let fine = if padding == 1 { quad.clone() } else { build_quadrature(d, padding * n)? };
        let (synth, synth1, synth2) = eval_matrices(d, n, &quad.nodes);
        let mut analysis = synth.transpose();
        for (i, &w) in quad.weights.iter().enumerate() {
            analysis.column_mut(i).scale_mut(w);
        }
        let (fine_p, fine_p1, fine_p2) = eval_matrices(d, n, &fine.nodes);
        let eigenvalues: Vec<f64> = (0..n).map(|k| k as f64 * (k as f64 + d - 1.0)).collect();
        let d1 = &synth1 * &analysis;
        let d2 = &synth2 * &analysis;
        let mut scaled = synth.clone();
        for (k, lam) in eigenvalues.iter().enumerate() {
            scaled.column_mut(k).scale_mut(-lam);
        }
        let lap = scaled * &analysis;
        let fine_nu = fine.nodes.iter().map(|&z| nu(z)).collect();
        Ok(Arc::new(Basis {
            quad,
            fine,
            padding,
            synth,
            synth1,
            synth2,
            analysis,
            fine_p,
            fine_p1,
            fine_p2,
            d1,
            d2,
            lap,
            eigenvalues,
            fine_nu,
        }))
    }

    pub fn d(&self) -> f64 {
        self.quad.d
    }

    pub fn order(&self) -> usize {
        self.quad.order()
    }

    /// Highest polynomial degree that passes the resolution check exactly.
    pub fn resolved_degree(&self) -> usize {
        let n = self.order();
        n - tail_width(n) - 1
    }

    pub fn padding(&self) -> usize {
        self.padding
    }

    pub fn quadrature(&self) -> &Quadrature {
        &self.quad
    }

    /// Oversampled quadrature used for nonlinear integrands.
    pub fn fine_quadrature(&self) -> &Quadrature {
        &self.fine
    }

    pub fn nodes(&self) -> &[f64] {
        &self.quad.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.quad.weights
    }

    /// Eigenvalues `k(k+d-1)` of `-L`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Nodal first-derivative matrix.
    pub fn d1(&self) -> &DMatrix<f64> {
        &self.d1
    }

    /// Nodal second-derivative matrix.
    pub fn d2(&self) -> &DMatrix<f64> {
        &self.d2
    }

    /// Nodal matrix of the ultraspherical operator `L`.
    pub fn lap(&self) -> &DMatrix<f64> {
        &self.lap
    }

    pub fn to_coeffs(&self, values: &[f64]) -> Vec<f64> {
        (&self.analysis * DVector::from_column_slice(values)).as_slice().to_vec()
    }

    pub fn to_values(&self, coeffs: &[f64]) -> Vec<f64> {
        (&self.synth * DVector::from_column_slice(coeffs)).as_slice().to_vec()
    }

    /// Values, first and second derivatives at the nodes.
    pub(crate) fn nodal_eval(&self, coeffs: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let c = DVector::from_column_slice(coeffs);
        (
            (&self.synth * &c).as_slice().to_vec(),
            (&self.synth1 * &c).as_slice().to_vec(),
            (&self.synth2 * &c).as_slice().to_vec(),
        )
    }

    /// Values, first and second derivatives on the fine grid.
    pub(crate) fn fine_eval(&self, coeffs: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let c = DVector::from_column_slice(coeffs);
        (
            (&self.fine_p * &c).as_slice().to_vec(),
            (&self.fine_p1 * &c).as_slice().to_vec(),
            (&self.fine_p2 * &c).as_slice().to_vec(),
        )
    }

    /// `sum_j g_j p_k(x_j)` over the fine nodes, for every `k`.
    pub(crate) fn fine_transpose(&self, g: &[f64]) -> Vec<f64> {
        self.fine_p.tr_mul(&DVector::from_column_slice(g)).as_slice().to_vec()
    }

    /// Evaluates the expansion at an arbitrary point.
    pub fn eval(&self, coeffs: &[f64], x: f64) -> f64 {
        let n = coeffs.len();
        let (mut p, mut p1, mut p2) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        orthonormal_with_derivatives(self.d(), n, x, &mut p, &mut p1, &mut p2);
        p.iter().zip(coeffs).map(|(a, b)| a * b).sum()
    }

    /// `nu` on the fine grid.
    pub fn fine_nu(&self) -> &[f64] {
        &self.fine_nu
    }
}

/// Zeroes the trailing coefficients that sit at rounding level.
///
/// Keeps derivatives free of amplified noise from modes that carry no
/// information.
pub(crate) fn chop(coeffs: &[f64]) -> Vec<f64> {
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let tol = CHOP_FACTOR * f64::EPSILON * scale;
    let last = coeffs.iter().rposition(|c| c.abs() > tol).map_or(0, |i| i + 1);
    let mut out = coeffs.to_vec();
    for c in out.iter_mut().skip(last) {
        *c = 0.0;
    }
    out
}

/// Number of top modes inspected by the resolution check.
fn tail_width(n: usize) -> usize {
    (n / 8).max(2).min(n)
}

/// Relative `l2` weight of the top `tail_width` modes.
pub(crate) fn tail_fraction(coeffs: &[f64]) -> f64 {
    let n = coeffs.len();
    let top = tail_width(n);
    let total: f64 = coeffs.iter().map(|c| c * c).sum();
    if total == 0.0 {
        return 0.0;
    }
    let tail: f64 = coeffs[n - top..].iter().map(|c| c * c).sum();
    (tail / total).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transforms_are_inverse() {
        let b = Basis::new(3.5, 24).unwrap();
        let c: Vec<f64> = (0..24).map(|k| 1.0 / (1.0 + k as f64).powi(2)).collect();
        let v = b.to_values(&c);
        let back = b.to_coeffs(&v);
        for (x, y) in c.iter().zip(&back) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn nodal_laplacian_on_quadratic() {
        let d = 4.0;
        let b = Basis::new(d, 16).unwrap();
        let v: Vec<f64> = b.nodes().iter().map(|z| z * z).collect();
        let lv = b.lap() * DVector::from_vec(v);
        for (i, &z) in b.nodes().iter().enumerate() {
            let exact = 2.0 - 2.0 * (d + 1.0) * z * z;
            assert!((lv[i] - exact).abs() < 1e-11);
        }
    }

    #[test]
    fn chop_removes_rounding_tail() {
        let c = vec![1.0, 0.5, 1e-17, -2e-16, 1e-18];
        assert_eq!(chop(&c), vec![1.0, 0.5, 0.0, 0.0, 0.0]);
        let c = vec![1.0, 1e-17, 0.25];
        assert_eq!(chop(&c), vec![1.0, 1e-17, 0.25]);
    }

    #[test]
    fn tail_fraction_of_low_degree_is_zero() {
        let mut c = vec![0.0; 64];
        c[0] = 1.0;
        c[3] = 0.2;
        assert_eq!(tail_fraction(&c), 0.0);
        c[63] = 1e-3;
        assert!(tail_fraction(&c) > 1e-4);
    }
}
