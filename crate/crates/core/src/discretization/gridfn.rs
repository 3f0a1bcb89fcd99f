use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::basis::{chop, tail_fraction, Basis, RESOLUTION_LIMIT};
use super::quadrature::{nu, Quadrature};
use crate::error::{Error, Result};

/// Minimum nodal value accepted by operations that divide by a function.
pub const POSITIVITY_FLOOR: f64 = 1e-12;

/// A function on `(-1, 1)` held both as nodal values and as coefficients in
/// the orthonormal basis.
#[derive(Debug, Clone)]
pub struct GridFn {
    basis: Arc<Basis>,
    values: Vec<f64>,
    coeffs: Vec<f64>,
}

/// Exact-reload form of a [`GridFn`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridFnJson {
    pub d: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub coeffs: Vec<f64>,
}

impl GridFn {
    pub fn from_values(basis: &Arc<Basis>, values: Vec<f64>) -> Result<Self> {
        if values.len() != basis.order() {
            return Err(Error::param(format!(
                "{} values given for a basis of order {}",
                values.len(),
                basis.order()
            )));
        }
        let coeffs = basis.to_coeffs(&values);
        Ok(GridFn { basis: basis.clone(), values, coeffs })
    }

    pub fn from_coeffs(basis: &Arc<Basis>, mut coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() > basis.order() {
            return Err(Error::param(format!(
                "{} coefficients exceed the basis order {}",
                coeffs.len(),
                basis.order()
            )));
        }
        coeffs.resize(basis.order(), 0.0);
        let values = basis.to_values(&coeffs);
        Ok(GridFn { basis: basis.clone(), values, coeffs })
    }

    pub fn from_fn(basis: &Arc<Basis>, f: impl Fn(f64) -> f64) -> Self {
        let values: Vec<f64> = basis.nodes().iter().map(|&z| f(z)).collect();
        let coeffs = basis.to_coeffs(&values);
        GridFn { basis: basis.clone(), values, coeffs }
    }

    pub fn constant(basis: &Arc<Basis>, c: f64) -> Self {
        Self::from_fn(basis, |_| c)
    }

    /// The `k`-th orthonormal basis polynomial.
    pub fn basis_function(basis: &Arc<Basis>, k: usize) -> Result<Self> {
        let mut c = vec![0.0; basis.order()];
        *c.get_mut(k).ok_or_else(|| Error::param(format!("mode {k} exceeds the basis order")))? =
            1.0;
        Self::from_coeffs(basis, c)
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn quadrature(&self) -> &Quadrature {
        self.basis.quadrature()
    }

    pub fn d(&self) -> f64 {
        self.basis.d()
    }

    pub fn order(&self) -> usize {
        self.basis.order()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn nodes(&self) -> &[f64] {
        self.basis.nodes()
    }

    fn check_same(&self, other: &GridFn) -> Result<()> {
        if Arc::ptr_eq(&self.basis, &other.basis)
            || self.basis.quadrature().same_as(other.basis.quadrature())
        {
            Ok(())
        } else {
            Err(Error::MismatchedQuadrature)
        }
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn require_positive(&self) -> Result<()> {
        let min = self.min_value();
        if min > POSITIVITY_FLOOR {
            Ok(())
        } else {
            Err(Error::Positivity { min, floor: POSITIVITY_FLOOR })
        }
    }

    /// Relative weight of the top modes.
    pub fn tail(&self) -> f64 {
        tail_fraction(&self.coeffs)
    }

    pub fn require_resolved(&self) -> Result<()> {
        let tail = self.tail();
        if tail > RESOLUTION_LIMIT {
            Err(Error::Resolution { tail, limit: RESOLUTION_LIMIT })
        } else {
            Ok(())
        }
    }

    /// `L f`, diagonal in coefficient space.
    pub fn apply_l(&self) -> Result<GridFn> {
        self.require_resolved()?;
        let c: Vec<f64> =
            self.coeffs.iter().zip(self.basis.eigenvalues()).map(|(c, l)| -l * c).collect();
        GridFn::from_coeffs(&self.basis, c)
    }

    pub fn derivative(&self) -> Result<GridFn> {
        self.require_resolved()?;
        let (_, v, _) = self.basis.nodal_eval(&chop(&self.coeffs));
        GridFn::from_values(&self.basis, v)
    }

    pub fn second_derivative(&self) -> Result<GridFn> {
        self.require_resolved()?;
        let (_, _, v) = self.basis.nodal_eval(&chop(&self.coeffs));
        GridFn::from_values(&self.basis, v)
    }

    /// `<f, g>` in `L^2(d nu_d)`.
    pub fn inner(&self, other: &GridFn) -> Result<f64> {
        self.check_same(other)?;
        Ok(self.values.iter().zip(&other.values).zip(self.basis.weights()).map(|((a, b), w)| w * a * b).sum())
    }

    /// `int f nu^k d nu_d` for `k` in `{0, 1, 2}`.
    pub fn weighted_integral(&self, k: u32) -> Result<f64> {
        if k > 2 {
            return Err(Error::param(format!("power of nu must be 0, 1 or 2, got {k}")));
        }
        Ok(self
            .basis
            .quadrature()
            .nodes
            .iter()
            .zip(self.basis.weights())
            .zip(&self.values)
            .map(|((&z, &w), &f)| w * f * nu(z).powi(k as i32))
            .sum())
    }

    /// `int f d nu_d`.
    pub fn integral(&self) -> f64 {
        self.coeffs[0]
    }

    /// `int f^2 d nu_d`.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Pointwise map of the nodal values.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFn {
        let values: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        GridFn::from_values(&self.basis, values).expect("same basis")
    }

    /// Pointwise map receiving the node as well.
    pub fn map_with_node(&self, f: impl Fn(f64, f64) -> f64) -> GridFn {
        let values: Vec<f64> =
            self.values.iter().zip(self.basis.nodes()).map(|(&v, &z)| f(z, v)).collect();
        GridFn::from_values(&self.basis, values).expect("same basis")
    }

    /// `f^q` at the nodes.
    pub fn powf(&self, q: f64) -> Result<GridFn> {
        self.require_positive()?;
        Ok(self.map(|v| v.powf(q)))
    }

    pub fn scale(&self, s: f64) -> GridFn {
        let values = self.values.iter().map(|v| s * v).collect();
        let coeffs = self.coeffs.iter().map(|c| s * c).collect();
        GridFn { basis: self.basis.clone(), values, coeffs }
    }

    pub fn add(&self, other: &GridFn) -> Result<GridFn> {
        self.check_same(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(GridFn { basis: self.basis.clone(), values, coeffs })
    }

    pub fn sub(&self, other: &GridFn) -> Result<GridFn> {
        self.add(&other.scale(-1.0))
    }

    /// `z -> (f(z) + f(-z)) / 2`; the nodes are symmetric about zero.
    pub fn even_part(&self) -> GridFn {
        let n = self.values.len();
        let values = (0..n).map(|i| 0.5 * (self.values[i] + self.values[n - 1 - i])).collect();
        GridFn::from_values(&self.basis, values).expect("same basis")
    }

    /// Value at an arbitrary point of `[-1, 1]`.
    pub fn eval(&self, x: f64) -> f64 {
        self.basis.eval(&self.coeffs, x)
    }

    /// Nodal `l2` distance weighted by the quadrature.
    pub fn dist(&self, other: &GridFn) -> Result<f64> {
        Ok(self.sub(other)?.norm_sq().sqrt())
    }

    pub fn max_abs_diff(&self, other: &GridFn) -> Result<f64> {
        self.check_same(other)?;
        Ok(self.values.iter().zip(&other.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Values and derivatives on the oversampled grid.
    pub fn profile(&self) -> Result<Profile> {
        self.require_resolved()?;
        let (f, f1, f2) = self.basis.fine_eval(&chop(&self.coeffs));
        Ok(Profile { basis: self.basis.clone(), f, f1, f2 })
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["z", "value"])?;
        for (z, v) in self.nodes().iter().zip(&self.values) {
            w.write_record([format!("{z}"), format!("{v}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> GridFnJson {
        GridFnJson { d: self.d(), n: self.order(), coeffs: self.coeffs.clone() }
    }

    /// Rebuilds a function from its coefficients on a fresh basis.
    pub fn from_json(data: &GridFnJson) -> Result<Self> {
        let basis = Basis::new(data.d, data.n)?;
        GridFn::from_coeffs(&basis, data.coeffs.clone())
    }
}

/// Values `f, f', f''` of a function on the oversampled grid.
///
/// Integrals of nonlinear expressions are evaluated here, which keeps
/// aliasing of products below the truncation error.
#[derive(Debug, Clone)]
pub struct Profile {
    basis: Arc<Basis>,
    pub f: Vec<f64>,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
}

/// One sample of a [`Profile`].
#[derive(Debug, Clone, Copy)]
pub struct Sample {
    pub z: f64,
    pub nu: f64,
    pub f: f64,
    pub f1: f64,
    pub f2: f64,
}

impl Profile {
    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    pub fn sample(&self, i: usize) -> Sample {
        let q = self.basis.fine_quadrature();
        Sample { z: q.nodes[i], nu: self.basis.fine_nu()[i], f: self.f[i], f1: self.f1[i], f2: self.f2[i] }
    }

    /// `int g(sample) d nu_d` on the oversampled rule.
    pub fn integrate(&self, g: impl Fn(Sample) -> f64) -> f64 {
        let w = &self.basis.fine_quadrature().weights;
        (0..self.len()).map(|i| w[i] * g(self.sample(i))).sum()
    }

    pub fn min_value(&self) -> f64 {
        self.f.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn require_positive(&self) -> Result<()> {
        let min = self.min_value();
        if min > POSITIVITY_FLOOR {
            Ok(())
        } else {
            Err(Error::Positivity { min, floor: POSITIVITY_FLOOR })
        }
    }

    /// Profile of `f^q` by the chain rule.
    pub fn powf(&self, q: f64) -> Result<Profile> {
        self.require_positive()?;
        let n = self.len();
        let mut f = Vec::with_capacity(n);
        let mut f1 = Vec::with_capacity(n);
        let mut f2 = Vec::with_capacity(n);
        for i in 0..n {
            let (v, v1, v2) = (self.f[i], self.f1[i], self.f2[i]);
            let vq = v.powf(q);
            let r1 = v1 / v;
            f.push(vq);
            f1.push(q * vq * r1);
            f2.push(q * vq * (v2 / v + (q - 1.0) * r1 * r1));
        }
        Ok(Profile { basis: self.basis.clone(), f, f1, f2 })
    }
}
