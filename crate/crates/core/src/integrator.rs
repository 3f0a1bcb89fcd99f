//! Singly diagonally implicit Runge–Kutta method of order 4 with an embedded
//! order-3 solution (L-stable, stiffly accurate, `gamma = 1/4`).
//!
//! Stage equations are solved by simplified Newton iteration with one LU
//! factorisation of `I - h gamma J` per step.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const STAGES: usize = 5;
pub const GAMMA: f64 = 0.25;

pub const C: [f64; STAGES] = [0.25, 0.75, 11.0 / 20.0, 0.5, 1.0];

pub const A: [[f64; STAGES]; STAGES] = [
    [0.25, 0.0, 0.0, 0.0, 0.0],
    [0.5, 0.25, 0.0, 0.0, 0.0],
    [17.0 / 50.0, -1.0 / 25.0, 0.25, 0.0, 0.0],
    [371.0 / 1360.0, -137.0 / 2720.0, 15.0 / 544.0, 0.25, 0.0],
    [25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0, 0.25],
];

pub const B: [f64; STAGES] = A[STAGES - 1];

pub const B_HAT: [f64; STAGES] = [59.0 / 48.0, -17.0 / 96.0, 225.0 / 32.0, -85.0 / 12.0, 0.0];

/// Right-hand side of an autonomous system `y' = F(y)`.
pub trait System {
    fn rhs(&self, y: &DVector<f64>) -> Result<DVector<f64>>;
    fn jacobian(&self, y: &DVector<f64>) -> Result<DMatrix<f64>>;
}

/// Tolerances of one step.
#[derive(Debug, Clone, Copy)]
pub struct StepTolerances {
    pub rtol: f64,
    pub atol: f64,
    pub newton_tol: f64,
    pub newton_iters: usize,
}

impl Default for StepTolerances {
    fn default() -> Self {
        StepTolerances { rtol: 1e-10, atol: 1e-12, newton_tol: 1e-3, newton_iters: 12 }
    }
}

/// Result of one attempted step.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub y: DVector<f64>,
    /// Scaled RMS norm of the embedded error estimate; `<= 1` means accept.
    pub error: f64,
}

fn scaled_norm(v: &DVector<f64>, y: &DVector<f64>, tol: &StepTolerances) -> f64 {
    let n = v.len() as f64;
    (v.iter()
        .zip(y.iter())
        .map(|(e, yi)| {
            let s = tol.atol + tol.rtol * yi.abs();
            (e / s).powi(2)
        })
        .sum::<f64>()
        / n)
        .sqrt()
}

/// Attempts one step of size `h` from `y`.
///
/// The new value is assembled as `y + h sum b_i K_i`, so linear invariants of
/// `F` are preserved regardless of the Newton residual.
pub fn step<S: System>(sys: &S, y: &DVector<f64>, h: f64, tol: &StepTolerances) -> Result<StepResult> {
    let n = y.len();
    let jac = sys.jacobian(y)?;
    let mut m = DMatrix::<f64>::identity(n, n);
    m -= jac * (h * GAMMA);
    let lu = m.lu();
    if !lu.is_invertible() {
        return Err(Error::Convergence("stage matrix is singular".into()));
    }
    let mut k: Vec<DVector<f64>> = Vec::with_capacity(STAGES);
    let mut z_prev = y.clone();
    for i in 0..STAGES {
        let mut known = y.clone();
        for (j, kj) in k.iter().enumerate() {
            known.axpy(h * A[i][j], kj, 1.0);
        }
        let mut z = if i == 0 { y.clone() } else { z_prev.clone() };
        let mut converged = false;
        let mut last = f64::INFINITY;
        for _ in 0..tol.newton_iters {
            let fz = sys.rhs(&z)?;
            let mut r = &z - &known;
            r.axpy(-h * GAMMA, &fz, 1.0);
            let dz = lu.solve(&r).ok_or_else(|| Error::Convergence("stage solve".into()))?;
            z -= &dz;
            let nrm = scaled_norm(&dz, &z, tol);
            if !nrm.is_finite() || nrm > 2.0 * last {
                break;
            }
            last = nrm;
            if nrm <= tol.newton_tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Convergence("stage Newton iteration".into()));
        }
        let fz = sys.rhs(&z)?;
        z_prev = z;
        k.push(fz);
    }
    let mut y_new = y.clone();
    let mut err = DVector::zeros(n);
    for i in 0..STAGES {
        y_new.axpy(h * B[i], &k[i], 1.0);
        err.axpy(h * (B[i] - B_HAT[i]), &k[i], 1.0);
    }
    // stiff filtering of the estimate
    let err = lu.solve(&err).unwrap_or(err);
    let scale = y_new.zip_map(y, |a, b| a.abs().max(b.abs()));
    let error = scaled_norm(&err, &scale, tol);
    Ok(StepResult { y: y_new, error })
}

/// Proposed next step size from an error estimate.
pub fn next_step(h: f64, error: f64) -> f64 {
    let fac = if error == 0.0 { 5.0 } else { (0.9 * error.powf(-0.25)).clamp(0.2, 5.0) };
    h * fac
}
