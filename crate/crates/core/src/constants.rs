//! Closed-form exponents, roots and coefficients.
//!
//! Everything here is a pure function of the dimension `d` (any real `d >= 1`)
//! and the exponent `p`. Values that are formally infinite are carried as
//! [`ExtReal`] variants rather than large floats.

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Relative tolerance used when deciding ties at interval end points.
pub const TIE_TOL: f64 = 1e-12;

/// Below this magnitude the quadratic coefficient of `gamma(beta)` is treated
/// as zero and the root equation as linear.
pub const DEGENERATE_TOL: f64 = 1e-13;

/// Relative offset used to resolve admissibility at exponents where the
/// quadratic degenerates: the range is taken as the limit from below.
pub const DEGENERATE_OFFSET: f64 = 1e-9;

/// A real number extended with signed infinities.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
    NegInf,
}

impl ExtReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        !matches!(self, ExtReal::Finite(_))
    }

    /// Comparison `x <= self` with the infinite variants acting as bounds.
    fn ge_value(self, x: f64) -> bool {
        match self {
            ExtReal::Finite(y) => x <= y + TIE_TOL * y.abs().max(1.0),
            ExtReal::PosInf => true,
            ExtReal::NegInf => false,
        }
    }

    /// Comparison `x >= self`.
    fn le_value(self, x: f64) -> bool {
        match self {
            ExtReal::Finite(y) => x >= y - TIE_TOL * y.abs().max(1.0),
            ExtReal::PosInf => false,
            ExtReal::NegInf => true,
        }
    }

    /// Text form used in CSV output.
    pub fn to_field(self) -> String {
        match self {
            ExtReal::Finite(x) => format!("{x}"),
            ExtReal::PosInf => "inf".to_string(),
            ExtReal::NegInf => "-inf".to_string(),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => s.serialize_f64(*x),
            ExtReal::PosInf => s.serialize_str("+inf"),
            ExtReal::NegInf => s.serialize_str("-inf"),
        }
    }
}

/// Dimension and exponent of every computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub d: f64,
    pub p: f64,
}

impl Params {
    pub fn new(d: f64, p: f64) -> Result<Self> {
        if !d.is_finite() || d < 1.0 {
            return Err(Error::param(format!("dimension d = {d} must be a finite number >= 1")));
        }
        if !p.is_finite() || p < 1.0 {
            return Err(Error::param(format!("exponent p = {p} must be a finite number >= 1")));
        }
        if let ExtReal::Finite(two_star) = critical_exponents_of(d).0 {
            if p > two_star * (1.0 + TIE_TOL) {
                return Err(Error::Range {
                    what: "exponent p",
                    detail: format!("p = {p} exceeds the critical exponent {two_star} for d = {d}"),
                });
            }
        }
        Ok(Params { d, p })
    }

    /// Critical Sobolev exponent `2d/(d-2)`, infinite for `d <= 2`.
    pub fn two_star(&self) -> ExtReal {
        critical_exponents_of(self.d).0
    }

    /// Heat-flow threshold `(2d^2+1)/(d-1)^2`, infinite for `d = 1`.
    pub fn two_sharp(&self) -> ExtReal {
        critical_exponents_of(self.d).1
    }

    pub fn with_p(&self, p: f64) -> Result<Self> {
        Params::new(self.d, p)
    }

    /// True when `p` is the logarithmic case.
    pub fn is_log_case(&self) -> bool {
        (self.p - 2.0).abs() < crate::functionals::LOG_BRANCH_TOL
    }
}

fn critical_exponents_of(d: f64) -> (ExtReal, ExtReal) {
    let two_star = if d > 2.0 {
        ExtReal::Finite(2.0 * d / (d - 2.0))
    } else {
        ExtReal::PosInf
    };
    let two_sharp = if d > 1.0 {
        ExtReal::Finite((2.0 * d * d + 1.0) / ((d - 1.0) * (d - 1.0)))
    } else {
        ExtReal::PosInf
    };
    (two_star, two_sharp)
}

/// Returns `(2^*, 2^#)`.
pub fn critical_exponents(params: &Params) -> (ExtReal, ExtReal) {
    critical_exponents_of(params.d)
}

/// Coefficients of `gamma(beta) = -1 + 2 b beta - a beta^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaCoefficients {
    pub a: f64,
    pub b: f64,
}

pub fn gamma_coefficients(params: &Params) -> GammaCoefficients {
    let Params { d, p } = *params;
    let dp2 = (d + 2.0) * (d + 2.0);
    let a = ((d - 1.0) * (d - 1.0) * p * p - 3.0 * (d * d + 2.0) * p
        + 3.0 * (d * d + 2.0 * d + 3.0))
        / dp2;
    let b = (d + 3.0 - p) / (d + 2.0);
    GammaCoefficients { a, b }
}

/// Full discriminant `4(b^2 - a)` of the quadratic `beta -> gamma(beta)`.
pub fn discriminant(params: &Params) -> f64 {
    let GammaCoefficients { a, b } = gamma_coefficients(params);
    4.0 * (b * b - a)
}

/// `b^2 - a` in factored form `d (p-1) (2d - p(d-2)) / (d+2)^2`.
///
/// The last factor is snapped to zero when `p` equals `2^*` up to rounding,
/// so the double root there is returned exactly.
fn reduced_discriminant(params: &Params) -> f64 {
    let Params { d, p } = *params;
    let mut last = 2.0 * d - p * (d - 2.0);
    if last.abs() <= 1e-14 * 2.0 * d {
        last = 0.0;
    }
    d * (p - 1.0) * last / ((d + 2.0) * (d + 2.0))
}

/// Denominator `delta(p, d)` of the closed-form roots.
pub fn delta(params: &Params) -> f64 {
    let Params { d, p } = *params;
    d * d * (p * p - 3.0 * p + 3.0) - 2.0 * d * (p * p - 3.0) + (p - 3.0) * (p - 3.0)
}

pub fn gamma_of_beta(params: &Params, beta: f64) -> f64 {
    let GammaCoefficients { a, b } = gamma_coefficients(params);
    -1.0 + 2.0 * b * beta - a * beta * beta
}

/// `gamma(1)`, the heat-flow coefficient.
pub fn gamma_one(params: &Params) -> f64 {
    let Params { d, p } = *params;
    if d > 1.0 {
        let r = (d - 1.0) / (d + 2.0);
        let two_sharp = (2.0 * d * d + 1.0) / ((d - 1.0) * (d - 1.0));
        r * r * (p - 1.0) * (two_sharp - p)
    } else {
        (p - 1.0) / 3.0
    }
}

/// The two roots of `gamma` together with `delta(p, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaRoots {
    pub beta_minus: ExtReal,
    pub beta_plus: ExtReal,
    pub delta: f64,
}

impl BetaRoots {
    pub fn is_degenerate(&self) -> bool {
        self.beta_minus.is_infinite() || self.beta_plus.is_infinite()
    }
}

/// Roots `beta_-` and `beta_+` of `gamma(beta) = 0`.
///
/// The closed form `(b ± sqrt(b^2 - a)) / a` is evaluated in its rationalised
/// form on the cancelling branch. When `a` vanishes the equation is linear and
/// the root that escapes to infinity is reported as such.
pub fn beta_roots(params: &Params) -> Result<BetaRoots> {
    let GammaCoefficients { a, b } = gamma_coefficients(params);
    let reduced = reduced_discriminant(params);
    if reduced < -1e-14 * (b * b).max(1.0) {
        return Err(Error::Domain(format!(
            "negative discriminant {reduced:e} for d = {}, p = {}",
            params.d, params.p
        )));
    }
    let sq = reduced.max(0.0).sqrt();
    let delta = delta(params);
    let scale = (b * b).max(1.0);

    let (beta_minus, beta_plus) = if a.abs() <= DEGENERATE_TOL * scale {
        let escaping = if a >= 0.0 { ExtReal::PosInf } else { ExtReal::NegInf };
        if b.abs() <= DEGENERATE_TOL {
            (ExtReal::PosInf, ExtReal::PosInf)
        } else if b > 0.0 {
            (ExtReal::Finite(1.0 / (b + sq)), escaping)
        } else {
            (escaping, ExtReal::Finite(1.0 / (b - sq)))
        }
    } else if b >= 0.0 {
        let q = b + sq;
        (ExtReal::Finite(1.0 / q), ExtReal::Finite(q / a))
    } else {
        let q = b - sq;
        (ExtReal::Finite(q / a), ExtReal::Finite(1.0 / q))
    };
    Ok(BetaRoots { beta_minus, beta_plus, delta })
}

/// `alpha = (d-1) beta (p-1) / (d+2)`.
pub fn alpha_of_beta(params: &Params, beta: f64) -> f64 {
    (params.d - 1.0) * beta * (params.p - 1.0) / (params.d + 2.0)
}

/// Coefficient `A(p, beta)` controlling the sign of the deficit derivative
/// along the heat flow started from the power-law witness.
pub fn counterexample_coefficient(params: &Params, beta: f64) -> f64 {
    let Params { d, p } = *params;
    let quad = ((d - 1.0) * (d - 1.0) * p * p - (3.0 * d * d - 2.0 * d + 2.0) * p + d * d
        - 4.0 * d
        - 3.0)
        / ((d + 2.0) * (d + 2.0));
    quad * beta * beta + 2.0 * beta - 1.0
}

/// Same coefficient from its unreduced definition in terms of `alpha`.
pub fn counterexample_coefficient_unreduced(params: &Params, beta: f64) -> f64 {
    let Params { d, p } = *params;
    let alpha = alpha_of_beta(params, beta);
    let s = alpha + beta - 1.0;
    let minus_a = s * s - 2.0 * (d - 1.0) / (d + 2.0) * (p - 1.0) * s * beta
        + d / (d + 2.0) * (p - 1.0) * beta * beta;
    -minus_a
}

/// Roots `(B_-, B_+)` of `A(p, ·) = 0`; they exist for `p >= 2^#`.
pub fn counterexample_roots(params: &Params) -> Option<(f64, f64)> {
    let Params { d, p } = *params;
    let two_sharp = params.two_sharp().finite()?;
    let rad = (p - 1.0) * (p - two_sharp);
    if rad < 0.0 {
        return None;
    }
    let s = (d - 1.0) * rad.sqrt();
    Some(((d + 2.0) / (d + 2.0 - s), (d + 2.0) / (d + 2.0 + s)))
}

/// Exponent `m = 1 + (2/p)(1/beta - 1)` of the nonlinear flow.
pub fn m_of_beta(p: f64, beta: f64) -> ExtReal {
    if beta == 0.0 {
        return if beta.is_sign_negative() { ExtReal::NegInf } else { ExtReal::PosInf };
    }
    ExtReal::Finite(1.0 + 2.0 / p * (1.0 / beta - 1.0))
}

/// Which evolution equation a [`FlowSpec`] selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlowKind {
    Heat,
    Nonlinear,
}

/// Flow family with its exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowSpec {
    pub kind: FlowKind,
    pub p: f64,
    pub beta: ExtReal,
    pub m: f64,
    /// `beta (p-2) + 1`; absent when `beta` is infinite.
    pub kappa: Option<f64>,
}

impl FlowSpec {
    pub fn heat(params: &Params) -> Self {
        FlowSpec {
            kind: FlowKind::Heat,
            p: params.p,
            beta: ExtReal::Finite(1.0),
            m: 1.0,
            kappa: Some(params.p - 1.0),
        }
    }

    pub fn nonlinear(params: &Params, beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta == 0.0 {
            return Err(Error::param(format!("beta = {beta} gives an undefined flow exponent")));
        }
        let m = match m_of_beta(params.p, beta) {
            ExtReal::Finite(m) => m,
            _ => unreachable!(),
        };
        Ok(FlowSpec {
            kind: FlowKind::Nonlinear,
            p: params.p,
            beta: ExtReal::Finite(beta),
            m,
            kappa: Some(beta * (params.p - 2.0) + 1.0),
        })
    }

    /// The limiting flow with formally infinite `beta`, `m = 1 - 2/p`.
    ///
    /// Only meaningful where `beta_-` escapes to infinity, i.e. `d = 3`, `p = 6`.
    pub fn infinite_beta(params: &Params) -> Result<Self> {
        let roots = beta_roots(params)?;
        if !roots.beta_minus.is_infinite() {
            return Err(Error::Range {
                what: "(d, p)",
                detail: format!(
                    "beta is finite at d = {}, p = {}; use FlowSpec::nonlinear",
                    params.d, params.p
                ),
            });
        }
        Ok(FlowSpec {
            kind: FlowKind::Nonlinear,
            p: params.p,
            beta: ExtReal::PosInf,
            m: 1.0 - 2.0 / params.p,
            kappa: None,
        })
    }

    pub fn beta_finite(&self) -> Option<f64> {
        self.beta.finite()
    }

    /// Ratio between the time of the `w` equation and the time of the
    /// `rho` equation: `rho(t) = w(m t)^(beta p)`.
    pub fn w_time_per_rho_time(&self) -> f64 {
        self.m
    }
}

/// Classification of one `(p, beta)` point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionPoint {
    pub p: f64,
    pub beta: f64,
    pub m: ExtReal,
    pub gamma: f64,
    pub admissible: bool,
    #[serde(rename = "A")]
    pub a_coef: f64,
    #[serde(rename = "A_positive")]
    pub a_positive: bool,
}

fn admissible_by_intervals(params: &Params, beta: f64) -> Result<bool> {
    let roots = beta_roots(params)?;
    let gc = gamma_coefficients(params);
    if roots.beta_minus.is_infinite() && roots.beta_plus.is_infinite() {
        // gamma is constant
        return Ok(gamma_of_beta(params, beta) >= 0.0);
    }
    if gc.a.abs() <= DEGENERATE_TOL * (gc.b * gc.b).max(1.0) {
        // Linear case: take the limit of the admissible range from below.
        let shifted = Params { d: params.d, p: params.p * (1.0 - DEGENERATE_OFFSET) };
        return admissible_by_intervals(&shifted, beta);
    }
    let inside = roots.beta_minus.le_value(beta) && roots.beta_plus.ge_value(beta);
    if roots.delta > 0.0 {
        Ok(inside)
    } else {
        Ok(roots.beta_plus.ge_value(beta) || roots.beta_minus.le_value(beta))
    }
}

/// Admissibility of `beta` together with the signed coefficients at `(p, beta)`.
pub fn classify_region(params: &Params, beta: f64) -> Result<RegionPoint> {
    let admissible = admissible_by_intervals(params, beta)?;
    let a_coef = counterexample_coefficient(params, beta);
    Ok(RegionPoint {
        p: params.p,
        beta,
        m: m_of_beta(params.p, beta),
        gamma: gamma_of_beta(params, beta),
        admissible,
        a_coef,
        a_positive: a_coef > 0.0,
    })
}

/// Bounds and shape of a rectangular `(p, beta)` sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub d: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub beta_min: f64,
    pub beta_max: f64,
    pub n_p: usize,
    pub n_beta: usize,
}

impl SweepGrid {
    pub fn p_at(&self, i: usize) -> f64 {
        lin(self.p_min, self.p_max, i, self.n_p)
    }

    pub fn beta_at(&self, j: usize) -> f64 {
        lin(self.beta_min, self.beta_max, j, self.n_beta)
    }
}

pub(crate) fn lin(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
    if n <= 1 {
        return lo;
    }
    if i + 1 == n {
        return hi;
    }
    lo + (hi - lo) * i as f64 / (n - 1) as f64
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionSweep {
    pub grid: SweepGrid,
    pub rows: Vec<RegionPoint>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionSummary {
    pub schema_version: u32,
    pub grid: SweepGrid,
    pub rows: usize,
    pub admissible_points: usize,
    pub a_positive_points: usize,
    pub two_star: ExtReal,
    pub two_sharp: ExtReal,
    /// Caveats on the interval logic for this dimension.
    pub notes: Vec<&'static str>,
}

const D1_NOTE: &str = "d = 1: delta(p, 1) changes sign at p = 2 while the monotonicity statement covers every p >= 1; the interval logic is applied verbatim";

/// Evaluates [`classify_region`] on a `n_p x n_beta` grid, rows ordered by `p`
/// then `beta`.
pub fn region_sweep(grid: SweepGrid) -> Result<RegionSweep> {
    if grid.n_p == 0 || grid.n_beta == 0 {
        return Err(Error::param("sweep grid must have at least one point per axis"));
    }
    if grid.p_min > grid.p_max || grid.beta_min > grid.beta_max {
        return Err(Error::param("sweep bounds must be ordered"));
    }
    // validates the full p range up front
    Params::new(grid.d, grid.p_min)?;
    Params::new(grid.d, grid.p_max)?;
    let mut rows = Vec::with_capacity(grid.n_p * grid.n_beta);
    for i in 0..grid.n_p {
        let params = Params::new(grid.d, grid.p_at(i))?;
        for j in 0..grid.n_beta {
            rows.push(classify_region(&params, grid.beta_at(j))?);
        }
    }
    Ok(RegionSweep { grid, rows })
}

impl RegionSweep {
    pub fn summary(&self) -> RegionSummary {
        let d = self.grid.d;
        let (two_star, two_sharp) = critical_exponents_of(d);
        RegionSummary {
            schema_version: crate::SCHEMA_VERSION,
            grid: self.grid,
            rows: self.rows.len(),
            admissible_points: self.rows.iter().filter(|r| r.admissible).count(),
            a_positive_points: self.rows.iter().filter(|r| r.a_positive).count(),
            two_star,
            two_sharp,
            notes: if d == 1.0 { vec![D1_NOTE] } else { Vec::new() },
        }
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["p", "beta", "m", "gamma", "admissible", "A", "A_positive"])?;
        for r in &self.rows {
            w.write_record([
                format!("{}", r.p),
                format!("{}", r.beta),
                r.m.to_field(),
                format!("{}", r.gamma),
                format!("{}", r.admissible),
                format!("{}", r.a_coef),
                format!("{}", r.a_positive),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(d: f64, p: f64) -> Params {
        Params::new(d, p).unwrap()
    }

    #[test]
    fn critical_exponents_match_substitution() {
        let (s, h) = critical_exponents(&params(5.0, 2.0));
        assert_eq!(s, ExtReal::Finite(10.0 / 3.0));
        assert_eq!(h, ExtReal::Finite(51.0 / 16.0));
        let (s, h) = critical_exponents(&params(3.0, 2.0));
        assert_eq!(s, ExtReal::Finite(6.0));
        assert_eq!(h, ExtReal::Finite(4.75));
        let (s, h) = critical_exponents(&params(2.0, 7.0));
        assert_eq!(s, ExtReal::PosInf);
        assert_eq!(h, ExtReal::Finite(9.0));
        assert_eq!(critical_exponents(&params(1.0, 3.0)).1, ExtReal::PosInf);
    }

    #[test]
    fn params_reject_supercritical_exponent() {
        assert!(Params::new(3.0, 6.5).is_err());
        assert!(Params::new(0.5, 2.0).is_err());
        assert!(Params::new(3.0, 0.5).is_err());
        assert!(Params::new(2.0, 100.0).is_ok());
        assert!(Params::new(3.0, 6.0).is_ok());
    }

    #[test]
    fn roots_coincide_at_critical_exponent() {
        let pr = params(5.0, 10.0 / 3.0);
        let r = beta_roots(&pr).unwrap();
        assert!((r.beta_minus.finite().unwrap() - 1.5).abs() < 1e-12);
        assert!((r.beta_plus.finite().unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn delta_vanishes_at_d4_p3() {
        let pr = params(4.0, 3.0);
        let r = beta_roots(&pr).unwrap();
        assert_eq!(r.delta, 0.0);
        assert!(r.is_degenerate());
        let gc = gamma_coefficients(&pr);
        assert!((r.beta_minus.finite().unwrap() - 0.5 / gc.b).abs() < 1e-15);
        assert_eq!(r.beta_plus, ExtReal::PosInf);
    }

    #[test]
    fn d3_p6_has_no_finite_root() {
        let r = beta_roots(&params(3.0, 6.0)).unwrap();
        assert_eq!(r.beta_minus, ExtReal::PosInf);
        let spec = FlowSpec::infinite_beta(&params(3.0, 6.0)).unwrap();
        assert!((spec.m - 2.0 / 3.0).abs() < 1e-15);
        assert!(spec.kappa.is_none());
        assert!(FlowSpec::infinite_beta(&params(5.0, 3.0)).is_err());
    }

    #[test]
    fn roots_zero_gamma_d5_p3() {
        let pr = params(5.0, 3.0);
        let r = beta_roots(&pr).unwrap();
        for b in [r.beta_minus, r.beta_plus] {
            let b = b.finite().unwrap();
            assert!(gamma_of_beta(&pr, b).abs() < 1e-12);
        }
    }

    #[test]
    fn gamma_one_values() {
        assert!((gamma_one(&params(1.0, 4.0)) - 1.0).abs() < 1e-15);
        assert!(gamma_one(&params(5.0, 51.0 / 16.0)).abs() < 1e-15);
        assert!((gamma_one(&params(5.0, 3.0)) - 6.0 / 49.0).abs() < 1e-15);
        // d = 1 agrees with gamma(1)
        let pr = params(1.0, 2.5);
        assert!((gamma_of_beta(&pr, 1.0) - gamma_one(&pr)).abs() < 1e-15);
    }

    #[test]
    fn gamma_matches_unexpanded_definition() {
        for &(d, p, beta) in &[(5.0, 3.0, 0.7), (3.0, 5.5, 2.0), (2.5, 1.7, -0.4), (8.0, 2.4, 1.3)] {
            let pr = params(d, p);
            let c = (d - 1.0) / (d + 2.0) * beta * (p - 1.0);
            let direct = (1.0 + beta * (p - 2.0)) * (beta - 1.0) + d / (d + 2.0) * beta * (p - 1.0)
                - c * c;
            assert!((direct - gamma_of_beta(&pr, beta)).abs() < 1e-13);
        }
    }

    #[test]
    fn discriminant_vanishes_at_p1() {
        for d in [3.0, 4.0, 7.5] {
            assert!(discriminant(&params(d, 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn coefficient_zero_at_two_sharp() {
        let pr = params(5.0, 51.0 / 16.0);
        assert!(counterexample_coefficient(&pr, 1.0).abs() < 1e-14);
        let (bm, bp) = counterexample_roots(&pr).unwrap();
        assert!((bm - 1.0).abs() < 1e-15 && (bp - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coefficient_positive_between_exponents() {
        let pr = params(5.0, 3.25);
        let bm = beta_roots(&pr).unwrap().beta_minus.finite().unwrap();
        assert!(counterexample_coefficient(&pr, bm) > 0.0);
        let (_, b_plus) = counterexample_roots(&pr).unwrap();
        assert!(counterexample_coefficient(&pr, b_plus).abs() < 1e-12);
    }

    #[test]
    fn reduced_and_unreduced_coefficient_agree() {
        for &(d, p, beta) in &[(5.0, 3.25, 1.2), (3.0, 5.0, 0.8), (8.0, 2.5, 3.0)] {
            let pr = params(d, p);
            let a = counterexample_coefficient(&pr, beta);
            let b = counterexample_coefficient_unreduced(&pr, beta);
            assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn classify_examples() {
        assert!(classify_region(&params(5.0, 3.0), 1.0).unwrap().admissible);
        assert!(!classify_region(&params(5.0, 3.3), 1.0).unwrap().admissible);
        // ties at a root are admissible
        let pr = params(5.0, 3.0);
        let r = beta_roots(&pr).unwrap();
        assert!(classify_region(&pr, r.beta_minus.finite().unwrap()).unwrap().admissible);
        assert!(classify_region(&pr, r.beta_plus.finite().unwrap()).unwrap().admissible);
    }

    #[test]
    fn degenerate_delta_uses_left_limit() {
        let pr = params(4.0, 3.0);
        let bm = beta_roots(&pr).unwrap().beta_minus.finite().unwrap();
        assert!(classify_region(&pr, bm + 1.0).unwrap().admissible);
        assert!(classify_region(&pr, 1e3).unwrap().admissible);
        assert!(!classify_region(&pr, bm - 0.1).unwrap().admissible);
    }

    #[test]
    fn m_at_critical_roots_is_one_minus_inverse_d() {
        for d in 4..=10 {
            let d = d as f64;
            let pr = params(d, 2.0 * d / (d - 2.0));
            let b = beta_roots(&pr).unwrap().beta_minus.finite().unwrap();
            let m = m_of_beta(pr.p, b).finite().unwrap();
            assert!((m - (1.0 - 1.0 / d)).abs() < 1e-12, "d = {d}");
        }
    }

    #[test]
    fn flow_spec_consistency() {
        let pr = params(5.0, 3.3);
        let spec = FlowSpec::nonlinear(&pr, 1.7).unwrap();
        assert!((spec.m - (1.0 + 2.0 / 3.3 * (1.0 / 1.7 - 1.0))).abs() < 1e-15);
        assert!((spec.kappa.unwrap() - (1.7 * 1.3 + 1.0)).abs() < 1e-15);
        assert!(FlowSpec::nonlinear(&pr, 0.0).is_err());
        let h = FlowSpec::heat(&pr);
        assert_eq!(h.m, 1.0);
        assert_eq!(h.kappa, Some(2.3));
    }

    #[test]
    fn sweep_csv_header() {
        let grid = SweepGrid { d: 5.0, p_min: 1.0, p_max: 3.0, beta_min: 0.0, beta_max: 2.0, n_p: 3, n_beta: 2 };
        let sweep = region_sweep(grid).unwrap();
        let mut buf = Vec::new();
        sweep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("p,beta,m,gamma,admissible,A,A_positive\n"));
        assert_eq!(text.lines().count(), 7);
        // beta = 0 has an infinite exponent m
        assert!(text.lines().nth(1).unwrap().contains(",inf,"));
    }
}
