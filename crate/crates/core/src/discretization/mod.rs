//! The probability measure `d nu_d = Z_d^-1 (1 - z^2)^(d/2 - 1) dz`, its Gauss
//! rule, the orthonormal polynomial basis in which the ultraspherical operator
//! `L f = (1 - z^2) f'' - d z f'` is diagonal, and grid functions built on it.

mod basis;
mod gridfn;
mod quadrature;

pub(crate) use basis::chop;
pub use basis::{Basis, DEFAULT_ORDER, DEFAULT_PADDING, RESOLUTION_LIMIT};
pub use gridfn::{GridFn, GridFnJson, Profile, Sample, POSITIVITY_FLOOR};
pub use quadrature::{
    build_quadrature, normalization_constant, nu, orthonormal_with_derivatives,
    recurrence_coefficient, Quadrature, MIN_ORDER,
};
