//! Ultraspherical heat and fast-diffusion flows on `(-1, 1)`.
//!
//! The crate evaluates Gagliardo–Nirenberg–Sobolev type functionals for the
//! measure `d nu_d`, their carré du champ dissipation identities along the heat
//! flow and a family of nonlinear flows, reproduces the explicit witnesses
//! showing where monotonicity fails, and estimates the improved constants
//! available under a moment or symmetry constraint.

pub mod constants;
pub mod counterexamples;
pub mod discretization;
pub mod error;
pub mod experiments;
pub mod flows;
pub mod functionals;
pub mod improvements;
pub mod init;
pub mod integrator;
pub mod manifest;
pub mod sampling;
pub mod verify;

pub use error::{Error, Result};

/// Version stamped on every JSON document the crate writes.
pub const SCHEMA_VERSION: u32 = 1;
