//! Desk-scale numerical laboratory for non-self-adjoint semiclassical
//! operators: phase-space symbol algebra and bracket-order classification,
//! Hamilton-Jacobi weight evolution with a characteristic oracle, dense model
//! discretizations and their spectra, resolvent/pseudospectrum/semigroup
//! experiments with power-law fits, the Laplace-transform quadrature
//! resolvent, saddle-point integral bounds, and Gaussian-beam quasimodes.
//!
//! All core math is generic over the scalar type via [`num::Real`] (f32/f64);
//! the aliases below pin the f64 instantiations the CLI and tests use.

extern crate blas_src;

pub mod error;
pub mod fit;
pub mod hjb;
pub mod linalg;
pub mod models;
pub mod num;
pub mod operators;
pub mod phase;
pub mod quasimode;
pub mod range;
pub mod special;
pub mod spectral;
pub mod symbol;

pub use error::{CoreError, CoreResult};
pub use fit::{fit_power_law, ScalingFit};
pub use num::Real;

/// f64 instantiations of the domain types.
pub type PhasePoint64 = phase::PhasePoint<f64>;
pub type ComplexPhasePoint64 = phase::ComplexPhasePoint<f64>;
pub type Symbol64 = symbol::SemiclassicalSymbol<f64>;
pub type Operator64 = operators::DiscretizedOperator<f64>;
pub type WeightField64 = hjb::WeightField<f64>;
pub type PhaseLattice64 = hjb::PhaseLattice<f64>;
pub type GaussianBeam64 = quasimode::GaussianBeam<f64>;
