//! Pseudospectral incompressible Navier-Stokes on the periodic 3-torus,
//! integrated in physical time and in adaptively lifted time.
//!
//! The crate has three layers:
//!
//! * [`grid`], [`fft`], [`field`], [`operators`] — Fourier representation of
//!   divergence-free velocity fields: transforms, two-thirds dealiasing,
//!   Leray projection, the advection term, and gradient/vorticity norms.
//! * [`solver`] — fixed-step RK4 integration in physical time with an exact
//!   integrating factor for the viscous term.
//! * [`lift`], [`pchip`], [`diagnostics`] — the monotone time map t <-> tau,
//!   integration of the lifted system, and the weighted quadratures that
//!   check energy structure and regularity integrals in both coordinates.

pub mod diagnostics;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod initial;
pub mod lift;
pub mod operators;
pub mod oracle;
pub mod pchip;
pub mod solver;

pub use rustfft::num_complex::Complex64;

pub use diagnostics::{Coordinate, DiagnosticRow, DiagnosticSeries, InvarianceReport};
pub use error::{GridError, LiftError, SolverError};
pub use field::{PhysicalField, SpectralVelocity};
pub use grid::Grid;
pub use lift::{LiftMap, LiftedState, NormKind, RateKind, RateParams};
pub use solver::{IntegrateOptions, SolverParams, SolverState, Trajectory};
