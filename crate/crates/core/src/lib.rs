//! Spectral simulation and estimate-verification workbench for the
//! logarithmic Schrödinger equation
//!
//! ```text
//! i u_t + Delta u + lambda u log|u|^2 + mu |u|^alpha u = 0
//! ```
//!
//! on periodic boxes in one and two dimensions.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`], [`field`], [`multiplier`], [`norms`], [`cutoff`]: grids,
//!   the DFT pair, Fourier multipliers, norms and cutoff profiles.
//! * [`nonlinearity`]: the logarithmic nonlinearity, its regularisations and
//!   checkers for its pointwise inequalities.
//! * [`evolution`]: Strang/Lie splitting with the exact nonlinear phase flow,
//!   conserved quantities, Duhamel quadrature.
//! * [`experiments`]: the verification harness (stability, Gaussons,
//!   regularisation limits, smoothing scans, Gronwall checks).

pub mod cutoff;
pub mod error;
pub mod evolution;
pub mod experiments;
pub mod field;
pub mod geometry;
pub mod multiplier;
pub mod nonlinearity;
pub mod norms;
pub mod snapshot;

pub use error::{Error, Result};
pub use evolution::{evolve, Scheme, SolverConfig, Trajectory};
pub use field::{forward_transform, inverse_transform, FieldState, SpectralField};
pub use geometry::Geometry;
pub use nonlinearity::{NonlinearitySpec, RegFamily};

pub use num_complex::Complex64;
