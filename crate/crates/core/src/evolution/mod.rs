//! Time integration by operator splitting, conserved quantities, and
//! Duhamel-integral quadrature.

mod duhamel;
mod observables;
mod solver;

pub use duhamel::{duhamel, duhamel_series, lemma25_check, DuhamelAccumulator, Lemma25Result};
pub use observables::{charge, energy, Observables};
pub use solver::{
    evolve, evolve_visit, lie_step, nonlinear_substep, strang_step, Integrator, Scheme,
    SolverConfig, Trajectory,
};
