use serde::{Deserialize, Serialize};

use crate::field::{FieldState, SpectralEngine};
use crate::multiplier::gradient_norm_sq;
use crate::nonlinearity::NonlinearitySpec;
use crate::norms::{lp_norm, sobolev_norm};

/// Conserved quantities and Sobolev norms at one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub time: f64,
    pub charge: f64,
    pub energy: f64,
    /// `(s, ||u||_{H^s})` pairs.
    pub sobolev: Vec<(f64, f64)>,
}

/// `||u||_{L2}^2`.
pub fn charge(state: &FieldState) -> f64 {
    lp_norm(state, 2.0).powi(2)
}

/// `E(u) = 1/2 ||grad u||^2 - lambda/2 int |u|^2 (log|u|^2 - 1) - mu/(alpha+2) int |u|^{alpha+2}`.
///
/// The gradient term is spectral; the potential terms use the rectangle rule
/// with `0 log 0 = 0`.
pub fn energy(state: &FieldState, spec: &NonlinearitySpec) -> f64 {
    let mut engine = SpectralEngine::new(state.geometry());
    energy_with(&mut engine, state, spec)
}

pub(crate) fn energy_with(
    engine: &mut SpectralEngine,
    state: &FieldState,
    spec: &NonlinearitySpec,
) -> f64 {
    let kinetic = 0.5 * gradient_norm_sq(engine, state);
    let cell = state.geometry().cell_volume();
    let mut log_part = 0.0;
    let mut power_part = 0.0;
    for z in state.values() {
        let m2 = z.norm_sqr();
        if m2 > 0.0 {
            log_part += m2 * (m2.ln() - 1.0);
            if spec.mu != 0.0 {
                power_part += m2.powf(0.5 * spec.alpha + 1.0);
            }
        }
    }
    kinetic - 0.5 * spec.lambda * cell * log_part - spec.mu / (spec.alpha + 2.0) * cell * power_part
}

pub(crate) fn observe(
    engine: &mut SpectralEngine,
    state: &FieldState,
    spec: &NonlinearitySpec,
    sobolev_indices: &[f64],
) -> Observables {
    Observables {
        time: state.time(),
        charge: charge(state),
        energy: energy_with(engine, state, spec),
        sobolev: sobolev_indices
            .iter()
            .map(|&s| (s, sobolev_norm(state, s).unwrap_or(f64::NAN)))
            .collect(),
    }
}
