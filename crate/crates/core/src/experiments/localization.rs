//! Decay of the localization error: the Duhamel contribution of the cutoff
//! commutator `2 grad phi_R . grad u + Delta phi_R u` measured on `B_R`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cutoff::{ball_indicator, SampledCutoff};
use crate::error::{param, Error, Result};
use crate::evolution::{DuhamelAccumulator, Trajectory};
use crate::field::{FieldState, SpectralEngine};
use crate::geometry::Geometry;
use crate::multiplier::partial_derivative;
use crate::norms::masked_l2_sq;
#[cfg(test)]
use num_complex::Complex64;

use super::scan::ScanResult;

/// Accepted excess of the fitted slope over `-s`.
pub const SLOPE_SLACK: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationResult {
    /// `||e_R||_{L^2([0,T] x B_R)}` against `R`.
    pub scan: ScanResult,
    pub s: f64,
    /// `|B_R|^{delta/2}` with `delta = 1 / log R`.
    pub scheduled_weights: Vec<f64>,
    pub weights_bounded: bool,
    pub verdict: bool,
}

/// Volume of the ball of `radius` in dimension 1 or 2.
pub fn ball_volume(dim: usize, radius: f64) -> f64 {
    match dim {
        1 => 2.0 * radius,
        _ => std::f64::consts::PI * radius * radius,
    }
}

/// `|B_R|^{delta/2}` for the schedule `delta = 1 / log R`; needs `R > 1`.
pub fn scheduled_weight(dim: usize, radius: f64) -> f64 {
    ball_volume(dim, radius).powf(0.5 / radius.ln())
}

/// `2 grad phi_R . grad u + Delta phi_R u`.
pub fn commutator_source(
    engine: &mut SpectralEngine,
    cutoff: &SampledCutoff,
    u: &FieldState,
) -> FieldState {
    let grads: Vec<FieldState> = (0..u.geometry().dim())
        .map(|axis| partial_derivative(engine, u, axis))
        .collect();
    let values = u
        .values()
        .iter()
        .enumerate()
        .map(|(flat, z)| {
            let mut acc = cutoff.laplacian[flat] * z;
            for (axis, g) in grads.iter().enumerate() {
                acc += 2.0 * cutoff.gradient[flat][axis] * g.values()[flat];
            }
            acc
        })
        .collect();
    FieldState::from_parts(*u.geometry(), values, u.time())
}

fn snapshot_step(trajectory: &Trajectory) -> Result<(Geometry, f64)> {
    let snaps = &trajectory.snapshots;
    if snaps.len() < 2 {
        return Err(Error::Degenerate(
            "trajectory needs at least 2 snapshots".into(),
        ));
    }
    let g = *snaps[0].geometry();
    let h = snaps[1].time() - snaps[0].time();
    let span = snaps[snaps.len() - 1].time() - snaps[0].time();
    let expected = span / (snaps.len() - 1) as f64;
    if (h - expected).abs() > 1e-9 * expected.abs() {
        return Err(param("trajectory", "snapshots must be equispaced in time"));
    }
    Ok((g, h))
}

/// `||e_R||_{L^2([0,T] x B_R)}` for one radius.
pub fn localization_error(trajectory: &Trajectory, radius: f64) -> Result<f64> {
    let (g, h) = snapshot_step(trajectory)?;
    let box_size = g.periods().iter().cloned().fold(f64::MAX, f64::min);
    if !(radius > 1.0 && radius <= box_size / 4.0) {
        return Err(param(
            "radius",
            format!("must lie in (1, box/4 = {}], got {radius}", box_size / 4.0),
        ));
    }
    let cutoff = SampledCutoff::new(&g, radius);
    let ball = ball_indicator(&g, radius);
    let mut engine = SpectralEngine::new(&g);
    let mut acc = DuhamelAccumulator::new(&g, h)?;
    let n = trajectory.snapshots.len() - 1;
    let mut total = 0.0;
    for (j, u) in trajectory.snapshots.iter().enumerate() {
        acc.push(&commutator_source(&mut engine, &cutoff, u))?;
        let weight = if j == 0 || j == n { 0.5 } else { 1.0 };
        total += weight * h * masked_l2_sq(&acc.current(), &ball);
    }
    Ok(total.sqrt())
}

/// Scans `radii` and fits the decay of the localization error; the data
/// are assumed to lie in `H^s`.
pub fn localization_error_experiment(
    trajectory: &Trajectory,
    s: f64,
    radii: &[f64],
) -> Result<LocalizationResult> {
    if !(s > 0.0 && s < 1.0) {
        return Err(param("s", format!("must lie in (0, 1), got {s}")));
    }
    let dim = snapshot_step(trajectory)?.0.dim();
    let measured: Vec<f64> = radii
        .par_iter()
        .map(|&r| localization_error(trajectory, r))
        .collect::<Result<_>>()?;
    let scan = ScanResult::new("R", radii.to_vec(), measured)?;
    let scheduled_weights: Vec<f64> = radii.iter().map(|&r| scheduled_weight(dim, r)).collect();
    let weights_bounded = scheduled_weights.iter().all(|w| *w <= std::f64::consts::E);
    let verdict = scan.slope <= -s + SLOPE_SLACK && weights_bounded;
    Ok(LocalizationResult {
        scan,
        s,
        scheduled_weights,
        weights_bounded,
        verdict,
    })
}
