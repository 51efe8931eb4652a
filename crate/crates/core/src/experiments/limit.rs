//! Agreement of the `epsilon -> 0` limits of two regularization families.
//!
//! If weak solutions are unique, the shifted-log and floored-log flows must
//! converge to the same solution, so their distance at a fixed time has to
//! vanish with `epsilon`.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::evolution::{evolve_visit, SolverConfig};
use crate::field::FieldState;
use crate::nonlinearity::{NonlinearitySpec, RegFamily};
use crate::norms::l2_distance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitResult {
    pub epsilons: Vec<f64>,
    /// `D(eps) = ||u_shift(T) - u_floor(T)||`.
    pub cross_distance: Vec<f64>,
    /// `||u_shift(eps_i) - u_shift(eps_{i+1})||` at `T`.
    pub shifted_increments: Vec<f64>,
    pub floor_increments: Vec<f64>,
    /// `D(eps_i) / D(eps_{i+1})` rescaled to one decade of `eps`.
    pub decay_per_decade: Vec<f64>,
    pub monotone: bool,
}

impl LimitResult {
    /// Monotone decrease with at least `factor` per decade throughout.
    pub fn verdict(&self, factor: f64) -> bool {
        self.monotone && self.decay_per_decade.iter().all(|r| *r >= factor)
    }
}

/// Evolves `u0` under both regularized families for each `epsilon` of the
/// strictly decreasing sequence. The family and `epsilon` of `base` are
/// ignored; its `lambda`, `mu` and `alpha` are kept.
pub fn regularization_limit_experiment(
    u0: &FieldState,
    base: &NonlinearitySpec,
    epsilons: &[f64],
    config: &SolverConfig,
) -> Result<LimitResult> {
    if epsilons.len() < 3 {
        return Err(param(
            "epsilons",
            format!("need at least 3 values, got {}", epsilons.len()),
        ));
    }
    if epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(param("epsilons", "values must be positive"));
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(param("epsilons", "sequence must be strictly decreasing"));
    }
    let run = |family: RegFamily, eps: f64| -> Result<FieldState> {
        let spec = base.regularized(family, eps);
        Ok(evolve_visit(u0, &spec, config, |_, _| {})?.0)
    };
    let mut shifted = Vec::with_capacity(epsilons.len());
    let mut floored = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        shifted.push(run(RegFamily::ShiftedLog, eps)?);
        floored.push(run(RegFamily::FloorLog, eps)?);
    }
    let cross_distance: Vec<f64> = shifted
        .iter()
        .zip(&floored)
        .map(|(a, b)| l2_distance(a, b))
        .collect();
    let increments = |sols: &[FieldState]| -> Vec<f64> {
        sols.windows(2).map(|w| l2_distance(&w[0], &w[1])).collect()
    };
    let decay_per_decade = cross_distance
        .windows(2)
        .zip(epsilons.windows(2))
        .map(|(d, e)| (d[0] / d[1]).powf(1.0 / (e[0] / e[1]).log10()))
        .collect();
    let monotone = cross_distance.windows(2).all(|w| w[1] < w[0]);
    Ok(LimitResult {
        epsilons: epsilons.to_vec(),
        shifted_increments: increments(&shifted),
        floor_increments: increments(&floored),
        cross_distance,
        decay_per_decade,
        monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::Scheme;
    use crate::experiments::scan::fit_loglog;
    use crate::geometry::Geometry;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn bounded_below(g: Geometry) -> FieldState {
        FieldState::from_fn(g, |x| {
            Complex64::new(1.0, 0.0) + Complex64::from_polar(0.1, 2.0 * PI * x[0] / g.period(0))
        })
    }

    #[test]
    fn short_sequence_rejected() {
        let g = Geometry::new(1, 8.0, 32).unwrap();
        let cfg = SolverConfig::new(Scheme::Strang, 0.01, 0.1, 1).unwrap();
        let spec = NonlinearitySpec::exact(1.0);
        let u0 = bounded_below(g);
        assert!(regularization_limit_experiment(&u0, &spec, &[1e-2], &cfg).is_err());
        assert!(regularization_limit_experiment(&u0, &spec, &[1e-2, 1e-1, 1e-3], &cfg).is_err());
    }

    #[test]
    fn bounded_below_data_converge_quadratically() {
        let g = Geometry::new(1, 8.0, 64).unwrap();
        let cfg = SolverConfig::new(Scheme::Strang, 1e-2, 1.0, 100).unwrap();
        let eps = [1e-1, 3e-2, 1e-2, 3e-3];
        let res = regularization_limit_experiment(
            &bounded_below(g),
            &NonlinearitySpec::exact(1.0),
            &eps,
            &cfg,
        )
        .unwrap();
        let (slope, _) = fit_loglog(&eps, &res.cross_distance).unwrap();
        assert!(slope >= 1.8, "slope {slope}");
        assert!(res.verdict(2.0));
    }
}
