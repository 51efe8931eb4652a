//! Time-step refinement studies.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::evolution::{energy, evolve_visit, Scheme, SolverConfig};
use crate::field::FieldState;
use crate::nonlinearity::NonlinearitySpec;
use crate::norms::{l2_distance, lp_norm};

/// A quantity measured at successively halved step sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementStudy {
    pub dts: Vec<f64>,
    pub measured: Vec<f64>,
    /// `measured[i] / measured[i + 1]`.
    pub ratios: Vec<f64>,
}

impl RefinementStudy {
    fn new(dts: Vec<f64>, measured: Vec<f64>) -> Self {
        let ratios = measured.windows(2).map(|w| w[0] / w[1]).collect();
        RefinementStudy {
            dts,
            measured,
            ratios,
        }
    }

    pub fn ratios_within(&self, lo: f64, hi: f64) -> bool {
        self.ratios.iter().all(|r| (lo..=hi).contains(r))
    }
}

fn halvings(base_dt: f64, count: usize) -> Result<Vec<f64>> {
    if !(base_dt.is_finite() && base_dt > 0.0) {
        return Err(param("dt", "must be positive"));
    }
    if count == 0 {
        return Err(param("halvings", "need at least one halving"));
    }
    Ok((0..=count).map(|i| base_dt / (1u64 << i) as f64).collect())
}

/// `max_n |E(u_n) - E(u_0)|` along a run, sampled every `every` steps.
pub fn energy_drift(
    u0: &FieldState,
    spec: &NonlinearitySpec,
    config: &SolverConfig,
) -> Result<f64> {
    let e0 = energy(u0, spec);
    let mut worst: f64 = 0.0;
    evolve_visit(u0, spec, config, |_, u| {
        worst = worst.max((energy(u, spec) - e0).abs());
    })?;
    Ok(worst)
}

/// Largest relative charge change per unit time along a run.
pub fn charge_drift_rate(
    u0: &FieldState,
    spec: &NonlinearitySpec,
    config: &SolverConfig,
) -> Result<f64> {
    let q0 = lp_norm(u0, 2.0).powi(2);
    let mut worst: f64 = 0.0;
    evolve_visit(u0, spec, config, |_, u| {
        let t = u.time() - u0.time();
        if t > 0.0 {
            worst = worst.max((lp_norm(u, 2.0).powi(2) - q0).abs() / q0 / t);
        }
    })?;
    Ok(worst)
}

/// Energy drift over `[0, t_final]` at `base_dt` and `count` halvings of it.
pub fn energy_drift_study(
    u0: &FieldState,
    spec: &NonlinearitySpec,
    scheme: Scheme,
    base_dt: f64,
    count: usize,
    t_final: f64,
    sample_every: f64,
) -> Result<RefinementStudy> {
    let dts = halvings(base_dt, count)?;
    let mut measured = Vec::with_capacity(dts.len());
    for &dt in &dts {
        let every = ((sample_every / dt).round() as usize).max(1);
        let config = SolverConfig::new(scheme, dt, t_final, every)?;
        measured.push(energy_drift(u0, spec, &config)?);
    }
    Ok(RefinementStudy::new(dts, measured))
}

/// Final-time error against a run at `base_dt / 2^count / 64`.
pub fn global_error_study(
    u0: &FieldState,
    spec: &NonlinearitySpec,
    scheme: Scheme,
    base_dt: f64,
    count: usize,
    t_final: f64,
) -> Result<RefinementStudy> {
    let dts = halvings(base_dt, count)?;
    let run = |dt: f64| -> Result<FieldState> {
        let config = SolverConfig::new(scheme, dt, t_final, usize::MAX)?;
        Ok(evolve_visit(u0, spec, &config, |_, _| {})?.0)
    };
    let reference = run(dts[count] / 64.0)?;
    let mut measured = Vec::with_capacity(dts.len());
    for &dt in &dts {
        measured.push(l2_distance(&run(dt)?, &reference));
    }
    Ok(RefinementStudy::new(dts, measured))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Geometry;
    use num_complex::Complex64;

    #[test]
    fn linear_flow_conserves_energy_exactly() {
        let g = Geometry::new(1, 10.0, 64).unwrap();
        let u0 = FieldState::from_centered_fn(g, |x| Complex64::new((-x[0] * x[0]).exp(), 0.0));
        let study = energy_drift_study(
            &u0,
            &NonlinearitySpec::exact(0.0),
            Scheme::Strang,
            0.01,
            1,
            0.1,
            0.01,
        )
        .unwrap();
        assert!(study.measured.iter().all(|d| *d < 1e-12));
    }

    #[test]
    fn needs_a_halving() {
        let g = Geometry::new(1, 10.0, 64).unwrap();
        let u0 = FieldState::zeros(g);
        let spec = NonlinearitySpec::exact(1.0);
        assert!(global_error_study(&u0, &spec, Scheme::Strang, 0.1, 0, 1.0).is_err());
    }
}
