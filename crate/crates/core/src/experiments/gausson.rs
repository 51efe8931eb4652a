//! Gaussons: the explicit standing waves of the focusing (`lambda > 0`)
//! equation,
//!
//! ```text
//! u(t, x) = e^{i omega t} phi(x),   phi(x) = exp((omega + d lambda) / (2 lambda)) exp(-lambda |x|^2 / 2),
//! ```
//!
//! for which `Delta phi = (lambda^2 |x|^2 - lambda d) phi` and
//! `log phi^2 = (omega + d lambda) / lambda - lambda |x|^2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::evolution::{evolve_visit, SolverConfig};
use crate::field::FieldState;
use crate::geometry::Geometry;
use crate::nonlinearity::NonlinearitySpec;
use crate::norms::{l2_distance, lp_norm};

/// Largest profile value tolerated on the box boundary.
pub const BOUNDARY_AMPLITUDE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gausson {
    pub omega: f64,
    pub lambda: f64,
    pub dim: usize,
}

impl Gausson {
    pub fn new(omega: f64, lambda: f64, dim: usize) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(param(
                "lambda",
                format!("Gaussons need lambda > 0, got {lambda}"),
            ));
        }
        if !omega.is_finite() {
            return Err(param("omega", "must be finite"));
        }
        Ok(Gausson { omega, lambda, dim })
    }

    pub fn amplitude(&self) -> f64 {
        ((self.omega + self.dim as f64 * self.lambda) / (2.0 * self.lambda)).exp()
    }

    /// `phi` at squared distance `r2` from the centre.
    pub fn profile(&self, r2: f64) -> f64 {
        self.amplitude() * (-0.5 * self.lambda * r2).exp()
    }

    /// `Delta phi` from the closed form.
    pub fn laplacian(&self, r2: f64) -> f64 {
        (self.lambda * self.lambda * r2 - self.lambda * self.dim as f64) * self.profile(r2)
    }

    /// Samples `phi` centred in the box; rejects boxes where the profile
    /// exceeds [`BOUNDARY_AMPLITUDE`] on the boundary.
    pub fn sample(&self, geometry: &Geometry) -> Result<FieldState> {
        if geometry.dim() != self.dim {
            return Err(param("geometry", "dimension differs from the Gausson's"));
        }
        let edge = self.profile(geometry.inner_radius().powi(2));
        if edge > BOUNDARY_AMPLITUDE {
            return Err(param(
                "geometry",
                format!("box too small: profile is {edge:e} on the boundary"),
            ));
        }
        Ok(FieldState::from_centered_fn(*geometry, |x| {
            let r2 = x[..self.dim].iter().map(|v| v * v).sum();
            Complex64::new(self.profile(r2), 0.0)
        }))
    }

    /// The Gausson's amplitude with the Gaussian's variance divided by
    /// `width_ratio`. Any ratio other than 1 breathes instead of standing
    /// still, which makes it a non-stationary smooth test datum.
    pub fn sample_rescaled(&self, geometry: &Geometry, width_ratio: f64) -> Result<FieldState> {
        if !(width_ratio.is_finite() && width_ratio > 0.0) {
            return Err(param("width_ratio", "must be positive"));
        }
        let scaled = Gausson {
            lambda: self.lambda * width_ratio,
            ..*self
        };
        let amp = self.amplitude() / scaled.amplitude();
        Ok(scaled.sample(geometry)?.scale(Complex64::new(amp, 0.0)))
    }

    /// Largest pointwise `|-omega phi + Delta phi + lambda phi log phi^2|`
    /// over the grid, with `Delta phi` in closed form and `log phi^2` taken
    /// from the sampled values.
    pub fn ansatz_residual(&self, geometry: &Geometry) -> Result<f64> {
        let phi = self.sample(geometry)?;
        let mut worst: f64 = 0.0;
        for (flat, z) in phi.values().iter().enumerate() {
            let p = z.re;
            if p == 0.0 {
                continue;
            }
            let r2 = geometry.centered_radius(flat).powi(2);
            let res = -self.omega * p + self.laplacian(r2) + self.lambda * p * 2.0 * p.ln();
            worst = worst.max(res.abs());
        }
        Ok(worst)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussonResult {
    pub times: Vec<f64>,
    /// `||u(t) - e^{i omega t} phi|| / ||phi||` at each snapshot.
    pub errors: Vec<f64>,
    pub charge_drift: f64,
}

impl GaussonResult {
    pub fn final_error(&self) -> f64 {
        *self.errors.last().expect("at least one snapshot")
    }
}

/// Evolves the sampled Gausson and tracks its deviation from the exact
/// standing wave.
pub fn gausson_experiment(
    omega: f64,
    lambda: f64,
    geometry: &Geometry,
    config: &SolverConfig,
) -> Result<GaussonResult> {
    let gausson = Gausson::new(omega, lambda, geometry.dim())?;
    let phi = gausson.sample(geometry)?;
    let spec = NonlinearitySpec::exact(lambda);
    let norm = lp_norm(&phi, 2.0);
    let q0 = norm * norm;
    let mut times = Vec::new();
    let mut errors = Vec::new();
    let mut charge_drift: f64 = 0.0;
    evolve_visit(&phi, &spec, config, |_, u| {
        let t = u.time();
        let exact = phi.scale(Complex64::from_polar(1.0, omega * t));
        times.push(t);
        errors.push(l2_distance(u, &exact) / norm);
        charge_drift = charge_drift.max((lp_norm(u, 2.0).powi(2) - q0).abs() / q0);
    })?;
    Ok(GaussonResult {
        times,
        errors,
        charge_drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::Scheme;
    use crate::multiplier::laplacian;

    #[test]
    fn residual_vanishes_on_any_grid() {
        for (dim, l, n) in [(1, 40.0, 1024), (1, 30.0, 128), (2, 16.0, 64)] {
            let g = Geometry::new(dim, l, n).unwrap();
            for (omega, lambda) in [(0.0, 1.0), (1.5, 2.0), (-0.7, 0.5)] {
                let gs = Gausson::new(omega, lambda, dim).unwrap();
                if let Ok(res) = gs.ansatz_residual(&g) {
                    assert!(res < 1e-10, "d={dim} omega={omega}: {res}");
                }
            }
        }
    }

    #[test]
    fn spectral_laplacian_agrees_with_closed_form() {
        let g = Geometry::new(1, 40.0, 1024).unwrap();
        let gs = Gausson::new(0.0, 1.0, 1).unwrap();
        let phi = gs.sample(&g).unwrap();
        let lap = laplacian(&phi);
        for (flat, z) in lap.values().iter().enumerate() {
            let r2 = g.centered_radius(flat).powi(2);
            assert!((z.re - gs.laplacian(r2)).abs() < 1e-10);
        }
    }

    #[test]
    fn rescaled_profile() {
        let g = Geometry::new(1, 40.0, 256).unwrap();
        let gs = Gausson::new(0.0, 1.0, 1).unwrap();
        assert_eq!(gs.sample_rescaled(&g, 1.0).unwrap(), gs.sample(&g).unwrap());
        let u = gs.sample_rescaled(&g, 0.8).unwrap();
        let peak = u.values().iter().map(|z| z.re).fold(0.0, f64::max);
        assert!((peak - gs.amplitude()).abs() < 1e-12);
    }

    #[test]
    fn rejects_small_box_and_defocusing() {
        let g = Geometry::new(1, 8.0, 64).unwrap();
        assert!(Gausson::new(0.0, 1.0, 1).unwrap().sample(&g).is_err());
        assert!(Gausson::new(0.0, -1.0, 1).is_err());
    }

    #[test]
    fn initial_error_is_zero() {
        let g = Geometry::new(1, 40.0, 256).unwrap();
        let cfg = SolverConfig::new(Scheme::Strang, 1e-2, 0.1, 5).unwrap();
        let res = gausson_experiment(0.0, 1.0, &g, &cfg).unwrap();
        assert_eq!(res.errors[0], 0.0);
        assert!(res.final_error() < 1e-4);
    }
}
