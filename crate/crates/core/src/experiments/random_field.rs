//! Seeded random initial data with a prescribed Sobolev norm.
//!
//! Coefficients are `a_k = (1 + (2 pi |xi_k|)^2)^{-slope/2} zeta_k` with standard
//! complex Gaussian `zeta_k`. The Gaussians are drawn shell by shell in
//! increasing `max_j |k_j|`, so two grids sharing a seed agree on every mode
//! the coarser one resolves (except the Nyquist shell). Refinement studies
//! therefore compare the same underlying datum.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::field::{inverse_transform, FieldState, SpectralField};
use crate::geometry::Geometry;
use crate::norms::sobolev_norm;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomFieldSpec {
    pub target_s: f64,
    pub target_norm: f64,
    pub seed: u64,
    /// Decay exponent of the coefficients; `None` means `s + d/2 + 0.1`.
    pub spectral_slope: Option<f64>,
}

impl RandomFieldSpec {
    pub fn new(target_s: f64, target_norm: f64, seed: u64) -> Self {
        RandomFieldSpec {
            target_s,
            target_norm,
            seed,
            spectral_slope: None,
        }
    }

    pub fn with_slope(mut self, slope: f64) -> Self {
        self.spectral_slope = Some(slope);
        self
    }

    pub fn slope(&self, dim: usize) -> f64 {
        self.spectral_slope
            .unwrap_or(self.target_s + dim as f64 / 2.0 + 0.1)
    }
}

/// Storage indices in shell order: shell `m` holds the frequencies with
/// `max_j |k_j| = m`, sorted lexicographically by signed index.
fn shell_order(geometry: &Geometry) -> Vec<usize> {
    let d = geometry.dim();
    let mut keyed: Vec<(i64, [i64; 2], usize)> = (0..geometry.len())
        .map(|flat| {
            let idx = geometry.unflatten(flat);
            let mut k = [0i64; 2];
            for axis in 0..d {
                k[axis] = geometry.frequency_index(axis, idx[axis]);
            }
            let shell = k[..d].iter().map(|v| v.abs()).max().unwrap();
            (shell, k, flat)
        })
        .collect();
    keyed.sort_by_key(|&(shell, k, _)| (shell, k));
    keyed.into_iter().map(|(_, _, flat)| flat).collect()
}

pub fn make_random_field(spec: &RandomFieldSpec, geometry: &Geometry) -> Result<FieldState> {
    let d = geometry.dim() as f64;
    let slope = spec.slope(geometry.dim());
    if !(0.0..=2.0).contains(&spec.target_s) {
        return Err(param(
            "target_s",
            format!("must lie in [0, 2], got {}", spec.target_s),
        ));
    }
    if slope <= spec.target_s + d / 2.0 {
        return Err(param(
            "spectral_slope",
            format!(
                "must exceed s + d/2 = {} for a summable H^s norm, got {slope}",
                spec.target_s + d / 2.0
            ),
        ));
    }
    if !(spec.target_norm.is_finite() && spec.target_norm >= 0.0) {
        return Err(param("target_norm", "must be finite and non-negative"));
    }
    if spec.target_norm == 0.0 {
        return Ok(FieldState::zeros(*geometry));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); geometry.len()];
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    for flat in shell_order(geometry) {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        let weight = (1.0 + geometry.wavenumber_sq(flat)).powf(-0.5 * slope);
        coeffs[flat] = Complex64::new(re, im) * (scale * weight);
    }
    let raw = inverse_transform(&SpectralField::new(*geometry, coeffs)?)?;
    let norm = sobolev_norm(&raw, spec.target_s)?;
    Ok(raw.scale(Complex64::new(spec.target_norm / norm, 0.0)))
}

/// A random field multiplied by the centred Gaussian envelope
/// `e^{-|x|^2 / (2 w^2)}` and renormalised. The envelope is smooth, so the
/// product keeps the roughness of the field while having finite norm on the
/// whole space rather than only per unit volume.
pub fn make_localized_field(
    spec: &RandomFieldSpec,
    geometry: &Geometry,
    envelope_width: f64,
) -> Result<FieldState> {
    if !(envelope_width.is_finite() && envelope_width > 0.0) {
        return Err(param("envelope_width", "must be positive"));
    }
    let raw = make_random_field(
        &RandomFieldSpec {
            target_norm: 1.0,
            ..*spec
        },
        geometry,
    )?;
    if spec.target_norm == 0.0 {
        return Ok(raw);
    }
    let d = geometry.dim();
    let envelope = FieldState::from_centered_fn(*geometry, |x| {
        let r2: f64 = x[..d].iter().map(|v| v * v).sum();
        Complex64::new((-0.5 * r2 / (envelope_width * envelope_width)).exp(), 0.0)
    });
    let u = raw.zip_with(&envelope, |a, b| a * b);
    let norm = sobolev_norm(&u, spec.target_s)?;
    Ok(u.scale(Complex64::new(spec.target_norm / norm, 0.0)))
}

/// `f(t_n) = sum_m cos(omega_m t_n + theta_m) g_m` at `steps + 1` equispaced
/// times on `[0, t_final]`, with `modes` smooth random profiles `g_m` and
/// seeded frequencies `omega_m` in `[0, 2 pi)`.
pub fn smooth_time_family(
    geometry: &Geometry,
    seed: u64,
    modes: usize,
    steps: usize,
    t_final: f64,
) -> Result<Vec<FieldState>> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut profiles = Vec::with_capacity(modes);
    let mut phases = Vec::with_capacity(modes);
    for m in 0..modes {
        let spec = RandomFieldSpec::new(1.0, 1.0, seed.wrapping_add(1 + m as u64)).with_slope(4.0);
        profiles.push(make_random_field(&spec, geometry)?);
        let omega = rng.random_range(0.0..2.0 * std::f64::consts::PI);
        let theta = rng.random_range(0.0..2.0 * std::f64::consts::PI);
        phases.push((omega, theta));
    }
    Ok((0..=steps)
        .map(|n| {
            let t = t_final * n as f64 / steps as f64;
            let mut f = FieldState::zeros(*geometry).with_time(t);
            for (g, &(omega, theta)) in profiles.iter().zip(&phases) {
                f = f.add(&g.scale(Complex64::new((omega * t + theta).cos(), 0.0)));
            }
            f
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::forward_transform;

    #[test]
    fn zero_norm_gives_zero_field() {
        let g = Geometry::new(1, 10.0, 64).unwrap();
        let u = make_random_field(&RandomFieldSpec::new(0.5, 0.0, 1), &g).unwrap();
        assert!(u.values().iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn deterministic_per_seed() {
        let g = Geometry::new(2, 10.0, 32).unwrap();
        let spec = RandomFieldSpec::new(1.0, 2.0, 42);
        let a = make_random_field(&spec, &g).unwrap();
        let b = make_random_field(&spec, &g).unwrap();
        assert_eq!(a, b);
        let c = make_random_field(&RandomFieldSpec::new(1.0, 2.0, 43), &g).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn normalised_in_target_norm() {
        for (dim, s) in [(1, 0.0), (1, 0.5), (1, 1.0), (2, 0.5), (2, 1.0)] {
            let n = if dim == 1 { 256 } else { 32 };
            let g = Geometry::new(dim, 20.0, n).unwrap();
            let u = make_random_field(&RandomFieldSpec::new(s, 3.5, 7), &g).unwrap();
            let got = sobolev_norm(&u, s).unwrap();
            assert!((got - 3.5).abs() < 1e-10 * 3.5, "d={dim} s={s}: {got}");
        }
    }

    #[test]
    fn localized_field_is_normalised_and_decays() {
        let g = Geometry::new(1, 64.0, 512).unwrap();
        let u = make_localized_field(&RandomFieldSpec::new(0.5, 2.0, 9), &g, 3.0).unwrap();
        assert!((sobolev_norm(&u, 0.5).unwrap() - 2.0).abs() < 1e-10);
        let edge = g.flatten([0, 0]);
        assert!(u.values()[edge].norm() < 1e-20);
    }

    #[test]
    fn smooth_family_shape() {
        let g = Geometry::new(1, 8.0, 32).unwrap();
        let fs = smooth_time_family(&g, 3, 4, 16, 2.0).unwrap();
        assert_eq!(fs.len(), 17);
        assert!((fs[16].time() - 2.0).abs() < 1e-15);
        assert_eq!(fs, smooth_time_family(&g, 3, 4, 16, 2.0).unwrap());
    }

    #[test]
    fn rejects_non_summable_slope() {
        let g = Geometry::new(1, 20.0, 64).unwrap();
        let spec = RandomFieldSpec::new(1.0, 1.0, 0).with_slope(1.4);
        assert!(make_random_field(&spec, &g).is_err());
    }

    #[test]
    fn nested_across_resolutions() {
        let coarse = Geometry::new(1, 2.0 * std::f64::consts::PI, 32).unwrap();
        let fine = Geometry::new(1, 2.0 * std::f64::consts::PI, 128).unwrap();
        let spec = RandomFieldSpec::new(0.0, 1.0, 5);
        // compare unnormalised shapes through coefficient ratios
        let a = forward_transform(&make_random_field(&spec, &coarse).unwrap()).unwrap();
        let b = forward_transform(&make_random_field(&spec, &fine).unwrap()).unwrap();
        let ratio = b.coefficient(&[0]) / a.coefficient(&[0]);
        for k in -15..16 {
            let expected = a.coefficient(&[k]) * ratio;
            assert!((b.coefficient(&[k]) - expected).norm() < 1e-12, "k = {k}");
        }
    }
}
