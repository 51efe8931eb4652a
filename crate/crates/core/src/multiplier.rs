//! Fourier-multiplier operators: the free Schrödinger group, fractional
//! derivatives and spectral derivatives.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{param, Error, Result};
use crate::field::{FieldState, SpectralEngine};
use crate::geometry::Geometry;

/// Multiplier table of `U(t) = exp(i t Delta)`: `exp(-i (2 pi |xi|)^2 t)`.
pub fn propagator_table(geometry: &Geometry, t: f64) -> Vec<Complex64> {
    (0..geometry.len())
        .map(|flat| Complex64::from_polar(1.0, -geometry.wavenumber_sq(flat) * t))
        .collect()
}

/// `propagator_table(geometry, t) - 1`, accurate to a relative ulp even for
/// tiny phases. See [`SpectralEngine::apply_increments`].
pub fn propagator_increments(geometry: &Geometry, t: f64) -> Vec<Complex64> {
    (0..geometry.len())
        .map(|flat| phase_increment(-geometry.wavenumber_sq(flat) * t))
        .collect()
}

/// `e^{i theta} - 1` as `(-2 sin^2(theta/2), sin theta)`.
pub fn phase_increment(theta: f64) -> Complex64 {
    let half = (0.5 * theta).sin();
    Complex64::new(-2.0 * half * half, theta.sin())
}

/// Applies the free propagator `exp(i t Delta)` for time `t`.
pub fn free_propagator(state: &FieldState, t: f64) -> Result<FieldState> {
    if !t.is_finite() {
        return Err(param("t", format!("must be finite, got {t}")));
    }
    check_finite(state)?;
    let g = *state.geometry();
    let mut values = state.values().to_vec();
    SpectralEngine::new(&g).apply_increments(&mut values, &propagator_increments(&g, t));
    Ok(FieldState::from_parts(g, values, state.time() + t))
}

/// `D^s u`, the multiplier `(2 pi |xi|)^s`.
///
/// For `s < 0` the zero mode is discarded (the symbol is singular there), so
/// `D^s` acts as the inverse of `D^{-s}` on mean-zero fields.
pub fn fractional_derivative(state: &FieldState, s: f64) -> Result<FieldState> {
    if !(-2.0..=2.0).contains(&s) {
        return Err(param("s", format!("must lie in [-2, 2], got {s}")));
    }
    check_finite(state)?;
    let g = *state.geometry();
    let table: Vec<Complex64> = (0..g.len())
        .map(|flat| {
            let k = g.wavenumber_sq(flat).sqrt();
            if k == 0.0 && s < 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(k.powf(s), 0.0)
            }
        })
        .collect();
    let mut values = state.values().to_vec();
    SpectralEngine::new(&g).apply_table(&mut values, &table);
    Ok(FieldState::from_parts(g, values, state.time()))
}

/// Spectral partial derivative along `axis`, the multiplier `2 pi i xi_axis`.
pub fn partial_derivative(
    engine: &mut SpectralEngine,
    state: &FieldState,
    axis: usize,
) -> FieldState {
    let g = *state.geometry();
    assert!(axis < g.dim());
    let mut values = state.values().to_vec();
    engine.apply_multiplier(&mut values, |xi| Complex64::new(0.0, 2.0 * PI * xi[axis]));
    FieldState::from_parts(g, values, state.time())
}

/// Spectral gradient, one component per axis.
pub fn gradient(state: &FieldState) -> Vec<FieldState> {
    let mut engine = SpectralEngine::new(state.geometry());
    (0..state.geometry().dim())
        .map(|axis| partial_derivative(&mut engine, state, axis))
        .collect()
}

/// `sum_k (2 pi |xi_k|)^2 |a_k|^2 L^d`, i.e. `||grad u||_{L2}^2`, computed spectrally.
pub fn gradient_norm_sq(engine: &mut SpectralEngine, state: &FieldState) -> f64 {
    let g = *state.geometry();
    let mut coeffs = state.values().to_vec();
    engine.forward_in_place(&mut coeffs);
    let n = g.len() as f64;
    g.volume()
        * coeffs
            .iter()
            .enumerate()
            .map(|(flat, c)| g.wavenumber_sq(flat) * (c / n).norm_sqr())
            .sum::<f64>()
}

/// Spectral Laplacian, the multiplier `-(2 pi |xi|)^2`.
pub fn laplacian(state: &FieldState) -> FieldState {
    let g = *state.geometry();
    let table: Vec<Complex64> = (0..g.len())
        .map(|flat| Complex64::new(-g.wavenumber_sq(flat), 0.0))
        .collect();
    let mut values = state.values().to_vec();
    SpectralEngine::new(&g).apply_table(&mut values, &table);
    FieldState::from_parts(g, values, state.time())
}

fn check_finite(state: &FieldState) -> Result<()> {
    match state
        .values()
        .iter()
        .position(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::forward_transform;
    use crate::norms::lp_norm;
    use proptest::prelude::*;

    fn mode(g: Geometry, k: i64) -> FieldState {
        FieldState::from_fn(g, |x| {
            Complex64::from_polar(1.0, 2.0 * PI * k as f64 * x[0] / g.period(0))
        })
    }

    fn smooth_field(g: Geometry, seed: u64, mean_zero: bool) -> FieldState {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); g.len()];
        for (flat, c) in coeffs.iter_mut().enumerate() {
            let decay = (-(g.wavenumber_sq(flat)) * 0.05).exp();
            *c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * decay;
        }
        if mean_zero {
            coeffs[0] = Complex64::new(0.0, 0.0);
        }
        let spec = crate::field::SpectralField::new(g, coeffs).unwrap();
        crate::field::inverse_transform(&spec).unwrap()
    }

    fn rel_err(a: &FieldState, b: &FieldState) -> f64 {
        lp_norm(&a.sub(b), 2.0) / lp_norm(b, 2.0)
    }

    #[test]
    fn propagator_identity_at_zero() {
        let g = Geometry::new(1, 10.0, 64).unwrap();
        let u = smooth_field(g, 1, false);
        assert!(rel_err(&free_propagator(&u, 0.0).unwrap(), &u) < 1e-14);
    }

    #[test]
    fn eigenmode_phase() {
        let (l, k, t) = (7.0, 3, 0.37);
        let g = Geometry::new(1, l, 32).unwrap();
        let u = mode(g, k);
        let w = 2.0 * PI * k as f64 / l;
        let expected = u.scale(Complex64::from_polar(1.0, -w * w * t));
        assert!(rel_err(&free_propagator(&u, t).unwrap(), &expected) < 1e-12);
    }

    #[test]
    fn second_derivative_is_minus_laplacian() {
        let (l, k) = (3.0, 5);
        let g = Geometry::new(1, l, 64).unwrap();
        let u = mode(g, k);
        let w = 2.0 * PI * k as f64 / l;
        let d2 = fractional_derivative(&u, 2.0).unwrap();
        assert!(rel_err(&d2, &u.scale(Complex64::new(w * w, 0.0))) < 1e-12);
        let lap = laplacian(&u);
        assert!(rel_err(&lap, &u.scale(Complex64::new(-w * w, 0.0))) < 1e-12);
        let half = fractional_derivative(&u, 0.5).unwrap();
        assert!(rel_err(&half, &u.scale(Complex64::new(w.sqrt(), 0.0))) < 1e-12);
    }

    #[test]
    fn zero_order_is_identity_on_mean_zero() {
        let g = Geometry::new(1, 2.0, 32).unwrap();
        let u = smooth_field(g, 4, true);
        assert!(rel_err(&fractional_derivative(&u, 0.0).unwrap(), &u) < 1e-13);
    }

    #[test]
    fn negative_order_kills_mean() {
        let g = Geometry::new(1, 2.0, 32).unwrap();
        let u = FieldState::from_fn(g, |_| Complex64::new(2.0, 0.0));
        let v = fractional_derivative(&u, -1.0).unwrap();
        assert!(lp_norm(&v, 2.0) < 1e-14);
        assert!(fractional_derivative(&u, 2.5).is_err());
    }

    #[test]
    fn gradient_of_mode() {
        let g = Geometry::new(2, 4.0, 16).unwrap();
        let u = FieldState::from_fn(g, |x| {
            Complex64::from_polar(1.0, 2.0 * PI * (x[0] - 2.0 * x[1]) / 4.0)
        });
        let grad = gradient(&u);
        let w = 2.0 * PI / 4.0;
        assert!(rel_err(&grad[0], &u.scale(Complex64::new(0.0, w))) < 1e-12);
        assert!(rel_err(&grad[1], &u.scale(Complex64::new(0.0, -2.0 * w))) < 1e-12);
        let mut engine = SpectralEngine::new(&g);
        let expected = 5.0 * w * w * 16.0;
        assert!((gradient_norm_sq(&mut engine, &u) - expected).abs() < 1e-10 * expected);
        let spec = forward_transform(&u).unwrap();
        assert!((spec.coefficient(&[1, -2]) - 1.0).norm() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn propagator_unitary_and_group_law(seed in 0u64..1000, t in -10.0f64..10.0, s in -10.0f64..10.0, two_d in any::<bool>()) {
            let g = if two_d { Geometry::new(2, 6.0, 16).unwrap() } else { Geometry::new(1, 6.0, 128).unwrap() };
            let u = smooth_field(g, seed, false);
            let ut = free_propagator(&u, t).unwrap();
            let n0 = lp_norm(&u, 2.0);
            prop_assert!((lp_norm(&ut, 2.0) - n0).abs() <= 1e-12 * n0);
            let uts = free_propagator(&ut, s).unwrap();
            let direct = free_propagator(&u, t + s).unwrap();
            prop_assert!(rel_err(&uts, &direct) < 1e-12);
        }

        #[test]
        fn fractional_composition(seed in 0u64..1000, s1 in -1.0f64..1.0, s2 in -1.0f64..1.0) {
            let g = Geometry::new(1, 5.0, 64).unwrap();
            let u = smooth_field(g, seed, true);
            let composed = fractional_derivative(&fractional_derivative(&u, s2).unwrap(), s1).unwrap();
            let direct = fractional_derivative(&u, s1 + s2).unwrap();
            prop_assert!(rel_err(&composed, &direct) < 1e-10);
        }
    }
}
