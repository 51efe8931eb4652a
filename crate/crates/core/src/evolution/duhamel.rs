//! Trapezoid quadrature of `Phi[f](t) = int_0^t U(t - tau) f(tau) dtau` and of
//! the inner-product identity for `||int_0^t f||^2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::field::{FieldState, SpectralEngine};
use crate::geometry::Geometry;
use crate::multiplier::propagator_increments;
use crate::norms::inner_product;

fn check_samples(samples: &[FieldState], t: f64) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::Degenerate(format!(
            "Duhamel quadrature needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    if !t.is_finite() {
        return Err(param("t", "must be finite"));
    }
    let g = samples[0].geometry();
    if samples.iter().any(|s| s.geometry() != g) {
        return Err(Error::Geometry("samples live on different grids".into()));
    }
    Ok(t / (samples.len() - 1) as f64)
}

/// Streaming form of the trapezoid recursion
/// `Phi_{n+1} = U(h) Phi_n + h/2 (U(h) f_n + f_{n+1})`, for sources too long
/// to hold in memory.
pub struct DuhamelAccumulator {
    geometry: Geometry,
    h: f64,
    table: Vec<Complex64>,
    engine: SpectralEngine,
    acc: Vec<Complex64>,
    previous: Option<Vec<Complex64>>,
    steps: usize,
}

impl DuhamelAccumulator {
    pub fn new(geometry: &Geometry, h: f64) -> Result<Self> {
        if !h.is_finite() {
            return Err(param("h", format!("must be finite, got {h}")));
        }
        Ok(DuhamelAccumulator {
            geometry: *geometry,
            h,
            table: propagator_increments(geometry, h),
            engine: SpectralEngine::new(geometry),
            acc: vec![Complex64::new(0.0, 0.0); geometry.len()],
            previous: None,
            steps: 0,
        })
    }

    /// Feeds the next source sample; the first call sets `f(0)`.
    pub fn push(&mut self, f: &FieldState) -> Result<()> {
        if f.geometry() != &self.geometry {
            return Err(Error::Geometry(
                "source sample lives on a different grid".into(),
            ));
        }
        let half = 0.5 * self.h;
        if let Some(prev) = self.previous.as_mut() {
            for (a, p) in self.acc.iter_mut().zip(prev.iter()) {
                *a += p * half;
            }
            self.engine.apply_increments(&mut self.acc, &self.table);
            for (a, v) in self.acc.iter_mut().zip(f.values()) {
                *a += v * half;
            }
            prev.copy_from_slice(f.values());
            self.steps += 1;
        } else {
            self.previous = Some(f.values().to_vec());
        }
        Ok(())
    }

    /// `Phi[f]` at the time of the latest sample.
    pub fn current(&self) -> FieldState {
        FieldState::from_parts(self.geometry, self.acc.clone(), self.steps as f64 * self.h)
    }
}

/// `Phi[f](t_n)` at every sample time `t_n = n t / (len - 1)`.
///
/// Uses the recursion `Phi_{n+1} = U(h) Phi_n + h/2 (U(h) f_n + f_{n+1})`,
/// which reproduces the composite trapezoid rule at each `t_n` exactly.
pub fn duhamel_series(samples: &[FieldState], t: f64) -> Result<Vec<FieldState>> {
    let h = check_samples(samples, t)?;
    let g = *samples[0].geometry();
    let mut acc = DuhamelAccumulator::new(&g, h)?;
    let mut out = Vec::with_capacity(samples.len());
    for f in samples {
        acc.push(f)?;
        out.push(acc.current());
    }
    Ok(out)
}

/// `Phi[f](t)` by composite trapezoid over equispaced samples on `[0, t]`.
pub fn duhamel(samples: &[FieldState], t: f64) -> Result<FieldState> {
    Ok(duhamel_series(samples, t)?.pop().expect("non-empty"))
}

/// Both sides of `||int_0^t f||^2 = 2 Re int_0^t (f(tau), int_0^tau f) dtau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma25Result {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs| / max(lhs, 1e-300)`.
    pub gap: f64,
}

/// Evaluates both sides with the same trapezoid rule in time.
pub fn lemma25_check(samples: &[FieldState], t: f64) -> Result<Lemma25Result> {
    let h = check_samples(samples, t)?;
    let g = *samples[0].geometry();
    let mut running = FieldState::zeros(g);
    let mut integrand = Vec::with_capacity(samples.len());
    integrand.push(inner_product(&samples[0], &running).re);
    for n in 0..samples.len() - 1 {
        running = running.zip_with(&samples[n], |a, f| a + f * (0.5 * h));
        running = running.zip_with(&samples[n + 1], |a, f| a + f * (0.5 * h));
        integrand.push(inner_product(&samples[n + 1], &running).re);
    }
    let lhs = inner_product(&running, &running).re;
    let outer: f64 = integrand.windows(2).map(|w| 0.5 * h * (w[0] + w[1])).sum();
    let rhs = 2.0 * outer;
    Ok(Lemma25Result {
        lhs,
        rhs,
        gap: (lhs - rhs).abs() / lhs.max(1e-300),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Geometry;
    use crate::norms::{l2_distance, lp_norm};
    use std::f64::consts::PI;

    fn mode(g: Geometry, k: f64) -> FieldState {
        FieldState::from_fn(g, |x| {
            Complex64::from_polar(1.0, 2.0 * PI * k * x[0] / g.period(0))
        })
    }

    #[test]
    fn zero_source() {
        let g = Geometry::new(1, 3.0, 16).unwrap();
        let fs = vec![FieldState::zeros(g); 5];
        assert_eq!(lp_norm(&duhamel(&fs, 1.0).unwrap(), 2.0), 0.0);
        assert_eq!(lemma25_check(&fs, 1.0).unwrap().gap, 0.0);
        assert!(duhamel(&fs[..1], 1.0).is_err());
        assert!(lemma25_check(&[], 1.0).is_err());
    }

    fn eigenmode_error(n: usize) -> f64 {
        // f(tau) = e_k: Phi[f](t) = e_k (e^{-i w t} - 1) / (-i w)
        let (l, k, t) = (4.0, 1.0, 1.3);
        let g = Geometry::new(1, l, 32).unwrap();
        let e = mode(g, k);
        let w = (2.0 * PI * k / l).powi(2);
        let fs = vec![e.clone(); n];
        let got = duhamel(&fs, t).unwrap();
        let factor = (Complex64::from_polar(1.0, -w * t) - 1.0) / Complex64::new(0.0, -w);
        l2_distance(&got, &e.scale(factor)) / lp_norm(&e.scale(factor), 2.0)
    }

    #[test]
    fn eigenmode_closed_form_and_order() {
        assert!(eigenmode_error(2049) < 1e-6);
        for n in [33, 65, 129, 257] {
            let ratio = eigenmode_error(n) / eigenmode_error(2 * n - 1);
            assert!(ratio >= 3.5, "n = {n}: ratio {ratio}");
        }
    }

    #[test]
    fn series_matches_direct_sum() {
        let g = Geometry::new(1, 2.0, 16).unwrap();
        let fs: Vec<FieldState> = (0..6)
            .map(|j| {
                FieldState::from_fn(g, |x| {
                    Complex64::new((x[0] + j as f64).sin(), 0.1 * j as f64)
                })
            })
            .collect();
        let t = 0.5;
        let h = t / 5.0;
        let series = duhamel_series(&fs, t).unwrap();
        for (n, phi_n) in series.iter().enumerate() {
            let mut direct = FieldState::zeros(g);
            for (j, f) in fs.iter().enumerate().take(n + 1) {
                let w = if j == 0 || j == n { 0.5 * h } else { h };
                let w = if n == 0 { 0.0 } else { w };
                let prop = crate::multiplier::free_propagator(f, (n - j) as f64 * h).unwrap();
                direct = direct.add(&prop.scale(Complex64::new(w, 0.0)));
            }
            assert!(l2_distance(phi_n, &direct) < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn constant_source_identity_is_exact() {
        let g = Geometry::new(1, 2.0, 16).unwrap();
        let f = FieldState::from_fn(g, |x| Complex64::new(x[0].cos(), 1.0));
        let t = 0.8;
        let res = lemma25_check(&vec![f.clone(); 9], t).unwrap();
        let expected = t * t * lp_norm(&f, 2.0).powi(2);
        assert!((res.lhs - expected).abs() < 1e-13 * expected);
        assert!(res.gap < 1e-14);
    }
}
