//! Space-time `L^4` bound for the free group on the one-dimensional torus:
//! `||e^{it d_x^2} u0||_{L^4([0,T] x T)} <= C ||u0||_{L^2}` uniformly in the
//! resolution.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{param, Error, Result};
use crate::field::{forward_transform, FieldState, SpectralEngine};
use crate::geometry::Geometry;
use crate::norms::sobolev_norm;

use super::random_field::{make_random_field, RandomFieldSpec};
use super::scan::ScanResult;

/// Allowed growth of the maximal ratio per resolution step.
pub const GROWTH_TOLERANCE: f64 = 0.10;

/// Norm of `u0` in the denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZygmundNormalization {
    /// `||u0||_{L^2}`, the true estimate.
    L2,
    /// `||u0||_{H^{-1/2}}`: a scaling the estimate does not support, kept as
    /// a negative control.
    NegativeHalf,
}

impl std::str::FromStr for ZygmundNormalization {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "l2" => Ok(ZygmundNormalization::L2),
            "negative_half" => Ok(ZygmundNormalization::NegativeHalf),
            other => Err(format!(
                "unknown normalization `{other}` (expected l2 or negative_half)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZygmundOptions {
    pub period: f64,
    pub t_final: f64,
    pub samples: usize,
    pub seed: u64,
    pub normalization: ZygmundNormalization,
    /// Adds the flat-spectrum datum (all resolved modes with equal weight)
    /// to each resolution's sample set.
    pub flat_probe: bool,
}

impl Default for ZygmundOptions {
    fn default() -> Self {
        ZygmundOptions {
            period: 2.0 * PI,
            t_final: 1.0,
            samples: 50,
            seed: 0,
            normalization: ZygmundNormalization::L2,
            flat_probe: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZygmundResult {
    pub scan: ScanResult,
    /// `max ratio(N_{i+1}) / max ratio(N_i) - 1`.
    pub growth: Vec<f64>,
    pub verdict: bool,
}

/// Time samples for `[0, t]`: at least 256 intervals and eight per period of
/// the fastest resolved mode.
pub fn time_samples(geometry: &Geometry, t: f64) -> usize {
    let omega_max = (0..geometry.len())
        .map(|flat| geometry.wavenumber_sq(flat))
        .fold(0.0, f64::max);
    let resolved = (8.0 * t.abs() * omega_max / (2.0 * PI)).ceil() as usize;
    resolved.max(256)
}

/// `||U(t) u0||_{L^4([0, t_final] x T)}`, trapezoid in time over `intervals`
/// steps and rectangle rule in space.
pub fn spacetime_l4(u0: &FieldState, t_final: f64, intervals: usize) -> Result<f64> {
    if intervals == 0 {
        return Err(param("intervals", "must be at least 1"));
    }
    let g = *u0.geometry();
    let coeffs = forward_transform(u0)?.coeffs().to_vec();
    let omega: Vec<f64> = (0..g.len()).map(|flat| g.wavenumber_sq(flat)).collect();
    let mut engine = SpectralEngine::new(&g);
    let mut buf = vec![Complex64::new(0.0, 0.0); g.len()];
    let h = t_final / intervals as f64;
    let cell = g.cell_volume();
    let mut total = 0.0;
    for j in 0..=intervals {
        let t = j as f64 * h;
        for ((b, c), w) in buf.iter_mut().zip(&coeffs).zip(&omega) {
            *b = c * Complex64::from_polar(1.0, -w * t);
        }
        engine.inverse_in_place(&mut buf);
        let slice: f64 = buf.iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>() * cell;
        let weight = if j == 0 || j == intervals { 0.5 } else { 1.0 };
        total += weight * h * slice;
    }
    Ok(total.powf(0.25))
}

/// Space-time `L^4` norm over the given norm of `u0`.
pub fn zygmund_ratio(
    u0: &FieldState,
    t_final: f64,
    normalization: ZygmundNormalization,
) -> Result<f64> {
    if u0.geometry().dim() != 1 {
        return Err(Error::Geometry("the L4 estimate is one-dimensional".into()));
    }
    let denom = match normalization {
        ZygmundNormalization::L2 => sobolev_norm(u0, 0.0)?,
        ZygmundNormalization::NegativeHalf => sobolev_norm(u0, -0.5)?,
    };
    if denom == 0.0 {
        return Err(Error::Degenerate("zero initial datum".into()));
    }
    let n = time_samples(u0.geometry(), t_final);
    Ok(spacetime_l4(u0, t_final, n)? / denom)
}

fn flat_spectrum(geometry: &Geometry) -> FieldState {
    let n = geometry.points(0) as i64;
    let l = geometry.period(0);
    FieldState::from_fn(*geometry, |x| {
        (-(n / 2) + 1..n / 2)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 * x[0] / l))
            .sum()
    })
}

/// Maximal ratio over seeded random `L^2` data at each resolution.
pub fn zygmund_scan(resolutions: &[usize], options: &ZygmundOptions) -> Result<ZygmundResult> {
    if options.samples == 0 && !options.flat_probe {
        return Err(param("samples", "need at least one datum per resolution"));
    }
    if resolutions.windows(2).any(|w| w[1] <= w[0]) {
        return Err(param("resolutions", "must be strictly increasing"));
    }
    let mut maxima = Vec::with_capacity(resolutions.len());
    for &n in resolutions {
        let g = Geometry::new(1, options.period, n)?;
        let mut ratios: Vec<f64> = (0..options.samples)
            .into_par_iter()
            .map(|i| {
                let spec = RandomFieldSpec::new(0.0, 1.0, options.seed.wrapping_add(i as u64));
                let u0 = make_random_field(&spec, &g)?;
                zygmund_ratio(&u0, options.t_final, options.normalization)
            })
            .collect::<Result<_>>()?;
        if options.flat_probe {
            ratios.push(zygmund_ratio(
                &flat_spectrum(&g),
                options.t_final,
                options.normalization,
            )?);
        }
        maxima.push(ratios.into_iter().fold(0.0, f64::max));
    }
    let values = resolutions.iter().map(|&n| n as f64).collect();
    let scan = ScanResult::new("N", values, maxima)?;
    let growth: Vec<f64> = scan
        .measured
        .windows(2)
        .map(|w| w[1] / w[0] - 1.0)
        .collect();
    let verdict = growth.iter().all(|g| *g < GROWTH_TOLERANCE);
    Ok(ZygmundResult {
        scan,
        growth,
        verdict,
    })
}
