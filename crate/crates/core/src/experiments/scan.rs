//! Parameter scans and log-log slope fits.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// A measured quantity over a parameter sweep with its fitted power law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub parameter: String,
    pub values: Vec<f64>,
    pub measured: Vec<f64>,
    /// Least-squares slope of `log measured` against `log values`.
    pub slope: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
}

impl ScanResult {
    pub fn new(parameter: &str, values: Vec<f64>, measured: Vec<f64>) -> Result<Self> {
        let (slope, residual) = fit_loglog(&values, &measured)?;
        Ok(ScanResult {
            parameter: parameter.to_string(),
            values,
            measured,
            slope,
            residual,
        })
    }

    /// `max(measured) / min(measured)`.
    pub fn spread(&self) -> f64 {
        let max = self.measured.iter().cloned().fold(f64::MIN, f64::max);
        let min = self.measured.iter().cloned().fold(f64::MAX, f64::min);
        max / min
    }

    /// Largest ratio between consecutive measurements.
    pub fn max_step_growth(&self) -> f64 {
        self.measured
            .windows(2)
            .map(|w| w[1] / w[0])
            .fold(f64::MIN, f64::max)
    }
}

/// Least-squares line through `(ln x, ln y)`; returns `(slope, rms residual)`.
pub fn fit_loglog(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(param("scan", "parameter and measurement lengths differ"));
    }
    if x.len() < 3 {
        return Err(param(
            "scan",
            format!("a slope fit needs at least 3 points, got {}", x.len()),
        ));
    }
    if x.iter().chain(y).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(param("scan", "log-log fit needs positive finite values"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(param("scan", "parameter values must not all coincide"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    Ok((slope, (rss / n).sqrt()))
}
