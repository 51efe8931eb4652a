//! Rectangular periodic grids and the Fourier frequency convention.
//!
//! A grid of `N` points per axis over a period `L` samples `x_j = j L / N`.
//! Frequencies are indexed by `k` in `{-N/2, ..., N/2 - 1}` and carry the
//! physical frequency `xi_k = k / L` (cycles per unit length), so a plane
//! wave `exp(2 pi i k x / L)` has wavenumber `2 pi xi_k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimension, per-axis period and per-axis sample count of a periodic box.
///
/// Axes beyond `dim` are inert (one point, unit period) so the struct stays
/// `Copy` and indexable for both supported dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    dim: usize,
    period: [f64; 2],
    points: [usize; 2],
}

impl Geometry {
    /// Uniform box: every axis has period `period` and `points` samples.
    pub fn new(dim: usize, period: f64, points: usize) -> Result<Self> {
        Self::with_axes(&vec![period; dim], &vec![points; dim])
    }

    /// Box with independently chosen axes. The slice lengths give the dimension.
    pub fn with_axes(periods: &[f64], points: &[usize]) -> Result<Self> {
        let dim = periods.len();
        if !(1..=2).contains(&dim) {
            return Err(Error::Geometry(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        if points.len() != dim {
            return Err(Error::Geometry(format!(
                "{} periods but {} point counts",
                dim,
                points.len()
            )));
        }
        let mut geom = Geometry {
            dim,
            period: [1.0; 2],
            points: [1; 2],
        };
        for axis in 0..dim {
            let (l, n) = (periods[axis], points[axis]);
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::Geometry(format!("period must be positive, got {l}")));
            }
            if n < 8 || n % 2 != 0 {
                return Err(Error::Geometry(format!(
                    "point count must be even and at least 8, got {n}"
                )));
            }
            geom.period[axis] = l;
            geom.points[axis] = n;
        }
        Ok(geom)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self, axis: usize) -> f64 {
        self.period[axis]
    }

    pub fn points(&self, axis: usize) -> usize {
        self.points[axis]
    }

    pub fn periods(&self) -> &[f64] {
        &self.period[..self.dim]
    }

    pub fn point_counts(&self) -> &[usize] {
        &self.points[..self.dim]
    }

    /// Total number of samples, `prod N_j`.
    pub fn len(&self) -> usize {
        self.points[..self.dim].iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing along `axis`.
    pub fn spacing(&self, axis: usize) -> f64 {
        self.period[axis] / self.points[axis] as f64
    }

    /// Volume of one grid cell, the rectangle-rule quadrature weight.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    /// Volume of the whole box, `prod L_j`.
    pub fn volume(&self) -> f64 {
        self.period[..self.dim].iter().product()
    }

    /// Position `x_j = j L / N` of sample `j` along `axis`.
    pub fn coordinate(&self, axis: usize, j: usize) -> f64 {
        j as f64 * self.spacing(axis)
    }

    /// Position relative to the box centre, `x_j - L / 2`.
    pub fn centered_coordinate(&self, axis: usize, j: usize) -> f64 {
        self.coordinate(axis, j) - 0.5 * self.period[axis]
    }

    /// Signed frequency index for storage index `j` (FFT ordering).
    pub fn frequency_index(&self, axis: usize, j: usize) -> i64 {
        let n = self.points[axis];
        if j < n / 2 {
            j as i64
        } else {
            j as i64 - n as i64
        }
    }

    /// Physical frequency `xi = k / L` for storage index `j` along `axis`.
    pub fn frequency(&self, axis: usize, j: usize) -> f64 {
        self.frequency_index(axis, j) as f64 / self.period[axis]
    }

    /// Splits a row-major flat index into per-axis indices.
    pub fn unflatten(&self, flat: usize) -> [usize; 2] {
        if self.dim == 1 {
            [flat, 0]
        } else {
            [flat / self.points[1], flat % self.points[1]]
        }
    }

    pub fn flatten(&self, idx: [usize; 2]) -> usize {
        if self.dim == 1 {
            idx[0]
        } else {
            idx[0] * self.points[1] + idx[1]
        }
    }

    /// Frequency vector `xi` at a flat spectral index.
    pub fn frequency_vector(&self, flat: usize) -> [f64; 2] {
        let idx = self.unflatten(flat);
        let mut xi = [0.0; 2];
        for (axis, x) in xi.iter_mut().enumerate().take(self.dim) {
            *x = self.frequency(axis, idx[axis]);
        }
        xi
    }

    /// `(2 pi |xi|)^2` at a flat spectral index; the symbol of `-Delta`.
    pub fn wavenumber_sq(&self, flat: usize) -> f64 {
        let xi = self.frequency_vector(flat);
        let two_pi = 2.0 * std::f64::consts::PI;
        xi[..self.dim].iter().map(|x| (two_pi * x).powi(2)).sum()
    }

    /// Centered position vector of the sample at a flat index.
    pub fn centered_position(&self, flat: usize) -> [f64; 2] {
        let idx = self.unflatten(flat);
        let mut x = [0.0; 2];
        for (axis, v) in x.iter_mut().enumerate().take(self.dim) {
            *v = self.centered_coordinate(axis, idx[axis]);
        }
        x
    }

    /// Euclidean distance of a flat sample from the box centre.
    pub fn centered_radius(&self, flat: usize) -> f64 {
        let x = self.centered_position(flat);
        x[..self.dim].iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest ball radius fully inside the box.
    pub fn inner_radius(&self) -> f64 {
        self.periods().iter().cloned().fold(f64::INFINITY, f64::min) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_spacing() {
        let g = Geometry::new(1, 2.0 * std::f64::consts::PI, 8).unwrap();
        assert_eq!(g.len(), 8);
        assert!((g.spacing(0) - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!((g.coordinate(0, 3) - 3.0 * std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn two_dimensional_shape() {
        let g = Geometry::new(2, 40.0, 64).unwrap();
        assert_eq!(g.len(), 64 * 64);
        assert_eq!(g.point_counts(), &[64, 64]);
        assert_eq!(g.unflatten(65), [1, 1]);
        assert_eq!(g.flatten([1, 1]), 65);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Geometry::new(1, 1.0, 7).is_err());
        assert!(Geometry::new(1, 1.0, 6).is_err());
        assert!(Geometry::new(3, 1.0, 8).is_err());
        assert!(Geometry::new(0, 1.0, 8).is_err());
        assert!(Geometry::new(1, 0.0, 8).is_err());
        assert!(Geometry::new(1, -2.0, 8).is_err());
        assert!(Geometry::new(1, f64::NAN, 8).is_err());
    }

    #[test]
    fn frequency_set() {
        let g = Geometry::new(1, 4.0, 8).unwrap();
        let ks: Vec<i64> = (0..8).map(|j| g.frequency_index(0, j)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert!((g.frequency(0, 5) + 0.75).abs() < 1e-15);
    }
}
