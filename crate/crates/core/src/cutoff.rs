//! Smooth cutoff profiles: the spatial localiser `phi_R` and the complex-plane
//! cutoff `theta` that splits the nonlinearity.
//!
//! Both are built from the quintic smoothstep `q(r) = 1 - (6r^5 - 15r^4 + 10r^3)`,
//! which is C2, equals 1 for `r <= 0` and 0 for `r >= 1`, and takes the value
//! 1/2 at `r = 1/2`. `phi_R` maps the annulus `R/2 <= |x| <= R` onto `[0, 1]`;
//! `theta` maps `1/2 <= |z| <= 1`.

use num_complex::Complex64;

use crate::geometry::Geometry;

/// `q(r)`, clamped outside `[0, 1]`.
pub fn smoothstep(r: f64) -> f64 {
    if r <= 0.0 {
        1.0
    } else if r >= 1.0 {
        0.0
    } else {
        1.0 - r * r * r * (10.0 + r * (-15.0 + 6.0 * r))
    }
}

/// `q'(r) = -30 r^2 (r - 1)^2`.
pub fn smoothstep_d1(r: f64) -> f64 {
    if r <= 0.0 || r >= 1.0 {
        0.0
    } else {
        -30.0 * r * r * (r - 1.0) * (r - 1.0)
    }
}

/// `q''(r) = -60 r (2r - 1)(r - 1)`.
pub fn smoothstep_d2(r: f64) -> f64 {
    if r <= 0.0 || r >= 1.0 {
        0.0
    } else {
        -60.0 * r * (2.0 * r - 1.0) * (r - 1.0)
    }
}

/// `phi_R(x) = phi(x / R)`: 1 on `|x| <= R/2`, 0 on `|x| >= R`.
pub fn spatial_cutoff(x: &[f64], radius: f64) -> f64 {
    smoothstep(2.0 * norm(x) / radius - 1.0)
}

/// `grad phi_R(x)`; only the first `x.len()` components are meaningful.
pub fn spatial_cutoff_gradient(x: &[f64], radius: f64) -> [f64; 2] {
    let r = norm(x);
    let mut out = [0.0; 2];
    if r == 0.0 {
        return out;
    }
    let radial = smoothstep_d1(2.0 * r / radius - 1.0) * 2.0 / radius;
    for (o, xi) in out.iter_mut().zip(x) {
        *o = radial * xi / r;
    }
    out
}

/// `Delta phi_R(x) = phi'' + (d - 1) phi' / |x|` for the radial profile.
pub fn spatial_cutoff_laplacian(x: &[f64], radius: f64) -> f64 {
    let r = norm(x);
    let rho = 2.0 * r / radius - 1.0;
    if rho <= 0.0 || rho >= 1.0 {
        return 0.0;
    }
    let scale = 2.0 / radius;
    let second = smoothstep_d2(rho) * scale * scale;
    let first = smoothstep_d1(rho) * scale;
    second + (x.len() as f64 - 1.0) * first / r
}

/// `theta(z)`: 1 on `|z| <= 1/2`, 0 on `|z| >= 1`.
pub fn complex_cutoff(z: Complex64) -> f64 {
    smoothstep(2.0 * z.norm() - 1.0)
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `phi_R` and its derivatives sampled on a grid centred in the box.
#[derive(Debug, Clone)]
pub struct SampledCutoff {
    pub radius: f64,
    pub value: Vec<f64>,
    pub gradient: Vec<[f64; 2]>,
    pub laplacian: Vec<f64>,
}

impl SampledCutoff {
    pub fn new(geometry: &Geometry, radius: f64) -> Self {
        let d = geometry.dim();
        let n = geometry.len();
        let mut value = Vec::with_capacity(n);
        let mut gradient = Vec::with_capacity(n);
        let mut laplacian = Vec::with_capacity(n);
        for flat in 0..n {
            let x = geometry.centered_position(flat);
            value.push(spatial_cutoff(&x[..d], radius));
            gradient.push(spatial_cutoff_gradient(&x[..d], radius));
            laplacian.push(spatial_cutoff_laplacian(&x[..d], radius));
        }
        SampledCutoff {
            radius,
            value,
            gradient,
            laplacian,
        }
    }
}

/// Sharp grid indicator of the centred ball `|x| < R`.
pub fn ball_indicator(geometry: &Geometry, radius: f64) -> Vec<bool> {
    (0..geometry.len())
        .map(|flat| geometry.centered_radius(flat) < radius)
        .collect()
}
