//! Discrete Lebesgue and Sobolev norms and the L2 inner product.

use num_complex::Complex64;

use crate::error::{param, Result};
use crate::field::{forward_transform, FieldState};

/// Rectangle-rule `L^p` norm; `p = infinity` returns the largest modulus.
pub fn lp_norm(state: &FieldState, p: f64) -> f64 {
    let values = state.values();
    if p.is_infinite() {
        return values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    assert!(p >= 1.0, "lp_norm requires p >= 1, got {p}");
    let cell = state.geometry().cell_volume();
    let sum: f64 = if p == 2.0 {
        values.iter().map(|z| z.norm_sqr()).sum()
    } else {
        values.iter().map(|z| z.norm().powf(p)).sum()
    };
    (cell * sum).powf(1.0 / p)
}

/// Inhomogeneous `H^s` norm `(L^d sum_k (1 + (2 pi |xi_k|)^2)^s |a_k|^2)^{1/2}`,
/// for `s` in `[-2, 2]`.
pub fn sobolev_norm(state: &FieldState, s: f64) -> Result<f64> {
    if !(-2.0..=2.0).contains(&s) {
        return Err(param("s", format!("must lie in [-2, 2], got {s}")));
    }
    let spec = forward_transform(state)?;
    let g = spec.geometry();
    let sum: f64 = spec
        .coeffs()
        .iter()
        .enumerate()
        .map(|(flat, c)| (1.0 + g.wavenumber_sq(flat)).powf(s) * c.norm_sqr())
        .sum();
    Ok((g.volume() * sum).sqrt())
}

/// `(u, v)_{L2} = int u conj(v)`, linear in the first slot.
pub fn inner_product(u: &FieldState, v: &FieldState) -> Complex64 {
    assert_eq!(u.geometry(), v.geometry(), "fields live on different grids");
    let cell = u.geometry().cell_volume();
    u.values()
        .iter()
        .zip(v.values())
        .map(|(a, b)| a * b.conj())
        .sum::<Complex64>()
        * cell
}

/// `||u - v||_{L2}` without allocating the difference.
pub fn l2_distance(u: &FieldState, v: &FieldState) -> f64 {
    assert_eq!(u.geometry(), v.geometry(), "fields live on different grids");
    let cell = u.geometry().cell_volume();
    (cell
        * u.values()
            .iter()
            .zip(v.values())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>())
    .sqrt()
}

/// Squared L2 norm restricted to the samples where `mask` holds.
pub fn masked_l2_sq(state: &FieldState, mask: &[bool]) -> f64 {
    let cell = state.geometry().cell_volume();
    cell * state
        .values()
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(z, _)| z.norm_sqr())
        .sum::<f64>()
}
