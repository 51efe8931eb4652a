//! Sampled fields, their Fourier coefficients, and the transform pair.
//!
//! Coefficient convention: `a_k = N^{-d} sum_j u(x_j) exp(-2 pi i k.j / N)`,
//! so that `u(x_j) = sum_k a_k exp(2 pi i k.j / N)` and a plane wave
//! `exp(2 pi i k0.x / L)` has `a_{k0} = 1`. Coefficients are stored in FFT
//! order (non-negative frequencies first).

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::algorithm::butterflies::{Butterfly2, Butterfly4};
use rustfft::algorithm::Radix4;
use rustfft::{Fft, FftDirection, FftPlannerScalar};

use crate::error::{Error, Result};
use crate::geometry::Geometry;

struct PlanCache {
    planner: FftPlannerScalar<f64>,
    radix4: HashMap<(usize, bool), Arc<dyn Fft<f64>>>,
}

impl PlanCache {
    /// Power-of-two lengths use radix-4 over a 2- or 4-point base. The
    /// planner's larger base butterflies multiply by rounded constants such
    /// as `sqrt(1/2)` whose squared modulus exceeds 1, which makes every
    /// transform pair gain a little charge; these bases multiply only by
    /// `+-1` and `+-i`.
    fn plan(&mut self, len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
        if !len.is_power_of_two() || len < 4 {
            return self.planner.plan_fft(len, direction);
        }
        let key = (len, direction == FftDirection::Forward);
        self.radix4
            .entry(key)
            .or_insert_with(|| {
                let tz = len.trailing_zeros();
                let (base, k): (Arc<dyn Fft<f64>>, u32) = if tz % 2 == 1 {
                    (Arc::new(Butterfly2::new(direction)), (tz - 1) / 2)
                } else {
                    (Arc::new(Butterfly4::new(direction)), (tz - 2) / 2)
                };
                Arc::new(Radix4::new_with_base(k, base))
            })
            .clone()
    }
}

thread_local! {
    static PLANNER: RefCell<PlanCache> = RefCell::new(PlanCache {
        planner: FftPlannerScalar::new(),
        radix4: HashMap::new(),
    });
}

/// Discrete solution `u(t)` sampled on a periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    geometry: Geometry,
    values: Vec<Complex64>,
    time: f64,
}

impl FieldState {
    /// Wraps row-major samples, rejecting wrong shapes and non-finite entries.
    pub fn new(geometry: Geometry, values: Vec<Complex64>, time: f64) -> Result<Self> {
        if values.len() != geometry.len() {
            return Err(Error::Shape {
                expected: geometry.len(),
                actual: values.len(),
            });
        }
        if let Some(index) = values
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::NonFinite { index });
        }
        Ok(FieldState {
            geometry,
            values,
            time,
        })
    }

    pub fn zeros(geometry: Geometry) -> Self {
        FieldState {
            geometry,
            values: vec![Complex64::new(0.0, 0.0); geometry.len()],
            time: 0.0,
        }
    }

    /// Samples `f` at the grid points `x_j = j L / N` (not centred).
    pub fn from_fn(geometry: Geometry, f: impl Fn([f64; 2]) -> Complex64) -> Self {
        let values = (0..geometry.len())
            .map(|flat| {
                let idx = geometry.unflatten(flat);
                let mut x = [0.0; 2];
                for (axis, v) in x.iter_mut().enumerate().take(geometry.dim()) {
                    *v = geometry.coordinate(axis, idx[axis]);
                }
                f(x)
            })
            .collect();
        FieldState {
            geometry,
            values,
            time: 0.0,
        }
    }

    /// Samples `f` at positions relative to the box centre.
    pub fn from_centered_fn(geometry: Geometry, f: impl Fn([f64; 2]) -> Complex64) -> Self {
        let values = (0..geometry.len())
            .map(|flat| f(geometry.centered_position(flat)))
            .collect();
        FieldState {
            geometry,
            values,
            time: 0.0,
        }
    }

    /// Constructor for values already known to be finite and well shaped.
    pub(crate) fn from_parts(geometry: Geometry, values: Vec<Complex64>, time: f64) -> Self {
        debug_assert_eq!(values.len(), geometry.len());
        FieldState {
            geometry,
            values,
            time,
        }
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub(crate) fn set_time(&mut self, time: f64) {
        self.time = time;
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Pointwise complex conjugate (time reversal of the equation).
    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        FieldState {
            geometry: self.geometry,
            values: self.values.iter().map(|&z| f(z)).collect(),
            time: self.time,
        }
    }

    /// Pointwise combination with another state on the same grid.
    pub fn zip_with(
        &self,
        other: &FieldState,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Self {
        assert_eq!(
            self.geometry, other.geometry,
            "fields live on different grids"
        );
        FieldState {
            geometry: self.geometry,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            time: self.time,
        }
    }

    pub fn sub(&self, other: &FieldState) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &FieldState) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|z| z * c)
    }
}

/// Fourier-series coefficients of a [`FieldState`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    geometry: Geometry,
    coeffs: Vec<Complex64>,
    time: f64,
}

impl SpectralField {
    pub fn new(geometry: Geometry, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != geometry.len() {
            return Err(Error::Shape {
                expected: geometry.len(),
                actual: coeffs.len(),
            });
        }
        if let Some(index) = coeffs
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::NonFinite { index });
        }
        Ok(SpectralField {
            geometry,
            coeffs,
            time: 0.0,
        })
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient at signed frequency indices `k` (one entry per axis).
    pub fn coefficient(&self, k: &[i64]) -> Complex64 {
        let mut idx = [0usize; 2];
        for (axis, &ki) in k.iter().enumerate().take(self.geometry.dim()) {
            let n = self.geometry.points(axis) as i64;
            idx[axis] = ki.rem_euclid(n) as usize;
        }
        self.coeffs[self.geometry.flatten(idx)]
    }

    /// `L^d sum_k |a_k|^2`, equal to the squared L2 norm of the field.
    pub fn parseval_sum(&self) -> f64 {
        self.geometry.volume() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }
}

/// Per-thread FFT workspace for one geometry.
///
/// Plans come from a thread-local planner cache; the workspace owns its
/// scratch buffers and must not be shared between threads.
pub struct SpectralEngine {
    geometry: Geometry,
    forward: [Arc<dyn Fft<f64>>; 2],
    inverse: [Arc<dyn Fft<f64>>; 2],
    scratch: Vec<Complex64>,
    column: Vec<Complex64>,
}

impl SpectralEngine {
    pub fn new(geometry: &Geometry) -> Self {
        let (forward, inverse) = PLANNER.with(|p| {
            let mut p = p.borrow_mut();
            let fwd = [
                p.plan(geometry.points(0), FftDirection::Forward),
                p.plan(geometry.points(1), FftDirection::Forward),
            ];
            let inv = [
                p.plan(geometry.points(0), FftDirection::Inverse),
                p.plan(geometry.points(1), FftDirection::Inverse),
            ];
            (fwd, inv)
        });
        let scratch_len = forward
            .iter()
            .chain(inverse.iter())
            .map(|f| f.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        SpectralEngine {
            geometry: *geometry,
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            column: vec![Complex64::new(0.0, 0.0); geometry.points(0)],
        }
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    /// Unnormalised forward DFT in place.
    pub fn forward_in_place(&mut self, data: &mut [Complex64]) {
        self.transform(data, true);
    }

    /// Unnormalised inverse DFT in place.
    pub fn inverse_in_place(&mut self, data: &mut [Complex64]) {
        self.transform(data, false);
    }

    fn transform(&mut self, data: &mut [Complex64], forward: bool) {
        assert_eq!(data.len(), self.geometry.len());
        let plans = if forward {
            &self.forward
        } else {
            &self.inverse
        };
        if self.geometry.dim() == 1 {
            plans[0].process_with_scratch(data, &mut self.scratch);
            return;
        }
        let (n0, n1) = (self.geometry.points(0), self.geometry.points(1));
        // rows are contiguous
        plans[1].process_with_scratch(data, &mut self.scratch);
        for c in 0..n1 {
            for r in 0..n0 {
                self.column[r] = data[r * n1 + c];
            }
            plans[0].process_with_scratch(&mut self.column, &mut self.scratch);
            for r in 0..n0 {
                data[r * n1 + c] = self.column[r];
            }
        }
    }

    /// Applies a Fourier multiplier `symbol(xi)` to `data` in place.
    pub fn apply_multiplier(
        &mut self,
        data: &mut [Complex64],
        symbol: impl Fn(&[f64; 2]) -> Complex64,
    ) {
        self.forward_in_place(data);
        let norm = 1.0 / self.geometry.len() as f64;
        for (flat, c) in data.iter_mut().enumerate() {
            *c *= symbol(&self.geometry.frequency_vector(flat)) * norm;
        }
        self.inverse_in_place(data);
    }

    /// Applies a precomputed multiplier table (FFT order) in place.
    pub fn apply_table(&mut self, data: &mut [Complex64], table: &[Complex64]) {
        self.forward_in_place(data);
        let n = self.geometry.len() as f64;
        for (c, m) in data.iter_mut().zip(table) {
            *c = *c * m / n;
        }
        self.inverse_in_place(data);
    }

    /// Applies the unit-modulus multiplier `1 + increments` in place.
    ///
    /// Rounding `e^{i theta}` to the nearest float pair leaves a modulus
    /// error of up to half an ulp that is the same every time the table is
    /// applied, so a propagator stepped `n` times would gain or lose charge
    /// linearly in `n`. Adding `c * (e^{i theta} - 1)` confines the fixed
    /// error to the small increment and leaves only the data-dependent
    /// rounding of the sum.
    pub fn apply_increments(&mut self, data: &mut [Complex64], increments: &[Complex64]) {
        self.forward_in_place(data);
        let n = self.geometry.len() as f64;
        for (c, d) in data.iter_mut().zip(increments) {
            *c = (*c + *c * d) / n;
        }
        self.inverse_in_place(data);
    }
}

/// Fourier coefficients of `state` in the normalised convention.
pub fn forward_transform(state: &FieldState) -> Result<SpectralField> {
    if let Some(index) = state
        .values
        .iter()
        .position(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        return Err(Error::NonFinite { index });
    }
    let mut engine = SpectralEngine::new(&state.geometry);
    let mut coeffs = state.values.clone();
    engine.forward_in_place(&mut coeffs);
    let norm = 1.0 / state.geometry.len() as f64;
    coeffs.iter_mut().for_each(|c| *c *= norm);
    Ok(SpectralField {
        geometry: state.geometry,
        coeffs,
        time: state.time,
    })
}

/// Synthesises grid samples from Fourier coefficients.
pub fn inverse_transform(spec: &SpectralField) -> Result<FieldState> {
    if let Some(index) = spec
        .coeffs
        .iter()
        .position(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        return Err(Error::NonFinite { index });
    }
    let mut engine = SpectralEngine::new(&spec.geometry);
    let mut values = spec.coeffs.clone();
    engine.inverse_in_place(&mut values);
    Ok(FieldState {
        geometry: spec.geometry,
        values,
        time: spec.time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn plane_wave(g: Geometry, k: [i64; 2]) -> FieldState {
        FieldState::from_fn(g, |x| {
            let mut phase = 0.0;
            for axis in 0..g.dim() {
                phase += 2.0 * PI * k[axis] as f64 * x[axis] / g.period(axis);
            }
            Complex64::from_polar(1.0, phase)
        })
    }

    #[test]
    fn constant_maps_to_dc() {
        let g = Geometry::new(1, 3.0, 16).unwrap();
        let c = Complex64::new(0.7, -1.2);
        let u = FieldState::from_fn(g, |_| c);
        let spec = forward_transform(&u).unwrap();
        assert!((spec.coefficient(&[0]) - c).norm() < 1e-14);
        for k in 1..8 {
            assert!(spec.coefficient(&[k]).norm() < 1e-14);
            assert!(spec.coefficient(&[-k]).norm() < 1e-14);
        }
    }

    #[test]
    fn plane_wave_has_unit_coefficient() {
        let g = Geometry::new(1, 5.0, 16).unwrap();
        let spec = forward_transform(&plane_wave(g, [3, 0])).unwrap();
        for (flat, c) in spec.coeffs().iter().enumerate() {
            let expected = if g.frequency_index(0, flat) == 3 {
                1.0
            } else {
                0.0
            };
            assert!((c - expected).norm() < 1e-13, "k index {flat}: {c}");
        }
        let g2 = Geometry::with_axes(&[2.0, 7.0], &[16, 32]).unwrap();
        let spec = forward_transform(&plane_wave(g2, [-2, 5])).unwrap();
        assert!((spec.coefficient(&[-2, 5]) - 1.0).norm() < 1e-13);
        assert!((spec.parseval_sum() - g2.volume()).abs() < 1e-10);
    }

    #[test]
    fn rejects_non_finite() {
        let g = Geometry::new(1, 1.0, 8).unwrap();
        let mut v = vec![Complex64::new(1.0, 0.0); 8];
        v[3] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(
            FieldState::new(g, v.clone(), 0.0),
            Err(Error::NonFinite { index: 3 })
        ));
        let bad = FieldState::from_parts(g, v, 0.0);
        assert!(forward_transform(&bad).is_err());
    }

    fn random_field(g: Geometry, seed: u64) -> FieldState {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let values = (0..g.len())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        FieldState::new(g, values, 0.0).unwrap()
    }

    fn max_rel_diff(a: &FieldState, b: &FieldState) -> f64 {
        let scale = a.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
            / scale
    }

    #[test]
    fn round_trip_all_sizes() {
        let mut n = 8;
        while n <= 4096 {
            let g = Geometry::new(1, 1.0, n).unwrap();
            let u = random_field(g, n as u64);
            let back = inverse_transform(&forward_transform(&u).unwrap()).unwrap();
            assert!(max_rel_diff(&u, &back) < 1e-12, "n = {n}");
            n *= 2;
        }
        let mut n = 8;
        while n <= 256 {
            let g = Geometry::new(2, 1.0, n).unwrap();
            let u = random_field(g, n as u64);
            let back = inverse_transform(&forward_transform(&u).unwrap()).unwrap();
            assert!(max_rel_diff(&u, &back) < 1e-12, "n = {n}");
            n *= 2;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn parseval(seed in 0u64..10_000, log_n in 3u32..10, period in 0.1f64..100.0, two_d in any::<bool>()) {
            let (dim, n) = if two_d { (2, 1usize << log_n.min(7)) } else { (1, 1usize << log_n) };
            let g = Geometry::new(dim, period, n).unwrap();
            let u = random_field(g, seed);
            let l2_sq = g.cell_volume() * u.values().iter().map(|z| z.norm_sqr()).sum::<f64>();
            let spec = forward_transform(&u).unwrap();
            prop_assert!((l2_sq - spec.parseval_sum()).abs() <= 1e-10 * l2_sq);
        }
    }
}
