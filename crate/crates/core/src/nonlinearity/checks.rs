//! Pointwise checkers for the algebraic inequalities satisfied by the
//! logarithmic nonlinearity, and Monte Carlo sweeps estimating their
//! constants.
//!
//! Sweeps draw pairs with log-uniform modulus and uniform phase. Samples are
//! produced in fixed-size chunks, each with its own ChaCha stream, so results
//! do not depend on the number of worker threads.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{g, g1, g2};

const CHUNK: usize = 1 << 14;
/// Relative slack applied before a ratio counts as a violation.
pub const VIOLATION_SLACK: f64 = 1e-12;

/// Outcome of an inequality sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IneqReport {
    pub inequality: String,
    pub delta: Option<f64>,
    pub samples: u64,
    pub max_ratio: f64,
    /// `[re z, im z, re w, im w]` of the maximising pair.
    pub argmax: [f64; 4],
    pub violations: u64,
}

/// Sampling window and size of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub samples: usize,
    pub seed: u64,
    pub min_modulus: f64,
    pub max_modulus: f64,
    /// Ratios above `bound * (1 + VIOLATION_SLACK)` are counted as violations.
    pub bound: f64,
}

impl SweepOptions {
    pub fn new(samples: usize, seed: u64, min_modulus: f64, max_modulus: f64) -> Self {
        SweepOptions {
            samples,
            seed,
            min_modulus,
            max_modulus,
            bound: f64::INFINITY,
        }
    }

    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound = bound;
        self
    }
}

/// `|Im[(conj z - conj w)(z log|z| - w log|w|)]| / |z - w|^2`, 0 when `z = w`.
///
/// The numerator is evaluated through the identity
/// `Im[(conj z - conj w)(z log|z| - w log|w|)] = Im(conj(z) w) (log|z| - log|w|)`,
/// which avoids the cancellation of the expanded product when `z` is close
/// to `w` or the moduli are extreme.
pub fn check_ch(z: Complex64, w: Complex64) -> f64 {
    let (mz, mw) = (z.norm(), w.norm());
    // the ratio is invariant under z, w -> z/s, w/s; rescaling keeps the
    // squares away from underflow and overflow at extreme moduli
    let scale = mz.max(mw);
    if scale == 0.0 {
        return 0.0;
    }
    let (z, w) = (z / scale, w / scale);
    let diff_sq = (z - w).norm_sqr();
    if diff_sq == 0.0 {
        return 0.0;
    }
    let cross = z.re * w.im - z.im * w.re;
    if cross == 0.0 {
        return 0.0;
    }
    // cross != 0 implies both moduli are positive; the quotient keeps
    // accuracy when they are close but can overflow when they are far apart
    let q = mz / mw;
    let log_ratio = if q.is_finite() && q > 0.0 {
        q.ln()
    } else {
        mz.ln() - mw.ln()
    };
    (cross * log_ratio).abs() / diff_sq
}

/// `delta |g1(z) - g1(w)| / |z - w|^{1 - delta}`: bounded by `c1` uniformly in delta.
pub fn check_lemma31_g1(z: Complex64, w: Complex64, delta: f64, lambda: f64) -> f64 {
    let d = (z - w).norm();
    if d == 0.0 {
        return 0.0;
    }
    delta * (g1(z, lambda) - g1(w, lambda)).norm() / d.powf(1.0 - delta)
}

/// `|g2(z) - g2(w)| / ((1 + log+|z| + log+|w|) |z - w|)`: bounded by `c2`.
pub fn check_eq32_g2(z: Complex64, w: Complex64, lambda: f64) -> f64 {
    let d = (z - w).norm();
    if d == 0.0 {
        return 0.0;
    }
    let weight = 1.0 + log_plus(z.norm()) + log_plus(w.norm());
    (g2(z, lambda) - g2(w, lambda)).norm() / (weight * d)
}

/// Whether `|g(z)| <= (c1/delta) |z|^{1-delta} + c2 |z| log+|z|`.
pub fn check_lemma26(z: Complex64, delta: f64, c1: f64, c2: f64, lambda: f64) -> bool {
    let m = z.norm();
    let lhs = g(z, lambda).norm();
    let rhs = c1 / delta * m.powf(1.0 - delta) + c2 * m * log_plus(m);
    lhs <= rhs
}

fn log_plus(x: f64) -> f64 {
    if x > 1.0 {
        x.ln()
    } else {
        0.0
    }
}

fn sample_point<R: Rng>(rng: &mut R, log_lo: f64, log_hi: f64) -> Complex64 {
    let m = rng.random_range(log_lo..=log_hi).exp();
    let phase = rng.random_range(0.0..2.0 * PI);
    Complex64::from_polar(m, phase)
}

#[derive(Clone, Copy)]
struct Best {
    ratio: f64,
    pair: (Complex64, Complex64),
    violations: u64,
    count: u64,
}

impl Best {
    fn empty() -> Self {
        Best {
            ratio: 0.0,
            pair: (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
            violations: 0,
            count: 0,
        }
    }

    fn push(&mut self, ratio: f64, z: Complex64, w: Complex64, bound: f64) {
        self.count += 1;
        if ratio > bound * (1.0 + VIOLATION_SLACK) {
            self.violations += 1;
        }
        if ratio > self.ratio {
            self.ratio = ratio;
            self.pair = (z, w);
        }
    }

    fn merge(mut self, other: Best) -> Best {
        self.count += other.count;
        self.violations += other.violations;
        if other.ratio > self.ratio {
            self.ratio = other.ratio;
            self.pair = other.pair;
        }
        self
    }

    fn into_report(self, name: &str, delta: Option<f64>) -> IneqReport {
        let (z, w) = self.pair;
        IneqReport {
            inequality: name.to_string(),
            delta,
            samples: self.count,
            max_ratio: self.ratio,
            argmax: [z.re, z.im, w.re, w.im],
            violations: self.violations,
        }
    }
}

/// Evaluates `ratio` on random pairs plus `structured` pairs.
fn sweep(
    opts: &SweepOptions,
    structured: &[(Complex64, Complex64)],
    ratio: impl Fn(Complex64, Complex64) -> f64 + Sync,
) -> Best {
    let (log_lo, log_hi) = (opts.min_modulus.ln(), opts.max_modulus.ln());
    let chunks = opts.samples.div_ceil(CHUNK);
    let random = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(chunk as u64);
            let n = CHUNK.min(opts.samples - chunk * CHUNK);
            let mut best = Best::empty();
            for _ in 0..n {
                let z = sample_point(&mut rng, log_lo, log_hi);
                let w = sample_point(&mut rng, log_lo, log_hi);
                best.push(ratio(z, w), z, w, opts.bound);
            }
            best
        })
        .collect::<Vec<_>>();
    let mut best = random.into_iter().fold(Best::empty(), Best::merge);
    for &(z, w) in structured {
        best.push(ratio(z, w), z, w, opts.bound);
    }
    best
}

/// Structured pairs along a log grid of moduli: `(0, w)`, `(-w, w)`, `(w/2, w)`
/// and `(w e^{i pi/2}, w)`, which probe the sublinear regime near the origin.
pub fn structured_pairs(
    min_modulus: f64,
    max_modulus: f64,
    count: usize,
) -> Vec<(Complex64, Complex64)> {
    let (lo, hi) = (min_modulus.ln(), max_modulus.ln());
    let mut out = Vec::with_capacity(4 * count);
    for i in 0..count {
        let m = (lo + (hi - lo) * i as f64 / (count - 1).max(1) as f64).exp();
        let w = Complex64::new(m, 0.0);
        out.push((Complex64::new(0.0, 0.0), w));
        out.push((-w, w));
        out.push((w * 0.5, w));
        out.push((Complex64::new(0.0, m), w));
    }
    out
}

/// Sweep of the Cazenave-Haraux ratio; every ratio must stay at or below 1.
pub fn sweep_ch(opts: &SweepOptions) -> IneqReport {
    let opts = SweepOptions {
        bound: 1.0,
        ..*opts
    };
    sweep(&opts, &[], check_ch).into_report("CH", None)
}

/// Empirical `c1(delta)` over pairs in the closed unit disk.
///
/// `max_modulus` is clamped to 1. Structured pairs along the modulus grid are
/// always included, since the supremum sits near `|w| = e^{-1/delta}`.
pub fn sweep_lemma31(delta: f64, lambda: f64, opts: &SweepOptions) -> IneqReport {
    let opts = SweepOptions {
        max_modulus: opts.max_modulus.min(1.0),
        ..*opts
    };
    let structured = structured_pairs(opts.min_modulus, opts.max_modulus, 4096);
    sweep(&opts, &structured, |z, w| {
        check_lemma31_g1(z, w, delta, lambda)
    })
    .into_report("lemma31_g1", Some(delta))
}

/// Empirical `c2` for the `g2` Lipschitz bound with logarithmic weight.
pub fn sweep_eq32(lambda: f64, opts: &SweepOptions) -> IneqReport {
    let structured = structured_pairs(opts.min_modulus, opts.max_modulus, 4096);
    sweep(opts, &structured, |z, w| check_eq32_g2(z, w, lambda)).into_report("eq32_g2", None)
}

/// Constants fitted for the pointwise bound on `|g|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma26Fit {
    pub delta: f64,
    pub c1: f64,
    pub c2: f64,
}

/// Multiplicative margin on fitted constants; covers grid-to-sample interpolation.
pub const FIT_MARGIN: f64 = 1.0 + 1e-6;

/// Fits `(c1, c2)` by brute-force supremum over a dense modulus grid in
/// `[min_modulus, max_modulus]`. `|g|` depends only on the modulus.
///
/// `c1 = sup_{|z| <= 1} delta |g(z)| / |z|^{1-delta}` and
/// `c2 = sup_{|z| > 1} |g(z)| / (|z| log|z|)`.
pub fn fit_lemma26(
    delta: f64,
    lambda: f64,
    min_modulus: f64,
    max_modulus: f64,
    grid: usize,
) -> Lemma26Fit {
    let (lo, hi) = (min_modulus.ln(), max_modulus.ln());
    let mut c1: f64 = 0.0;
    let mut c2: f64 = 0.0;
    for i in 0..grid {
        let m = (lo + (hi - lo) * i as f64 / (grid - 1) as f64).exp();
        let gz = g(Complex64::new(m, 0.0), lambda).norm();
        if m <= 1.0 {
            c1 = c1.max(delta * gz / m.powf(1.0 - delta));
        } else {
            c2 = c2.max(gz / (m * m.ln()));
        }
    }
    Lemma26Fit {
        delta,
        c1: c1 * FIT_MARGIN,
        c2: c2 * FIT_MARGIN,
    }
}

/// Counts fresh random samples that violate the fitted bound.
pub fn validate_lemma26(fit: &Lemma26Fit, lambda: f64, opts: &SweepOptions) -> u64 {
    let (log_lo, log_hi) = (opts.min_modulus.ln(), opts.max_modulus.ln());
    let chunks = opts.samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(chunk as u64);
            let n = CHUNK.min(opts.samples - chunk * CHUNK);
            (0..n)
                .filter(|_| {
                    let z = sample_point(&mut rng, log_lo, log_hi);
                    !check_lemma26(z, fit.delta, fit.c1, fit.c2, lambda)
                })
                .count() as u64
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// The CH numerator exactly as written, without the factorisation.
    fn ch_direct(z: Complex64, w: Complex64) -> f64 {
        let zl = if z.norm() == 0.0 {
            c(0.0, 0.0)
        } else {
            z * z.norm().ln()
        };
        let wl = if w.norm() == 0.0 {
            c(0.0, 0.0)
        } else {
            w * w.norm().ln()
        };
        let d = (z - w).norm_sqr();
        if d == 0.0 {
            0.0
        } else {
            ((z - w).conj() * (zl - wl)).im.abs() / d
        }
    }

    #[test]
    fn ch_edge_cases() {
        let z = c(0.3, 0.7);
        assert_eq!(check_ch(z, z), 0.0);
        assert_eq!(check_ch(c(1.0, 0.0), c(0.0, 0.0)), 0.0);
        assert_eq!(check_ch(c(0.0, 0.0), c(0.0, 0.0)), 0.0);
    }

    #[test]
    fn ch_moduli_far_apart() {
        // |z|/|w| overflows here; compare with the ratio assembled in log space
        for (lz, lw) in [
            (1e10f64, 1e-299f64),
            (1e-299, 1e10),
            (1e300, 1e-300),
            (2e-162, 1e-162),
        ] {
            let (pz, pw) = (1.0, 2.5);
            let z = Complex64::from_polar(lz, pz);
            let w = Complex64::from_polar(lw, pw);
            let r = check_ch(z, w);
            let log_mag = lz.ln() + lw.ln() - 2.0 * (z - w).norm().ln();
            let expected = log_mag.exp() * (pw - pz).sin().abs() * (lz.ln() - lw.ln()).abs();
            assert!(r.is_finite() && r <= 1.0, "{r}");
            assert!((r - expected).abs() <= 1e-9 * expected, "{r} vs {expected}");
        }
    }

    proptest! {
        #[test]
        fn ch_factorisation_matches_direct(lz in -4.0f64..4.0, pz in 0.0f64..6.3, lw in -4.0f64..4.0, pw in 0.0f64..6.3) {
            let z = Complex64::from_polar(lz.exp(), pz);
            let w = Complex64::from_polar(lw.exp(), pw);
            let a = check_ch(z, w);
            let b = ch_direct(z, w);
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a), "{a} vs {b}");
            prop_assert!(a <= 1.0);
        }

        #[test]
        fn lemma26_holds_at_trivial_points(delta in 0.01f64..0.99) {
            prop_assert!(check_lemma26(c(0.0, 0.0), delta, 1.0, 1.0, 1.0));
            prop_assert!(check_lemma26(c(1.0, 0.0), delta, 1e-3, 1e-3, 1.0));
        }
    }

    #[test]
    fn ch_sweep_across_the_exponent_range() {
        let r = sweep_ch(&SweepOptions::new(200_000, 3, 1e-300, 1e300));
        assert_eq!(r.violations, 0);
        assert!(
            r.max_ratio <= 0.5 + 1e-9 && r.max_ratio > 0.45,
            "{}",
            r.max_ratio
        );
    }

    #[test]
    fn ch_supremum_by_grid_search() {
        // With z = w e^{a + i t}, the ratio is |sin t| |a| / (2 cosh a - 2 cos t),
        // whose supremum 1/2 is approached as (a, t) -> 0 along a = t.
        let mut best: f64 = 0.0;
        for i in 1..400 {
            for j in 1..400 {
                let a = -2.0 + 4.0 * i as f64 / 400.0;
                let t = -3.0 + 6.0 * j as f64 / 400.0;
                let w = c(1.0, 0.0);
                let z = Complex64::from_polar(a.exp(), t);
                best = best.max(check_ch(z, w));
            }
        }
        assert!(best < 0.5 + 1e-12 && best > 0.49, "{best}");
    }

    #[test]
    fn g1_vanishes_outside_disk() {
        assert_eq!(check_lemma31_g1(c(1.0, 0.0), c(0.0, 2.0), 0.1, 1.0), 0.0);
        let z = c(0.2, 0.1);
        assert_eq!(check_lemma31_g1(z, z, 0.3, 1.0), 0.0);
        assert_eq!(check_eq32_g2(c(0.1, 0.0), c(0.0, 0.4), 1.0), 0.0);
        assert_eq!(check_eq32_g2(z, z, 1.0), 0.0);
    }

    #[test]
    fn lemma31_supremum_on_origin_pairs() {
        // For the pair (0, w) with |w| = e^{-s}: ratio = 2 |lambda| delta s e^{-s delta},
        // maximised at s = 1/delta with value 2 |lambda| / e for every delta.
        for delta in [0.5f64, 0.1, 0.02, 0.005] {
            let w = c((-1.0 / delta).exp(), 0.0);
            let r = check_lemma31_g1(c(0.0, 0.0), w, delta, 1.0);
            assert!(
                (r - 2.0 / std::f64::consts::E).abs() < 1e-12,
                "delta {delta}: {r}"
            );
        }
    }

    #[test]
    fn sweep_is_thread_count_independent() {
        let opts = SweepOptions::new(50_000, 9, 1e-8, 1e8);
        let a = sweep_ch(&opts);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| sweep_ch(&opts));
        assert_eq!(a, b);
        assert_eq!(a.samples, 50_000);
        assert_eq!(a.violations, 0);
    }

    #[test]
    fn eq32_constant_is_finite() {
        let rep = sweep_eq32(1.0, &SweepOptions::new(100_000, 3, 1e-12, 1e6));
        assert!(rep.max_ratio.is_finite() && rep.max_ratio > 0.0);
        assert!(rep.max_ratio < 10.0, "{rep:?}");
    }

    #[test]
    fn lemma26_fit_then_validate() {
        for delta in [0.5, 0.1, 0.02] {
            let fit = fit_lemma26(delta, 1.0, 1e-12, 1e12, 200_001);
            let bad = validate_lemma26(&fit, 1.0, &SweepOptions::new(200_000, 77, 1e-12, 1e12));
            assert_eq!(bad, 0, "{fit:?}");
        }
    }
}
