//! The power-form Gronwall inequality: if `f >= 0` satisfies
//! `f(t) <= a + (b / delta) int_0^t f^{1 - delta}` then
//! `f(t) <= (a^delta + b t)^{1/delta}`.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Relative slack of the premise and conclusion comparisons.
pub const COMPARISON_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum GronwallVerdict {
    /// Premise and conclusion hold; `max_gap` is the largest
    /// `|f - bound| / bound`, zero when the bound is attained everywhere.
    Holds { max_gap: f64, min_gap: f64 },
    /// Premise holds but `f` exceeds the bound at `time`.
    Violated { time: f64, value: f64, bound: f64 },
    /// The integral premise fails at `time`, so nothing is concluded.
    PremiseFails { time: f64, lhs: f64, rhs: f64 },
}

impl GronwallVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, GronwallVerdict::Holds { .. })
    }
}

/// `(a^delta + b t)^{1/delta}`.
pub fn gronwall_bound(a: f64, b: f64, delta: f64, t: f64) -> f64 {
    (a.powf(delta) + b * t).powf(1.0 / delta)
}

/// The extremal family `f(t) = (a^delta + b t)^{1/delta}` on `times`.
pub fn equality_family(a: f64, b: f64, delta: f64, times: &[f64]) -> Vec<f64> {
    times
        .iter()
        .map(|&t| gronwall_bound(a, b, delta, t))
        .collect()
}

/// Checks the premise with a cumulative trapezoid rule over the samples,
/// then the conclusion at every sample.
pub fn gronwall_check(
    a: f64,
    b: f64,
    delta: f64,
    times: &[f64],
    values: &[f64],
) -> Result<GronwallVerdict> {
    if !(a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite()) {
        return Err(param("a, b", "must be finite and non-negative"));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(param("delta", format!("must lie in (0, 1], got {delta}")));
    }
    if times.len() != values.len() || times.is_empty() {
        return Err(param(
            "samples",
            "times and values must be non-empty and of equal length",
        ));
    }
    if times[0] != 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(param("times", "must start at 0 and increase strictly"));
    }
    if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(param("values", "f must be finite and non-negative"));
    }
    let power = 1.0 - delta;
    let mut integral = 0.0;
    for i in 0..times.len() {
        if i > 0 {
            let h = times[i] - times[i - 1];
            integral += 0.5 * h * (values[i - 1].powf(power) + values[i].powf(power));
        }
        let rhs = a + b / delta * integral;
        if values[i] > rhs * (1.0 + COMPARISON_SLACK) {
            return Ok(GronwallVerdict::PremiseFails {
                time: times[i],
                lhs: values[i],
                rhs,
            });
        }
    }
    let mut max_gap: f64 = 0.0;
    let mut min_gap = f64::INFINITY;
    for (&t, &f) in times.iter().zip(values) {
        let bound = gronwall_bound(a, b, delta, t);
        if f > bound * (1.0 + COMPARISON_SLACK) {
            return Ok(GronwallVerdict::Violated {
                time: t,
                value: f,
                bound,
            });
        }
        let gap = if bound > 0.0 {
            (bound - f).abs() / bound
        } else {
            0.0
        };
        max_gap = max_gap.max(gap);
        min_gap = min_gap.min(gap);
    }
    Ok(GronwallVerdict::Holds { max_gap, min_gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(n: usize, t: f64) -> Vec<f64> {
        (0..=n).map(|i| t * i as f64 / n as f64).collect()
    }

    #[test]
    fn b_zero_reduces_to_constant_bound() {
        let times = grid(10, 1.0);
        let below = vec![0.7; 11];
        assert!(gronwall_check(0.7, 0.0, 0.5, &times, &below)
            .unwrap()
            .holds());
        assert!((gronwall_bound(0.7, 0.0, 0.3, 5.0) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn zero_function_with_zero_a() {
        let times = grid(10, 1.0);
        let v = gronwall_check(0.0, 1.0, 0.5, &times, &[0.0; 11]).unwrap();
        assert!(v.holds());
    }

    #[test]
    fn equality_family_saturates() {
        let times = grid(2048, 1.0);
        for a in [0.1, 1.0, 10.0] {
            for b in [0.1, 1.0] {
                for delta in [0.5, 0.1] {
                    let f = equality_family(a, b, delta, &times);
                    match gronwall_check(a, b, delta, &times, &f).unwrap() {
                        GronwallVerdict::Holds { max_gap, .. } => assert!(max_gap < 1e-8),
                        other => panic!("a={a} b={b} delta={delta}: {other:?}"),
                    }
                }
            }
        }
    }

    #[test]
    fn premise_failure_blocks_conclusion() {
        let times = grid(100, 1.0);
        let f: Vec<f64> = times.iter().map(|t| 2.0 + 5.0 * t).collect();
        let v = gronwall_check(1.0, 1.0, 0.5, &times, &f).unwrap();
        assert!(matches!(v, GronwallVerdict::PremiseFails { .. }));
    }

    proptest! {
        #[test]
        fn never_concludes_without_premise(
            a in 0.0f64..5.0,
            b in 0.0f64..3.0,
            delta in 0.05f64..1.0,
            vals in proptest::collection::vec(0.0f64..50.0, 2..40),
        ) {
            let times = grid(vals.len() - 1, 1.0);
            let verdict = gronwall_check(a, b, delta, &times, &vals).unwrap();
            // recompute the premise independently with the left Riemann sum
            // of the trapezoid's two halves
            let mut integral = 0.0;
            let mut premise = true;
            for i in 0..vals.len() {
                if i > 0 {
                    let h = times[i] - times[i - 1];
                    integral += h * 0.5 * vals[i - 1].powf(1.0 - delta) + h * 0.5 * vals[i].powf(1.0 - delta);
                }
                if vals[i] > (a + b / delta * integral) * (1.0 + COMPARISON_SLACK) {
                    premise = false;
                    break;
                }
            }
            if !premise {
                let fails = matches!(verdict, GronwallVerdict::PremiseFails { .. });
                prop_assert!(fails);
            }
        }
    }
}
