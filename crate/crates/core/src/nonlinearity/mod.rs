//! The logarithmic nonlinearity `g(u) = lambda u log|u|^2`, its regularised
//! variants, the `theta`-split `g = g1 + g2`, and the power perturbation
//! `h(u) = mu |u|^alpha u`.

pub mod checks;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cutoff::complex_cutoff;
use crate::error::{param, Result};

pub use checks::{
    check_ch, check_eq32_g2, check_lemma26, check_lemma31_g1, fit_lemma26, sweep_ch, sweep_eq32,
    sweep_lemma31, validate_lemma26, IneqReport, Lemma26Fit, SweepOptions,
};

/// Moduli below this are treated as zero when a logarithm would be taken.
pub const UNDERFLOW_MODULUS: f64 = 1e-280;

/// How the logarithm is regularised near `u = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegFamily {
    /// `log |u|^2` with the `0 log 0 = 0` convention.
    Exact,
    /// `log (|u|^2 + eps^2)`.
    ShiftedLog,
    /// `log max(|u|, eps)^2`.
    FloorLog,
}

impl RegFamily {
    pub fn name(&self) -> &'static str {
        match self {
            RegFamily::Exact => "exact",
            RegFamily::ShiftedLog => "shifted_log",
            RegFamily::FloorLog => "floor_log",
        }
    }
}

impl std::str::FromStr for RegFamily {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exact" => Ok(RegFamily::Exact),
            "shifted_log" => Ok(RegFamily::ShiftedLog),
            "floor_log" => Ok(RegFamily::FloorLog),
            other => Err(format!(
                "unknown regularization family `{other}` (expected exact, shifted_log or floor_log)"
            )),
        }
    }
}

/// Parameters of `i u_t + Delta u + lambda u log|u|^2 + mu |u|^alpha u = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearitySpec {
    pub lambda: f64,
    /// Zero disables the power term.
    pub mu: f64,
    pub alpha: f64,
    pub reg_family: RegFamily,
    pub epsilon: f64,
}

impl NonlinearitySpec {
    /// Unregularised logarithmic equation without power term.
    pub fn exact(lambda: f64) -> Self {
        NonlinearitySpec {
            lambda,
            mu: 0.0,
            alpha: 2.0,
            reg_family: RegFamily::Exact,
            epsilon: 0.0,
        }
    }

    pub fn new(
        lambda: f64,
        mu: f64,
        alpha: f64,
        reg_family: RegFamily,
        epsilon: f64,
    ) -> Result<Self> {
        let spec = NonlinearitySpec {
            lambda,
            mu,
            alpha,
            reg_family,
            epsilon,
        };
        spec.validate(None)?;
        Ok(spec)
    }

    pub fn with_power(mut self, mu: f64, alpha: f64) -> Self {
        self.mu = mu;
        self.alpha = alpha;
        self
    }

    pub fn regularized(mut self, reg_family: RegFamily, epsilon: f64) -> Self {
        self.reg_family = reg_family;
        self.epsilon = epsilon;
        self
    }

    /// Checks parameter ranges; the `alpha` bound `0 < alpha < 4/(d-2)_+` is
    /// applied when a dimension is supplied.
    pub fn validate(&self, dim: Option<usize>) -> Result<()> {
        if !self.lambda.is_finite() {
            return Err(param("lambda", "must be finite"));
        }
        if !self.mu.is_finite() {
            return Err(param("mu", "must be finite"));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(param(
                "alpha",
                format!("must satisfy 0<α<4/(d−2)₊, got {}", self.alpha),
            ));
        }
        if let Some(d) = dim {
            if d > 2 && self.alpha >= 4.0 / (d as f64 - 2.0) {
                return Err(param(
                    "alpha",
                    format!(
                        "must satisfy 0<α<4/(d−2)₊ = {} for d = {d}",
                        4.0 / (d as f64 - 2.0)
                    ),
                ));
            }
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(param(
                "epsilon",
                format!("must be non-negative, got {}", self.epsilon),
            ));
        }
        match self.reg_family {
            RegFamily::Exact if self.epsilon != 0.0 => {
                Err(param("epsilon", "must be 0 for the exact family"))
            }
            RegFamily::ShiftedLog | RegFamily::FloorLog if self.epsilon == 0.0 => Err(param(
                "epsilon",
                format!("must be positive for {}", self.reg_family.name()),
            )),
            _ => Ok(()),
        }
    }

    /// The (possibly regularised) logarithm evaluated at `|u|^2`.
    ///
    /// Returns `None` where the exact logarithm is undefined (`|u|` below
    /// [`UNDERFLOW_MODULUS`]); the nonlinearity vanishes there.
    #[inline]
    pub fn log_term(&self, modulus_sq: f64) -> Option<f64> {
        match self.reg_family {
            RegFamily::Exact => {
                if modulus_sq < UNDERFLOW_MODULUS * UNDERFLOW_MODULUS {
                    None
                } else {
                    Some(modulus_sq.ln())
                }
            }
            RegFamily::ShiftedLog => {
                let arg = modulus_sq + self.epsilon * self.epsilon;
                (arg > 0.0).then(|| arg.ln())
            }
            RegFamily::FloorLog => {
                let floor = self.epsilon * self.epsilon;
                let arg = modulus_sq.max(floor);
                (arg > 0.0).then(|| arg.ln())
            }
        }
    }

    /// Real potential `lambda * log_term + mu |u|^alpha` multiplying `u`.
    #[inline]
    pub fn potential(&self, z: Complex64) -> f64 {
        let m2 = z.norm_sqr();
        let log_part = self.log_term(m2).map_or(0.0, |l| self.lambda * l);
        let power = if self.mu != 0.0 && m2 > 0.0 {
            self.mu * m2.powf(0.5 * self.alpha)
        } else {
            0.0
        };
        log_part + power
    }
}

/// `g(z) = lambda z log|z|^2`, with `g(0) = 0`.
pub fn g(z: Complex64, lambda: f64) -> Complex64 {
    let m2 = z.norm_sqr();
    if m2 == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    z * (lambda * m2.ln())
}

/// The regularised logarithmic nonlinearity selected by `spec`.
pub fn g_regularized(z: Complex64, spec: &NonlinearitySpec) -> Complex64 {
    match spec.log_term(z.norm_sqr()) {
        Some(l) => z * (spec.lambda * l),
        None => Complex64::new(0.0, 0.0),
    }
}

/// `(g1, g2) = (theta g, (1 - theta) g)`.
pub fn split_g1_g2(z: Complex64, lambda: f64) -> (Complex64, Complex64) {
    let full = g(z, lambda);
    let theta = complex_cutoff(z);
    let g1 = full * theta;
    (g1, full - g1)
}

pub fn g1(z: Complex64, lambda: f64) -> Complex64 {
    split_g1_g2(z, lambda).0
}

pub fn g2(z: Complex64, lambda: f64) -> Complex64 {
    split_g1_g2(z, lambda).1
}

/// `h(z) = mu |z|^alpha z`.
pub fn h(z: Complex64, mu: f64, alpha: f64) -> Complex64 {
    let m = z.norm();
    if m == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    z * (mu * m.powf(alpha))
}
