//! L2 Lipschitz dependence of the flow on initial data: for `mu = 0`,
//! `||u(t) - v(t)|| <= e^{2 |lambda| t} ||u(0) - v(0)||`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::evolution::{charge, Integrator, SolverConfig};
use crate::field::FieldState;
use crate::nonlinearity::NonlinearitySpec;
use crate::norms::{l2_distance, lp_norm, sobolev_norm};

use super::random_field::{make_random_field, RandomFieldSpec};

/// Differences below this fraction of `||u0||` are rejected as degenerate.
pub const DEGENERATE_DIFFERENCE: f64 = 1e-14;

/// `M = max(sup_t ||u(t)||_{H^s}, sup_t ||v(t)||_{H^s})` over the sampled times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionPairBound {
    pub s: f64,
    pub m: f64,
}

impl SolutionPairBound {
    pub fn new(s: f64) -> Self {
        SolutionPairBound { s, m: 0.0 }
    }

    pub fn observe(&mut self, u: &FieldState, v: &FieldState) -> Result<()> {
        let nu = sobolev_norm(u, self.s)?;
        let nv = sobolev_norm(v, self.s)?;
        self.m = self.m.max(nu).max(nv);
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityResult {
    pub times: Vec<f64>,
    /// `||u(t) - v(t)|| / ||u0 - v0||`.
    pub ratios: Vec<f64>,
    /// `ratios * e^{-2 |lambda| t}`.
    pub weighted: Vec<f64>,
    pub sup_weighted: f64,
    pub tol: f64,
    pub verdict: bool,
    pub bound: SolutionPairBound,
    /// Largest `|Q(t) - Q(0)| / (Q(0) t)` over both solutions, `Q` the charge.
    pub charge_drift_rate: f64,
}

/// Evolves both data in lockstep and compares their distance against the
/// exponential bound. `M` is tracked in `H^s` with `s` the first configured
/// Sobolev index (1 if none).
pub fn stability_experiment(
    u0: &FieldState,
    v0: &FieldState,
    spec: &NonlinearitySpec,
    config: &SolverConfig,
    tol: f64,
) -> Result<StabilityResult> {
    if spec.mu != 0.0 {
        return Err(param("mu", "the stability bound is stated for mu = 0"));
    }
    if u0.geometry() != v0.geometry() {
        return Err(Error::Geometry("data live on different grids".into()));
    }
    if !(u0.is_finite() && v0.is_finite()) {
        return Err(Error::Diverged { step: 0 });
    }
    spec.validate(Some(u0.geometry().dim()))?;
    let d0 = l2_distance(u0, v0);
    if d0 < DEGENERATE_DIFFERENCE * lp_norm(u0, 2.0) || d0 == 0.0 {
        return Err(Error::Degenerate(format!(
            "initial data coincide (||u0 - v0|| = {d0:e})"
        )));
    }
    let s = config.sobolev_indices.first().copied().unwrap_or(1.0);
    let mut bound = SolutionPairBound::new(s);
    let rate = 2.0 * spec.lambda.abs();
    let mut times = Vec::new();
    let mut ratios = Vec::new();
    let mut weighted = Vec::new();
    let mut charge_drift_rate: f64 = 0.0;
    let (qu, qv) = (charge(u0), charge(v0));
    let mut record =
        |u: &FieldState, v: &FieldState, bound: &mut SolutionPairBound| -> Result<()> {
            let t = u.time() - u0.time();
            if t > 0.0 {
                let du = (charge(u) - qu).abs() / qu;
                let dv = (charge(v) - qv).abs() / qv;
                charge_drift_rate = charge_drift_rate.max(du.max(dv) / t);
            }
            let r = l2_distance(u, v) / d0;
            times.push(u.time());
            ratios.push(r);
            weighted.push(r * (-rate * t).exp());
            bound.observe(u, v)
        };
    let mut u = u0.clone();
    let mut v = v0.clone().with_time(u0.time());
    record(&u, &v, &mut bound)?;
    let mut iu = Integrator::new(u0.geometry(), *spec, config.scheme, config.dt);
    let mut iv = Integrator::new(u0.geometry(), *spec, config.scheme, config.dt);
    let steps = config.steps();
    for n in 1..=steps {
        iu.step(&mut u);
        iv.step(&mut v);
        let t = u0.time() + n as f64 * config.dt;
        u = u.with_time(t);
        v = v.with_time(t);
        if !(u.is_finite() && v.is_finite()) {
            return Err(Error::Diverged { step: n });
        }
        if n % config.snapshot_every == 0 || n == steps {
            record(&u, &v, &mut bound)?;
        }
    }
    let sup_weighted = weighted.iter().cloned().fold(0.0, f64::max);
    Ok(StabilityResult {
        times,
        ratios,
        weighted,
        sup_weighted,
        tol,
        verdict: sup_weighted <= 1.0 + tol,
        bound,
        charge_drift_rate,
    })
}

/// A seeded pair `(u0, u0 + w)` with `||w|| / ||u0|| = relative_gap`, both
/// drawn by [`make_random_field`] in `H^s`.
pub fn perturbed_pair(
    base: &RandomFieldSpec,
    geometry: &crate::geometry::Geometry,
    relative_gap: f64,
) -> Result<(FieldState, FieldState)> {
    if !(relative_gap.is_finite() && relative_gap > 0.0) {
        return Err(param("relative_gap", "must be positive"));
    }
    let u0 = make_random_field(base, geometry)?;
    let dir_spec = RandomFieldSpec {
        seed: base.seed ^ 0x9e37_79b9_7f4a_7c15,
        target_norm: 1.0,
        ..*base
    };
    let w = make_random_field(&dir_spec, geometry)?;
    let scale = relative_gap * lp_norm(&u0, 2.0) / lp_norm(&w, 2.0);
    let v0 = u0.add(&w.scale(Complex64::new(scale, 0.0)));
    Ok((u0, v0))
}
