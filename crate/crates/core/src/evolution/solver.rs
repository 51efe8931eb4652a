use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::field::{FieldState, SpectralEngine};
use crate::geometry::Geometry;
use crate::multiplier::propagator_increments;
use crate::nonlinearity::NonlinearitySpec;

use super::observables::{observe, Observables};

/// Splitting scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Nonlinear flow for `dt`, then free flow for `dt`. First order.
    Lie,
    /// Half nonlinear, full free, half nonlinear. Second order, symmetric.
    Strang,
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "lie" => Ok(Scheme::Lie),
            "strang" => Ok(Scheme::Strang),
            other => Err(format!("unknown scheme `{other}` (expected lie or strang)")),
        }
    }
}

/// Step size, horizon and output cadence of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_final: f64,
    pub snapshot_every: usize,
    /// Sobolev indices recorded with every snapshot.
    #[serde(default)]
    pub sobolev_indices: Vec<f64>,
}

impl SolverConfig {
    /// Builds a config whose `dt` divides `t_final` exactly; the requested
    /// step is rounded to the nearest whole step count.
    pub fn new(scheme: Scheme, dt: f64, t_final: f64, snapshot_every: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(param("dt", format!("must be positive, got {dt}")));
        }
        if !(t_final.is_finite() && t_final >= 0.0) {
            return Err(param(
                "t_final",
                format!("must be non-negative, got {t_final}"),
            ));
        }
        if snapshot_every == 0 {
            return Err(param("snapshot_every", "must be at least 1"));
        }
        let steps = (t_final / dt)
            .round()
            .max(if t_final > 0.0 { 1.0 } else { 0.0 });
        let dt = if steps > 0.0 { t_final / steps } else { dt };
        Ok(SolverConfig {
            scheme,
            dt,
            t_final,
            snapshot_every,
            sobolev_indices: Vec::new(),
        })
    }

    pub fn with_sobolev(mut self, indices: &[f64]) -> Self {
        self.sobolev_indices = indices.to_vec();
        self
    }

    pub fn steps(&self) -> usize {
        if self.t_final == 0.0 {
            0
        } else {
            (self.t_final / self.dt).round() as usize
        }
    }
}

/// Snapshots and per-snapshot observables of a run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<FieldState>,
    pub observables: Vec<Observables>,
    /// Grid points whose nonlinear phase was non-finite and left unrotated.
    pub phase_overflows: u64,
}

impl Trajectory {
    pub fn final_state(&self) -> &FieldState {
        self.snapshots
            .last()
            .expect("trajectory always holds the initial state")
    }

    /// Writes `time,charge,energy,h_<s>...` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let indices: Vec<f64> = self
            .observables
            .first()
            .map(|o| o.sobolev.iter().map(|(s, _)| *s).collect())
            .unwrap_or_default();
        write!(out, "time,charge,energy")?;
        for s in &indices {
            write!(out, ",h_{s}")?;
        }
        writeln!(out)?;
        for o in &self.observables {
            write!(out, "{:e},{:e},{:e}", o.time, o.charge, o.energy)?;
            for (_, v) in &o.sobolev {
                write!(out, ",{v:e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Exact flow of `i u_t = -(lambda log-term + mu |u|^alpha) u` for time `dt`,
/// applied in place. Returns how many points had a non-finite phase.
fn rotate_in_place(values: &mut [Complex64], dt: f64, spec: &NonlinearitySpec) -> u64 {
    let mut overflows = 0;
    for z in values.iter_mut() {
        let phase = dt * spec.potential(*z);
        if phase == 0.0 {
            continue;
        }
        if !phase.is_finite() {
            overflows += 1;
            continue;
        }
        let (s, c) = phase.sin_cos();
        *z *= Complex64::new(c, s);
    }
    overflows
}

/// The pointwise nonlinear flow; preserves `|u|` at every grid point.
pub fn nonlinear_substep(state: &FieldState, dt: f64, spec: &NonlinearitySpec) -> FieldState {
    let mut out = state.clone();
    rotate_in_place(out.values_mut(), dt, spec);
    out.set_time(state.time() + dt);
    out
}

/// Reusable stepper holding the FFT workspace and propagator table.
pub struct Integrator {
    spec: NonlinearitySpec,
    scheme: Scheme,
    dt: f64,
    engine: SpectralEngine,
    propagator: Vec<Complex64>,
    phase_overflows: u64,
}

impl Integrator {
    pub fn new(geometry: &Geometry, spec: NonlinearitySpec, scheme: Scheme, dt: f64) -> Self {
        Integrator {
            spec,
            scheme,
            dt,
            engine: SpectralEngine::new(geometry),
            propagator: propagator_increments(geometry, dt),
            phase_overflows: 0,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn phase_overflows(&self) -> u64 {
        self.phase_overflows
    }

    /// Advances `state` by one step of size `dt` (which may be negative).
    pub fn step(&mut self, state: &mut FieldState) {
        let t = state.time() + self.dt;
        let values = state.values_mut();
        match self.scheme {
            Scheme::Strang => {
                self.phase_overflows += rotate_in_place(values, 0.5 * self.dt, &self.spec);
                self.engine.apply_increments(values, &self.propagator);
                self.phase_overflows += rotate_in_place(values, 0.5 * self.dt, &self.spec);
            }
            Scheme::Lie => {
                self.phase_overflows += rotate_in_place(values, self.dt, &self.spec);
                self.engine.apply_increments(values, &self.propagator);
            }
        }
        state.set_time(t);
    }
}

pub fn strang_step(state: &FieldState, dt: f64, spec: &NonlinearitySpec) -> FieldState {
    let mut out = state.clone();
    Integrator::new(state.geometry(), *spec, Scheme::Strang, dt).step(&mut out);
    out
}

pub fn lie_step(state: &FieldState, dt: f64, spec: &NonlinearitySpec) -> FieldState {
    let mut out = state.clone();
    Integrator::new(state.geometry(), *spec, Scheme::Lie, dt).step(&mut out);
    out
}

/// Runs the solver, calling `visit(step, state)` at step 0 and at every
/// snapshot step (including the last). Returns the final state and the
/// number of phase overflows.
pub fn evolve_visit(
    u0: &FieldState,
    spec: &NonlinearitySpec,
    config: &SolverConfig,
    mut visit: impl FnMut(usize, &FieldState),
) -> Result<(FieldState, u64)> {
    if !u0.is_finite() {
        return Err(Error::Diverged { step: 0 });
    }
    spec.validate(Some(u0.geometry().dim()))?;
    let steps = config.steps();
    let mut state = u0.clone();
    visit(0, &state);
    let mut integrator = Integrator::new(u0.geometry(), *spec, config.scheme, config.dt);
    let t0 = u0.time();
    for n in 1..=steps {
        integrator.step(&mut state);
        // accumulate time without drift
        state.set_time(t0 + n as f64 * config.dt);
        if !state.is_finite() {
            return Err(Error::Diverged { step: n });
        }
        if n % config.snapshot_every == 0 || n == steps {
            visit(n, &state);
        }
    }
    Ok((state, integrator.phase_overflows()))
}

/// Evolves `u0` and records snapshots at the configured cadence.
pub fn evolve(
    u0: &FieldState,
    spec: &NonlinearitySpec,
    config: &SolverConfig,
) -> Result<Trajectory> {
    let mut snapshots = Vec::new();
    let mut observables = Vec::new();
    let mut engine = SpectralEngine::new(u0.geometry());
    let (_, phase_overflows) = evolve_visit(u0, spec, config, |_, s| {
        observables.push(observe(&mut engine, s, spec, &config.sobolev_indices));
        snapshots.push(s.clone());
    })?;
    Ok(Trajectory {
        snapshots,
        observables,
        phase_overflows,
    })
}
