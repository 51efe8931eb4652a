//! Experiment dispatch and artifact output.

use std::f64::consts::{E, PI};
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use lognls_core::evolution::evolve;
use lognls_core::experiments::gronwall::{equality_family, gronwall_check, GronwallVerdict};
use lognls_core::experiments::localization::SLOPE_SLACK;
use lognls_core::experiments::smoothing::SPREAD_LIMIT;
use lognls_core::experiments::zygmund::GROWTH_TOLERANCE;
use lognls_core::experiments::{
    gausson_experiment, localization_error_experiment, make_localized_field, make_random_field,
    perturbed_pair, regularization_limit_experiment, smoothing_scan, stability_experiment,
    zygmund_scan, ExperimentReport, Gausson, RandomFieldSpec, SmoothingOptions, SourceFamily,
    ZygmundNormalization, ZygmundOptions,
};
use lognls_core::nonlinearity::{
    fit_lemma26, sweep_ch, sweep_eq32, sweep_lemma31, validate_lemma26, IneqReport, SweepOptions,
};
use lognls_core::snapshot::write_snapshot;
use lognls_core::{Complex64, Error as CoreError, FieldState, Geometry, NonlinearitySpec};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{Command, RunConfig};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Result of a run before anything is written.
pub struct RunOutput {
    pub report: ExperimentReport,
    /// Field snapshots to store next to the report (simulate only).
    pub snapshots: Vec<FieldState>,
    pub spec: NonlinearitySpec,
}

/// Runs the configured command.
pub fn execute(config: &RunConfig) -> Result<RunOutput, RunError> {
    let params = config.parameters();
    let mut snapshots = Vec::new();
    let report = match config.command {
        Command::Simulate => simulate(config, params, &mut snapshots)?,
        Command::Stability => stability(config, params)?,
        Command::Gausson => gausson(config, params)?,
        Command::Limit => limit(config, params)?,
        Command::Zygmund => zygmund(config, params)?,
        Command::Smoothing => smoothing(config, params)?,
        Command::Localize => localize(config, params)?,
        Command::Ineq => ineq(config, params)?,
        Command::Gronwall => gronwall(config, params)?,
    };
    Ok(RunOutput {
        report,
        snapshots,
        spec: config.nonlinearity(),
    })
}

/// Runs the command and writes `report.json`, the CSV, `metadata.json`
/// and any snapshots into the output directory. Returns the verdict.
pub fn run(config: &RunConfig) -> Result<bool, RunError> {
    let started = SystemTime::now();
    let clock = Instant::now();
    let output = execute(config)?;
    let dir = config.output_dir();
    write_artifacts(&dir, &output)?;
    let metadata = serde_json::json!({
        "command": config.command.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "started_unix": unix_seconds(started),
        "elapsed_seconds": clock.elapsed().as_secs_f64(),
        "threads": rayon::current_num_threads(),
    });
    let path = dir.join("metadata.json");
    let text = serde_json::to_string_pretty(&metadata).expect("metadata serialises") + "\n";
    fs::write(&path, text).map_err(|source| RunError::Io { path, source })?;
    Ok(output.report.verdict)
}

fn unix_seconds(t: SystemTime) -> f64 {
    t.duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

pub fn write_artifacts(dir: &Path, output: &RunOutput) -> Result<(), RunError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RunError::Io { path, source }
    };
    output.report.write_to(dir).map_err(|e| match e {
        CoreError::Io(source) => RunError::Io {
            path: dir.to_path_buf(),
            source,
        },
        other => RunError::Core(other),
    })?;
    if !output.snapshots.is_empty() {
        let snap_dir = dir.join("snapshots");
        fs::create_dir_all(&snap_dir).map_err(io(&snap_dir))?;
        for (i, state) in output.snapshots.iter().enumerate() {
            let path = snap_dir.join(format!("snapshot_{i:05}.bin"));
            let file = fs::File::create(&path).map_err(io(&path))?;
            write_snapshot(BufWriter::new(file), state, &output.spec)?;
        }
    }
    Ok(())
}

fn bounded_below(geometry: &Geometry) -> FieldState {
    let l = geometry.period(0);
    FieldState::from_fn(*geometry, |x| {
        Complex64::new(1.0, 0.0) + Complex64::from_polar(0.1, 2.0 * PI * x[0] / l)
    })
}

fn initial_datum(c: &RunConfig, geometry: &Geometry) -> Result<FieldState, CoreError> {
    let spec = RandomFieldSpec::new(
        c.float("experiment.s"),
        c.float("experiment.data_norm"),
        c.seed(),
    );
    match c.text("experiment.data") {
        "random" => make_random_field(&spec, geometry),
        "localized" => make_localized_field(&spec, geometry, c.float("experiment.envelope_width")),
        "gausson" => Gausson::new(
            c.float("experiment.omega"),
            c.float("equation.lambda"),
            geometry.dim(),
        )?
        .sample(geometry),
        "bounded_below" => Ok(bounded_below(geometry)),
        other => unreachable!("validated datum `{other}`"),
    }
}

fn max_of(xs: &[f64]) -> f64 {
    xs.iter().cloned().fold(f64::MIN, f64::max)
}

fn min_of(xs: &[f64]) -> f64 {
    xs.iter().cloned().fold(f64::MAX, f64::min)
}

fn simulate(
    c: &RunConfig,
    params: serde_json::Value,
    snapshots: &mut Vec<FieldState>,
) -> Result<ExperimentReport, CoreError> {
    let g = c.geometry();
    let u0 = initial_datum(c, &g)?;
    let solver = c.solver();
    let traj = evolve(&u0, &c.nonlinearity(), &solver)?;
    let obs = &traj.observables;
    let mut report = ExperimentReport::new("simulate", params)
        .with_series("time", obs.iter().map(|o| o.time).collect())
        .with_series("charge", obs.iter().map(|o| o.charge).collect())
        .with_series("energy", obs.iter().map(|o| o.energy).collect())
        .with_series("phase_overflows", vec![traj.phase_overflows as f64]);
    let mut columns = vec!["time".to_string(), "charge".into(), "energy".into()];
    for (i, s) in solver.sobolev_indices.iter().enumerate() {
        let name = format!("h_{s}");
        report = report.with_series(&name, obs.iter().map(|o| o.sobolev[i].1).collect());
        columns.push(name);
    }
    let columns: Vec<&str> = columns.iter().map(String::as_str).collect();
    *snapshots = traj.snapshots;
    Ok(report.with_primary(&columns))
}

fn stability(c: &RunConfig, params: serde_json::Value) -> Result<ExperimentReport, CoreError> {
    let g = c.geometry();
    let solver = c.solver();
    let base = c.nonlinearity();
    let lambdas = if c.flag("experiment.both_signs") && base.lambda != 0.0 {
        vec![-base.lambda.abs(), base.lambda.abs()]
    } else {
        vec![base.lambda]
    };
    let pairs = c.usize("experiment.pairs");
    let (lo, hi) = (c.float("experiment.gap_min"), c.float("experiment.gap_max"));
    let tol = c.float("experiment.tol");
    let jobs: Vec<(f64, usize)> = lambdas
        .iter()
        .flat_map(|&l| (0..pairs).map(move |i| (l, i)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(lambda, i)| {
            // relative gaps log-spaced over [gap_min, gap_max]
            let frac = if pairs > 1 {
                i as f64 / (pairs - 1) as f64
            } else {
                0.0
            };
            let gap = lo * (hi / lo).powf(frac);
            let data = RandomFieldSpec::new(
                c.float("experiment.s"),
                c.float("experiment.data_norm"),
                c.seed().wrapping_add(i as u64),
            );
            let (u0, v0) = perturbed_pair(&data, &g, gap)?;
            let spec = NonlinearitySpec { lambda, ..base };
            Ok((gap, stability_experiment(&u0, &v0, &spec, &solver, tol)?))
        })
        .collect::<Result<Vec<_>, CoreError>>()?;
    let sups: Vec<f64> = runs.iter().map(|(_, r)| r.sup_weighted).collect();
    Ok(ExperimentReport::new("stability", params)
        .with_series("lambda", jobs.iter().map(|j| j.0).collect())
        .with_series("relative_gap", runs.iter().map(|r| r.0).collect())
        .with_series("sup_weighted", sups.clone())
        .with_series(
            "sup_ratio",
            runs.iter().map(|(_, r)| max_of(&r.ratios)).collect(),
        )
        .with_series("bound_m", runs.iter().map(|(_, r)| r.bound.m).collect())
        .with_series(
            "charge_drift_rate",
            runs.iter().map(|(_, r)| r.charge_drift_rate).collect(),
        )
        .with_slack("sup_weighted", 1.0 + tol - max_of(&sups))
        .with_primary(&[
            "lambda",
            "relative_gap",
            "sup_weighted",
            "charge_drift_rate",
        ])
        .with_verdict(runs.iter().all(|(_, r)| r.verdict)))
}

fn gausson(c: &RunConfig, params: serde_json::Value) -> Result<ExperimentReport, CoreError> {
    let g = c.geometry();
    let (omega, lambda) = (c.float("experiment.omega"), c.float("equation.lambda"));
    let residual = Gausson::new(omega, lambda, g.dim())?.ansatz_residual(&g)?;
    let res = gausson_experiment(omega, lambda, &g, &c.solver())?;
    let (max_dev, max_res) = (
        c.float("experiment.max_deviation"),
        c.float("experiment.max_residual"),
    );
    let deviation = res.final_error();
    Ok(ExperimentReport::new("gausson", params)
        .with_series("time", res.times.clone())
        .with_series("deviation", res.errors.clone())
        .with_series("ansatz_residual", vec![residual])
        .with_series("charge_drift", vec![res.charge_drift])
        .with_slack("deviation", max_dev - deviation)
        .with_slack("ansatz_residual", max_res - residual)
        .with_primary(&["time", "deviation"])
        .with_verdict(deviation < max_dev && residual < max_res))
}

fn limit(c: &RunConfig, params: serde_json::Value) -> Result<ExperimentReport, CoreError> {
    let g = c.geometry();
    let u0 = initial_datum(c, &g)?;
    let res = regularization_limit_experiment(
        &u0,
        &c.nonlinearity(),
        &c.floats("experiment.epsilons"),
        &c.solver(),
    )?;
    let min_decay = c.float("experiment.min_decay");
    Ok(ExperimentReport::new("limit", params)
        .with_series("epsilon", res.epsilons.clone())
        .with_series("cross_distance", res.cross_distance.clone())
        .with_series("shifted_increments", res.shifted_increments.clone())
        .with_series("floor_increments", res.floor_increments.clone())
        .with_series("decay_per_decade", res.decay_per_decade.clone())
        .with_slack(
            "decay_per_decade",
            min_of(&res.decay_per_decade) - min_decay,
        )
        .with_primary(&["epsilon", "cross_distance"])
        .with_verdict(res.verdict(min_decay)))
}

fn zygmund(c: &RunConfig, params: serde_json::Value) -> Result<ExperimentReport, CoreError> {
    let opts = ZygmundOptions {
        period: c.float("grid.L"),
        t_final: c.float("solver.t_final"),
        samples: c.usize("experiment.samples"),
        seed: c.seed(),
        normalization: if c.flag("experiment.false_scaling") {
            ZygmundNormalization::NegativeHalf
        } else {
            ZygmundNormalization::L2
        },
        flat_probe: c.flag("experiment.flat_probe"),
    };
    let res = zygmund_scan(&c.usizes("experiment.resolutions"), &opts)?;
    Ok(ExperimentReport::new("zygmund", params)
        .with_series("N", res.scan.values.clone())
        .with_series("max_ratio", res.scan.measured.clone())
        .with_series("growth", res.growth.clone())
        .with_slack("growth", GROWTH_TOLERANCE - max_of(&res.growth))
        .with_primary(&["N", "max_ratio"])
        .with_verdict(res.verdict))
}

fn smoothing(c: &RunConfig, params: serde_json::Value) -> Result<ExperimentReport, CoreError> {
    let g = c.geometry();
    let family = match c.text("experiment.family") {
        "modulated" => SourceFamily::Modulated {
            kappa: c.float("experiment.kappa"),
        },
        _ => SourceFamily::Gaussian {
            width: c.float("experiment.width"),
        },
    };
    let intervals = c.usize("experiment.intervals");
    let opts = SmoothingOptions {
        s: c.float("experiment.s"),
        t_final: c.float("solver.t_final"),
        family,
        extra_power: if c.flag("experiment.false_scaling") {
            0.5
        } else {
            0.0
        },
        intervals: (intervals > 0).then_some(intervals),
    };
    let res = smoothing_scan(&g, &c.floats("experiment.radii"), &opts)?;
    Ok(ExperimentReport::new("smoothing", params)
        .with_series("R", res.scan.values.clone())
        .with_series("Q", res.scan.measured.clone())
        .with_series("slope", vec![res.scan.slope])
        .with_slack("spread", SPREAD_LIMIT - res.spread)
        .with_primary(&["R", "Q"])
        .with_verdict(res.verdict))
}

fn localize(c: &RunConfig, params: serde_json::Value) -> Result<ExperimentReport, CoreError> {
    let g = c.geometry();
    let u0 = initial_datum(c, &g)?;
    let traj = evolve(&u0, &c.nonlinearity(), &c.solver())?;
    let s = c.float("experiment.s");
    let res = localization_error_experiment(&traj, s, &c.floats("experiment.radii"))?;
    Ok(ExperimentReport::new("localize", params)
        .with_series("R", res.scan.values.clone())
        .with_series("error", res.scan.measured.clone())
        .with_series("scheduled_weight", res.scheduled_weights.clone())
        .with_series("slope", vec![res.scan.slope])
        .with_slack("slope", -s + SLOPE_SLACK - res.scan.slope)
        .with_slack("scheduled_weight", E - max_of(&res.scheduled_weights))
        .with_primary(&["R", "error", "scheduled_weight"])
        .with_verdict(res.verdict))
}

fn argmax_series(report: ExperimentReport, sweeps: &[IneqReport]) -> ExperimentReport {
    let coords = ["re_z", "im_z", "re_w", "im_w"];
    let mut report = report;
    for (k, name) in coords.iter().enumerate() {
        let name = format!("argmax_{name}");
        report = report.with_series(&name, sweeps.iter().map(|r| r.argmax[k]).collect());
    }
    report
        .with_series("max_ratio", sweeps.iter().map(|r| r.max_ratio).collect())
        .with_series("samples", sweeps.iter().map(|r| r.samples as f64).collect())
        .with_series(
            "violations",
            sweeps.iter().map(|r| r.violations as f64).collect(),
        )
}

fn ineq(c: &RunConfig, params: serde_json::Value) -> Result<ExperimentReport, CoreError> {
    let opts = SweepOptions::new(
        c.usize("experiment.samples"),
        c.seed(),
        c.float("experiment.min_modulus"),
        c.float("experiment.max_modulus"),
    );
    let lambda = c.float("equation.lambda");
    let deltas = c.floats("experiment.deltas");
    let report = ExperimentReport::new("ineq", params);
    Ok(match c.text("experiment.inequality") {
        "ch" => {
            let r = sweep_ch(&opts);
            argmax_series(report, std::slice::from_ref(&r))
                .with_slack("max_ratio", 1.0 - r.max_ratio)
                .with_primary(&["max_ratio", "violations"])
                .with_verdict(r.violations == 0)
        }
        "lemma31" => {
            let sweeps: Vec<IneqReport> = deltas
                .iter()
                .map(|&d| sweep_lemma31(d, lambda, &opts))
                .collect();
            let c1: Vec<f64> = sweeps.iter().map(|r| r.max_ratio).collect();
            let spread = max_of(&c1) / min_of(&c1);
            let bound = c.float("experiment.uniformity");
            argmax_series(report, &sweeps)
                .with_series("delta", deltas.clone())
                .with_slack("uniformity", bound - spread)
                .with_primary(&["delta", "max_ratio"])
                .with_verdict(spread < bound)
        }
        "eq32" => {
            let r = sweep_eq32(lambda, &opts);
            let finite = r.max_ratio.is_finite();
            argmax_series(report, std::slice::from_ref(&r))
                .with_primary(&["max_ratio", "samples"])
                .with_verdict(finite)
        }
        _ => {
            let (lo, hi) = (opts.min_modulus, opts.max_modulus);
            let fits: Vec<_> = deltas
                .iter()
                .map(|&d| fit_lemma26(d, lambda, lo, hi, 1 << 16))
                .collect();
            let violations: Vec<f64> = fits
                .iter()
                .map(|f| validate_lemma26(f, lambda, &opts) as f64)
                .collect();
            let clean = violations.iter().all(|v| *v == 0.0);
            report
                .with_series("delta", deltas.clone())
                .with_series("c1", fits.iter().map(|f| f.c1).collect())
                .with_series("c2", fits.iter().map(|f| f.c2).collect())
                .with_series("violations", violations)
                .with_primary(&["delta", "c1", "c2", "violations"])
                .with_verdict(clean)
        }
    })
}

fn gronwall(c: &RunConfig, params: serde_json::Value) -> Result<ExperimentReport, CoreError> {
    let steps = c.usize("experiment.steps");
    let t_final = c.float("solver.t_final");
    let times: Vec<f64> = (0..=steps)
        .map(|i| t_final * i as f64 / steps as f64)
        .collect();
    let mut rows: Vec<[f64; 5]> = Vec::new();
    for &a in &c.floats("experiment.a") {
        for &b in &c.floats("experiment.b") {
            for &delta in &c.floats("experiment.deltas") {
                let f = equality_family(a, b, delta, &times);
                // gap: relative distance to the bound, or the relative excess
                // of whichever side failed
                let (holds, gap) = match gronwall_check(a, b, delta, &times, &f)? {
                    GronwallVerdict::Holds { max_gap, .. } => (1.0, max_gap),
                    GronwallVerdict::Violated { value, bound, .. } => {
                        (0.0, (value - bound) / bound)
                    }
                    GronwallVerdict::PremiseFails { lhs, rhs, .. } => (0.0, (lhs - rhs) / rhs),
                };
                rows.push([a, b, delta, holds, gap]);
            }
        }
    }
    // a datum that breaks the premise must not produce a conclusion
    let violating: Vec<f64> = times.iter().map(|t| 2.0 + 5.0 * t).collect();
    let withheld = matches!(
        gronwall_check(1.0, 1.0, 0.5, &times, &violating)?,
        GronwallVerdict::PremiseFails { .. }
    );
    let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
    let worst = max_of(&col(4));
    let max_gap = c.float("experiment.max_gap");
    let all_hold = rows.iter().all(|r| r[3] == 1.0);
    Ok(ExperimentReport::new("gronwall", params)
        .with_series("a", col(0))
        .with_series("b", col(1))
        .with_series("delta", col(2))
        .with_series("holds", col(3))
        .with_series("gap", col(4))
        .with_series(
            "premise_control_withheld",
            vec![if withheld { 1.0 } else { 0.0 }],
        )
        .with_slack("gap", max_gap - worst)
        .with_primary(&["a", "b", "delta", "holds", "gap"])
        .with_verdict(all_hold && worst < max_gap && withheld))
}
