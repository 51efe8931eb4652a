use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lognls_core::snapshot::read_snapshot;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn lognls(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lognls"));
    cmd.args(args).env_remove("LOGNLS_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

const MINIMAL: &str = "[grid]\nd = 1\nN = 256\n\n[equation]\nlambda = 1\n";

#[test]
fn help_and_version_exit_zero_bad_usage_exits_one() {
    assert_eq!(lognls(&["--help"], &[]).status.code(), Some(0));
    assert_eq!(lognls(&["--version"], &[]).status.code(), Some(0));
    assert_eq!(lognls(&["frobnicate"], &[]).status.code(), Some(1));
    assert_eq!(lognls(&[], &[]).status.code(), Some(1));
}

#[test]
fn keys_lists_defaults() {
    let out = lognls(&["keys", "simulate"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("solver.scheme"));
    assert!(text.contains("\"strang\""));
    assert!(text.contains("required"));
}

#[test]
fn minimal_simulate_with_zero_horizon_writes_one_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, MINIMAL).unwrap();
    let out_dir = dir.path().join("out");
    let out = lognls(
        &[
            "simulate",
            cfg.to_str().unwrap(),
            "--set",
            "solver.t_final=0",
            "-o",
            out_dir.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let snaps: Vec<_> = fs::read_dir(out_dir.join("snapshots")).unwrap().collect();
    assert_eq!(snaps.len(), 1);

    let r = report(&out_dir);
    assert_eq!(r["verdict"], true);
    assert_eq!(r["parameters"]["solver.scheme"], "strang");
    assert_eq!(r["parameters"]["equation.epsilon"], 0.0);
    assert_eq!(r["parameters"]["equation.reg_family"], "exact");
    assert_eq!(r["series"]["time"], serde_json::json!([0.0]));

    let csv = fs::read_to_string(out_dir.join("simulate.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("time,charge,energy,h_1"));
    assert_eq!(csv.lines().count(), 2);
    assert!(out_dir.join("metadata.json").exists());
}

#[test]
fn snapshots_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = lognls(
        &[
            "simulate",
            "--set",
            "grid.d=2",
            "--set",
            "grid.N=16",
            "--set",
            "grid.L=8",
            "--set",
            "equation.lambda=-0.5",
            "--set",
            "solver.dt=0.01",
            "--set",
            "solver.t_final=0.2",
            "--set",
            "solver.snapshot_every=10",
            "-o",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(dir.path());
    let times = r["series"]["time"].as_array().unwrap().clone();
    assert_eq!(times.len(), 3);
    let charges = r["series"]["charge"].as_array().unwrap().clone();
    for (i, (t, q)) in times.iter().zip(&charges).enumerate() {
        let path = dir.path().join(format!("snapshots/snapshot_{i:05}.bin"));
        let file = std::io::BufReader::new(fs::File::open(path).unwrap());
        let (header, state) = read_snapshot(file).unwrap();
        assert_eq!(header.d, 2);
        assert_eq!(header.N, vec![16, 16]);
        assert_eq!(header.lambda, -0.5);
        assert_eq!(header.time, t.as_f64().unwrap());
        let q_file = lognls_core::evolution::charge(&state);
        assert!((q_file - q.as_f64().unwrap()).abs() < 1e-14);
    }
}

#[test]
fn config_errors_exit_one_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, MINIMAL).unwrap();
    let c = cfg.to_str().unwrap();

    let out = lognls(&["simulate", c, "--set", "equation.alpha=-1"], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("equation.alpha"));
    assert!(stderr(&out).contains("0<α<4/(d−2)₊"));

    let dup = dir.path().join("dup.toml");
    fs::write(&dup, format!("{MINIMAL}lambda = 2\n")).unwrap();
    let out = lognls(&["simulate", dup.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("equation.lambda: duplicate key"),
        "{}",
        stderr(&out)
    );

    let out = lognls(&["simulate", c, "--set", "solver.tfinal=1"], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("solver.tfinal: unknown key"));

    let out = lognls(
        &["simulate", "--set", "grid.d=1", "--set", "grid.N=64"],
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("equation.lambda: missing required key"));

    let out = lognls(&["simulate", "/nonexistent/run.toml"], &[]);
    assert_eq!(out.status.code(), Some(1));

    let out = lognls(&["gronwall", "--set", "bad"], &[]);
    assert_eq!(out.status.code(), Some(1));

    let out = lognls(
        &["gronwall", "-o", dir.path().to_str().unwrap()],
        &[("LOGNLS_THREADS", "0")],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("LOGNLS_THREADS"));
}

#[test]
fn infrastructure_failure_exits_one() {
    // the Gausson does not fit in this box
    let out = lognls(
        &[
            "gausson",
            "--set",
            "grid.d=1",
            "--set",
            "grid.N=64",
            "--set",
            "grid.L=4",
            "--set",
            "equation.lambda=1",
            "-o",
            "/tmp/unused-lognls",
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("box too small"));
}

#[test]
fn stability_with_acceptance_parameters_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("stability.toml");
    let out = lognls(
        &[
            "stability",
            cfg.to_str().unwrap(),
            "-o",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(dir.path());
    assert_eq!(r["verdict"], true);
    let sups = r["series"]["sup_weighted"].as_array().unwrap();
    assert_eq!(sups.len(), 40);
    assert!(sups.iter().all(|s| s.as_f64().unwrap() <= 1.05));
    assert!(r["slack"]["sup_weighted"].as_f64().unwrap() >= 0.0);
}

#[test]
fn zygmund_with_false_scaling_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("zygmund.toml");
    let out = lognls(
        &[
            "zygmund",
            cfg.to_str().unwrap(),
            "--set",
            "experiment.false_scaling=true",
            "-o",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert_eq!(report(dir.path())["verdict"], false);
}

#[test]
fn reports_are_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [(&str, &[&str]); 3] = [
        (
            "simulate",
            &[
                "--set",
                "grid.d=1",
                "--set",
                "grid.N=128",
                "--set",
                "equation.lambda=1",
                "--set",
                "seed=9",
            ],
        ),
        (
            "zygmund",
            &[
                "--set",
                "experiment.resolutions=[16, 32, 64]",
                "--set",
                "experiment.samples=12",
            ],
        ),
        (
            "ineq",
            &[
                "--set",
                "experiment.samples=50000",
                "--set",
                "experiment.inequality=lemma31",
            ],
        ),
    ];
    for (command, args) in runs {
        let mut outputs = Vec::new();
        for (k, threads) in ["1", "4"].iter().enumerate() {
            let out_dir = dir.path().join(format!("{command}-{k}"));
            let mut all: Vec<&str> = vec![command];
            all.extend_from_slice(args);
            let out_str = out_dir.to_str().unwrap().to_string();
            all.extend_from_slice(&["-o", &out_str]);
            let out = lognls(&all, &[("LOGNLS_THREADS", threads)]);
            assert_eq!(out.status.code(), Some(0), "{command}: {}", stderr(&out));
            let meta: serde_json::Value =
                serde_json::from_str(&fs::read_to_string(out_dir.join("metadata.json")).unwrap())
                    .unwrap();
            assert_eq!(meta["threads"], threads.parse::<u64>().unwrap());
            outputs.push((
                fs::read(out_dir.join("report.json")).unwrap(),
                fs::read(out_dir.join(format!("{command}.csv"))).unwrap(),
            ));
        }
        assert_eq!(outputs[0], outputs[1], "{command}");
    }
}
