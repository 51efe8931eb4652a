//! The `lognls` command line: config parsing, dispatch and exit codes.
//!
//! Exit status is 0 when the run's verdict holds, 2 when it fails, and 1
//! for bad arguments, bad configs and I/O or numerical failures.

pub mod config;
pub mod run;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{parse_config, Command, ConfigError, Override, RunConfig};
pub use run::{execute, run, RunError, RunOutput};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_VERDICT: i32 = 2;

/// Caps the rayon pool used by a run.
pub const THREADS_VAR: &str = "LOGNLS_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "lognls",
    version,
    about = "Log-NLS simulation and estimate checks"
)]
struct Cli {
    #[command(subcommand)]
    action: Action,
}

#[derive(Debug, Subcommand)]
enum Action {
    /// Evolve one datum and record observables and snapshots
    Simulate(RunArgs),
    /// Growth of the distance between nearby solutions
    Stability(RunArgs),
    /// Deviation of the evolved Gausson from the standing wave
    Gausson(RunArgs),
    /// Agreement of two regularisation families as epsilon shrinks
    Limit(RunArgs),
    /// Space-time L^4 ratio across resolutions
    Zygmund(RunArgs),
    /// Local smoothing ratio across ball radii
    Smoothing(RunArgs),
    /// Localization error of the cut-off solution across radii
    Localize(RunArgs),
    /// Sweeps of pointwise inequalities for the nonlinearity
    Ineq(RunArgs),
    /// The nonlinear Gronwall bound on its equality family
    Gronwall(RunArgs),
    /// List the keys a command reads, with types and defaults
    Keys {
        #[arg(value_enum)]
        command: Command,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML config file
    config: Option<PathBuf>,
    /// Override a key, e.g. `--set grid.N=512`; repeatable
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory, same as `--set output=DIR`
    #[arg(short, long, value_name = "DIR")]
    output: Option<PathBuf>,
}

impl Action {
    fn split(self) -> Result<(Command, RunArgs), Command> {
        Ok(match self {
            Action::Simulate(a) => (Command::Simulate, a),
            Action::Stability(a) => (Command::Stability, a),
            Action::Gausson(a) => (Command::Gausson, a),
            Action::Limit(a) => (Command::Limit, a),
            Action::Zygmund(a) => (Command::Zygmund, a),
            Action::Smoothing(a) => (Command::Smoothing, a),
            Action::Localize(a) => (Command::Localize, a),
            Action::Ineq(a) => (Command::Ineq, a),
            Action::Gronwall(a) => (Command::Gronwall, a),
            Action::Keys { command } => return Err(command),
        })
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, String> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_VAR) {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| format!("{THREADS_VAR} must be a positive integer, got `{raw}`"))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| e.to_string())
}

/// Parses `args` (program name first), runs, and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_FAILURE,
            };
        }
    };
    let (command, args) = match cli.action.split() {
        Ok(pair) => pair,
        Err(command) => {
            print!("{}", config::describe_keys(command));
            return EXIT_OK;
        }
    };
    let mut overrides = Vec::with_capacity(args.set.len() + 1);
    for raw in &args.set {
        match Override::parse(raw) {
            Ok(o) => overrides.push(o),
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_FAILURE;
            }
        }
    }
    if let Some(dir) = &args.output {
        overrides.push(Override::new(
            "output",
            toml::Value::String(dir.display().to_string()),
        ));
    }
    let config = match parse_config(command, args.config.as_deref(), &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAILURE;
        }
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAILURE;
        }
    };
    match pool.install(|| run(&config)) {
        Ok(verdict) => {
            let dir = config.output_dir();
            eprintln!(
                "{}: verdict {}; report in {}",
                command.name(),
                if verdict { "PASS" } else { "FAIL" },
                dir.display()
            );
            if verdict {
                EXIT_OK
            } else {
                EXIT_VERDICT
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}
