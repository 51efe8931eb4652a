//! Run configuration.
//!
//! A config file is TOML whose tables flatten to dotted keys, so
//! `[grid] N = 256` and `grid.N = 256` are the same key. `--set key=value`
//! overrides are applied on top of the file. Every key is declared in
//! [`KEYS`] together with its type, range, default and the commands that
//! read it; anything else is rejected.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lognls_core::evolution::{Scheme, SolverConfig};
use lognls_core::{Error as CoreError, Geometry, NonlinearitySpec, RegFamily};
use thiserror::Error;
use toml::Value;

/// The experiment or run selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, clap::ValueEnum)]
pub enum Command {
    Simulate,
    Stability,
    Gausson,
    Limit,
    Zygmund,
    Smoothing,
    Localize,
    Ineq,
    Gronwall,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Simulate,
        Command::Stability,
        Command::Gausson,
        Command::Limit,
        Command::Zygmund,
        Command::Smoothing,
        Command::Localize,
        Command::Ineq,
        Command::Gronwall,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Stability => "stability",
            Command::Gausson => "gausson",
            Command::Limit => "limit",
            Command::Zygmund => "zygmund",
            Command::Smoothing => "smoothing",
            Command::Localize => "localize",
            Command::Ineq => "ineq",
            Command::Gronwall => "gronwall",
        }
    }

    fn bit(self) -> u16 {
        1 << self as u16
    }
}

const SIM: u16 = 1 << Command::Simulate as u16;
const STAB: u16 = 1 << Command::Stability as u16;
const GAU: u16 = 1 << Command::Gausson as u16;
const LIM: u16 = 1 << Command::Limit as u16;
const ZYG: u16 = 1 << Command::Zygmund as u16;
const SMO: u16 = 1 << Command::Smoothing as u16;
const LOC: u16 = 1 << Command::Localize as u16;
const INEQ: u16 = 1 << Command::Ineq as u16;
const GRON: u16 = 1 << Command::Gronwall as u16;
const ALL: u16 = SIM | STAB | GAU | LIM | ZYG | SMO | LOC | INEQ | GRON;
const GRID: u16 = SIM | STAB | GAU | LIM | SMO | LOC;
const EVOLVE: u16 = SIM | STAB | GAU | LIM | LOC;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{key}: duplicate key")]
    Duplicate { key: String },
    #[error("{origin}: {message}")]
    Syntax { origin: String, message: String },
    #[error("malformed override `{arg}`: expected key=value")]
    Override { arg: String },
    #[error("{key}: unknown key")]
    Unknown { key: String },
    #[error("{key}: not used by `{command}`")]
    NotUsed { key: String, command: &'static str },
    #[error("{key}: expected {expected}, found {found}")]
    Type {
        key: String,
        expected: &'static str,
        found: String,
    },
    #[error("{key}: {message}")]
    Range { key: String, message: String },
    #[error("{key}: missing required key")]
    Missing { key: String },
}

impl ConfigError {
    /// Dotted path of the offending key, when the error concerns one.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Duplicate { key }
            | ConfigError::Unknown { key }
            | ConfigError::NotUsed { key, .. }
            | ConfigError::Type { key, .. }
            | ConfigError::Range { key, .. }
            | ConfigError::Missing { key } => Some(key),
            _ => None,
        }
    }
}

fn range(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Range {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Float,
    Int,
    Bool,
    Text,
    Choice(&'static [&'static str]),
    Floats,
    Ints,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Float => "a number",
            Kind::Int => "an integer",
            Kind::Bool => "a boolean",
            Kind::Text | Kind::Choice(_) => "a string",
            Kind::Floats => "an array of numbers",
            Kind::Ints => "an array of integers",
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Bound {
    Finite,
    Positive,
    NonNegative,
    AtLeast(i64),
    /// `(0, 1]`
    Unit,
}

#[derive(Debug, Clone, Copy)]
enum Fallback {
    Required,
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(&'static str),
    Floats(&'static [f64]),
    Ints(&'static [i64]),
}

impl Fallback {
    fn value(self) -> Option<Value> {
        Some(match self {
            Fallback::Required => return None,
            Fallback::Float(x) => Value::Float(x),
            Fallback::Int(n) => Value::Integer(n),
            Fallback::Bool(b) => Value::Boolean(b),
            Fallback::Text(s) => Value::String(s.to_string()),
            Fallback::Floats(xs) => Value::Array(xs.iter().map(|x| Value::Float(*x)).collect()),
            Fallback::Ints(ns) => Value::Array(ns.iter().map(|n| Value::Integer(*n)).collect()),
        })
    }
}

/// One configuration key.
pub struct KeySpec {
    pub key: &'static str,
    kind: Kind,
    bound: Bound,
    commands: u16,
    default: fn(Command) -> Fallback,
    pub doc: &'static str,
}

impl KeySpec {
    pub fn applies(&self, command: Command) -> bool {
        self.commands & command.bit() != 0
    }

    /// Default rendered for `command`, or `None` if the key is required.
    pub fn default_for(&self, command: Command) -> Option<Value> {
        (self.default)(command).value()
    }

    pub fn type_name(&self) -> &'static str {
        self.kind.name()
    }

    fn coerce(&self, value: Value) -> Result<Value, ConfigError> {
        let mismatch = |v: &Value| ConfigError::Type {
            key: self.key.to_string(),
            expected: self.kind.name(),
            found: describe(v),
        };
        let number = |v: Value| match v {
            Value::Integer(n) => Ok(Value::Float(n as f64)),
            Value::Float(_) => Ok(v),
            other => Err(mismatch(&other)),
        };
        match (self.kind, value) {
            (Kind::Float, v) => number(v),
            (Kind::Int, v @ Value::Integer(_)) => Ok(v),
            (Kind::Bool, v @ Value::Boolean(_)) => Ok(v),
            (Kind::Text, v @ Value::String(_)) => Ok(v),
            (Kind::Choice(options), Value::String(s)) => {
                if options.contains(&s.as_str()) {
                    Ok(Value::String(s))
                } else {
                    Err(range(
                        self.key,
                        format!("`{s}` is not one of {}", options.join(", ")),
                    ))
                }
            }
            (Kind::Floats, Value::Array(items)) => Ok(Value::Array(
                items.into_iter().map(number).collect::<Result<_, _>>()?,
            )),
            (Kind::Ints, Value::Array(items)) => {
                if let Some(bad) = items.iter().find(|v| !v.is_integer()) {
                    return Err(mismatch(bad));
                }
                Ok(Value::Array(items))
            }
            (_, v) => Err(mismatch(&v)),
        }
    }

    fn check_bound(&self, value: &Value) -> Result<(), ConfigError> {
        let numbers: Vec<f64> = match value {
            Value::Float(x) => vec![*x],
            Value::Integer(n) => vec![*n as f64],
            Value::Array(items) => {
                if items.is_empty() {
                    return Err(range(self.key, "must not be empty"));
                }
                items
                    .iter()
                    .map(|v| v.as_float().or(v.as_integer().map(|n| n as f64)).unwrap())
                    .collect()
            }
            _ => return Ok(()),
        };
        for x in numbers {
            let ok = match self.bound {
                Bound::Finite => x.is_finite(),
                Bound::Positive => x.is_finite() && x > 0.0,
                Bound::NonNegative => x.is_finite() && x >= 0.0,
                Bound::AtLeast(n) => x >= n as f64,
                Bound::Unit => x > 0.0 && x <= 1.0,
            };
            if !ok {
                let want = match self.bound {
                    Bound::Finite => "finite".to_string(),
                    Bound::Positive => "positive".to_string(),
                    Bound::NonNegative => "non-negative".to_string(),
                    Bound::AtLeast(n) => format!("at least {n}"),
                    Bound::Unit => "in (0, 1]".to_string(),
                };
                return Err(range(self.key, format!("must be {want}, got {x}")));
            }
        }
        Ok(())
    }
}

fn describe(v: &Value) -> String {
    match v {
        Value::String(s) => format!("string `{s}`"),
        other => format!("{} `{other}`", other.type_str()),
    }
}

macro_rules! key {
    ($key:literal, $kind:expr, $bound:expr, $commands:expr, $default:expr, $doc:literal) => {
        KeySpec {
            key: $key,
            kind: $kind,
            bound: $bound,
            commands: $commands,
            default: $default,
            doc: $doc,
        }
    };
}

use Bound::*;
use Fallback as F;

/// Every accepted key.
pub static KEYS: &[KeySpec] = &[
    key!(
        "seed",
        Kind::Int,
        AtLeast(0),
        ALL,
        |_| F::Int(0),
        "base seed for random data and samples"
    ),
    key!(
        "output",
        Kind::Text,
        Finite,
        ALL,
        |_| F::Text("lognls-out"),
        "output directory"
    ),
    key!(
        "equation.lambda",
        Kind::Float,
        Finite,
        EVOLVE | INEQ,
        |c| if c == Command::Ineq {
            F::Float(1.0)
        } else {
            F::Required
        },
        "coefficient of u log|u|^2"
    ),
    key!(
        "equation.mu",
        Kind::Float,
        Finite,
        SIM | LIM | LOC,
        |_| F::Float(0.0),
        "coefficient of the power term; 0 disables it"
    ),
    key!(
        "equation.alpha",
        Kind::Float,
        Finite,
        SIM | LIM | LOC,
        |_| F::Float(2.0),
        "exponent of the power term"
    ),
    key!(
        "equation.reg_family",
        Kind::Choice(&["exact", "shifted_log", "floor_log"]),
        Finite,
        SIM | STAB | LOC,
        |_| F::Text("exact"),
        "regularisation of the logarithm"
    ),
    key!(
        "equation.epsilon",
        Kind::Float,
        NonNegative,
        SIM | STAB | LOC,
        |_| F::Float(0.0),
        "regularisation parameter; 0 with the exact family"
    ),
    key!(
        "grid.d",
        Kind::Int,
        AtLeast(1),
        GRID,
        |_| F::Required,
        "dimension, 1 or 2"
    ),
    key!(
        "grid.N",
        Kind::Int,
        AtLeast(8),
        GRID,
        |_| F::Required,
        "points per axis, even"
    ),
    key!(
        "grid.L",
        Kind::Float,
        Positive,
        GRID | ZYG,
        |c| if c == Command::Zygmund {
            F::Float(std::f64::consts::TAU)
        } else {
            F::Float(32.0)
        },
        "period of each axis"
    ),
    key!(
        "solver.scheme",
        Kind::Choice(&["strang", "lie"]),
        Finite,
        EVOLVE,
        |_| F::Text("strang"),
        "splitting scheme"
    ),
    key!(
        "solver.dt",
        Kind::Float,
        Positive,
        EVOLVE,
        |_| F::Float(1e-3),
        "time step, rounded so that it divides t_final"
    ),
    key!(
        "solver.t_final",
        Kind::Float,
        NonNegative,
        EVOLVE | ZYG | SMO | GRON,
        |_| F::Float(1.0),
        "time horizon"
    ),
    key!(
        "solver.snapshot_every",
        Kind::Int,
        AtLeast(1),
        EVOLVE,
        |c| if c == Command::Localize {
            F::Int(1)
        } else {
            F::Int(100)
        },
        "steps between snapshots; localize integrates over snapshots"
    ),
    key!(
        "solver.sobolev",
        Kind::Floats,
        Finite,
        SIM | STAB,
        |_| F::Floats(&[1.0]),
        "Sobolev indices recorded per snapshot; stability tracks M in the first"
    ),
    key!(
        "experiment.data",
        Kind::Choice(&["random", "localized", "gausson", "bounded_below"]),
        Finite,
        SIM | LIM | LOC,
        |c| if c == Command::Localize {
            F::Text("localized")
        } else {
            F::Text("random")
        },
        "initial datum"
    ),
    key!(
        "experiment.s",
        Kind::Float,
        Finite,
        SIM | STAB | LIM | LOC | SMO,
        |c| match c {
            Command::Simulate | Command::Stability => F::Float(1.0),
            _ => F::Float(0.5),
        },
        "Sobolev index of random data; smoothing index"
    ),
    key!(
        "experiment.data_norm",
        Kind::Float,
        NonNegative,
        SIM | STAB | LIM | LOC,
        |c| match c {
            Command::Stability | Command::Limit => F::Float(4.0),
            _ => F::Float(1.0),
        },
        "H^s norm of random data"
    ),
    key!(
        "experiment.envelope_width",
        Kind::Float,
        Positive,
        SIM | LIM | LOC,
        |_| F::Float(4.0),
        "Gaussian envelope width of localized data"
    ),
    key!(
        "experiment.omega",
        Kind::Float,
        Finite,
        SIM | GAU | LIM | LOC,
        |_| F::Float(0.0),
        "Gausson frequency"
    ),
    key!(
        "experiment.pairs",
        Kind::Int,
        AtLeast(1),
        STAB,
        |_| F::Int(20),
        "number of seeded pairs per sign of lambda"
    ),
    key!(
        "experiment.both_signs",
        Kind::Bool,
        Finite,
        STAB,
        |_| F::Bool(false),
        "run every pair at +|lambda| and -|lambda|"
    ),
    key!(
        "experiment.gap_min",
        Kind::Float,
        Positive,
        STAB,
        |_| F::Float(1e-3),
        "smallest relative gap ||u0 - v0|| / ||u0||"
    ),
    key!(
        "experiment.gap_max",
        Kind::Float,
        Positive,
        STAB,
        |_| F::Float(1e-1),
        "largest relative gap"
    ),
    key!(
        "experiment.tol",
        Kind::Float,
        NonNegative,
        STAB,
        |_| F::Float(0.05),
        "allowed excess of the weighted ratio over 1"
    ),
    key!(
        "experiment.max_deviation",
        Kind::Float,
        Positive,
        GAU,
        |_| F::Float(1e-4),
        "largest admissible relative deviation at t_final"
    ),
    key!(
        "experiment.max_residual",
        Kind::Float,
        Positive,
        GAU,
        |_| F::Float(1e-10),
        "largest admissible pointwise ansatz residual"
    ),
    key!(
        "experiment.epsilons",
        Kind::Floats,
        Positive,
        LIM,
        |_| F::Floats(&[1e-2, 1e-3, 1e-4]),
        "strictly decreasing regularisation parameters"
    ),
    key!(
        "experiment.min_decay",
        Kind::Float,
        Positive,
        LIM,
        |_| F::Float(2.0),
        "required decay of the cross distance per decade"
    ),
    key!(
        "experiment.resolutions",
        Kind::Ints,
        AtLeast(8),
        ZYG,
        |_| F::Ints(&[32, 64, 128, 256]),
        "grid sizes of the scan"
    ),
    key!(
        "experiment.samples",
        Kind::Int,
        AtLeast(1),
        ZYG | INEQ,
        |c| if c == Command::Ineq {
            F::Int(1_000_000)
        } else {
            F::Int(50)
        },
        "random samples per resolution or sweep"
    ),
    key!(
        "experiment.false_scaling",
        Kind::Bool,
        Finite,
        ZYG | SMO,
        |_| F::Bool(false),
        "normalise by a scaling the estimate does not support"
    ),
    key!(
        "experiment.flat_probe",
        Kind::Bool,
        Finite,
        ZYG,
        |_| F::Bool(true),
        "include the flat-spectrum datum at each resolution"
    ),
    key!(
        "experiment.radii",
        Kind::Floats,
        Positive,
        SMO | LOC,
        |c| if c == Command::Localize {
            F::Floats(&[8.0, 16.0, 32.0, 64.0])
        } else {
            F::Floats(&[4.0, 8.0, 16.0, 32.0])
        },
        "ball radii of the scan"
    ),
    key!(
        "experiment.family",
        Kind::Choice(&["modulated", "gaussian"]),
        Finite,
        SMO,
        |_| F::Text("modulated"),
        "source family"
    ),
    key!(
        "experiment.kappa",
        Kind::Float,
        Positive,
        SMO,
        |_| F::Float(0.125),
        "frequency per unit radius of the modulated source"
    ),
    key!(
        "experiment.width",
        Kind::Float,
        Positive,
        SMO,
        |_| F::Float(2.0),
        "width of the Gaussian source"
    ),
    key!(
        "experiment.intervals",
        Kind::Int,
        AtLeast(0),
        SMO,
        |_| F::Int(0),
        "time intervals of the quadrature; 0 resolves the fastest mode"
    ),
    key!(
        "experiment.inequality",
        Kind::Choice(&["ch", "lemma31", "eq32", "lemma26"]),
        Finite,
        INEQ,
        |_| F::Text("ch"),
        "pointwise inequality to sweep"
    ),
    key!(
        "experiment.deltas",
        Kind::Floats,
        Unit,
        INEQ | GRON,
        |c| if c == Command::Gronwall {
            F::Floats(&[0.5, 0.1])
        } else {
            F::Floats(&[0.5, 0.1, 0.02, 0.005])
        },
        "exponents delta"
    ),
    key!(
        "experiment.min_modulus",
        Kind::Float,
        Positive,
        INEQ,
        |_| F::Float(1e-300),
        "smallest sampled modulus; delta-weighted suprema sit near e^(-1/delta)"
    ),
    key!(
        "experiment.max_modulus",
        Kind::Float,
        Positive,
        INEQ,
        |_| F::Float(1e12),
        "largest sampled modulus; clamped to 1 for lemma31"
    ),
    key!(
        "experiment.uniformity",
        Kind::Float,
        Positive,
        INEQ,
        |_| F::Float(2.0),
        "bound on max/min of delta-weighted constants"
    ),
    key!(
        "experiment.a",
        Kind::Floats,
        NonNegative,
        GRON,
        |_| F::Floats(&[0.1, 1.0, 10.0]),
        "initial values a"
    ),
    key!(
        "experiment.b",
        Kind::Floats,
        NonNegative,
        GRON,
        |_| F::Floats(&[0.1, 1.0]),
        "rates b"
    ),
    key!(
        "experiment.steps",
        Kind::Int,
        AtLeast(1),
        GRON,
        |_| F::Int(2048),
        "time intervals of the sampled family"
    ),
    key!(
        "experiment.max_gap",
        Kind::Float,
        Positive,
        GRON,
        |_| F::Float(1e-8),
        "largest admissible relative gap to the bound"
    ),
];

pub fn lookup(key: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|k| k.key == key)
}

/// A `key=value` override. The value is read as a TOML value and falls
/// back to a bare string, so `solver.scheme=lie` needs no quotes.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub key: String,
    pub value: Value,
}

impl Override {
    pub fn new(key: &str, value: Value) -> Self {
        Override {
            key: key.to_string(),
            value,
        }
    }

    pub fn parse(arg: &str) -> Result<Self, ConfigError> {
        let (key, raw) = arg
            .split_once('=')
            .filter(|(k, _)| !k.trim().is_empty())
            .ok_or_else(|| ConfigError::Override {
                arg: arg.to_string(),
            })?;
        let raw = raw.trim();
        let value = match format!("v = {raw}").parse::<toml::Table>() {
            Ok(mut t) if t.len() == 1 => t.remove("v").unwrap(),
            _ => Value::String(raw.to_string()),
        };
        Ok(Override::new(key.trim(), value))
    }
}

/// A fully resolved and validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    values: BTreeMap<String, Value>,
}

/// Reads `path` (if any), applies `overrides` and resolves defaults.
pub fn parse_config(
    command: Command,
    path: Option<&Path>,
    overrides: &[Override],
) -> Result<RunConfig, ConfigError> {
    let text = match path {
        Some(p) => Some(
            std::fs::read_to_string(p).map_err(|source| ConfigError::Io {
                path: p.to_path_buf(),
                source,
            })?,
        ),
        None => None,
    };
    let origin = path.map_or("config".to_string(), |p| p.display().to_string());
    parse_config_str(command, text.as_deref(), &origin, overrides)
}

/// [`parse_config`] on file contents already in memory.
pub fn parse_config_str(
    command: Command,
    text: Option<&str>,
    origin: &str,
    overrides: &[Override],
) -> Result<RunConfig, ConfigError> {
    let mut raw = BTreeMap::new();
    if let Some(text) = text {
        let table = text.parse::<toml::Table>().map_err(|e| {
            if e.message() == "duplicate key" {
                if let Some(span) = e.span() {
                    return ConfigError::Duplicate {
                        key: duplicate_path(text, span),
                    };
                }
            }
            ConfigError::Syntax {
                origin: origin.to_string(),
                message: e.to_string(),
            }
        })?;
        flatten("", table, &mut raw)?;
    }
    let mut seen = BTreeSet::new();
    for o in overrides {
        if !seen.insert(o.key.as_str()) {
            return Err(ConfigError::Duplicate { key: o.key.clone() });
        }
        raw.insert(o.key.clone(), o.value.clone());
    }
    resolve(command, raw)
}

fn flatten(
    prefix: &str,
    table: toml::Table,
    out: &mut BTreeMap<String, Value>,
) -> Result<(), ConfigError> {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(t) if lookup(&key).is_none() => flatten(&key, t, out)?,
            v => {
                out.insert(key, v);
            }
        }
    }
    Ok(())
}

/// Dotted path of a duplicated key from the span the parser reports.
fn duplicate_path(text: &str, span: std::ops::Range<usize>) -> String {
    let name = text[span.clone()].trim().trim_matches('"').to_string();
    let line_start = text[..span.start].rfind('\n').map_or(0, |i| i + 1);
    if text[line_start..].trim_start().starts_with('[') {
        return name;
    }
    let header = text[..line_start]
        .lines()
        .rev()
        .map(str::trim_start)
        .find(|l| l.starts_with('['))
        .and_then(|l| l.trim_start_matches('[').split(']').next())
        .map(str::trim);
    match header {
        Some(h) if !h.is_empty() => format!("{h}.{name}"),
        _ => name,
    }
}

fn resolve(command: Command, mut raw: BTreeMap<String, Value>) -> Result<RunConfig, ConfigError> {
    for key in raw.keys() {
        let spec = lookup(key).ok_or_else(|| ConfigError::Unknown { key: key.clone() })?;
        if !spec.applies(command) {
            return Err(ConfigError::NotUsed {
                key: key.clone(),
                command: command.name(),
            });
        }
    }
    let mut values = BTreeMap::new();
    for spec in KEYS.iter().filter(|k| k.applies(command)) {
        let value = match raw.remove(spec.key) {
            Some(v) => spec.coerce(v)?,
            None => spec
                .default_for(command)
                .ok_or_else(|| ConfigError::Missing {
                    key: spec.key.to_string(),
                })?,
        };
        spec.check_bound(&value)?;
        values.insert(spec.key.to_string(), value);
    }
    let config = RunConfig { command, values };
    config.validate()?;
    Ok(config)
}

fn core_param(prefix: &str, err: CoreError) -> ConfigError {
    match err {
        CoreError::Parameter { name, reason } => range(&format!("{prefix}.{name}"), reason),
        other => range(prefix, other.to_string()),
    }
}

fn increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] > w[0])
}

impl RunConfig {
    fn value(&self, key: &str) -> &Value {
        self.values
            .get(key)
            .unwrap_or_else(|| panic!("`{key}` is not read by {}", self.command.name()))
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.values.get(key)
    }

    pub fn values(&self) -> &BTreeMap<String, Value> {
        &self.values
    }

    pub fn float(&self, key: &str) -> f64 {
        self.value(key).as_float().expect("validated as a number")
    }

    pub fn int(&self, key: &str) -> i64 {
        self.value(key)
            .as_integer()
            .expect("validated as an integer")
    }

    pub fn usize(&self, key: &str) -> usize {
        self.int(key) as usize
    }

    pub fn flag(&self, key: &str) -> bool {
        self.value(key).as_bool().expect("validated as a boolean")
    }

    pub fn text(&self, key: &str) -> &str {
        self.value(key).as_str().expect("validated as a string")
    }

    pub fn floats(&self, key: &str) -> Vec<f64> {
        let items = self.value(key).as_array().expect("validated as an array");
        items.iter().map(|v| v.as_float().unwrap()).collect()
    }

    pub fn usizes(&self, key: &str) -> Vec<usize> {
        let items = self.value(key).as_array().expect("validated as an array");
        items
            .iter()
            .map(|v| v.as_integer().unwrap() as usize)
            .collect()
    }

    pub fn seed(&self) -> u64 {
        self.int("seed") as u64
    }

    pub fn output_dir(&self) -> PathBuf {
        PathBuf::from(self.text("output"))
    }

    /// The equation. Keys a command does not read keep their neutral value.
    pub fn nonlinearity(&self) -> NonlinearitySpec {
        let get =
            |key: &str, fallback: f64| self.get(key).and_then(Value::as_float).unwrap_or(fallback);
        let family = self
            .get("equation.reg_family")
            .and_then(Value::as_str)
            .map_or(RegFamily::Exact, |s| s.parse().expect("validated choice"));
        NonlinearitySpec {
            lambda: get("equation.lambda", 1.0),
            mu: get("equation.mu", 0.0),
            alpha: get("equation.alpha", 2.0),
            reg_family: family,
            epsilon: get("equation.epsilon", 0.0),
        }
    }

    pub fn geometry(&self) -> Geometry {
        self.try_geometry().expect("validated geometry")
    }

    fn try_geometry(&self) -> Result<Geometry, ConfigError> {
        Geometry::new(
            self.usize("grid.d"),
            self.float("grid.L"),
            self.usize("grid.N"),
        )
        .map_err(|e| range("grid", e.to_string()))
    }

    pub fn solver(&self) -> SolverConfig {
        self.try_solver().expect("validated solver settings")
    }

    fn try_solver(&self) -> Result<SolverConfig, ConfigError> {
        let scheme: Scheme = self
            .text("solver.scheme")
            .parse()
            .expect("validated choice");
        let config = SolverConfig::new(
            scheme,
            self.float("solver.dt"),
            self.float("solver.t_final"),
            self.usize("solver.snapshot_every"),
        )
        .map_err(|e| core_param("solver", e))?;
        Ok(match self.get("solver.sobolev") {
            Some(_) => config.with_sobolev(&self.floats("solver.sobolev")),
            None => config,
        })
    }

    /// The resolved configuration as a JSON object keyed by dotted path.
    /// The output directory is left out so that the same run written to
    /// two places yields the same report.
    pub fn parameters(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        map.insert("command".into(), self.command.name().into());
        for (k, v) in &self.values {
            if k != "output" {
                map.insert(
                    k.clone(),
                    serde_json::to_value(v).expect("TOML values serialise"),
                );
            }
        }
        serde_json::Value::Object(map)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let has = |key: &str| self.values.contains_key(key);
        let dim = if has("grid.d") {
            let d = self.usize("grid.d");
            if d > 2 {
                return Err(range("grid.d", format!("must be 1 or 2, got {d}")));
            }
            if !self.usize("grid.N").is_multiple_of(2) {
                return Err(range("grid.N", "must be even"));
            }
            let g = self.try_geometry()?;
            Some(g.dim())
        } else {
            None
        };
        if has("equation.lambda") {
            self.nonlinearity()
                .validate(dim)
                .map_err(|e| core_param("equation", e))?;
        }
        if has("solver.dt") {
            self.try_solver()?;
        }
        let s_range = |lo_open: bool, lo: f64, hi: f64, hi_open: bool| -> Result<(), ConfigError> {
            let s = self.float("experiment.s");
            let above = if lo_open { s > lo } else { s >= lo };
            let below = if hi_open { s < hi } else { s <= hi };
            if above && below {
                Ok(())
            } else {
                let (l, r) = (
                    if lo_open { '(' } else { '[' },
                    if hi_open { ')' } else { ']' },
                );
                Err(range(
                    "experiment.s",
                    format!(
                        "must lie in {l}{lo}, {hi}{r} for {}, got {s}",
                        self.command.name()
                    ),
                ))
            }
        };
        match self.command {
            Command::Simulate | Command::Limit => {
                s_range(false, 0.0, 2.0, false)?;
                self.check_datum()?;
            }
            Command::Stability => {
                s_range(false, 0.0, 2.0, false)?;
                if self.float("experiment.gap_min") > self.float("experiment.gap_max") {
                    return Err(range(
                        "experiment.gap_min",
                        "must not exceed experiment.gap_max",
                    ));
                }
            }
            Command::Gausson => {
                if self.float("equation.lambda") <= 0.0 {
                    return Err(range("equation.lambda", "the Gausson needs lambda > 0"));
                }
            }
            Command::Localize => {
                s_range(true, 0.0, 1.0, true)?;
                self.check_datum()?;
                self.check_radii(true)?;
            }
            Command::Smoothing => {
                s_range(true, 0.0, 1.0, false)?;
                self.check_radii(false)?;
            }
            Command::Zygmund => {
                let ns = self.usizes("experiment.resolutions");
                if ns.len() < 3 {
                    return Err(range(
                        "experiment.resolutions",
                        "need at least 3 resolutions",
                    ));
                }
                if ns.iter().any(|n| n % 2 != 0) || ns.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(range(
                        "experiment.resolutions",
                        "must be even and strictly increasing",
                    ));
                }
            }
            Command::Ineq => {
                if self.float("experiment.min_modulus") >= self.float("experiment.max_modulus") {
                    return Err(range(
                        "experiment.min_modulus",
                        "must be below experiment.max_modulus",
                    ));
                }
            }
            Command::Gronwall => {
                if self.float("solver.t_final") <= 0.0 {
                    return Err(range("solver.t_final", "must be positive for gronwall"));
                }
            }
        }
        if self.command == Command::Limit {
            let eps = self.floats("experiment.epsilons");
            if eps.len() < 3 || eps.windows(2).any(|w| w[1] >= w[0]) {
                return Err(range(
                    "experiment.epsilons",
                    "need at least 3 strictly decreasing values",
                ));
            }
        }
        Ok(())
    }

    fn check_datum(&self) -> Result<(), ConfigError> {
        if self.text("experiment.data") == "gausson" && self.float("equation.lambda") <= 0.0 {
            return Err(range(
                "experiment.data",
                "Gausson data need equation.lambda > 0",
            ));
        }
        Ok(())
    }

    fn check_radii(&self, above_one: bool) -> Result<(), ConfigError> {
        let radii = self.floats("experiment.radii");
        if radii.len() < 3 || !increasing(&radii) {
            return Err(range(
                "experiment.radii",
                "need at least 3 strictly increasing radii",
            ));
        }
        let limit = self.float("grid.L") / 4.0;
        if radii.iter().any(|&r| r > limit || (above_one && r <= 1.0)) {
            let low = if above_one { "(1" } else { "(0" };
            return Err(range(
                "experiment.radii",
                format!("radii must lie in {low}, L/4] = {low}, {limit}]"),
            ));
        }
        Ok(())
    }
}

/// Human-readable key table for `command`.
pub fn describe_keys(command: Command) -> String {
    let mut out = String::new();
    for spec in KEYS.iter().filter(|k| k.applies(command)) {
        let default = match spec.default_for(command) {
            Some(v) => v.to_string(),
            None => "required".to_string(),
        };
        let _ = writeln!(
            out,
            "{:<26} {:<22} {:<28} {}",
            spec.key,
            spec.type_name(),
            default,
            spec.doc
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(command: Command, text: &str, overrides: &[&str]) -> Result<RunConfig, ConfigError> {
        let overrides: Vec<Override> = overrides
            .iter()
            .map(|o| Override::parse(o).unwrap())
            .collect();
        parse_config_str(command, Some(text), "test", &overrides)
    }

    const MINIMAL: &str = "[grid]\nd = 1\nN = 256\n[equation]\nlambda = 1\n";

    #[test]
    fn minimal_simulate_fills_defaults() {
        let c = parse(Command::Simulate, MINIMAL, &[]).unwrap();
        assert_eq!(c.text("solver.scheme"), "strang");
        assert_eq!(c.float("equation.epsilon"), 0.0);
        assert_eq!(c.text("equation.reg_family"), "exact");
        assert_eq!(c.float("grid.L"), 32.0);
        assert_eq!(c.geometry().points(0), 256);
        assert_eq!(c.nonlinearity(), NonlinearitySpec::exact(1.0));
    }

    #[test]
    fn negative_alpha_cites_the_admissible_range() {
        let err = parse(Command::Simulate, MINIMAL, &["equation.alpha=-1"]).unwrap_err();
        assert_eq!(err.key(), Some("equation.alpha"));
        assert!(err.to_string().contains("0<α<4/(d−2)₊"), "{err}");
    }

    #[test]
    fn duplicate_keys_rejected() {
        let text = "[equation]\nlambda = 1\nlambda = 2\n[grid]\nd = 1\nN = 64\n";
        let err = parse(Command::Simulate, text, &[]).unwrap_err();
        assert!(matches!(err, ConfigError::Duplicate { .. }));
        assert_eq!(err.key(), Some("equation.lambda"));

        let err = parse(Command::Simulate, MINIMAL, &["seed=1", "seed=2"]).unwrap_err();
        assert_eq!(err.key(), Some("seed"));
    }

    #[test]
    fn duplicate_table_rejected() {
        let text = "[grid]\nd = 1\n[grid]\nN = 64\n";
        let err = parse(Command::Simulate, text, &[]).unwrap_err();
        assert_eq!(err.key(), Some("grid"));
    }

    #[test]
    fn unknown_missing_and_misplaced_keys_carry_their_path() {
        let err = parse(Command::Simulate, MINIMAL, &["grid.M=3"]).unwrap_err();
        assert!(matches!(err, ConfigError::Unknown { .. }));
        assert_eq!(err.key(), Some("grid.M"));

        let err = parse(Command::Simulate, "[grid]\nd = 1\nN = 64\n", &[]).unwrap_err();
        assert!(matches!(err, ConfigError::Missing { .. }));
        assert_eq!(err.key(), Some("equation.lambda"));

        let err = parse(Command::Simulate, MINIMAL, &["experiment.radii=[1,2,3]"]).unwrap_err();
        assert!(matches!(err, ConfigError::NotUsed { .. }));
        assert!(err.to_string().starts_with("experiment.radii:"));
    }

    #[test]
    fn type_and_range_errors() {
        let err = parse(Command::Simulate, MINIMAL, &["grid.N=abc"]).unwrap_err();
        assert!(matches!(err, ConfigError::Type { .. }), "{err}");
        assert_eq!(err.key(), Some("grid.N"));

        for (arg, key) in [
            ("grid.N=255", "grid.N"),
            ("grid.d=3", "grid.d"),
            ("solver.dt=0", "solver.dt"),
            ("grid.L=-1", "grid.L"),
            ("equation.epsilon=0.1", "equation.epsilon"),
            ("solver.scheme=euler", "solver.scheme"),
            ("experiment.s=3", "experiment.s"),
        ] {
            let err = parse(Command::Simulate, MINIMAL, &[arg]).unwrap_err();
            assert_eq!(err.key(), Some(key), "{arg}: {err}");
        }
    }

    #[test]
    fn overrides_beat_the_file_and_integers_widen() {
        let c = parse(
            Command::Simulate,
            MINIMAL,
            &["equation.lambda=-2", "grid.L=40"],
        )
        .unwrap();
        assert_eq!(c.float("equation.lambda"), -2.0);
        assert_eq!(c.float("grid.L"), 40.0);
        assert_eq!(c.parameters()["grid.L"], serde_json::json!(40.0));
    }

    #[test]
    fn override_values() {
        assert_eq!(
            Override::parse("solver.scheme=lie").unwrap().value,
            Value::String("lie".into())
        );
        assert_eq!(Override::parse("a = 3").unwrap().value, Value::Integer(3));
        assert_eq!(
            Override::parse("x=[1, 2.5]").unwrap().value,
            Value::Array(vec![Value::Integer(1), Value::Float(2.5)])
        );
        assert!(Override::parse("novalue").is_err());
        assert!(Override::parse("=3").is_err());
    }

    #[test]
    fn command_specific_defaults() {
        let c = parse(Command::Zygmund, "", &[]).unwrap();
        assert_eq!(c.float("grid.L"), std::f64::consts::TAU);
        assert_eq!(c.usize("experiment.samples"), 50);
        let c = parse(Command::Ineq, "", &[]).unwrap();
        assert_eq!(c.usize("experiment.samples"), 1_000_000);
        assert_eq!(c.float("equation.lambda"), 1.0);
        let c = parse(Command::Localize, MINIMAL, &["grid.L=512"]).unwrap();
        assert_eq!(c.usize("solver.snapshot_every"), 1);
        assert_eq!(c.text("experiment.data"), "localized");
    }

    #[test]
    fn cross_key_checks() {
        let err = parse(
            Command::Limit,
            MINIMAL,
            &["experiment.epsilons=[1e-2, 1e-1, 1e-3]"],
        )
        .unwrap_err();
        assert_eq!(err.key(), Some("experiment.epsilons"));
        let err = parse(
            Command::Smoothing,
            "[grid]\nd = 1\nN = 256\n",
            &["grid.L=16"],
        )
        .unwrap_err();
        assert_eq!(err.key(), Some("experiment.radii"));
        let err = parse(Command::Gausson, MINIMAL, &["equation.lambda=-1"]).unwrap_err();
        assert_eq!(err.key(), Some("equation.lambda"));
        let err = parse(
            Command::Zygmund,
            "",
            &["experiment.resolutions=[64, 32, 128]"],
        )
        .unwrap_err();
        assert_eq!(err.key(), Some("experiment.resolutions"));
    }

    #[test]
    fn parameters_cover_every_read_key_except_output() {
        let c = parse(Command::Stability, MINIMAL, &[]).unwrap();
        let p = c.parameters();
        let obj = p.as_object().unwrap();
        assert_eq!(obj["command"], "stability");
        assert!(!obj.contains_key("output"));
        for spec in KEYS
            .iter()
            .filter(|k| k.applies(Command::Stability) && k.key != "output")
        {
            assert!(obj.contains_key(spec.key), "{}", spec.key);
        }
    }

    #[test]
    fn every_command_lists_its_keys() {
        for c in Command::ALL {
            assert!(describe_keys(c).contains("seed"));
        }
        assert!(describe_keys(Command::Simulate).contains("required"));
    }
}
