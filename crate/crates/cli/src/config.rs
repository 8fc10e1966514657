//! Resolved run configuration, input loading and error classification.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use nilcurv_core::catalog::{self, Params};
use nilcurv_core::exact::{self, QVec};
use nilcurv_core::{DeformationSpec, Metric, NilpotentAlgebra};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 42;
/// Random-sample budget used when `--samples` is not given.
pub const DEFAULT_SAMPLES: usize = 200;

/// Every report embeds this record so that a run can be repeated exactly.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    /// Subcommand arguments after resolution, in key order.
    pub args: BTreeMap<String, String>,
    pub seed: u64,
    pub samples: usize,
    pub tol: Option<f64>,
    pub json: bool,
    pub out: Option<String>,
    pub version: &'static str,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        RunConfig {
            command: command.to_string(),
            args: BTreeMap::new(),
            seed: DEFAULT_SEED,
            samples: DEFAULT_SAMPLES,
            tol: None,
            json: false,
            out: None,
            version: env!("CARGO_PKG_VERSION"),
        }
    }

    pub fn arg(mut self, key: &str, value: impl ToString) -> Self {
        self.args.insert(key.to_string(), value.to_string());
        self
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unreadable or malformed input; exit code 2.
    #[error("input error: {0}")]
    Input(String),
    /// A check the command performs did not hold; exit code 1.
    #[error("assertion failed: {0}")]
    Assertion(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Assertion(_) => 1,
        }
    }
}

pub fn input<E: std::fmt::Display>(context: &str) -> impl Fn(E) -> CliError + '_ {
    move |e| CliError::Input(format!("{context}: {e}"))
}

fn read(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(Path::new(path)).map_err(input(path))
}

/// Loads an algebra from a JSON file or from `catalog:KEY[:k=v,...]`.
pub fn load_algebra(src: &str) -> Result<NilpotentAlgebra, CliError> {
    if let Some(rest) = src.strip_prefix("catalog:") {
        let (key, params) = rest.split_once(':').unwrap_or((rest, ""));
        let mut p = Params::none();
        for kv in params.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Input(format!("bad catalog parameter {kv:?}")))?;
            let v: usize = v.trim().parse().map_err(input(kv))?;
            p = p.with(k.trim(), v);
        }
        return catalog::build(key, &p).map_err(input(src));
    }
    NilpotentAlgebra::from_json_str(&read(src)?).map_err(input(src))
}

/// Loads a Gram matrix, defaulting to the identity.
pub fn load_metric(path: Option<&str>, n: usize) -> Result<Metric, CliError> {
    let m = match path {
        None => Metric::identity(n),
        Some(p) => Metric::from_json_str(&read(p)?).map_err(input(p))?,
    };
    m.check_dim(n).map_err(input("metric"))?;
    Ok(m)
}

pub fn load_spec(path: &str, n: usize) -> Result<DeformationSpec, CliError> {
    let s = DeformationSpec::from_json_str(&read(path)?).map_err(input(path))?;
    if s.dim() != n {
        return Err(CliError::Input(format!("{path}: deformation has dimension {}, algebra has {n}", s.dim())));
    }
    Ok(s)
}

/// Parses "1,0,-1/2" into exact coordinates of the expected length.
pub fn parse_vector(s: &str, n: usize) -> Result<QVec, CliError> {
    let v: QVec = s.split(',').map(|t| exact::parse_rational(t.trim())).collect::<Result<_, _>>().map_err(input(s))?;
    if v.len() != n {
        return Err(CliError::Input(format!("vector {s:?} has {} entries, algebra has dimension {n}", v.len())));
    }
    Ok(v)
}

/// Parses "x1,..,xn;y1,..,yn".
pub fn parse_plane(s: &str, n: usize) -> Result<(QVec, QVec), CliError> {
    let (x, y) = s.split_once(';').ok_or_else(|| CliError::Input(format!("plane {s:?} must be two vectors separated by ';'")))?;
    Ok((parse_vector(x, n)?, parse_vector(y, n)?))
}
