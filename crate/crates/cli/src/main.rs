use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nilcurv_cli::commands::{self, DeformArgs, Report};
use nilcurv_cli::config::{self, CliError, RunConfig, DEFAULT_SAMPLES, DEFAULT_SEED};

/// Curvature of left-invariant metrics on nilpotent Lie algebras.
///
/// Algebras are read from JSON files or given as `catalog:KEY[:k=v,...]`,
/// e.g. `catalog:heisenberg:m=2`.
#[derive(Parser)]
#[command(name = "nilcurv", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for every randomized search.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Random-sample budget.
    #[arg(long, global = true, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    /// Override the tolerance a command asserts with.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Emit JSON instead of a table.
    #[arg(long, global = true)]
    json: bool,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// List catalog algebras, optionally writing each as algebra JSON.
    Catalog {
        #[arg(long)]
        filter: Option<String>,
        #[arg(long = "emit-json", value_name = "DIR")]
        emit_json: Option<String>,
    },
    /// Validate an algebra (Jacobi identity, nilpotency) and report its structure.
    Check { algebra: String },
    /// Ricci operator and spectrum.
    Ric {
        algebra: String,
        #[arg(long)]
        metric: Option<String>,
    },
    /// Sectional curvature of a plane given as "x1,..,xn;y1,..,yn".
    Sect {
        algebra: String,
        #[arg(long)]
        metric: Option<String>,
        #[arg(long)]
        plane: String,
    },
    /// Scaled Ricci limit of a deformation and convergence of the extremal direction.
    Deform {
        algebra: String,
        /// Deformation JSON: {"metric": {"gram": ..}, "lambdas": [..]}.
        #[arg(long)]
        spec: String,
        /// Time at which the limit error is checked (default 40/gap).
        #[arg(long)]
        t: Option<f64>,
        /// Write the convergence trace as CSV.
        #[arg(long = "trace-csv", value_name = "PATH")]
        trace_csv: Option<String>,
        /// Trace the bottom eigendirection instead of the top one.
        #[arg(long)]
        min: bool,
    },
    /// Metric-independent sign labels with witnesses.
    Signsets {
        algebra: String,
        #[arg(long, conflicts_with = "plane")]
        vector: Option<String>,
        #[arg(long)]
        plane: Option<String>,
    },
    /// Structural classification verdict.
    Classify { algebra: String },
    /// Sampled extremal Ricci directions against the predicted closures.
    Maxmin {
        algebra: String,
        #[arg(long, default_value_t = 0.1)]
        resolution: f64,
        /// Candidates per side whose convergence is traced.
        #[arg(long, default_value_t = 3)]
        convergence_runs: usize,
    },
    /// Run the acceptance suite.
    VerifyPaper {
        /// Comma-separated criterion numbers or names, e.g. "1,2" or "signsets".
        #[arg(long)]
        only: Option<String>,
    },
}

fn config_for(name: &str, g: &Global) -> RunConfig {
    let mut c = RunConfig::new(name);
    c.seed = g.seed;
    c.samples = g.samples;
    c.tol = g.tol;
    c.json = g.json;
    c.out = g.out.clone();
    c
}

fn opt(c: RunConfig, key: &str, v: &Option<String>) -> RunConfig {
    match v {
        Some(v) => c.arg(key, v),
        None => c,
    }
}

fn dispatch(cli: &Cli) -> Result<Report, CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Catalog { filter, emit_json } => {
            let c = opt(opt(config_for("catalog", g), "filter", filter), "emit-json", emit_json);
            commands::catalog_cmd(c, filter.as_deref(), emit_json.as_deref())
        }
        Command::Check { algebra } => {
            let alg = config::load_algebra(algebra)?;
            commands::check_cmd(config_for("check", g).arg("algebra", algebra), &alg)
        }
        Command::Ric { algebra, metric } => {
            let alg = config::load_algebra(algebra)?;
            let c = opt(config_for("ric", g).arg("algebra", algebra), "metric", metric);
            commands::ric_cmd(c, &alg, metric.as_deref())
        }
        Command::Sect { algebra, metric, plane } => {
            let alg = config::load_algebra(algebra)?;
            let c = opt(config_for("sect", g).arg("algebra", algebra).arg("plane", plane), "metric", metric);
            commands::sect_cmd(c, &alg, metric.as_deref(), plane)
        }
        Command::Deform { algebra, spec, t, trace_csv, min } => {
            let alg = config::load_algebra(algebra)?;
            let mut c = config_for("deform", g).arg("algebra", algebra).arg("spec", spec).arg("min", min);
            c = opt(c, "trace-csv", trace_csv);
            if let Some(t) = t {
                c = c.arg("t", t);
            }
            let args = DeformArgs { spec, t: *t, trace_csv: trace_csv.as_deref(), min: *min };
            commands::deform_cmd(c, &alg, &args)
        }
        Command::Signsets { algebra, vector, plane } => {
            let alg = config::load_algebra(algebra)?;
            let c = opt(opt(config_for("signsets", g).arg("algebra", algebra), "vector", vector), "plane", plane);
            commands::signsets_cmd(c, &alg, vector.as_deref(), plane.as_deref())
        }
        Command::Classify { algebra } => {
            let alg = config::load_algebra(algebra)?;
            commands::classify_cmd(config_for("classify", g).arg("algebra", algebra), &alg)
        }
        Command::Maxmin { algebra, resolution, convergence_runs } => {
            let alg = config::load_algebra(algebra)?;
            let c = config_for("maxmin", g)
                .arg("algebra", algebra)
                .arg("resolution", resolution)
                .arg("convergence-runs", convergence_runs);
            commands::maxmin_cmd(c, &alg, *resolution, *convergence_runs)
        }
        Command::VerifyPaper { only } => {
            let c = opt(config_for("verify-paper", g), "only", only);
            commands::verify_paper_cmd(c, only.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match dispatch(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("nilcurv: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let text = report.render();
    match &cli.global.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("nilcurv: cannot write {path}: {e}");
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    match &report.failure {
        Some(msg) => {
            eprintln!("nilcurv: assertion failed: {msg}");
            ExitCode::from(1)
        }
        None => ExitCode::SUCCESS,
    }
}
