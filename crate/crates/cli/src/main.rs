//! otflow: validation, pluriclosed classification, curvature forms,
//! algebraic solitons and geometric flows for Oeljeklaus-Toma-type solvable
//! Lie algebras, driven by JSON run configurations.

mod commands;
mod config;
mod trace_io;

use anyhow::Context as _;
use clap::{Parser, Subcommand};
use commands::{exit, CliFailure, Context_, Outcome};
use config::{FlowKindSpec, RunConfig};
use std::path::PathBuf;

const EXIT_CODES_HELP: &str = "exit codes:
  0  success
  1  internal error
  2  configuration, parse or I/O error
  3  algebra or parameter validation failure
  4  infeasible metric (not Hermitian positive definite / wrong shape)
  5  negative classification or absent certificate under --strict
  6  flow failure (invariant breach, negative time, unmet hypotheses)

The default tolerance is 1e-10; OTFLOW_TOL overrides it and --tol overrides
both.  Outputs are deterministic: the same configuration produces
byte-identical JSON and CSV, modulo the recorded tool_version field.";

#[derive(Parser)]
#[command(name = "otflow", version, about, after_long_help = EXIT_CODES_HELP)]
struct Cli {
    /// JSON run configuration (a single object, or an array for sweeps).
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    /// Nonzero exit on validation/classification failures.
    #[arg(long, global = true)]
    strict: bool,

    /// Run identity checks in exact Gaussian-rational arithmetic.
    #[arg(long, global = true)]
    exact: bool,

    /// Tolerance override (wins over OTFLOW_TOL and the config file).
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Threads for sweep configurations (arrays of run configs).
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone)]
enum Command {
    /// Check antisymmetry, conjugation consistency, Jacobi and
    /// integrability of the configured algebra.
    Validate,
    /// Decide whether the configured metric is pluriclosed, by shape and by
    /// the del-delbar oracle.
    ClassifyPluriclosed,
    /// Evaluate a Ricci curvature form of the configured metric.
    Curvature {
        #[arg(long, value_parser = ["chern", "bismut"])]
        which: String,
    },
    /// Solve the algebraic-soliton equation for the configured metric.
    Soliton {
        #[arg(long, value_enum)]
        flow: FlowKindSpec,
    },
    /// Integrate a flow and emit a CSV trace plus a convergence report.
    Flow {
        #[arg(long, value_enum)]
        flow: FlowKindSpec,
        /// Override the configured final time.
        #[arg(long)]
        t_max: Option<f64>,
    },
    /// Recompute convergence diagnostics from an existing CSV trace.
    Report {
        /// Trace path (defaults to output.trace_csv from the config).
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "pluriclosed")]
        flow: FlowKindSpec,
    },
}

fn effective_tol(cli_tol: Option<f64>, config_tol: Option<f64>) -> f64 {
    if let Some(t) = cli_tol {
        return t;
    }
    if let Ok(env) = std::env::var("OTFLOW_TOL") {
        if let Ok(t) = env.parse::<f64>() {
            return t;
        }
    }
    config_tol.unwrap_or(otflow_core::DEFAULT_TOL)
}

fn run_one(cli: &Cli, mut config: RunConfig) -> anyhow::Result<Outcome> {
    if let (Command::Flow { t_max: Some(t), .. }, Some(f)) = (&cli.command, config.flow.as_mut()) {
        f.t_max = *t;
    }
    let ctx = Context_ {
        tol: effective_tol(cli.tol, config.tol),
        strict: cli.strict,
        exact: cli.exact,
        config,
    };
    match &cli.command {
        Command::Validate => commands::validate(&ctx),
        Command::ClassifyPluriclosed => commands::classify_pluriclosed(&ctx),
        Command::Curvature { which } => commands::curvature(&ctx, which),
        Command::Soliton { flow } => commands::soliton(&ctx, *flow),
        Command::Flow { flow, .. } => commands::flow(&ctx, *flow),
        Command::Report { trace, flow } => {
            commands::report(&ctx, trace.as_ref().and_then(|p| p.to_str()), *flow)
        }
    }
}

fn load_configs(path: &PathBuf) -> anyhow::Result<Vec<RunConfig>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .with_context(|| format!("malformed JSON in {}", path.display()))?;
    let configs = if value.is_array() {
        serde_json::from_value(value)?
    } else {
        vec![serde_json::from_value(value)?]
    };
    Ok(configs)
}

fn real_main() -> i32 {
    let cli = Cli::parse();
    let path = match &cli.config {
        Some(p) => p.clone(),
        None => {
            eprintln!("error: --config <file> is required");
            return exit::CONFIG;
        }
    };
    let configs = match load_configs(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return exit::CONFIG;
        }
    };

    let results: Vec<anyhow::Result<Outcome>> = if configs.len() > 1 && cli.jobs > 1 {
        let chunk = configs.len().div_ceil(cli.jobs);
        std::thread::scope(|scope| {
            let handles: Vec<_> = configs
                .chunks(chunk)
                .map(|batch| {
                    let cli = &cli;
                    scope.spawn(move || {
                        batch
                            .iter()
                            .map(|c| run_one(cli, c.clone()))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("worker panicked"))
                .collect()
        })
    } else {
        configs.into_iter().map(|c| run_one(&cli, c)).collect()
    };

    let mut code = exit::OK;
    let mut outputs = Vec::new();
    for result in results {
        match result {
            Ok(outcome) => {
                code = code.max(outcome.exit);
                outputs.push(outcome.json);
            }
            Err(e) => {
                let this = e
                    .downcast_ref::<CliFailure>()
                    .map(|f| f.code)
                    .unwrap_or(exit::INTERNAL);
                eprintln!("error: {e:#}");
                code = code.max(this);
            }
        }
    }
    let printable = match outputs.len() {
        0 => None,
        1 => Some(serde_json::to_string_pretty(&outputs[0]).expect("serializable")),
        _ => Some(serde_json::to_string_pretty(&outputs).expect("serializable")),
    };
    if let Some(text) = printable {
        println!("{text}");
    }
    code
}

fn main() {
    std::process::exit(real_main());
}
