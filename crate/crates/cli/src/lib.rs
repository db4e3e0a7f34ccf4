//! Experiment runner for the `permix` library: argument parsing, command
//! dispatch, and versioned JSON/CSV reports.

pub mod args;
mod commands;
pub mod error;
mod matrix_csv;
pub mod report;

use std::time::{Duration, Instant};

use serde_json::{Map, Value};

use args::{Cli, Command, ConcentrationCommand, ConstructCommand, InequalityCommand, VERSION};
use commands::{Context, Output};
use error::CliResult;
use report::{emit_table, Report, SCHEMA_VERSION};

pub use matrix_csv::parse_matrix;

pub struct RunOutput {
    pub report: Report,
    /// The report in the requested format.
    pub rendered: String,
    pub elapsed: Duration,
}

fn args_value(command: &Command) -> serde_json::Result<Value> {
    use serde_json::to_value;
    match command {
        Command::Mixing(a) => to_value(a),
        Command::Construct { which } => match which {
            ConstructCommand::Kedlaya(a) => to_value(a),
            ConstructCommand::Surplus(a) => to_value(a),
        },
        Command::Fourier(a) => to_value(a),
        Command::Concentration { which } => match which {
            ConcentrationCommand::ExpMoment(a) => to_value(a),
            ConcentrationCommand::Tail(a) => to_value(a),
            ConcentrationCommand::Dyadic(a) => to_value(a),
            ConcentrationCommand::Levelset(a) => to_value(a),
            ConcentrationCommand::Deficit(a) => to_value(a),
        },
        Command::Inequality { which } => match which {
            InequalityCommand::Cll(a) => to_value(a),
            InequalityCommand::Hadamard(a) => to_value(a),
            InequalityCommand::Subadditivity(a) => to_value(a),
            InequalityCommand::EntropyLemmas(a) => to_value(a),
        },
        Command::Threshold(a) => to_value(a),
    }
}

/// The settings that determine a report's contents: the shared flags, the
/// command, and its own arguments.
pub fn config_value(cli: &Cli) -> serde_json::Result<Value> {
    let mut config: Map<String, Value> = match serde_json::to_value(&cli.common)? {
        Value::Object(m) => m,
        _ => unreachable!("common args serialize as an object"),
    };
    config.insert("command".into(), Value::from(cli.command.name()));
    config.insert("args".into(), args_value(&cli.command)?);
    Ok(Value::Object(config))
}

fn dispatch(ctx: &Context, command: &Command) -> CliResult<Output> {
    use commands::*;
    match command {
        Command::Mixing(a) => mixing::run(ctx, a),
        Command::Construct { which } => match which {
            ConstructCommand::Kedlaya(a) => construct::kedlaya(ctx, a),
            ConstructCommand::Surplus(a) => construct::surplus(ctx, a),
        },
        Command::Fourier(a) => fourier::run(ctx, a),
        Command::Concentration { which } => match which {
            ConcentrationCommand::ExpMoment(a) => concentration::exp_moment(ctx, a),
            ConcentrationCommand::Tail(a) => concentration::tail(ctx, a),
            ConcentrationCommand::Dyadic(a) => concentration::dyadic(ctx, a),
            ConcentrationCommand::Levelset(a) => concentration::levelset(ctx, a),
            ConcentrationCommand::Deficit(a) => concentration::deficit(ctx, a),
        },
        Command::Inequality { which } => match which {
            InequalityCommand::Cll(a) => inequality::cll(ctx, a),
            InequalityCommand::Hadamard(a) => inequality::hadamard(ctx, a),
            InequalityCommand::Subadditivity(a) => inequality::subadditivity(ctx, a),
            InequalityCommand::EntropyLemmas(a) => inequality::entropy_lemmas(ctx, a),
        },
        Command::Threshold(a) => threshold::run(ctx, a),
    }
}

/// Runs one command on a dedicated worker pool and renders its report,
/// writing it to `--output` when given.
pub fn run(cli: &Cli) -> CliResult<RunOutput> {
    let start = Instant::now();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.common.threads {
        if t == 0 {
            return Err(error::usage("--threads must be positive"));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build()?;
    let ctx = Context {
        common: &cli.common,
    };
    let output = pool.install(|| dispatch(&ctx, &cli.command))?;
    let elapsed = start.elapsed();
    let report = Report {
        schema_version: SCHEMA_VERSION,
        version: VERSION,
        command: cli.command.name(),
        config: config_value(cli)?,
        summary: output.summary,
        table: output.table,
        runtime_seconds: cli.common.timing.then_some(elapsed.as_secs_f64()),
    };
    let rendered = emit_table(&report, cli.common.format)?;
    if let Some(path) = &cli.common.output_path {
        std::fs::write(path, &rendered)?;
    }
    Ok(RunOutput {
        report,
        rendered,
        elapsed,
    })
}
