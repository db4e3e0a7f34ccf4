use serde::Serialize;

use permix::mixing::main_theorem_conditions;

use super::{Context, Output};
use crate::args::ThresholdArgs;
use crate::error::CliResult;
use crate::report::Table;

const COLUMNS: &[&str] = &["name", "margin", "log_margin"];

#[derive(Serialize)]
struct ThresholdSummary {
    n: usize,
    alpha: f64,
    beta: f64,
    gamma: f64,
    summary: f64,
    summary_log: f64,
    /// Every ratio exceeds 1 with all implicit constants set to 1.
    all_conditions_hold: bool,
}

pub fn run(ctx: &Context, args: &ThresholdArgs) -> CliResult<Output> {
    let m = main_theorem_conditions(args.alpha, args.beta, args.gamma, ctx.n()?)?;
    let table = Table::from_records(COLUMNS, &m.conditions)?;
    Output::new(
        ThresholdSummary {
            n: m.n,
            alpha: m.alpha,
            beta: m.beta,
            gamma: m.gamma,
            summary: m.summary,
            summary_log: m.summary_log,
            all_conditions_hold: m.conditions.iter().all(|c| c.log_margin > 0.0),
        },
        table,
    )
}
