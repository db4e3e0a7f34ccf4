use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use permix::constructions::count_solutions;
use permix::exact::{check_rational_mode, decompose_subsets_exact};
use permix::fourier::{
    decompose_triple, direct_remainder, parseval_remnant, secondterm_identity_check,
};
use permix::group::sampling::{
    random_group_function, random_mean_zero_function, random_subset_with,
};
use permix::group::GroupSpace;

use super::{check_trials, Context, Output};
use crate::args::{FourierArgs, FourierCheck};
use crate::error::CliResult;
use crate::report::Table;

/// Absolute tolerance for the floating-point identities.
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

const COLUMNS: &[&str] = &[
    "trial",
    "check",
    "lhs",
    "rhs",
    "error",
    "passed",
    "exact_sigma_term",
];

struct Row {
    check: &'static str,
    lhs: f64,
    rhs: f64,
    /// How far the row is from passing; positive means it fails.
    error: f64,
    passed: bool,
    exact: Option<String>,
}

impl Row {
    fn identity(check: &'static str, lhs: f64, rhs: f64) -> Self {
        let error = (lhs - rhs).abs();
        Self {
            check,
            lhs,
            rhs,
            error,
            passed: error <= IDENTITY_TOLERANCE,
            exact: None,
        }
    }
}

fn decomposition_rows(space: &GroupSpace, ctx: &Context, trial: usize) -> CliResult<Vec<Row>> {
    let mut rng = ctx.trial_rng(trial)?;
    let (f, g, h) = (
        random_group_function(space, &mut rng),
        random_group_function(space, &mut rng),
        random_group_function(space, &mut rng),
    );
    // the remainder comes from the isotypic projection, not from subtraction
    let d = decompose_triple(&f, &g, &h)?;
    let remainder = direct_remainder(&f, &g, &h)?;
    let split = Row::identity(
        "decomposition",
        d.main_term + d.sigma_term + remainder,
        d.total,
    );

    // indicator inputs: |G|² ⟨1_X * 1_Y, 1_Z⟩ must be the solution count
    let density = rng_density(&mut rng);
    let x = random_subset_with(space, density, &mut rng)?;
    let y = random_subset_with(space, density, &mut rng)?;
    let z = random_subset_with(space, density, &mut rng)?;
    let d = decompose_triple(&x.indicator(), &y.indicator(), &z.indicator())?;
    let order = space.order() as f64;
    let scaled = d.total * order * order;
    let count = count_solutions(&x, &y, &z)? as f64;
    let mut counts = Row::identity("indicator_count", scaled, count);
    // the count is an integer, so rounding recovers it exactly when close
    counts.passed = scaled.round() == count && counts.error < 1e-6;
    if ctx.common.rational_mode {
        counts.exact = Some(decompose_subsets_exact(&x, &y, &z)?.sigma_term.to_string());
    }
    Ok(vec![split, counts])
}

fn rng_density(rng: &mut impl rand::Rng) -> f64 {
    rng.random_range(0.05..0.95)
}

fn secondterm_row(space: &GroupSpace, ctx: &Context, trial: usize) -> CliResult<Row> {
    let mut rng = ctx.trial_rng(trial)?;
    // the mean-zero function rotates through the three slots
    let mut fs = [
        random_group_function(space, &mut rng),
        random_group_function(space, &mut rng),
        random_group_function(space, &mut rng),
    ];
    fs[trial % 3] = random_mean_zero_function(space, &mut rng);
    let c = secondterm_identity_check(&fs[0], &fs[1], &fs[2])?;
    Ok(Row::identity("secondterm", c.lhs, c.rhs))
}

fn parseval_rows(space: &GroupSpace, ctx: &Context, trial: usize) -> CliResult<Vec<Row>> {
    let mut rng = ctx.trial_rng(trial)?;
    let f = random_mean_zero_function(space, &mut rng);
    let p = parseval_remnant(&f)?;
    let defect = p.defect();
    let remnant = Row {
        check: "parseval_remnant",
        lhs: p.sigma_energy,
        rhs: p.norm_sq,
        error: -defect,
        passed: defect >= -IDENTITY_TOLERANCE,
        exact: None,
    };
    let energy = Row::identity("pushforward_energy", p.sigma_energy, p.pushforward_energy);
    Ok(vec![remnant, energy])
}

#[derive(Serialize)]
struct CheckSummary {
    check: &'static str,
    rows: usize,
    failures: usize,
    max_error: f64,
}

#[derive(Serialize)]
struct FourierSummary {
    group: String,
    trials: usize,
    tolerance: f64,
    failures: usize,
    checks: Vec<CheckSummary>,
}

pub fn run(ctx: &Context, args: &FourierArgs) -> CliResult<Output> {
    check_trials(args.trials)?;
    let space = ctx.space()?;
    if ctx.common.rational_mode {
        check_rational_mode(&space)?;
    }
    // each check convolves on the group: |G|² pair evaluations per trial
    let order = space.order() as u128;
    ctx.check_budget(order * order * args.trials as u128)?;
    let want = |c: FourierCheck| args.check == FourierCheck::All || args.check == c;

    let per_trial: Vec<CliResult<Vec<Row>>> = (0..args.trials)
        .into_par_iter()
        .map(|k| {
            let mut rows = Vec::new();
            if want(FourierCheck::Decomposition) {
                rows.extend(decomposition_rows(&space, ctx, k)?);
            }
            if want(FourierCheck::Secondterm) {
                rows.push(secondterm_row(&space, ctx, k)?);
            }
            if want(FourierCheck::Parseval) {
                rows.extend(parseval_rows(&space, ctx, k)?);
            }
            Ok(rows)
        })
        .collect();

    let mut table = Table::new(COLUMNS);
    let mut checks: Vec<CheckSummary> = Vec::new();
    for (k, rows) in per_trial.into_iter().enumerate() {
        for r in rows? {
            table.push(vec![
                json!(k),
                json!(r.check),
                json!(r.lhs),
                json!(r.rhs),
                json!(r.error),
                json!(r.passed),
                r.exact.map_or(Value::Null, Value::from),
            ]);
            let entry = match checks.iter_mut().position(|c| c.check == r.check) {
                Some(i) => &mut checks[i],
                None => {
                    checks.push(CheckSummary {
                        check: r.check,
                        rows: 0,
                        failures: 0,
                        max_error: f64::NEG_INFINITY,
                    });
                    checks.last_mut().expect("just pushed")
                }
            };
            entry.rows += 1;
            entry.failures += usize::from(!r.passed);
            entry.max_error = entry.max_error.max(r.error);
        }
    }
    let summary = FourierSummary {
        group: space.name(),
        trials: args.trials,
        tolerance: IDENTITY_TOLERANCE,
        failures: checks.iter().map(|c| c.failures).sum(),
        checks,
    };
    Output::new(summary, table)
}
