use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use permix::group::sampling::{random_group_function, random_omega_function};
use permix::group::{GroupFunction, OmegaFunction};
use permix::inequalities::{
    cll_check, direct_entropy, entropy_high_row, entropy_low_row, hadamard_permanent_check,
    permanent, permanent_brute_force, point_mass_margin, subadditivity_check, two_level_high,
    two_level_low, EntropyLemmaRow, PermanentInstance, PERMANENT_MAX_N,
};

use super::{check_trials, opt, Context, Output};
use crate::args::{EntropyLemmaArgs, TrialsArgs};
use crate::error::{usage, CliResult};
use crate::report::Table;

/// Relative slack for the inequality comparisons.
pub const SLACK: f64 = 1e-12;

/// Brute-force permanents are compared against Ryser up to this size.
pub const BRUTE_FORCE_COMPARE_MAX_N: usize = 6;

/// Scale for the integer copy of a Gaussian matrix used for the exact
/// Ryser/brute-force comparison.
const INTEGER_SCALE: f64 = 1000.0;

#[derive(Serialize)]
struct InequalitySummary {
    n: usize,
    trials: usize,
    violations: usize,
    min_margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_disagreements: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    point_mass_margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    point_mass_observed: Option<f64>,
}

fn summarize(n: usize, rows: &[(bool, f64)]) -> InequalitySummary {
    InequalitySummary {
        n,
        trials: rows.len(),
        violations: rows.iter().filter(|r| !r.0).count(),
        min_margin: rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min),
        exact_disagreements: None,
        point_mass_margin: None,
        point_mass_observed: None,
    }
}

fn check_permanent_size(n: usize) -> CliResult<()> {
    if n == 0 || n > PERMANENT_MAX_N {
        return Err(usage(format!(
            "--n must lie in 1..={PERMANENT_MAX_N} for permanents"
        )));
    }
    Ok(())
}

const CLL_COLUMNS: &[&str] = &["trial", "lhs", "rhs", "margin", "holds"];

pub fn cll(ctx: &Context, args: &TrialsArgs) -> CliResult<Output> {
    check_trials(args.trials)?;
    let n = ctx.n()?;
    check_permanent_size(n)?;
    let rows: Vec<(bool, f64, Vec<Value>)> = (0..args.trials)
        .into_par_iter()
        .map(|k| -> CliResult<_> {
            let mut rng = ctx.trial_rng(k)?;
            let fs: Vec<OmegaFunction> =
                (0..n).map(|_| random_omega_function(n, &mut rng)).collect();
            let c = cll_check(&fs)?;
            let holds = c.holds(SLACK);
            Ok((
                holds,
                c.margin(),
                vec![
                    json!(k),
                    json!(c.lhs),
                    json!(c.rhs),
                    json!(c.margin()),
                    json!(holds),
                ],
            ))
        })
        .collect::<CliResult<_>>()?;
    let mut table = Table::new(CLL_COLUMNS);
    let flags: Vec<(bool, f64)> = rows.iter().map(|r| (r.0, r.1)).collect();
    rows.into_iter().for_each(|r| table.push(r.2));
    Output::new(summarize(n, &flags), table)
}

const HADAMARD_COLUMNS: &[&str] = &[
    "trial",
    "permanent",
    "bound",
    "margin",
    "holds",
    "brute_force",
    "brute_force_rel_diff",
    "exact_agree",
];

pub fn hadamard(ctx: &Context, args: &TrialsArgs) -> CliResult<Output> {
    check_trials(args.trials)?;
    let n = ctx.n()?;
    check_permanent_size(n)?;
    let compare = n <= BRUTE_FORCE_COMPARE_MAX_N;
    let rows: Vec<(bool, f64, Option<bool>, Vec<Value>)> = (0..args.trials)
        .into_par_iter()
        .map(|k| -> CliResult<_> {
            let mut rng = ctx.trial_rng(k)?;
            let entries: Vec<f64> = (0..n * n).map(|_| rng.sample(StandardNormal)).collect();
            let ryser = permanent(n, &entries)?;
            let m = PermanentInstance::new(n, entries)?;
            let c = hadamard_permanent_check(&m)?;
            let holds = c.holds(SLACK);
            let (brute, rel, exact) = if compare {
                let brute = permanent_brute_force(n, &m.entries)?;
                let rel = (brute - ryser).abs() / ryser.abs().max(f64::MIN_POSITIVE);
                let ints: Vec<i128> = m
                    .entries
                    .iter()
                    .map(|v| (v * INTEGER_SCALE).round() as i128)
                    .collect();
                let agree = permanent(n, &ints)? == permanent_brute_force(n, &ints)?;
                (Some(brute), Some(rel), Some(agree))
            } else {
                (None, None, None)
            };
            let row = vec![
                json!(k),
                json!(ryser),
                json!(c.rhs),
                json!(c.margin()),
                json!(holds),
                opt(brute),
                opt(rel),
                exact.map_or(Value::Null, Value::from),
            ];
            Ok((holds, c.margin(), exact, row))
        })
        .collect::<CliResult<_>>()?;
    let mut table = Table::new(HADAMARD_COLUMNS);
    let flags: Vec<(bool, f64)> = rows.iter().map(|r| (r.0, r.1)).collect();
    let mut summary = summarize(n, &flags);
    if compare {
        summary.exact_disagreements = Some(rows.iter().filter(|r| r.2 == Some(false)).count());
    }
    rows.into_iter().for_each(|r| table.push(r.3));
    Output::new(summary, table)
}

const SUBADDITIVITY_COLUMNS: &[&str] = &[
    "trial",
    "entropy",
    "half_pushforward_sum",
    "margin",
    "holds",
];

pub fn subadditivity(ctx: &Context, args: &TrialsArgs) -> CliResult<Output> {
    check_trials(args.trials)?;
    let space = ctx.space()?;
    let n = space.n();
    ctx.check_budget(space.order() as u128 * n as u128 * args.trials as u128)?;
    let rows: Vec<(bool, f64, Vec<Value>)> = (0..args.trials)
        .into_par_iter()
        .map(|k| -> CliResult<_> {
            let f = random_group_function(&space, &mut ctx.trial_rng(k)?);
            let c = subadditivity_check(&f)?;
            let holds = c.margin() >= -SLACK * c.lhs.abs().max(1.0);
            Ok((
                holds,
                c.margin(),
                vec![
                    json!(k),
                    json!(c.lhs),
                    json!(c.rhs),
                    json!(c.margin()),
                    json!(holds),
                ],
            ))
        })
        .collect::<CliResult<_>>()?;
    let mut table = Table::new(SUBADDITIVITY_COLUMNS);
    let flags: Vec<(bool, f64)> = rows.iter().map(|r| (r.0, r.1)).collect();
    let mut summary = summarize(n, &flags);
    summary.point_mass_observed =
        Some(subadditivity_check(&GroupFunction::point_mass(&space, 0))?.margin());
    summary.point_mass_margin = Some(point_mass_margin(n));
    rows.into_iter().for_each(|r| table.push(r.2));
    Output::new(summary, table)
}

const ENTROPY_COLUMNS: &[&str] = &[
    "side",
    "beta",
    "t",
    "delta",
    "extremal",
    "direct",
    "formula_error",
    "lower_bound",
    "ratio",
];

#[derive(Serialize)]
struct EntropySummary {
    n: usize,
    grid_points: usize,
    low_rows: usize,
    high_rows: usize,
    max_formula_error: f64,
    /// Smallest `extremal / lower_bound`: an empirical value for the
    /// implicit constant.
    min_ratio_low: Option<f64>,
    min_ratio_high: Option<f64>,
}

/// Grid of `points²` pairs `(β, t/β)` in `(0, 1)²`; `δ` cycles through the
/// admissible values `k/n ≤ 1/2` so that `δn` is an integer.
pub fn entropy_lemmas(ctx: &Context, args: &EntropyLemmaArgs) -> CliResult<Output> {
    let n = ctx.n()?;
    if n < 2 {
        return Err(usage("--n must be at least 2"));
    }
    if args.points == 0 {
        return Err(usage("--points must be positive"));
    }
    let p = args.points;
    let step = 1.0 / (p + 1) as f64;
    let mut table = Table::new(ENTROPY_COLUMNS);
    let mut max_err = 0.0f64;
    let (mut min_low, mut min_high) = (None::<f64>, None::<f64>);
    let (mut low_rows, mut high_rows) = (0, 0);
    let mut push = |side: &str, row: EntropyLemmaRow, g: OmegaFunction| -> CliResult<f64> {
        let direct = direct_entropy(&g)?;
        let err = (direct - row.extremal).abs();
        table.push(vec![
            json!(side),
            json!(row.beta),
            json!(row.t),
            json!(row.delta),
            json!(row.extremal),
            json!(direct),
            json!(err),
            json!(row.lower_bound),
            json!(row.ratio),
        ]);
        Ok(err)
    };
    for i in 1..=p {
        for j in 1..=p {
            let beta = i as f64 * step;
            let t = j as f64 * step * beta;
            let delta = (((i - 1) * p + (j - 1)) % (n / 2) + 1) as f64 / n as f64;
            let low = entropy_low_row(beta, t, delta)?;
            let ratio = low.ratio;
            max_err = max_err.max(push("low", low, two_level_low(n, beta, t, delta)?)?);
            min_low = Some(min_low.map_or(ratio, |m| m.min(ratio)));
            low_rows += 1;
            if (beta + t) * delta <= beta {
                let high = entropy_high_row(beta, t, delta)?;
                let ratio = high.ratio;
                max_err = max_err.max(push("high", high, two_level_high(n, beta, t, delta)?)?);
                min_high = Some(min_high.map_or(ratio, |m| m.min(ratio)));
                high_rows += 1;
            }
        }
    }
    let summary = EntropySummary {
        n,
        grid_points: p * p,
        low_rows,
        high_rows,
        max_formula_error: max_err,
        min_ratio_low: min_low,
        min_ratio_high: min_high,
    };
    Output::new(summary, table)
}
