use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use permix::constructions::{KedlayaParams, SurplusParams};
use permix::exact::{check_rational_mode, decompose_subsets_exact};
use permix::group::sampling::random_subset_with;
use permix::mixing::{
    mixing_exact, mixing_monte_carlo, Everything, MixingReport, PermutationFamily,
};

use super::{check_trials, opt, Context, Output};
use crate::args::{Family, MixingArgs};
use crate::error::{usage, CliResult};
use crate::report::Table;

const COLUMNS: &[&str] = &[
    "trial",
    "alpha",
    "beta",
    "gamma",
    "total",
    "main",
    "deviation",
    "gowers_bound",
    "gowers_holds",
    "threshold_margin",
    "solutions",
    "stderr",
    "exact_total",
    "exact_sigma_term",
    "exact_remainder",
];

fn row(trial: usize, r: &MixingReport, exact: Option<[String; 3]>) -> Vec<Value> {
    let [et, es, er] = exact.map_or([Value::Null, Value::Null, Value::Null], |e| {
        e.map(Value::from)
    });
    vec![
        json!(trial),
        json!(r.alpha),
        json!(r.beta),
        json!(r.gamma),
        json!(r.total),
        json!(r.main),
        json!(r.deviation),
        opt(r.gowers_bound),
        r.gowers_holds().map_or(Value::Null, Value::from),
        json!(r.threshold_margin),
        r.solutions.map_or(Value::Null, Value::from),
        json!(r.stderr),
        et,
        es,
        er,
    ]
}

pub fn run(ctx: &Context, args: &MixingArgs) -> CliResult<Output> {
    match (args.family, args.random_triple) {
        (Some(_), true) => Err(usage("--family and --random-triple are mutually exclusive")),
        (Some(family), false) => monte_carlo(ctx, args, family),
        (None, true) => random_triples(ctx, args),
        (None, false) => Err(usage("choose --random-triple or --family")),
    }
}

#[derive(Serialize)]
struct TripleSummary {
    group: String,
    n: usize,
    m: Option<usize>,
    trials: usize,
    violations: usize,
    /// max |total - αβγ| / bound
    max_deviation_ratio: Option<f64>,
    /// The full report when there is a single trial.
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<MixingReport>,
}

fn densities(args: &MixingArgs) -> CliResult<[f64; 3]> {
    let d = &args.density;
    let out = match d.len() {
        1 => [d[0]; 3],
        3 => [d[0], d[1], d[2]],
        k => {
            return Err(usage(format!(
                "--density takes one or three values, got {k}"
            )))
        }
    };
    if out.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(usage("densities must lie in [0, 1]"));
    }
    Ok(out)
}

fn random_triples(ctx: &Context, args: &MixingArgs) -> CliResult<Output> {
    check_trials(args.trials)?;
    let [a, b, c] = densities(args)?;
    let space = ctx.space()?;
    if ctx.common.rational_mode {
        check_rational_mode(&space)?;
    }
    let results: Vec<CliResult<(MixingReport, Option<[String; 3]>)>> = (0..args.trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = ctx.trial_rng(k)?;
            let x = random_subset_with(&space, a, &mut rng)?;
            let y = random_subset_with(&space, b, &mut rng)?;
            let z = random_subset_with(&space, c, &mut rng)?;
            let report = mixing_exact(&x, &y, &z, args.m, ctx.budget())?;
            let exact = if ctx.common.rational_mode {
                let e = decompose_subsets_exact(&x, &y, &z)?;
                Some([
                    e.total.to_string(),
                    e.sigma_term.to_string(),
                    e.remainder.to_string(),
                ])
            } else {
                None
            };
            Ok((report, exact))
        })
        .collect();
    let mut table = Table::new(COLUMNS);
    let mut reports = Vec::new();
    for (k, r) in results.into_iter().enumerate() {
        let (report, exact) = r?;
        table.push(row(k, &report, exact));
        reports.push(report);
    }
    let violations = reports
        .iter()
        .filter(|r| r.gowers_holds() == Some(false))
        .count();
    let max_deviation_ratio = reports
        .iter()
        .filter_map(|r| {
            r.gowers_bound
                .filter(|b| *b > 0.0)
                .map(|b| r.deviation.abs() / b)
        })
        .reduce(f64::max);
    let summary = TripleSummary {
        group: space.name(),
        n: space.n(),
        m: reports[0].m,
        trials: args.trials,
        violations,
        max_deviation_ratio,
        result: (args.trials == 1).then(|| reports[0].clone()),
    };
    Output::new(summary, table)
}

#[derive(Serialize)]
struct MonteCarloSummary {
    family: Family,
    t: Option<usize>,
    #[serde(flatten)]
    report: MixingReport,
    /// 95% interval for the total, from the binomial standard error.
    ci95: [f64; 2],
}

fn family_t(args: &MixingArgs) -> CliResult<usize> {
    args.t
        .ok_or_else(|| usage("--t is required for this family"))
}

fn monte_carlo(ctx: &Context, args: &MixingArgs, family: Family) -> CliResult<Output> {
    let n = ctx.n()?;
    let (samples, seed) = (ctx.samples()?, ctx.seed()?);
    let boxed: Box<dyn PermutationFamily> = match family {
        Family::Kedlaya => Box::new(KedlayaParams::canonical(n, family_t(args)?)?),
        Family::Surplus => Box::new(SurplusParams::canonical(n, family_t(args)?)?),
        Family::All => Box::new(Everything(n)),
    };
    let f = boxed.as_ref();
    let report = mixing_monte_carlo(f, f, f, ctx.parity(), samples, seed, args.m)?;
    let mut table = Table::new(COLUMNS);
    table.push(row(0, &report, None));
    let half = 1.96 * report.stderr;
    let summary = MonteCarloSummary {
        family,
        t: args.t,
        ci95: [report.total - half, report.total + half],
        report,
    };
    Output::new(summary, table)
}
