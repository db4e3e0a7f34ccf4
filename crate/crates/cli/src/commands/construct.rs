use serde::Serialize;
use serde_json::{json, Value};

use permix::constructions::{
    kedlaya_density_formula, kedlaya_set, surplus_excess_table, KedlayaParams, SurplusParams,
    SurplusRatio,
};
use permix::group::{GroupSpace, Permutation};
use permix::mixing::{mixing_monte_carlo, product_free_check, PermutationFamily};
use permix::PermixError;

use super::{opt, Context, Output};
use crate::args::{KedlayaArgs, SurplusArgs};
use crate::error::{usage, CliResult};
use crate::report::Table;

/// 1-based points to 0-based, rejecting 0.
fn zero_based(points: &[usize]) -> CliResult<Vec<usize>> {
    points
        .iter()
        .map(|&p| p.checked_sub(1).ok_or_else(|| usage("points are 1-based")))
        .collect()
}

fn one_based(points: &[usize]) -> Vec<usize> {
    points.iter().map(|p| p + 1).collect()
}

/// The enumerated group when it fits under the cap; `None` when it does not.
fn try_enumerate(ctx: &Context) -> CliResult<Option<GroupSpace>> {
    match ctx.space() {
        Ok(s) => Ok(Some(s)),
        Err(crate::error::CliError::Compute(PermixError::SizeCap { .. })) => Ok(None),
        Err(e) => Err(e),
    }
}

#[derive(Serialize)]
struct Witness {
    x: Vec<usize>,
    y: Vec<usize>,
    xy: Vec<usize>,
}

fn witness((x, y, z): &(Permutation, Permutation, Permutation)) -> Witness {
    Witness {
        x: x.to_one_based(),
        y: y.to_one_based(),
        xy: z.to_one_based(),
    }
}

#[derive(Serialize)]
struct KedlayaSummary {
    n: usize,
    t: usize,
    group: String,
    basepoint: usize,
    set: Vec<usize>,
    /// S_n density as an exact fraction.
    density_fraction: String,
    closed_form: String,
    /// Density in the chosen group, when known in closed form.
    density: Option<f64>,
    cardinality: Option<usize>,
    enumerated_density: Option<f64>,
    /// `|X| = density · |G|` exactly.
    cardinality_matches_formula: Option<bool>,
    product_free: Option<bool>,
    witness: Option<Witness>,
    samples: Option<u64>,
    hits: Option<u64>,
    solutions: Option<u64>,
}

const KEDLAYA_COLUMNS: &[&str] = &[
    "n",
    "t",
    "group",
    "density",
    "cardinality",
    "product_free",
    "samples",
    "solutions",
];

pub fn kedlaya(ctx: &Context, args: &KedlayaArgs) -> CliResult<Output> {
    let n = ctx.n()?;
    let basepoint = zero_based(&[args.basepoint])?[0];
    let set = match &args.set {
        Some(s) => {
            if s.len() != args.t {
                return Err(usage(format!(
                    "--set has {} points but --t is {}",
                    s.len(),
                    args.t
                )));
            }
            zero_based(s)?
        }
        None => (0..n).filter(|&i| i != basepoint).take(args.t).collect(),
    };
    let params = KedlayaParams::new(n, basepoint, set)?;
    let formula = kedlaya_density_formula(n, args.t)?;
    let density = params.exact_density(ctx.parity());

    let space = if args.check_product_free {
        Some(ctx.space()?)
    } else {
        try_enumerate(ctx)?
    };
    let mut s = KedlayaSummary {
        n,
        t: args.t,
        group: ctx.group_label()?,
        basepoint: args.basepoint,
        set: one_based(params.set()),
        density_fraction: formula.binomial_form.to_string(),
        closed_form: formula.closed_form.to_string(),
        density,
        cardinality: None,
        enumerated_density: None,
        cardinality_matches_formula: None,
        product_free: None,
        witness: None,
        samples: None,
        hits: None,
        solutions: None,
    };
    if let Some(space) = &space {
        let x = kedlaya_set(space, &params)?;
        s.group = space.name();
        s.cardinality = Some(x.cardinality());
        s.enumerated_density = Some(x.density());
        s.cardinality_matches_formula = density.map(|_| {
            // the A_n density equals the S_n fraction whenever it is known
            let expected = &formula.binomial_form * num_bigint::BigInt::from(space.order());
            expected.is_integer()
                && expected.to_integer() == num_bigint::BigInt::from(x.cardinality())
        });
        if args.check_product_free {
            let check = product_free_check(&x, ctx.budget())?;
            s.product_free = Some(check.product_free);
            s.witness = check.witness.as_ref().map(witness);
        }
    }
    if ctx.common.samples.is_some() {
        let f: &dyn PermutationFamily = &params;
        let r = mixing_monte_carlo(f, f, f, ctx.parity(), ctx.samples()?, ctx.seed()?, None)?;
        s.samples = r.samples;
        s.hits = r.hits;
        s.solutions = r.hits;
    }
    let mut table = Table::new(KEDLAYA_COLUMNS);
    table.push(vec![
        json!(s.n),
        json!(s.t),
        json!(s.group),
        opt(s.density),
        s.cardinality.map_or(Value::Null, Value::from),
        s.product_free.map_or(Value::Null, Value::from),
        s.samples.map_or(Value::Null, Value::from),
        s.solutions.map_or(Value::Null, Value::from),
    ]);
    Output::new(s, table)
}

const SURPLUS_COLUMNS: &[&str] = &[
    "n",
    "t",
    "group",
    "method",
    "cardinality",
    "density",
    "solutions",
    "excess",
    "excess_fraction",
    "samples",
    "hits",
    "stderr",
    "ci_low",
    "ci_high",
];

#[derive(Serialize)]
struct SurplusSummary {
    n: usize,
    group: String,
    method: &'static str,
    ts: Vec<usize>,
    min_excess: f64,
    /// Exact: every excess is above 1. Monte Carlo: every 95% interval lies
    /// above 1.
    all_exceed_one: bool,
}

fn exact_row(r: &SurplusRatio) -> Vec<Value> {
    vec![
        json!(r.n),
        json!(r.t),
        json!(r.group),
        json!("exact"),
        json!(r.cardinality),
        json!(r.density),
        json!(r.solutions),
        json!(r.excess),
        json!(r.excess_fraction),
        Value::Null,
        Value::Null,
        Value::Null,
        Value::Null,
        Value::Null,
    ]
}

pub fn surplus(ctx: &Context, args: &SurplusArgs) -> CliResult<Output> {
    let n = ctx.n()?;
    let mut table = Table::new(SURPLUS_COLUMNS);
    if ctx.common.samples.is_none() {
        let space = ctx.space()?;
        for &t in &args.t {
            let x = permix::constructions::surplus_set(&space, &SurplusParams::canonical(n, t)?)?;
            ctx.check_budget((x.cardinality() as u128).pow(2))?;
        }
        let rows = surplus_excess_table(&space, &args.t)?;
        rows.iter().for_each(|r| table.push(exact_row(r)));
        let summary = SurplusSummary {
            n,
            group: space.name(),
            method: "exact",
            ts: args.t.clone(),
            min_excess: rows.iter().map(|r| r.excess).fold(f64::INFINITY, f64::min),
            all_exceed_one: rows.iter().all(|r| r.excess > 1.0),
        };
        return Output::new(summary, table);
    }
    let (samples, seed) = (ctx.samples()?, ctx.seed()?);
    let mut min_excess = f64::INFINITY;
    let mut all_exceed_one = true;
    for &t in &args.t {
        let params = SurplusParams::canonical(n, t)?;
        let alpha = params
            .exact_density(ctx.parity())
            .ok_or_else(|| usage(format!("no closed-form density for t = {t} in this group")))?;
        let f: &dyn PermutationFamily = &params;
        let r = mixing_monte_carlo(f, f, f, ctx.parity(), samples, seed, None)?;
        // total = α² p̂ with p̂ = P(xy ∈ X | x, y ∈ X); the excess is p̂ / α
        let p_hat = r.hits.expect("monte carlo reports hits") as f64 / samples as f64;
        let excess = p_hat / alpha;
        let stderr = (p_hat * (1.0 - p_hat) / samples as f64).sqrt() / alpha;
        let (lo, hi) = (excess - 1.96 * stderr, excess + 1.96 * stderr);
        min_excess = min_excess.min(excess);
        all_exceed_one &= lo > 1.0;
        table.push(vec![
            json!(n),
            json!(t),
            json!(r.group),
            json!("monte_carlo"),
            Value::Null,
            json!(alpha),
            Value::Null,
            json!(excess),
            Value::Null,
            json!(samples),
            json!(r.hits),
            json!(stderr),
            json!(lo),
            json!(hi),
        ]);
    }
    let summary = SurplusSummary {
        n,
        group: ctx.group_label()?,
        method: "monte_carlo",
        ts: args.t.clone(),
        min_excess,
        all_exceed_one,
    };
    Output::new(summary, table)
}
