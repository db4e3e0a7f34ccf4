use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use permix::concentration::{
    bernstein_bound, cll_exp_moment_step_from, dyadic_decompose, dyadic_reconstruction_error,
    exp_moment_pair_from, fitted_bernstein_constant, hoeffding_exact_distribution,
    hoeffding_monte_carlo_tail, lambda_grid, levelset_deficit, rearrangement_deficit_report,
    ConcentrationInstance, DeficitRow, DyadicPiece, LevelSetPair, DEFAULT_BERNSTEIN_C,
};
use permix::group::sampling::{random_group_function, random_omega_function};
use permix::group::{GroupSpace, OmegaFunction, UniformFunction};

use super::{check_trials, opt, Context, Output};
use crate::args::{DeficitArgs, DyadicArgs, ExpMomentArgs, LevelsetArgs, TailArgs};
use crate::error::{usage, CliResult};
use crate::matrix_csv::read_matrix;
use crate::report::Table;

/// Relative slack for the inequality comparisons.
pub const SLACK: f64 = 1e-12;

fn check_degree(space: &GroupSpace, inst: &ConcentrationInstance) -> CliResult<()> {
    if inst.n() != space.n() {
        return Err(usage(format!(
            "matrix is {0} × {0} but --n is {1}",
            inst.n(),
            space.n()
        )));
    }
    Ok(())
}

/// A row-centered instance, either from `--matrix` or drawn for `trial`.
fn instance(
    ctx: &Context,
    matrix: Option<&std::path::Path>,
    trial: usize,
) -> CliResult<ConcentrationInstance> {
    let inst = match matrix {
        Some(path) => {
            let (n, a) = read_matrix(path)?;
            ConcentrationInstance::new(n, a)?
        }
        None => ConcentrationInstance::random(ctx.n()?, &mut ctx.trial_rng(trial)?),
    };
    Ok(if inst.rows_sum_to_zero() {
        inst
    } else {
        inst.center()
    })
}

/// Exact enumeration visits `|G|` permutations with `n` terms each.
fn check_enumeration(ctx: &Context, space: &GroupSpace, instances: usize) -> CliResult<()> {
    ctx.check_budget(space.order() as u128 * space.n() as u128 * instances as u128)
}

const EXP_COLUMNS: &[&str] = &[
    "trial",
    "n",
    "max_abs",
    "variance_proxy",
    "shift",
    "max_moment_ratio",
    "max_step_ratio",
    "moment_violations",
    "step_violations",
    "fitted_c",
];

#[derive(Serialize)]
struct ExpSummary {
    group: String,
    instances: usize,
    lambdas: usize,
    moment_violations: usize,
    step_violations: usize,
    violations: usize,
    fitted_c_min: Option<f64>,
    default_c: f64,
    fitted_c_at_least_default: bool,
}

/// A table row, its moment and step violation counts, and its fitted c.
type MomentRow = (Vec<Value>, usize, usize, Option<f64>);

pub fn exp_moment(ctx: &Context, args: &ExpMomentArgs) -> CliResult<Output> {
    let instances = if args.matrix.is_some() {
        1
    } else {
        args.trials
    };
    check_trials(instances)?;
    if args.lambdas == 0 {
        return Err(usage("--lambdas must be positive"));
    }
    let space = ctx.space()?;
    check_enumeration(ctx, &space, instances)?;
    let rows: Vec<CliResult<MomentRow>> = (0..instances)
        .into_par_iter()
        .map(|k| {
            let inst = instance(ctx, args.matrix.as_deref(), k)?;
            check_degree(&space, &inst)?;
            let dist = hoeffding_exact_distribution(&inst, &space)?;
            let (mut moment_bad, mut step_bad) = (0, 0);
            let (mut moment_ratio, mut step_ratio) = (0.0f64, 0.0f64);
            // an all-zero matrix has no admissible λ range worth testing
            let grid = if inst.max_abs() > 0.0 {
                lambda_grid(&inst, args.lambdas)
            } else {
                Vec::new()
            };
            for lambda in grid {
                let pair = exp_moment_pair_from(&inst, &dist, lambda)?;
                let step = cll_exp_moment_step_from(&inst, &dist, lambda);
                moment_bad += usize::from(!pair.holds(SLACK));
                step_bad += usize::from(!step.holds(SLACK));
                moment_ratio = moment_ratio.max(pair.exact / pair.bound);
                step_ratio = step_ratio.max(step.lhs / step.rhs);
            }
            let fitted = fitted_bernstein_constant(&inst, &dist);
            let row = vec![
                json!(k),
                json!(inst.n()),
                json!(inst.max_abs()),
                json!(inst.variance_proxy()),
                json!(inst.shift()),
                json!(moment_ratio),
                json!(step_ratio),
                json!(moment_bad),
                json!(step_bad),
                opt(fitted),
            ];
            Ok((row, moment_bad, step_bad, fitted))
        })
        .collect();
    let mut table = Table::new(EXP_COLUMNS);
    let (mut moment_violations, mut step_violations) = (0, 0);
    let mut fitted_c_min: Option<f64> = None;
    for r in rows {
        let (row, m, s, fitted) = r?;
        table.push(row);
        moment_violations += m;
        step_violations += s;
        if let Some(c) = fitted {
            fitted_c_min = Some(fitted_c_min.map_or(c, |x| x.min(c)));
        }
    }
    let summary = ExpSummary {
        group: space.name(),
        instances,
        lambdas: args.lambdas,
        moment_violations,
        step_violations,
        violations: moment_violations + step_violations,
        fitted_c_min,
        default_c: DEFAULT_BERNSTEIN_C,
        fitted_c_at_least_default: fitted_c_min.is_none_or(|c| c >= DEFAULT_BERNSTEIN_C),
    };
    Output::new(summary, table)
}

const TAIL_COLUMNS: &[&str] = &[
    "t",
    "exact_tail",
    "bernstein_bound",
    "fitted_bound",
    "holds",
    "mc_tail",
    "mc_stderr",
];

#[derive(Serialize)]
struct TailSummary {
    group: String,
    n: usize,
    max_abs: f64,
    variance_proxy: f64,
    shift: f64,
    c: f64,
    fitted_c: Option<f64>,
    violations: usize,
}

pub fn tail(ctx: &Context, args: &TailArgs) -> CliResult<Output> {
    if args.points == 0 {
        return Err(usage("--points must be positive"));
    }
    if args.matrix.is_none() {
        ctx.seed()?;
    }
    let space = ctx.space()?;
    check_enumeration(ctx, &space, 1)?;
    let inst = instance(ctx, args.matrix.as_deref(), 0)?;
    check_degree(&space, &inst)?;
    let dist = hoeffding_exact_distribution(&inst, &space)?;
    let fitted = fitted_bernstein_constant(&inst, &dist);
    let top = dist.abs_tail_points().last().map_or(0.0, |&(u, _)| u);
    let ts: Vec<f64> = (1..=args.points)
        .map(|k| top * k as f64 / args.points as f64)
        .filter(|&t| t > 0.0)
        .collect();
    let mc = match ctx.common.samples {
        Some(_) => Some(hoeffding_monte_carlo_tail(
            &inst,
            ctx.parity(),
            &ts,
            ctx.samples()?,
            ctx.seed()?,
        )?),
        None => None,
    };
    let mut table = Table::new(TAIL_COLUMNS);
    let mut violations = 0;
    for (k, &t) in ts.iter().enumerate() {
        let exact = dist.tail(t);
        let bound = bernstein_bound(&inst, t, args.c)?;
        let holds = exact <= bound * (1.0 + SLACK);
        violations += usize::from(!holds);
        let est = mc.as_ref().map(|m| m[k]);
        table.push(vec![
            json!(t),
            json!(exact),
            json!(bound),
            opt(fitted.map(|c| bernstein_bound(&inst, t, c)).transpose()?),
            json!(holds),
            opt(est.map(|e| e.p_hat)),
            opt(est.map(|e| e.stderr)),
        ]);
    }
    let summary = TailSummary {
        group: space.name(),
        n: inst.n(),
        max_abs: inst.max_abs(),
        variance_proxy: inst.variance_proxy(),
        shift: inst.shift(),
        c: args.c,
        fitted_c: fitted,
        violations,
    };
    Output::new(summary, table)
}

const DYADIC_COLUMNS: &[&str] = &[
    "trial",
    "n",
    "pieces",
    "reconstruction_error",
    "tolerance",
    "bands_ok",
    "passed",
];

/// Every piece's nonzero values carry the sign of `s` and lie in
/// `(|s|/2, |s|]`; supports are disjoint and their densities match.
fn bands_ok(n: usize, pieces: &[DyadicPiece]) -> bool {
    let mut covered = vec![false; n];
    pieces.iter().all(|p| {
        let mag = p.s.abs();
        let mut support = 0;
        let values_ok = p.values.values().iter().enumerate().all(|(i, &v)| {
            if v == 0.0 {
                return true;
            }
            support += 1;
            let fresh = !std::mem::replace(&mut covered[i], true);
            fresh && v.signum() == p.s.signum() && v.abs() > mag / 2.0 && v.abs() <= mag
        });
        values_ok && (p.delta - support as f64 / n as f64).abs() < 1e-15
    })
}

#[derive(Serialize)]
struct DyadicSummary {
    n: usize,
    trials: usize,
    floor: f64,
    max_reconstruction_error: f64,
    failures: usize,
}

pub fn dyadic(ctx: &Context, args: &DyadicArgs) -> CliResult<Output> {
    check_trials(args.trials)?;
    let n = ctx.n()?;
    if n == 0 {
        return Err(usage("--n must be positive"));
    }
    if args.floor.is_nan() || args.floor < 0.0 {
        return Err(usage("--floor must be nonnegative"));
    }
    let tolerance = n as f64 * args.floor;
    let rows: Vec<CliResult<(f64, bool, Vec<Value>)>> = (0..args.trials)
        .into_par_iter()
        .map(|k| {
            let g = random_omega_function(n, &mut ctx.trial_rng(k)?);
            let pieces = dyadic_decompose(&g, args.floor)?;
            let err = dyadic_reconstruction_error(&g, &pieces);
            let bands = bands_ok(n, &pieces);
            let passed = bands && err <= tolerance;
            let row = vec![
                json!(k),
                json!(n),
                json!(pieces.len()),
                json!(err),
                json!(tolerance),
                json!(bands),
                json!(passed),
            ];
            Ok((err, passed, row))
        })
        .collect();
    let mut table = Table::new(DYADIC_COLUMNS);
    let (mut max_err, mut failures) = (0.0f64, 0);
    for r in rows {
        let (err, passed, row) = r?;
        max_err = max_err.max(err);
        failures += usize::from(!passed);
        table.push(row);
    }
    let summary = DyadicSummary {
        n,
        trials: args.trials,
        floor: args.floor,
        max_reconstruction_error: max_err,
        failures,
    };
    Output::new(summary, table)
}

/// A level-set function with support of size `round(δn)` (at least one
/// point) and values uniform in `[1/2, 1]`.
fn random_level_set(n: usize, delta: f64, rng: &mut impl Rng) -> CliResult<OmegaFunction> {
    let k = ((delta * n as f64).round() as usize).clamp(1, n);
    let mut values = vec![0.0; n];
    for i in index::sample(rng, n, k) {
        values[i] = rng.random_range(0.5..=1.0);
    }
    Ok(OmegaFunction::new(values)?)
}

const LEVELSET_COLUMNS: &[&str] = &[
    "trial",
    "n",
    "alpha",
    "delta1",
    "delta2",
    "observed",
    "regime",
    "high_bound",
    "low_bound_alpha_log",
    "low_bound_delta_product",
    "low_bound_alpha_delta_product",
    "cauchy_schwarz_cap",
    "within_cap",
];

#[derive(Serialize)]
struct LevelsetSummary {
    group: String,
    trials: usize,
    max_abs_observed: f64,
    /// Largest `|observed| / bound` for the regime's bound, constant 1.
    max_bound_ratio: Option<f64>,
    cap_violations: usize,
}

pub fn levelset(ctx: &Context, args: &LevelsetArgs) -> CliResult<Output> {
    check_trials(args.trials)?;
    for d in [args.delta1, args.delta2] {
        if !(d > 0.0 && d <= 1.0) {
            return Err(usage("level-set densities must lie in (0, 1]"));
        }
    }
    let space = ctx.space()?;
    let order = space.order() as u128;
    ctx.check_budget(order * space.n() as u128 * args.trials as u128)?;
    let reports: Vec<_> = (0..args.trials)
        .into_par_iter()
        .map(|k| -> CliResult<_> {
            let mut rng = ctx.trial_rng(k)?;
            let f = random_group_function(&space, &mut rng);
            let h1 = random_level_set(space.n(), args.delta1, &mut rng)?;
            let h2 = random_level_set(space.n(), args.delta2, &mut rng)?;
            Ok(levelset_deficit(&f, &LevelSetPair::new(h1, h2)?)?)
        })
        .collect::<CliResult<_>>()?;
    let mut table = Table::new(LEVELSET_COLUMNS);
    let (mut max_abs, mut max_ratio, mut cap_violations) = (0.0f64, None::<f64>, 0);
    for (k, r) in reports.iter().enumerate() {
        let within = r.observed.abs() <= r.cauchy_schwarz_cap * (1.0 + SLACK);
        cap_violations += usize::from(!within);
        max_abs = max_abs.max(r.observed.abs());
        let bound = r
            .high_bound
            .or(r.low_bounds.map(|(a, b, c)| a.max(b).max(c)));
        if let Some(b) = bound.filter(|b| *b > 0.0) {
            let q = r.observed.abs() / b;
            max_ratio = Some(max_ratio.map_or(q, |m| m.max(q)));
        }
        let lb = r.low_bounds;
        table.push(vec![
            json!(k),
            json!(r.n),
            json!(r.alpha),
            json!(r.delta1),
            json!(r.delta2),
            json!(r.observed),
            json!(r.regime),
            opt(r.high_bound),
            opt(lb.map(|b| b.0)),
            opt(lb.map(|b| b.1)),
            opt(lb.map(|b| b.2)),
            json!(r.cauchy_schwarz_cap),
            json!(within),
        ]);
    }
    let summary = LevelsetSummary {
        group: space.name(),
        trials: args.trials,
        max_abs_observed: max_abs,
        max_bound_ratio: max_ratio,
        cap_violations,
    };
    Output::new(summary, table)
}

pub const DEFICIT_COLUMNS: &[&str] = &[
    "n", "alpha", "beta", "gamma", "deficit", "term1", "term2", "ratio",
];

#[derive(Serialize)]
struct DeficitSummary {
    group: String,
    trials: usize,
    max_ratio: Option<f64>,
}

pub fn deficit(ctx: &Context, args: &DeficitArgs) -> CliResult<Output> {
    check_trials(args.trials)?;
    let space = ctx.space()?;
    let order = space.order() as u128;
    ctx.check_budget(order * space.n() as u128 * args.trials as u128)?;
    let rows: Vec<DeficitRow> = (0..args.trials)
        .into_par_iter()
        .map(|k| -> CliResult<_> {
            let mut rng = ctx.trial_rng(k)?;
            let f = random_group_function(&space, &mut rng);
            let g1 = random_omega_function(space.n(), &mut rng);
            let g2 = random_omega_function(space.n(), &mut rng);
            Ok(rearrangement_deficit_report(&f, &g1, &g2)?)
        })
        .collect::<CliResult<_>>()?;
    let max_ratio = rows.iter().filter_map(|r| r.ratio).reduce(f64::max);
    let table = Table::from_records(DEFICIT_COLUMNS, &rows)?;
    Output::new(
        DeficitSummary {
            group: space.name(),
            trials: args.trials,
            max_ratio,
        },
        table,
    )
}
