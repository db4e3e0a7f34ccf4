//! Acceptance suite: twelve criteria, run one after another so that each
//! criterion's wall-clock time is measured without contention. Prints one
//! PASS/FAIL line per criterion and exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::Instant;

use clap::Parser;
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::Value;

use permix::constructions::{count_solutions, kedlaya_density_formula, kedlaya_set, KedlayaParams};
use permix::fourier::{decompose_triple, direct_remainder};
use permix::group::sampling::{chunk_rng, random_group_function, random_subset_with};
use permix::group::{factorial, GroupFunction, GroupSpace, GroupSubset, Permutation};
use permix::inequalities::{point_mass_margin, subadditivity_check};
use permix_cli::args::Cli;
use rand::Rng;

const TOL: f64 = 1e-12;

/// Runs the CLI in-process and returns the report summary.
fn cli(args: &str) -> Value {
    let argv = std::iter::once("permix").chain(args.split_whitespace());
    let parsed =
        Cli::try_parse_from(argv).unwrap_or_else(|e| panic!("bad arguments `{args}`: {e}"));
    let out = permix_cli::run(&parsed).unwrap_or_else(|e| panic!("`{args}` failed: {e}"));
    out.report.summary
}

fn f64_at(v: &Value, key: &str) -> f64 {
    v[key]
        .as_f64()
        .unwrap_or_else(|| panic!("missing number `{key}` in {v}"))
}

fn u64_at(v: &Value, key: &str) -> u64 {
    v[key]
        .as_u64()
        .unwrap_or_else(|| panic!("missing integer `{key}` in {v}"))
}

fn bool_at(v: &Value, key: &str) -> bool {
    v[key]
        .as_bool()
        .unwrap_or_else(|| panic!("missing flag `{key}` in {v}"))
}

/// `(rows, failures, max_error)` for one check of a fourier summary.
fn fourier_check(summary: &Value, check: &str) -> (u64, u64, f64) {
    let c = summary["checks"]
        .as_array()
        .and_then(|cs| cs.iter().find(|c| c["check"] == check))
        .unwrap_or_else(|| panic!("no `{check}` rows in {summary}"));
    (
        u64_at(c, "rows"),
        u64_at(c, "failures"),
        f64_at(c, "max_error"),
    )
}

fn group(n: usize, even: bool) -> GroupSpace {
    if even {
        GroupSpace::alternating(n).unwrap()
    } else {
        GroupSpace::symmetric(n).unwrap()
    }
}

fn parity_flag(even: bool) -> &'static str {
    if even {
        "even"
    } else {
        "all"
    }
}

/// `Σ_{a,b} f(a) g(b) h(ab) / |G|²` by a plain double loop.
fn brute_total(space: &GroupSpace, f: &GroupFunction, g: &GroupFunction, h: &GroupFunction) -> f64 {
    let order = space.order();
    let mut acc = 0.0;
    for a in 0..order {
        let fa = f.value(a);
        for b in 0..order {
            acc += fa * g.value(b) * h.value(space.product_rank(a, b));
        }
    }
    acc / (order * order) as f64
}

fn brute_count(x: &GroupSubset, y: &GroupSubset, z: &GroupSubset) -> u64 {
    let space = x.space();
    let mut count = 0;
    for a in x.ranks() {
        for b in y.ranks() {
            count += u64::from(z.contains_rank(space.product_rank(a, b)));
        }
    }
    count
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn decomposition() -> Verdict {
    let start = Instant::now();
    let mut worst_split: f64 = 0.0;
    let mut count_mismatches = 0;
    let mut cli_failures = 0;
    for (n, even) in [(4, false), (5, false), (5, true), (6, true)] {
        let space = group(n, even);
        let s = cli(&format!(
            "fourier --n {n} --parity {} --trials 200 --check decomposition --seed 101",
            parity_flag(even)
        ));
        cli_failures += u64_at(&s, "failures");
        let order = space.order() as f64;
        for k in 0..200 {
            let mut rng = chunk_rng(2024 + n as u64 + 10 * u64::from(even), k);
            let f = random_group_function(&space, &mut rng);
            let g = random_group_function(&space, &mut rng);
            let h = random_group_function(&space, &mut rng);
            let d = decompose_triple(&f, &g, &h).unwrap();
            let rem = direct_remainder(&f, &g, &h).unwrap();
            let total = brute_total(&space, &f, &g, &h);
            worst_split = worst_split.max((d.main_term + d.sigma_term + rem - total).abs());

            let density = rng.random_range(0.05..0.95);
            let x = random_subset_with(&space, density, &mut rng).unwrap();
            let y = random_subset_with(&space, density, &mut rng).unwrap();
            let z = random_subset_with(&space, density, &mut rng).unwrap();
            let di = decompose_triple(&x.indicator(), &y.indicator(), &z.indicator()).unwrap();
            let brute = brute_count(&x, &y, &z);
            let rem = direct_remainder(&x.indicator(), &y.indicator(), &z.indicator()).unwrap();
            let split = di.main_term + di.sigma_term + rem;
            worst_split = worst_split.max((split - di.total).abs());
            let scaled = (di.total * order * order).round() as u64;
            if scaled != brute || count_solutions(&x, &y, &z).unwrap() != brute {
                count_mismatches += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst_split <= TOL && count_mismatches == 0 && cli_failures == 0 && secs < 60.0,
        format!(
            "max |main+sigma+remainder-total| = {worst_split:.2e}, count mismatches = {count_mismatches}, \
             cli failures = {cli_failures}, {secs:.1} s"
        ),
    )
}

fn secondterm() -> Verdict {
    let start = Instant::now();
    let mut rows = 0;
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for (n, parity) in [(4, "all"), (5, "even")] {
        let s = cli(&format!(
            "fourier --n {n} --parity {parity} --trials 200 --check secondterm --seed 202"
        ));
        let (r, f, e) = fourier_check(&s, "secondterm");
        rows += r;
        failures += f;
        worst = worst.max(e);
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        rows == 400 && failures == 0 && worst <= TOL && secs < 30.0,
        format!("{rows} triples, max |lhs-rhs| = {worst:.2e}, {secs:.1} s"),
    )
}

fn parseval() -> Verdict {
    let s = cli("fourier --n 5 --parity even --trials 1000 --check parseval --seed 303");
    let (rows, remnant_failures, worst_defect) = fourier_check(&s, "parseval_remnant");
    let (_, energy_failures, worst_energy) = fourier_check(&s, "pushforward_energy");
    verdict(
        rows == 1000 && remnant_failures == 0 && energy_failures == 0 && worst_energy <= TOL,
        format!(
            "{rows} functions, min defect = {:.3e}, max energy gap = {worst_energy:.2e}",
            -worst_defect
        ),
    )
}

fn gowers() -> Verdict {
    let start = Instant::now();
    let mut trials = 0;
    let mut violations = 0;
    for (n, m) in [(5, 3), (6, 5)] {
        for (i, density) in [0.1, 0.3, 0.5, 0.7, 0.9].iter().enumerate() {
            let s = cli(&format!(
                "mixing --n {n} --parity even --random-triple --trials 200 --m {m} --density {density} --seed {}",
                400 + i
            ));
            trials += u64_at(&s, "trials");
            violations += u64_at(&s, "violations");
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        trials == 2000 && violations == 0 && secs < 120.0,
        format!("{trials} triples over A_5 and A_6, {violations} violations, {secs:.1} s"),
    )
}

/// The Kedlaya set straight from its definition: `π(b) ∈ T` and `π(T) ∩ T = ∅`.
fn kedlaya_member(p: &Permutation, basepoint: usize, set: &[usize]) -> bool {
    set.contains(&p.apply(basepoint)) && set.iter().all(|&i| !set.contains(&p.apply(i)))
}

fn kedlaya() -> Verdict {
    let mut fraction_mismatches = 0;
    let mut cases = 0;
    for n in 3..=9 {
        let space = GroupSpace::symmetric(n).unwrap();
        for t in (1..).take_while(|t| 2 * t < n) {
            cases += 1;
            let params = KedlayaParams::canonical(n, t).unwrap();
            let by_definition = space
                .elements()
                .filter(|p| kedlaya_member(p, params.basepoint(), params.set()))
                .count();
            let library = kedlaya_set(&space, &params).unwrap().cardinality();
            let formula = kedlaya_density_formula(n, t).unwrap();
            let fraction =
                BigRational::new(BigInt::from(by_definition), BigInt::from(factorial(n)));
            if library != by_definition
                || fraction != formula.binomial_form
                || fraction != formula.closed_form
            {
                fraction_mismatches += 1;
            }
        }
    }

    let mut rng = chunk_rng(505, 0);
    let mut not_product_free = 0;
    for _ in 0..50 {
        let n = rng.random_range(3..=8usize);
        let t = rng.random_range(1..=(n - 1) / 2);
        let mut points: Vec<usize> = (1..=n).collect();
        for i in (1..n).rev() {
            points.swap(i, rng.random_range(0..=i));
        }
        let set: Vec<String> = points[1..=t].iter().map(usize::to_string).collect();
        let parity = if rng.random_bool(0.5) { "even" } else { "all" };
        let s = cli(&format!(
            "construct kedlaya --n {n} --parity {parity} --t {t} --basepoint {} --set {} --check-product-free",
            points[0],
            set.join(",")
        ));
        if !bool_at(&s, "product_free") {
            not_product_free += 1;
        }
    }

    let mc = cli("construct kedlaya --n 400 --t 20 --samples 1000000 --seed 506");
    let solutions = u64_at(&mc, "solutions");
    verdict(
        fraction_mismatches == 0 && not_product_free == 0 && solutions == 0,
        format!(
            "{cases} exact fractions ({fraction_mismatches} mismatches), 50 random sets \
             ({not_product_free} with products), n=400 t=20: {solutions} solutions in 10^6 samples"
        ),
    )
}

fn surplus() -> Verdict {
    let mut excesses = Vec::new();
    let mut recount_mismatches = 0;
    for n in [6, 7] {
        let space = GroupSpace::alternating(n).unwrap();
        let out = {
            let argv = format!("permix construct surplus --n {n} --parity even --t 2,3");
            let parsed = Cli::try_parse_from(argv.split_whitespace()).unwrap();
            permix_cli::run(&parsed).unwrap().report
        };
        let cols = &out.table.columns;
        let col = |name: &str| cols.iter().position(|c| c == name).unwrap();
        for row in &out.table.rows {
            let t = row[col("t")].as_u64().unwrap() as usize;
            let x = GroupSubset::from_predicate(&space, |p| (0..t).any(|i| p.apply(i) < t));
            if brute_count(&x, &x, &x) != row[col("solutions")].as_u64().unwrap() {
                recount_mismatches += 1;
            }
            excesses.push((n, t, row[col("excess")].as_f64().unwrap()));
        }
    }
    let exact_ok = excesses.len() == 4 && excesses.iter().all(|e| e.2 > 1.0);
    let mc = cli("construct surplus --n 1000 --t 10 --samples 100000 --seed 606");
    let ci_ok = bool_at(&mc, "all_exceed_one");
    let listed: Vec<String> = excesses
        .iter()
        .map(|(n, t, e)| format!("A_{n} t={t}: {e:.4}"))
        .collect();
    verdict(
        exact_ok && recount_mismatches == 0 && ci_ok,
        format!(
            "{}; recount mismatches = {recount_mismatches}; n=1000 t=10 excess {:.3}, CI above 1: {ci_ok}",
            listed.join(", "),
            f64_at(&mc, "min_excess")
        ),
    )
}

fn cll_hadamard() -> Verdict {
    let start = Instant::now();
    let (mut cll_n, mut cll_bad) = (0, 0);
    for n in 2..=7 {
        let s = cli(&format!(
            "inequality cll --n {n} --trials 500 --seed {}",
            700 + n
        ));
        cll_n += u64_at(&s, "trials");
        cll_bad += u64_at(&s, "violations");
    }
    let (mut had_n, mut had_bad, mut disagreements) = (0, 0, 0);
    for n in 1..=10 {
        let s = cli(&format!(
            "inequality hadamard --n {n} --trials 500 --seed {}",
            710 + n
        ));
        had_n += u64_at(&s, "trials");
        had_bad += u64_at(&s, "violations");
        if n <= 6 {
            disagreements += u64_at(&s, "exact_disagreements");
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        cll_bad == 0 && had_bad == 0 && disagreements == 0 && secs < 60.0,
        format!(
            "CLL {cll_n} instances ({cll_bad} violations), Hadamard {had_n} instances ({had_bad} violations), \
             Ryser vs brute force disagreements = {disagreements}, {secs:.1} s"
        ),
    )
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn subadditivity() -> Verdict {
    let mut violations = 0;
    for n in [4, 5] {
        let s = cli(&format!(
            "inequality subadditivity --n {n} --trials 500 --seed {}",
            800 + n
        ));
        violations += u64_at(&s, "violations");
    }
    let mut worst_point_mass: f64 = 0.0;
    for n in 2..=7 {
        let space = GroupSpace::symmetric(n).unwrap();
        let margin = subadditivity_check(&GroupFunction::point_mass(&space, 0))
            .unwrap()
            .margin();
        let expected = ln_factorial(n) - 0.5 * n as f64 * (n as f64).ln();
        worst_point_mass = worst_point_mass
            .max((margin - expected).abs())
            .max((point_mass_margin(n) - expected).abs());
    }
    let space = GroupSpace::symmetric(2).unwrap();
    let n2 = subadditivity_check(&GroupFunction::point_mass(&space, 0))
        .unwrap()
        .margin();
    verdict(
        violations == 0 && n2.abs() <= TOL && worst_point_mass <= TOL,
        format!(
            "{violations} violations over 1000 functions, n=2 point-mass margin = {n2:.1e}, \
             max margin error n=2..7 = {worst_point_mass:.1e}"
        ),
    )
}

fn exp_moment() -> Verdict {
    let mut violations = 0;
    let mut fitted_min = f64::INFINITY;
    let mut tail_violations = 0;
    for n in [4, 5, 6] {
        let s = cli(&format!(
            "concentration exp-moment --n {n} --trials 500 --lambdas 20 --seed {}",
            900 + n
        ));
        violations += u64_at(&s, "violations");
        fitted_min = fitted_min.min(f64_at(&s, "fitted_c_min"));
        for seed in 0..5 {
            let t = cli(&format!(
                "concentration tail --n {n} --seed {}",
                950 + 10 * n + seed
            ));
            tail_violations += u64_at(&t, "violations");
            fitted_min = fitted_min.min(f64_at(&t, "fitted_c"));
        }
    }
    verdict(
        violations == 0 && tail_violations == 0 && fitted_min >= 1.0 / 16.0,
        format!(
            "{violations} moment/step violations over 1500 matrices, {tail_violations} tail violations, \
             fitted c min = {fitted_min:.4}"
        ),
    )
}

fn entropy_lemmas() -> Verdict {
    let n = 60;
    let argv = format!("permix inequality entropy-lemmas --n {n} --points 10");
    let parsed = Cli::try_parse_from(argv.split_whitespace()).unwrap();
    let report = permix_cli::run(&parsed).unwrap().report;
    let s = &report.summary;
    let grid = u64_at(s, "grid_points");
    let err = f64_at(s, "max_formula_error");
    let delta = report
        .table
        .columns
        .iter()
        .position(|c| c == "delta")
        .unwrap();
    let integral = report.table.rows.iter().all(|r| {
        let dn = r[delta].as_f64().unwrap() * n as f64;
        (dn - dn.round()).abs() < 1e-9
    });
    verdict(
        grid == 100 && err <= TOL && integral,
        format!(
            "{grid} grid points, {} rows, max formula error = {err:.2e}, δn integral: {integral}",
            report.table.rows.len()
        ),
    )
}

fn dyadic() -> Verdict {
    let start = Instant::now();
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for n in [10, 100, 1000, 10_000] {
        let s = cli(&format!(
            "concentration dyadic --n {n} --trials 250 --seed {}",
            1100 + n
        ));
        failures += u64_at(&s, "failures");
        worst = worst.max(f64_at(&s, "max_reconstruction_error"));
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        failures == 0 && secs < 20.0,
        format!("1000 functions up to n=10^4, {failures} failures, max reconstruction error = {worst:.1e}, {secs:.1} s"),
    )
}

fn run_binary(args: &str, threads: usize) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_permix"))
        .args(args.split_whitespace())
        .args(["--threads", &threads.to_string()])
        .env_remove("PERMIX_THREADS")
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "`{args}` exited with {}", out.status);
    out.stdout
}

fn determinism() -> Verdict {
    let commands = [
        "mixing --n 5 --parity even --random-triple --density 0.3 --trials 20 --seed 7",
        "mixing --n 8 --family surplus --t 2 --samples 20000 --seed 7",
        "fourier --n 5 --trials 30 --seed 7",
        "construct kedlaya --n 30 --t 4 --samples 50000 --seed 7",
        "construct surplus --n 40 --t 2,3 --samples 20000 --seed 7 --format csv",
        "concentration exp-moment --n 5 --trials 30 --seed 7",
        "concentration dyadic --n 500 --trials 40 --seed 7 --format csv",
        "inequality hadamard --n 6 --trials 50 --seed 7",
    ];
    let mut differing = Vec::new();
    for c in commands {
        let a = run_binary(c, 1);
        let b = run_binary(c, 1);
        let c8 = run_binary(c, 8);
        if a != b || a != c8 {
            differing.push(c);
        }
    }
    verdict(
        differing.is_empty(),
        format!(
            "{} commands, each run twice at 1 thread and once at 8; differing: {:?}",
            commands.len(),
            differing
        ),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("decomposition identity", decomposition),
        ("secondterm identity", secondterm),
        ("parseval remnant", parseval),
        ("gowers bound", gowers),
        ("kedlaya sets", kedlaya),
        ("surplus sets", surplus),
        ("cll and hadamard", cll_hadamard),
        ("entropy subadditivity", subadditivity),
        ("exponential moment", exp_moment),
        ("extremal entropy lemmas", entropy_lemmas),
        ("dyadic decomposition", dyadic),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        failed += usize::from(!v.pass);
        println!(
            "criterion {:>2} {name}: {} ({})",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!("acceptance: {} of 12 criteria passed", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
