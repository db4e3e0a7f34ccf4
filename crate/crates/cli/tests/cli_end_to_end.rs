//! Every command path through the real binary, at n ≤ 5 except where a
//! documented example fixes a larger n.

use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

use permix_cli::args::Format;
use permix_cli::report::{emit_table, Report, Table, SCHEMA_VERSION};

fn permix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permix"))
        .args(args)
        .env_remove("PERMIX_THREADS")
        .output()
        .expect("binary runs")
}

fn split(args: &str) -> Vec<&str> {
    args.split_whitespace().collect()
}

fn ok_stdout(args: &str) -> String {
    let out = permix(&split(args));
    assert!(
        out.status.success(),
        "`{args}` failed with {}: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 output")
}

fn ok_json(args: &str) -> Value {
    serde_json::from_str(&ok_stdout(args)).expect("stdout is JSON")
}

fn exit_code(args: &str) -> i32 {
    permix(&split(args)).status.code().expect("exited normally")
}

fn columns(report: &Value) -> Vec<&str> {
    report["table"]["columns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap())
        .collect()
}

fn rows(report: &Value) -> &Vec<Value> {
    report["table"]["rows"].as_array().unwrap()
}

fn matrix_file(contents: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

const MATRIX_4: &str = "n,4\n1,2,0,-3\n0,1,1,-2\n2,-1,0,-1\n-1,-1,1,1\n";

#[test]
fn mixing_example_reports_the_split_and_bounds() {
    let r = ok_json("mixing --n 5 --parity even --random-triple --density 0.3 --seed 7");
    assert_eq!(r["schema_version"], SCHEMA_VERSION);
    assert_eq!(r["command"], "mixing");
    assert!(r["version"].as_str().unwrap().starts_with('v'));
    assert_eq!(r["config"]["seed"], 7);
    assert_eq!(r["config"]["parity"], "even");
    assert!(r.get("runtime_seconds").is_none());
    let result = &r["summary"]["result"];
    for key in ["total", "main", "gowers_bound", "threshold_margin"] {
        assert!(result[key].is_number(), "missing {key} in {result}");
    }
    assert_eq!(r["summary"]["group"], "A_5");
    assert_eq!(r["summary"]["m"], 3);
    assert_eq!(rows(&r).len(), 1);
}

#[test]
fn runtime_goes_to_stderr_unless_timing_is_requested() {
    let args = "mixing --n 4 --random-triple --seed 1";
    let out = permix(&split(args));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("runtime: "));
    let timed = ok_json(&format!("{args} --timing"));
    assert!(timed["runtime_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn mixing_with_several_trials_and_rational_terms() {
    let r = ok_json(
        "mixing --n 4 --random-triple --trials 5 --density 0.2,0.5,0.8 --rational --seed 3",
    );
    assert_eq!(rows(&r).len(), 5);
    let cols = columns(&r);
    let exact = cols.iter().position(|c| *c == "exact_total").unwrap();
    assert!(rows(&r).iter().all(|row| row[exact].is_string()));
    assert!(r["summary"].get("result").is_none());
}

#[test]
fn mixing_families_by_monte_carlo() {
    for family in [
        "--family kedlaya --t 2",
        "--family surplus --t 2",
        "--family all",
    ] {
        let r = ok_json(&format!("mixing --n 5 {family} --samples 4000 --seed 2"));
        let s = &r["summary"];
        let ci = s["ci95"].as_array().unwrap();
        assert!(ci[0].as_f64().unwrap() <= ci[1].as_f64().unwrap());
        assert_eq!(rows(&r).len(), 1);
    }
    let kedlaya = ok_json("mixing --n 5 --family kedlaya --t 2 --samples 4000 --seed 2");
    assert_eq!(kedlaya["summary"]["hits"], 0);
    let all = ok_json("mixing --n 5 --family all --samples 4000 --seed 2");
    assert_eq!(all["summary"]["total"], 1.0);
}

#[test]
fn mixing_rejects_bad_invocations() {
    assert_eq!(exit_code("mixing --n 4 --seed 1"), 2);
    assert_eq!(
        exit_code("mixing --n 4 --random-triple --family all --samples 10 --seed 1"),
        2
    );
    assert_eq!(
        exit_code("mixing --n 4 --random-triple --density 0.1,0.2 --seed 1"),
        2
    );
    assert_eq!(
        exit_code("mixing --n 4 --random-triple --density 1.5 --seed 1"),
        2
    );
    assert_eq!(exit_code("mixing --n 4 --random-triple"), 2);
    assert_eq!(
        exit_code("mixing --n 4 --family kedlaya --samples 10 --seed 1"),
        2
    );
    assert_eq!(
        exit_code("mixing --n 4 --family all --samples 0 --seed 1"),
        2
    );
    assert_eq!(
        exit_code("mixing --n 4 --random-triple --trials 0 --seed 1"),
        2
    );
    assert_eq!(exit_code("mixing --n 4 --random-triple --no-such-flag"), 2);
    assert_eq!(exit_code("no-such-command"), 2);
}

#[test]
fn budget_and_size_caps_exit_with_3() {
    assert_eq!(
        exit_code("mixing --n 5 --random-triple --seed 1 --budget 10"),
        3
    );
    assert_eq!(
        exit_code("fourier --n 5 --trials 2 --seed 1 --budget 10"),
        3
    );
    assert_eq!(exit_code("mixing --n 13 --random-triple --seed 1"), 3);
}

#[test]
fn kedlaya_example_is_product_free_with_density_one_fifth() {
    let r = ok_json("construct kedlaya --n 6 --t 2 --check-product-free");
    let s = &r["summary"];
    assert_eq!(s["density_fraction"], "1/5");
    assert_eq!(s["product_free"], true);
    assert_eq!(s["cardinality"], 144);
    assert_eq!(s["cardinality_matches_formula"], true);
    assert!(s["witness"].is_null());
}

#[test]
fn kedlaya_with_explicit_points_and_sampling() {
    let r = ok_json("construct kedlaya --n 5 --parity even --t 2 --basepoint 3 --set 5,1 --check-product-free --samples 3000 --seed 4");
    let s = &r["summary"];
    assert_eq!(s["basepoint"], 3);
    assert_eq!(s["set"], serde_json::json!([1, 5]));
    assert_eq!(s["group"], "A_5");
    assert_eq!(s["product_free"], true);
    assert_eq!(s["solutions"], 0);
    assert_eq!(s["samples"], 3000);

    assert_eq!(exit_code("construct kedlaya --n 5 --t 2 --set 1"), 2);
    assert_eq!(
        exit_code("construct kedlaya --n 5 --t 2 --basepoint 2 --set 2,3"),
        2
    );
    assert_eq!(exit_code("construct kedlaya --n 5 --t 2 --basepoint 0"), 2);
    assert_eq!(exit_code("construct kedlaya --n 5 --t 3"), 2);
}

#[test]
fn surplus_exact_and_sampled() {
    let r = ok_json("construct surplus --n 5 --t 1,2");
    assert_eq!(r["summary"]["method"], "exact");
    assert_eq!(rows(&r).len(), 2);
    let cols = columns(&r);
    let excess = cols.iter().position(|c| *c == "excess").unwrap();
    assert!(rows(&r)
        .iter()
        .all(|row| row[excess].as_f64().unwrap() > 0.0));

    let mc = ok_json("construct surplus --n 5 --parity even --t 2 --samples 5000 --seed 5");
    assert_eq!(mc["summary"]["method"], "monte_carlo");
    let ci_low = cols.iter().position(|c| *c == "ci_low").unwrap();
    assert!(rows(&mc)[0][ci_low].is_number());
}

#[test]
fn fourier_checks_pass_including_rational_mode() {
    let r = ok_json("fourier --n 4 --trials 6 --rational --seed 6");
    let s = &r["summary"];
    assert_eq!(s["failures"], 0);
    let checks: Vec<&str> = s["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["check"].as_str().unwrap())
        .collect();
    assert_eq!(
        checks,
        [
            "decomposition",
            "indicator_count",
            "secondterm",
            "parseval_remnant",
            "pushforward_energy"
        ]
    );
    let cols = columns(&r);
    let (check, exact) = (
        cols.iter().position(|c| *c == "check").unwrap(),
        cols.iter().position(|c| *c == "exact_sigma_term").unwrap(),
    );
    for row in rows(&r) {
        assert_eq!(row[exact].is_string(), row[check] == "indicator_count");
    }
    for only in ["decomposition", "secondterm", "parseval"] {
        let r = ok_json(&format!(
            "fourier --n 5 --parity even --trials 3 --check {only} --seed 6"
        ));
        assert_eq!(r["summary"]["failures"], 0);
    }
}

#[test]
fn exp_moment_on_random_and_file_matrices() {
    let r = ok_json("concentration exp-moment --n 4 --trials 10 --lambdas 8 --seed 8");
    let s = &r["summary"];
    assert_eq!(s["violations"], 0);
    assert_eq!(s["fitted_c_at_least_default"], true);
    assert_eq!(rows(&r).len(), 10);

    let file = matrix_file(MATRIX_4);
    let path = file.path().to_str().unwrap();
    let r = ok_json(&format!("concentration exp-moment --n 4 --matrix {path}"));
    assert_eq!(r["summary"]["violations"], 0);
    assert_eq!(rows(&r).len(), 1);
}

#[test]
fn tail_from_a_matrix_file_with_monte_carlo() {
    let file = matrix_file(MATRIX_4);
    let path = file.path().to_str().unwrap();
    let r = ok_json(&format!(
        "concentration tail --n 4 --matrix {path} --points 5 --samples 2000 --seed 9"
    ));
    assert_eq!(r["summary"]["violations"], 0);
    assert_eq!(rows(&r).len(), 5);
    let mc = columns(&r).iter().position(|c| *c == "mc_tail").unwrap();
    assert!(rows(&r).iter().all(|row| row[mc].is_number()));

    let exact_only = ok_json(&format!("concentration tail --n 4 --matrix {path}"));
    assert!(rows(&exact_only).iter().all(|row| row[mc].is_null()));
    assert_eq!(
        exit_code(&format!("concentration tail --n 5 --matrix {path}")),
        2
    );
}

#[test]
fn malformed_and_missing_matrix_files() {
    let bad = matrix_file("n,3\n1,2,3\n4,5\n7,8,9\n");
    let path = bad.path().to_str().unwrap();
    assert_eq!(
        exit_code(&format!("concentration tail --n 3 --matrix {path}")),
        2
    );
    assert_eq!(
        exit_code("concentration tail --n 3 --matrix /nonexistent/matrix.csv"),
        1
    );
}

#[test]
fn dyadic_levelset_and_deficit() {
    let r = ok_json("concentration dyadic --n 5 --trials 10 --seed 10");
    assert_eq!(r["summary"]["failures"], 0);
    assert_eq!(rows(&r).len(), 10);

    let r = ok_json("concentration levelset --n 5 --trials 4 --delta1 0.4 --delta2 0.6 --seed 11");
    assert_eq!(r["summary"]["cap_violations"], 0);
    assert_eq!(rows(&r).len(), 4);
    assert_eq!(
        exit_code("concentration levelset --n 5 --delta1 0 --seed 11"),
        2
    );

    let r = ok_json("concentration deficit --n 5 --trials 3 --seed 12");
    assert_eq!(
        columns(&r),
        ["n", "alpha", "beta", "gamma", "deficit", "term1", "term2", "ratio"]
    );
    let csv = ok_stdout("concentration deficit --n 5 --trials 3 --seed 12 --format csv");
    assert_eq!(
        csv.lines().next().unwrap(),
        "n,alpha,beta,gamma,deficit,term1,term2,ratio"
    );
}

#[test]
fn inequality_commands() {
    let r = ok_json("inequality cll --n 5 --trials 500 --seed 1");
    assert_eq!(r["summary"]["violations"], 0);
    assert_eq!(rows(&r).len(), 500);

    let r = ok_json("inequality hadamard --n 5 --trials 40 --seed 13");
    assert_eq!(r["summary"]["violations"], 0);
    assert_eq!(r["summary"]["exact_disagreements"], 0);

    let r = ok_json("inequality subadditivity --n 4 --trials 20 --seed 14");
    let s = &r["summary"];
    assert_eq!(s["violations"], 0);
    assert_eq!(s["point_mass_margin"], s["point_mass_observed"]);

    let r = ok_json("inequality entropy-lemmas --n 4 --points 3");
    let s = &r["summary"];
    assert_eq!(s["grid_points"], 9);
    assert!(s["max_formula_error"].as_f64().unwrap() <= 1e-12);
    assert_eq!(exit_code("inequality entropy-lemmas --n 1"), 2);
}

#[test]
fn threshold_conditions() {
    let r = ok_json("threshold --n 5 --alpha 0.5 --beta 0.5 --gamma 0.5");
    let s = &r["summary"];
    assert_eq!(s["n"], 5);
    assert!(s["all_conditions_hold"].is_boolean());
    assert!(!rows(&r).is_empty());
    assert_eq!(columns(&r), ["name", "margin", "log_margin"]);
    assert_eq!(exit_code("threshold --n 5 --alpha 0.5 --beta 0.5"), 2);
}

#[test]
fn csv_output_and_output_file() {
    let args = "inequality hadamard --n 4 --trials 3 --seed 15";
    let json = ok_json(args);
    let csv = ok_stdout(&format!("{args} --format csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), columns(&json).join(","));
    assert_eq!(lines.count(), 3);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let out = permix(&split(&format!(
        "{args} --format csv --output {}",
        path.display()
    )));
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), csv);

    let missing_dir = dir.path().join("absent").join("report.json");
    assert_eq!(
        exit_code(&format!("{args} --output {}", missing_dir.display())),
        1
    );
}

#[test]
fn empty_report_renders_as_a_header_only_csv() {
    let report = Report {
        schema_version: SCHEMA_VERSION,
        version: "v0.0.0",
        command: "threshold",
        config: Value::Null,
        summary: Value::Null,
        table: Table::new(&["name", "margin", "log_margin"]),
        runtime_seconds: None,
    };
    assert_eq!(
        emit_table(&report, Format::Csv).unwrap(),
        "name,margin,log_margin\n"
    );
}

#[test]
fn threads_flag_and_environment_fallback() {
    let args = "fourier --n 4 --trials 8 --seed 16";
    let one = ok_stdout(&format!("{args} --threads 1"));
    let four = ok_stdout(&format!("{args} --threads 4"));
    assert_eq!(one, four);
    let env = Command::new(env!("CARGO_BIN_EXE_permix"))
        .args(split(args))
        .env("PERMIX_THREADS", "3")
        .output()
        .unwrap();
    assert!(env.status.success());
    assert_eq!(String::from_utf8(env.stdout).unwrap(), one);
    assert_eq!(exit_code(&format!("{args} --threads 0")), 2);
}
