//! End-to-end checks of the `offload` binary: exit codes, output shapes, and
//! the gen -> solve round trip.

use std::io::Write;
use std::process::{Command, Output};

fn offload(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_offload"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

#[test]
fn help_and_version_exit_zero() {
    for args in [
        &["--help"][..],
        &["--version"][..],
        &["solve", "--help"][..],
    ] {
        let out = offload(args);
        assert_eq!(out.status.code(), Some(0), "args {args:?}");
    }
    assert!(stdout(&offload(&["--help"])).contains("bench"));
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["--no-such-flag"][..],
        &["frobnicate"][..],
        &["prob", "--mu", "1.0"][..], // gamma and xi missing
        &["gen", "--l-max", "zero"][..],
    ] {
        let out = offload(args);
        assert_eq!(out.status.code(), Some(1), "args {args:?}");
    }
}

#[test]
fn bad_parameter_values_exit_one() {
    let out = offload(&["prob", "--mu", "-1", "--gamma", "1", "--xi", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error"));
}

#[test]
fn unreadable_or_malformed_input_exits_two() {
    let out = offload(&["solve", "/no/such/file.json", "--algorithm", "rma"]);
    assert_eq!(out.status.code(), Some(2));

    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(b"{ not json").unwrap();
    let out = offload(&["solve", file.path().to_str().unwrap(), "--algorithm", "rma"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("error"));
}

#[test]
fn prob_reports_closed_form_and_simulation() {
    let out = offload(&[
        "prob", "--mu", "1", "--gamma", "1", "--xi", "1", "--n-h", "2", "--trials", "20000",
        "--seed", "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let closed: f64 = text
        .lines()
        .find(|l| l.starts_with("closed_form"))
        .and_then(|l| l.split_whitespace().nth(1))
        .unwrap()
        .parse()
        .unwrap();
    assert!((closed - 5.0 / 9.0).abs() < 1e-12);
    let mc: f64 = text
        .lines()
        .find(|l| l.starts_with("monte_carlo"))
        .and_then(|l| l.split_whitespace().nth(1))
        .unwrap()
        .parse()
        .unwrap();
    assert!((mc - closed).abs() < 0.02);

    // same seed, same estimate
    let again = offload(&[
        "prob", "--mu", "1", "--gamma", "1", "--xi", "1", "--n-h", "2", "--trials", "20000",
        "--seed", "7",
    ]);
    assert_eq!(stdout(&again), text);
}

#[test]
fn gen_writes_a_parseable_instance() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst.json");
    let out = offload(&[
        "gen",
        "--r",
        "8",
        "--h",
        "3",
        "--seed",
        "42",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let inst = offload_core::Instance::from_json(&text).unwrap();
    assert_eq!(inst.r(), 8);
    assert_eq!(inst.h(), 3);

    // stdout and file forms agree
    let piped = offload(&["gen", "--r", "8", "--h", "3", "--seed", "42"]);
    assert_eq!(stdout(&piped), text);
}

fn parse_objective(text: &str) -> f64 {
    text.lines()
        .find(|l| l.starts_with("objective"))
        .and_then(|l| l.split_whitespace().nth(1))
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn solve_round_trips_a_generated_instance() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst.json");
    offload(&[
        "gen",
        "--r",
        "10",
        "--h",
        "4",
        "--seed",
        "5",
        "--out",
        path.to_str().unwrap(),
    ]);
    let path = path.to_str().unwrap();

    for algo in ["rma", "mcsa", "ga"] {
        let out = offload(&["solve", path, "--algorithm", algo, "--seed", "3"]);
        assert_eq!(out.status.code(), Some(0), "algorithm {algo}");
        let text = stdout(&out);
        let objective = parse_objective(&text);
        assert!(objective.is_finite() && objective >= 0.0);
        // the assignment line is a JSON array of r entries
        let assignment = text
            .lines()
            .find(|l| l.starts_with("assignment"))
            .map(|l| l.trim_start_matches("assignment").trim())
            .unwrap();
        let parsed: Vec<Option<usize>> = serde_json::from_str(assignment).unwrap();
        assert_eq!(parsed.len(), 10);
    }
}

#[test]
fn warm_started_search_never_loses_to_its_seed() {
    // the dp warm start needs a uniform instance
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("uniform.json");
    offload(&[
        "gen",
        "--r",
        "12",
        "--h",
        "4",
        "--uniform",
        "--seed",
        "5",
        "--out",
        path.to_str().unwrap(),
    ]);
    let path = path.to_str().unwrap();

    let tsdp = parse_objective(&stdout(&offload(&["solve", path, "--algorithm", "tsdp"])));
    let out = offload(&["solve", path, "--algorithm", "rma-tsdp"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(parse_objective(&stdout(&out)) >= tsdp - 1e-12);
}

#[test]
fn pooled_algorithms_reject_general_instances() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("general.json");
    offload(&[
        "gen",
        "--r",
        "6",
        "--h",
        "3",
        "--seed",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    for algo in ["tsdp", "upper-bound"] {
        let out = offload(&["solve", path.to_str().unwrap(), "--algorithm", algo]);
        assert_eq!(out.status.code(), Some(1), "algorithm {algo}");
        assert!(stderr(&out).contains("uniform"));
    }

    // on a uniform instance both run, and the bound dominates the heuristic
    let upath = dir.path().join("uniform.json");
    offload(&[
        "gen",
        "--r",
        "6",
        "--h",
        "3",
        "--uniform",
        "--seed",
        "1",
        "--out",
        upath.to_str().unwrap(),
    ]);
    let mut values = Vec::new();
    for algo in ["tsdp", "upper-bound"] {
        let out = offload(&["solve", upath.to_str().unwrap(), "--algorithm", algo]);
        assert_eq!(out.status.code(), Some(0), "algorithm {algo}");
        let objective: f64 = stdout(&out)
            .lines()
            .find(|l| l.starts_with("objective"))
            .and_then(|l| l.split_whitespace().nth(1))
            .unwrap()
            .parse()
            .unwrap();
        values.push(objective);
    }
    assert!(values[0] <= values[1] + 1e-12);
}

#[test]
fn bench_emits_the_documented_csv_schema() {
    let out = offload(&[
        "bench",
        "--r",
        "6",
        "--h",
        "3",
        "--uniform",
        "--sweep",
        "h",
        "--values",
        "2,3",
        "--reps",
        "2",
        "--algorithms",
        "tsdp,upper_bound",
        "--zero-timings",
        "--seed",
        "9",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "sweep_var,sweep_value,seed,algorithm,objective,wall_ms,instance_digest"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2 * 2 * 2); // points x reps x algorithms
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 7);
        assert_eq!(fields[0], "h");
        assert!(fields[4].parse::<f64>().is_ok());
        assert_eq!(fields[5], "0"); // timings zeroed
        assert_eq!(fields[6].len(), 16);
    }
}

#[test]
fn bench_rejects_unknown_names() {
    let out = offload(&[
        "bench",
        "--sweep",
        "h",
        "--values",
        "2,3",
        "--algorithms",
        "simulated-annealing",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn validate_reports_gap_statistics() {
    let out = offload(&[
        "validate", "--tuples", "4", "--trials", "5000", "--seed", "11",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.lines().next().unwrap().starts_with("mu gamma xi"));
    assert_eq!(text.lines().count(), 4 + 2); // header + tuples + summary
    assert!(text.lines().last().unwrap().starts_with("median_gap"));
}
