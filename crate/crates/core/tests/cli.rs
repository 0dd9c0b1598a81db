use std::fs;
use std::process::Command;

use cardguess::cli::{
    run_captured, COMPARE_HEADER, EXIT_CAPACITY, EXIT_INVALID, EXIT_OK, SINGLE_HEADER,
};

fn run(args: &[&str]) -> (i32, String) {
    let (code, out) = run_captured(std::iter::once("cardguess").chain(args.iter().copied()));
    (code, String::from_utf8(out).unwrap())
}

fn golden(name: &str) -> String {
    fs::read_to_string(format!(
        "{}/tests/golden/{name}",
        env!("CARGO_MANIFEST_DIR")
    ))
    .unwrap()
}

#[test]
fn golden_outputs() {
    let cases: [(&str, &[&str]); 5] = [
        (
            "exact.csv",
            &[
                "exact",
                "--n",
                "2,3",
                "--m",
                "2",
                "--rational",
                "--method",
                "both",
            ],
        ),
        ("asympt.csv", &["asympt", "--n", "2..3", "--m", "4"]),
        (
            "simulate.csv",
            &[
                "simulate", "--n", "3", "--m", "3", "--reps", "5000", "--seed", "11",
            ],
        ),
        (
            "compare.csv",
            &[
                "compare",
                "--n",
                "2,40",
                "--m",
                "2,3",
                "--reps",
                "2000",
                "--seed",
                "7",
                "--state-cap",
                "100",
            ],
        ),
        (
            "compare.jsonl",
            &[
                "compare", "--n", "2", "--m", "2", "--reps", "2000", "--seed", "7", "--format",
                "json",
            ],
        ),
    ];
    for (file, args) in cases {
        let (code, out) = run(args);
        assert_eq!(code, EXIT_OK, "{file}");
        assert_eq!(out, golden(file), "{file}");
    }
}

#[test]
fn headers_are_stable() {
    for sub in ["simulate", "exact", "indep", "asympt", "markov"] {
        let (code, out) = run(&[sub, "--n", "3", "--m", "2"]);
        assert_eq!(code, EXIT_OK, "{sub}");
        assert_eq!(
            out.lines().next().unwrap(),
            SINGLE_HEADER.join(","),
            "{sub}"
        );
    }
    let (_, out) = run(&["compare", "--n", "3", "--m", "2", "--reps", "100"]);
    assert_eq!(out.lines().next().unwrap(), COMPARE_HEADER.join(","));
    assert_eq!(
        COMPARE_HEADER.join(","),
        "n,m,s_exact,s_mc,s_mc_stderr,s_tilde,dg,ho,main,admissible"
    );
}

#[test]
fn reruns_and_worker_counts_give_identical_bytes() {
    let base = [
        "simulate", "--n", "4..6", "--m", "3,5", "--reps", "30000", "--seed", "99",
    ];
    let (_, first) = run(&[&base[..], &["--workers", "1"]].concat());
    for workers in ["1", "3", "8"] {
        let (_, again) = run(&[&base[..], &["--workers", workers]].concat());
        assert_eq!(first, again, "workers={workers}");
    }
    let cmp = [
        "compare", "--n", "2..5", "--m", "2..4", "--reps", "3000", "--seed", "5",
    ];
    let (_, first) = run(&[&cmp[..], &["--workers", "1"]].concat());
    let (_, again) = run(&[&cmp[..], &["--workers", "6"]].concat());
    assert_eq!(first, again);
    assert_eq!(first.lines().count(), 1 + 4 * 3);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["simulate", "--reps", "1"]).0, EXIT_INVALID);
    assert_eq!(run(&["simulate", "--n", "0"]).0, EXIT_INVALID);
    assert_eq!(run(&["simulate", "--n", "5..2"]).0, EXIT_INVALID);
    assert_eq!(run(&["simulate", "--strategy", "psychic"]).0, EXIT_INVALID);
    assert_eq!(
        run(&["indep", "--mode", "quadrature", "--grid-size", "8"]).0,
        EXIT_INVALID
    );
    assert_eq!(run(&["exact", "--n", "30", "--m", "30"]).0, EXIT_CAPACITY);
    assert_eq!(
        run(&["indep", "--n", "2000", "--m", "1000"]).0,
        EXIT_CAPACITY
    );
}

#[test]
fn capacity_failures_leave_compare_cells_empty() {
    let (code, out) = run(&["compare", "--n", "30", "--m", "30", "--reps", "0"]);
    assert_eq!(code, EXIT_OK);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[2], "");
    assert_eq!(row[3], "");
    assert!(row[5].parse::<f64>().unwrap() > 30.0);
}

#[test]
fn json_rows_mirror_csv_fields() {
    let (_, out) = run(&["exact", "--n", "2..4", "--m", "1", "--format", "json"]);
    let rows: Vec<serde_json::Value> = out
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 3);
    for row in &rows {
        let keys: Vec<&str> = row
            .as_object()
            .unwrap()
            .keys()
            .map(String::as_str)
            .collect();
        assert_eq!(keys, SINGLE_HEADER);
        assert!(row["stderr"].is_null());
    }
    assert_eq!(rows[0]["value"], 1.5);
}

#[test]
fn profiles_are_exported() {
    let dir = tempfile::tempdir().unwrap();
    let exact_path = dir.path().join("exact.csv");
    let indep_path = dir.path().join("indep.csv");
    let (code, _) = run(&[
        "exact",
        "--n",
        "2",
        "--m",
        "2",
        "--profile",
        exact_path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let text = fs::read_to_string(&exact_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,p,emax,emax_over_t");
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[4], "4,1,2,0.5");
    let (code, _) = run(&[
        "indep",
        "--n",
        "3",
        "--m",
        "4",
        "--profile",
        indep_path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let text = fs::read_to_string(&indep_path).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,p,emax_indep,term");
    assert_eq!(text.lines().count(), 13);
    assert_eq!(
        run(&[
            "exact",
            "--n",
            "2,3",
            "--profile",
            exact_path.to_str().unwrap()
        ])
        .0,
        EXIT_INVALID
    );
}

#[test]
fn binary_writes_output_file_and_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let bin = env!("CARGO_BIN_EXE_cardguess");
    let status = Command::new(bin)
        .args(["exact", "--n", "2", "--m", "2", "--rational", "--output"])
        .arg(&path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert_eq!(
        fs::read_to_string(&path).unwrap(),
        "n,m,method,value,stderr,reps,seed\n2,2,dp,17/6,,,\n"
    );
    let status = Command::new(bin)
        .args(["exact", "--n", "40", "--m", "40"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
    let status = Command::new(bin)
        .args(["simulate", "--reps", "0"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let status = Command::new(bin)
        .args(["simulate", "--n", "3", "--m", "3", "--reps", "100"])
        .env("CARDGUESS_WORKERS", "2")
        .output()
        .unwrap();
    assert!(status.status.success());
}
