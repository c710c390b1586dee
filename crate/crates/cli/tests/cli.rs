//! End-to-end tests of the `probounds` binary: the worked examples
//! driven through the real CLI surface, plus exit-code and CSV checks.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn testdata(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("testdata").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_probounds"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

/// Split one CSV line, honoring double-quoted fields.
fn csv_fields(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut field = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if quoted && chars.peek() == Some(&'"') => {
                chars.next();
                field.push('"');
            }
            '"' => quoted = !quoted,
            ',' if !quoted => fields.push(std::mem::take(&mut field)),
            c => field.push(c),
        }
    }
    fields.push(field);
    fields
}

/// Parse CSV text into event -> (lower, upper) fraction strings.
fn parse_csv(csv: &str) -> HashMap<String, (String, String)> {
    let mut lines = csv.lines();
    let header = lines.next().expect("header");
    assert!(
        header.starts_with("event,lower_num,lower_den,upper_num,upper_den,lower_dec,upper_dec"),
        "unexpected header: {header}"
    );
    lines
        .map(|line| {
            let fields = csv_fields(line);
            (
                fields[0].clone(),
                (
                    format!("{}/{}", fields[1], fields[2]),
                    format!("{}/{}", fields[3], fields[4]),
                ),
            )
        })
        .collect()
}

#[test]
fn analyze_sum_with_external_tables() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("sum.csv");
    let output = run(&[
        "analyze",
        "--config",
        testdata("sum.json").to_str().unwrap(),
        "--csv",
        csv_path.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let rows = parse_csv(&std::fs::read_to_string(&csv_path).unwrap());
    // combined sign + termination bounds over all sixteen events
    let expected = [
        ("empty", "0/1", "0/1"),
        ("bot", "0/1", "1/3"),
        ("neg", "0/1", "1/3"),
        ("{0}", "1/4", "2/3"),
        ("pos", "0/1", "5/12"),
        ("bot|neg", "1/3", "1/3"),
        ("bot|{0}", "1/4", "1/1"),
        ("bot|pos", "0/1", "3/4"),
        ("neg|{0}", "1/4", "1/1"),
        ("neg|pos", "0/1", "3/4"),
        ("{0}|pos", "2/3", "2/3"),
        ("S-pos", "7/12", "1/1"),
        ("S-{0}", "1/3", "3/4"),
        ("S-neg", "2/3", "1/1"),
        ("S-bot", "2/3", "1/1"),
        ("S", "1/1", "1/1"),
    ];
    for (event, lower, upper) in expected {
        assert_eq!(
            rows[event],
            (lower.to_string(), upper.to_string()),
            "bounds for {event}"
        );
    }
}

#[test]
fn analyze_f_grid_with_termination_facts() {
    let output = run(&[
        "analyze",
        "--config",
        testdata("f.json").to_str().unwrap(),
        "--oracle",
        "none",
        "--csv",
        "-",
    ]);
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let text = stdout(&output);
    let csv_start = text.find("event,lower_num").expect("csv on stdout");
    let rows = parse_csv(&text[csv_start..]);
    // combined with all-cells-terminate facts: lower 5/10000, upper 7/1000
    assert_eq!(rows["[-4,-3]"], ("1/2000".to_string(), "7/1000".to_string()));
    assert_eq!(rows["[3,4]"], ("1/2000".to_string(), "7/1000".to_string()));
    assert_eq!(rows["[-1,0]"], ("49/400".to_string(), "93/200".to_string()));
}

#[test]
fn analyze_f_interval_only_has_zero_lower() {
    let output = run(&[
        "analyze",
        "--config",
        testdata("f_interval_only.json").to_str().unwrap(),
        "--csv",
        "-",
    ]);
    assert!(output.status.success());
    let text = stdout(&output);
    let csv_start = text.find("event,lower_num").expect("csv on stdout");
    let rows = parse_csv(&text[csv_start..]);
    assert_eq!(rows["[-4,-3]"], ("0/1".to_string(), "7/1000".to_string()));
}

#[test]
fn compare_g_emits_both_uppers() {
    let output = run(&["compare", "--config", testdata("g.json").to_str().unwrap(), "--csv", "-"]);
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let text = stdout(&output);
    let csv_start = text.find("event,lower_num").unwrap();
    let csv = &text[csv_start..];
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert!(header.ends_with("monniaux_upper_num,monniaux_upper_den,monniaux_upper_dec"));
    let row = lines.next().unwrap();
    let fields = csv_fields(row);
    // forward upper 5/6; pair-propagation upper 1
    assert_eq!(&fields[3..5], &["5".to_string(), "6".to_string()]);
    assert_eq!(&fields[7..9], &["1".to_string(), "1".to_string()]);
}

#[test]
fn compare_rejects_loops() {
    let output = run(&[
        "compare",
        "--config",
        testdata("sum.json").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&output.stderr).contains("loops"));
}

#[test]
fn backward_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("backward.csv");
    let output = run(&[
        "backward",
        testdata("backward_pair.json").to_str().unwrap(),
        "--csv",
        csv_path.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let rows = parse_csv(&std::fs::read_to_string(&csv_path).unwrap());
    assert_eq!(rows["{}"], ("0/1".to_string(), "0/1".to_string()));
    assert_eq!(rows["{c}"], ("0/1".to_string(), "1/1".to_string()));
    assert_eq!(rows["{d}"], ("0/1".to_string(), "1/1".to_string()));
    assert_eq!(rows["{c,d}"], ("1/1".to_string(), "1/1".to_string()));
}

#[test]
fn backward_validation_failure_exits_3() {
    let output = run(&["backward", testdata("backward_invalid.json").to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&output.stderr).contains("over-approximation"));
}

#[test]
fn missing_config_exits_2() {
    let output = run(&["analyze", "--config", "/nonexistent/config.json"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn missing_program_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    std::fs::write(
        &config,
        r#"{
            "schema": 1,
            "program": "missing.imp",
            "partition": {
                "mode": "continuous-real",
                "domain": [ { "var": "a", "interval": "[0,1]" } ],
                "grid": { "a": 1 }
            },
            "events": [ { "set": "[0,1]" } ]
        }"#,
    )
    .unwrap();
    let output = run(&["analyze", "--config", config.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn exhaustive_oracle_checks_containment() {
    let output = run(&["analyze", "--config", testdata("sum_oracle.json").to_str().unwrap()]);
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
}

#[test]
fn csv_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run_once = |name: &str| {
        let csv_path = dir.path().join(name);
        let output = run(&[
            "analyze",
            "--config",
            testdata("g.json").to_str().unwrap(),
            "--csv",
            csv_path.to_str().unwrap(),
        ]);
        assert!(output.status.success());
        std::fs::read(&csv_path).unwrap()
    };
    assert_eq!(run_once("a.csv"), run_once("b.csv"));
}

#[test]
fn refine_tightens_g_bounds() {
    let coarse = run(&["analyze", "--config", testdata("g.json").to_str().unwrap(), "--csv", "-"]);
    let fine = run(&[
        "analyze",
        "--config",
        testdata("g.json").to_str().unwrap(),
        "--refine",
        "2",
        "--csv",
        "-",
    ]);
    assert!(coarse.status.success() && fine.status.success());
    let parse = |o: &Output| {
        let text = stdout(o);
        let csv_start = text.find("event,lower_num").unwrap();
        let line = text[csv_start..].lines().nth(1).unwrap().to_string();
        let fields = csv_fields(&line);
        let num: f64 = fields[3].parse().unwrap();
        let den: f64 = fields[4].parse().unwrap();
        num / den
    };
    assert!(parse(&fine) <= parse(&coarse));
}

#[test]
fn mc_oracle_appends_columns() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("ident.json");
    std::fs::copy(testdata("identity.imp"), dir.path().join("identity.imp")).unwrap();
    std::fs::write(
        &config,
        r#"{
            "schema": 1,
            "program": "identity.imp",
            "partition": {
                "mode": "continuous-real",
                "domain": [ { "var": "a", "interval": "[0,1]" } ],
                "grid": { "a": 4 }
            },
            "events": [ { "name": "low", "set": "[0,1/2]" } ]
        }"#,
    )
    .unwrap();
    let output = run(&[
        "analyze",
        "--config",
        config.to_str().unwrap(),
        "--oracle",
        "mc",
        "--samples",
        "20000",
        "--seed",
        "5",
        "--confidence",
        "0.99",
        "--csv",
        "-",
    ]);
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let text = stdout(&output);
    let csv_start = text.find("event,lower_num").unwrap();
    let csv = &text[csv_start..];
    let header = csv.lines().next().unwrap();
    assert!(header.ends_with(
        "oracle_estimate,oracle_ci_low,oracle_ci_high,oracle_samples,oracle_diverged_fraction"
    ));
    let fields = csv_fields(csv.lines().nth(1).unwrap());
    // bounds for [0,1/2] on a 4-cell grid of the identity: lower = upper = 1/2
    assert_eq!(&fields[1..5], ["1", "2", "1", "2"].map(String::from));
    let estimate: f64 = fields[7].parse().unwrap();
    assert!((estimate - 0.5).abs() < 0.02, "estimate {estimate} far from 1/2");
    assert_eq!(fields[10], "20000");
}

#[test]
fn containment_breach_exits_4() {
    // an external table that is simply wrong for the program: claims
    // the identity's output is always in [5,6]
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(testdata("identity.imp"), dir.path().join("identity.imp")).unwrap();
    std::fs::write(dir.path().join("wrong.tbl"), "0 ; [5,6] ; false\n").unwrap();
    let config = dir.path().join("wrong.json");
    std::fs::write(
        &config,
        r#"{
            "schema": 1,
            "program": "identity.imp",
            "partition": {
                "mode": "continuous-real",
                "domain": [ { "var": "a", "interval": "[0,1]" } ],
                "grid": { "a": 1 }
            },
            "tables": ["wrong.tbl"],
            "events": [ { "name": "unit", "set": "[0,1]" } ]
        }"#,
    )
    .unwrap();
    let output = run(&[
        "analyze",
        "--config",
        config.to_str().unwrap(),
        "--oracle",
        "mc",
        "--samples",
        "2000",
        "--seed",
        "1",
    ]);
    assert_eq!(output.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&output.stderr).contains("invariant violation"));
}

#[test]
fn oracle_subcommand_reports_exact_probabilities() {
    let output = run(&["oracle", "--config", testdata("sum_oracle.json").to_str().unwrap(), "--csv", "-"]);
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let text = stdout(&output);
    let csv_start = text.find("event,lower_num").unwrap();
    let rows = parse_csv(&text[csv_start..]);
    // exhaustive oracle: exact probability of {0} is 1/4 (zero-width row)
    assert_eq!(rows["{0}"], ("1/4".to_string(), "1/4".to_string()));
}

#[test]
fn schema_version_is_enforced() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("v2.json");
    std::fs::write(
        &config,
        r#"{ "schema": 2, "program": "x.imp",
             "partition": { "mode": "continuous-real", "domain": [], "grid": {} },
             "events": [] }"#,
    )
    .unwrap();
    let output = run(&["analyze", "--config", config.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("schema"));
}

#[test]
fn backward_with_empty_event_list_prints_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let instance = dir.path().join("empty_events.json");
    std::fs::write(
        &instance,
        r#"{
            "points": ["a", "b"],
            "blocks": [["a", "b"]],
            "weights": ["1"],
            "output_atoms": ["c", "d"],
            "pre_sharp": { "c": ["a", "b"], "d": ["b"] },
            "events": []
        }"#,
    )
    .unwrap();
    let output = run(&["backward", instance.to_str().unwrap(), "--csv", "-"]);
    assert!(output.status.success());
    let text = stdout(&output);
    let csv_start = text.find("event,lower_num").unwrap();
    let csv_lines: Vec<&str> = text[csv_start..].lines().collect();
    assert_eq!(csv_lines.len(), 1, "expected only the CSV header");
}

#[test]
fn compare_on_branch_free_program_gives_identical_columns() {
    let output = run(&[
        "compare",
        "--config",
        testdata("f_interval_only.json").to_str().unwrap(),
        "--csv",
        "-",
    ]);
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let text = stdout(&output);
    let csv_start = text.find("event,lower_num").unwrap();
    for line in text[csv_start..].lines().skip(1) {
        let fields = csv_fields(line);
        // forward upper (num, den) equals the pair-propagation upper
        assert_eq!(fields[3], fields[7], "numerators differ: {line}");
        assert_eq!(fields[4], fields[8], "denominators differ: {line}");
    }
}
