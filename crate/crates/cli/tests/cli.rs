use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use poe_core::io::{instance_from_json, DecompositionFile, SolveReport};

fn poe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_poe")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("poe-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn generate(args: &[&str], file: &str) -> PathBuf {
    let path = scratch(file);
    let mut full = vec!["generate"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", path.to_str().unwrap()]);
    let out = poe(&full);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn solve_json(path: &Path, ps: &[&str]) -> SolveReport {
    let mut args = vec!["solve", path.to_str().unwrap()];
    for p in ps {
        args.extend_from_slice(&["--p", p]);
    }
    let out = poe(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    SolveReport::from_json(&stdout(&out)).unwrap()
}

#[test]
fn generate_lb_shape_and_stability() {
    let out = poe(&["generate", "lb", "--r", "3", "--W", "4"]);
    assert!(out.status.success());
    let (inst, name) = instance_from_json(&stdout(&out)).unwrap();
    assert_eq!((inst.n(), inst.m()), (7, 12));
    assert_eq!(name.as_deref(), Some("lb_r3_w4"));
    assert_eq!(stdout(&out), stdout(&poe(&["generate", "lb", "--r", "3", "--W", "4"])));
}

#[test]
fn generate_errors_are_usage_errors() {
    let out = poe(&["generate", "doubly", "--n", "4", "--m", "6", "--W", "3", "--Wc", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("edge counts differ"));
    assert_eq!(poe(&["generate", "lb", "--r", "3"]).status.code(), Some(1));
    assert_eq!(poe(&["solve", "--unknown"]).status.code(), Some(1));
    assert_eq!(poe(&["solve", "/nonexistent/file.json"]).status.code(), Some(1));
    assert_eq!(poe(&["--help"]).status.code(), Some(0));
}

#[test]
fn doubly_generation_is_seeded() {
    let a = poe(&["generate", "doubly", "--n", "6", "--m", "9", "--W", "3", "--Wc", "2", "--seed", "5"]);
    let b = poe(&["generate", "doubly", "--n", "6", "--m", "9", "--W", "3", "--Wc", "2", "--seed", "5"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn solve_reports_exact_poe() {
    let lb = generate(&["lb", "--r", "2", "--W", "2"], "lb22.json");
    let report = solve_json(&lb, &["1"]);
    assert_eq!(report.poe[0].value, "4/3");

    let e1 = generate(&["example1"], "e1.json");
    let report = solve_json(&e1, &["1", "nash"]);
    assert!(report.poe.iter().all(|e| e.value == "1" && e.exact));

    let sub = generate(&["submodular_lb", "--k", "4"], "sub4.json");
    let report = solve_json(&sub, &["1"]);
    assert!(report.poe[0].approx >= 4.0 / 3.0);
}

#[test]
fn solve_output_round_trips() {
    let path = generate(&["remark_3x4"], "remark.json");
    let text = stdout(&poe(&["solve", path.to_str().unwrap(), "--p", "-1/2", "--p", "-inf"]));
    assert_eq!(SolveReport::from_json(&text).unwrap().to_json(), text);
    let again = stdout(&poe(&["solve", path.to_str().unwrap(), "--p", "-1/2", "--p", "-inf"]));
    assert_eq!(text, again);
}

#[test]
fn solve_csv_has_version_line() {
    let lb = generate(&["lb", "--r", "2", "--W", "2"], "lb22csv.json");
    let out = stdout(&poe(&["solve", lb.to_str().unwrap(), "--p", "1", "--format", "csv"]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "# format_version=1");
    assert_eq!(lines[2], "1,1.33333333333,4/3,1.33333333333,1");
}

#[test]
fn bounds_table_rows() {
    let out = poe(&["bounds", "--r-max", "5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.lines().any(|l| l == "1,4,3,3,4"));
    let s3: f64 = 3.0;
    let upper = 2.0 * s3.powf(1.0 / 11.0);
    let row = text.lines().find(|l| l.starts_with("-10,4,")).unwrap();
    let cols: Vec<f64> = row.split(',').skip(3).map(|x| x.parse().unwrap()).collect();
    assert!((cols[0] - 2f64.powf(-0.1) * s3.powf(1.0 / 11.0)).abs() < 1e-9);
    assert!((cols[1] - upper).abs() < 1e-9);
    let extra = stdout(&poe(&["bounds", "--r-max", "3", "--p", "1/2"]));
    assert!(extra.lines().any(|l| l.starts_with("1/2,3,")));
}

#[test]
fn sweep_stays_within_bounds() {
    let out = poe(&["sweep", "--r-range", "2..6", "--p", "1", "--p", "nash", "--p", "-1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for line in text.lines().skip(2) {
        let cols: Vec<&str> = line.split(',').collect();
        let (poe, upper): (f64, f64) = (cols[4].parse().unwrap(), cols[7].parse().unwrap());
        assert!(poe <= upper + 1e-9, "{line}");
        if let Ok(lower) = cols[6].parse::<f64>() {
            assert!(poe >= lower - 1e-9, "{line}");
        }
        if cols[0] == "1" {
            assert_eq!(cols[4], cols[2], "{line}");
        }
    }
}

#[test]
fn doubly_lottery_round_trips() {
    let e1 = generate(&["example1"], "e1d.json");
    let text = stdout(&poe(&["doubly", e1.to_str().unwrap()]));
    let file = DecompositionFile::from_json(&text).unwrap();
    assert_eq!(file.to_json(), text);
    assert_eq!(file.to_lottery(4).unwrap().len(), file.weights.len());
    let csv = stdout(&poe(&["doubly", e1.to_str().unwrap(), "--format", "csv"]));
    assert!(csv.starts_with("# format_version=1\nagent,copy,g0"));
    let lb = generate(&["lb", "--r", "2", "--W", "2"], "lbd.json");
    assert_eq!(poe(&["doubly", lb.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn check_and_budget_refusal() {
    let lb = generate(&["lb", "--r", "2", "--W", "2"], "lbc.json");
    let out = poe(&["check", lb.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("\"mismatches\": []"));
    let out = poe(&["check", lb.to_str().unwrap(), "--budget", "10"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_passes_and_self_test_fails() {
    let out = poe(&["verify", "--cases", "20", "--doubly-cases", "20"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("7 of 7 gates passed"));
    let out = poe(&["verify", "--cases", "20", "--doubly-cases", "5", "--self-test"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("FAIL best EQ1 allocation"));
    let out = poe(&["verify", "--cases", "20", "--budget", "5"]);
    assert_eq!(out.status.code(), Some(3));
}
