use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvqkd-rate")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const SWEEP: [&str; 11] =
    ["sweep", "--scheme", "hd", "--mode", "rr", "--d", "4", "--chi-preset", "local", "--eta", "1:0:0.05"];

#[test]
fn sweep_emits_one_row_per_eta() {
    let o = run(&SWEEP);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# cvqkd-rate v0.1.0, params scheme=hd mode=rr d=4"));
    assert_eq!(lines.next().unwrap(), "eta,alpha_opt,G_base_d,G_bits");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 21);
    assert_eq!(rows[0][0], 1.0);
    assert!((rows[0][3] - 2.0).abs() < 0.01);
    assert_eq!(rows[20], vec![0.0, 0.0, 0.0, 0.0]);
}

#[test]
fn output_is_reproducible() {
    let a = run(&SWEEP);
    let b = run(&[
        "--threads",
        "1",
        SWEEP[0],
        SWEEP[1],
        SWEEP[2],
        SWEEP[3],
        SWEEP[4],
        SWEEP[5],
        SWEEP[6],
        SWEEP[7],
        SWEEP[8],
        SWEEP[9],
        SWEEP[10],
    ]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn json_sweep_parses() {
    let o = run(&["sweep", "--d", "2", "--alpha", "1", "--eta", "1:0.5:0.25", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    assert!(v["failures"].as_array().unwrap().is_empty());
    assert_eq!(v["params"]["amplitude_policy"]["Fixed"], 1.0);
}

#[test]
fn point_breakdown() {
    let o = run(&["point", "--d", "2", "--alpha", "1", "--eta", "0.8"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let chi = text.lines().find(|l| l.starts_with("chi_DR,")).unwrap();
    let v: f64 = chi.split(',').nth(1).unwrap().parse().unwrap();
    let x = (-0.4f64).exp();
    let p = 0.5 * (1.0 + x);
    let h = -(p * p.log2() + (1.0 - p) * (1.0 - p).log2());
    assert!((v - h).abs() < 1e-6, "{v} vs {h}");
}

#[test]
fn compat_arguments_match_flags() {
    let compat = run(&["sweep", "--compat-legacy", "HD RR 4 0 0.25 0.01 10 0 0 2", "--eta", "0:0:1"]);
    let flags = run(&["sweep", "--mode", "rr", "--d", "4", "--alpha", "2", "--limit", "10", "--eta", "1:0:0.25"]);
    assert!(compat.status.success() && flags.status.success());
    let body = |o: &Output| stdout(o).lines().skip(1).map(String::from).collect::<Vec<_>>();
    assert_eq!(body(&compat), body(&flags));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["point", "--d", "1"]).status.code(), Some(2));
    assert_eq!(run(&["point", "--eta", "1.5"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["point", "--scheme", "dhd", "--squeeze", "0.3"]).status.code(), Some(2));
    assert_eq!(run(&["validate", "--samples", "20000"]).status.code(), Some(1));
}

#[test]
fn validate_reports_bands() {
    let o = run(&["validate"]);
    let text = stdout(&o);
    assert!(o.status.success(), "{text}");
    assert!(text.lines().nth(1).unwrap().starts_with("seed 20240601 samples 1000000"));
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS ")).count(), 3);
}
