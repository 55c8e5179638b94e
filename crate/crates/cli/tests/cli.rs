use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use heisenpaley::atoms::AtomSpec;
use heisenpaley::fourier::SpectralCoefficients;
use heisenpaley::paley::{PaleySweepReport, PROBE_LABEL};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str], config: Option<&str>, out: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_heisenpaley"));
    cmd.args(args).arg("--out").arg(out);
    if let Some(c) = config {
        cmd.arg("--config").arg(fixture(c));
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn zero_function_gives_all_zero_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["transform"], Some("zero.json"), dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("truncation tail estimate"));
    let text = read(dir.path(), "table.json");
    let t = SpectralCoefficients::from_json(&text).unwrap();
    assert_eq!(t.rows(), 32);
    assert!(t.values.iter().flatten().all(|v| v.norm() == 0.0));
}

#[test]
fn table_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["transform"], Some("gaussian_m1.json"), dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = read(dir.path(), "table.json");
    let t = SpectralCoefficients::from_json(&text).unwrap();
    assert_eq!(t.m_indices.len(), 3);
    assert_eq!(SpectralCoefficients::from_json(&t.to_json()).unwrap(), t);
    assert_eq!(t.to_json(), text);
}

#[test]
fn gaussian_oracle_line() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["transform", "--oracle"], Some("gaussian_m1.json"), dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let line = stdout(&o)
        .lines()
        .find(|l| l.starts_with("oracle max-abs-diff:"))
        .expect("oracle line")
        .to_string();
    let diff: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(diff < 1e-9, "{line}");
}

#[test]
fn oracle_needs_a_gaussian() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["transform", "--oracle"], Some("zero.json"), dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn oracle_with_zero_tolerance_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["transform", "--oracle", "--tol", "0"],
        Some("gaussian.json"),
        dir.path(),
    );
    assert_eq!(code(&o), 1);
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["transform", "check", "atom", "paley"] {
        let o = run(&[cmd], Some("malformed.json"), dir.path());
        assert_eq!(code(&o), 2, "{cmd}");
        assert!(stderr(&o).contains("configuration error"), "{}", stderr(&o));
    }
}

#[test]
fn unknown_keys_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["paley"], Some("unknown_key.json"), dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("`sigmaa`"), "{}", stderr(&o));
    let o = run(&["transform"], Some("unknown_nested_key.json"), dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("`width`"), "{}", stderr(&o));
}

#[test]
fn out_of_range_values_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["paley"], Some("bad_p.json"), dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("`p`"), "{}", stderr(&o));
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["transform"], None, dir.path())), 2);
    assert_eq!(code(&run(&["frobnicate"], Some("zero.json"), dir.path())), 2);
    assert_eq!(
        code(&run(&["check", "--tol", "-1"], Some("gaussian.json"), dir.path())),
        2
    );
    assert_eq!(code(&run(&["--help"], None, dir.path())), 0);
    let missing = run(&["transform", "--config", "/nonexistent/run.json"], None, dir.path());
    assert_eq!(code(&missing), 2);
}

#[test]
fn check_calibrated_gaussian() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["check"], Some("gaussian.json"), dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&read(dir.path(), "check.json")).unwrap();
    let ratio = report["plancherel"]["ratio"].as_f64().unwrap();
    assert!((ratio - 1.0).abs() < 1e-4);
    assert!(report["inversion_defect"].as_f64().unwrap() < 1e-3);
    assert_eq!(report["passed"], serde_json::Value::Bool(true));
}

#[test]
fn check_other_function() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["check"], Some("separable.json"), dir.path());
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
}

#[test]
fn check_with_zero_tolerance_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["check", "--tol", "0"], Some("gaussian.json"), dir.path());
    assert_eq!(code(&o), 1);
    assert!(dir.path().join("check.json").exists());
}

#[test]
fn check_zero_function_has_no_defect() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["check"], Some("zero.json"), dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&read(dir.path(), "check.json")).unwrap();
    assert_eq!(report["plancherel_defect"].as_f64(), Some(0.0));
    assert_eq!(report["inversion_defect"].as_f64(), Some(0.0));
}

#[test]
fn atom_is_written_and_reloads() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["atom", "--seed", "3"], Some("atom.json"), dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = read(dir.path(), "atom.json");
    let a = AtomSpec::from_json(&text).unwrap();
    assert_eq!(a.seed, 3);
    assert_eq!(a.radius, 2.0);
    assert_eq!(a.to_json(), text);
    let report: serde_json::Value = serde_json::from_str(&read(dir.path(), "atom_report.json")).unwrap();
    assert!(report["max_moment_residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn paley_lower_edge_is_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["paley"], Some("paley_lower_edge.json"), dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: PaleySweepReport = serde_json::from_str(&read(dir.path(), "paley.json")).unwrap();
    assert!(report.bounded);
    assert_eq!(report.label, None);
    let csv = read(dir.path(), "paley.csv");
    assert_eq!(csv.lines().next(), Some("p,sigma,n,R,gamma,S1,S2,LHS,bounded"));
    assert_eq!(csv.lines().count(), 10);
    let lhs = read(dir.path(), "lhs.dat");
    assert_eq!(lhs.lines().count(), 9);
    for line in lhs.lines().chain(read(dir.path(), "log_s2.dat").lines()) {
        let cols: Vec<f64> = line.split(' ').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 2);
        assert!(cols.iter().all(|c| c.is_finite()));
    }
}

/// The weighted integral of a dilated atom scales like `R^{2σ − Q(2−p)}`, so
/// away from the lower edge the sweep reports growth and the command fails.
#[test]
fn paley_interior_sigma_reports_growth() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["paley"], Some("paley_interior.json"), dir.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("not bounded"), "{}", stderr(&o));
    let report: PaleySweepReport = serde_json::from_str(&read(dir.path(), "paley.json")).unwrap();
    assert!((report.slopes.lhs.unwrap() - 0.5).abs() < 1e-9);
}

#[test]
fn paley_out_of_range_needs_probe() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["paley"], Some("paley_out_of_range.json"), dir.path());
    assert_eq!(code(&o), 2);
    assert!(!dir.path().join("paley.csv").exists());

    let o = run(&["paley", "--probe"], Some("paley_out_of_range.json"), dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains(PROBE_LABEL));
    let report: PaleySweepReport = serde_json::from_str(&read(dir.path(), "paley.json")).unwrap();
    assert_eq!(report.label.as_deref(), Some(PROBE_LABEL));
}

#[test]
fn paley_csv_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = run(&["paley", "--seed", "7"], Some("paley_lower_edge.json"), d.path());
        assert_eq!(code(&o), 0);
    }
    for f in ["paley.csv", "log_s1.dat", "log_s2.dat", "lhs.dat"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
}

#[test]
fn paley_auto_range_writes_one_set_per_sigma() {
    let dir = tempfile::tempdir().unwrap();
    run(&["paley"], Some("paley_auto.json"), dir.path());
    for i in 0..2 {
        for stem in ["paley", "log_s1", "log_s2", "lhs"] {
            let ext = if stem == "paley" { "csv" } else { "dat" };
            assert!(dir.path().join(format!("{stem}_{i}.{ext}")).exists(), "{stem}_{i}");
        }
        let r: PaleySweepReport = serde_json::from_str(&read(dir.path(), &format!("paley_{i}.json"))).unwrap();
        assert_eq!(r.rows.len(), 3);
        assert!(r.params.in_range());
    }
}
