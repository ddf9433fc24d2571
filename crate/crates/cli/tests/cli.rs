use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qpball(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpball"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn text(o: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
}

fn write(dir: &Path, name: &str, body: &str) {
    fs::write(dir.join(name), body).unwrap();
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const Z1: &str = r#"{"kind":"polynomial","n":2,"terms":[{"alpha":[1,0],"re":1.0,"im":0.0}]}"#;
const ONE: &str = r#"{"kind":"polynomial","n":2,"terms":[{"alpha":[0,0],"re":1.0,"im":0.0}]}"#;

// keeps estimator runs at a few seconds
const SMALL_SEARCH: &str = r#""search":{"radii":[0.0,0.5,0.8,0.9],"direction_m":2,"refinement_rounds":1}"#;

#[test]
fn version_names_schema() {
    let d = tempfile::tempdir().unwrap();
    let o = qpball(&["--version"], d.path());
    assert_eq!(code(&o), 0);
    assert!(text(&o).contains("config schema 1"));
}

#[test]
fn validate_reports_p_below_range() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "c.json", r#"{"scenario":"cover-demo","n":2,"p":0.4,"seed":1}"#);
    let o = qpball(&["validate", "c.json"], d.path());
    assert_eq!(code(&o), 2);
    let t = text(&o);
    assert!(t.contains("(n-1)/n = 0.5") && t.contains("only the constant functions"), "{t}");
}

#[test]
fn validate_reports_p_above_q() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "g.json", Z1);
    write(d.path(), "c.json", r#"{"scenario":"op-probe","p":1.0,"q":0.9,"seed":1,"symbol":"g.json"}"#);
    let o = qpball(&["validate", "c.json"], d.path());
    assert_eq!(code(&o), 2);
    assert!(text(&o).contains("p <= q"));
}

#[test]
fn validate_accepts_valid_config() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "g.json", Z1);
    write(d.path(), "c.json", r#"{"scenario":"op-certify","p":1.0,"q":1.0,"seed":1,"symbol":"g.json"}"#);
    let o = qpball(&["validate", "c.json"], d.path());
    assert_eq!(code(&o), 0, "{}", text(&o));
    assert!(!text(&o).contains("violation:"));
}

#[test]
fn parse_error_names_line() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "c.json", "{\n  \"scenario\": \"qpnorm\",\n  \"seed\": oops\n}");
    let o = qpball(&["validate", "c.json"], d.path());
    assert_eq!(code(&o), 2);
    assert!(text(&o).contains("line 3"), "{}", text(&o));
}

#[test]
fn run_rejects_p_range_before_computing() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "f.json", Z1);
    let o = qpball(&["qpnorm", "--function", "f.json", "--p", "2.5", "--out", "out"], d.path());
    assert_eq!(code(&o), 2);
    assert!(!d.path().join("out").exists());
}

#[test]
fn identity_suite_defaults_are_exact() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "c.json", r#"{"scenario":"identity-suite","seed":3}"#);
    let o = qpball(&["run", "c.json"], d.path());
    assert_eq!(code(&o), 0, "{}", text(&o));
    let r = report(&d.path().join("out/identity_suite_report.json"));
    for dim in r["report"].as_array().unwrap() {
        for res in dim["residuals"].as_array().unwrap() {
            assert_eq!(res["max_residual"].as_f64(), Some(0.0));
            assert_eq!(res["failures"].as_u64(), Some(0));
        }
    }
}

#[test]
fn failed_contract_exits_4() {
    let d = tempfile::tempdir().unwrap();
    // a zero tolerance on the quadrature path cannot be met
    write(
        d.path(),
        "c.json",
        r#"{"scenario":"identity-suite","seed":3,"identities":{"pairs":3,"quadrature_tolerance":0.0}}"#,
    );
    let o = qpball(&["run", "c.json"], d.path());
    assert_eq!(code(&o), 4, "{}", text(&o));
    let r = report(&d.path().join("out/identity_suite_report.json"));
    assert!(r["contract_violations"].as_array().is_some_and(|v| !v.is_empty()));
}

#[test]
fn unconverged_estimate_exits_3() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "f.json", Z1);
    let cfg = format!(
        r#"{{"scenario":"qpnorm","p":1.0,"seed":2,"samples":200,"function":"f.json",
            "qpnorm":{{{SMALL_SEARCH},"convergence":{{"rel_stderr":1e-6,"abs_floor":0.0}}}}}}"#
    );
    write(d.path(), "c.json", &cfg);
    let o = qpball(&["run", "c.json"], d.path());
    assert_eq!(code(&o), 3, "{}", text(&o));
    let m = report(&d.path().join("out/manifest.json"));
    assert_eq!(m["exit_code"].as_i64(), Some(3));
}

#[test]
fn constant_function_has_zero_seminorm() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "f.json", ONE);
    let cfg = format!(r#"{{"scenario":"qpnorm","p":1.0,"seed":2,"samples":2000,"function":"f.json","qpnorm":{{{SMALL_SEARCH}}}}}"#);
    write(d.path(), "c.json", &cfg);
    let o = qpball(&["run", "c.json"], d.path());
    assert_eq!(code(&o), 0, "{}", text(&o));
    let r = report(&d.path().join("out/qpnorm_report.json"));
    assert_eq!(r["report"]["seminorm"].as_f64(), Some(0.0));
    assert_eq!(r["report"]["full_norm"].as_f64(), Some(1.0));
}

#[test]
fn measure_symbol_paths_resolve() {
    let d = tempfile::tempdir().unwrap();
    fs::create_dir(d.path().join("m")).unwrap();
    write(&d.path().join("m"), "g.json", Z1);
    write(&d.path().join("m"), "mu.json", r#"{"kind":"mu_qg","g":"g.json","q":1.0}"#);
    let o = qpball(
        &["carleson", "--measure", "m/mu.json", "--mode", "vanishing", "--q", "1", "--samples", "500", "--out", "car"],
        d.path(),
    );
    assert_eq!(code(&o), 0, "{}", text(&o));
    let csv = fs::read_to_string(d.path().join("car/delta_profile.csv")).unwrap();
    assert!(csv.starts_with("delta,sup_ratio,stderr,manifest"));
    let r = report(&d.path().join("car/carleson_report.json"));
    assert_eq!(r["report"]["vanishing_verdict"].as_str(), Some("vanishing"));
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "f.json", Z1);
    for (out, threads) in [("a", "1"), ("b", "3")] {
        let o = qpball(
            &["qpnorm", "--function", "f.json", "--p", "1", "--samples", "3000", "--seed", "5", "--threads", threads, "--out", out],
            d.path(),
        );
        assert_eq!(code(&o), 0, "{}", text(&o));
    }
    let a = fs::read(d.path().join("a/qpnorm_report.json")).unwrap();
    let b = fs::read(d.path().join("b/qpnorm_report.json")).unwrap();
    assert_eq!(a, b);
    let ca = fs::read(d.path().join("a/qpnorm_profile.csv")).unwrap();
    assert_eq!(ca, fs::read(d.path().join("b/qpnorm_profile.csv")).unwrap());
    let (ma, mb) = (report(&d.path().join("a/manifest.json")), report(&d.path().join("b/manifest.json")));
    assert_eq!(ma["config_hash"], mb["config_hash"]);
}

#[test]
fn lg_probe_with_unit_symbol_is_a_non_compact_witness() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "g.json", ONE);
    let o = qpball(
        &[
            "op", "--kind", "lg", "--symbol", "g.json", "--p", "1.0", "--q", "1.0", "--mode", "probe", "--xi", "[1,0],[0,0]",
            "--deltas", "0.4,0.2,0.1", "--samples", "20000", "--out", "probe/report.json",
        ],
        d.path(),
    );
    assert_eq!(code(&o), 0, "{}", text(&o));
    let r = report(&d.path().join("probe/report.json"));
    assert_eq!(r["report"]["verdict"].as_str(), Some("non-compact-witness"));
    let csv = fs::read_to_string(d.path().join("probe/sequence.csv")).unwrap();
    assert!(csv.starts_with("j,delta,qp_norm_fj,qq_norm_opfj,stderr"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn cover_demo_covers() {
    let d = tempfile::tempdir().unwrap();
    let o = qpball(&["cover", "--n", "2", "--delta", "0.5", "--m", "2", "--out", "cov"], d.path());
    assert_eq!(code(&o), 0, "{}", text(&o));
    let r = report(&d.path().join("cov/cover_demo_report.json"));
    assert_eq!(r["report"]["coverage_fraction"].as_f64(), Some(1.0));
}

#[test]
fn shipped_scenario_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let body = fs::read_to_string(&path).unwrap();
        if !body.contains("\"scenario\"") {
            continue;
        }
        let o = qpball(&["validate", path.to_str().unwrap()], &dir);
        assert_eq!(code(&o), 0, "{}: {}", path.display(), text(&o));
        seen += 1;
    }
    assert!(seen >= 6);
}
