use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rossbylab_cli::output::{emit_report, Summary};
use tempfile::TempDir;

fn rossbylab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rossbylab")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn spectrum_is_deterministic_and_passes() {
    let tmp = TempDir::new().unwrap();
    let a = rossbylab(&["spectrum", "-o", "a"], tmp.path());
    let b = rossbylab(&["spectrum", "-o", "b"], tmp.path());
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(b.status.code(), Some(0));
    let ca = fs::read(tmp.path().join("a/spectrum.csv")).unwrap();
    let cb = fs::read(tmp.path().join("b/spectrum.csv")).unwrap();
    assert_eq!(ca, cb);
    let header = String::from_utf8_lossy(&ca).lines().next().unwrap().to_string();
    assert_eq!(header, "xi2,k,omega,lambda1,lambda3,gap,residual,identity_err");
    assert_eq!(summary(&tmp.path().join("a"))["status"], "pass");
}

#[test]
fn single_eps_limit_marks_fits_as_insufficient() {
    let tmp = TempDir::new().unwrap();
    let cfg = "subcommand = \"limit\"\n[grid]\nnx = 16\nny = 16\nnz = 4\nlength = 25.0\n[regime]\neps = [0.5]\n[experiment]\nhorizon = 0.02\noutputs = 2\n";
    fs::write(tmp.path().join("limit.toml"), cfg).unwrap();
    let out = rossbylab(&["--config", "limit.toml", "-o", "run"], tmp.path());
    assert!(matches!(out.status.code(), Some(0) | Some(2)), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(&tmp.path().join("run"));
    assert_eq!(s["metrics"]["density_exponent"], "insufficient data");
    assert!(s["criteria"].get("singular_limit.density_rate").is_none());
    let csv = fs::read_to_string(tmp.path().join("run/limit.csv")).unwrap();
    assert!(csv.starts_with("t,eps,delta,Eeps,energy,mass,dens_dev\n"));
    assert_eq!(csv.lines().count(), 1 + 3);
    assert!(!tmp.path().join("run/limit.csv.partial").exists());
}

#[test]
fn regime_violation_is_a_hard_error() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("bad.toml"), "subcommand = \"qg\"\n[regime]\nm = 2\nn = 1\n").unwrap();
    let out = rossbylab(&["--config", "bad.toml"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("m/2 > n"), "{err}");
}

#[test]
fn report_merges_and_fails_on_any_red_criterion() {
    let tmp = TempDir::new().unwrap();
    let mut good = Summary::for_subcommand("spectrum");
    good.criterion("eigen_structure", true, "ok");
    emit_report(&tmp.path().join("out/spectrum"), &good).unwrap();
    let mut bad = Summary::for_subcommand("qg");
    bad.criterion("energy", false, "drift");
    emit_report(&tmp.path().join("out/qg"), &bad).unwrap();
    let out = rossbylab(&["report", "-o", "out/report"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let s = summary(&tmp.path().join("out/report"));
    assert_eq!(s["status"], "fail");
    assert_eq!(s["criteria"]["spectrum.eigen_structure"]["passed"], true);
    assert_eq!(s["criteria"]["qg.energy"]["passed"], false);
}

#[test]
fn empty_report_is_a_valid_document() {
    let tmp = TempDir::new().unwrap();
    let out = rossbylab(&["report", "-o", "only/report"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let s = summary(&tmp.path().join("only/report"));
    assert_eq!(s["schema_version"], 1);
    assert!(s["criteria"].as_object().unwrap().is_empty());
}

#[test]
fn thread_cap_must_be_positive() {
    let tmp = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_rossbylab"))
        .args(["spectrum", "-o", "x"])
        .env("ROSSBYLAB_THREADS", "0")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let ok = Command::new(env!("CARGO_BIN_EXE_rossbylab"))
        .args(["spectrum", "-o", "y"])
        .env("ROSSBYLAB_THREADS", "2")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn printed_config_parses_back() {
    let tmp = TempDir::new().unwrap();
    let out = rossbylab(&["decay", "--print-config"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let cfg = rossbylab_cli::parse_config(&text).unwrap();
    assert_eq!(cfg, rossbylab_cli::RunConfig::defaults(rossbylab_cli::Subcommand::Decay));
}
