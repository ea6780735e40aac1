use std::path::Path;
use std::process::{Command, Output};

fn frackpz(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frackpz"))
        .args(args)
        .current_dir(dir)
        .env_remove("FRACKPZ_OUT")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn unknown_key_reports_its_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "bad.cfg", "# header\nparams.q = 1.2\nparams.qq = 3\n");
    let out = frackpz(tmp.path(), &["--config", &cfg, "solve"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn invalid_parameter_exits_with_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "bad.cfg", "params.s = 0.4\n");
    let out = frackpz(tmp.path(), &["--config", &cfg, "info"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn bad_arguments_exit_with_code_one() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(frackpz(tmp.path(), &["verify", "nonsense"]).status.code(), Some(1));
    assert_eq!(frackpz(tmp.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn info_prints_routing() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", r#"{"params": {"dim": 2, "s": 0.75, "q": 1.5}}"#);
    let out = frackpz(tmp.path(), &["--config", &cfg, "info"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["scheme"], "schauder");
    assert_eq!(v["exponents"]["regime"], "CRITICAL");
}

#[test]
fn solve_writes_report_and_solution() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.cfg",
        "params.dim = 2\nparams.q = 1.3\nparams.lambda = 0.01\ngrid_n = 32\n",
    );
    let out = frackpz(tmp.path(), &["--config", &cfg, "--out", "res", "solve"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("res/report.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["converged"], true);
    let csv = std::fs::read_to_string(tmp.path().join("res/solution.csv")).unwrap();
    assert!(csv.starts_with("x,u,grad,residual\n"));
    assert_eq!(csv.lines().count(), 33);
}

#[test]
fn divergent_solve_exits_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.cfg",
        "params.dim = 2\nparams.q = 1.3\nparams.lambda = 500\ngrid_n = 32\n",
    );
    let out = frackpz(tmp.path(), &["--config", &cfg, "solve"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(tmp.path().join("out/report.json").exists());
}

#[test]
fn output_dir_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.cfg",
        "output_dir = \"from_config\"\nparams.dim = 2\nparams.q = 1.5\n",
    );
    assert_eq!(
        frackpz(tmp.path(), &["--config", &cfg, "verify", "bootstrap"])
            .status
            .code(),
        Some(0)
    );
    assert!(tmp.path().join("from_config/report.json").exists());
    let out = Command::new(env!("CARGO_BIN_EXE_frackpz"))
        .args(["--config", &cfg, "verify", "bootstrap"])
        .current_dir(tmp.path())
        .env("FRACKPZ_OUT", "from_env")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(tmp.path().join("from_env/report.json").exists());
}

#[test]
fn failing_verification_exits_with_code_three() {
    let tmp = tempfile::tempdir().unwrap();
    // A torsion barrier at this λ cannot absorb the gradient term.
    let cfg = write(
        tmp.path(),
        "c.cfg",
        "params.dim = 2\nparams.q = 1.3\nparams.lambda = 50\ngrid_n = 32\nsupersolution.family = \"torsion\"\n",
    );
    let out = frackpz(tmp.path(), &["--config", &cfg, "verify", "supersolution"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("out/residual.csv").exists());
}
