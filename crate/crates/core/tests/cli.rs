use std::path::Path;
use std::process::{Command, Output};

const STACKED: &str = r#"{"particles":[{"nodes":[[0,0]]},{"nodes":[[0,1]]}]}"#;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amoebot-le")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn gen_is_deterministic() {
    let args = ["gen", "--n", "12", "--expanded-frac", "0.3", "--hole-bias", "0.5", "--seed", "4"];
    let a = bin(&args);
    let b = bin(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let parsed = amoebot_le::Configuration::parse(&stdout(&a)).unwrap();
    assert_eq!(parsed.len(), 12);
}

#[test]
fn gen_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let o = bin(&["gen", "--n", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(out).unwrap().starts_with("{\"particles\""));
}

#[test]
fn run_verify_and_check_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", STACKED);
    let trace = dir.path().join("t.jsonl");
    let trace = trace.to_str().unwrap();
    let o = bin(&["run", "--config", &cfg, "--strategy", "round-robin", "--verify", "--trace-out", trace]);
    let text = stdout(&o);
    assert!(o.status.success(), "{text}");
    assert!(text.contains("steps: 2"));
    assert!(text.contains("leaders: 1"));
    assert!(text.contains("verify: passed"));

    let o = bin(&["check", "--trace", trace]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("check: passed"));

    let tampered = std::fs::read_to_string(trace).unwrap().replace("\"C1\"", "\"C2\"");
    let bad = write(dir.path(), "bad.jsonl", &tampered);
    assert_eq!(bin(&["check", "--trace", &bad]).status.code(), Some(1));
}

#[test]
fn scripted_run_with_invalid_pid_fails_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", STACKED);
    let o = bin(&["run", "--config", &cfg, "--strategy", "scripted:1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not activable"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(bin(&["mc", "--n", "9"]).status.code(), Some(2));
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(bin(&["run", "--config", "/nonexistent.json"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", STACKED);
    assert_eq!(bin(&["run", "--config", &cfg, "--strategy", "sideways"]).status.code(), Some(2));
    let bad = write(dir.path(), "bad.json", r#"{"particles":[{"nodes":[[0,0],[2,0]]}]}"#);
    assert_eq!(bin(&["render", "--config", &bad]).status.code(), Some(2));
}

#[test]
fn mc_single_instance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", STACKED);
    let o = bin(&["mc", "--config", &cfg]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("summary:"));
    let o = bin(&["mc", "--config", &cfg, "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["summary"]["instances"], 1);
    assert_eq!(v["instances"][0]["states"], 3);
}

#[test]
fn mc_reports_cycle_as_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"particles":[{"nodes":[[0,0]]},{"nodes":[[1,0],[2,0]]}]}"#);
    let o = bin(&["mc", "--config", &cfg, "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["instances"][0]["acyclic"], false);
}

#[test]
fn render_formats() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", STACKED);
    let o = bin(&["render", "--config", &cfg]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("activable: 0:C1"));
    let o = bin(&["render", "--config", &cfg, "--format", "svg", "--no-boundaries"]);
    assert!(stdout(&o).starts_with("<svg"));
    assert_eq!(bin(&["render", "--config", &cfg, "--format", "png"]).status.code(), Some(2));
}

#[test]
fn run_reads_stdin() {
    use std::io::Write;
    let mut child = Command::new(env!("CARGO_BIN_EXE_amoebot-le"))
        .args(["run", "--config", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(STACKED.as_bytes()).unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(o.status.success());
    assert!(stdout(&o).contains("stop: Terminal"));
}
