use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_levy-harmonic"))
}

fn run_with(dir: &Path, config: &str, extra: &[&str], env: &[(&str, &str)]) -> (Output, std::path::PathBuf) {
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join("out.dat");
    let mut cmd = bin();
    cmd.arg("--config").arg(&cfg).arg("--out").arg(&out).args(extra);
    for (k, v) in env {
        cmd.env(k, v);
    }
    (cmd.output().unwrap(), out)
}

const H0: &str = r#"
task = "h0"
[process]
kind = "stable"
alpha = 1.5
c_theta = 1.0
beta = 0.5
[grid]
x = [-2.0, -1.0, 1.0, 2.0]
"#;

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines().skip(1);
    let head: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = head.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(i).unwrap().to_string()).collect()
}

#[test]
fn h0_rows_match_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run_with(dir.path(), H0, &[], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out).unwrap();
    assert!(csv.starts_with("# levy-harmonic v0.1.0, task=h0, process=stable("));
    let errs = column(&csv, "rel_err");
    assert_eq!(errs.len(), 4);
    assert!(errs.iter().all(|e| e.parse::<f64>().unwrap() <= 1e-6));
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let (_, out) = run_with(dir.path(), H0, &[], &[("LEVY_HARMONIC_THREADS", "1")]);
    let a = std::fs::read(&out).unwrap();
    let (_, out) = run_with(dir.path(), H0, &[], &[("LEVY_HARMONIC_THREADS", "4")]);
    let b = std::fs::read(&out).unwrap();
    assert_eq!(a, b);
}

#[test]
fn malformed_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    for cfg in ["task = \"h0\"\n[process\n", "task = \"h0\"\n[process]\nkind = \"stable\"\nalpha = 7.0\n[grid]\nx = [1.0]\n"] {
        let (o, out) = run_with(dir.path(), cfg, &[], &[]);
        assert_eq!(o.status.code(), Some(2));
        assert!(!out.exists());
    }
    let (o, out) = run_with(dir.path(), H0, &[], &[("LEVY_HARMONIC_THREADS", "zero")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    let o = bin().arg("--config").arg(dir.path().join("missing.toml")).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().arg("--bogus").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stable_constants_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "task = \"stable-constants\"\n[process]\nkind = \"stable\"\nalpha = 1.5\n";
    let (o, out) = run_with(dir.path(), cfg, &["--format", "json"], &[]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["header"]["task"], "stable-constants");
    let c_r = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["quantity"] == "c_r")
        .unwrap()["value"]
        .as_f64()
        .unwrap();
    assert!((c_r - 0.769_800_3).abs() < 1e-7);
}

#[test]
fn task_override_and_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, H0.replace("[grid]", "[grid]\nq = [1.0]")).unwrap();
    let o = bin().arg("--config").arg(&cfg).args(["--task", "resolvent"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let s = String::from_utf8(o.stdout).unwrap();
    assert!(s.contains("task=resolvent"));
    assert_eq!(s.lines().count(), 2 + 4);
}

#[test]
fn non_convergence_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{H0}\n[quadrature]\nmax_subdivisions = 1\n");
    let (o, out) = run_with(dir.path(), &cfg, &[], &[]);
    assert_eq!(o.status.code(), Some(3));
    let csv = std::fs::read_to_string(out).unwrap();
    assert!(column(&csv, "converged").iter().any(|c| c == "false"));
}

#[test]
fn failing_condition_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "task = \"check-conditions\"\n[process]\nkind = \"brownian\"\nv = 1.0\n";
    let (o, out) = run_with(dir.path(), cfg, &[], &[]);
    assert_eq!(o.status.code(), Some(1));
    let csv = std::fs::read_to_string(out).unwrap();
    let verdicts = column(&csv, "note");
    let ids = column(&csv, "quantity");
    let l3 = ids.iter().position(|q| q == "L3").unwrap();
    assert_eq!(verdicts[l3], "fails");
}

#[test]
fn verify_harmonic_brownian() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "task = \"verify-harmonic\"\n[process]\nkind = \"brownian\"\nv = 0.5\n[grid]\nq = [1.0]\nx = [0.0, 1.0]\n";
    let (o, out) = run_with(dir.path(), cfg, &[], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out).unwrap();
    assert!(column(&csv, "residual").iter().all(|r| r.parse::<f64>().unwrap() <= 1e-6));
}

#[test]
fn tempered_triplet_h0() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "task = \"h0\"\n[process]\nkind = \"triplet\"\nnu_plus = { c = 0.5, alpha = 1.5 }\nnu_minus = { c = 0.5, alpha = 1.5, rate = 1.0 }\n[grid]\nx = [-1.0, 1.0]\n";
    let (o, out) = run_with(dir.path(), cfg, &[], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out).unwrap();
    let v: Vec<f64> = column(&csv, "value").iter().map(|s| s.parse().unwrap()).collect();
    // more upward jump mass: the process drifts up, so h0 is larger above 0
    assert!(v.iter().all(|h| *h > 0.0) && v[1] > v[0]);
}
