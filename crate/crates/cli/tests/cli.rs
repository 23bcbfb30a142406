use std::path::Path;
use std::process::{Command, Output};

const QSCT: &str = env!("CARGO_BIN_EXE_qsct");

const NOISELESS: &str = r#"{
  "chain": {"d": 3, "nodes": 2},
  "input_amplitudes": [[0.5773502691896258, 0], [0.5773502691896258, 0], [0.5773502691896258, 0]]
}"#;

const NOISY: &str = r#"{
  "chain": {"d": 3, "nodes": 2},
  "input_amplitudes": [[0.5773502691896258, 0], [0.5773502691896258, 0], [0.5773502691896258, 0]],
  "noise": {"channel": "phase_damping", "p": 0.85, "topology": "interleaved"},
  "monte_carlo_samples": 500
}"#;

fn qsct(args: &[&str]) -> Output {
    Command::new(QSCT).args(args).env_remove("QSCT_SEED").output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

fn run(config: &str, out: &Path) -> Output {
    qsct(&["run", "--config", config, "--out", out.to_str().unwrap()])
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn noiseless_run_writes_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", NOISELESS);
    let out = dir.path().join("out");
    let res = run(&cfg, &out);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let rows = csv_rows(&out.join("results.csv"));
    assert_eq!(
        rows[0].join(","),
        "step,time,ccnr,ccnr_amplified_margin,concurrence,transfer_probability,fidelity_to_input,gamma_ok"
    );
    assert_eq!(rows.len(), 1 + 17);
    // At least 15 significant digits in every real field.
    let mantissa = rows[5][1].split('e').next().unwrap().replace(['.', '-'], "");
    assert!(mantissa.len() >= 15);
    assert!(out.join("manifest.json").exists());
    assert!(!out.join("reference.csv").exists());
}

#[test]
fn unnormalized_amplitudes_exit_2_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"chain": {"d": 3, "nodes": 2}, "input_amplitudes": [[1, 0], [1, 0], [0, 0]]}"#,
    );
    let out = dir.path().join("out");
    let res = run(&cfg, &out);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("input_amplitudes"));
    assert!(!out.exists(), "no output on failure");
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"chain": {"d": 3}"#);
    assert_eq!(run(&cfg, &dir.path().join("o")).status.code(), Some(2));
    let cfg = write_config(dir.path(), "d.json", r#"{"chain": {"d": 3, "nodes": 2}, "input_amplitudes": [], "extra": 1}"#);
    assert_eq!(run(&cfg, &dir.path().join("o")).status.code(), Some(2));
    assert_eq!(run("/nonexistent/config.json", &dir.path().join("o")).status.code(), Some(2));
}

#[test]
fn noisy_run_flags_gamma_violations() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", NOISY);
    let out = dir.path().join("out");
    assert_eq!(run(&cfg, &out).status.code(), Some(0));
    let rows = csv_rows(&out.join("results.csv"));
    assert!(rows[1..].iter().any(|r| r[7] == "false"));
    let reference = csv_rows(&out.join("reference.csv"));
    assert!(reference[1..].iter().all(|r| r[7] == "true"));

    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    let fid = &manifest["fidelity"];
    assert!(fid["average_fidelity"].as_f64().unwrap() > 0.0);
    assert_eq!(fid["monte_carlo"]["samples"].as_u64(), Some(500));
    assert_eq!(manifest["output_paths"].as_array().unwrap().len(), 3);
}

#[test]
fn digest_ignores_whitespace() {
    let dir = tempfile::tempdir().unwrap();
    let compact: String = NOISELESS.split_whitespace().collect();
    let a = write_config(dir.path(), "a.json", NOISELESS);
    let b = write_config(dir.path(), "b.json", &compact);
    let (oa, ob) = (dir.path().join("oa"), dir.path().join("ob"));
    assert_eq!(run(&a, &oa).status.code(), Some(0));
    assert_eq!(run(&b, &ob).status.code(), Some(0));
    let digest = |p: &Path| {
        let m: serde_json::Value = serde_json::from_slice(&std::fs::read(p.join("manifest.json")).unwrap()).unwrap();
        m["config_digest"].as_str().unwrap().to_string()
    };
    assert_eq!(digest(&oa), digest(&ob));
    assert_eq!(digest(&oa).len(), 64);
}

#[test]
fn seed_override_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", NOISY);
    let out = dir.path().join("out");
    let res = Command::new(QSCT)
        .args(["run", "--config", &cfg, "--out", out.to_str().unwrap()])
        .env("QSCT_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(0));
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["monte_carlo_seed"].as_u64(), Some(42));

    let bad = Command::new(QSCT)
        .args(["run", "--config", &cfg, "--out", out.to_str().unwrap()])
        .env("QSCT_SEED", "abc")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn jobs_and_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", NOISY);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run(&cfg, &a).status.code(), Some(0));
    let res = qsct(&["run", "--config", &cfg, "--out", b.to_str().unwrap(), "--jobs", "4", "--plot-script"]);
    assert_eq!(res.status.code(), Some(0));
    assert_eq!(std::fs::read(a.join("results.csv")).unwrap(), std::fs::read(b.join("results.csv")).unwrap());
    assert!(std::fs::read_to_string(b.join("plot_results.py")).unwrap().contains("results.csv"));
}

#[test]
fn longer_chains_write_first_last_pair() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"chain": {"d": 2, "nodes": 4}, "input_amplitudes": [[0.6, 0], [0, 0.8]], "steps": 8, "bipartition": {"cut": 2}}"#,
    );
    let out = dir.path().join("out");
    assert_eq!(run(&cfg, &out).status.code(), Some(0));
    assert_eq!(csv_rows(&out.join("first_last.csv")).len(), 10);
}

#[test]
fn pst_prints_transfer_time() {
    let res = qsct(&["pst", "--d", "2", "--nodes", "2"]);
    assert_eq!(res.status.code(), Some(0));
    let text = String::from_utf8(res.stdout).unwrap();
    let line = text.lines().find(|l| l.starts_with("t*")).unwrap();
    let t: f64 = line.split('=').nth(1).unwrap().trim().parse().unwrap();
    assert!((t - std::f64::consts::PI).abs() < 1e-10);
    assert!(line.split('=').nth(1).unwrap().trim().len() >= 12);

    let res = qsct(&["pst", "--d", "3", "--nodes", "4"]);
    let text = String::from_utf8(res.stdout).unwrap();
    let amp: f64 = text
        .lines()
        .find(|l| l.starts_with("amplitude"))
        .and_then(|l| l.split('=').nth(1))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(amp >= 1.0 - 1e-6);

    assert_eq!(qsct(&["pst", "--d", "3", "--nodes", "1"]).status.code(), Some(2));
}

#[test]
fn conformance_outputs_are_stable() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(qsct(&["conformance", "--out", a.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(qsct(&["conformance", "--out", b.to_str().unwrap()]).status.code(), Some(0));
    for name in ["conformance.csv", "conformance.md"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap());
    }

    let rows = csv_rows(&a.join("conformance.csv"));
    assert!(rows.len() > 1);
    let a_col = rows[0].iter().position(|h| h == "a").unwrap();
    let dev_col = rows[0].iter().position(|h| h == "dev_purity_a_eq_t").unwrap();
    let cf_col = rows[0].iter().position(|h| h == "closed_form").unwrap();
    for r in rows[1..].iter().filter(|r| r[a_col].parse::<f64>().unwrap() == 0.0) {
        assert!(r[dev_col].parse::<f64>().unwrap() <= 1e-12);
        assert!((r[cf_col].parse::<f64>().unwrap() - 1.0).abs() <= 1e-12);
    }

    let md = std::fs::read_to_string(a.join("conformance.md")).unwrap();
    for h in 0..=12 {
        assert!(md.contains(&format!("\n| {h} |")), "harmonic {h} missing");
    }
    assert!(md.contains("c_10"));
}
