//! Command implementations behind the `qsct` binary.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 numerical failure.

pub mod output;

use std::io::Write;
use std::path::Path;

use chrono::{SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

use qsct_core::chain::{find_pst_time, ChainSpec, PstResult};
use qsct_core::protocol::{
    conformance_closed_forms, fidelity_summary, prepare, run_prepared, ConformanceGrid, ExperimentConfig,
    FidelitySummary,
};
use qsct_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable overriding the Monte Carlo seed.
pub const SEED_ENV: &str = "QSCT_SEED";

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config_digest: String,
    pub tool_version: String,
    pub started: String,
    pub finished: String,
    pub output_paths: Vec<String>,
    pub t_total: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pst: Option<PstResult>,
    pub monte_carlo_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<FidelitySummary>,
}

/// SHA-256 of the config with keys sorted and whitespace dropped.
pub fn config_digest(value: &serde_json::Value) -> String {
    let canonical = serde_json::to_string(value).expect("JSON values always serialize");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidParameter { .. } | Error::Unnormalized { .. } | Error::DimensionMismatch(_) | Error::IndexOutOfRange(_)
    )
}

/// Parses and validates a config file; errors are printed and mapped to exit code 2.
pub fn load_config(path: &Path, err: &mut dyn Write) -> Result<(ExperimentConfig, serde_json::Value), i32> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read config {}: {e}", path.display());
            return Err(EXIT_CONFIG);
        }
    };
    let value: serde_json::Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(e) => {
            let _ = writeln!(err, "error: config is not valid JSON: {e}");
            return Err(EXIT_CONFIG);
        }
    };
    let config: ExperimentConfig = match serde_json::from_value(value.clone()) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: config does not match the schema: {e}");
            return Err(EXIT_CONFIG);
        }
    };
    if let Err(e) = config.validate() {
        let _ = writeln!(err, "error: {e}");
        return Err(EXIT_CONFIG);
    }
    Ok((config, value))
}

fn seed_override(config_seed: u64, err: &mut dyn Write) -> Result<u64, i32> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s.trim().parse().map_err(|_| {
            let _ = writeln!(err, "error: {SEED_ENV}={s:?} is not an unsigned integer");
            EXIT_CONFIG
        }),
        Err(_) => Ok(config_seed),
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; above 1 the fidelity estimate runs beside the trajectory.
    pub jobs: usize,
    pub plot_script: bool,
}

/// `run --config <path> --out <dir>`.
pub fn cmd_run(config_path: &Path, out_dir: &Path, opts: &RunOptions, err: &mut dyn Write) -> i32 {
    let started = now();
    let (config, raw) = match load_config(config_path, err) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let seed = match seed_override(config.seed, err) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let prepared = match prepare(&config) {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return if is_input_error(&e) { EXIT_CONFIG } else { EXIT_NUMERICAL };
        }
    };

    let fidelity_job = || match &config.noise {
        Some(noise) => fidelity_summary(&prepared, noise, config.monte_carlo_samples, seed),
        None => Ok(None),
    };
    let (outcome, fidelity) = if opts.jobs > 1 {
        std::thread::scope(|s| {
            let f = s.spawn(fidelity_job);
            let o = run_prepared(&prepared, &config);
            (o, f.join().expect("fidelity worker panicked"))
        })
    } else {
        (run_prepared(&prepared, &config), fidelity_job())
    };
    let (outcome, fidelity) = match (outcome, fidelity) {
        (Ok(o), Ok(f)) => (o, f),
        (Err(e), _) | (_, Err(e)) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_NUMERICAL;
        }
    };

    let mut files: Vec<(String, Vec<u8>)> = vec![(
        "results.csv".into(),
        output::records_csv(&outcome.records).into_bytes(),
    )];
    if let Some(reference) = &outcome.reference {
        files.push(("reference.csv".into(), output::records_csv(reference).into_bytes()));
    }
    if let Some(fl) = output::first_last_csv(&outcome.records) {
        files.push(("first_last.csv".into(), fl.into_bytes()));
    }
    if opts.plot_script {
        files.push(("plot_results.py".into(), output::PLOT_SCRIPT.as_bytes().to_vec()));
    }
    let mut output_paths: Vec<String> = files
        .iter()
        .map(|(name, _)| out_dir.join(name).display().to_string())
        .collect();
    output_paths.push(out_dir.join("manifest.json").display().to_string());

    let manifest = RunManifest {
        config_digest: config_digest(&raw),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started,
        finished: now(),
        output_paths,
        t_total: outcome.t_total,
        pst: outcome.pst.clone(),
        monte_carlo_seed: seed,
        fidelity,
    };
    let manifest_json = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    files.push(("manifest.json".into(), manifest_json.into_bytes()));

    match output::write_all_atomic(out_dir, &files) {
        Ok(_) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: writing to {}: {e}", out_dir.display());
            EXIT_IO
        }
    }
}

/// `pst --d <d> --nodes <N> [--tmax <t>]`: prints the transfer time and amplitudes.
pub fn cmd_pst(d: usize, nodes: usize, t_max: Option<f64>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let spec = match ChainSpec::new(d, nodes) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let t_max = t_max.unwrap_or(2.0 * std::f64::consts::PI);
    let res = match find_pst_time(&spec, t_max, 2000) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return if is_input_error(&e) { EXIT_CONFIG } else { EXIT_NUMERICAL };
        }
    };
    let _ = writeln!(out, "d = {d}, nodes = {nodes}");
    let _ = writeln!(out, "t*        = {:.15}", res.time);
    let _ = writeln!(out, "amplitude = {:.15}", res.amplitude);
    let _ = writeln!(out, "level  amplitude");
    for (k, a) in res.level_amplitudes.iter().enumerate() {
        let _ = writeln!(out, "{:>5}  {:.15}", k + 1, a);
    }
    EXIT_OK
}

/// `conformance --out <dir>`: writes `conformance.csv` and `conformance.md`.
pub fn cmd_conformance(out_dir: &Path, err: &mut dyn Write) -> i32 {
    let report = match conformance_closed_forms(&ConformanceGrid::default()) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_NUMERICAL;
        }
    };
    let files = vec![
        ("conformance.csv".to_string(), output::conformance_csv(&report).into_bytes()),
        ("conformance.md".to_string(), output::conformance_markdown(&report).into_bytes()),
    ];
    match output::write_all_atomic(out_dir, &files) {
        Ok(_) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: writing to {}: {e}", out_dir.display());
            EXIT_IO
        }
    }
}
