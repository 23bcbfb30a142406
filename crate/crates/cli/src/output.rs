use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use qsct_core::protocol::{ConformanceReport, TimeMapping};
use qsct_core::TransferRecord;

pub const RESULTS_HEADER: &str =
    "step,time,ccnr,ccnr_amplified_margin,concurrence,transfer_probability,fidelity_to_input,gamma_ok";

pub const FIRST_LAST_HEADER: &str = "step,time,ccnr,ccnr_amplified_margin,concurrence";

/// 17 significant digits round-trip every `f64`.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn records_csv(records: &[TransferRecord]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.step,
            real(r.time),
            real(r.ccnr),
            real(r.ccnr_amplified_margin),
            real(r.concurrence),
            real(r.transfer_probability),
            real(r.fidelity_to_input),
            r.gamma_ok
        );
    }
    out
}

pub fn first_last_csv(records: &[TransferRecord]) -> Option<String> {
    if records.iter().all(|r| r.first_last.is_none()) {
        return None;
    }
    let mut out = String::from(FIRST_LAST_HEADER);
    out.push('\n');
    for r in records {
        if let Some(fl) = &r.first_last {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.step,
                real(r.time),
                real(fl.ccnr_value),
                real(fl.amplified_margin),
                real(fl.concurrence)
            );
        }
    }
    Some(out)
}

pub const CONFORMANCE_HEADER: &str = "d,alpha,beta,gamma,a,closed_form,purity_a_eq_t,concurrence_a_eq_t,\
purity_a_eq_2t,concurrence_a_eq_2t,dev_purity_a_eq_t,dev_concurrence_a_eq_t,dev_purity_a_eq_2t,dev_concurrence_a_eq_2t";

pub fn conformance_csv(report: &ConformanceReport) -> String {
    let mut out = String::from(CONFORMANCE_HEADER);
    out.push('\n');
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.d,
            real(r.alpha),
            real(r.beta),
            real(r.gamma),
            real(r.a),
            real(r.closed_form),
            real(r.purity[0]),
            real(r.concurrence[0]),
            real(r.purity[1]),
            real(r.concurrence[1]),
            real(r.purity_deviation(0)),
            real(r.concurrence_deviation(0)),
            real(r.purity_deviation(1)),
            real(r.concurrence_deviation(1)),
        );
    }
    out
}

fn mapping_text(m: TimeMapping) -> &'static str {
    m.label()
}

pub fn conformance_markdown(report: &ConformanceReport) -> String {
    let mut md = String::new();
    let _ = writeln!(md, "# Closed-form conformance\n");
    let _ = writeln!(md, "Two-node closed forms against simulated `tr ρ_A²` and `√(2(1 − tr ρ_A²))`.");
    let _ = writeln!(md, "Deviations are reported, not judged.\n");
    let _ = writeln!(md, "## Anchors\n");
    let _ = writeln!(md, "- max |closed form(a=0) − 1|: {:.3e}", report.anchor_closed_form);
    let _ = writeln!(md, "- max numeric concurrence at a=0: {:.3e}", report.anchor_concurrence);
    let _ = writeln!(md, "- max |qutrit form(γ=0) − qubit form|: {:.3e}\n", report.gamma_zero_slice);

    let _ = writeln!(md, "## Maximum deviation by time mapping\n");
    let _ = writeln!(md, "| d | mapping | quantity | max deviation |");
    let _ = writeln!(md, "|---|---|---|---|");
    for dev in &report.deviations {
        let _ = writeln!(
            md,
            "| {} | {} | {} | {:.6e} |",
            dev.d,
            mapping_text(dev.mapping),
            dev.quantity,
            dev.max_deviation
        );
    }
    let _ = writeln!(md);
    for b in &report.best_fit {
        let verdict = if b.max_deviation <= 1e-9 {
            "agrees with"
        } else {
            "does not reproduce any candidate; closest is"
        };
        let _ = writeln!(
            md,
            "d={}: the closed form {verdict} {} under {} (max deviation {:.3e}).",
            b.d,
            b.quantity,
            mapping_text(b.mapping),
            b.max_deviation
        );
    }

    for h in &report.harmonics {
        let _ = writeln!(md, "\n## Harmonics of tr ρ_A², four qutrits, first {} node(s) in A\n", h.cut);
        let residuals: Vec<String> = h
            .residuals
            .iter()
            .map(|(m, r)| format!("{} → {:.3e}", mapping_text(*m), r))
            .collect();
        let _ = writeln!(md, "Fit residual by mapping: {}.", residuals.join(", "));
        let _ = writeln!(md, "Chosen mapping: {}.", mapping_text(h.mapping));
        let _ = writeln!(
            md,
            "Σ c_h = {:.15}, value at a=0 = {:.15}, |c_10|/max|c_h| = {:.3e}{}\n",
            h.coefficient_sum,
            h.value_at_zero,
            h.c10_relative,
            if h.c10_relative > 1e-6 { " (**c_10 present**)" } else { " (c_10 absent)" }
        );
        let _ = writeln!(md, "| h | c_h (fitted set) | c_h (all 0..12) | note |");
        let _ = writeln!(md, "|---|---|---|---|");
        for harmonic in 0..=12u32 {
            let fitted = h
                .fit
                .coefficient(harmonic)
                .map(|c| format!("{c:.6e}"))
                .unwrap_or_else(|| "-".into());
            let full = h.full_fit.coefficient(harmonic).unwrap_or(0.0);
            let note = if harmonic == 10 { "c_10" } else { "" };
            let _ = writeln!(md, "| {harmonic} | {fitted} | {full:.6e} | {note} |");
        }
    }
    md
}

/// Writes every file or none: staged as temporaries first, renamed at the end.
pub fn write_all_atomic(dir: &Path, files: &[(String, Vec<u8>)]) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut staged = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let tmp = dir.join(format!(".{name}.tmp"));
        let written = fs::File::create(&tmp).and_then(|mut f| {
            f.write_all(contents)?;
            f.sync_all()
        });
        if let Err(e) = written {
            let _ = fs::remove_file(&tmp);
            for (t, _) in &staged {
                let _ = fs::remove_file(t);
            }
            return Err(e);
        }
        staged.push((tmp, dir.join(name)));
    }
    let mut out = Vec::with_capacity(staged.len());
    for (tmp, target) in staged {
        fs::rename(&tmp, &target)?;
        out.push(target);
    }
    Ok(out)
}

pub const PLOT_SCRIPT: &str = r#"#!/usr/bin/env python3
"""Plots results.csv (and reference.csv when present) from a qsct run directory."""
import csv
import sys
from pathlib import Path

import matplotlib.pyplot as plt


def load(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {k: [float(r[k]) for r in rows] for k in rows[0] if k != "gamma_ok"}


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else ".")
    res = load(out / "results.csv")
    ref_path = out / "reference.csv"
    ref = load(ref_path) if ref_path.exists() else None

    fig, axes = plt.subplots(1, 3, figsize=(14, 4))
    for ax, key in zip(axes, ["concurrence", "ccnr", "fidelity_to_input"]):
        ax.plot(res["time"], res[key], "o-", label="run")
        if ref:
            ax.plot(ref["time"], ref[key], "--", label="noiseless")
        ax.set_xlabel("t")
        ax.set_title(key)
        ax.legend()
    fig.tight_layout()
    fig.savefig(out / "results.png", dpi=150)


if __name__ == "__main__":
    main()
"#;
