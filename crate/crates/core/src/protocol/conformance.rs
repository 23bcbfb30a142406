//! Comparison of the printed two-node closed forms against full numerics,
//! and harmonic analysis of the four-node qutrit trace.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::{ChainSpec, Evolution, QuantumState};
use crate::entanglement::{
    closed_form_l2_d2, closed_form_l2_d3, fit_cosine_series, linear_entropy, subsystem_spectrum, CosineFit,
    Subsystem,
};
use crate::error::Result;
use crate::numerics::{Bipartition, ComplexMatrix};

/// Candidate relations between the formula variable `a` and propagator time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeMapping {
    /// `t = a`.
    AEqualsT,
    /// `a = 2t`, i.e. `t = a/2`.
    AEqualsTwoT,
    /// `a = t/2`, i.e. `t = 2a`.
    AEqualsHalfT,
}

impl TimeMapping {
    pub fn time(self, a: f64) -> f64 {
        match self {
            TimeMapping::AEqualsT => a,
            TimeMapping::AEqualsTwoT => 0.5 * a,
            TimeMapping::AEqualsHalfT => 2.0 * a,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TimeMapping::AEqualsT => "a=t",
            TimeMapping::AEqualsTwoT => "a=2t",
            TimeMapping::AEqualsHalfT => "a=t/2",
        }
    }
}

/// The two mappings compared for the two-node forms.
pub const TWO_NODE_MAPPINGS: [TimeMapping; 2] = [TimeMapping::AEqualsT, TimeMapping::AEqualsTwoT];

/// Mappings tried for the harmonic fit, in tie-break order.
pub const HARMONIC_MAPPINGS: [TimeMapping; 3] =
    [TimeMapping::AEqualsT, TimeMapping::AEqualsTwoT, TimeMapping::AEqualsHalfT];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformanceGrid {
    /// Number of `a` points on `[0, π]`.
    pub a_points: usize,
    /// Real non-negative `(α, β)` pairs for the qubit form.
    pub qubit_amplitudes: Vec<(f64, f64)>,
    /// Real non-negative `(α, β, γ)` triples for the qutrit form.
    pub qutrit_amplitudes: Vec<(f64, f64, f64)>,
    /// Samples of the four-node trace on `a ∈ [0, π]`.
    pub harmonic_samples: usize,
    /// Harmonics fitted to the four-node trace.
    pub harmonics: Vec<u32>,
}

impl Default for ConformanceGrid {
    fn default() -> Self {
        let qubit_amplitudes = (0..=4)
            .map(|k| {
                let th = k as f64 * PI / 8.0;
                (th.cos().abs(), th.sin().abs())
            })
            .collect();
        let s3 = 1.0 / 3f64.sqrt();
        let qutrit_amplitudes = vec![
            (1.0, 0.0, 0.0),
            (s3, s3, s3),
            (0.6, 0.8, 0.0),
            (0.5, 0.5, 0.5f64.sqrt()),
            (0.0, 0.6, 0.8),
        ];
        Self {
            a_points: 33,
            qubit_amplitudes,
            qutrit_amplitudes,
            harmonic_samples: 257,
            harmonics: vec![0, 2, 4, 6, 8, 10, 12],
        }
    }
}

/// One `(amplitudes, a)` grid point of a two-node chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormRow {
    pub d: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub a: f64,
    pub closed_form: f64,
    /// `tr ρ_A²` under `t = a` and `t = a/2`.
    pub purity: [f64; 2],
    /// `√(2(1 − tr ρ_A²))` under `t = a` and `t = a/2`.
    pub concurrence: [f64; 2],
}

impl ClosedFormRow {
    pub fn purity_deviation(&self, mapping: usize) -> f64 {
        (self.closed_form - self.purity[mapping]).abs()
    }

    pub fn concurrence_deviation(&self, mapping: usize) -> f64 {
        (self.closed_form - self.concurrence[mapping]).abs()
    }
}

/// Worst-case disagreement of a closed form with one numeric quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingDeviation {
    pub d: usize,
    pub mapping: TimeMapping,
    pub quantity: String,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicAnalysis {
    /// Number of leading nodes in subsystem `A`.
    pub cut: usize,
    /// Mapping with the smallest fit residual (earliest on ties).
    pub mapping: TimeMapping,
    /// Residual of the configured harmonic set under each tried mapping.
    pub residuals: Vec<(TimeMapping, f64)>,
    pub fit: CosineFit,
    /// Fit on every harmonic `0..=12` under the chosen mapping.
    pub full_fit: CosineFit,
    /// `|c_10| / max_h |c_h|` of the configured fit.
    pub c10_relative: f64,
    /// `Σ_h c_h`, the series at `a = 0`.
    pub coefficient_sum: f64,
    pub value_at_zero: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformanceReport {
    pub rows: Vec<ClosedFormRow>,
    pub deviations: Vec<MappingDeviation>,
    /// Best `(d, mapping, quantity)` by smallest maximum deviation, per `d`.
    pub best_fit: Vec<MappingDeviation>,
    /// `max |closed_form(a=0) − 1|` over the grid amplitudes.
    pub anchor_closed_form: f64,
    /// Largest numeric concurrence at `a = 0`.
    pub anchor_concurrence: f64,
    /// `max |qutrit form with γ=0 − qubit form|` over the grid.
    pub gamma_zero_slice: f64,
    /// Balanced cut first, then the first-node cut.
    pub harmonics: Vec<HarmonicAnalysis>,
}

impl ConformanceReport {
    pub fn harmonic_for_cut(&self, cut: usize) -> Option<&HarmonicAnalysis> {
        self.harmonics.iter().find(|h| h.cut == cut)
    }
}

/// `tr ρ_A²` of a pure chain state with the first `cut` nodes in `A`.
fn cut_purity(psi: &[Complex64], d: usize, nodes: usize, cut: usize) -> Result<f64> {
    let part = Bipartition::new(d.pow(cut as u32), d.pow((nodes - cut) as u32))?;
    let g = ComplexMatrix::new(psi.len(), 1, psi.to_vec())?;
    let spectrum = subsystem_spectrum(&g, part, Subsystem::A)?;
    Ok(1.0 - linear_entropy(&spectrum))
}

fn cut_concurrence(psi: &[Complex64], d: usize, nodes: usize, cut: usize) -> Result<f64> {
    let part = Bipartition::new(d.pow(cut as u32), d.pow((nodes - cut) as u32))?;
    let g = ComplexMatrix::new(psi.len(), 1, psi.to_vec())?;
    let spectrum = subsystem_spectrum(&g, part, Subsystem::A)?;
    Ok((2.0 * linear_entropy(&spectrum)).sqrt())
}

fn evolved(evo: &Evolution, initial: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
    evo.propagator(t).matvec(initial)
}

fn a_grid(points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![0.0];
    }
    (0..points).map(|i| PI * i as f64 / (points - 1) as f64).collect()
}

fn two_node_rows(d: usize, amplitudes: &[Vec<f64>], grid: &[f64]) -> Result<Vec<ClosedFormRow>> {
    let spec = ChainSpec::new(d, 2)?;
    let evo = Evolution::new(&spec)?;
    let mut rows = Vec::with_capacity(amplitudes.len() * grid.len());
    for amps in amplitudes {
        let input: Vec<Complex64> = amps.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let initial = match QuantumState::chain_input(&spec, &input)? {
            QuantumState::Pure { amplitudes, .. } => amplitudes,
            QuantumState::Mixed { .. } => unreachable!("chain input is pure"),
        };
        for &a in grid {
            let closed_form = if d == 2 {
                closed_form_l2_d2(amps[0], amps[1], a)?
            } else {
                closed_form_l2_d3(amps[0], amps[1], amps[2], a)?
            };
            let mut purity = [0.0; 2];
            let mut concurrence = [0.0; 2];
            for (m, mapping) in TWO_NODE_MAPPINGS.iter().enumerate() {
                let psi = evolved(&evo, &initial, mapping.time(a))?;
                purity[m] = cut_purity(&psi, d, 2, 1)?;
                concurrence[m] = cut_concurrence(&psi, d, 2, 1)?;
            }
            rows.push(ClosedFormRow {
                d,
                alpha: amps[0],
                beta: amps[1],
                gamma: amps.get(2).copied().unwrap_or(0.0),
                a,
                closed_form,
                purity,
                concurrence,
            });
        }
    }
    Ok(rows)
}

fn harmonic_analysis(cut: usize, samples: usize, harmonics: &[u32]) -> Result<HarmonicAnalysis> {
    let (d, nodes) = (3, 4);
    let spec = ChainSpec::new(d, nodes)?;
    let evo = Evolution::new(&spec)?;
    let plus = vec![Complex64::new(1.0 / 3f64.sqrt(), 0.0); 3];
    let initial = match QuantumState::chain_input(&spec, &plus)? {
        QuantumState::Pure { amplitudes, .. } => amplitudes,
        QuantumState::Mixed { .. } => unreachable!("chain input is pure"),
    };
    let grid = a_grid(samples);
    let trace_for = |mapping: TimeMapping| -> Result<Vec<(f64, f64)>> {
        grid.iter()
            .map(|&a| Ok((a, cut_purity(&evolved(&evo, &initial, mapping.time(a))?, d, nodes, cut)?)))
            .collect()
    };

    type Candidate = (TimeMapping, CosineFit, Vec<(f64, f64)>);
    let mut best: Option<Candidate> = None;
    let mut residuals = Vec::new();
    for mapping in HARMONIC_MAPPINGS {
        let trace = trace_for(mapping)?;
        let fit = fit_cosine_series(&trace, harmonics)?;
        residuals.push((mapping, fit.max_residual));
        let better = match &best {
            None => true,
            Some((_, b, _)) => fit.max_residual < b.max_residual - 1e-12,
        };
        if better {
            best = Some((mapping, fit, trace));
        }
    }
    let (mapping, fit, trace) = best.expect("at least one mapping");
    let all: Vec<u32> = (0..=12).collect();
    let full_fit = fit_cosine_series(&trace, &all)?;
    let peak = fit.max_abs_coefficient();
    let c10 = fit.coefficient(10).unwrap_or(0.0).abs();
    Ok(HarmonicAnalysis {
        cut,
        mapping,
        residuals,
        c10_relative: if peak > 0.0 { c10 / peak } else { 0.0 },
        coefficient_sum: fit.coefficients.iter().sum(),
        value_at_zero: trace[0].1,
        fit,
        full_fit,
    })
}

/// Evaluates the closed forms against numerics over `grid` and fits the
/// four-node qutrit trace. Deviations are reported, not judged.
pub fn conformance_closed_forms(grid: &ConformanceGrid) -> Result<ConformanceReport> {
    let a_values = a_grid(grid.a_points);
    let qubits: Vec<Vec<f64>> = grid.qubit_amplitudes.iter().map(|&(a, b)| vec![a, b]).collect();
    let qutrits: Vec<Vec<f64>> = grid.qutrit_amplitudes.iter().map(|&(a, b, c)| vec![a, b, c]).collect();
    let mut rows = two_node_rows(2, &qubits, &a_values)?;
    rows.extend(two_node_rows(3, &qutrits, &a_values)?);

    let mut deviations = Vec::new();
    for d in [2usize, 3] {
        for (m, mapping) in TWO_NODE_MAPPINGS.iter().enumerate() {
            let of_d = || rows.iter().filter(|r| r.d == d);
            deviations.push(MappingDeviation {
                d,
                mapping: *mapping,
                quantity: "purity".into(),
                max_deviation: of_d().map(|r| r.purity_deviation(m)).fold(0.0, f64::max),
            });
            deviations.push(MappingDeviation {
                d,
                mapping: *mapping,
                quantity: "concurrence".into(),
                max_deviation: of_d().map(|r| r.concurrence_deviation(m)).fold(0.0, f64::max),
            });
        }
    }
    let best_fit = [2usize, 3]
        .iter()
        .filter_map(|&d| {
            deviations
                .iter()
                .filter(|x| x.d == d)
                .fold(None::<&MappingDeviation>, |acc, x| match acc {
                    Some(b) if b.max_deviation <= x.max_deviation => Some(b),
                    _ => Some(x),
                })
                .cloned()
        })
        .collect();

    let anchors = rows.iter().filter(|r| r.a == 0.0);
    let anchor_closed_form = anchors.clone().map(|r| (r.closed_form - 1.0).abs()).fold(0.0, f64::max);
    let anchor_concurrence = anchors
        .flat_map(|r| r.concurrence.iter().copied())
        .fold(0.0, f64::max);

    let mut gamma_zero_slice: f64 = 0.0;
    for &(alpha, beta) in &grid.qubit_amplitudes {
        for &a in &a_values {
            let q = closed_form_l2_d2(alpha, beta, a)?;
            let t = closed_form_l2_d3(alpha, beta, 0.0, a)?;
            gamma_zero_slice = gamma_zero_slice.max((q - t).abs());
        }
    }

    let harmonics = vec![
        harmonic_analysis(2, grid.harmonic_samples, &grid.harmonics)?,
        harmonic_analysis(1, grid.harmonic_samples, &grid.harmonics)?,
    ];

    Ok(ConformanceReport {
        rows,
        deviations,
        best_fit,
        anchor_closed_form,
        anchor_concurrence,
        gamma_zero_slice,
        harmonics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> ConformanceGrid {
        ConformanceGrid {
            a_points: 9,
            harmonic_samples: 65,
            ..ConformanceGrid::default()
        }
    }

    #[test]
    fn anchors_hold() {
        let report = conformance_closed_forms(&small_grid()).unwrap();
        assert!(report.anchor_closed_form <= 1e-12);
        assert!(report.anchor_concurrence <= 1e-12);
        assert!(report.gamma_zero_slice <= 1e-12);
        for row in report.rows.iter().filter(|r| r.a == 0.0) {
            assert!(row.purity_deviation(0) <= 1e-12);
        }
    }

    #[test]
    fn balanced_cut_has_no_tenth_harmonic() {
        let report = conformance_closed_forms(&small_grid()).unwrap();
        let h = report.harmonic_for_cut(2).unwrap();
        assert!(h.c10_relative <= 1e-6, "{}", h.c10_relative);
        assert!(h.fit.max_residual <= 1e-8);
        assert!((h.coefficient_sum - h.value_at_zero).abs() < 1e-10);
        assert!((h.value_at_zero - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mapping_times() {
        assert_eq!(TimeMapping::AEqualsT.time(1.0), 1.0);
        assert_eq!(TimeMapping::AEqualsTwoT.time(1.0), 0.5);
        assert_eq!(TimeMapping::AEqualsHalfT.time(1.0), 2.0);
    }
}
