//! Stepwise transfer of a qudit state along a chain, with per-step
//! entanglement bookkeeping and optional phase-damping noise.
//!
//! The chain state is kept as a square-root factor `ρ = G G†` (a single
//! column while the evolution is pure). Kraus branches are appended as
//! extra columns and compressed back to at most `d^N` columns with a QR
//! factorization, which leaves `G G†` unchanged.

mod conformance;

pub use conformance::{
    conformance_closed_forms, ClosedFormRow, ConformanceGrid, ConformanceReport, HarmonicAnalysis,
    MappingDeviation, TimeMapping,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::{find_pst_time_with, ChainSpec, Evolution, PstResult, PstSearch, QuantumState};
use crate::channels::{
    average_fidelity, embed_channel, monte_carlo_fidelity, phase_damping, phase_damping_weights,
    KrausChannel, MonteCarloEstimate,
};
use crate::entanglement::{density_factor, EntanglementReport};
use crate::error::{Error, Result};
use crate::numerics::{apply_on_site, qr_r_factor, Bipartition, ComplexMatrix};

pub const DEFAULT_STEPS: usize = 16;
pub const DEFAULT_GAMMA_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub d: usize,
    pub nodes: usize,
    /// Defaults to the engineered perfect-transfer couplings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    /// Qudit phase damping on every site (product channel).
    PhaseDamping,
    /// One phase-damping family on the whole `d^N`-dimensional chain.
    PhaseDampingFullChain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    /// Full evolution, then a single chain-level channel.
    GlobalAfter,
    /// Full evolution, then the local channel on each site.
    LocalAfter,
    /// Each step is a unitary step followed by the chain-level channel.
    Interleaved,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub channel: ChannelKind,
    pub p: f64,
    pub topology: Topology,
}

/// Where the chain is cut for entanglement measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BipartitionChoice {
    /// `A` = the first `k` nodes, `B` = the rest.
    Cut(usize),
    /// The reduced state of the first and last node, split between them.
    FirstLast,
}

impl Default for BipartitionChoice {
    fn default() -> Self {
        BipartitionChoice::Cut(1)
    }
}

fn default_steps() -> usize {
    DEFAULT_STEPS
}

fn default_gamma_tolerance() -> f64 {
    DEFAULT_GAMMA_TOLERANCE
}

fn default_mc_samples() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub chain: ChainConfig,
    /// Amplitudes `α_0..α_{d−1}` of the transferred qudit as `[re, im]` pairs.
    pub input_amplitudes: Vec<[f64; 2]>,
    /// Total evolution time; defaults to the located perfect-transfer time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_total: Option<f64>,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseConfig>,
    #[serde(default)]
    pub bipartition: BipartitionChoice,
    #[serde(default = "default_gamma_tolerance")]
    pub gamma_tolerance: f64,
    #[serde(default)]
    pub seed: u64,
    /// Haar samples for the Monte Carlo fidelity estimate.
    #[serde(default = "default_mc_samples")]
    pub monte_carlo_samples: usize,
}

impl ExperimentConfig {
    /// Noiseless configuration with default settings.
    pub fn noiseless(d: usize, nodes: usize, input: &[Complex64]) -> Self {
        Self {
            chain: ChainConfig {
                d,
                nodes,
                couplings: None,
            },
            input_amplitudes: input.iter().map(|z| [z.re, z.im]).collect(),
            t_total: None,
            steps: DEFAULT_STEPS,
            noise: None,
            bipartition: BipartitionChoice::default(),
            gamma_tolerance: DEFAULT_GAMMA_TOLERANCE,
            seed: 0,
            monte_carlo_samples: default_mc_samples(),
        }
    }

    pub fn with_noise(mut self, channel: ChannelKind, p: f64, topology: Topology) -> Self {
        self.noise = Some(NoiseConfig { channel, p, topology });
        self
    }

    pub fn chain_spec(&self) -> Result<ChainSpec> {
        match &self.chain.couplings {
            None => ChainSpec::new(self.chain.d, self.chain.nodes),
            Some(j) => ChainSpec::with_couplings(self.chain.d, self.chain.nodes, j.clone()),
        }
    }

    pub fn input(&self) -> Vec<Complex64> {
        self.input_amplitudes
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect()
    }

    /// Checks every field; errors name the offending field.
    pub fn validate(&self) -> Result<ChainSpec> {
        let spec = self.chain_spec()?;
        let input = self.input();
        if input.len() != spec.d() {
            return Err(Error::invalid(
                "input_amplitudes",
                format!("expected {} amplitudes, got {}", spec.d(), input.len()),
            ));
        }
        if input.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("input_amplitudes", "amplitudes must be finite"));
        }
        let norm_sq: f64 = input.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > crate::chain::STATE_TOL {
            return Err(Error::invalid(
                "input_amplitudes",
                format!("amplitudes are not normalized (norm² = {norm_sq})"),
            ));
        }
        if let Some(t) = self.t_total {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::invalid("t_total", "must be positive and finite"));
            }
        }
        if self.steps == 0 {
            return Err(Error::invalid("steps", "must be at least 1"));
        }
        if self.gamma_tolerance.is_nan() || self.gamma_tolerance < 0.0 {
            return Err(Error::invalid("gamma_tolerance", "must be non-negative"));
        }
        if let BipartitionChoice::Cut(k) = self.bipartition {
            if k == 0 || k >= spec.nodes() {
                return Err(Error::invalid(
                    "bipartition",
                    format!("cut must lie in 1..={}, got {k}", spec.nodes() - 1),
                ));
            }
        }
        if let Some(noise) = &self.noise {
            if !(0.0..=1.0).contains(&noise.p) {
                return Err(Error::invalid("noise.p", format!("{} outside [0, 1]", noise.p)));
            }
            if noise.topology == Topology::LocalAfter && noise.channel == ChannelKind::PhaseDampingFullChain {
                return Err(Error::invalid(
                    "noise.topology",
                    "local_after needs a per-site channel, not phase_damping_full_chain",
                ));
            }
        }
        Ok(spec)
    }
}

/// One row of an experiment trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferRecord {
    pub step: usize,
    pub time: f64,
    pub ccnr: f64,
    pub ccnr_amplified_margin: f64,
    /// Concurrence (pure runs) or mixedness indicator (noisy runs).
    pub concurrence: f64,
    /// Excited-level population at the last node over the input's excited weight.
    pub transfer_probability: f64,
    /// `⟨ψ_in| ρ_N |ψ_in⟩`.
    pub fidelity_to_input: f64,
    pub gamma_ok: bool,
    /// First/last-node report, filled for chains longer than two nodes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_last: Option<EntanglementReport>,
}

/// Chain state `ρ = G G†` held through its factor `G`.
#[derive(Debug, Clone)]
pub struct FactoredState {
    dims: Vec<usize>,
    factor: ComplexMatrix,
}

impl FactoredState {
    pub fn from_pure(state: &QuantumState) -> Result<Self> {
        match state {
            QuantumState::Pure { dims, amplitudes } => Ok(Self {
                dims: dims.clone(),
                factor: ComplexMatrix::new(amplitudes.len(), 1, amplitudes.clone())?,
            }),
            QuantumState::Mixed { dims, rho } => Ok(Self {
                dims: dims.clone(),
                factor: density_factor(rho)?,
            }),
        }
    }

    pub fn factor(&self) -> &ComplexMatrix {
        &self.factor
    }

    pub fn rank_bound(&self) -> usize {
        self.factor.cols()
    }

    pub fn density(&self) -> ComplexMatrix {
        &self.factor * &self.factor.dagger()
    }

    pub fn apply_unitary(&mut self, u: &ComplexMatrix) -> Result<()> {
        self.factor = u.matmul(&self.factor)?;
        Ok(())
    }

    /// Applies a single-site channel without forming chain-sized Kraus operators.
    pub fn apply_site_channel(&mut self, ch: &KrausChannel, site: usize) -> Result<()> {
        let kraus: Vec<&ComplexMatrix> = ch.nonzero_kraus().collect();
        if let [only] = kraus.as_slice() {
            if only.max_abs_diff(&ComplexMatrix::identity(only.rows())) == 0.0 {
                return Ok(());
            }
        }
        let (rows, cols) = self.factor.dims();
        let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(cols * kraus.len());
        for e in &kraus {
            for c in 0..cols {
                let mut v = self.factor.column(c);
                apply_on_site(e, site, &self.dims, &mut v)?;
                columns.push(v);
            }
        }
        self.factor = ComplexMatrix::from_fn(rows, columns.len(), |i, c| columns[c][i]);
        self.compress();
        Ok(())
    }

    /// Applies a channel acting on the full chain space.
    pub fn apply_chain_channel(&mut self, ch: &KrausChannel) -> Result<()> {
        let kraus: Vec<&ComplexMatrix> = ch.nonzero_kraus().collect();
        if let [only] = kraus.as_slice() {
            if only.max_abs_diff(&ComplexMatrix::identity(only.rows())) == 0.0 {
                return Ok(());
            }
        }
        let blocks = kraus
            .iter()
            .map(|e| e.matmul(&self.factor))
            .collect::<Result<Vec<_>>>()?;
        let rows = self.factor.rows();
        let width = self.factor.cols();
        self.factor = ComplexMatrix::from_fn(rows, width * blocks.len(), |i, c| blocks[c / width][(i, c % width)]);
        self.compress();
        Ok(())
    }

    /// Full-chain phase damping acts entry-wise on `ρ`:
    /// `ρ_jk ↦ ρ_jk Σ_i w_i ω^{i(j−k)}` with `ω = e^{2πi/D}`.
    fn apply_full_chain_dephasing(&mut self, p: f64) -> Result<()> {
        let dim = self.factor.rows();
        let weights = phase_damping_weights(dim, p)?;
        if weights.iter().skip(1).all(|&w| w == 0.0) {
            return Ok(());
        }
        let profile: Vec<Complex64> = (0..dim)
            .map(|delta| {
                weights
                    .iter()
                    .enumerate()
                    .filter(|(_, &w)| w > 0.0)
                    .map(|(i, &w)| {
                        let phase = 2.0 * std::f64::consts::PI * ((i * delta) % dim) as f64 / dim as f64;
                        Complex64::from_polar(w, phase)
                    })
                    .sum()
            })
            .collect();
        let rho = self.density();
        let damped = ComplexMatrix::from_fn(dim, dim, |j, k| {
            let factor = if j >= k { profile[j - k] } else { profile[k - j].conj() };
            rho[(j, k)] * factor
        });
        self.factor = density_factor(&damped)?;
        Ok(())
    }

    /// Replaces `G` by `R†` from `G† = QR` once `G` has more columns than rows.
    fn compress(&mut self) {
        let (rows, cols) = self.factor.dims();
        if cols <= rows {
            return;
        }
        let r = qr_r_factor(&self.factor.dagger().to_nalgebra());
        self.factor = ComplexMatrix::from_nalgebra(&r.adjoint());
    }

    /// Factor of the reduced state on `keep` (ascending sites).
    pub fn reduced(&self, keep: &[usize]) -> Result<FactoredState> {
        let n = self.dims.len();
        if keep.is_empty() || keep.iter().any(|&s| s >= n) || keep.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("keep", "sites must be ascending and in range"));
        }
        let traced: Vec<usize> = (0..n).filter(|s| !keep.contains(s)).collect();
        let kept_dims: Vec<usize> = keep.iter().map(|&s| self.dims[s]).collect();
        let kept_total: usize = kept_dims.iter().product();
        let traced_total: usize = traced.iter().map(|&s| self.dims[s]).product();

        let mut strides = vec![1usize; n];
        for s in (0..n.saturating_sub(1)).rev() {
            strides[s] = strides[s + 1] * self.dims[s + 1];
        }
        let strides = &strides;
        let offsets = |sites: &[usize]| {
            sites.iter().fold(vec![0usize], |acc, &s| {
                acc.iter()
                    .flat_map(|&b| (0..self.dims[s]).map(move |v| b + v * strides[s]))
                    .collect::<Vec<usize>>()
            })
        };
        let keep_off: Vec<usize> = offsets(keep);
        let trace_off: Vec<usize> = offsets(&traced);
        debug_assert_eq!(keep_off.len(), kept_total);
        debug_assert_eq!(trace_off.len(), traced_total);

        let width = self.factor.cols();
        let mut out = ComplexMatrix::from_fn(kept_total, width * traced_total, |i, col| {
            let (c, t) = (col / traced_total, col % traced_total);
            self.factor[(keep_off[i] + trace_off[t], c)]
        });
        if out.cols() > out.rows() {
            let r = qr_r_factor(&out.dagger().to_nalgebra());
            out = ComplexMatrix::from_nalgebra(&r.adjoint());
        }
        Ok(FactoredState {
            dims: kept_dims,
            factor: out,
        })
    }
}

/// Per-run constants shared by every measurement.
struct Probe<'a> {
    spec: &'a ChainSpec,
    input: Vec<Complex64>,
    excited_weight: f64,
    bipartition: BipartitionChoice,
}

impl Probe<'_> {
    fn measure(&self, state: &FactoredState, step: usize, time: f64) -> Result<TransferRecord> {
        let spec = self.spec;
        let d = spec.d();
        let last = spec.nodes() - 1;
        let first_last = if spec.nodes() > 2 || self.bipartition == BipartitionChoice::FirstLast {
            let pair = state.reduced(&[0, last])?;
            Some(EntanglementReport::for_factored(
                &pair.density(),
                pair.factor(),
                Bipartition::new(d, d)?,
            )?)
        } else {
            None
        };
        let report = match self.bipartition {
            BipartitionChoice::Cut(k) => {
                let part = Bipartition::new(d.pow(k as u32), d.pow((spec.nodes() - k) as u32))?;
                EntanglementReport::for_factored(&state.density(), state.factor(), part)?
            }
            BipartitionChoice::FirstLast => first_last.expect("computed above"),
        };

        let rho_last = state.reduced(&[last])?.density();
        let excited: f64 = (1..d).map(|a| rho_last[(a, a)].re).sum();
        let transfer_probability = if self.excited_weight > 0.0 {
            excited / self.excited_weight
        } else {
            0.0
        };
        let fidelity: Complex64 = (0..d)
            .flat_map(|j| (0..d).map(move |k| (j, k)))
            .map(|(j, k)| self.input[j].conj() * rho_last[(j, k)] * self.input[k])
            .sum();

        Ok(TransferRecord {
            step,
            time,
            ccnr: report.ccnr_value,
            ccnr_amplified_margin: report.amplified_margin,
            concurrence: report.concurrence,
            transfer_probability,
            fidelity_to_input: fidelity.re,
            gamma_ok: true,
            first_last: if spec.nodes() > 2 { first_last } else { None },
        })
    }
}

/// Resolved run parameters: the chain, its diagonalization and the total time.
pub struct Prepared {
    pub spec: ChainSpec,
    pub evolution: Evolution,
    pub t_total: f64,
    /// Present when `t_total` came from the perfect-transfer search.
    pub pst: Option<PstResult>,
}

pub fn prepare(config: &ExperimentConfig) -> Result<Prepared> {
    let spec = config.validate()?;
    let evolution = Evolution::new(&spec)?;
    let (t_total, pst) = match config.t_total {
        Some(t) => (t, None),
        None => {
            let res = find_pst_time_with(&evolution, PstSearch::default())?;
            (res.time, Some(res))
        }
    };
    Ok(Prepared {
        spec,
        evolution,
        t_total,
        pst,
    })
}

/// The chain-level channel selected by `noise`.
pub fn chain_channel(spec: &ChainSpec, noise: &NoiseConfig) -> Result<KrausChannel> {
    match noise.channel {
        ChannelKind::PhaseDamping => {
            let sites: Vec<usize> = (0..spec.nodes()).collect();
            embed_channel(&phase_damping(spec.d(), noise.p)?, &sites, &spec.site_dims())
        }
        ChannelKind::PhaseDampingFullChain => phase_damping(spec.dim(), noise.p),
    }
}

fn apply_noise(state: &mut FactoredState, spec: &ChainSpec, noise: &NoiseConfig, local: &KrausChannel) -> Result<()> {
    match noise.channel {
        ChannelKind::PhaseDamping => {
            for site in 0..spec.nodes() {
                state.apply_site_channel(local, site)?;
            }
            Ok(())
        }
        ChannelKind::PhaseDampingFullChain => state.apply_full_chain_dephasing(noise.p),
    }
}

fn simulate(prepared: &Prepared, config: &ExperimentConfig, noise: Option<&NoiseConfig>) -> Result<Vec<TransferRecord>> {
    let spec = &prepared.spec;
    let input = config.input();
    let probe = Probe {
        spec,
        excited_weight: input.iter().skip(1).map(|z| z.norm_sqr()).sum(),
        input: input.clone(),
        bipartition: config.bipartition,
    };
    let initial = QuantumState::chain_input(spec, &input)?;
    let mut state = FactoredState::from_pure(&initial)?;
    let dt = prepared.t_total / config.steps as f64;
    let step_u = prepared.evolution.propagator(dt);
    let local = match noise {
        Some(n) => Some(phase_damping(spec.d(), n.p)?),
        None => None,
    };

    let mut records = Vec::with_capacity(config.steps + 1);
    records.push(probe.measure(&state, 0, 0.0)?);
    for step in 1..=config.steps {
        state.apply_unitary(&step_u)?;
        if let (Some(n), Some(local)) = (noise, &local) {
            let last = step == config.steps;
            let now = match n.topology {
                Topology::Interleaved => true,
                Topology::GlobalAfter | Topology::LocalAfter => last,
            };
            if now {
                apply_noise(&mut state, spec, n, local)?;
            }
        }
        let record = probe.measure(&state, step, step as f64 * dt)?;
        if ![record.ccnr, record.ccnr_amplified_margin, record.concurrence, record.fidelity_to_input]
            .iter()
            .all(|x| x.is_finite())
        {
            return Err(Error::Numerical(format!("non-finite measure at step {step}")));
        }
        records.push(record);
    }
    Ok(records)
}

/// Noiseless transfer; every record satisfies the γ condition against itself.
pub fn run_noiseless(config: &ExperimentConfig) -> Result<Vec<TransferRecord>> {
    if config.noise.is_some() {
        return Err(Error::invalid("noise", "run_noiseless needs a configuration without noise"));
    }
    simulate(&prepare(config)?, config, None)
}

/// Noisy transfer, with `gamma_ok` judged against the noiseless reference.
pub fn run_noisy(config: &ExperimentConfig) -> Result<Vec<TransferRecord>> {
    Ok(run_experiment(config)?.records)
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub records: Vec<TransferRecord>,
    /// Noiseless profile of the same configuration (for noisy runs).
    pub reference: Option<Vec<TransferRecord>>,
    pub t_total: f64,
    pub pst: Option<PstResult>,
}

/// Runs a configuration with or without noise.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let prepared = prepare(config)?;
    run_prepared(&prepared, config)
}

pub fn run_prepared(prepared: &Prepared, config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let reference = simulate(prepared, config, None)?;
    let Some(noise) = &config.noise else {
        return Ok(ExperimentOutcome {
            records: reference,
            reference: None,
            t_total: prepared.t_total,
            pst: prepared.pst.clone(),
        });
    };
    let mut records = simulate(prepared, config, Some(noise))?;
    let profile: Vec<f64> = reference.iter().map(|r| r.concurrence).collect();
    let verdicts = gamma_check(&records, &profile, config.gamma_tolerance)?;
    for (r, ok) in records.iter_mut().zip(verdicts) {
        r.gamma_ok = ok;
    }
    Ok(ExperimentOutcome {
        records,
        reference: Some(reference),
        t_total: prepared.t_total,
        pst: prepared.pst.clone(),
    })
}

/// `|measured_i − reference_i| ≤ tol` on the concurrence column.
pub fn gamma_check(series: &[TransferRecord], reference: &[f64], tol: f64) -> Result<Vec<bool>> {
    if series.len() != reference.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} records against a reference of length {}",
            series.len(),
            reference.len()
        )));
    }
    Ok(series
        .iter()
        .zip(reference)
        .map(|(r, &e)| (r.concurrence - e).abs() <= tol)
        .collect())
}

/// Average fidelity of the configured noise against the total propagator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelitySummary {
    pub p: f64,
    /// `(tr Σ M†M + Σ |tr M|²)/(n(n+1))` with `M_k = U† E_k`.
    pub average_fidelity: f64,
    pub monte_carlo: MonteCarloEstimate,
    /// The printed two-qutrit expression, when the chain is two qutrits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_two_qutrit: Option<f64>,
}

/// Chains above this dimension skip the fidelity summary (product Kraus sets grow as `d^N`).
pub const FIDELITY_MAX_DIM: usize = 81;

pub fn fidelity_summary(prepared: &Prepared, noise: &NoiseConfig, samples: usize, seed: u64) -> Result<Option<FidelitySummary>> {
    let spec = &prepared.spec;
    if spec.dim() > FIDELITY_MAX_DIM {
        return Ok(None);
    }
    let u = prepared.evolution.propagator(prepared.t_total);
    let ch = chain_channel(spec, noise)?;
    let analytic = (spec.d() == 3 && spec.nodes() == 2)
        .then(|| crate::channels::analytic_favg_2qutrit(noise.p))
        .transpose()?;
    Ok(Some(FidelitySummary {
        p: noise.p,
        average_fidelity: average_fidelity(&u, &ch)?,
        monte_carlo: monte_carlo_fidelity(&u, &ch, samples, seed)?,
        analytic_two_qutrit: analytic,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::apply_channel;

    fn plus(d: usize) -> Vec<Complex64> {
        vec![Complex64::new(1.0 / (d as f64).sqrt(), 0.0); d]
    }

    #[test]
    fn config_validation_names_fields() {
        let mut cfg = ExperimentConfig::noiseless(3, 2, &plus(3));
        cfg.input_amplitudes[0] = [1.0, 0.0];
        match cfg.validate() {
            Err(Error::InvalidParameter { name, .. }) => assert_eq!(name, "input_amplitudes"),
            other => panic!("{other:?}"),
        }
        let mut cfg = ExperimentConfig::noiseless(3, 2, &plus(3));
        cfg.steps = 0;
        assert!(matches!(cfg.validate(), Err(Error::InvalidParameter { name: "steps", .. })));
        let mut cfg = ExperimentConfig::noiseless(3, 3, &plus(3));
        cfg.bipartition = BipartitionChoice::Cut(3);
        assert!(matches!(cfg.validate(), Err(Error::InvalidParameter { name: "bipartition", .. })));
        let cfg = ExperimentConfig::noiseless(3, 2, &plus(3)).with_noise(
            ChannelKind::PhaseDampingFullChain,
            0.5,
            Topology::LocalAfter,
        );
        assert!(cfg.validate().is_err());
        let cfg = ExperimentConfig::noiseless(3, 2, &plus(3)).with_noise(ChannelKind::PhaseDamping, 1.2, Topology::Interleaved);
        assert!(matches!(cfg.validate(), Err(Error::InvalidParameter { name: "noise.p", .. })));
    }

    #[test]
    fn config_json_shape() {
        let json = r#"{
            "chain": {"d": 3, "nodes": 2},
            "input_amplitudes": [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
            "noise": {"channel": "phase_damping", "p": 0.85, "topology": "interleaved"},
            "bipartition": "first_last"
        }"#;
        let cfg: ExperimentConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.steps, DEFAULT_STEPS);
        assert_eq!(cfg.bipartition, BipartitionChoice::FirstLast);
        assert_eq!(cfg.noise.unwrap().topology, Topology::Interleaved);
        let cut: ExperimentConfig =
            serde_json::from_str(r#"{"chain":{"d":2,"nodes":3},"input_amplitudes":[[1,0],[0,0]],"bipartition":{"cut":2}}"#)
                .unwrap();
        assert_eq!(cut.bipartition, BipartitionChoice::Cut(2));
    }

    #[test]
    fn site_channels_match_embedded_product_channel() {
        let spec = ChainSpec::new(3, 2).unwrap();
        let s = 1.0 / 3f64.sqrt();
        let psi = [Complex64::new(s, 0.0), Complex64::new(0.0, s), Complex64::new(-s, 0.0)];
        let initial = QuantumState::chain_input(&spec, &psi).unwrap();
        let evo = Evolution::new(&spec).unwrap();
        let mut state = FactoredState::from_pure(&initial).unwrap();
        state.apply_unitary(&evo.propagator(1.1)).unwrap();
        let rho = state.density();

        let local = phase_damping(3, 0.3).unwrap();
        for site in 0..2 {
            state.apply_site_channel(&local, site).unwrap();
        }
        let product = embed_channel(&local, &[0, 1], &[3, 3]).unwrap();
        let expected = apply_channel(&rho, &product).unwrap();
        assert!(state.density().max_abs_diff(&expected) < 1e-14);
        assert!(state.rank_bound() <= 9);
    }

    #[test]
    fn full_chain_dephasing_matches_kraus_form() {
        let spec = ChainSpec::new(2, 2).unwrap();
        let initial = QuantumState::chain_input(&spec, &plus(2)).unwrap();
        let evo = Evolution::new(&spec).unwrap();
        let mut state = FactoredState::from_pure(&initial).unwrap();
        state.apply_unitary(&evo.propagator(0.7)).unwrap();
        let expected = apply_channel(&state.density(), &phase_damping(4, 0.4).unwrap()).unwrap();
        state.apply_full_chain_dephasing(0.4).unwrap();
        assert!(state.density().max_abs_diff(&expected) < 1e-13);
    }

    #[test]
    fn reduced_factor_matches_partial_trace() {
        let spec = ChainSpec::new(2, 4).unwrap();
        let initial = QuantumState::chain_input(&spec, &plus(2)).unwrap();
        let evo = Evolution::new(&spec).unwrap();
        let mut state = FactoredState::from_pure(&initial).unwrap();
        state.apply_unitary(&evo.propagator(1.3)).unwrap();
        let full = state.density();
        for keep in [vec![0], vec![0, 3], vec![1, 2], vec![3]] {
            let expected = crate::numerics::partial_trace(&full, &spec.site_dims(), &keep).unwrap();
            let got = state.reduced(&keep).unwrap().density();
            assert!(got.max_abs_diff(&expected) < 1e-14, "{keep:?}");
        }
    }

    #[test]
    fn gamma_check_shapes() {
        let cfg = ExperimentConfig::noiseless(2, 2, &plus(2));
        let recs = run_noiseless(&cfg).unwrap();
        let profile: Vec<f64> = recs.iter().map(|r| r.concurrence).collect();
        assert!(gamma_check(&recs, &profile, 0.0).unwrap().iter().all(|&b| b));
        assert!(gamma_check(&recs, &profile[1..], 1.0).is_err());
        let shifted: Vec<f64> = profile.iter().map(|x| x + 10.0).collect();
        assert!(gamma_check(&recs, &shifted, f64::INFINITY).unwrap().iter().all(|&b| b));
    }

    #[test]
    fn run_noiseless_rejects_noise() {
        let cfg = ExperimentConfig::noiseless(2, 2, &plus(2)).with_noise(ChannelKind::PhaseDamping, 0.5, Topology::Interleaved);
        assert!(run_noiseless(&cfg).is_err());
    }
}
