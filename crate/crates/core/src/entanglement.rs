//! Entanglement detection (CCNR and its amplified form) and quantification
//! (pure-state concurrence), plus the printed closed-form expressions for
//! two-node chains and a cosine-series fitter for harmonic analysis.
//!
//! Subsystem purities are evaluated from singular values of a square-root
//! factor `ρ = G G†` instead of `tr ρ_A²` directly. For nearly pure subsystems
//! `1 − tr ρ_A²` is tiny, and forming it by subtraction would leave rounding
//! noise of order 1e-16 that the square root in the concurrence amplifies to 1e-8.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::chain::QuantumState;
use crate::error::{Error, Result};
use crate::numerics::{
    hermitian_eigen, kron, partial_trace, realign, require_unit_trace, singular_values, trace_norm,
    Bipartition, ComplexMatrix,
};

/// Guard band above the separable boundary for entanglement verdicts.
pub const DETECT_TOL: f64 = 1e-9;

/// Normalization tolerance for closed-form amplitude inputs.
const AMPLITUDE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    /// Trace norm of the realigned state.
    pub ccnr_value: f64,
    pub ccnr_entangled: bool,
    /// `‖(ρ − ρ_A⊗ρ_B)^R‖ − √((1 − tr ρ_A²)(1 − tr ρ_B²))`.
    pub amplified_margin: f64,
    pub amplified_entangled: bool,
    /// Pure-state concurrence, or the mixedness indicator for mixed states.
    pub concurrence: f64,
}

impl EntanglementReport {
    pub fn new(ccnr_value: f64, amplified_margin: f64, concurrence: f64) -> Self {
        Self {
            ccnr_value,
            ccnr_entangled: ccnr_value > 1.0 + DETECT_TOL,
            amplified_margin,
            amplified_entangled: amplified_margin > DETECT_TOL,
            concurrence,
        }
    }

    /// Full report for a state; mixed states use the mixedness indicator.
    pub fn for_state(state: &QuantumState, part: Bipartition) -> Result<Self> {
        let rho = state.density_matrix();
        let factor = match state {
            QuantumState::Pure { amplitudes, .. } => column(amplitudes),
            QuantumState::Mixed { rho, .. } => density_factor(rho)?,
        };
        Self::for_factored(&rho, &factor, part)
    }

    /// Report for `ρ = G G†` when a square-root factor `G` is already at hand.
    pub fn for_factored(rho: &ComplexMatrix, factor: &ComplexMatrix, part: Bipartition) -> Result<Self> {
        let ccnr_value = ccnr(rho, part)?;
        let entropy_a = linear_entropy(&subsystem_spectrum(factor, part, Subsystem::A)?);
        let entropy_b = linear_entropy(&subsystem_spectrum(factor, part, Subsystem::B)?);
        let margin = amplified_margin_from(rho, part, entropy_a, entropy_b)?;
        Ok(Self::new(ccnr_value, margin, (2.0 * entropy_a).sqrt()))
    }
}

/// CCNR value `‖R(ρ)‖_tr`; above 1 certifies entanglement.
pub fn ccnr(rho: &ComplexMatrix, part: Bipartition) -> Result<f64> {
    part.check_square(rho)?;
    trace_norm(&realign(rho, part)?)
}

/// Positive margin certifies entanglement.
pub fn amplified_ccnr_margin(rho: &ComplexMatrix, part: Bipartition) -> Result<f64> {
    part.check_square(rho)?;
    require_unit_trace(rho)?;
    let factor = density_factor(rho)?;
    let entropy_a = linear_entropy(&subsystem_spectrum(&factor, part, Subsystem::A)?);
    let entropy_b = linear_entropy(&subsystem_spectrum(&factor, part, Subsystem::B)?);
    amplified_margin_from(rho, part, entropy_a, entropy_b)
}

fn amplified_margin_from(rho: &ComplexMatrix, part: Bipartition, entropy_a: f64, entropy_b: f64) -> Result<f64> {
    let dims = [part.dim_a, part.dim_b];
    let rho_a = partial_trace(rho, &dims, &[0])?;
    let rho_b = partial_trace(rho, &dims, &[1])?;
    let correlations = rho - &kron(&rho_a, &rho_b);
    let lhs = trace_norm(&realign(&correlations, part)?)?;
    Ok(lhs - (entropy_a * entropy_b).sqrt())
}

/// `√(2(1 − tr ρ_A²))` of a pure bipartite state.
pub fn concurrence_pure(state: &QuantumState, part: Bipartition) -> Result<f64> {
    let QuantumState::Pure { amplitudes, .. } = state else {
        return Err(Error::NotPure);
    };
    if amplitudes.len() != part.total() {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} for bipartition {}x{}",
            amplitudes.len(),
            part.dim_a,
            part.dim_b
        )));
    }
    let spectrum = subsystem_spectrum(&column(amplitudes), part, Subsystem::A)?;
    Ok((2.0 * linear_entropy(&spectrum)).sqrt())
}

/// `√(2(1 − tr ρ_A²))` evaluated on the reduced state of a possibly mixed `ρ`.
pub fn mixedness_indicator(rho: &ComplexMatrix, part: Bipartition) -> Result<f64> {
    part.check_square(rho)?;
    mixedness_indicator_factored(&density_factor(rho)?, part)
}

/// As [`mixedness_indicator`], for `ρ = G G†` given the factor `G`.
pub fn mixedness_indicator_factored(factor: &ComplexMatrix, part: Bipartition) -> Result<f64> {
    Ok((2.0 * linear_entropy(&subsystem_spectrum(factor, part, Subsystem::A)?)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Eigenvalues (descending, unnormalized) of the reduced state of `G G†`,
/// obtained as squared singular values of the reshaped factor.
pub fn subsystem_spectrum(factor: &ComplexMatrix, part: Bipartition, side: Subsystem) -> Result<Vec<f64>> {
    if factor.rows() != part.total() {
        return Err(Error::DimensionMismatch(format!(
            "factor with {} rows for bipartition {}x{}",
            factor.rows(),
            part.dim_a,
            part.dim_b
        )));
    }
    let (da, db, r) = (part.dim_a, part.dim_b, factor.cols());
    let stacked = match side {
        Subsystem::A => ComplexMatrix::from_fn(da, db * r, |ia, col| {
            let (c, ib) = (col / db, col % db);
            factor[(ia * db + ib, c)]
        }),
        Subsystem::B => ComplexMatrix::from_fn(db, da * r, |ib, col| {
            let (c, ia) = (col / da, col % da);
            factor[(ia * db + ib, c)]
        }),
    };
    Ok(singular_values(&stacked)?.into_iter().map(|s| s * s).collect())
}

/// `1 − Σ p_i²` for the normalized distribution `p ∝ spectrum`, computed as
/// `2 Σ_{i<j} p_i p_j` so that nearly pure spectra do not cancel.
pub fn linear_entropy(spectrum: &[f64]) -> f64 {
    let mut p: Vec<f64> = spectrum.iter().map(|&x| x.max(0.0)).collect();
    let total: f64 = p.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    p.iter_mut().for_each(|x| *x /= total);
    p.sort_by(|a, b| b.total_cmp(a));
    let mut suffix = 0.0;
    let mut acc = 0.0;
    for &x in p.iter().rev() {
        acc += x * suffix;
        suffix += x;
    }
    2.0 * acc
}

fn column(v: &[num_complex::Complex64]) -> ComplexMatrix {
    ComplexMatrix::new(v.len(), 1, v.to_vec()).expect("non-empty vector")
}

/// Square-root factor `G = V √Λ₊` of a Hermitian PSD matrix (negative
/// eigenvalues from rounding are dropped).
pub fn density_factor(rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eigen(rho)?;
    let keep: Vec<usize> = (0..eig.values.len()).filter(|&k| eig.values[k] > 0.0).collect();
    if keep.is_empty() {
        return Err(Error::Numerical("density matrix has no positive eigenvalue".into()));
    }
    Ok(ComplexMatrix::from_fn(rho.rows(), keep.len(), |i, c| {
        eig.vectors[(i, keep[c])] * eig.values[keep[c]].sqrt()
    }))
}

fn check_amplitudes(amps: &[f64]) -> Result<()> {
    if amps.iter().any(|&a| !a.is_finite() || a < 0.0) {
        return Err(Error::invalid("amplitudes", "amplitudes must be finite and non-negative"));
    }
    let norm_sq: f64 = amps.iter().map(|a| a * a).sum();
    if (norm_sq - 1.0).abs() > AMPLITUDE_TOL {
        return Err(Error::Unnormalized { norm_sq });
    }
    Ok(())
}

/// `(1/4)(4α⁴ + 3β⁴ + 8α²β² cos 2a + β⁴ cos 4a)` for a two-qubit chain.
pub fn closed_form_l2_d2(alpha: f64, beta: f64, a: f64) -> Result<f64> {
    check_amplitudes(&[alpha, beta])?;
    let (a2, b2) = (alpha * alpha, beta * beta);
    Ok(0.25 * (4.0 * a2 * a2 + 3.0 * b2 * b2 + 8.0 * a2 * b2 * (2.0 * a).cos() + b2 * b2 * (4.0 * a).cos()))
}

/// Two-qutrit form; depends on `β, γ` only through `β² + γ²`.
pub fn closed_form_l2_d3(alpha: f64, beta: f64, gamma: f64, a: f64) -> Result<f64> {
    check_amplitudes(&[alpha, beta, gamma])?;
    let a2 = alpha * alpha;
    let e = beta * beta + gamma * gamma;
    Ok(0.25 * (4.0 * a2 * a2 + 3.0 * e * e + 8.0 * a2 * e * (2.0 * a).cos() + e * e * (4.0 * a).cos()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CosineFit {
    pub harmonics: Vec<u32>,
    pub coefficients: Vec<f64>,
    /// Largest absolute residual over the samples.
    pub max_residual: f64,
}

impl CosineFit {
    pub fn coefficient(&self, harmonic: u32) -> Option<f64> {
        self.harmonics
            .iter()
            .position(|&h| h == harmonic)
            .map(|i| self.coefficients[i])
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.coefficients.iter().map(|c| c.abs()).fold(0.0, f64::max)
    }

    /// `Σ_h c_h cos(h·a)`.
    pub fn evaluate(&self, a: f64) -> f64 {
        self.harmonics
            .iter()
            .zip(&self.coefficients)
            .map(|(&h, &c)| c * (h as f64 * a).cos())
            .sum()
    }
}

/// Least-squares fit of `value(a) ≈ Σ_h c_h cos(h·a)`.
pub fn fit_cosine_series(samples: &[(f64, f64)], harmonics: &[u32]) -> Result<CosineFit> {
    if harmonics.is_empty() {
        return Err(Error::invalid("harmonics", "at least one harmonic is required"));
    }
    if samples.len() < 2 * harmonics.len() + 1 {
        return Err(Error::invalid(
            "samples",
            format!("need at least {} samples, got {}", 2 * harmonics.len() + 1, samples.len()),
        ));
    }
    let design = DMatrix::from_fn(samples.len(), harmonics.len(), |i, j| {
        (harmonics[j] as f64 * samples[i].0).cos()
    });
    let values = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.1));
    let svd = design.clone().svd(true, true);
    let (smax, smin) = svd
        .singular_values
        .iter()
        .fold((0.0f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    if smin.is_nan() || smin <= 1e-10 * smax {
        return Err(Error::RankDeficient);
    }
    let coeffs = svd
        .solve(&values, 0.0)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    let residual = &design * &coeffs - &values;
    Ok(CosineFit {
        harmonics: harmonics.to_vec(),
        coefficients: coeffs.iter().copied().collect(),
        max_residual: residual.amax(),
    })
}
