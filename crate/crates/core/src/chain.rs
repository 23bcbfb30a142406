//! Path-graph qudit chains under the XY-like transfer Hamiltonian
//!
//! `H = Σ_i (J_i/2) Σ_{k<j} [Θ^{k,j}_i Θ^{k,j}_{i+1} + β^{k,j}_i β^{k,j}_{i+1}]`,
//! with engineered couplings `J_i = √(i(N−i))/2` that give perfect transfer
//! between the end nodes at `t = π` for every chain length.
//!
//! Sites are 0-based in this API; site 0 is the most significant tensor factor.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{
    hermitian_eigen, kron_all, matexp_i, ComplexMatrix, HermitianEigen, HERMITIAN_TOL,
};
use crate::sud::{eta, GeneratorSet};

/// Largest supported chain Hilbert-space dimension `d^N`.
pub const MAX_DIM: usize = 4096;

/// Normalization tolerance for pure states and density matrices.
pub const STATE_TOL: f64 = 1e-10;

/// `[√(i(N−i))/2 for i = 1..N−1]`.
pub fn default_couplings(nodes: usize) -> Result<Vec<f64>> {
    if nodes < 2 {
        return Err(Error::invalid("nodes", format!("a chain needs at least 2 nodes, got {nodes}")));
    }
    Ok((1..nodes)
        .map(|i| ((i * (nodes - i)) as f64).sqrt() / 2.0)
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    d: usize,
    nodes: usize,
    couplings: Vec<f64>,
}

impl ChainSpec {
    /// Chain with the engineered perfect-transfer couplings.
    pub fn new(d: usize, nodes: usize) -> Result<Self> {
        let couplings = default_couplings(nodes)?;
        Self::with_couplings(d, nodes, couplings)
    }

    pub fn with_couplings(d: usize, nodes: usize, couplings: Vec<f64>) -> Result<Self> {
        if d < 2 {
            return Err(Error::invalid("d", format!("local dimension must be at least 2, got {d}")));
        }
        if nodes < 2 {
            return Err(Error::invalid("nodes", format!("a chain needs at least 2 nodes, got {nodes}")));
        }
        let dim = u32::try_from(nodes)
            .ok()
            .and_then(|n| d.checked_pow(n))
            .filter(|&dim| dim <= MAX_DIM)
            .ok_or_else(|| Error::invalid("nodes", format!("d^N exceeds {MAX_DIM}")))?;
        debug_assert!(dim >= 4);
        if couplings.len() != nodes - 1 {
            return Err(Error::invalid(
                "couplings",
                format!("expected {} couplings, got {}", nodes - 1, couplings.len()),
            ));
        }
        if couplings.iter().any(|&j| !j.is_finite() || j < 0.0) {
            return Err(Error::invalid("couplings", "couplings must be finite and non-negative"));
        }
        Ok(Self { d, nodes, couplings })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// Hilbert-space dimension `d^N`.
    pub fn dim(&self) -> usize {
        self.d.pow(self.nodes as u32)
    }

    pub fn site_dims(&self) -> Vec<usize> {
        vec![self.d; self.nodes]
    }

    /// Basis index of the product state with the given per-site levels.
    pub fn basis_index(&self, levels: &[usize]) -> Result<usize> {
        if levels.len() != self.nodes || levels.iter().any(|&v| v >= self.d) {
            return Err(Error::IndexOutOfRange(format!("levels {levels:?} for d={}, N={}", self.d, self.nodes)));
        }
        Ok(levels.iter().fold(0, |acc, &v| acc * self.d + v))
    }

    /// Per-site levels of a basis index (inverse of [`ChainSpec::basis_index`]).
    pub fn levels_of(&self, mut index: usize) -> Vec<usize> {
        let mut levels = vec![0; self.nodes];
        for slot in levels.iter_mut().rev() {
            *slot = index % self.d;
            index /= self.d;
        }
        levels
    }
}

/// Pure state vector or density matrix over a multi-site system.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure { dims: Vec<usize>, amplitudes: Vec<Complex64> },
    Mixed { dims: Vec<usize>, rho: ComplexMatrix },
}

fn total_dim(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::invalid("dims", "local dimensions must be positive"));
    }
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::invalid("dims", "dimension overflow"))
}

impl QuantumState {
    pub fn pure(dims: Vec<usize>, amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = total_dim(&dims)?;
        if amplitudes.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for dimension {n}",
                amplitudes.len()
            )));
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > STATE_TOL {
            return Err(Error::Unnormalized { norm_sq });
        }
        Ok(QuantumState::Pure { dims, amplitudes })
    }

    pub fn mixed(dims: Vec<usize>, rho: ComplexMatrix) -> Result<Self> {
        let n = total_dim(&dims)?;
        if rho.dims() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} density matrix for dimension {n}",
                rho.rows(),
                rho.cols()
            )));
        }
        let deviation = rho.hermitian_deviation();
        if deviation > STATE_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let tr = rho.trace().re;
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::TraceNotUnit { trace: tr });
        }
        let eig = hermitian_eigen(&rho)?;
        if eig.values.first().is_some_and(|&l| l < -STATE_TOL) {
            return Err(Error::invalid("rho", "density matrix has a negative eigenvalue"));
        }
        Ok(QuantumState::Mixed { dims, rho })
    }

    /// `(Σ α_i |i⟩) ⊗ |0⟩^{⊗(N−1)}`: the input qudit loaded into the first node.
    pub fn chain_input(spec: &ChainSpec, input: &[Complex64]) -> Result<Self> {
        if input.len() != spec.d() {
            return Err(Error::DimensionMismatch(format!(
                "{} input amplitudes for d = {}",
                input.len(),
                spec.d()
            )));
        }
        let stride = spec.dim() / spec.d();
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); spec.dim()];
        for (level, &a) in input.iter().enumerate() {
            amplitudes[level * stride] = a;
        }
        Self::pure(spec.site_dims(), amplitudes)
    }

    pub fn dims(&self) -> &[usize] {
        match self {
            QuantumState::Pure { dims, .. } | QuantumState::Mixed { dims, .. } => dims,
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, QuantumState::Pure { .. })
    }

    pub fn density_matrix(&self) -> ComplexMatrix {
        match self {
            QuantumState::Pure { amplitudes, .. } => ComplexMatrix::outer(amplitudes, amplitudes),
            QuantumState::Mixed { rho, .. } => rho.clone(),
        }
    }
}

/// Embeds a single-site operator into the full chain.
pub fn embed_site(op: &ComplexMatrix, site: usize, spec: &ChainSpec) -> Result<ComplexMatrix> {
    if site >= spec.nodes() {
        return Err(Error::IndexOutOfRange(format!("site {site} in a {}-node chain", spec.nodes())));
    }
    check_local(op, spec.d())?;
    let id = ComplexMatrix::identity(spec.d());
    let ops: Vec<&ComplexMatrix> = (0..spec.nodes()).map(|s| if s == site { op } else { &id }).collect();
    Ok(kron_all(ops).expect("chain has at least two nodes"))
}

/// `I^{⊗site} ⊗ left ⊗ right ⊗ I^{⊗(N−site−2)}`, acting on sites `site` and `site + 1`.
pub fn embed_pair(left: &ComplexMatrix, right: &ComplexMatrix, site: usize, spec: &ChainSpec) -> Result<ComplexMatrix> {
    if site + 1 >= spec.nodes() {
        return Err(Error::IndexOutOfRange(format!(
            "pair starting at site {site} in a {}-node chain",
            spec.nodes()
        )));
    }
    check_local(left, spec.d())?;
    check_local(right, spec.d())?;
    let id = ComplexMatrix::identity(spec.d());
    let ops: Vec<&ComplexMatrix> = (0..spec.nodes())
        .map(|s| match s {
            s if s == site => left,
            s if s == site + 1 => right,
            _ => &id,
        })
        .collect();
    Ok(kron_all(ops).expect("chain has at least two nodes"))
}

fn check_local(op: &ComplexMatrix, d: usize) -> Result<()> {
    if op.dims() != (d, d) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator for local dimension {d}",
            op.rows(),
            op.cols()
        )));
    }
    Ok(())
}

/// The transfer Hamiltonian, summing over all level pairs `1 ≤ k < j ≤ d`.
pub fn build_hamiltonian(spec: &ChainSpec) -> Result<ComplexMatrix> {
    let gens = GeneratorSet::new(spec.d())?;
    let mut h = ComplexMatrix::zeros(spec.dim(), spec.dim());
    for (site, &j) in spec.couplings().iter().enumerate() {
        let mut pair_sum = ComplexMatrix::zeros(spec.dim(), spec.dim());
        for ((_, theta), (_, beta)) in gens.thetas.iter().zip(&gens.betas) {
            pair_sum = &pair_sum + &embed_pair(theta, theta, site, spec)?;
            pair_sum = &pair_sum + &embed_pair(beta, beta, site, spec)?;
        }
        h = &h + &pair_sum.scale_real(j / 2.0);
    }
    Ok(h)
}

/// Frobenius norms of `[H, Σ_i η^{r,r}_i]` for `r = 1..d−1`.
pub fn commutator_defect(spec: &ChainSpec) -> Result<Vec<f64>> {
    let h = build_hamiltonian(spec)?;
    (1..spec.d())
        .map(|r| {
            let local = eta(r, spec.d())?;
            let mut total = ComplexMatrix::zeros(spec.dim(), spec.dim());
            for site in 0..spec.nodes() {
                total = &total + &embed_site(&local, site, spec)?;
            }
            Ok(h.commutator(&total)?.frobenius_norm())
        })
        .collect()
}

/// `e^{−itH}`.
pub fn propagator(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    matexp_i(h, t)
}

/// Diagonalized Hamiltonian of a chain; evaluates propagators and
/// transfer amplitudes at arbitrary times without re-diagonalizing.
#[derive(Debug, Clone)]
pub struct Evolution {
    spec: ChainSpec,
    hamiltonian: ComplexMatrix,
    eigen: HermitianEigen,
}

impl Evolution {
    pub fn new(spec: &ChainSpec) -> Result<Self> {
        let hamiltonian = build_hamiltonian(spec)?;
        debug_assert!(hamiltonian.is_hermitian(HERMITIAN_TOL));
        let eigen = hermitian_eigen(&hamiltonian)?;
        Ok(Self {
            spec: spec.clone(),
            hamiltonian,
            eigen,
        })
    }

    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn eigen(&self) -> &HermitianEigen {
        &self.eigen
    }

    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        self.eigen.map_spectrum(|l| Complex64::from_polar(1.0, -t * l))
    }

    /// `⟨to| e^{−itH} |from⟩` for computational basis indices.
    pub fn amplitude(&self, from: usize, to: usize, t: f64) -> Complex64 {
        let v = &self.eigen.vectors;
        self.eigen
            .values
            .iter()
            .enumerate()
            .map(|(k, &l)| v[(to, k)] * v[(from, k)].conj() * Complex64::from_polar(1.0, -t * l))
            .sum()
    }

    /// `a(t) = ⟨to| e^{−itH} |from⟩` with its first two time derivatives.
    fn amplitude_with_derivatives(&self, from: usize, to: usize, t: f64) -> [Complex64; 3] {
        let v = &self.eigen.vectors;
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (k, &l) in self.eigen.values.iter().enumerate() {
            let term = v[(to, k)] * v[(from, k)].conj() * Complex64::from_polar(1.0, -t * l);
            let di = Complex64::new(0.0, -l);
            out[0] += term;
            out[1] += term * di;
            out[2] += term * di * di;
        }
        out
    }

    /// End-to-end transfer amplitude of a single excitation at `level` (1..d−1).
    pub fn transfer_amplitude(&self, level: usize, t: f64) -> Result<f64> {
        let (from, to) = self.excitation_endpoints(level)?;
        Ok(self.amplitude(from, to, t).norm())
    }

    /// Smallest transfer amplitude over all excited levels.
    pub fn min_transfer_amplitude(&self, t: f64) -> f64 {
        (1..self.spec.d())
            .map(|level| self.transfer_amplitude(level, t).expect("valid level"))
            .fold(f64::INFINITY, f64::min)
    }

    /// Basis indices of `|level,0,…,0⟩` and `|0,…,0,level⟩`.
    pub fn excitation_endpoints(&self, level: usize) -> Result<(usize, usize)> {
        let spec = &self.spec;
        if level == 0 || level >= spec.d() {
            return Err(Error::IndexOutOfRange(format!(
                "excited level {level} outside 1..={}",
                spec.d() - 1
            )));
        }
        let mut first = vec![0; spec.nodes()];
        first[0] = level;
        let mut last = vec![0; spec.nodes()];
        last[spec.nodes() - 1] = level;
        Ok((spec.basis_index(&first)?, spec.basis_index(&last)?))
    }
}

/// `|⟨e_N| e^{−iHt} |e_1⟩|` for an excitation at `level`.
pub fn excitation_transfer_amplitude(spec: &ChainSpec, t: f64, level: usize) -> Result<f64> {
    let evo = Evolution::new(spec)?;
    evo.transfer_amplitude(level, t)
}

/// Search settings for [`find_pst_time`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PstSearch {
    pub t_max: f64,
    pub grid_points: usize,
    pub tolerance: f64,
}

impl Default for PstSearch {
    fn default() -> Self {
        Self {
            t_max: 2.0 * PI,
            grid_points: 2000,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PstResult {
    pub time: f64,
    /// Minimum over excited levels of the transfer amplitude at `time`.
    pub amplitude: f64,
    /// Transfer amplitude of each excited level `1..d−1` at `time`.
    pub level_amplitudes: Vec<f64>,
}

/// Locates the time maximizing the worst-level end-to-end transfer amplitude.
///
/// A coarse scan over `[0, t_max]` picks the best grid point (earliest on ties
/// within 1e-12), then golden-section search refines it inside the
/// neighbouring grid cells. If the grid is too coarse to bracket the true
/// peak, the best value found is still returned.
pub fn find_pst_time(spec: &ChainSpec, t_max: f64, grid_points: usize) -> Result<PstResult> {
    let search = PstSearch {
        t_max,
        grid_points,
        ..PstSearch::default()
    };
    find_pst_time_with(&Evolution::new(spec)?, search)
}

pub fn find_pst_time_with(evo: &Evolution, search: PstSearch) -> Result<PstResult> {
    if search.t_max.is_nan() || search.t_max <= 0.0 || !search.t_max.is_finite() {
        return Err(Error::invalid("t_max", "must be positive and finite"));
    }
    if search.grid_points < 100 {
        return Err(Error::invalid("grid_points", "at least 100 grid points are required"));
    }
    let n = search.grid_points;
    let step = search.t_max / (n - 1) as f64;
    let objective = |t: f64| evo.min_transfer_amplitude(t);

    let mut best = (0usize, f64::NEG_INFINITY);
    for i in 0..n {
        let value = objective(i as f64 * step);
        if value > best.1 + 1e-12 {
            best = (i, value);
        }
    }
    let lo = best.0.saturating_sub(1) as f64 * step;
    let hi = ((best.0 + 1).min(n - 1)) as f64 * step;
    let (mut time, mut amplitude) = golden_section_max(objective, lo, hi, search.tolerance);
    let grid_time = best.0 as f64 * step;
    if best.1 > amplitude {
        time = grid_time;
        amplitude = best.1;
    }
    // A flat maximum pins `time` only to about √ε; Newton steps on d|a|²/dt of
    // the worst level recover full precision.
    if let Some(polished) = newton_polish(evo, time, lo, hi)? {
        let value = objective(polished);
        if value >= amplitude - 1e-15 {
            time = polished;
            amplitude = value;
        }
    }
    let level_amplitudes = (1..evo.spec().d())
        .map(|level| evo.transfer_amplitude(level, time))
        .collect::<Result<_>>()?;
    Ok(PstResult {
        time,
        amplitude,
        level_amplitudes,
    })
}

fn newton_polish(evo: &Evolution, t0: f64, lo: f64, hi: f64) -> Result<Option<f64>> {
    let worst = (1..evo.spec().d())
        .map(|level| evo.transfer_amplitude(level, t0).map(|a| (level, a)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(level, _)| level);
    let Some(level) = worst else {
        return Ok(None);
    };
    let (from, to) = evo.excitation_endpoints(level)?;
    let slope = |t: f64| {
        let [a, da, dda] = evo.amplitude_with_derivatives(from, to, t);
        let g = 2.0 * (a.conj() * da).re;
        let dg = 2.0 * (da.norm_sqr() + (a.conj() * dda).re);
        (g, dg)
    };
    let mut t = t0;
    for _ in 0..8 {
        let (g, dg) = slope(t);
        if dg >= 0.0 || !dg.is_finite() {
            return Ok(None);
        }
        let next = t - g / dg;
        if !(lo..=hi).contains(&next) {
            return Ok(None);
        }
        if (next - t).abs() <= 1e-15 * t.abs().max(1.0) {
            return Ok(Some(next));
        }
        t = next;
    }
    Ok(Some(t))
}

/// Golden-section maximization of a unimodal function on `[a, b]`.
pub(crate) fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t))
}
