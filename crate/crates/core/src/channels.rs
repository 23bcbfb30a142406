//! Qudit noise: generalized Pauli gates, phase-damping and Weyl channels in
//! Kraus form, embedding onto chain sites, and average channel fidelity.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{kron_all, ComplexMatrix};

/// Tolerance on `Σ E†E = I`.
pub const TP_TOL: f64 = 1e-12;

/// `e^{2πik/d}`.
pub fn root_of_unity(d: usize, k: usize) -> Result<Complex64> {
    if d == 0 || k >= d {
        return Err(Error::IndexOutOfRange(format!("root index {k} for degree {d}")));
    }
    Ok(Complex64::from_polar(1.0, 2.0 * PI * k as f64 / d as f64))
}

fn check_gate_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::invalid("d", format!("gate dimension must be at least 2, got {d}")));
    }
    Ok(())
}

/// Cyclic shift `X|j⟩ = |j ⊕ 1⟩`.
pub fn gate_x(d: usize) -> Result<ComplexMatrix> {
    check_gate_dim(d)?;
    let mut x = ComplexMatrix::zeros(d, d);
    for j in 0..d {
        x[((j + 1) % d, j)] = Complex64::new(1.0, 0.0);
    }
    Ok(x)
}

/// Clock gate `Z|j⟩ = ω^j|j⟩`.
pub fn gate_z(d: usize) -> Result<ComplexMatrix> {
    check_gate_dim(d)?;
    let diag = (0..d).map(|j| root_of_unity(d, j)).collect::<Result<Vec<_>>>()?;
    Ok(ComplexMatrix::from_diag(&diag))
}

fn matrix_power(m: &ComplexMatrix, k: usize) -> ComplexMatrix {
    (0..k).fold(ComplexMatrix::identity(m.rows()), |acc, _| &acc * m)
}

/// Kraus representation `ρ ↦ Σ_k E_k ρ E_k†`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    local_dim: usize,
    kraus: Vec<ComplexMatrix>,
    label: String,
}

impl KrausChannel {
    /// Validates shapes and trace preservation.
    pub fn new(local_dim: usize, kraus: Vec<ComplexMatrix>, label: impl Into<String>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::invalid("kraus", "a channel needs at least one Kraus operator"));
        }
        if let Some(bad) = kraus.iter().find(|k| k.dims() != (local_dim, local_dim)) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} Kraus operator for dimension {local_dim}",
                bad.rows(),
                bad.cols()
            )));
        }
        let ch = Self {
            local_dim,
            kraus,
            label: label.into(),
        };
        let defect = ch.trace_preservation_defect();
        if defect > TP_TOL {
            return Err(Error::invalid("kraus", format!("not trace preserving (defect {defect:e})")));
        }
        Ok(ch)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            local_dim: dim,
            kraus: vec![ComplexMatrix::identity(dim)],
            label: "identity".into(),
        }
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// max |Σ E†E − I|.
    pub fn trace_preservation_defect(&self) -> f64 {
        let n = self.local_dim;
        let mut sum = ComplexMatrix::zeros(n, n);
        for e in &self.kraus {
            sum = &sum + &(&e.dagger() * e);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(n))
    }

    /// Kraus operators that are not identically zero.
    pub fn nonzero_kraus(&self) -> impl Iterator<Item = &ComplexMatrix> {
        self.kraus.iter().filter(|e| e.max_abs() > 0.0)
    }
}

/// Binomial weights `C(d−1, i) ((1−p)/2)^i ((1+p)/2)^{d−1−i}`, `i = 0..d−1`.
pub fn phase_damping_weights(d: usize, p: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("p", format!("damping parameter {p} outside [0, 1]")));
    }
    if d == 0 {
        return Err(Error::invalid("d", "dimension must be positive"));
    }
    let n = d - 1;
    let (q, r) = ((1.0 - p) / 2.0, (1.0 + p) / 2.0);
    let mut binom = 1.0;
    Ok((0..d)
        .map(|i| {
            let w = binom * q.powi(i as i32) * r.powi((n - i) as i32);
            binom = binom * (n - i) as f64 / (i + 1) as f64;
            w
        })
        .collect())
}

/// Phase damping with Kraus operators `√w_i · Z^i`, `i = 0..d−1`.
pub fn phase_damping(d: usize, p: f64) -> Result<KrausChannel> {
    let weights = phase_damping_weights(d, p)?;
    let z = gate_z(d)?;
    let kraus = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| matrix_power(&z, i).scale_real(w.sqrt()))
        .collect();
    KrausChannel::new(d, kraus, format!("phase_damping(d={d}, p={p})"))
}

/// Probabilities `π_{m,n}` of the Weyl operators `Z^n X^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylSpec {
    pi: Vec<Vec<f64>>,
}

impl WeylSpec {
    /// `pi[m][n]` must be a `d × d` probability table.
    pub fn new(pi: Vec<Vec<f64>>) -> Result<Self> {
        let d = pi.len();
        if d < 2 || pi.iter().any(|row| row.len() != d) {
            return Err(Error::invalid("pi", "must be a square table of size at least 2"));
        }
        if pi.iter().flatten().any(|&x| !(0.0..=1.0).contains(&x)) {
            return Err(Error::invalid("pi", "entries must lie in [0, 1]"));
        }
        let total: f64 = pi.iter().flatten().sum();
        if (total - 1.0).abs() > TP_TOL {
            return Err(Error::invalid("pi", format!("entries sum to {total}, not 1")));
        }
        Ok(Self { pi })
    }

    pub fn dim(&self) -> usize {
        self.pi.len()
    }

    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.pi[m][n]
    }
}

/// Weyl channel with Kraus operators `√π_{m,n} Z^n X^m`, ordered by `(m, n)`.
pub fn weyl_channel(spec: &WeylSpec) -> Result<KrausChannel> {
    let d = spec.dim();
    let x = gate_x(d)?;
    let z = gate_z(d)?;
    let mut kraus = Vec::with_capacity(d * d);
    for m in 0..d {
        let xm = matrix_power(&x, m);
        for n in 0..d {
            let op = &matrix_power(&z, n) * &xm;
            kraus.push(op.scale_real(spec.get(m, n).sqrt()));
        }
    }
    KrausChannel::new(d, kraus, format!("weyl(d={d})"))
}

/// Product channel acting with `ch` on each listed site of a system with
/// local dimensions `dims`; identity elsewhere.
pub fn embed_channel(ch: &KrausChannel, sites: &[usize], dims: &[usize]) -> Result<KrausChannel> {
    if sites.is_empty() {
        return Err(Error::invalid("sites", "at least one site is required"));
    }
    let mut sorted = sites.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != sites.len() {
        return Err(Error::invalid("sites", "sites must be distinct"));
    }
    for &s in &sorted {
        match dims.get(s) {
            None => return Err(Error::IndexOutOfRange(format!("site {s} in a {}-site system", dims.len()))),
            Some(&d) if d != ch.local_dim() => {
                return Err(Error::DimensionMismatch(format!(
                    "channel of dimension {} on site {s} of dimension {d}",
                    ch.local_dim()
                )))
            }
            _ => {}
        }
    }
    let identities: Vec<ComplexMatrix> = dims.iter().map(|&d| ComplexMatrix::identity(d)).collect();
    // Enumerate all assignments of one Kraus element per target site.
    let mut choices: Vec<Vec<usize>> = vec![vec![]];
    for _ in &sorted {
        choices = choices
            .into_iter()
            .flat_map(|prefix| {
                (0..ch.kraus().len()).map(move |k| {
                    let mut next = prefix.clone();
                    next.push(k);
                    next
                })
            })
            .collect();
    }
    let kraus = choices
        .iter()
        .map(|choice| {
            let ops = dims.iter().enumerate().map(|(s, _)| {
                sorted
                    .iter()
                    .position(|&t| t == s)
                    .map_or(&identities[s], |pos| &ch.kraus()[choice[pos]])
            });
            kron_all(ops).expect("non-empty system")
        })
        .collect();
    let total = dims.iter().product();
    KrausChannel::new(total, kraus, format!("{} on sites {sorted:?}", ch.label()))
}

/// `Σ_k E_k ρ E_k†`.
pub fn apply_channel(rho: &ComplexMatrix, ch: &KrausChannel) -> Result<ComplexMatrix> {
    if rho.dims() != (ch.local_dim(), ch.local_dim()) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} state for a channel of dimension {}",
            rho.rows(),
            rho.cols(),
            ch.local_dim()
        )));
    }
    let n = ch.local_dim();
    let mut out = ComplexMatrix::zeros(n, n);
    for e in ch.nonzero_kraus() {
        out = &out + &e.conjugate(rho)?;
    }
    Ok(out)
}

/// Average fidelity `(tr Σ M†M + Σ |tr M|²) / (n(n+1))` with `M_k = U† E_k`.
pub fn average_fidelity(u: &ComplexMatrix, ch: &KrausChannel) -> Result<f64> {
    let n = ch.local_dim();
    if u.dims() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} unitary for a channel of dimension {n}",
            u.rows(),
            u.cols()
        )));
    }
    // tr(U†E) = Σ_ij conj(U_ij) E_ij and tr(E†U U†E) = ‖E‖_F².
    let mut gram = 0.0;
    let mut overlaps = 0.0;
    for e in ch.kraus() {
        gram += e.data().iter().map(|x| x.norm_sqr()).sum::<f64>();
        let tr: Complex64 = u.data().iter().zip(e.data()).map(|(a, b)| a.conj() * b).sum();
        overlaps += tr.norm_sqr();
    }
    let nf = n as f64;
    Ok((gram + overlaps) / (nf * (nf + 1.0)))
}

/// `(1/15)(3p² + |p² − 1| + 4p + 3)`, the printed two-qutrit expression.
pub fn analytic_favg_2qutrit(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("p", format!("damping parameter {p} outside [0, 1]")));
    }
    Ok((3.0 * p * p + (p * p - 1.0).abs() + 4.0 * p + 3.0) / 15.0)
}

/// Haar-random pure state: a normalized vector of i.i.d. standard complex Gaussians.
pub fn haar_random_state<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
            .collect();
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Sample mean of `⟨ψ| U† 𝓔(|ψ⟩⟨ψ|) U |ψ⟩ = Σ_k |⟨Uψ| E_k |ψ⟩|²` over Haar-random `ψ`.
pub fn monte_carlo_fidelity(u: &ComplexMatrix, ch: &KrausChannel, samples: usize, seed: u64) -> Result<MonteCarloEstimate> {
    let n = ch.local_dim();
    if u.dims() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} unitary for a channel of dimension {n}",
            u.rows(),
            u.cols()
        )));
    }
    if samples < 2 {
        return Err(Error::invalid("samples", "at least two samples are required"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kraus: Vec<&ComplexMatrix> = ch.nonzero_kraus().collect();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let psi = haar_random_state(n, &mut rng);
        let target = u.matvec(&psi)?;
        let mut f = 0.0;
        for e in &kraus {
            let out = e.matvec(&psi)?;
            let overlap: Complex64 = target.iter().zip(&out).map(|(a, b)| a.conj() * b).sum();
            f += overlap.norm_sqr();
        }
        sum += f;
        sum_sq += f * f;
    }
    let m = samples as f64;
    let mean = sum / m;
    let var = ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0);
    Ok(MonteCarloEstimate {
        mean,
        std_error: (var / m).sqrt(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn roots_of_unity() {
        assert!((root_of_unity(4, 1).unwrap() - c(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(root_of_unity(3, 0).unwrap(), c(1.0, 0.0));
        assert!((root_of_unity(3, 1).unwrap().powu(3) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(root_of_unity(3, 3).is_err());
    }

    #[test]
    fn qubit_gates_are_paulis() {
        assert_eq!(gate_x(2).unwrap(), ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap());
        assert!(gate_z(2).unwrap().max_abs_diff(&ComplexMatrix::from_real_diag(&[1.0, -1.0])) < 1e-15);
        assert!(gate_x(1).is_err());
    }

    #[test]
    fn qutrit_clock_gate() {
        let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        let z = gate_z(3).unwrap();
        assert!(z.max_abs_diff(&ComplexMatrix::from_diag(&[c(1.0, 0.0), w, w * w])) < 1e-15);
    }

    #[test]
    fn weyl_commutation_and_order() {
        for d in 2..=5 {
            let x = gate_x(d).unwrap();
            let z = gate_z(d).unwrap();
            let w = root_of_unity(d, 1).unwrap();
            assert!((&z * &x).max_abs_diff(&(&x * &z).scale(w)) < 1e-12);
            let id = ComplexMatrix::identity(d);
            assert!(matrix_power(&x, d).max_abs_diff(&id) < 1e-12);
            assert!(matrix_power(&z, d).max_abs_diff(&id) < 1e-12);
        }
    }

    #[test]
    fn phase_damping_endpoints() {
        let ch = phase_damping(3, 1.0).unwrap();
        assert!(ch.kraus()[0].max_abs_diff(&ComplexMatrix::identity(3)) == 0.0);
        assert!(ch.kraus()[1..].iter().all(|e| e.max_abs() == 0.0));

        let w = phase_damping_weights(3, 0.0).unwrap();
        assert_eq!(w, vec![0.25, 0.5, 0.25]);
        assert!(phase_damping(3, 1.5).is_err());
        assert!(phase_damping(3, -0.1).is_err());
    }

    #[test]
    fn qubit_phase_damping_matches_direct_form() {
        let p = 0.3;
        let ch = phase_damping(2, p).unwrap();
        let e0 = ComplexMatrix::identity(2).scale_real(((1.0 + p) / 2.0).sqrt());
        let e1 = ComplexMatrix::from_real_diag(&[1.0, -1.0]).scale_real(((1.0 - p) / 2.0).sqrt());
        assert!(ch.kraus()[0].max_abs_diff(&e0) < 1e-15);
        assert!(ch.kraus()[1].max_abs_diff(&e1) < 1e-15);
    }

    #[test]
    fn dephasing_plus_state_to_mixed() {
        let s = 0.5f64.sqrt();
        let plus = [c(s, 0.0), c(s, 0.0)];
        let rho = ComplexMatrix::outer(&plus, &plus);
        let out = apply_channel(&rho, &phase_damping(2, 0.0).unwrap()).unwrap();
        assert!(out.max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn channel_validation() {
        let bad = vec![ComplexMatrix::identity(2).scale_real(0.5)];
        assert!(KrausChannel::new(2, bad, "bad").is_err());
        assert!(KrausChannel::new(2, vec![ComplexMatrix::identity(3)], "bad").is_err());
        assert!(KrausChannel::new(2, vec![], "empty").is_err());
        let rho = ComplexMatrix::identity(3).scale_real(1.0 / 3.0);
        assert!(apply_channel(&rho, &KrausChannel::identity(2)).is_err());
    }

    #[test]
    fn weyl_spec_validation() {
        assert!(WeylSpec::new(vec![vec![0.5, 0.5], vec![0.0, 0.1]]).is_err());
        assert!(WeylSpec::new(vec![vec![1.0, 0.0]]).is_err());
        assert!(WeylSpec::new(vec![vec![1.5, -0.5], vec![0.0, 0.0]]).is_err());
    }

    #[test]
    fn weyl_point_mass_is_identity() {
        let mut pi = vec![vec![0.0; 3]; 3];
        pi[0][0] = 1.0;
        let ch = weyl_channel(&WeylSpec::new(pi).unwrap()).unwrap();
        let ops: Vec<_> = ch.nonzero_kraus().collect();
        assert_eq!(ops.len(), 1);
        assert!(ops[0].max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);
    }

    #[test]
    fn uniform_weyl_fixes_maximally_mixed_state() {
        let d = 3;
        let pi = vec![vec![1.0 / 9.0; d]; d];
        let ch = weyl_channel(&WeylSpec::new(pi).unwrap()).unwrap();
        let mixed = ComplexMatrix::identity(d).scale_real(1.0 / 3.0);
        assert!(apply_channel(&mixed, &ch).unwrap().max_abs_diff(&mixed) < 1e-15);
        assert!(ch.trace_preservation_defect() < 1e-12);
    }

    #[test]
    fn embed_two_qutrit_sites() {
        let ch = phase_damping(3, 0.4).unwrap();
        let both = embed_channel(&ch, &[0, 1], &[3, 3]).unwrap();
        assert_eq!(both.kraus().len(), 9);
        assert!(both.trace_preservation_defect() < 1e-12);
        assert!(embed_channel(&ch, &[2], &[3, 3]).is_err());
        assert!(embed_channel(&ch, &[0], &[2, 3]).is_err());
        assert!(embed_channel(&ch, &[0, 0], &[3, 3]).is_err());
    }

    #[test]
    fn fidelity_formula_edge_cases() {
        let id = KrausChannel::identity(4);
        assert!((average_fidelity(&ComplexMatrix::identity(4), &id).unwrap() - 1.0).abs() < 1e-15);
        // Traceless unitary: n / (n(n+1)).
        let x = gate_x(4).unwrap();
        assert!((average_fidelity(&x, &id).unwrap() - 0.2).abs() < 1e-15);
        assert!(average_fidelity(&ComplexMatrix::identity(3), &id).is_err());
    }

    #[test]
    fn analytic_two_qutrit_values() {
        assert!((analytic_favg_2qutrit(1.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((analytic_favg_2qutrit(0.0).unwrap() - 4.0 / 15.0).abs() < 1e-15);
        assert!((analytic_favg_2qutrit(0.85).unwrap() - 0.589_666_666_666_666_6).abs() < 1e-12);
        assert!(analytic_favg_2qutrit(1.1).is_err());
    }

    #[test]
    fn haar_states_are_normalized_and_seeded() {
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        let x = haar_random_state(5, &mut a);
        let y = haar_random_state(5, &mut b);
        assert_eq!(x, y);
        assert!((x.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-14);
    }
}
