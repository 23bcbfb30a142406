//! Generators of SU(d): symmetric `Θ^{k,j}`, antisymmetric `β^{k,j}` and
//! diagonal `η^{r,r}` matrices built from the projectors `P^{k,j} = |k⟩⟨j|`.
//!
//! Levels are 1-based here (`1..=d`); level `k` is computational basis index `k − 1`.
//! `P^{k,j}` carries its single unit entry at row `k`, column `j`. The transposed
//! convention only flips the sign of every `β`, which cancels in `β ⊗ β`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::invalid("d", format!("local dimension must be at least 2, got {d}")));
    }
    Ok(())
}

fn check_level(level: usize, d: usize) -> Result<()> {
    if level == 0 || level > d {
        return Err(Error::IndexOutOfRange(format!("level {level} outside 1..={d}")));
    }
    Ok(())
}

fn check_pair(k: usize, j: usize, d: usize) -> Result<()> {
    check_dim(d)?;
    check_level(k, d)?;
    check_level(j, d)?;
    if k >= j {
        return Err(Error::invalid("k", format!("need k < j, got k={k}, j={j}")));
    }
    Ok(())
}

pub fn projector(k: usize, j: usize, d: usize) -> Result<ComplexMatrix> {
    check_level(k, d)?;
    check_level(j, d)?;
    let mut p = ComplexMatrix::zeros(d, d);
    p[(k - 1, j - 1)] = Complex64::new(1.0, 0.0);
    Ok(p)
}

/// `Θ^{k,j} = P^{k,j} + P^{j,k}`.
pub fn theta(k: usize, j: usize, d: usize) -> Result<ComplexMatrix> {
    check_pair(k, j, d)?;
    Ok(&projector(k, j, d)? + &projector(j, k, d)?)
}

/// `β^{k,j} = −i (P^{k,j} − P^{j,k})`.
pub fn beta(k: usize, j: usize, d: usize) -> Result<ComplexMatrix> {
    check_pair(k, j, d)?;
    Ok((&projector(k, j, d)? - &projector(j, k, d)?).scale(Complex64::new(0.0, -1.0)))
}

/// `η^{r,r} = √(2/(r(r+1))) [Σ_{j≤r} P^{j,j} − r P^{r+1,r+1}]`.
pub fn eta(r: usize, d: usize) -> Result<ComplexMatrix> {
    check_dim(d)?;
    if r == 0 || r >= d {
        return Err(Error::IndexOutOfRange(format!("r = {r} outside 1..={}", d - 1)));
    }
    let norm = (2.0 / (r * (r + 1)) as f64).sqrt();
    let mut diag = vec![0.0; d];
    for v in diag.iter_mut().take(r) {
        *v = norm;
    }
    diag[r] = -(r as f64) * norm;
    Ok(ComplexMatrix::from_real_diag(&diag))
}

/// All `d² − 1` generators, grouped by family.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    pub d: usize,
    /// `((k, j), Θ^{k,j})` for `1 ≤ k < j ≤ d`, lexicographic in `(k, j)`.
    pub thetas: Vec<((usize, usize), ComplexMatrix)>,
    /// Same indexing as `thetas`.
    pub betas: Vec<((usize, usize), ComplexMatrix)>,
    /// `η^{r,r}` for `r = 1..d−1`, in order.
    pub etas: Vec<ComplexMatrix>,
}

impl GeneratorSet {
    pub fn new(d: usize) -> Result<Self> {
        check_dim(d)?;
        let pairs: Vec<(usize, usize)> = (1..=d)
            .flat_map(|k| (k + 1..=d).map(move |j| (k, j)))
            .collect();
        let thetas = pairs
            .iter()
            .map(|&(k, j)| theta(k, j, d).map(|m| ((k, j), m)))
            .collect::<Result<_>>()?;
        let betas = pairs
            .iter()
            .map(|&(k, j)| beta(k, j, d).map(|m| ((k, j), m)))
            .collect::<Result<_>>()?;
        let etas = (1..d).map(|r| eta(r, d)).collect::<Result<_>>()?;
        Ok(Self { d, thetas, betas, etas })
    }

    pub fn len(&self) -> usize {
        self.thetas.len() + self.betas.len() + self.etas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Thetas, then betas, then etas.
    pub fn iter(&self) -> impl Iterator<Item = &ComplexMatrix> {
        self.thetas
            .iter()
            .map(|(_, m)| m)
            .chain(self.betas.iter().map(|(_, m)| m))
            .chain(self.etas.iter())
    }
}

pub fn generator_set(d: usize) -> Result<GeneratorSet> {
    GeneratorSet::new(d)
}

/// Largest deviation of `tr(G_a G_b)` from `2 δ_ab` over the whole set.
pub fn orthogonality_defect(set: &GeneratorSet) -> f64 {
    let gens: Vec<&ComplexMatrix> = set.iter().collect();
    let mut worst: f64 = 0.0;
    for (a, ga) in gens.iter().enumerate() {
        for (b, gb) in gens.iter().enumerate() {
            let target = if a == b { 2.0 } else { 0.0 };
            let tr = (*ga * *gb).trace();
            worst = worst.max((tr - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}
