//! Dense complex linear algebra for small chains.
//!
//! Everything here is a pure function of its inputs. Hilbert spaces are
//! ordered with the first tensor factor most significant, so a basis index
//! over local dimensions `[d_0, d_1, …]` is `Σ_s i_s · Π_{s'>s} d_{s'}`.

mod linalg;
mod matrix;

pub use linalg::{hermitian_eigen, matexp_i, singular_values, trace_norm, HermitianEigen};
pub(crate) use linalg::qr_r_factor;
pub use matrix::{ComplexMatrix, HERMITIAN_TOL};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the unit trace of a density matrix.
pub const TRACE_TOL: f64 = 1e-8;

/// Split of a square operator's space into `A ⊗ B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    pub dim_a: usize,
    pub dim_b: usize,
}

impl Bipartition {
    pub fn new(dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::invalid("bipartition", "subsystem dimensions must be positive"));
        }
        Ok(Self { dim_a, dim_b })
    }

    pub fn total(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub(crate) fn check_square(&self, m: &ComplexMatrix) -> Result<()> {
        if !m.is_square() || m.rows() != self.total() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix does not match bipartition {}x{}",
                m.rows(),
                m.cols(),
                self.dim_a,
                self.dim_b
            )));
        }
        Ok(())
    }
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ra, ca) = a.dims();
    let (rb, cb) = b.dims();
    let mut out = ComplexMatrix::zeros(ra * rb, ca * cb);
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[(i, j)];
            if aij == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of a list of operators, left to right.
pub fn kron_all<'a>(ops: impl IntoIterator<Item = &'a ComplexMatrix>) -> Option<ComplexMatrix> {
    ops.into_iter().fold(None, |acc, op| match acc {
        None => Some(op.clone()),
        Some(m) => Some(kron(&m, op)),
    })
}

/// Column-stacking vectorization `[a_11, …, a_m1, a_12, …, a_mn]`.
pub fn vectorize(a: &ComplexMatrix) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.rows() * a.cols());
    for j in 0..a.cols() {
        for i in 0..a.rows() {
            out.push(a[(i, j)]);
        }
    }
    out
}

/// Realignment of a bipartite operator.
///
/// Block `(i, j)` of `rho` (each block `dim_b × dim_b`) becomes row
/// `j·dim_a + i`, laid out as the column-stacked block. Hence
/// `realign(A ⊗ B) = vec(A) · vec(B)^T`.
pub fn realign(rho: &ComplexMatrix, part: Bipartition) -> Result<ComplexMatrix> {
    part.check_square(rho)?;
    let (da, db) = (part.dim_a, part.dim_b);
    let mut out = ComplexMatrix::zeros(da * da, db * db);
    for i in 0..da {
        for j in 0..da {
            let r = j * da + i;
            for k in 0..db {
                for l in 0..db {
                    out[(r, l * db + k)] = rho[(i * db + k, j * db + l)];
                }
            }
        }
    }
    Ok(out)
}

/// Inverse index map of [`realign`].
pub fn unrealign(r: &ComplexMatrix, part: Bipartition) -> Result<ComplexMatrix> {
    let (da, db) = (part.dim_a, part.dim_b);
    if r.dims() != (da * da, db * db) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix is not a realigned {}x{} operator",
            r.rows(),
            r.cols(),
            da,
            db
        )));
    }
    let mut out = ComplexMatrix::zeros(da * db, da * db);
    for i in 0..da {
        for j in 0..da {
            for k in 0..db {
                for l in 0..db {
                    out[(i * db + k, j * db + l)] = r[(j * da + i, l * db + k)];
                }
            }
        }
    }
    Ok(out)
}

fn check_dims(dims: &[usize], n: usize) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::invalid("dims", "local dimensions must be positive"));
    }
    let total = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
    if total != Some(n) {
        return Err(Error::DimensionMismatch(format!(
            "local dimensions {dims:?} do not multiply to {n}"
        )));
    }
    Ok(())
}

/// Row-major strides of a multi-index over `dims`.
fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Flat offsets of every multi-index over the chosen `sites`, enumerated with
/// the first chosen site most significant.
fn offsets(sites: &[usize], dims: &[usize], strides: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &s in sites {
        out = out
            .iter()
            .flat_map(|&base| (0..dims[s]).map(move |v| base + v * strides[s]))
            .collect();
    }
    out
}

/// Reduced operator on the `keep` sites (0-based, returned in ascending site order).
pub fn partial_trace(rho: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    if !rho.is_square() {
        return Err(Error::DimensionMismatch("partial trace of a non-square matrix".into()));
    }
    check_dims(dims, rho.rows())?;
    if keep.is_empty() {
        return Err(Error::invalid("keep", "at least one site must be kept"));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if let Some(&bad) = kept.iter().find(|&&s| s >= dims.len()) {
        return Err(Error::IndexOutOfRange(format!(
            "site {bad} in a {}-site system",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|s| !kept.contains(s)).collect();
    let st = strides(dims);
    let keep_off = offsets(&kept, dims, &st);
    let trace_off = offsets(&traced, dims, &st);

    let n = keep_off.len();
    let mut out = ComplexMatrix::zeros(n, n);
    for (r, &ro) in keep_off.iter().enumerate() {
        for (c, &co) in keep_off.iter().enumerate() {
            out[(r, c)] = trace_off.iter().map(|&t| rho[(ro + t, co + t)]).sum();
        }
    }
    Ok(out)
}

/// Applies a local operator to one site of a state vector in place.
pub fn apply_on_site(op: &ComplexMatrix, site: usize, dims: &[usize], psi: &mut [Complex64]) -> Result<()> {
    check_dims(dims, psi.len())?;
    if site >= dims.len() {
        return Err(Error::IndexOutOfRange(format!("site {site} in a {}-site system", dims.len())));
    }
    let d = dims[site];
    if op.dims() != (d, d) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator on a site of dimension {d}",
            op.rows(),
            op.cols()
        )));
    }
    let inner: usize = dims[site + 1..].iter().product();
    let outer: usize = dims[..site].iter().product();
    let mut buf = vec![Complex64::new(0.0, 0.0); d];
    for o in 0..outer {
        for i in 0..inner {
            let base = o * d * inner + i;
            for (a, slot) in buf.iter_mut().enumerate() {
                *slot = (0..d).map(|b| op[(a, b)] * psi[base + b * inner]).sum();
            }
            for (a, &v) in buf.iter().enumerate() {
                psi[base + a * inner] = v;
            }
        }
    }
    Ok(())
}

/// Checks unit trace of a density matrix within [`TRACE_TOL`].
pub(crate) fn require_unit_trace(rho: &ComplexMatrix) -> Result<()> {
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(Error::TraceNotUnit { trace: tr.re });
    }
    Ok(())
}

/// `tr(ρ²)` of a density matrix.
pub fn purity(rho: &ComplexMatrix) -> Result<f64> {
    if !rho.is_square() {
        return Err(Error::DimensionMismatch("purity of a non-square matrix".into()));
    }
    require_unit_trace(rho)?;
    // tr(ρ²) = Σ_ij ρ_ij ρ_ji
    let n = rho.rows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += rho[(i, j)] * rho[(j, i)];
        }
    }
    Ok(acc.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    #[test]
    fn kron_identity_and_diagonal() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
        let d = ComplexMatrix::from_real_diag(&[1.0, 2.0]);
        assert_eq!(kron(&d, &i2), ComplexMatrix::from_real_diag(&[1.0, 1.0, 2.0, 2.0]));
    }

    #[test]
    fn kron_xx_flips_both_qubits() {
        let xx = kron(&pauli_x(), &pauli_x());
        let ket00 = [c(1.0), c(0.0), c(0.0), c(0.0)];
        assert_eq!(xx.matvec(&ket00).unwrap(), vec![c(0.0), c(0.0), c(0.0), c(1.0)]);
    }

    #[test]
    fn vectorize_is_column_major() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        assert_eq!(vectorize(&a), vec![c(1.0), c(3.0), c(2.0), c(4.0)]);
        assert_eq!(vectorize(&ComplexMatrix::identity(2)), vec![c(1.0), c(0.0), c(0.0), c(1.0)]);
        let row = ComplexMatrix::from_real_rows(&[&[5.0, 6.0, 7.0]]).unwrap();
        assert_eq!(vectorize(&row), vec![c(5.0), c(6.0), c(7.0)]);
    }

    #[test]
    fn realign_rejects_bad_partition() {
        let part = Bipartition::new(2, 3).unwrap();
        assert!(realign(&ComplexMatrix::identity(4), part).is_err());
    }

    #[test]
    fn partial_trace_of_bell_state() {
        let s = 0.5f64.sqrt();
        let psi = [c(s), c(0.0), c(0.0), c(s)];
        let rho = ComplexMatrix::outer(&psi, &psi);
        let reduced = partial_trace(&rho, &[2, 2], &[0]).unwrap();
        assert!(reduced.max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn partial_trace_errors() {
        let rho = ComplexMatrix::identity(4).scale_real(0.25);
        assert!(matches!(partial_trace(&rho, &[2, 2], &[2]), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(partial_trace(&rho, &[2, 3], &[0]), Err(Error::DimensionMismatch(_))));
        assert!(partial_trace(&rho, &[2, 2], &[]).is_err());
    }

    #[test]
    fn apply_on_site_matches_embedding() {
        let dims = [2, 3, 2];
        let op = ComplexMatrix::from_fn(3, 3, |i, j| Complex64::new((i + 2 * j) as f64, i as f64 - j as f64));
        let full = kron_all([&ComplexMatrix::identity(2), &op, &ComplexMatrix::identity(2)]).unwrap();
        let psi: Vec<Complex64> = (0..12).map(|k| Complex64::new(k as f64, 1.0 / (k + 1) as f64)).collect();
        let mut local = psi.clone();
        apply_on_site(&op, 1, &dims, &mut local).unwrap();
        let expected = full.matvec(&psi).unwrap();
        for (a, b) in local.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn purity_values() {
        assert!((purity(&ComplexMatrix::from_real_diag(&[1.0, 0.0])).unwrap() - 1.0).abs() < 1e-15);
        let mixed = ComplexMatrix::identity(3).scale_real(1.0 / 3.0);
        assert!((purity(&mixed).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            purity(&ComplexMatrix::identity(2)),
            Err(Error::TraceNotUnit { .. })
        ));
    }

    #[test]
    fn purity_of_reduced_qutrit_bell_pair() {
        let amp = c(1.0 / 3f64.sqrt());
        let mut psi = vec![c(0.0); 9];
        for i in 0..3 {
            psi[i * 3 + i] = amp;
        }
        let rho = ComplexMatrix::outer(&psi, &psi);
        let reduced = partial_trace(&rho, &[3, 3], &[0]).unwrap();
        assert!((purity(&reduced).unwrap() - 1.0 / 3.0).abs() < 1e-14);
    }
}
