use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::matrix::{ComplexMatrix, HERMITIAN_TOL};
use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 100_000;

/// Spectral decomposition `H = V diag(values) V†` of a Hermitian matrix.
///
/// Eigenvalues are sorted ascending; column `k` of `vectors` belongs to `values[k]`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// Reassembles `V f(Λ) V†` for an arbitrary complex function of the spectrum.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let n = self.values.len();
        let weights: Vec<Complex64> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for k in 0..n {
                let vik = v[(i, k)] * weights[k];
                if vik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        out
    }
}

/// Relative Hermiticity check shared by the eigensolver and the exponential.
pub(crate) fn require_hermitian(h: &ComplexMatrix) -> Result<()> {
    let deviation = h.hermitian_deviation();
    if deviation > HERMITIAN_TOL * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<HermitianEigen> {
    require_hermitian(h)?;
    if !h.is_finite() {
        return Err(Error::Numerical("non-finite matrix entries".into()));
    }
    let eig = SymmetricEigen::try_new(h.to_nalgebra(), f64::EPSILON, MAX_ITERATIONS)
        .ok_or_else(|| Error::Numerical("Hermitian eigensolver did not converge".into()))?;

    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let n = order.len();
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Singular values in descending order.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    if !a.is_finite() {
        return Err(Error::Numerical("non-finite matrix entries".into()));
    }
    let svd = a
        .to_nalgebra()
        .try_svd(false, false, f64::EPSILON, MAX_ITERATIONS)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let mut values: Vec<f64> = svd.singular_values.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Nuclear (trace) norm: the sum of all singular values.
pub fn trace_norm(a: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(a)?.iter().sum())
}

/// `e^{−i·s·H}` for Hermitian `H`, via `V e^{−i s Λ} V†`.
///
/// Non-Hermitian input is rejected rather than handed to a general exponential.
pub fn matexp_i(h: &ComplexMatrix, s: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eigen(h)?;
    Ok(eig.map_spectrum(|l| Complex64::from_polar(1.0, -s * l)))
}

/// Upper-triangular factor `R` of a thin QR decomposition `A = Q R`.
pub(crate) fn qr_r_factor(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.clone().qr().r()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::from_real_diag(&[1.0, -1.0])
    }

    #[test]
    fn exponential_of_zero_is_identity() {
        let u = matexp_i(&ComplexMatrix::zeros(4, 4), 1.7).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn exponential_of_pauli_z_at_pi() {
        let u = matexp_i(&pauli_z(), PI).unwrap();
        let expected = ComplexMatrix::from_diag(&[
            Complex64::from_polar(1.0, -PI),
            Complex64::from_polar(1.0, PI),
        ]);
        assert!(u.max_abs_diff(&expected) < 1e-15);
        assert!(u.max_abs_diff(&ComplexMatrix::identity(2).scale_real(-1.0)) < 1e-15);
    }

    #[test]
    fn exponential_rejects_non_hermitian() {
        let m = ComplexMatrix::new(2, 2, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        assert!(matches!(matexp_i(&m, 1.0), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn trace_norm_basic_cases() {
        assert!((trace_norm(&ComplexMatrix::from_real_diag(&[1.0, -2.0])).unwrap() - 3.0).abs() < 1e-14);
        assert_eq!(trace_norm(&ComplexMatrix::zeros(3, 3)).unwrap(), 0.0);
    }

    #[test]
    fn trace_norm_rejects_nan() {
        let mut m = ComplexMatrix::identity(2);
        m[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(trace_norm(&m), Err(Error::Numerical(_))));
    }

    #[test]
    fn eigen_reconstructs_input() {
        let h = ComplexMatrix::new(
            3,
            3,
            vec![
                c(1.0, 0.0),
                c(0.5, 0.2),
                c(0.0, -1.0),
                c(0.5, -0.2),
                c(-2.0, 0.0),
                c(0.3, 0.0),
                c(0.0, 1.0),
                c(0.3, 0.0),
                c(0.7, 0.0),
            ],
        )
        .unwrap();
        let eig = hermitian_eigen(&h).unwrap();
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        let back = eig.map_spectrum(|l| c(l, 0.0));
        assert!(back.max_abs_diff(&h) < 1e-13);
    }
}
