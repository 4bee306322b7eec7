//! Dense complex linear-algebra helpers shared by the model, the propagators
//! and the master-equation solver.

use nalgebra::linalg::{Schur, SymmetricEigen};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest elementwise modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest elementwise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Induced 1-norm (maximum absolute column sum).
pub fn one_norm(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn norm_sqr(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()) * c(0.5);
    let mut vals: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    vals
}

/// Trace distance `½‖a − b‖₁` between two Hermitian matrices.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    0.5 * hermitian_eigenvalues(&(a - b)).iter().map(|v| v.abs()).sum::<f64>()
}

/// Right eigendecomposition `m = V diag(λ) V⁻¹` of a general complex matrix.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: CVector,
    pub vectors: CMatrix,
    pub inverse: CMatrix,
    /// 1-norm condition number estimate of `vectors`.
    pub condition: f64,
    /// `‖V Λ V⁻¹ − m‖_max`.
    pub reconstruction_error: f64,
}

/// Computes the eigendecomposition through the complex Schur form
/// `m = Q T Q*`, solving `(T − λ_k) y = 0` by back-substitution for every
/// diagonal entry of `T`.
pub fn eigen_decompose(m: &CMatrix) -> Result<EigenDecomposition> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Numerical("eigendecomposition of a non-square matrix".into()));
    }
    if n == 0 {
        let empty = CMatrix::zeros(0, 0);
        return Ok(EigenDecomposition {
            values: CVector::zeros(0),
            vectors: empty.clone(),
            inverse: empty,
            condition: 1.0,
            reconstruction_error: 0.0,
        });
    }

    let schur = Schur::try_new(m.clone(), f64::EPSILON, 10_000 * n)
        .ok_or_else(|| Error::Numerical("complex Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();

    let scale = max_abs(&t).max(f64::MIN_POSITIVE);
    let smin = (f64::EPSILON * scale).max(f64::MIN_POSITIVE);
    let values = CVector::from_iterator(n, (0..n).map(|k| t[(k, k)]));

    let mut y = CMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = c(1.0);
        for i in (0..k).rev() {
            let mut s = C64::new(0.0, 0.0);
            for j in (i + 1)..=k {
                s += t[(i, j)] * y[(j, k)];
            }
            let mut d = t[(i, i)] - lambda;
            if d.norm() < smin {
                d = c(smin);
            }
            y[(i, k)] = -s / d;
        }
    }

    let mut vectors = q * y;
    for mut col in vectors.column_iter_mut() {
        let nrm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm > 0.0 {
            col.iter_mut().for_each(|z| *z /= nrm);
        }
    }

    let inverse = vectors
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("eigenvector matrix is singular".into()))?;
    let condition = one_norm(&vectors) * one_norm(&inverse);

    let mut scaled = vectors.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= values[k];
    }
    let reconstruction_error = max_abs_diff(&(scaled * &inverse), m);

    Ok(EigenDecomposition {
        values,
        vectors,
        inverse,
        condition,
        reconstruction_error,
    })
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}
