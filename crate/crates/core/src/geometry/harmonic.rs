use nalgebra::{DMatrix, DVector};

use super::lbo::LboPair;
use crate::error::Result;
use crate::linalg::sorted_eigen;

/// Generalized eigenpairs of `Q H = -lambda B H`, ascending in `lambda`, with
/// B-orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicBasis {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl HarmonicBasis {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `max_ij |(H^T B H - I)_ij|` row-summed (induced infinity norm).
    pub fn orthonormality_residual(&self, mass: &DVector<f64>) -> f64 {
        let h = &self.eigenvectors;
        let bh = DMatrix::from_fn(h.nrows(), h.ncols(), |r, c| mass[r] * h[(r, c)]);
        let g = h.transpose() * bh - DMatrix::identity(h.ncols(), h.ncols());
        crate::linalg::inf_norm_real(&g)
    }
}

/// Solves the generalized problem through the symmetric reduction
/// `B^{-1/2} (-Q) B^{-1/2} Y = lambda Y`, `H = B^{-1/2} Y`.
///
/// Each column is signed so that its largest-magnitude entry (lowest index
/// on ties) is positive.
pub fn solve_harmonic_basis(lbo: &LboPair) -> Result<HarmonicBasis> {
    let n = lbo.len();
    let inv_half = lbo.mass.map(|b| 1.0 / b.sqrt());
    let mut m = DMatrix::from_fn(n, n, |i, j| -lbo.stiffness[(i, j)] * inv_half[i] * inv_half[j]);
    // guard against asymmetric roundoff in the scaling
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = s;
            m[(j, i)] = s;
        }
    }
    let (eigenvalues, y) = sorted_eigen(m)?;
    let mut h = DMatrix::from_fn(n, n, |i, k| inv_half[i] * y[(i, k)]);
    for mut col in h.column_iter_mut() {
        let mut best = 0;
        for i in 1..n {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
    }
    Ok(HarmonicBasis { eigenvalues, eigenvectors: h })
}
