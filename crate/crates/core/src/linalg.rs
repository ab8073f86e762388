//! Dense linear-algebra helpers built on nalgebra.

use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Complex dense matrix used for signals, spectra and transform factors.
pub type CMatrix = DMatrix<Complex64>;
/// Complex dense vector.
pub type CVector = DVector<Complex64>;

/// Two cosines closer than this belong to the same invariant subspace of an
/// orthogonal matrix.
const CLUSTER_TOL: f64 = 1e-9;

/// Induced infinity norm (maximum absolute row sum) of a complex matrix.
pub fn inf_norm(m: &CMatrix) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Induced infinity norm of a real matrix.
pub fn inf_norm_real(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn to_complex_vec(v: &DVector<f64>) -> CVector {
    v.map(|x| Complex64::new(x, 0.0))
}

/// Argument on the principal branch `(-pi, pi]`.
///
/// A negative real number (including one carrying a `-0.0` imaginary part)
/// maps to `+pi`.
pub fn principal_arg(w: Complex64) -> f64 {
    if w.im == 0.0 && w.re < 0.0 {
        PI
    } else {
        w.im.atan2(w.re)
    }
}

/// Symmetric/Hermitian eigendecomposition with eigenvalues sorted ascending
/// (ties keep the solver's order) and eigenvector columns permuted to match.
pub fn sorted_eigen<T>(m: DMatrix<T>) -> Result<(DVector<f64>, DMatrix<T>)>
where
    T: ComplexField<RealField = f64>,
{
    let n = m.nrows();
    if n == 0 {
        return Ok((DVector::zeros(0), m));
    }
    let max_iter = 200 * n.max(10);
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, max_iter).ok_or_else(|| {
        Error::EigensolveFailure(format!("no convergence after {max_iter} sweeps (n = {n})"))
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .total_cmp(&eig.eigenvalues[b])
            .then(a.cmp(&b))
    });
    if order.iter().any(|&i| !eig.eigenvalues[i].is_finite()) {
        return Err(Error::EigensolveFailure("non-finite eigenvalue".into()));
    }
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])].clone());
    Ok((values, vectors))
}

/// Unitary eigendecomposition `F = V diag(omega) V*` of a real orthogonal
/// matrix.
///
/// The symmetric part `(F + F^T)/2` is diagonalized first; its eigenvalues
/// are the cosines of the eigen-angles and each cluster of equal cosines
/// spans an invariant subspace of `F`. Inside every cluster the skew part is
/// a real skew-symmetric block whose Hermitian companion `-iK` separates the
/// conjugate partners. `V` is unitary by construction.
pub fn orthogonal_eigen(f: &DMatrix<f64>) -> Result<(CMatrix, CVector)> {
    let n = f.nrows();
    if f.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: f.ncols() });
    }
    let ft = f.transpose();
    let sym = (f + &ft) * 0.5;
    let skew = (f - &ft) * 0.5;
    let (cosines, z) = sorted_eigen(sym)?;
    let kz = &skew * &z;

    let mut v = CMatrix::zeros(n, n);
    let mut omega = CVector::zeros(n);
    let mut col = 0;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && cosines[end] - cosines[end - 1] <= CLUSTER_TOL {
            end += 1;
        }
        let m = end - start;
        let zc = z.columns(start, m);
        let kc = zc.transpose() * kz.columns(start, m);
        let g = DMatrix::from_fn(m, m, |r, c| {
            let k = 0.5 * (kc[(r, c)] - kc[(c, r)]);
            Complex64::new(0.0, -k)
        });
        let (sines, u) = sorted_eigen(g)?;
        for k in 0..m {
            let uk = u.column(k);
            let cosine: f64 = (0..m).map(|j| uk[j].norm_sqr() * cosines[start + j]).sum();
            let w = Complex64::new(cosine, sines[k]);
            let modulus = w.norm();
            if !(modulus > 0.5) {
                return Err(Error::NotOrthogonal { residual: (1.0 - modulus).abs() });
            }
            omega[col] = w / modulus;
            for row in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..m {
                    acc += uk[j] * zc[(row, j)];
                }
                v[(row, col)] = acc;
            }
            col += 1;
        }
        start = end;
    }
    Ok((v, omega))
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> DVector<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return DVector::zeros(0);
    }
    let mut s = SVD::new(m.clone(), false, false).singular_values;
    s.as_mut_slice().sort_by(|a, b| b.total_cmp(a));
    s
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(m: &CMatrix) -> f64 {
    singular_values(m).iter().copied().fold(0.0, f64::max)
}

/// Moore-Penrose pseudo-inverse together with the extreme singular values
/// `(sigma_min, sigma_max)`, where `sigma_min` is the smallest of the
/// `min(rows, cols)` singular values.
pub fn pseudo_inverse(m: &CMatrix) -> (CMatrix, f64, f64) {
    let svd = SVD::new(m.clone(), true, true);
    let s = &svd.singular_values;
    let smax = s.iter().copied().fold(0.0, f64::max);
    let smin = s.iter().copied().fold(f64::INFINITY, f64::min);
    let u = svd.u.as_ref().expect("requested U");
    let vt = svd.v_t.as_ref().expect("requested V^T");
    let cutoff = smax * f64::EPSILON * (m.nrows().max(m.ncols()) as f64);
    // pinv = V diag(1/s) U^H
    let mut pinv = CMatrix::zeros(m.ncols(), m.nrows());
    for k in 0..s.len() {
        if s[k] <= cutoff {
            continue;
        }
        let inv = 1.0 / s[k];
        for r in 0..m.ncols() {
            let vr = vt[(k, r)].conj() * inv;
            for c in 0..m.nrows() {
                pinv[(r, c)] += vr * u[(c, k)].conj();
            }
        }
    }
    (pinv, smin, smax)
}

/// Smallest of the `min(rows, cols)` singular values.
pub fn sigma_min(m: &CMatrix) -> f64 {
    singular_values(m).iter().copied().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_orthogonal(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        a.qr().q()
    }

    fn reconstruct(v: &CMatrix, omega: &CVector) -> CMatrix {
        let mut scaled = v.clone();
        for (k, mut c) in scaled.column_iter_mut().enumerate() {
            c *= omega[k];
        }
        scaled * v.adjoint()
    }

    #[test]
    fn principal_branch_sends_minus_one_to_plus_pi() {
        assert_eq!(principal_arg(Complex64::new(-1.0, 0.0)), PI);
        assert_eq!(principal_arg(Complex64::new(-1.0, -0.0)), PI);
        assert!(principal_arg(Complex64::new(-1.0, -1e-3)) < 0.0);
    }

    #[test]
    fn orthogonal_eigen_of_random_orthogonal() {
        for (n, seed) in [(1, 1), (2, 2), (7, 3), (30, 4)] {
            let f = random_orthogonal(n, seed);
            let (v, omega) = orthogonal_eigen(&f).unwrap();
            let unit = v.adjoint() * &v - CMatrix::identity(n, n);
            assert!(inf_norm(&unit) < 1e-10, "n={n}");
            assert!(omega.iter().all(|w| (w.norm() - 1.0).abs() < 1e-12));
            let err = inf_norm(&(reconstruct(&v, &omega) - to_complex(&f)));
            assert!(err < 1e-9, "n={n} err={err}");
        }
    }

    #[test]
    fn orthogonal_eigen_of_cyclic_shift() {
        // eigenvalues are the fourth roots of unity
        let p = DMatrix::from_fn(4, 4, |r, c| if (r + 1) % 4 == c { 1.0 } else { 0.0 });
        let (v, omega) = orthogonal_eigen(&p).unwrap();
        let err = inf_norm(&(reconstruct(&v, &omega) - to_complex(&p)));
        assert!(err < 1e-12);
        for w in omega.iter() {
            assert!((w.powi(4) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn orthogonal_eigen_handles_repeated_angles() {
        // block-diagonal rotations sharing one angle, then mixed by a random
        // orthogonal similarity
        let n = 8;
        let theta: f64 = 0.7;
        let mut r = DMatrix::zeros(n, n);
        for b in 0..3 {
            let i = 2 * b;
            r[(i, i)] = theta.cos();
            r[(i, i + 1)] = -theta.sin();
            r[(i + 1, i)] = theta.sin();
            r[(i + 1, i + 1)] = theta.cos();
        }
        r[(6, 6)] = -1.0;
        r[(7, 7)] = 1.0;
        let q = random_orthogonal(n, 9);
        let f = &q * r * q.transpose();
        let (v, omega) = orthogonal_eigen(&f).unwrap();
        assert!(inf_norm(&(v.adjoint() * &v - CMatrix::identity(n, n))) < 1e-10);
        assert!(inf_norm(&(reconstruct(&v, &omega) - to_complex(&f))) < 1e-10);
    }

    #[test]
    fn pseudo_inverse_is_left_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = CMatrix::from_fn(7, 3, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let (p, smin, smax) = pseudo_inverse(&a);
        assert!(smin > 0.0 && smax >= smin);
        assert!(inf_norm(&(p * &a - CMatrix::identity(3, 3))) < 1e-12);
    }
}
