//! Normalized harmonic matrix, its unitary eigendecomposition and the
//! forward/inverse fractional transform.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{ensure_len, Error, Result};
use crate::geometry::{HarmonicBasis, LboPair};
use crate::linalg::{inf_norm_real, orthogonal_eigen, principal_arg, to_complex, CMatrix, CVector};

/// Orthogonality residual above which the harmonic matrix is rejected.
const ORTHOGONALITY_LIMIT: f64 = 1e-6;

/// `F_M = V diag(omega) V*` together with the mass scaling `B^{1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldTransform {
    b_half: DVector<f64>,
    b_half_inv: DVector<f64>,
    v: CMatrix,
    omega: CVector,
    theta: DVector<f64>,
}

impl ManifoldTransform {
    /// Factors an orthogonal matrix `F` paired with mass diagonal `mass`.
    pub fn from_orthogonal(f: &DMatrix<f64>, mass: &DVector<f64>) -> Result<Self> {
        let n = mass.len();
        ensure_len(n, f.nrows())?;
        ensure_len(n, f.ncols())?;
        let residual = inf_norm_real(&(f.transpose() * f - DMatrix::identity(n, n)));
        if !(residual <= ORTHOGONALITY_LIMIT) {
            return Err(Error::NotOrthogonal { residual });
        }
        let (v, omega) = orthogonal_eigen(f)?;
        let t = Self::from_parts(mass.clone(), v, omega)?;
        t.probe_reconstruction(f)?;
        Ok(t)
    }

    /// Assembles a transform from stored factors (e.g. a geometry token).
    pub fn from_parts(mass: DVector<f64>, v: CMatrix, omega: CVector) -> Result<Self> {
        let n = mass.len();
        ensure_len(n, v.nrows())?;
        ensure_len(n, v.ncols())?;
        ensure_len(n, omega.len())?;
        if let Some(i) = mass.iter().position(|&b| !(b > 0.0 && b.is_finite())) {
            return Err(Error::NonPositiveArea { index: i, area: mass[i] });
        }
        if let Some(w) = omega.iter().find(|w| !((w.norm() - 1.0).abs() <= 1e-8)) {
            return Err(Error::NotOrthogonal { residual: (w.norm() - 1.0).abs() });
        }
        let b_half = mass.map(f64::sqrt);
        let b_half_inv = b_half.map(|b| 1.0 / b);
        let theta = omega.map(principal_arg);
        Ok(Self { b_half, b_half_inv, v, omega, theta })
    }

    // Cheap consistency check: V diag(omega) V* must reproduce F on two
    // fixed probe vectors.
    fn probe_reconstruction(&self, f: &DMatrix<f64>) -> Result<()> {
        let n = self.len();
        let probes = DMatrix::from_fn(n, 2, |i, c| if c == 0 { 1.0 } else { ((i * 7 + 3) % 11) as f64 - 5.0 });
        let want = to_complex(&(f * &probes));
        let got = self.apply_fractional(1.0, &to_complex(&probes));
        let err = (got - &want).norm();
        if err > 1e-8 * want.norm().max(1.0) {
            return Err(Error::EigensolveFailure(format!("eigen factors reproduce F with error {err:e}")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.b_half.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b_half.is_empty()
    }

    /// Diagonal of `B^{1/2}`.
    pub fn b_half(&self) -> &DVector<f64> {
        &self.b_half
    }

    /// Diagonal of `B^{-1/2}`.
    pub fn b_half_inv(&self) -> &DVector<f64> {
        &self.b_half_inv
    }

    /// Mass diagonal `B`.
    pub fn mass(&self) -> DVector<f64> {
        self.b_half.map(|b| b * b)
    }

    /// Unitary eigenvector matrix `V`.
    pub fn eigenvectors(&self) -> &CMatrix {
        &self.v
    }

    /// Unit-modulus eigenvalues `omega`.
    pub fn eigenvalues(&self) -> &CVector {
        &self.omega
    }

    /// Principal arguments of the eigenvalues, in `(-pi, pi]`.
    pub fn angles(&self) -> &DVector<f64> {
        &self.theta
    }

    fn phases(&self, alpha: f64) -> CVector {
        self.theta.map(|th| Complex64::cis(alpha * th))
    }

    /// Dense `F^(alpha) = V diag(e^{i alpha theta}) V*`.
    pub fn fractional_matrix(&self, alpha: f64) -> CMatrix {
        let n = self.len();
        if alpha == 0.0 {
            return CMatrix::identity(n, n);
        }
        let phases = self.phases(alpha);
        let mut scaled = self.v.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[k];
        }
        scaled * self.v.adjoint()
    }

    /// `F^(alpha) x` without forming the dense power.
    pub fn apply_fractional(&self, alpha: f64, x: &CMatrix) -> CMatrix {
        if alpha == 0.0 {
            return x.clone();
        }
        let mut y = self.v.ad_mul(x);
        let phases = self.phases(alpha);
        for (i, mut row) in y.row_iter_mut().enumerate() {
            row *= phases[i];
        }
        &self.v * y
    }

    /// Column `k` of `F^(alpha)`.
    pub fn fractional_column(&self, alpha: f64, k: usize) -> Result<CVector> {
        let n = self.len();
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, len: n });
        }
        let mut e = CMatrix::zeros(n, 1);
        e[(k, 0)] = Complex64::new(1.0, 0.0);
        Ok(self.apply_fractional(alpha, &e).column(0).into_owned())
    }

    /// Forward transform of an `N x C` complex signal.
    pub fn forward(&self, alpha: f64, signal: &CMatrix) -> Result<FractionalSpectrum> {
        ensure_len(self.len(), signal.nrows())?;
        if signal.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("signal has non-finite entries".into()));
        }
        let mut weighted = signal.clone();
        for (i, mut row) in weighted.row_iter_mut().enumerate() {
            row *= Complex64::new(self.b_half[i], 0.0);
        }
        let mass_norm = weighted.column_iter().map(|c| c.norm_squared()).collect();
        let coeffs = self.apply_fractional(alpha, &weighted);
        Ok(FractionalSpectrum { order: alpha, coeffs, mass_norm })
    }

    /// Forward transform of a real signal.
    pub fn forward_real(&self, alpha: f64, signal: &DMatrix<f64>) -> Result<FractionalSpectrum> {
        self.forward(alpha, &to_complex(signal))
    }

    /// Inverse transform at the spectrum's own order.
    pub fn inverse(&self, spectrum: &FractionalSpectrum) -> Result<CMatrix> {
        self.inverse_at(spectrum.order, &spectrum.coeffs)
    }

    /// `B^{-1/2} F^(-alpha) coeffs` for an arbitrary order.
    pub fn inverse_at(&self, alpha: f64, coeffs: &CMatrix) -> Result<CMatrix> {
        ensure_len(self.len(), coeffs.nrows())?;
        let mut out = self.apply_fractional(-alpha, coeffs);
        for (i, mut row) in out.row_iter_mut().enumerate() {
            row *= Complex64::new(self.b_half_inv[i], 0.0);
        }
        Ok(out)
    }
}

/// `F_M = H^T B^{1/2}` factored for fractional powers.
pub fn build_transform(basis: &HarmonicBasis, lbo: &LboPair) -> Result<ManifoldTransform> {
    let n = lbo.len();
    ensure_len(n, basis.eigenvectors.nrows())?;
    ensure_len(n, basis.eigenvectors.ncols())?;
    ManifoldTransform::from_orthogonal(&harmonic_matrix(basis, &lbo.mass), &lbo.mass)
}

/// The real matrix `H^T B^{1/2}`.
pub fn harmonic_matrix(basis: &HarmonicBasis, mass: &DVector<f64>) -> DMatrix<f64> {
    let h = &basis.eigenvectors;
    DMatrix::from_fn(h.ncols(), h.nrows(), |k, i| h[(i, k)] * mass[i].sqrt())
}

/// Coefficients of an `N x C` signal at fractional order `order`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSpectrum {
    pub order: f64,
    pub coeffs: CMatrix,
    /// `f^H B f` per channel, recorded at creation.
    pub mass_norm: Vec<f64>,
}

impl FractionalSpectrum {
    /// Per-coefficient l2 norm across channels.
    pub fn fused_energy(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.coeffs.nrows(),
            self.coeffs.row_iter().map(|r| r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()),
        )
    }

    /// Largest relative gap between `|coeffs|^2` and the recorded mass norm.
    pub fn parseval_residual(&self) -> f64 {
        self.coeffs
            .column_iter()
            .zip(&self.mass_norm)
            .map(|(c, &m)| if m > 0.0 { (c.norm_squared() - m).abs() / m } else { c.norm_squared() })
            .fold(0.0, f64::max)
    }
}

/// Real part of a complex signal and the largest discarded imaginary part.
pub fn real_part(m: &CMatrix) -> (DMatrix<f64>, f64) {
    let residue = m.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    (m.map(|z| z.re), residue)
}
