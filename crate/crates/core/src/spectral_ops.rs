//! Generalized translation, fractional convolution, dual convolution and
//! cross-correlation on the manifold.

use num_complex::Complex64;

use crate::error::{ensure_len, Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::transform::ManifoldTransform;

/// Spectrum of the unit impulse at point `index`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseSpectrum {
    pub index: usize,
    pub order: f64,
    /// `sqrt(B_ii)` times column `index` of `F^(alpha)`.
    pub coeffs: CVector,
}

/// How the point values weight the translated copies in the spatial-sum
/// form of the convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    /// `sum_i f(i) T_i g`; satisfies the spectral product identity exactly.
    #[default]
    Plain,
    /// `sum_i sqrt(B_ii) f(i) T_i g`.
    MassWeighted,
}

fn as_matrix(v: &CVector) -> CMatrix {
    CMatrix::from_column_slice(v.len(), 1, v.as_slice())
}

fn spectrum(t: &ManifoldTransform, alpha: f64, f: &CVector) -> Result<CVector> {
    ensure_len(t.len(), f.len())?;
    Ok(t.forward(alpha, &as_matrix(f))?.coeffs.column(0).into_owned())
}

fn synthesize(t: &ManifoldTransform, alpha: f64, coeffs: &CVector) -> Result<CVector> {
    Ok(t.inverse_at(alpha, &as_matrix(coeffs))?.column(0).into_owned())
}

fn check_index(t: &ManifoldTransform, i: usize) -> Result<()> {
    if i < t.len() {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { index: i, len: t.len() })
    }
}

pub fn impulse_spectrum(t: &ManifoldTransform, alpha: f64, index: usize) -> Result<ImpulseSpectrum> {
    check_index(t, index)?;
    let coeffs = t.fractional_column(alpha, index)? * Complex64::new(t.b_half()[index], 0.0);
    Ok(ImpulseSpectrum { index, order: alpha, coeffs })
}

/// `T_i f = B^{-1/2} F^(-alpha) (f_hat . delta_hat_i)`.
pub fn translate(t: &ManifoldTransform, alpha: f64, f: &CVector, i: usize) -> Result<CVector> {
    let delta = impulse_spectrum(t, alpha, i)?;
    let fh = spectrum(t, alpha, f)?;
    synthesize(t, alpha, &fh.component_mul(&delta.coeffs))
}

/// Translation by the conjugated impulse spectrum (the `T_{-i}` used by the
/// cross-correlation).
pub fn translate_conjugate(t: &ManifoldTransform, alpha: f64, f: &CVector, i: usize) -> Result<CVector> {
    let delta = impulse_spectrum(t, alpha, i)?;
    let fh = spectrum(t, alpha, f)?;
    synthesize(t, alpha, &fh.component_mul(&delta.coeffs.conjugate()))
}

/// Fractional convolution through the spectral product
/// `B^{-1/2} F^(-alpha) (f_hat . g_hat)`.
pub fn convolve(t: &ManifoldTransform, alpha: f64, f: &CVector, g: &CVector) -> Result<CVector> {
    let fh = spectrum(t, alpha, f)?;
    let gh = spectrum(t, alpha, g)?;
    synthesize(t, alpha, &fh.component_mul(&gh))
}

/// Fractional convolution evaluated as the sum of translated copies of `g`.
/// Costs O(N^3); intended for small clouds and for comparing weightings.
pub fn convolve_by_translation(
    t: &ManifoldTransform,
    alpha: f64,
    f: &CVector,
    g: &CVector,
    weighting: Weighting,
) -> Result<CVector> {
    ensure_len(t.len(), f.len())?;
    let gh = spectrum(t, alpha, g)?;
    let mut acc = CVector::zeros(t.len());
    for i in 0..t.len() {
        let w = match weighting {
            Weighting::Plain => f[i],
            Weighting::MassWeighted => f[i] * t.b_half()[i],
        };
        if w == Complex64::new(0.0, 0.0) {
            continue;
        }
        let delta = impulse_spectrum(t, alpha, i)?;
        acc += synthesize(t, alpha, &gh.component_mul(&delta.coeffs))? * w;
    }
    Ok(acc)
}

/// `S_k g_hat = F^(alpha) (F^(-alpha)_{., k} . g)`.
pub fn spectral_translate(t: &ManifoldTransform, alpha: f64, g: &CVector, k: usize) -> Result<CVector> {
    check_index(t, k)?;
    ensure_len(t.len(), g.len())?;
    let col = t.fractional_column(-alpha, k)?;
    Ok(t.apply_fractional(alpha, &as_matrix(&col.component_mul(g))).column(0).into_owned())
}

/// Dual convolution `sum_k f_hat(k) S_k g_hat`, evaluated in closed form as
/// `F^(alpha) ((F^(-alpha) f_hat) . g)`.
pub fn spectral_convolve(t: &ManifoldTransform, alpha: f64, f_hat: &CVector, g: &CVector) -> Result<CVector> {
    ensure_len(t.len(), f_hat.len())?;
    ensure_len(t.len(), g.len())?;
    let back = t.apply_fractional(-alpha, &as_matrix(f_hat)).column(0).into_owned();
    Ok(t.apply_fractional(alpha, &as_matrix(&back.component_mul(g))).column(0).into_owned())
}

/// Cross-correlation `B^{-1/2} F^(-alpha) (conj(f_hat) . g_hat)`.
pub fn correlate(t: &ManifoldTransform, alpha: f64, f: &CVector, g: &CVector) -> Result<CVector> {
    let fh = spectrum(t, alpha, f)?;
    let gh = spectrum(t, alpha, g)?;
    synthesize(t, alpha, &fh.conjugate().component_mul(&gh))
}
