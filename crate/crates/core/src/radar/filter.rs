//! Optimal diagonal filtering in the fractional spectral domain.

use nalgebra::{Cholesky, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::exec;
use crate::linalg::{CMatrix, CVector};
use crate::transform::ManifoldTransform;

/// Relative Tikhonov weight: `eps = TIKHONOV * trace(T) / N`.
pub const TIKHONOV: f64 = 1e-10;

/// How the normal equations are assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignMode {
    /// Builds every `S = [W_1 y, ..., W_N y]` explicitly and forms `S^H S`.
    /// O(N^3) per realization; meant for small clouds and cross-checks.
    Dense,
    /// Uses `S = F^(-alpha) diag(y_hat)`, so that `S^H S = diag(|y_hat|^2)`
    /// because `F^(-alpha)` is unitary. O(N^2) per realization.
    #[default]
    Structured,
}

/// Normal-equation matrix `T`.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemMatrix {
    Dense(CMatrix),
    Diagonal(DVector<f64>),
}

impl SystemMatrix {
    pub fn apply(&self, h: &CVector) -> CVector {
        match self {
            SystemMatrix::Dense(t) => t * h,
            SystemMatrix::Diagonal(d) => h.zip_map(d, |z, w| z * w),
        }
    }

    pub fn trace(&self) -> f64 {
        match self {
            SystemMatrix::Dense(t) => t.diagonal().iter().map(|z| z.re).sum(),
            SystemMatrix::Diagonal(d) => d.sum(),
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        match self {
            SystemMatrix::Dense(t) => t.clone(),
            SystemMatrix::Diagonal(d) => CMatrix::from_diagonal(&d.map(|x| Complex64::new(x, 0.0))),
        }
    }
}

/// One training pair: observed signal `y` and desired reference `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub observed: CVector,
    pub reference: CVector,
}

/// Solved filter: spectral gains `h` with the system that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterDesign {
    pub order: f64,
    pub h: CVector,
    pub system: SystemMatrix,
    pub rhs: CVector,
    pub regularization: f64,
    /// Pooled B-weighted normalized error over the design realizations.
    pub nmse: f64,
}

impl FilterDesign {
    /// `||T h - q|| / ||q||`.
    pub fn residual(&self) -> f64 {
        let q = self.rhs.norm();
        let r = (self.system.apply(&self.h) - &self.rhs).norm();
        if q > 0.0 {
            r / q
        } else {
            r
        }
    }
}

fn column(v: &CVector) -> CMatrix {
    CMatrix::from_column_slice(v.len(), 1, v.as_slice())
}

fn weighted(t: &ManifoldTransform, v: &CVector) -> CVector {
    v.zip_map(t.b_half(), |z, b| z * b)
}

/// Solves `T h = q` with `T = mean S^H S`, `q = mean S^H x`, where `S`
/// collects the rank-one filtered copies of the mass-weighted observation
/// and `x` is the mass-weighted reference.
pub fn design_filter(
    t: &ManifoldTransform,
    alpha: f64,
    realizations: &[Realization],
    mode: DesignMode,
) -> Result<FilterDesign> {
    if realizations.is_empty() {
        return Err(Error::InvalidParameter("filter design needs at least one realization".into()));
    }
    let n = t.len();
    for r in realizations {
        ensure_len(n, r.observed.len())?;
        ensure_len(n, r.reference.len())?;
    }
    let count = realizations.len() as f64;
    let (system, rhs) = match mode {
        DesignMode::Structured => {
            let parts = exec::map_slice(realizations, |r| {
                let y_hat = t.apply_fractional(alpha, &column(&weighted(t, &r.observed)));
                let x_hat = t.apply_fractional(alpha, &column(&weighted(t, &r.reference)));
                let energy = DVector::from_fn(n, |i, _| y_hat[(i, 0)].norm_sqr());
                let cross = CVector::from_fn(n, |i, _| y_hat[(i, 0)].conj() * x_hat[(i, 0)]);
                (energy, cross)
            });
            let mut diag = DVector::zeros(n);
            let mut q = CVector::zeros(n);
            for (e, c) in parts {
                diag += e;
                q += c;
            }
            (SystemMatrix::Diagonal(diag / count), q.unscale(count))
        }
        DesignMode::Dense => {
            let forward = t.fractional_matrix(alpha);
            let backward = t.fractional_matrix(-alpha);
            let mut tm = CMatrix::zeros(n, n);
            let mut q = CVector::zeros(n);
            for r in realizations {
                let y = weighted(t, &r.observed);
                let x = weighted(t, &r.reference);
                // column i of S is w_i (w_hat_i^T y)
                let s = CMatrix::from_fn(n, n, |row, i| {
                    let proj: Complex64 = (0..n).map(|j| forward[(i, j)] * y[j]).sum();
                    backward[(row, i)] * proj
                });
                tm += s.ad_mul(&s);
                q += s.ad_mul(&x);
            }
            tm.unscale_mut(count);
            let tm = (&tm + tm.adjoint()).unscale(2.0);
            (SystemMatrix::Dense(tm), q.unscale(count))
        }
    };
    let trace = system.trace();
    if !(trace > 0.0 && trace.is_finite()) {
        return Err(Error::SingularSystem);
    }
    let eps = TIKHONOV * trace / n as f64;
    let h = match &system {
        SystemMatrix::Diagonal(d) => rhs.zip_map(d, |qi, di| qi / (di + eps)),
        SystemMatrix::Dense(tm) => {
            let mut reg = tm.clone();
            for i in 0..n {
                reg[(i, i)] += Complex64::new(eps, 0.0);
            }
            Cholesky::new(reg).ok_or(Error::SingularSystem)?.solve(&rhs)
        }
    };
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::SingularSystem);
    }
    let mut design = FilterDesign { order: alpha, h, system, rhs, regularization: eps, nmse: f64::NAN };
    design.nmse = pooled_nmse(t, &design, realizations)?;
    Ok(design)
}

/// `B^{-1/2} F^(-alpha) diag(h) F^(alpha) B^{1/2} y` for every column of `y`.
pub fn apply_filter(t: &ManifoldTransform, design: &FilterDesign, y: &CMatrix) -> Result<CMatrix> {
    apply_gains(t, design.order, &design.h, y)
}

/// Same as [`apply_filter`] with explicit gains.
pub fn apply_gains(t: &ManifoldTransform, alpha: f64, h: &CVector, y: &CMatrix) -> Result<CMatrix> {
    ensure_len(t.len(), h.len())?;
    let mut spec = t.forward(alpha, y)?.coeffs;
    for (i, mut row) in spec.row_iter_mut().enumerate() {
        row *= h[i];
    }
    t.inverse_at(alpha, &spec)
}

/// Pooled normalized error `sum ||x_tilde - x||_B^2 / sum ||x||_B^2` of the
/// filter over a set of realizations, in the mass-weighted norm that the
/// design minimizes.
pub fn pooled_nmse(t: &ManifoldTransform, design: &FilterDesign, realizations: &[Realization]) -> Result<f64> {
    let mass = t.mass();
    let terms = exec::try_map_range(realizations.len(), |k| {
        let r = &realizations[k];
        let out = apply_filter(t, design, &column(&r.observed))?;
        let mut err = 0.0;
        let mut energy = 0.0;
        for i in 0..mass.len() {
            err += mass[i] * (out[(i, 0)] - r.reference[i]).norm_sqr();
            energy += mass[i] * r.reference[i].norm_sqr();
        }
        Ok::<_, Error>((err, energy))
    })?;
    let (err, energy) = terms.into_iter().fold((0.0, 0.0), |(e, s), (a, b)| (e + a, s + b));
    Ok(if energy > 0.0 { err / energy } else { err })
}

/// Mean design objective `||sum_i h_i S_i - x||^2` in mass-weighted
/// coordinates.
pub fn filter_objective(t: &ManifoldTransform, alpha: f64, realizations: &[Realization], h: &CVector) -> Result<f64> {
    ensure_len(t.len(), h.len())?;
    let mut total = 0.0;
    for r in realizations {
        let y = column(&weighted(t, &r.observed));
        let mut spec = t.apply_fractional(alpha, &y);
        for i in 0..h.len() {
            spec[(i, 0)] *= h[i];
        }
        let out = t.apply_fractional(-alpha, &spec);
        let x = weighted(t, &r.reference);
        total += out.column(0).iter().zip(x.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
    }
    Ok(total / realizations.len() as f64)
}
