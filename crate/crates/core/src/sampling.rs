//! Bandlimited signals in the fractional domain, sampling sets and
//! reconstruction.

use num_complex::Complex64;

use crate::error::{ensure_len, Error, Result};
use crate::exec;
use crate::linalg::{pseudo_inverse, sigma_min, spectral_norm, CMatrix};
use crate::transform::ManifoldTransform;

/// Singular values below this fraction of the largest one count as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Sampling set together with the interpolation operator it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    pub indices: Vec<usize>,
    pub bandwidth: usize,
    pub order: f64,
    /// `B^{-1/2}` times the first `bandwidth` columns of `F^(-alpha)`.
    pub basis: CMatrix,
    /// Pseudo-inverse of the sampled rows of `basis`.
    pub left_inverse: CMatrix,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

fn check_bandwidth(t: &ManifoldTransform, kb: usize) -> Result<()> {
    if kb == 0 || kb > t.len() {
        return Err(Error::IndexOutOfRange { index: kb, len: t.len() + 1 });
    }
    Ok(())
}

/// `B^{-1/2} F^(-alpha)[:, ..kb]`, the synthesis matrix of the bandlimited
/// subspace.
pub fn bandlimited_basis(t: &ManifoldTransform, alpha: f64, kb: usize) -> Result<CMatrix> {
    check_bandwidth(t, kb)?;
    let n = t.len();
    let unit = CMatrix::from_fn(n, kb, |r, c| if r == c { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
    t.inverse_at(alpha, &unit)
}

/// Projects `f` onto the first `kb` fractional coefficients.
pub fn bandlimit(t: &ManifoldTransform, alpha: f64, f: &CMatrix, kb: usize) -> Result<CMatrix> {
    check_bandwidth(t, kb)?;
    let mut spec = t.forward(alpha, f)?;
    spec.coeffs.rows_mut(kb, t.len() - kb).fill(Complex64::new(0.0, 0.0));
    t.inverse(&spec)
}

fn sampled_rows(basis: &CMatrix, indices: &[usize]) -> CMatrix {
    CMatrix::from_fn(indices.len(), basis.ncols(), |r, c| basis[(indices[r], c)])
}

fn validate_indices(n: usize, indices: &[usize]) -> Result<()> {
    let mut seen = vec![false; n];
    for &i in indices {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, len: n });
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidParameter(format!("sampling index {i} repeated")));
        }
    }
    Ok(())
}

/// Builds the interpolation operator for the given sampling set.
pub fn make_plan(t: &ManifoldTransform, alpha: f64, indices: &[usize], kb: usize) -> Result<SamplingPlan> {
    check_bandwidth(t, kb)?;
    validate_indices(t.len(), indices)?;
    if indices.len() < kb {
        return Err(Error::InvalidParameter(format!(
            "{} samples cannot determine {kb} coefficients",
            indices.len()
        )));
    }
    let basis = bandlimited_basis(t, alpha, kb)?;
    let (left_inverse, smin, smax) = pseudo_inverse(&sampled_rows(&basis, indices));
    if !(smin > RANK_TOL * smax) {
        return Err(Error::RankDeficient { sigma_min: smin, sigma_max: smax });
    }
    Ok(SamplingPlan {
        indices: indices.to_vec(),
        bandwidth: kb,
        order: alpha,
        basis,
        left_inverse,
        sigma_min: smin,
        sigma_max: smax,
    })
}

impl SamplingPlan {
    /// Values of `f` at the sampling set.
    pub fn sample(&self, f: &CMatrix) -> Result<CMatrix> {
        ensure_len(self.basis.nrows(), f.nrows())?;
        Ok(CMatrix::from_fn(self.indices.len(), f.ncols(), |r, c| f[(self.indices[r], c)]))
    }

    /// `V_Kb U samples`.
    pub fn reconstruct(&self, samples: &CMatrix) -> Result<CMatrix> {
        ensure_len(self.indices.len(), samples.nrows())?;
        Ok(&self.basis * (&self.left_inverse * samples))
    }

    /// Dense interpolation operator `V_Kb U` (`N x K`).
    pub fn interpolator(&self) -> CMatrix {
        &self.basis * &self.left_inverse
    }

    /// `||V_Kb||_2 ||U||_2`, the amplification bound for sample noise.
    pub fn noise_gain(&self) -> f64 {
        spectral_norm(&self.basis) * spectral_norm(&self.left_inverse)
    }
}

/// Greedy E-optimal selection: repeatedly add the row of the bandlimited
/// basis that maximizes the smallest singular value of the selected rows.
/// Ties go to the lowest index.
pub fn optimal_sampling(t: &ManifoldTransform, alpha: f64, kb: usize, k: usize) -> Result<Vec<usize>> {
    check_bandwidth(t, kb)?;
    let n = t.len();
    if k < kb || k > n {
        return Err(Error::InvalidParameter(format!("need {kb} <= K <= {n}, got K = {k}")));
    }
    let basis = bandlimited_basis(t, alpha, kb)?;
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut taken = vec![false; n];
    while chosen.len() < k {
        let scores = exec::map_range(n, |i| {
            if taken[i] {
                return f64::NEG_INFINITY;
            }
            let mut trial = chosen.clone();
            trial.push(i);
            sigma_min(&sampled_rows(&basis, &trial))
        });
        let mut best = None;
        for (i, &s) in scores.iter().enumerate() {
            if !taken[i] && best.is_none_or(|b: usize| s > scores[b]) {
                best = Some(i);
            }
        }
        let i = best.expect("K <= N leaves a candidate");
        taken[i] = true;
        chosen.push(i);
    }
    make_plan(t, alpha, &chosen, kb)?;
    Ok(chosen)
}

/// Exhaustive search over all `K`-subsets (lexicographic, first maximum
/// wins). Only feasible for tiny clouds.
pub fn exhaustive_sampling(t: &ManifoldTransform, alpha: f64, kb: usize, k: usize) -> Result<Vec<usize>> {
    check_bandwidth(t, kb)?;
    let n = t.len();
    if n > 16 {
        return Err(Error::InvalidParameter(format!("exhaustive search limited to N <= 16, got {n}")));
    }
    if k < kb || k > n {
        return Err(Error::InvalidParameter(format!("need {kb} <= K <= {n}, got K = {k}")));
    }
    let basis = bandlimited_basis(t, alpha, kb)?;
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        let s = sigma_min(&sampled_rows(&basis, &subset));
        if best.as_ref().is_none_or(|(b, _)| s > *b) {
            best = Some((s, subset.clone()));
        }
        // next k-combination in lexicographic order
        let mut pos = k;
        while pos > 0 && subset[pos - 1] == n - k + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
        subset[pos - 1] += 1;
        for j in pos..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
    let (_, indices) = best.expect("at least one subset");
    make_plan(t, alpha, &indices, kb)?;
    Ok(indices)
}
