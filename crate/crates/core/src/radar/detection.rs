//! Fractional-order sweeps and Monte Carlo detection on radar-derived
//! point clouds.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::clutter::ClutterModel;
use super::cube::{cube_to_cloud, estimate_reference, inject_target_with_phase, normalized_power_db, steering_vector, RadarCube};
use super::filter::{apply_gains, design_filter, DesignMode, FilterDesign, Realization};
use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::{build_lbo, solve_harmonic_basis, LboParams};
use crate::linalg::{CMatrix, CVector};
use crate::transform::{build_transform, ManifoldTransform};

/// Which per-point quantity is filtered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterSignal {
    /// The normalized power (z coordinate of the cloud).
    #[default]
    Power,
    /// The complex echo, scaled by the block's RMS amplitude.
    Echo,
}

/// Where the filter's desired output comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceSource {
    /// Mean over a window of neighboring range cells.
    #[default]
    Window,
    /// The target's own footprint in the signal (known in simulation).
    Target,
}

/// Experiment protocol shared by the sweep and the detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    /// Zero-based range cell carrying the target.
    pub target_cell: usize,
    /// Odd range window of the reference estimator.
    pub window: usize,
    /// Pulses per block (one block = one point cloud).
    pub pulses: usize,
    /// Radial target velocity in m/s.
    pub velocity: f64,
    /// Blocks averaged in the filter design.
    pub design_blocks: usize,
    /// SCR of the target in the design blocks of the detector.
    pub design_scr_db: f64,
    /// SCR of the target in the sweep blocks.
    pub sweep_scr_db: f64,
    pub signal: FilterSignal,
    pub reference: ReferenceSource,
    pub mode: DesignMode,
    /// Explicit LBO parameters; `None` derives them from the cloud.
    pub lbo: Option<LboParams>,
}

impl Default for Protocol {
    fn default() -> Self {
        Self {
            target_cell: 3,
            window: 3,
            pulses: 251,
            velocity: 2.58,
            design_blocks: 8,
            design_scr_db: 0.0,
            sweep_scr_db: 0.0,
            signal: FilterSignal::Power,
            reference: ReferenceSource::Window,
            mode: DesignMode::Structured,
            lbo: None,
        }
    }
}

impl Protocol {
    pub fn validate(&self, rows: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.target_cell >= rows {
            return Err(Error::IndexOutOfRange { index: self.target_cell, len: rows });
        }
        if self.window == 0 || self.window % 2 == 0 {
            return bad(format!("window must be odd, got {}", self.window));
        }
        if self.pulses < 2 {
            return bad("pulses must be at least 2".into());
        }
        if self.design_blocks == 0 {
            return bad("design_blocks must be positive".into());
        }
        if !self.velocity.is_finite() || !self.design_scr_db.is_finite() || !self.sweep_scr_db.is_finite() {
            return bad("velocity and SCR values must be finite".into());
        }
        if let Some(p) = &self.lbo {
            p.validate()?;
        }
        Ok(())
    }
}

/// Supplier of clutter-only blocks.
#[derive(Debug, Clone, PartialEq)]
pub enum ClutterSource {
    /// Disjoint pulse windows of a recording, reused cyclically.
    Recorded(RadarCube),
    /// Fresh draws from the simulator; block `k` uses seed `seed + k`.
    Synthetic { model: ClutterModel, rows: usize, prf_hz: f64, wavelength_m: f64, seed: u64 },
}

impl ClutterSource {
    pub fn rows(&self) -> usize {
        match self {
            ClutterSource::Recorded(c) => c.rows(),
            ClutterSource::Synthetic { rows, .. } => *rows,
        }
    }

    pub fn block(&self, k: usize, pulses: usize) -> Result<RadarCube> {
        match self {
            ClutterSource::Recorded(cube) => {
                let count = cube.block_count(pulses);
                if count == 0 {
                    return Err(Error::InvalidParameter(format!(
                        "recording has {} pulses, fewer than one block of {pulses}",
                        cube.pulses()
                    )));
                }
                cube.window((k % count) * pulses, pulses)
            }
            ClutterSource::Synthetic { model, rows, prf_hz, wavelength_m, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
                model.generate(*rows, pulses, *prf_hz, *wavelength_m, &mut rng)
            }
        }
    }
}

/// Per-point signal of a block in range-major order.
pub fn block_signal(cube: &RadarCube, signal: FilterSignal) -> CVector {
    match signal {
        FilterSignal::Power => normalized_power_db(cube).map(|x| Complex64::new(x, 0.0)),
        FilterSignal::Echo => {
            let e = cube.flatten();
            let rms = (e.norm_squared() / e.len() as f64).sqrt();
            if rms > 0.0 {
                e.unscale(rms)
            } else {
                e
            }
        }
    }
}

fn window_reference(y: &CVector, rows: usize, pulses: usize, window: usize) -> Result<CVector> {
    let re = estimate_reference(&y.map(|z| z.re), rows, pulses, window)?;
    let im = estimate_reference(&y.map(|z| z.im), rows, pulses, window)?;
    Ok(re.zip_map(&im, Complex64::new))
}

/// Builds the manifold transform of a block's point cloud.
pub fn radar_transform(cube: &RadarCube, lbo: Option<LboParams>) -> Result<ManifoldTransform> {
    let cloud = cube_to_cloud(cube)?;
    let params = match lbo {
        Some(p) => p,
        None => LboParams::from_cloud(&cloud)?,
    };
    let pair = build_lbo(&cloud, &params)?;
    let basis = solve_harmonic_basis(&pair)?;
    build_transform(&basis, &pair)
}

fn trial_phase(seed: u64, k: usize) -> f64 {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64)).random_range(0.0..2.0 * PI)
}

/// Training pair from a clutter block with a target at `scr_db`.
pub fn make_realization(clutter: &RadarCube, protocol: &Protocol, scr_db: f64, phase: f64) -> Result<Realization> {
    let sv = steering_vector(protocol.velocity, clutter.wavelength_m, clutter.prf_hz, clutter.pulses())?;
    let observed_cube = inject_target_with_phase(clutter, protocol.target_cell, scr_db, &sv, phase)?;
    let observed = block_signal(&observed_cube, protocol.signal);
    let reference = match protocol.reference {
        ReferenceSource::Window => window_reference(&observed, clutter.rows(), clutter.pulses(), protocol.window)?,
        ReferenceSource::Target => match protocol.signal {
            FilterSignal::Power => &observed - block_signal(clutter, protocol.signal),
            // same scaling as the observed block
            FilterSignal::Echo => {
                let e = observed_cube.flatten();
                let rms = (e.norm_squared() / e.len() as f64).sqrt().max(f64::MIN_POSITIVE);
                (e - clutter.flatten()).unscale(rms)
            }
        },
    };
    Ok(Realization { observed, reference })
}

/// NMSE as a function of the fractional order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub curve: Vec<(f64, f64)>,
    pub best_alpha: f64,
    pub best_nmse: f64,
}

/// Designs one filter per order on the same realizations and records the
/// achieved NMSE. The geometry comes from the first observed block.
pub fn sweep_alpha(source: &ClutterSource, alphas: &[f64], protocol: &Protocol, seed: u64) -> Result<SweepResult> {
    if alphas.is_empty() {
        return Err(Error::InvalidParameter("alpha grid is empty".into()));
    }
    protocol.validate(source.rows())?;
    let realizations = (0..protocol.design_blocks)
        .map(|k| {
            let block = source.block(k, protocol.pulses)?;
            make_realization(&block, protocol, protocol.sweep_scr_db, trial_phase(seed, k))
        })
        .collect::<Result<Vec<_>>>()?;
    let sv = {
        let b = source.block(0, protocol.pulses)?;
        let sv = steering_vector(protocol.velocity, b.wavelength_m, b.prf_hz, b.pulses())?;
        inject_target_with_phase(&b, protocol.target_cell, protocol.sweep_scr_db, &sv, trial_phase(seed, 0))?
    };
    let t = radar_transform(&sv, protocol.lbo)?;
    sweep_with_transform(&t, alphas, &realizations, protocol.mode)
}

/// Sweep over precomputed realizations with a fixed transform.
pub fn sweep_with_transform(
    t: &ManifoldTransform,
    alphas: &[f64],
    realizations: &[Realization],
    mode: DesignMode,
) -> Result<SweepResult> {
    if alphas.is_empty() {
        return Err(Error::InvalidParameter("alpha grid is empty".into()));
    }
    let mut curve = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        curve.push((alpha, design_filter(t, alpha, realizations, mode)?.nmse));
    }
    let mut best = 0;
    for (k, &(_, e)) in curve.iter().enumerate() {
        if e < curve[best].1 {
            best = k;
        }
    }
    Ok(SweepResult { best_alpha: curve[best].0, best_nmse: curve[best].1, curve })
}

/// Detection threshold rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum ThresholdPolicy {
    /// Threshold on the cell-averaged statistic calibrated on target-free
    /// trials to the requested false-alarm rate.
    Cfar { pfa: f64 },
    /// Fixed threshold on the cell-averaged statistic.
    Fixed { threshold: f64 },
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        ThresholdPolicy::Cfar { pfa: 1e-2 }
    }
}

/// Empirical detection probability at one SCR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionPoint {
    pub scr_db: f64,
    pub pd: f64,
    pub detections: usize,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionReport {
    pub alpha: f64,
    pub threshold: f64,
    /// False-alarm rate measured on the calibration trials.
    pub calibration_pfa: f64,
    pub points: Vec<DetectionPoint>,
}

/// Target-cell output energy over the mean energy of the other cells.
pub fn cell_statistic(output: &CVector, rows: usize, pulses: usize, target: usize) -> f64 {
    let energy: Vec<f64> = (0..rows)
        .map(|r| (0..pulses).map(|m| output[r * pulses + m].norm_sqr()).sum())
        .collect();
    if rows == 1 {
        return energy[0];
    }
    let others = (energy.iter().sum::<f64>() - energy[target]) / (rows - 1) as f64;
    if others > 0.0 {
        energy[target] / others
    } else {
        f64::INFINITY
    }
}

/// Fixed detector: transform from a target-free block, filter designed on
/// `design_blocks` blocks with a target at `design_scr_db`.
pub struct Detector {
    pub transform: ManifoldTransform,
    pub design: FilterDesign,
    pub protocol: Protocol,
}

impl Detector {
    pub fn train(source: &ClutterSource, alpha: f64, protocol: &Protocol, seed: u64) -> Result<Self> {
        protocol.validate(source.rows())?;
        let transform = radar_transform(&source.block(0, protocol.pulses)?, protocol.lbo)?;
        Self::train_with_transform(source, transform, alpha, protocol, seed)
    }

    pub fn train_with_transform(
        source: &ClutterSource,
        transform: ManifoldTransform,
        alpha: f64,
        protocol: &Protocol,
        seed: u64,
    ) -> Result<Self> {
        protocol.validate(source.rows())?;
        let realizations = exec::try_map_range(protocol.design_blocks, |k| {
            let block = source.block(1 + k, protocol.pulses)?;
            make_realization(&block, protocol, protocol.design_scr_db, trial_phase(seed ^ 0x5eed, k))
        })?;
        let design = design_filter(&transform, alpha, &realizations, protocol.mode)?;
        Ok(Self { transform, design, protocol: *protocol })
    }

    /// Statistic of one block with a target of `scr_db` (`-inf` for none).
    pub fn statistic(&self, clutter: &RadarCube, scr_db: f64, phase: f64) -> Result<f64> {
        let p = &self.protocol;
        let cube = if scr_db == f64::NEG_INFINITY {
            clutter.clone()
        } else {
            let sv = steering_vector(p.velocity, clutter.wavelength_m, clutter.prf_hz, clutter.pulses())?;
            inject_target_with_phase(clutter, p.target_cell, scr_db, &sv, phase)?
        };
        let y = block_signal(&cube, p.signal);
        let out = apply_gains(
            &self.transform,
            self.design.order,
            &self.design.h,
            &CMatrix::from_column_slice(y.len(), 1, y.as_slice()),
        )?;
        Ok(cell_statistic(&out.column(0).into_owned(), cube.rows(), cube.pulses(), p.target_cell))
    }
}

/// Threshold from null statistics: the smallest value exceeded by at most
/// `pfa * n` of them.
pub fn cfar_threshold(null_stats: &[f64], pfa: f64) -> f64 {
    let mut s = null_stats.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    let k = ((pfa * s.len() as f64).floor() as usize).min(s.len().saturating_sub(1));
    s[k]
}

/// Empirical Pd per SCR over `trials` independent blocks. Trial `k` uses
/// the same clutter block and target phase at every SCR.
pub fn monte_carlo_detection(
    source: &ClutterSource,
    detector: &Detector,
    scr_grid: &[f64],
    trials: usize,
    policy: ThresholdPolicy,
    seed: u64,
) -> Result<DetectionReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let p = &detector.protocol;
    let first = 1 + p.design_blocks;
    let null_first = first + trials;
    let null_stats = exec::try_map_range(trials, |k| {
        detector.statistic(&source.block(null_first + k, p.pulses)?, f64::NEG_INFINITY, 0.0)
    })?;
    let threshold = match policy {
        ThresholdPolicy::Cfar { pfa } => {
            if !(pfa > 0.0 && pfa < 1.0) {
                return Err(Error::InvalidParameter(format!("pfa must lie in (0, 1), got {pfa}")));
            }
            cfar_threshold(&null_stats, pfa)
        }
        ThresholdPolicy::Fixed { threshold } => threshold,
    };
    let calibration_pfa = null_stats.iter().filter(|&&s| s > threshold).count() as f64 / trials as f64;
    let blocks = exec::try_map_range(trials, |k| source.block(first + k, p.pulses))?;
    let mut points = Vec::with_capacity(scr_grid.len());
    for &scr in scr_grid {
        let hits = exec::try_map_range(trials, |k| {
            Ok::<_, Error>(detector.statistic(&blocks[k], scr, trial_phase(seed, k))? > threshold)
        })?;
        let detections = hits.iter().filter(|&&h| h).count();
        points.push(DetectionPoint { scr_db: scr, pd: detections as f64 / trials as f64, detections, trials });
    }
    Ok(DetectionReport { alpha: detector.design.order, threshold, calibration_pfa, points })
}

/// Two-sided 95% Wilson interval for a binomial proportion.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * ((p * (1.0 - p) + z * z / (4.0 * n)) / n).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}
