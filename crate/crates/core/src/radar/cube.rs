use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{ensure_len, Error, Result};
use crate::geometry::PointCloud;
use crate::linalg::{CMatrix, CVector};

/// Power floor (dB below the strongest sample) used before normalizing.
const DB_FLOOR: f64 = 200.0;

/// Range-by-pulse complex echoes with the acquisition parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarCube {
    pub echoes: CMatrix,
    pub prf_hz: f64,
    pub wavelength_m: f64,
    pub range_labels: Vec<String>,
}

impl RadarCube {
    pub fn new(echoes: CMatrix, prf_hz: f64, wavelength_m: f64) -> Result<Self> {
        if echoes.nrows() == 0 || echoes.ncols() == 0 {
            return Err(Error::EmptyCube);
        }
        if echoes.ncols() < 2 {
            return Err(Error::InvalidParameter("a radar cube needs at least 2 pulses".into()));
        }
        if echoes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("echoes must be finite".into()));
        }
        if !(prf_hz > 0.0 && prf_hz.is_finite()) {
            return Err(Error::InvalidParameter("prf_hz must be positive".into()));
        }
        if !(wavelength_m > 0.0 && wavelength_m.is_finite()) {
            return Err(Error::InvalidParameter("wavelength_m must be positive".into()));
        }
        let range_labels = (0..echoes.nrows()).map(|r| r.to_string()).collect();
        Ok(Self { echoes, prf_hz, wavelength_m, range_labels })
    }

    pub fn rows(&self) -> usize {
        self.echoes.nrows()
    }

    pub fn pulses(&self) -> usize {
        self.echoes.ncols()
    }

    /// Consecutive pulse window `[start, start + pulses)`.
    pub fn window(&self, start: usize, pulses: usize) -> Result<Self> {
        if pulses < 2 || start + pulses > self.pulses() {
            return Err(Error::InvalidParameter(format!(
                "pulse window {start}..{} outside 0..{}",
                start + pulses,
                self.pulses()
            )));
        }
        Ok(Self {
            echoes: self.echoes.columns(start, pulses).into_owned(),
            prf_hz: self.prf_hz,
            wavelength_m: self.wavelength_m,
            range_labels: self.range_labels.clone(),
        })
    }

    /// Number of disjoint windows of `pulses` pulses.
    pub fn block_count(&self, pulses: usize) -> usize {
        self.pulses().checked_div(pulses).unwrap_or(0)
    }

    /// Echoes flattened in range-major point order.
    pub fn flatten(&self) -> CVector {
        let (r, m) = (self.rows(), self.pulses());
        CVector::from_fn(r * m, |k, _| self.echoes[(k / m, k % m)])
    }

    /// Mean power `|e|^2` of one range cell.
    pub fn cell_power(&self, cell: usize) -> Result<f64> {
        if cell >= self.rows() {
            return Err(Error::IndexOutOfRange { index: cell, len: self.rows() });
        }
        Ok(self.echoes.row(cell).iter().map(|z| z.norm_sqr()).sum::<f64>() / self.pulses() as f64)
    }
}

fn min_max(values: impl Iterator<Item = f64> + Clone) -> impl Fn(f64) -> f64 {
    let lo = values.clone().fold(f64::INFINITY, f64::min);
    let hi = values.fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    move |x| if span > 0.0 { (x - lo) / span } else { 0.0 }
}

/// Echo power in dB mapped to `[0, 1]`, one value per point in range-major
/// order. Powers more than 200 dB below the maximum are floored there.
pub fn normalized_power_db(cube: &RadarCube) -> DVector<f64> {
    let power = cube.flatten().map(|z| z.norm_sqr());
    let peak = power.max();
    let floor = if peak > 0.0 { 10.0 * peak.log10() - DB_FLOOR } else { 0.0 };
    let db = power.map(|p| if p > 0.0 { (10.0 * p.log10()).max(floor) } else { floor });
    let scale = min_max(db.iter().copied());
    db.map(scale)
}

/// One point per (range, pulse) sample: normalized range index, normalized
/// pulse index, normalized power in dB.
pub fn cube_to_cloud(cube: &RadarCube) -> Result<PointCloud> {
    if cube.rows() == 0 || cube.pulses() == 0 {
        return Err(Error::EmptyCube);
    }
    let (r, m) = (cube.rows(), cube.pulses());
    let axis = |i: usize, len: usize| if len > 1 { i as f64 / (len - 1) as f64 } else { 0.0 };
    let z = normalized_power_db(cube);
    PointCloud::new((0..r * m).map(|k| [axis(k / m, r), axis(k % m, m), z[k]]).collect())
}

/// Unit-energy Doppler steering vector over the pulses.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub values: CVector,
    pub doppler_hz: f64,
    pub velocity: f64,
}

/// `p_m = exp(-j 2 pi m f_d / f_r) / sqrt(M)` with `f_d = 2 v / lambda`.
pub fn steering_vector(velocity: f64, wavelength_m: f64, prf_hz: f64, pulses: usize) -> Result<SteeringVector> {
    if !(wavelength_m > 0.0) || !(prf_hz > 0.0) || pulses == 0 {
        return Err(Error::InvalidParameter("steering vector needs positive wavelength, PRF and pulse count".into()));
    }
    let doppler_hz = 2.0 * velocity / wavelength_m;
    let scale = 1.0 / (pulses as f64).sqrt();
    let values = CVector::from_fn(pulses, |m, _| Complex64::from_polar(scale, -2.0 * PI * m as f64 * doppler_hz / prf_hz));
    Ok(SteeringVector { values, doppler_hz, velocity })
}

/// Amplitude giving `scr_db` against clutter power `clutter_power` for a
/// unit-energy steering vector.
pub fn target_amplitude(clutter_power: f64, scr_db: f64) -> f64 {
    (clutter_power * 10f64.powf(scr_db / 10.0)).sqrt()
}

/// Adds `A p` to the pulses of `cell`, with `A` set from the cell's mean
/// clutter power and the requested SCR.
pub fn inject_target(cube: &RadarCube, cell: usize, scr_db: f64, sv: &SteeringVector) -> Result<RadarCube> {
    inject_target_with_phase(cube, cell, scr_db, sv, 0.0)
}

/// [`inject_target`] with an extra carrier phase (radians) on the target.
pub fn inject_target_with_phase(
    cube: &RadarCube,
    cell: usize,
    scr_db: f64,
    sv: &SteeringVector,
    phase: f64,
) -> Result<RadarCube> {
    ensure_len(cube.pulses(), sv.values.len())?;
    let amplitude = target_amplitude(cube.cell_power(cell)?, scr_db);
    Ok(add_to_cell(cube, cell, &(&sv.values * Complex64::from_polar(amplitude, phase))))
}

pub(crate) fn add_to_cell(cube: &RadarCube, cell: usize, signal: &CVector) -> RadarCube {
    let mut out = cube.clone();
    for m in 0..cube.pulses() {
        out.echoes[(cell, m)] += signal[m];
    }
    out
}

/// Sliding-window reference: each range cell is replaced by the mean of the
/// `window` cells centred on it, with indices clamped at the edges, pulse by
/// pulse.
pub fn estimate_reference(y: &DVector<f64>, rows: usize, pulses: usize, window: usize) -> Result<DVector<f64>> {
    ensure_len(rows * pulses, y.len())?;
    if window == 0 || window % 2 == 0 {
        return Err(Error::InvalidParameter(format!("window must be odd and positive, got {window}")));
    }
    let half = (window / 2) as isize;
    Ok(DVector::from_fn(rows * pulses, |k, _| {
        let (r, m) = ((k / pulses) as isize, k % pulses);
        (-half..=half)
            .map(|d| {
                let rr = (r + d).clamp(0, rows as isize - 1) as usize;
                y[rr * pulses + m]
            })
            .sum::<f64>()
            / window as f64
    }))
}
