//! Compound-Gaussian sea-clutter simulator used when no recorded data is
//! available.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use super::cube::RadarCube;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Texture times speckle plus thermal noise.
///
/// Each range cell draws a gamma texture (unit mean, shape `shape`) that
/// drifts along the pulses as an AR(1) process in the log domain; the
/// speckle is a complex AR(1) process with pulse-to-pulse correlation
/// `correlation` centred at `doppler_hz`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClutterModel {
    pub shape: f64,
    pub correlation: f64,
    pub doppler_hz: f64,
    pub texture_correlation: f64,
    pub clutter_power: f64,
    pub noise_power: f64,
}

impl Default for ClutterModel {
    fn default() -> Self {
        Self {
            shape: 1.5,
            correlation: 0.95,
            doppler_hz: 20.0,
            texture_correlation: 0.995,
            clutter_power: 1.0,
            noise_power: 0.01,
        }
    }
}

impl ClutterModel {
    pub fn validate(&self) -> Result<()> {
        let ok = self.shape > 0.0
            && (0.0..1.0).contains(&self.correlation)
            && (0.0..1.0).contains(&self.texture_correlation)
            && self.clutter_power > 0.0
            && self.noise_power >= 0.0
            && self.doppler_hz.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter("clutter model out of range".into()))
        }
    }

    /// Draws a `rows x pulses` cube.
    pub fn generate<R: Rng + ?Sized>(
        &self,
        rows: usize,
        pulses: usize,
        prf_hz: f64,
        wavelength_m: f64,
        rng: &mut R,
    ) -> Result<RadarCube> {
        self.validate()?;
        let gamma = Gamma::new(self.shape, 1.0 / self.shape).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let rot = Complex64::from_polar(self.correlation, 2.0 * PI * self.doppler_hz / prf_hz);
        let innov = (1.0 - self.correlation * self.correlation).sqrt();
        let tex_innov = (1.0 - self.texture_correlation * self.texture_correlation).sqrt();
        let gauss = |rng: &mut R| -> Complex64 {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        };
        let noise_amp = self.noise_power.sqrt();
        let mut echoes = CMatrix::zeros(rows, pulses);
        for r in 0..rows {
            let level: f64 = gamma.sample(rng);
            // log-texture wander with unit-mean correction
            let sigma = 0.3;
            let mut drift: f64 = StandardNormal.sample(rng);
            let mut speckle = gauss(rng);
            for m in 0..pulses {
                if m > 0 {
                    speckle = rot * speckle + gauss(rng) * innov;
                    let step: f64 = StandardNormal.sample(rng);
                    drift = self.texture_correlation * drift + tex_innov * step;
                }
                let texture = level * (sigma * drift - 0.5 * sigma * sigma).exp();
                echoes[(r, m)] = speckle * (self.clutter_power * texture).sqrt() + gauss(rng) * noise_amp;
            }
        }
        RadarCube::new(echoes, prf_hz, wavelength_m)
    }
}
