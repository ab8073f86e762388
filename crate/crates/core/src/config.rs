//! Flat TOML run configuration with typed bounds checks.

use serde::{Deserialize, Serialize};

use crate::crypto::EncryptionKey;
use crate::error::{Error, Result};
use crate::geometry::{LboParams, PointCloud};
use crate::radar::{ClutterModel, DesignMode, FilterSignal, Protocol, ReferenceSource, ThresholdPolicy};

/// Every tunable of the command-line pipelines. Missing keys take their
/// defaults; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    // geometry
    pub lbo_t: Option<f64>,
    pub lbo_r_neighbor: Option<f64>,
    pub lbo_delta: Option<f64>,
    pub lbo_k_fallback: usize,

    // transform
    pub alpha: f64,

    // encryption key
    pub alpha_fwd: [f64; 3],
    pub alpha_inv: [f64; 3],
    pub henon_a: f64,
    pub henon_b: f64,
    pub u0: f64,
    pub v0: f64,
    pub burn_in: usize,

    // sampling
    pub bandwidth: usize,
    pub samples: usize,

    // radar protocol
    pub target_cell: usize,
    pub window: usize,
    pub pulses: usize,
    pub velocity: f64,
    pub design_blocks: usize,
    pub design_scr_db: f64,
    pub sweep_scr_db: f64,
    pub filter_signal: FilterSignal,
    pub reference: ReferenceSource,
    pub design_mode: DesignMode,
    pub pfa: f64,
    /// Fixed detection threshold; overrides CFAR calibration when set.
    pub threshold: Option<f64>,
    pub trials: usize,
    pub scr_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,

    // synthetic clutter, used when no radar file is given
    pub rows: usize,
    pub prf_hz: f64,
    pub wavelength_m: f64,
    pub clutter_shape: f64,
    pub clutter_correlation: f64,
    pub clutter_doppler_hz: f64,
    pub texture_correlation: f64,
    pub noise_power: f64,

    pub seed: u64,

    // paths
    pub input: Option<String>,
    pub output: Option<String>,
    pub cipher: Option<String>,
    pub token: Option<String>,
    pub radar: Option<String>,
}

impl Default for Config {
    fn default() -> Self {
        let key = EncryptionKey::default();
        let protocol = Protocol::default();
        let clutter = ClutterModel::default();
        Self {
            lbo_t: None,
            lbo_r_neighbor: None,
            lbo_delta: None,
            lbo_k_fallback: 8,
            alpha: 1.0,
            alpha_fwd: key.alpha_fwd,
            alpha_inv: key.alpha_inv,
            henon_a: key.henon_a,
            henon_b: key.henon_b,
            u0: key.u0,
            v0: key.v0,
            burn_in: key.burn_in,
            bandwidth: 10,
            samples: 15,
            target_cell: protocol.target_cell,
            window: protocol.window,
            pulses: protocol.pulses,
            velocity: protocol.velocity,
            design_blocks: protocol.design_blocks,
            design_scr_db: protocol.design_scr_db,
            sweep_scr_db: protocol.sweep_scr_db,
            filter_signal: protocol.signal,
            reference: protocol.reference,
            design_mode: protocol.mode,
            pfa: 1e-2,
            threshold: None,
            trials: 200,
            scr_grid: vec![-5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
            alpha_grid: (1..=10).map(|k| k as f64 / 10.0).collect(),
            rows: 10,
            prf_hz: 1075.0,
            wavelength_m: 0.03,
            clutter_shape: clutter.shape,
            clutter_correlation: clutter.correlation,
            clutter_doppler_hz: clutter.doppler_hz,
            texture_correlation: clutter.texture_correlation,
            noise_power: clutter.noise_power,
            seed: 0,
            input: None,
            output: None,
            cipher: None,
            token: None,
            radar: None,
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite")))
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive")))
    }
}

impl Config {
    /// Parses a TOML document and validates it.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| invalid(format!("config: {}", e.message())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses a TOML table (after overrides were merged in) and validates.
    pub fn from_table(table: toml::Table) -> Result<Self> {
        let cfg: Config =
            toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| invalid(format!("config: {}", e.message())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical TOML rendering; loading it back gives the same config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lbo_t", self.lbo_t), ("lbo_r_neighbor", self.lbo_r_neighbor), ("lbo_delta", self.lbo_delta)] {
            if let Some(x) = v {
                positive(name, x)?;
            }
        }
        if let (Some(r), Some(d)) = (self.lbo_r_neighbor, self.lbo_delta) {
            if d < r {
                return Err(invalid("lbo_delta must be at least lbo_r_neighbor"));
            }
        }
        if self.lbo_k_fallback < 3 {
            return Err(invalid("lbo_k_fallback must be at least 3"));
        }
        finite("alpha", self.alpha)?;
        self.key().validate()?;
        if self.bandwidth == 0 || self.samples < self.bandwidth {
            return Err(invalid("need 1 <= bandwidth <= samples"));
        }
        if self.window == 0 || self.window % 2 == 0 {
            return Err(invalid("window must be odd"));
        }
        if self.pulses < 2 {
            return Err(invalid("pulses must be at least 2"));
        }
        finite("velocity", self.velocity)?;
        finite("design_scr_db", self.design_scr_db)?;
        finite("sweep_scr_db", self.sweep_scr_db)?;
        if self.design_blocks == 0 {
            return Err(invalid("design_blocks must be positive"));
        }
        if !(self.pfa > 0.0 && self.pfa < 1.0) {
            return Err(invalid("pfa must lie in (0, 1)"));
        }
        if let Some(t) = self.threshold {
            finite("threshold", t)?;
        }
        if self.trials == 0 {
            return Err(invalid("trials must be positive"));
        }
        if self.scr_grid.is_empty() || self.scr_grid.iter().any(|x| !x.is_finite()) {
            return Err(invalid("scr_grid must be a non-empty list of finite values"));
        }
        if self.alpha_grid.is_empty() || self.alpha_grid.iter().any(|x| !x.is_finite()) {
            return Err(invalid("alpha_grid must be a non-empty list of finite values"));
        }
        if self.rows == 0 {
            return Err(invalid("rows must be positive"));
        }
        if self.target_cell >= self.rows && self.radar.is_none() {
            return Err(invalid("target_cell must be below rows"));
        }
        positive("prf_hz", self.prf_hz)?;
        positive("wavelength_m", self.wavelength_m)?;
        self.clutter().validate()?;
        Ok(())
    }

    /// LBO parameters, defaulting any unset field from the cloud spacing.
    pub fn lbo_params(&self, cloud: &PointCloud) -> Result<LboParams> {
        let mut p = if self.lbo_t.is_some() && self.lbo_r_neighbor.is_some() && self.lbo_delta.is_some() {
            LboParams { t: 0.0, r_neighbor: 0.0, delta: 0.0, k_fallback: self.lbo_k_fallback }
        } else {
            LboParams::from_cloud(cloud)?
        };
        p.t = self.lbo_t.unwrap_or(p.t);
        p.r_neighbor = self.lbo_r_neighbor.unwrap_or(p.r_neighbor);
        p.delta = self.lbo_delta.unwrap_or(p.delta.max(p.r_neighbor));
        p.k_fallback = self.lbo_k_fallback;
        p.validate()?;
        Ok(p)
    }

    /// Fully explicit LBO parameters, if all three are configured.
    pub fn explicit_lbo(&self) -> Option<LboParams> {
        Some(LboParams {
            t: self.lbo_t?,
            r_neighbor: self.lbo_r_neighbor?,
            delta: self.lbo_delta?,
            k_fallback: self.lbo_k_fallback,
        })
    }

    pub fn key(&self) -> EncryptionKey {
        EncryptionKey {
            alpha_fwd: self.alpha_fwd,
            alpha_inv: self.alpha_inv,
            henon_a: self.henon_a,
            henon_b: self.henon_b,
            u0: self.u0,
            v0: self.v0,
            burn_in: self.burn_in,
        }
    }

    pub fn protocol(&self) -> Protocol {
        Protocol {
            target_cell: self.target_cell,
            window: self.window,
            pulses: self.pulses,
            velocity: self.velocity,
            design_blocks: self.design_blocks,
            design_scr_db: self.design_scr_db,
            sweep_scr_db: self.sweep_scr_db,
            signal: self.filter_signal,
            reference: self.reference,
            mode: self.design_mode,
            lbo: self.explicit_lbo(),
        }
    }

    pub fn clutter(&self) -> ClutterModel {
        ClutterModel {
            shape: self.clutter_shape,
            correlation: self.clutter_correlation,
            doppler_hz: self.clutter_doppler_hz,
            texture_correlation: self.texture_correlation,
            clutter_power: 1.0,
            noise_power: self.noise_power,
        }
    }

    pub fn threshold_policy(&self) -> ThresholdPolicy {
        match self.threshold {
            Some(threshold) => ThresholdPolicy::Fixed { threshold },
            None => ThresholdPolicy::Cfar { pfa: self.pfa },
        }
    }
}
