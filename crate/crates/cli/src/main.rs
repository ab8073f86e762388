//! `pmfht` command-line pipelines.
//!
//! Every subcommand reads a flat TOML config (`--config`), applies
//! `--set key=value` overrides and the dedicated flags on top, validates the
//! result and echoes it to stderr before running. Exit codes: 0 success,
//! 1 invalid input or arguments, 2 numerical failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use num_complex::Complex64;
use pmfht::config::Config;
use pmfht::crypto::{self, EncryptedCloud};
use pmfht::geometry::{build_lbo, solve_harmonic_basis, PointCloud};
use pmfht::io::{self, CloudFormat};
use pmfht::linalg::CMatrix;
use pmfht::radar::{self, ClutterSource, Detector};
use pmfht::sampling;
use pmfht::transform::{build_transform, ManifoldTransform};
use pmfht::{Error, Result};

#[derive(Parser)]
#[command(name = "pmfht", version, about = "Fractional manifold harmonic transforms on point clouds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the LBO eigenvalues of a cloud as `index,eigenvalue`.
    Basis(Common),
    /// Write the fractional spectrum of the cloud coordinates.
    Transform(Common),
    /// Encrypt a cloud; writes the ciphertext and the geometry token.
    Encrypt(Common),
    /// Decrypt a ciphertext with its geometry token.
    Decrypt(Common),
    /// Choose sampling points for bandlimited coordinates.
    Sample(Common),
    /// Design the clutter filter at one order and write its gains.
    Filter(Common),
    /// NMSE of the clutter filter over the configured order grid.
    Sweep(Common),
    /// Monte Carlo detection probability over the configured SCR grid.
    Detect(Common),
}

#[derive(Args)]
struct Common {
    /// Flat TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Config override `key=value` (TOML value syntax), repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    output: Option<String>,
    #[arg(long)]
    cipher: Option<String>,
    #[arg(long)]
    token: Option<String>,
    /// Radar sidecar; synthetic clutter is used when absent.
    #[arg(long)]
    radar: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn parse_override(raw: &str) -> Result<(String, toml::Value)> {
    let (key, value) = raw.split_once('=').ok_or_else(|| invalid(format!("override `{raw}` is not key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(invalid(format!("override `{raw}` has an empty key")));
    }
    // Accept bare words as strings so paths need no quoting.
    let value = match format!("v = {}", value.trim()).parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(value.trim().to_string()),
    };
    Ok((key.to_string(), value))
}

fn load_config(c: &Common) -> Result<Config> {
    let mut table = match &c.config {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            text.parse::<toml::Table>().map_err(|e| invalid(format!("config {}: {}", path.display(), e.message())))?
        }
        None => toml::Table::new(),
    };
    for raw in &c.set {
        let (k, v) = parse_override(raw)?;
        table.insert(k, v);
    }
    let strings = [("input", &c.input), ("output", &c.output), ("cipher", &c.cipher), ("token", &c.token), ("radar", &c.radar)];
    for (k, v) in strings {
        if let Some(v) = v {
            table.insert(k.into(), toml::Value::String(v.clone()));
        }
    }
    if let Some(a) = c.alpha {
        table.insert("alpha".into(), toml::Value::Float(a));
    }
    for (k, v) in [("seed", c.seed), ("trials", c.trials)] {
        if let Some(v) = v {
            let v = i64::try_from(v).map_err(|_| invalid(format!("{k} is too large")))?;
            table.insert(k.into(), toml::Value::Integer(v));
        }
    }
    Config::from_table(table)
}

fn required<'a>(value: &'a Option<String>, key: &str) -> Result<&'a Path> {
    value.as_deref().map(Path::new).ok_or_else(|| invalid(format!("`{key}` is required (config key or --{key})")))
}

fn load_cloud(cfg: &Config) -> Result<PointCloud> {
    let path = required(&cfg.input, "input")?;
    io::read_cloud(path, CloudFormat::from_path(path)?)
}

fn cloud_transform(cfg: &Config, cloud: &PointCloud) -> Result<ManifoldTransform> {
    let params = cfg.lbo_params(cloud)?;
    eprintln!("lbo: t={} r_neighbor={} delta={} k_fallback={}", params.t, params.r_neighbor, params.delta, params.k_fallback);
    let pair = build_lbo(cloud, &params)?;
    let basis = solve_harmonic_basis(&pair)?;
    build_transform(&basis, &pair)
}

fn clutter_source(cfg: &Config) -> Result<ClutterSource> {
    Ok(match &cfg.radar {
        Some(path) => ClutterSource::Recorded(io::read_radar(Path::new(path))?),
        None => ClutterSource::Synthetic {
            model: cfg.clutter(),
            rows: cfg.rows,
            prf_hz: cfg.prf_hz,
            wavelength_m: cfg.wavelength_m,
            seed: cfg.seed,
        },
    })
}

fn write(path: &Path, data: impl AsRef<[u8]>) -> Result<()> {
    Ok(fs::write(path, data)?)
}

fn basis(cfg: &Config) -> Result<()> {
    let cloud = load_cloud(cfg)?;
    let params = cfg.lbo_params(&cloud)?;
    let pair = build_lbo(&cloud, &params)?;
    let basis = solve_harmonic_basis(&pair)?;
    let curve: Vec<(f64, f64)> = basis.eigenvalues.iter().enumerate().map(|(k, &l)| (k as f64, l)).collect();
    eprintln!("orthonormality residual {:.3e}", basis.orthonormality_residual(&pair.mass));
    io::write_curve(required(&cfg.output, "output")?, "index", "eigenvalue", &curve)
}

fn transform(cfg: &Config) -> Result<()> {
    let cloud = load_cloud(cfg)?;
    let t = cloud_transform(cfg, &cloud)?;
    let spectrum = t.forward_real(cfg.alpha, &cloud.coordinates())?;
    eprintln!("parseval residual {:.3e}", spectrum.parseval_residual());
    io::write_spectrum(required(&cfg.output, "output")?, &spectrum, &["x", "y", "z"])
}

fn encrypt(cfg: &Config) -> Result<()> {
    let cloud = load_cloud(cfg)?;
    let t = cloud_transform(cfg, &cloud)?;
    let enc = crypto::encrypt(&cloud, &t, &cfg.key())?;
    write(required(&cfg.cipher, "cipher")?, enc.to_text())?;
    write(required(&cfg.token, "token")?, crypto::geometry_token(&t))
}

fn decrypt(cfg: &Config) -> Result<()> {
    let enc = EncryptedCloud::from_text(&fs::read_to_string(required(&cfg.cipher, "cipher")?)?)?;
    let t = crypto::read_geometry_token(&fs::read(required(&cfg.token, "token")?)?)?;
    let recovered = crypto::decrypt(&enc, &t, &cfg.key())?;
    if let Some(out) = &cfg.output {
        io::write_xyz(Path::new(out), &recovered)?;
    }
    if cfg.input.is_some() {
        let original = load_cloud(cfg)?;
        if original.len() != recovered.len() {
            return Err(Error::DimensionMismatch { expected: original.len(), found: recovered.len() });
        }
        println!("round-trip relative error {:.6e}", crypto::relative_error(&original, &recovered));
    }
    Ok(())
}

fn sample(cfg: &Config) -> Result<()> {
    let cloud = load_cloud(cfg)?;
    let t = cloud_transform(cfg, &cloud)?;
    let indices = sampling::optimal_sampling(&t, cfg.alpha, cfg.bandwidth, cfg.samples)?;
    let plan = sampling::make_plan(&t, cfg.alpha, &indices, cfg.bandwidth)?;
    let coords: CMatrix = cloud.coordinates().map(|x| Complex64::new(x, 0.0));
    let limited = sampling::bandlimit(&t, cfg.alpha, &coords, cfg.bandwidth)?;
    let rebuilt = plan.reconstruct(&plan.sample(&limited)?)?;
    let err = (&rebuilt - &limited).norm() / limited.norm().max(f64::MIN_POSITIVE);
    eprintln!("sigma_min {:.6e} noise gain {:.6e}", plan.sigma_min, plan.noise_gain());
    println!("bandlimited reconstruction relative error {err:.6e}");
    let curve: Vec<(f64, f64)> = indices.iter().enumerate().map(|(k, &i)| (k as f64, i as f64)).collect();
    io::write_curve(required(&cfg.output, "output")?, "order", "point", &curve)
}

fn filter(cfg: &Config) -> Result<()> {
    let source = clutter_source(cfg)?;
    let det = Detector::train(&source, cfg.alpha, &cfg.protocol(), cfg.seed)?;
    println!("nmse {:.6e}", det.design.nmse);
    let gains = DMatrix::from_fn(det.design.h.len(), 1, |i, _| det.design.h[i]);
    let spectrum = pmfht::transform::FractionalSpectrum { order: cfg.alpha, mass_norm: vec![0.0], coeffs: gains };
    io::write_spectrum(required(&cfg.output, "output")?, &spectrum, &["h"])
}

fn sweep(cfg: &Config) -> Result<()> {
    let source = clutter_source(cfg)?;
    let result = radar::sweep_alpha(&source, &cfg.alpha_grid, &cfg.protocol(), cfg.seed)?;
    println!("best alpha {} nmse {:.6e}", result.best_alpha, result.best_nmse);
    io::write_curve(required(&cfg.output, "output")?, "alpha", "nmse", &result.curve)
}

fn detect(cfg: &Config) -> Result<()> {
    let source = clutter_source(cfg)?;
    let det = Detector::train(&source, cfg.alpha, &cfg.protocol(), cfg.seed)?;
    let report = radar::monte_carlo_detection(&source, &det, &cfg.scr_grid, cfg.trials, cfg.threshold_policy(), cfg.seed)?;
    eprintln!("threshold {:.6e} calibration pfa {:.4}", report.threshold, report.calibration_pfa);
    let curve: Vec<(f64, f64)> = report.points.iter().map(|p| (p.scr_db, p.pd)).collect();
    for p in &report.points {
        println!("scr {:>6.1} dB pd {:.3}", p.scr_db, p.pd);
    }
    io::write_curve(required(&cfg.output, "output")?, "scr_db", "pd", &curve)
}

fn run(command: Command) -> Result<()> {
    let (common, pipeline): (&Common, fn(&Config) -> Result<()>) = match &command {
        Command::Basis(c) => (c, basis),
        Command::Transform(c) => (c, transform),
        Command::Encrypt(c) => (c, encrypt),
        Command::Decrypt(c) => (c, decrypt),
        Command::Sample(c) => (c, sample),
        Command::Filter(c) => (c, filter),
        Command::Sweep(c) => (c, sweep),
        Command::Detect(c) => (c, detect),
    };
    let cfg = load_config(common)?;
    for line in cfg.to_toml().lines() {
        eprintln!("# {line}");
    }
    pipeline(&cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
