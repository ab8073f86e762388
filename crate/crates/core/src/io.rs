//! Point-cloud, spectrum, curve and radar file formats.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::linalg::CMatrix;
use crate::radar::RadarCube;
use crate::transform::FractionalSpectrum;

/// Supported point-cloud text formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloudFormat {
    Xyz,
    PlyAscii,
}

impl CloudFormat {
    /// Guesses the format from the file extension.
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("xyz") | Some("txt") | Some("pts") => Ok(CloudFormat::Xyz),
            Some("ply") => Ok(CloudFormat::PlyAscii),
            other => Err(Error::UnsupportedFormat(format!("cloud extension {:?}", other.unwrap_or("")))),
        }
    }
}

pub fn read_cloud(path: &Path, format: CloudFormat) -> Result<PointCloud> {
    let text = fs::read_to_string(path)?;
    match format {
        CloudFormat::Xyz => parse_xyz(&text),
        CloudFormat::PlyAscii => parse_ply(&text),
    }
}

fn parse_f64(word: &str, line: usize) -> Result<f64> {
    word.parse::<f64>()
        .map_err(|_| Error::Parse { line, message: format!("`{word}` is not a number") })
}

/// Three whitespace-separated numbers per line; `#` starts a comment.
pub fn parse_xyz(text: &str) -> Result<PointCloud> {
    let mut points = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.len() != 3 {
            return Err(Error::Parse { line: k + 1, message: format!("expected 3 values, found {}", words.len()) });
        }
        points.push([parse_f64(words[0], k + 1)?, parse_f64(words[1], k + 1)?, parse_f64(words[2], k + 1)?]);
    }
    PointCloud::new(points)
}

/// ASCII PLY with a `vertex` element carrying `x`, `y`, `z` properties.
/// Other vertex properties and later elements are ignored.
pub fn parse_ply(text: &str) -> Result<PointCloud> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == "ply" => {}
        _ => return Err(Error::Parse { line: 1, message: "missing `ply` magic".into() }),
    }
    let mut vertices = None;
    let mut before_vertex = 0usize;
    let mut in_vertex = false;
    let mut seen_vertex = false;
    let mut props: Vec<String> = Vec::new();
    for (k, raw) in lines.by_ref() {
        let words: Vec<&str> = raw.split_whitespace().collect();
        match words.as_slice() {
            ["format", fmt, ..] => {
                if *fmt != "ascii" {
                    return Err(Error::UnsupportedFormat(format!("PLY format `{fmt}`")));
                }
            }
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, count] => {
                let count: usize = count
                    .parse()
                    .map_err(|_| Error::Parse { line: k + 1, message: format!("bad element count `{count}`") })?;
                in_vertex = *name == "vertex";
                if in_vertex {
                    vertices = Some(count);
                    seen_vertex = true;
                } else if !seen_vertex {
                    before_vertex += count;
                }
            }
            ["property", "list", ..] => {
                if in_vertex {
                    return Err(Error::UnsupportedFormat("list properties on vertices".into()));
                }
            }
            ["property", _, name] => {
                if in_vertex {
                    props.push(name.to_string());
                }
            }
            ["end_header"] => break,
            _ => return Err(Error::Parse { line: k + 1, message: format!("unexpected header line `{raw}`") }),
        }
    }
    let count = vertices.ok_or(Error::Parse { line: 1, message: "no vertex element".into() })?;
    if before_vertex > 0 {
        return Err(Error::UnsupportedFormat("elements before the vertex element".into()));
    }
    let pos = |axis: &str| {
        props
            .iter()
            .position(|p| p == axis)
            .ok_or_else(|| Error::Parse { line: 1, message: format!("vertex property `{axis}` missing") })
    };
    let (ix, iy, iz) = (pos("x")?, pos("y")?, pos("z")?);
    let mut points = Vec::with_capacity(count);
    for (k, raw) in lines {
        if points.len() == count {
            break;
        }
        let words: Vec<&str> = raw.split_whitespace().collect();
        if words.is_empty() {
            continue;
        }
        if words.len() != props.len() {
            return Err(Error::Parse {
                line: k + 1,
                message: format!("expected {} values, found {}", props.len(), words.len()),
            });
        }
        points.push([parse_f64(words[ix], k + 1)?, parse_f64(words[iy], k + 1)?, parse_f64(words[iz], k + 1)?]);
    }
    if points.len() != count {
        return Err(Error::Parse { line: 0, message: format!("expected {count} vertices, found {}", points.len()) });
    }
    PointCloud::new(points)
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// XYZ text with 17 significant digits.
pub fn format_xyz(cloud: &PointCloud) -> String {
    let mut s = String::new();
    for p in cloud.points() {
        let _ = writeln!(s, "{} {} {}", num(p[0]), num(p[1]), num(p[2]));
    }
    s
}

pub fn write_xyz(path: &Path, cloud: &PointCloud) -> Result<()> {
    Ok(fs::write(path, format_xyz(cloud))?)
}

/// Spectrum CSV: `index`, then `re_<c>,im_<c>,mag_<c>` per channel and a
/// `fused` column (l2 norm across channels).
pub fn format_spectrum(spectrum: &FractionalSpectrum, names: &[&str]) -> Result<String> {
    let c = spectrum.coeffs.ncols();
    if names.len() != c {
        return Err(Error::DimensionMismatch { expected: c, found: names.len() });
    }
    let mut s = String::from("index");
    for n in names {
        let _ = write!(s, ",re_{n},im_{n},mag_{n}");
    }
    s.push_str(",fused\n");
    let fused = spectrum.fused_energy();
    for (i, row) in spectrum.coeffs.row_iter().enumerate() {
        let _ = write!(s, "{i}");
        for z in row.iter() {
            let _ = write!(s, ",{},{},{}", num(z.re), num(z.im), num(z.norm()));
        }
        let _ = writeln!(s, ",{}", num(fused[i]));
    }
    Ok(s)
}

pub fn write_spectrum(path: &Path, spectrum: &FractionalSpectrum, names: &[&str]) -> Result<()> {
    Ok(fs::write(path, format_spectrum(spectrum, names)?)?)
}

/// Reads the complex coefficients back from a spectrum CSV.
pub fn parse_spectrum(text: &str) -> Result<CMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse { line: 1, message: "empty spectrum file".into() })?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.first() != Some(&"index") || cols.last() != Some(&"fused") || (cols.len() - 2) % 3 != 0 {
        return Err(Error::Parse { line: 1, message: "unexpected spectrum header".into() });
    }
    let channels = (cols.len() - 2) / 3;
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for (k, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != cols.len() {
            return Err(Error::Parse { line: k + 1, message: format!("expected {} fields", cols.len()) });
        }
        let mut row = Vec::with_capacity(channels);
        for c in 0..channels {
            row.push(Complex64::new(parse_f64(f[1 + 3 * c], k + 1)?, parse_f64(f[2 + 3 * c], k + 1)?));
        }
        rows.push(row);
    }
    Ok(CMatrix::from_fn(rows.len(), channels, |r, c| rows[r][c]))
}

/// Two-column CSV with a named header.
pub fn format_curve(x_name: &str, y_name: &str, points: &[(f64, f64)]) -> String {
    let mut s = format!("{x_name},{y_name}\n");
    for &(x, y) in points {
        let _ = writeln!(s, "{},{}", num(x), num(y));
    }
    s
}

pub fn write_curve(path: &Path, x_name: &str, y_name: &str, points: &[(f64, f64)]) -> Result<()> {
    Ok(fs::write(path, format_curve(x_name, y_name, points))?)
}

pub fn parse_curve(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 2 {
            return Err(Error::Parse { line: k + 1, message: "expected 2 fields".into() });
        }
        out.push((parse_f64(f[0], k + 1)?, parse_f64(f[1], k + 1)?));
    }
    Ok(out)
}

/// Storage of the radar samples referenced by a sidecar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadarDataFormat {
    /// One line per range cell, `re,im` interleaved over the pulses.
    Csv,
    /// Row-major little-endian f64 pairs `(re, im)`.
    F64le,
}

/// TOML sidecar describing a preconverted radar matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarSidecar {
    pub rows: usize,
    pub pulses: usize,
    pub prf_hz: f64,
    pub wavelength_m: f64,
    pub format: RadarDataFormat,
    /// Data file, relative to the sidecar's directory.
    pub data: String,
}

/// Loads a radar cube through its sidecar.
pub fn read_radar(sidecar: &Path) -> Result<RadarCube> {
    let text = fs::read_to_string(sidecar)?;
    let meta: RadarSidecar =
        toml::from_str(&text).map_err(|e| Error::Parse { line: 0, message: format!("radar sidecar: {e}") })?;
    let data_path: PathBuf = sidecar.parent().unwrap_or(Path::new(".")).join(&meta.data);
    let (r, m) = (meta.rows, meta.pulses);
    let echoes = match meta.format {
        RadarDataFormat::Csv => {
            let text = fs::read_to_string(&data_path)?;
            let mut rows = Vec::with_capacity(r);
            for (k, line) in text.lines().enumerate() {
                if line.trim().is_empty() || line.trim_start().starts_with('#') {
                    continue;
                }
                let vals: Vec<f64> = line
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|w| !w.is_empty())
                    .map(|w| parse_f64(w, k + 1))
                    .collect::<Result<_>>()?;
                if vals.len() != 2 * m {
                    return Err(Error::Parse { line: k + 1, message: format!("expected {} values, found {}", 2 * m, vals.len()) });
                }
                rows.push(vals);
            }
            if rows.len() != r {
                return Err(Error::Parse { line: 0, message: format!("expected {r} range cells, found {}", rows.len()) });
            }
            CMatrix::from_fn(r, m, |i, j| Complex64::new(rows[i][2 * j], rows[i][2 * j + 1]))
        }
        RadarDataFormat::F64le => {
            let bytes = fs::read(&data_path)?;
            if bytes.len() != r * m * 16 {
                return Err(Error::UnsupportedFormat(format!(
                    "binary radar file holds {} bytes, expected {}",
                    bytes.len(),
                    r * m * 16
                )));
            }
            let v: Vec<f64> = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
            CMatrix::from_fn(r, m, |i, j| Complex64::new(v[2 * (i * m + j)], v[2 * (i * m + j) + 1]))
        }
    };
    RadarCube::new(echoes, meta.prf_hz, meta.wavelength_m)
}

/// Writes a cube as CSV plus sidecar; `sidecar` names the TOML file and the
/// data goes next to it with a `.csv` extension.
pub fn write_radar_csv(sidecar: &Path, cube: &RadarCube) -> Result<()> {
    let data = sidecar.with_extension("csv");
    let mut s = String::new();
    for row in cube.echoes.row_iter() {
        let fields: Vec<String> = row.iter().flat_map(|z| [num(z.re), num(z.im)]).collect();
        let _ = writeln!(s, "{}", fields.join(","));
    }
    fs::write(&data, s)?;
    let meta = RadarSidecar {
        rows: cube.rows(),
        pulses: cube.pulses(),
        prf_hz: cube.prf_hz,
        wavelength_m: cube.wavelength_m,
        format: RadarDataFormat::Csv,
        data: data.file_name().and_then(|n| n.to_str()).unwrap_or("radar.csv").to_string(),
    };
    let text = toml::to_string(&meta).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(fs::write(sidecar, text)?)
}
