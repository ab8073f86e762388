//! Multi-order encryption of point-cloud coordinates with Hénon-map phase
//! masks applied in the fractional spectral domain.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::exec;
use crate::geometry::PointCloud;
use crate::linalg::{CMatrix, CVector};
use crate::transform::ManifoldTransform;

/// Initial-state offset separating the mask streams of the three axes.
pub const CHANNEL_OFFSET: f64 = 1e-3;
/// Magnitude beyond which the Hénon orbit is declared divergent.
const DIVERGENCE_LIMIT: f64 = 1e6;

/// Secret key: forward/inverse orders per axis plus the Hénon map state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncryptionKey {
    pub alpha_fwd: [f64; 3],
    pub alpha_inv: [f64; 3],
    pub henon_a: f64,
    pub henon_b: f64,
    pub u0: f64,
    pub v0: f64,
    pub burn_in: usize,
}

impl Default for EncryptionKey {
    fn default() -> Self {
        Self {
            alpha_fwd: [0.35, 0.72, 0.15],
            alpha_inv: [0.60, 0.20, 0.90],
            henon_a: 1.4,
            henon_b: 0.3,
            u0: 0.12,
            v0: 0.1,
            burn_in: 100,
        }
    }
}

impl EncryptionKey {
    pub fn validate(&self) -> Result<()> {
        let finite = self
            .alpha_fwd
            .iter()
            .chain(&self.alpha_inv)
            .chain([&self.henon_a, &self.henon_b, &self.u0, &self.v0])
            .all(|x| x.is_finite());
        if finite {
            Ok(())
        } else {
            Err(Error::InvalidParameter("key fields must be finite".into()))
        }
    }
}

/// `count` iterates `(u_n, v_n)`, `n = 1..=count`, of
/// `u' = 1 - a u^2 + v`, `v' = b u` started from `(u0, v0)`.
pub fn henon_orbit(a: f64, b: f64, u0: f64, v0: f64, count: usize) -> Result<Vec<(f64, f64)>> {
    let (mut u, mut v) = (u0, v0);
    let mut out = Vec::with_capacity(count);
    for iteration in 1..=count {
        (u, v) = (1.0 - a * u * u + v, b * u);
        if !(u.abs() <= DIVERGENCE_LIMIT) {
            return Err(Error::ChaosDiverged { iteration });
        }
        out.push((u, v));
    }
    Ok(out)
}

/// Phase mask in `[0, 1)` for one channel: the `u` iterates after
/// `burn_in`, min-max normalized. The maximum (which would map to 1) wraps
/// to 0, and a constant sequence maps to all zeros.
pub fn henon_phases(key: &EncryptionKey, n: usize, tag: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("phase mask length must be positive".into()));
    }
    let u0 = key.u0 + tag as f64 * CHANNEL_OFFSET;
    let orbit = henon_orbit(key.henon_a, key.henon_b, u0, key.v0, key.burn_in + n)?;
    let u: Vec<f64> = orbit[key.burn_in..].iter().map(|&(u, _)| u).collect();
    let lo = u.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    Ok(u.iter()
        .map(|&x| {
            if !(span > 0.0) {
                return 0.0;
            }
            let p = (x - lo) / span;
            if p >= 1.0 {
                0.0
            } else {
                p
            }
        })
        .collect())
}

/// Encrypted coordinates, one complex column per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct EncryptedCloud {
    pub coords: CMatrix,
}

const CIPHER_MAGIC: &str = "PMFHT-ENC v1";

impl EncryptedCloud {
    pub fn len(&self) -> usize {
        self.coords.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.nrows() == 0
    }

    /// Text ciphertext: header line, then `re_x im_x re_y im_y re_z im_z`
    /// per point with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut s = format!("{CIPHER_MAGIC} N={}\n", self.len());
        for row in self.coords.row_iter() {
            let fields: Vec<String> = row.iter().flat_map(|z| [format!("{:.16e}", z.re), format!("{:.16e}", z.im)]).collect();
            let _ = writeln!(s, "{}", fields.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse { line: 1, message: "empty ciphertext".into() })?;
        let n: usize = header
            .strip_prefix(CIPHER_MAGIC)
            .and_then(|rest| rest.trim().strip_prefix("N="))
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| Error::Parse { line: 1, message: format!("expected `{CIPHER_MAGIC} N=<n>`") })?;
        let mut coords = CMatrix::zeros(n, 3);
        let mut row = 0;
        for (k, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: String| Error::Parse { line: k + 1, message };
            if row >= n {
                return Err(bad("more rows than the header declares".into()));
            }
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|w| w.parse::<f64>().map_err(|e| bad(format!("`{w}`: {e}"))))
                .collect::<Result<_>>()?;
            if vals.len() != 6 {
                return Err(bad(format!("expected 6 values, found {}", vals.len())));
            }
            for d in 0..3 {
                coords[(row, d)] = Complex64::new(vals[2 * d], vals[2 * d + 1]);
            }
            row += 1;
        }
        if row != n {
            return Err(Error::Parse { line: row + 2, message: format!("expected {n} rows, found {row}") });
        }
        Ok(Self { coords })
    }
}

fn masks(key: &EncryptionKey, n: usize) -> Result<[Vec<f64>; 3]> {
    Ok([henon_phases(key, n, 0)?, henon_phases(key, n, 1)?, henon_phases(key, n, 2)?])
}

/// Encrypts the coordinates of `cloud` with the transform of that cloud.
pub fn encrypt(cloud: &PointCloud, t: &ManifoldTransform, key: &EncryptionKey) -> Result<EncryptedCloud> {
    key.validate()?;
    encrypt_with_phases(cloud, t, key, &masks(key, cloud.len())?)
}

/// Encryption with explicit per-axis phase masks (values in turns).
pub fn encrypt_with_phases(
    cloud: &PointCloud,
    t: &ManifoldTransform,
    key: &EncryptionKey,
    phases: &[Vec<f64>; 3],
) -> Result<EncryptedCloud> {
    ensure_len(t.len(), cloud.len())?;
    for p in phases {
        ensure_len(t.len(), p.len())?;
    }
    let columns = exec::try_map_range(3, |d| {
        let f = DMatrix::from_column_slice(cloud.len(), 1, cloud.axis(d).as_slice());
        let mut spec = t.forward_real(key.alpha_fwd[d], &f)?.coeffs;
        for (k, z) in spec.iter_mut().enumerate() {
            *z *= Complex64::cis(2.0 * PI * phases[d][k]);
        }
        t.inverse_at(key.alpha_inv[d], &spec).map(|m| m.column(0).into_owned())
    })?;
    Ok(EncryptedCloud { coords: CMatrix::from_columns(&columns) })
}

/// Complex coordinates recovered from a ciphertext.
pub fn decrypt_coordinates(enc: &EncryptedCloud, t: &ManifoldTransform, key: &EncryptionKey) -> Result<CMatrix> {
    key.validate()?;
    decrypt_with_phases(enc, t, key, &masks(key, enc.len())?)
}

/// Inverse of [`encrypt_with_phases`].
pub fn decrypt_with_phases(
    enc: &EncryptedCloud,
    t: &ManifoldTransform,
    key: &EncryptionKey,
    phases: &[Vec<f64>; 3],
) -> Result<CMatrix> {
    ensure_len(t.len(), enc.len())?;
    ensure_len(3, enc.coords.ncols())?;
    for p in phases {
        ensure_len(t.len(), p.len())?;
    }
    let columns: Vec<CVector> = exec::try_map_range(3, |d| {
        let f = enc.coords.columns(d, 1).into_owned();
        let mut spec = t.forward(key.alpha_inv[d], &f)?.coeffs;
        for (k, z) in spec.iter_mut().enumerate() {
            *z *= Complex64::cis(-2.0 * PI * phases[d][k]);
        }
        t.inverse_at(key.alpha_fwd[d], &spec).map(|m| m.column(0).into_owned())
    })?;
    Ok(CMatrix::from_columns(&columns))
}

/// Decrypts and keeps the real parts.
pub fn decrypt(enc: &EncryptedCloud, t: &ManifoldTransform, key: &EncryptionKey) -> Result<PointCloud> {
    let m = decrypt_coordinates(enc, t, key)?;
    PointCloud::from_coordinates(&m.map(|z| z.re))
}

/// `||a - b||_F / ||a||_F` over the coordinate matrices.
pub fn relative_error(original: &PointCloud, recovered: &PointCloud) -> f64 {
    let a = original.coordinates();
    (recovered.coordinates() - &a).norm() / a.norm()
}

/// Pearson correlation of two equally long sequences.
pub fn correlation(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let (ma, mb) = (a.mean(), b.mean());
    let da = a.add_scalar(-ma);
    let db = b.add_scalar(-mb);
    da.dot(&db) / (da.norm() * db.norm())
}

const TOKEN_MAGIC: &[u8; 8] = b"PMFHTGEO";
const TOKEN_VERSION: u32 = 1;

/// Serializes the transform factors (`B`, `omega`, `V`) so the decryptor
/// does not need the original cloud. Little-endian binary.
pub fn geometry_token(t: &ManifoldTransform) -> Vec<u8> {
    let n = t.len();
    let mut out = Vec::with_capacity(20 + 8 * n + 16 * n * (n + 1));
    out.extend_from_slice(TOKEN_MAGIC);
    out.extend_from_slice(&TOKEN_VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    for b in t.mass().iter() {
        out.extend_from_slice(&b.to_le_bytes());
    }
    for z in t.eigenvalues().iter().chain(t.eigenvectors().iter()) {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

/// Parses a token written by [`geometry_token`].
pub fn read_geometry_token(bytes: &[u8]) -> Result<ManifoldTransform> {
    let corrupt = |m: &str| Error::UnsupportedFormat(format!("geometry token: {m}"));
    if bytes.len() < 20 || &bytes[..8] != TOKEN_MAGIC {
        return Err(corrupt("bad magic"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != TOKEN_VERSION {
        return Err(corrupt(&format!("unsupported version {version}")));
    }
    let n = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes")) as usize;
    let need = n.checked_mul(n + 1).and_then(|m| m.checked_mul(16)).and_then(|m| m.checked_add(20 + 8 * n));
    if need != Some(bytes.len()) {
        return Err(corrupt("truncated or oversized payload"));
    }
    let mut words = bytes[20..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
    let mut next = || words.next().expect("length checked");
    let mass = DVector::from_fn(n, |_, _| next());
    let mut complex = || Complex64::new(next(), next());
    let omega = CVector::from_fn(n, |_, _| complex());
    let mut v = CMatrix::zeros(n, n);
    for c in 0..n {
        for r in 0..n {
            v[(r, c)] = complex();
        }
    }
    ManifoldTransform::from_parts(mass, v, omega)
}
