use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use super::cloud::PointCloud;
use super::lbo::LboParams;
use super::neighbors::SpatialIndex;
use crate::error::{Error, Result};

/// Local tangent plane at a point: two in-plane axes and the unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentFrame {
    pub origin: [f64; 3],
    pub basis_u: [f64; 3],
    pub basis_v: [f64; 3],
    pub normal: [f64; 3],
}

impl TangentFrame {
    /// In-plane coordinates of `p` relative to the origin.
    pub fn project(&self, p: &[f64; 3]) -> [f64; 2] {
        let d = [p[0] - self.origin[0], p[1] - self.origin[1], p[2] - self.origin[2]];
        [dot(&d, &self.basis_u), dot(&d, &self.basis_v)]
    }
}

/// Best-fit plane through the `r_neighbor` ball around point `index`.
pub fn estimate_tangent_frame(cloud: &PointCloud, index: usize, params: &LboParams) -> Result<TangentFrame> {
    params.validate()?;
    if index >= cloud.len() {
        return Err(Error::IndexOutOfRange { index, len: cloud.len() });
    }
    let grid = SpatialIndex::new(cloud.points(), params.r_neighbor);
    let hood = grid.neighborhood(index, params.r_neighbor, params.k_fallback);
    frame_from_neighborhood(cloud.points(), index, &hood)
}

pub(crate) fn frame_from_neighborhood(points: &[[f64; 3]], index: usize, hood: &[usize]) -> Result<TangentFrame> {
    let n = hood.len() as f64;
    let mut mean = Vector3::zeros();
    for &j in hood {
        mean += Vector3::from(points[j]);
    }
    mean /= n;
    let mut cov = Matrix3::zeros();
    for &j in hood {
        let d = Vector3::from(points[j]) - mean;
        cov += d * d.transpose();
    }
    cov /= n;

    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let spread = eig.eigenvalues[order[2]];
    let scale = points[index].iter().fold(1.0f64, |m, c| m.max(c.abs()));
    if !(spread > 1e-24 * scale * scale) {
        return Err(Error::DegenerateNeighborhood { index, reason: "neighbors coincide" });
    }
    if eig.eigenvalues[order[1]] <= 1e-12 * spread {
        return Err(Error::DegenerateNeighborhood { index, reason: "neighbors are collinear" });
    }
    let normal = canonical_sign(eig.eigenvectors.column(order[0]).into_owned());
    let u = canonical_sign(eig.eigenvectors.column(order[2]).into_owned());
    // re-orthogonalize u against the normal before completing the frame
    let u = (u - normal * normal.dot(&u)).normalize();
    let v = normal.cross(&u);
    Ok(TangentFrame {
        origin: points[index],
        basis_u: u.into(),
        basis_v: v.into(),
        normal: normal.into(),
    })
}

/// Flips `v` so its largest-magnitude component (lowest index on ties) is
/// positive.
fn canonical_sign(v: Vector3<f64>) -> Vector3<f64> {
    let mut k = 0;
    for i in 1..3 {
        if v[i].abs() > v[k].abs() {
            k = i;
        }
    }
    let v = v.normalize();
    if v[k] < 0.0 {
        -v
    } else {
        v
    }
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
