use super::cloud::PointCloud;
use super::lbo::LboParams;
use super::neighbors::SpatialIndex;
use super::tangent::TangentFrame;
use crate::error::{Error, Result};

/// Area of the Voronoi cell of point `index` among its `delta`-neighbors
/// projected onto `frame`, clipped to the disk of radius `delta`.
pub fn voronoi_cell_area(
    cloud: &PointCloud,
    index: usize,
    frame: &TangentFrame,
    params: &LboParams,
) -> Result<f64> {
    params.validate()?;
    if index >= cloud.len() {
        return Err(Error::IndexOutOfRange { index, len: cloud.len() });
    }
    let grid = SpatialIndex::new(cloud.points(), params.delta);
    let hood = grid.within(&cloud.point(index), params.delta);
    area_from_neighborhood(cloud.points(), index, &hood, frame, params.delta)
}

pub(crate) fn area_from_neighborhood(
    points: &[[f64; 3]],
    index: usize,
    hood: &[usize],
    frame: &TangentFrame,
    radius: f64,
) -> Result<f64> {
    let projected: Vec<[f64; 2]> =
        hood.iter().filter(|&&j| j != index).map(|&j| frame.project(&points[j])).collect();
    let tiny = 1e-12 * radius;
    if !projected.is_empty() && projected.iter().all(|q| q[0].hypot(q[1]) <= tiny) {
        return Err(Error::DegenerateNeighborhood { index, reason: "projected neighbors coincide" });
    }
    let area = clipped_cell_area(&projected, radius);
    if !(area > 0.0) || !area.is_finite() {
        return Err(Error::NonPositiveArea { index, area });
    }
    Ok(area)
}

/// Voronoi cell of the origin among `sites`, intersected with the disk of
/// radius `radius`. Sites within `1e-12 * radius` of the origin are ignored.
pub fn clipped_cell_area(sites: &[[f64; 2]], radius: f64) -> f64 {
    let r = radius;
    let b = 2.0 * r;
    let mut poly = vec![[-b, -b], [b, -b], [b, b], [-b, b]];
    for q in sites {
        let qq = q[0] * q[0] + q[1] * q[1];
        if qq.sqrt() <= 1e-12 * r || qq > 32.0 * r * r {
            continue;
        }
        poly = clip_half_plane(&poly, q, 0.5 * qq);
        if poly.len() < 3 {
            return 0.0;
        }
    }
    polygon_disk_area(&poly, r)
}

/// Keeps the part of a convex polygon with `x . q <= c`.
fn clip_half_plane(poly: &[[f64; 2]], q: &[f64; 2], c: f64) -> Vec<[f64; 2]> {
    let side = |p: &[f64; 2]| p[0] * q[0] + p[1] * q[1] - c;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for k in 0..poly.len() {
        let a = poly[k];
        let b = poly[(k + 1) % poly.len()];
        let (sa, sb) = (side(&a), side(&b));
        if sa <= 0.0 {
            out.push(a);
        }
        if (sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0) {
            let t = sa / (sa - sb);
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

/// Area of a counter-clockwise polygon intersected with the disk of radius
/// `r` centred at the origin, summed edge by edge over signed sectors.
fn polygon_disk_area(poly: &[[f64; 2]], r: f64) -> f64 {
    let mut area = 0.0;
    for k in 0..poly.len() {
        area += edge_disk_area(poly[k], poly[(k + 1) % poly.len()], r);
    }
    area
}

/// Signed area of triangle (origin, a, b) intersected with the disk.
fn edge_disk_area(a: [f64; 2], b: [f64; 2], r: f64) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let dd = d[0] * d[0] + d[1] * d[1];
    let mut cuts = vec![0.0];
    if dd > 0.0 {
        let ad = a[0] * d[0] + a[1] * d[1];
        let aa = a[0] * a[0] + a[1] * a[1];
        let disc = ad * ad - dd * (aa - r * r);
        if disc > 0.0 {
            let s = disc.sqrt();
            for t in [(-ad - s) / dd, (-ad + s) / dd] {
                if t > 0.0 && t < 1.0 {
                    cuts.push(t);
                }
            }
        }
    }
    cuts.push(1.0);
    let at = |t: f64| [a[0] + t * d[0], a[1] + t * d[1]];
    let mut area = 0.0;
    for w in cuts.windows(2) {
        let (p, q) = (at(w[0]), at(w[1]));
        let m = at(0.5 * (w[0] + w[1]));
        let cross = p[0] * q[1] - p[1] * q[0];
        if m[0] * m[0] + m[1] * m[1] < r * r {
            area += 0.5 * cross;
        } else {
            let dot = p[0] * q[0] + p[1] * q[1];
            area += 0.5 * r * r * cross.atan2(dot);
        }
    }
    area
}
