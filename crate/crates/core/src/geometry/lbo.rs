use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::cloud::{dist2, PointCloud};
use super::neighbors::{mean_nearest_neighbor_distance, SpatialIndex};
use super::tangent::frame_from_neighborhood;
use super::voronoi::area_from_neighborhood;
use crate::error::{Error, Result};
use crate::exec;

/// Bandwidth and radii of the discrete Laplace-Beltrami construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LboParams {
    /// Heat-kernel bandwidth (squared length units).
    pub t: f64,
    /// Radius of the tangent-plane fit.
    pub r_neighbor: f64,
    /// Radius of the Voronoi neighborhood and of the kernel truncation.
    pub delta: f64,
    /// Neighbor count used when the fitting ball is too sparse.
    pub k_fallback: usize,
}

impl LboParams {
    /// Defaults scaled by the mean nearest-neighbor distance `d`:
    /// `t = d^2 / 4`, `r_neighbor = delta = 3 d`.
    pub fn from_cloud(cloud: &PointCloud) -> Result<Self> {
        let d = mean_nearest_neighbor_distance(cloud.points());
        if !(d > 0.0) {
            return Err(Error::InvalidParameter("cloud has no spatial extent".into()));
        }
        Ok(Self::from_spacing(d))
    }

    pub fn from_spacing(d: f64) -> Self {
        Self { t: d * d / 4.0, r_neighbor: 3.0 * d, delta: 3.0 * d, k_fallback: 8 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.t > 0.0 && self.t.is_finite()) {
            return bad("t must be positive and finite");
        }
        if !(self.r_neighbor > 0.0 && self.r_neighbor.is_finite()) {
            return bad("r_neighbor must be positive and finite");
        }
        if !(self.delta >= self.r_neighbor && self.delta.is_finite()) {
            return bad("delta must be finite and at least r_neighbor");
        }
        if self.k_fallback < 3 {
            return bad("k_fallback must be at least 3");
        }
        Ok(())
    }
}

/// Stiffness matrix `Q` and the diagonal of the mass matrix `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct LboPair {
    pub stiffness: DMatrix<f64>,
    pub mass: DVector<f64>,
}

impl LboPair {
    /// Wraps an externally built pair after checking shape, symmetry, zero
    /// row sums and positive masses.
    pub fn from_parts(stiffness: DMatrix<f64>, mass: DVector<f64>) -> Result<Self> {
        let n = mass.len();
        if stiffness.nrows() != n || stiffness.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: stiffness.nrows() });
        }
        if let Some(i) = mass.iter().position(|&b| !(b > 0.0 && b.is_finite())) {
            return Err(Error::NonPositiveArea { index: i, area: mass[i] });
        }
        let scale = stiffness.iter().fold(0.0f64, |m, q| m.max(q.abs()));
        for i in 0..n {
            let row: f64 = stiffness.row(i).sum();
            if row.abs() > 1e-10 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::InvalidParameter(format!("row {i} of Q does not sum to zero")));
            }
            for j in 0..i {
                if stiffness[(i, j)] != stiffness[(j, i)] {
                    return Err(Error::InvalidParameter("Q is not symmetric".into()));
                }
            }
        }
        Ok(Self { stiffness, mass })
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }
}

/// Tangent-plane Voronoi areas of every point.
pub fn voronoi_areas(cloud: &PointCloud, params: &LboParams) -> Result<DVector<f64>> {
    params.validate()?;
    let points = cloud.points();
    let grid = SpatialIndex::new(points, params.delta);
    let areas = exec::try_map_range(points.len(), |i| {
        let fit = grid.neighborhood(i, params.r_neighbor, params.k_fallback);
        let frame = frame_from_neighborhood(points, i, &fit)?;
        let hood = grid.within(&points[i], params.delta);
        area_from_neighborhood(points, i, &hood, &frame, params.delta)
    })?;
    Ok(DVector::from_vec(areas))
}

/// Assembles the heat-kernel stiffness matrix and the Voronoi mass matrix.
pub fn build_lbo(cloud: &PointCloud, params: &LboParams) -> Result<LboPair> {
    params.validate()?;
    let n = cloud.len();
    if n < 4 {
        return Err(Error::InvalidParameter(format!("need at least 4 points, got {n}")));
    }
    let points = cloud.points();
    let areas = voronoi_areas(cloud, params)?;
    let grid = SpatialIndex::new(points, params.delta);
    let norm = 1.0 / (4.0 * PI * params.t * params.t);
    let rows = exec::map_range(n, |i| {
        grid.within(&points[i], params.delta)
            .into_iter()
            .filter(|&j| j != i)
            .map(|j| {
                let w = areas[i] * areas[j] * norm * (-dist2(&points[i], &points[j]) / (4.0 * params.t)).exp();
                (j, w)
            })
            .collect::<Vec<_>>()
    });
    let mut q = DMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, w) in row {
            q[(i, j)] = w;
        }
    }
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (q[(i, j)] + q[(j, i)]);
            q[(i, j)] = s;
            q[(j, i)] = s;
        }
    }
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| q[(i, j)]).sum();
        q[(i, i)] = -off;
    }
    Ok(LboPair { stiffness: q, mass: areas })
}
