use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Named per-point scalar attribute carried alongside the coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarChannel {
    pub name: String,
    pub values: Vec<f64>,
}

/// Ordered set of points in 3D. Index `i` refers to the same point in every
/// matrix and signal derived from the cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<[f64; 3]>,
    channels: Vec<ScalarChannel>,
}

impl PointCloud {
    /// Builds a cloud, rejecting non-finite coordinates.
    pub fn new(points: Vec<[f64; 3]>) -> Result<Self> {
        if let Some(i) = points.iter().position(|p| p.iter().any(|c| !c.is_finite())) {
            return Err(Error::InvalidParameter(format!("point {i} has a non-finite coordinate")));
        }
        Ok(Self { points, channels: Vec::new() })
    }

    /// Builds a cloud from an `N x 3` coordinate matrix.
    pub fn from_coordinates(coords: &DMatrix<f64>) -> Result<Self> {
        if coords.ncols() != 3 {
            return Err(Error::DimensionMismatch { expected: 3, found: coords.ncols() });
        }
        Self::new(
            (0..coords.nrows())
                .map(|i| [coords[(i, 0)], coords[(i, 1)], coords[(i, 2)]])
                .collect(),
        )
    }

    /// Attaches a scalar channel with one value per point.
    pub fn with_channel(mut self, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.points.len() {
            return Err(Error::DimensionMismatch { expected: self.points.len(), found: values.len() });
        }
        self.channels.push(ScalarChannel { name: name.into(), values });
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn point(&self, i: usize) -> [f64; 3] {
        self.points[i]
    }

    pub fn channels(&self) -> &[ScalarChannel] {
        &self.channels
    }

    /// One coordinate axis (0 = x, 1 = y, 2 = z) as a signal.
    pub fn axis(&self, axis: usize) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.points.iter().map(|p| p[axis]))
    }

    /// The `N x 3` coordinate matrix, one column per axis.
    pub fn coordinates(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.len(), 3, |i, j| self.points[i][j])
    }

    /// Reorders points so that new index `k` holds old point `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: perm.len() });
        }
        let mut seen = vec![false; self.len()];
        for &p in perm {
            if p >= self.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParameter("not a permutation".into()));
            }
        }
        Ok(Self {
            points: perm.iter().map(|&p| self.points[p]).collect(),
            channels: self
                .channels
                .iter()
                .map(|c| ScalarChannel {
                    name: c.name.clone(),
                    values: perm.iter().map(|&p| c.values[p]).collect(),
                })
                .collect(),
        })
    }
}

pub(crate) fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}
