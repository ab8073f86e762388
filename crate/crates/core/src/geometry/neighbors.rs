use std::collections::HashMap;

use super::cloud::dist2;
use crate::exec;

/// Uniform-grid spatial hash for exact fixed-radius queries.
pub struct SpatialIndex<'a> {
    points: &'a [[f64; 3]],
    cell: f64,
    buckets: HashMap<[i64; 3], Vec<usize>>,
}

impl<'a> SpatialIndex<'a> {
    /// `cell` should be close to the largest query radius.
    pub fn new(points: &'a [[f64; 3]], cell: f64) -> Self {
        let cell = if cell.is_finite() && cell > 0.0 { cell } else { 1.0 };
        let mut buckets: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(key(p, cell)).or_default().push(i);
        }
        Self { points, cell, buckets }
    }

    /// Indices of all points with `|p - center| <= radius`, ascending.
    pub fn within(&self, center: &[f64; 3], radius: f64) -> Vec<usize> {
        let reach = (radius / self.cell).ceil() as i64;
        let base = key(center, self.cell);
        let r2 = radius * radius;
        let mut out = Vec::new();
        for dx in -reach..=reach {
            for dy in -reach..=reach {
                for dz in -reach..=reach {
                    let k = [base[0] + dx, base[1] + dy, base[2] + dz];
                    if let Some(bucket) = self.buckets.get(&k) {
                        out.extend(bucket.iter().copied().filter(|&j| dist2(&self.points[j], center) <= r2));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// The `k` nearest points to point `i` (excluding `i`), ordered by
    /// distance then index.
    pub fn nearest(&self, i: usize, k: usize) -> Vec<usize> {
        let c = &self.points[i];
        let mut all: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(j, p)| (dist2(p, c), j))
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        all.into_iter().take(k).map(|(_, j)| j).collect()
    }

    /// Neighborhood used for local fits: the closed ball of `radius` around
    /// point `i` (including `i`), or `i` plus its `k_fallback` nearest
    /// neighbors when the ball holds fewer than three other points.
    pub fn neighborhood(&self, i: usize, radius: f64, k_fallback: usize) -> Vec<usize> {
        let ball = self.within(&self.points[i], radius);
        if ball.len() >= 4 {
            return ball;
        }
        let mut hood = self.nearest(i, k_fallback);
        hood.push(i);
        hood.sort_unstable();
        hood
    }
}

fn key(p: &[f64; 3], cell: f64) -> [i64; 3] {
    [
        (p[0] / cell).floor() as i64,
        (p[1] / cell).floor() as i64,
        (p[2] / cell).floor() as i64,
    ]
}

/// Mean distance from each point to its nearest neighbor (exact, O(N^2)).
pub fn mean_nearest_neighbor_distance(points: &[[f64; 3]]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let nn = exec::map_range(points.len(), |i| {
        points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, q)| dist2(&points[i], q))
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    });
    nn.iter().sum::<f64>() / points.len() as f64
}
