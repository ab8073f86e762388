//! Discrete Laplace-Beltrami operator on raw point clouds.

mod cloud;
mod harmonic;
mod lbo;
mod neighbors;
pub mod shapes;
mod tangent;
mod voronoi;

pub use cloud::{PointCloud, ScalarChannel};
pub use harmonic::{solve_harmonic_basis, HarmonicBasis};
pub use lbo::{build_lbo, voronoi_areas, LboPair, LboParams};
pub use neighbors::{mean_nearest_neighbor_distance, SpatialIndex};
pub use tangent::{estimate_tangent_frame, TangentFrame};
pub use voronoi::{clipped_cell_area, voronoi_cell_area};
