//! Fractional manifold harmonic transforms on raw point clouds.
//!
//! The pipeline runs bottom-up: [`geometry`] turns a point cloud into a
//! discrete Laplace-Beltrami pair and its harmonic basis, [`transform`]
//! raises the normalized harmonic matrix to fractional powers, and the
//! remaining modules build convolution, sampling, encryption and radar
//! clutter filtering on top.

// NaN must fail the positivity checks, so `!(x > 0.0)` is deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod crypto;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod radar;
pub mod sampling;
pub mod spectral_ops;
pub mod transform;

pub use error::{Error, Result};
