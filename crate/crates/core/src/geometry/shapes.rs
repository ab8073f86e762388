//! Deterministic synthetic surfaces used by tests, benches and demos.

use std::f64::consts::PI;

use super::cloud::PointCloud;

const GOLDEN: f64 = 0.618_033_988_749_894_9;

fn cloud(points: Vec<[f64; 3]>) -> PointCloud {
    PointCloud::new(points).expect("generated coordinates are finite")
}

/// Near-uniform Fibonacci lattice on the sphere of the given radius.
pub fn fibonacci_sphere(n: usize, radius: f64) -> PointCloud {
    cloud(
        (0..n)
            .map(|k| {
                let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
                let rho = (1.0 - z * z).max(0.0).sqrt();
                let phi = 2.0 * PI * (k as f64 * GOLDEN).fract();
                [radius * rho * phi.cos(), radius * rho * phi.sin(), radius * z]
            })
            .collect(),
    )
}

/// Sphere with a smooth radial bump field, a closed surface with uneven
/// curvature.
pub fn lumpy_sphere(n: usize) -> PointCloud {
    let base = fibonacci_sphere(n, 1.0);
    cloud(
        base.points()
            .iter()
            .map(|p| {
                let s = 1.0 + 0.15 * (3.0 * p[0]).sin() * (2.0 * p[1]).cos() + 0.1 * p[2] * p[2];
                [s * p[0], s * p[1], 0.8 * s * p[2]]
            })
            .collect(),
    )
}

/// Torus with major radius `big` and minor radius `small`, sampled with an
/// area-weighted golden-ratio lattice.
pub fn torus(n: usize, big: f64, small: f64) -> PointCloud {
    let rings = ((n as f64 * small / big).sqrt()).round().max(3.0) as usize;
    let mut pts = Vec::with_capacity(n);
    for k in 0..n {
        let u = 2.0 * PI * (k as f64 + 0.5) / n as f64;
        let v = 2.0 * PI * (k as f64 * GOLDEN * rings as f64 / (rings as f64)).fract();
        let w = 2.0 * PI * ((k * rings) as f64 / n as f64).fract();
        let phi = v + w;
        let r = big + small * phi.cos();
        pts.push([r * u.cos(), r * u.sin(), small * phi.sin()]);
    }
    cloud(pts)
}

/// Rolled-up rectangle (open surface with boundary).
pub fn swiss_roll(n: usize) -> PointCloud {
    let (t0, t1) = (1.5 * PI, 4.5 * PI);
    cloud(
        (0..n)
            .map(|k| {
                let a = (k as f64 + 0.5) / n as f64;
                let t = (t0 * t0 + a * (t1 * t1 - t0 * t0)).sqrt();
                let y = 10.0 * (k as f64 * GOLDEN).fract();
                [t * t.cos(), y, t * t.sin()]
            })
            .collect(),
    )
}

/// `nx x ny` square grid with spacing `h` in the plane `z = 0`.
pub fn planar_grid(nx: usize, ny: usize, h: f64) -> PointCloud {
    cloud((0..nx * ny).map(|k| [(k % nx) as f64 * h, (k / nx) as f64 * h, 0.0]).collect())
}

/// Hexagonal lattice with nearest-neighbor spacing `h` in the plane `z = 0`.
pub fn hex_lattice(nx: usize, ny: usize, h: f64) -> PointCloud {
    let dy = h * 3f64.sqrt() / 2.0;
    cloud(
        (0..nx * ny)
            .map(|k| {
                let (i, j) = (k % nx, k / nx);
                let shift = if j % 2 == 1 { 0.5 * h } else { 0.0 };
                [i as f64 * h + shift, j as f64 * dy, 0.0]
            })
            .collect(),
    )
}
