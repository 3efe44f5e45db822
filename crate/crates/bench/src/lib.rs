//! Seeded inputs shared by the benchmarks.

use pbench_core::geometry::{delaunay_triangulate, GradientSample, Point, Triangulation};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn points(n: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Point::new(rng.random::<f64>() * 600.0, rng.random::<f64>() * 400.0))
        .collect()
}

/// A triangulation of `n` random points and one noisy gradient per triangle.
pub fn gauge_session(n: usize, seed: u64) -> (Triangulation, Vec<GradientSample>) {
    let tri = delaunay_triangulate(&points(n, seed)).expect("random points triangulate");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let samples = (0..tri.triangles().len())
        .map(|t| GradientSample {
            triangle_index: t,
            p: rng.random::<f64>() - 0.5,
            q: rng.random::<f64>() - 0.5,
        })
        .collect();
    (tri, samples)
}

pub fn samples(n: usize, mean: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| mean + rng.random::<f64>() * 20.0).collect()
}
