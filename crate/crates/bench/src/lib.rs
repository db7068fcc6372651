//! Fixtures shared by the benchmarks.

use ctfield::measures::quadrature_circle;
use ctfield::WeightedMeasure;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Uniform probability measure on `n` random points of the unit square.
pub fn random_measure(n: usize, dim: usize, seed: u64) -> WeightedMeasure {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let coords: Vec<f64> = (0..n * dim).map(|_| rng.random::<f64>()).collect();
    WeightedMeasure::uniform(dim, coords).expect("valid random measure")
}

/// Unit circle with `n` equal-arc atoms, normalized to a probability measure.
pub fn circle_measure(n: usize) -> WeightedMeasure {
    quadrature_circle(1.0, n).expect("valid circle").normalize()
}

/// Regular planar grid of `side * side` query points over [-1.5, 1.5]^2.
pub fn query_grid(side: usize) -> Vec<Vec<f64>> {
    let step = 3.0 / (side - 1) as f64;
    (0..side * side).map(|k| vec![-1.5 + step * (k % side) as f64, -1.5 + step * (k / side) as f64]).collect()
}
