//! Shared fixtures for the criterion benches.

use elastowave::{LameParams, TorusGrid, VectorField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn params() -> LameParams {
    LameParams::new(2.0, 1.0).expect("elliptic")
}

/// Real band-limited random field on the `[−π, π)ⁿ` torus with `points` per axis.
pub fn random_field(dim: usize, points: usize, seed: u64) -> VectorField {
    let grid = TorusGrid::new(dim, points, std::f64::consts::PI).expect("valid grid");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    VectorField::random_band_limited(grid, points / 4, true, &mut rng).expect("band limit fits the grid")
}
