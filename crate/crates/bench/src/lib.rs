//! Shared inputs for the benchmarks in `benches/`.

use bhtlab::signal::{make_ensemble, EnsembleShape, Grid, SampledFunction};

/// Seeded Gaussian-packet functions on `grid`.
pub fn packets(grid: Grid, count: usize) -> Vec<SampledFunction> {
    make_ensemble(11, count, &EnsembleShape::gaussian(grid))
        .expect("ensemble on a valid grid")
        .into_iter()
        .map(|m| m.function)
        .collect()
}
