//! Shared fixtures for the benchmarks.

use lama_core::trainer::{init_codebook, RngStream};
use lama_core::{Codebook, Dataset};
use ndarray::Array2;

/// Zoo-sized random problem: a `kx * ky` codebook and `n` rows of `d` features.
pub fn fixture(kx: usize, ky: usize, n: usize, d: usize, seed: u64) -> (Codebook, Dataset) {
    let mut rng = RngStream::new(seed);
    let codebook = init_codebook(&mut rng, kx * ky, d);
    let rows = Array2::from_shape_fn((n, d), |_| rng.uniform());
    (codebook, Dataset::new(rows, None).expect("finite"))
}
