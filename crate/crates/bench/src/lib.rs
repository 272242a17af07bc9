//! Shared inputs for the criterion benchmarks.

use sdpxlab::relax::{self, GenParams, Problem};
use sdpxlab::{SdpInstance, SymMatrix};

pub fn maxcut(n: usize, seed: u64) -> SdpInstance {
    relax::generate(Problem::Maxcut, n, &GenParams { p: Some(0.5), ..Default::default() }, seed).expect("valid parameters")
}

/// Deterministic dense symmetric matrix with entries in `[-1, 1]`.
pub fn test_matrix(n: usize) -> SymMatrix {
    SymMatrix::from_upper_fn(n, |i, j| ((i * 31 + j * 17) % 23) as f64 / 11.0 - 1.0)
}
