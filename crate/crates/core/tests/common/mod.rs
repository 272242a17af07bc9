#![allow(dead_code)]

use proptest::prelude::*;
use sdpxlab::relax::{self, GenParams, Problem};
use sdpxlab::{SdpInstance, SymMatrix};

pub fn sym_matrix(n: usize) -> impl Strategy<Value = SymMatrix> {
    prop::collection::vec(-5.0f64..5.0, n * n).prop_map(move |v| SymMatrix::from_upper_fn(n, |i, j| v[i * n + j]))
}

/// Instances from every generator except the LMI one, which is dense and slow to refine.
pub fn generated(max_n: usize) -> impl Strategy<Value = SdpInstance> {
    (0usize..5, 3..=max_n, any::<u64>(), 0.2f64..0.8).prop_map(|(k, n, seed, p)| {
        let problem = Problem::ALL[k];
        relax::generate(problem, n, &GenParams { p: Some(p), ..Default::default() }, seed).unwrap()
    })
}

/// Small integer-valued instances so that coefficient ties occur often.
pub fn integer_instance(max_n: usize) -> impl Strategy<Value = SdpInstance> {
    (2..=max_n, 1usize..4).prop_flat_map(|(n, m)| {
        let cell = prop::collection::vec(-2i32..=2, n * n);
        (Just(n), cell.clone(), prop::collection::vec(cell, m), prop::collection::vec(-2i32..=2, m))
    })
    .prop_filter_map("zero constraint", |(n, c, a, b)| {
        let dense = |v: &[i32]| -> Vec<Vec<f64>> { (0..n).map(|i| (0..n).map(|j| f64::from(v[i.min(j) * n + i.max(j)])).collect()).collect() };
        let a: Vec<Vec<Vec<f64>>> = a.iter().map(|v| dense(v)).collect();
        let b: Vec<f64> = b.iter().map(|&v| f64::from(v)).collect();
        SdpInstance::from_dense(&dense(&c), &a, &b).ok().filter(|i| i.check_nonzero_constraints().is_ok())
    })
}

pub fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}
