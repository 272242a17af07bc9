mod common;

use common::{generated, permutation};
use proptest::prelude::*;
use sdpxlab::nn::{self, Arch, NetParams};
use sdpxlab::SdpInstance;

fn case() -> impl Strategy<Value = (SdpInstance, Vec<usize>, Vec<usize>, usize, u64)> {
    generated(7).prop_flat_map(|inst| {
        let (n, m) = (inst.n, inst.m);
        (Just(inst), permutation(n), permutation(m), 0usize..6, any::<u64>())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn forward_pass_properties((inst, perm, order, k, seed) in case()) {
        let arch = Arch::ALL[k];
        let params = NetParams::seeded(arch, 6, 2, seed).unwrap();
        let base = nn::forward_trajectory(&inst, &params).unwrap();
        let moved = nn::forward_trajectory(&inst.permuted(&perm), &params).unwrap();
        let reordered = nn::forward_trajectory(&inst.reorder_constraints(&order), &params).unwrap();
        let ids_v: Vec<usize> = (0..inst.n).collect();
        let ids_c: Vec<usize> = (0..inst.m).collect();
        for t in 0..base.len() {
            prop_assert!(base[t].is_finite());
            prop_assert!(base[t].asymmetry() <= 1e-12, "{}", arch);
            prop_assert!(nn::max_deviation(&base[t], &moved[t], &perm, &ids_c) <= 1e-9, "{}", arch);
            prop_assert!(nn::max_deviation(&base[t], &reordered[t], &ids_v, &order) <= 1e-12, "{}", arch);
        }
        prop_assert!(nn::coloring_respect(&inst, &params).unwrap().is_empty(), "{}", arch);
    }

    #[test]
    fn prediction_is_symmetric(inst in generated(7), k in 0usize..6, seed in any::<u64>()) {
        let params = NetParams::seeded(Arch::ALL[k], 4, 1, seed).unwrap();
        let x = nn::predict(&inst, &params).unwrap();
        for i in 0..inst.n {
            for j in 0..inst.n {
                prop_assert_eq!(x.get(i, j).to_bits(), x.get(j, i).to_bits());
            }
        }
    }
}

#[test]
fn seeded_weights_are_reproducible() {
    for arch in Arch::ALL {
        assert_eq!(NetParams::seeded(arch, 8, 3, 11).unwrap(), NetParams::seeded(arch, 8, 3, 11).unwrap());
    }
}
