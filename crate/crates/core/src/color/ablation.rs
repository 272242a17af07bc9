//! Weaker refinement pipelines used as counterexample witnesses.

use super::{intern, Partition, QuantizedKey};
use crate::instance::SdpInstance;

/// Cell colors from `(C_ij, ⦃(A_k,ij, b_k) : k⦄)` over all constraints,
/// zero coefficients included and without a diagonal marker.
pub fn joint_encoding_init(inst: &SdpInstance) -> Vec<u32> {
    let n = inst.n;
    let sigs: Vec<Vec<u64>> = (0..n * n)
        .map(|cell| {
            let (i, j) = (cell / n, cell % n);
            let mut pairs: Vec<(u64, u64)> = inst
                .a
                .iter()
                .zip(&inst.b)
                .map(|(ak, &bk)| (QuantizedKey::new(ak.get(i, j)).0, QuantizedKey::new(bk).0))
                .collect();
            pairs.sort_unstable();
            let mut sig = vec![QuantizedKey::new(inst.c.get(i, j)).0];
            sig.extend(pairs.into_iter().flat_map(|(a, b)| [a, b]));
            sig
        })
        .collect();
    intern(&sigs)
}

/// Runs the constraint-free folklore update `v_ij ← (v_ij, ⦃⦃v_uj, v_iu⦄⦄)`
/// from the given cell colors until the partition stops changing.
pub fn multiset_fwl_stable(n: usize, init: &[u32]) -> Partition {
    assert_eq!(init.len(), n * n);
    let mut var = intern(&init.iter().map(|&c| vec![c as u64]).collect::<Vec<_>>());
    let mut rounds = 0;
    loop {
        let count = var.iter().max().map_or(0, |&m| m + 1);
        let sigs: Vec<Vec<u64>> = (0..n * n)
            .map(|cell| {
                let (i, j) = (cell / n, cell % n);
                let mut pairs: Vec<u64> = (0..n)
                    .map(|u| {
                        let (a, b) = (var[u * n + j] as u64, var[i * n + u] as u64);
                        (a.min(b) << 32) | a.max(b)
                    })
                    .collect();
                pairs.sort_unstable();
                let mut sig = vec![var[cell] as u64];
                sig.extend(pairs);
                sig
            })
            .collect();
        let next = intern(&sigs);
        rounds += 1;
        let next_count = next.iter().max().map_or(0, |&m| m + 1);
        var = next;
        if next_count == count {
            return Partition::from_colors(n, &var, &[] as &[u32], rounds);
        }
    }
}
