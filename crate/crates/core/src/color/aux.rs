//! Folklore refinement as plain 1-WL on a directed, edge-colored graph with
//! one node per cell, per constraint and per triple `(i, u, j)`.

use super::{intern, Partition, QuantizedKey, Refiner};
use crate::error::{Error, Result};
use crate::instance::SdpInstance;

pub const AUX_DEFAULT_CAP: usize = 24;

const EDGE_PLAIN: (u64, u64) = (0, 0);
const TAG_VAR: u64 = 0;
const TAG_CON: u64 = 1;
const TAG_TRI: u64 = 2;

pub fn aux_graph_stable(inst: &SdpInstance) -> Result<Partition> {
    aux_graph_stable_with_cap(inst, AUX_DEFAULT_CAP)
}

pub fn aux_graph_stable_with_cap(inst: &SdpInstance, cap: usize) -> Result<Partition> {
    let n = inst.n;
    if n > cap {
        return Err(Error::SizeGuard(format!("n = {n} exceeds the auxiliary-graph cap {cap} ({} triple nodes)", n * n * n)));
    }
    let r = Refiner::new(inst);
    let m = inst.m;
    let var0 = 0;
    let con0 = n * n;
    let tri0 = n * n + m;
    let total = tri0 + n * n * n;

    let mut init: Vec<Vec<u64>> = Vec::with_capacity(total);
    for cell in 0..n * n {
        init.push(vec![TAG_VAR, r.c_key[cell].0, u64::from(cell / n == cell % n)]);
    }
    for k in 0..m {
        init.push(vec![TAG_CON, r.b_key[k].0]);
    }
    for i in 0..n {
        for u in 0..n {
            for j in 0..n {
                let (a, b) = (r.c_key[i * n + u].0, r.c_key[u * n + j].0);
                init.push(vec![TAG_TRI, a.min(b), a.max(b)]);
            }
        }
    }

    let mut incoming: Vec<Vec<((u64, u64), usize)>> = vec![Vec::new(); total];
    for i in 0..n {
        for j in 0..n {
            let cell = i * n + j;
            for u in 0..n {
                incoming[var0 + cell].push((EDGE_PLAIN, tri0 + (i * n + u) * n + j));
            }
            for &(q, k) in &r.cell_cons[cell] {
                incoming[var0 + cell].push(((1, q.0), con0 + k as usize));
            }
        }
    }
    for (k, cells) in r.con_cells.iter().enumerate() {
        for &(q, cell) in cells {
            incoming[con0 + k].push(((1, q.0), var0 + cell as usize));
        }
    }
    for i in 0..n {
        for u in 0..n {
            for j in 0..n {
                let t = tri0 + (i * n + u) * n + j;
                incoming[t].push((EDGE_PLAIN, var0 + i * n + u));
                incoming[t].push((EDGE_PLAIN, var0 + u * n + j));
            }
        }
    }
    debug_assert!(r.cell_cons.iter().flatten().all(|(q, _)| !QuantizedKey::is_zero(*q)));

    let mut colors = intern(&init);
    let mut count = colors.iter().max().map_or(0, |&c| c + 1);
    let mut rounds = 0;
    loop {
        let sigs: Vec<Vec<u64>> = (0..total)
            .map(|v| {
                let mut nb: Vec<(u64, u64, u64)> =
                    incoming[v].iter().map(|&((t, e), src)| (t, e, colors[src] as u64)).collect();
                nb.sort_unstable();
                let mut sig = Vec::with_capacity(1 + 3 * nb.len());
                sig.push(colors[v] as u64);
                sig.extend(nb.into_iter().flat_map(|(a, b, c)| [a, b, c]));
                sig
            })
            .collect();
        let next = intern(&sigs);
        rounds += 1;
        let next_count = next.iter().max().map_or(0, |&c| c + 1);
        colors = next;
        if next_count == count {
            break;
        }
        count = next_count;
        if rounds > total + 1 {
            return Err(Error::Internal("auxiliary 1-WL did not stabilize".into()));
        }
    }
    Ok(Partition::from_colors(n, &colors[var0..con0], &colors[con0..tri0], rounds))
}
