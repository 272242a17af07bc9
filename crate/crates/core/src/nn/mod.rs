//! Inference-only forward passes of variable–constraint message-passing
//! networks with seeded weights.
//!
//! Every sum over a neighborhood accumulates its summands after sorting them
//! by value, so two cells whose inputs agree as multisets produce bit-identical
//! outputs regardless of indexing.

mod mlp;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::color::{Algo, QuantizedKey, Refiner};
use crate::error::{Error, Result};
use crate::instance::SdpInstance;
use crate::matrix::SymMatrix;

pub use mlp::{Linear, MlpParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arch {
    Vcmpnn,
    Vc2mpnn,
    Delta,
    Vc2ign,
    Vc2fmpnn,
    Vcet,
}

impl Arch {
    pub const ALL: [Arch; 6] = [Arch::Vcmpnn, Arch::Vc2mpnn, Arch::Delta, Arch::Vc2ign, Arch::Vc2fmpnn, Arch::Vcet];

    pub fn name(self) -> &'static str {
        match self {
            Arch::Vcmpnn => "vcmpnn",
            Arch::Vc2mpnn => "vc2mpnn",
            Arch::Delta => "delta",
            Arch::Vc2ign => "ign",
            Arch::Vc2fmpnn => "vc2fmpnn",
            Arch::Vcet => "vcet",
        }
    }

    /// The refinement whose colors this network can never split.
    pub fn matching_algo(self) -> Algo {
        match self {
            Arch::Vcmpnn => Algo::Vcwl,
            Arch::Vc2mpnn => Algo::Vc2wl,
            Arch::Delta => Algo::Delta,
            Arch::Vc2ign => Algo::Vc2ignwl,
            Arch::Vc2fmpnn => Algo::Vc2fwl,
            Arch::Vcet => Algo::Vc2fwlPlus,
        }
    }

    /// Nets whose variable update is direction-aware and gets averaged with
    /// its transpose after each layer.
    fn averages_transpose(self) -> bool {
        matches!(self, Arch::Vc2mpnn | Arch::Delta | Arch::Vcet)
    }
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Arch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Arch::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown architecture `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttentionParams {
    pub w_q: Linear,
    pub w_k: Linear,
    pub w_v1: Linear,
    pub w_v2: Linear,
    pub ffn: MlpParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IgnParams {
    pub w: [Linear; 9],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum VarMixer {
    None,
    RowCol { row: MlpParams, col: MlpParams },
    Folklore { map: MlpParams, msg: MlpParams },
    Ign(IgnParams),
    Attention(AttentionParams),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    pub msg_cv: MlpParams,
    pub msg_vc: MlpParams,
    pub upd_c: MlpParams,
    pub upd_v: MlpParams,
    pub mixer: VarMixer,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetParams {
    pub arch: Arch,
    pub d: usize,
    pub init_v: MlpParams,
    pub init_c: MlpParams,
    pub layers: Vec<LayerParams>,
    pub decode: MlpParams,
}

impl NetParams {
    /// Weights uniform in [−0.5, 0.5], drawn in a fixed order from one stream.
    pub fn seeded(arch: Arch, d: usize, layers: usize, seed: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("embedding dimension must be positive".into()));
        }
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let r = &mut rng;
        let init_v = MlpParams::seeded(&[2, d, d], r);
        let init_c = MlpParams::seeded(&[1, d, d], r);
        let mut ls = Vec::with_capacity(layers);
        for _ in 0..layers {
            let msg_cv = MlpParams::seeded(&[d + 1, d, d], r);
            let msg_vc = MlpParams::seeded(&[d + 1, d, d], r);
            let upd_c = MlpParams::seeded(&[2 * d, d, d], r);
            let (mixer, parts) = match arch {
                Arch::Vcmpnn => (VarMixer::None, 2),
                Arch::Vc2mpnn => {
                    (VarMixer::RowCol { row: MlpParams::seeded(&[d, d, d], r), col: MlpParams::seeded(&[d, d, d], r) }, 4)
                }
                Arch::Delta => (
                    VarMixer::RowCol { row: MlpParams::seeded(&[d + 1, d, d], r), col: MlpParams::seeded(&[d + 1, d, d], r) },
                    4,
                ),
                Arch::Vc2fmpnn => {
                    (VarMixer::Folklore { map: MlpParams::seeded(&[d, d, d], r), msg: MlpParams::seeded(&[d, d, d], r) }, 3)
                }
                Arch::Vc2ign => (VarMixer::Ign(IgnParams { w: std::array::from_fn(|_| Linear::seeded(d, r)) }), 3),
                Arch::Vcet => (
                    VarMixer::Attention(AttentionParams {
                        w_q: Linear::seeded(d, r),
                        w_k: Linear::seeded(d, r),
                        w_v1: Linear::seeded(d, r),
                        w_v2: Linear::seeded(d, r),
                        ffn: MlpParams::seeded(&[d, d, d], r),
                    }),
                    3,
                ),
            };
            let upd_v = MlpParams::seeded(&[parts * d, d, d], r);
            ls.push(LayerParams { msg_cv, msg_vc, upd_c, upd_v, mixer });
        }
        let decode = MlpParams::seeded(&[d, d, d, 1], r);
        Ok(NetParams { arch, d, init_v, init_c, layers: ls, decode })
    }
}

/// Cell embeddings `var` (n·n·d, cell-major) and constraint embeddings `con` (m·d).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingState {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub layer: usize,
    pub var: Vec<f64>,
    pub con: Vec<f64>,
}

impl EmbeddingState {
    pub fn cell(&self, i: usize, j: usize) -> &[f64] {
        let c = (i * self.n + j) * self.d;
        &self.var[c..c + self.d]
    }

    pub fn constraint(&self, k: usize) -> &[f64] {
        &self.con[k * self.d..(k + 1) * self.d]
    }

    fn cell_idx(&self, c: usize) -> &[f64] {
        &self.var[c * self.d..(c + 1) * self.d]
    }

    /// `max |h_ij − h_ji|` over all cells and features.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in i + 1..self.n {
                for (a, b) in self.cell(i, j).iter().zip(self.cell(j, i)) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.var.iter().chain(&self.con).all(|v| v.is_finite())
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Elementwise sum of `terms` accumulated in lexicographic value order.
fn sorted_sum(mut terms: Vec<Vec<f64>>, d: usize) -> Vec<f64> {
    terms.sort_by(|a, b| lex_cmp(a, b));
    let mut out = vec![0.0; d];
    for t in &terms {
        for (o, v) in out.iter_mut().zip(t) {
            *o += v;
        }
    }
    out
}

fn sorted_scalar_sum(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.iter().sum()
}

fn concat(parts: &[&[f64]]) -> Vec<f64> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

fn with_scalar(a: f64, h: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(h.len() + 1);
    v.push(a);
    v.extend_from_slice(h);
    v
}

/// Neighborhood tables; coefficients that quantize to zero are dropped, as in
/// color refinement.
struct Structure {
    n: usize,
    m: usize,
    c: Vec<f64>,
    adj: Vec<f64>,
    cell_cons: Vec<Vec<(f64, usize)>>,
    con_cells: Vec<Vec<(f64, usize)>>,
    b: Vec<f64>,
}

impl Structure {
    fn new(inst: &SdpInstance) -> Self {
        let n = inst.n;
        let c = inst.c.as_slice().to_vec();
        let adj = c.iter().map(|&v| if QuantizedKey::new(v).is_zero() { 0.0 } else { 1.0 }).collect();
        let mut cell_cons = vec![Vec::new(); n * n];
        let mut con_cells = vec![Vec::new(); inst.m];
        for (k, ak) in inst.a.iter().enumerate() {
            for &(i, j, v) in ak.coords() {
                if QuantizedKey::new(v).is_zero() {
                    continue;
                }
                let cells: &[usize] = if i == j { &[i * n + i] } else { &[i * n + j, j * n + i] };
                for &cell in cells {
                    cell_cons[cell].push((v, k));
                    con_cells[k].push((v, cell));
                }
            }
        }
        Structure { n, m: inst.m, c, adj, cell_cons, con_cells, b: inst.b.clone() }
    }
}

pub fn init_embeddings(inst: &SdpInstance, params: &NetParams) -> EmbeddingState {
    init_with(&Structure::new(inst), params)
}

fn init_with(s: &Structure, params: &NetParams) -> EmbeddingState {
    let n = s.n;
    let var = (0..n * n)
        .into_par_iter()
        .flat_map_iter(|c| params.init_v.forward(&[s.c[c], if c / n == c % n { 1.0 } else { 0.0 }]))
        .collect();
    let con = s.b.iter().flat_map(|&b| params.init_c.forward(&[b])).collect();
    EmbeddingState { n, m: s.m, d: params.d, layer: 0, var, con }
}

fn check_shapes(s: &Structure, state: &EmbeddingState, params: &NetParams) -> Result<()> {
    if state.n != s.n || state.m != s.m || state.d != params.d {
        return Err(Error::Shape(format!(
            "state is n={} m={} d={}, instance/params are n={} m={} d={}",
            state.n, state.m, state.d, s.n, s.m, params.d
        )));
    }
    if state.var.len() != s.n * s.n * state.d || state.con.len() != s.m * state.d {
        return Err(Error::Shape("embedding buffers have the wrong length".into()));
    }
    Ok(())
}

fn layer_norm(x: &[f64]) -> Vec<f64> {
    let d = x.len() as f64;
    let mean = x.iter().sum::<f64>() / d;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d;
    let denom = (var + 1e-5).sqrt();
    x.iter().map(|v| (v - mean) / denom).collect()
}

/// Per-cell projections used by the triangular attention.
struct EtCache {
    q: Vec<Vec<f64>>,
    k: Vec<Vec<f64>>,
    v1: Vec<Vec<f64>>,
    v2: Vec<Vec<f64>>,
}

impl EtCache {
    fn new(state: &EmbeddingState, p: &AttentionParams) -> Self {
        let cells = state.n * state.n;
        let normed: Vec<Vec<f64>> = (0..cells).map(|c| layer_norm(state.cell_idx(c))).collect();
        EtCache {
            q: normed.iter().map(|x| p.w_q.apply(x)).collect(),
            k: normed.iter().map(|x| p.w_k.apply(x)).collect(),
            v1: normed.iter().map(|x| p.w_v1.apply(x)).collect(),
            v2: normed.iter().map(|x| p.w_v2.apply(x)).collect(),
        }
    }

    /// Softmax weights over `l` for the triple `(i, l, j)` plus their normalizer.
    fn weights(&self, n: usize, d: usize, i: usize, j: usize) -> Vec<f64> {
        let scale = 1.0 / (d as f64).sqrt();
        let scores: Vec<f64> = (0..n)
            .map(|l| {
                let (q, k) = (&self.q[i * n + l], &self.k[l * n + j]);
                q.iter().zip(k).map(|(a, b)| a * b).sum::<f64>() * scale
            })
            .collect();
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let denom = sorted_scalar_sum(e.clone());
        e.iter().map(|v| v / denom).collect()
    }

    fn tri_attn(&self, n: usize, d: usize, i: usize, j: usize) -> Vec<f64> {
        let w = self.weights(n, d, i, j);
        let terms = (0..n)
            .map(|l| {
                let (a, b) = (&self.v1[i * n + l], &self.v2[l * n + j]);
                a.iter().zip(b).map(|(x, y)| w[l] * (x * y)).collect()
            })
            .collect();
        sorted_sum(terms, d)
    }
}

/// Attention weights `α_ilj` over `l` of a VCET layer at cell `(i, j)`.
pub fn attention_weights(state: &EmbeddingState, params: &AttentionParams, i: usize, j: usize) -> Result<Vec<f64>> {
    if i >= state.n || j >= state.n {
        return Err(Error::Shape(format!("cell ({i},{j}) outside n = {}", state.n)));
    }
    Ok(EtCache::new(state, params).weights(state.n, state.d, i, j))
}

enum MixCache {
    None,
    RowCol { row: Vec<Vec<f64>>, col: Vec<Vec<f64>> },
    Delta { row: [Vec<Vec<f64>>; 2], col: [Vec<Vec<f64>>; 2] },
    Folklore(Vec<Vec<f64>>),
    Ign { tr: Vec<f64>, total: Vec<f64>, s: Vec<Vec<f64>> },
    Et(EtCache),
}

fn build_cache(arch: Arch, state: &EmbeddingState, mixer: &VarMixer) -> MixCache {
    let (n, d) = (state.n, state.d);
    let cells = n * n;
    match (arch, mixer) {
        (_, VarMixer::None) => MixCache::None,
        (Arch::Delta, VarMixer::RowCol { row, col }) => {
            let table = |mlp: &MlpParams, a: f64| (0..cells).map(|c| mlp.forward(&concat(&[state.cell_idx(c), &[a]]))).collect();
            MixCache::Delta { row: [table(row, 0.0), table(row, 1.0)], col: [table(col, 0.0), table(col, 1.0)] }
        }
        (_, VarMixer::RowCol { row, col }) => MixCache::RowCol {
            row: (0..cells).map(|c| row.forward(state.cell_idx(c))).collect(),
            col: (0..cells).map(|c| col.forward(state.cell_idx(c))).collect(),
        },
        (_, VarMixer::Folklore { map, .. }) => MixCache::Folklore((0..cells).map(|c| map.forward(state.cell_idx(c))).collect()),
        (_, VarMixer::Ign(_)) => MixCache::Ign {
            tr: sorted_sum((0..n).map(|i| state.cell(i, i).to_vec()).collect(), d),
            total: sorted_sum((0..cells).map(|c| state.cell_idx(c).to_vec()).collect(), d),
            s: (0..n).map(|i| sorted_sum((0..n).map(|u| state.cell(i, u).to_vec()).collect(), d)).collect(),
        },
        (_, VarMixer::Attention(p)) => MixCache::Et(EtCache::new(state, p)),
    }
}

fn add_into(acc: &mut [f64], x: &[f64]) {
    for (a, v) in acc.iter_mut().zip(x) {
        *a += v;
    }
}

fn mixer_parts(
    s: &Structure,
    state: &EmbeddingState,
    mixer: &VarMixer,
    cache: &MixCache,
    i: usize,
    j: usize,
) -> Vec<Vec<f64>> {
    let (n, d) = (s.n, state.d);
    match (mixer, cache) {
        (_, MixCache::None) => vec![],
        (_, MixCache::RowCol { row, col }) => {
            let m_col = sorted_sum((0..n).map(|u| col[u * n + j].clone()).collect(), d);
            let m_row = sorted_sum((0..n).map(|u| row[i * n + u].clone()).collect(), d);
            vec![m_col, m_row]
        }
        (_, MixCache::Delta { row, col }) => {
            let flag = |a: usize, b: usize| s.adj[a * n + b] as usize;
            let m_col = sorted_sum((0..n).map(|u| col[flag(u, i)][u * n + j].clone()).collect(), d);
            let m_row = sorted_sum((0..n).map(|u| row[flag(u, j)][i * n + u].clone()).collect(), d);
            vec![m_col, m_row]
        }
        (VarMixer::Folklore { msg, .. }, MixCache::Folklore(mapped)) => {
            let terms = (0..n)
                .map(|u| {
                    let x: Vec<f64> = mapped[u * n + j].iter().zip(&mapped[i * n + u]).map(|(a, b)| a + b).collect();
                    msg.forward(&x)
                })
                .collect();
            vec![sorted_sum(terms, d)]
        }
        (VarMixer::Ign(p), MixCache::Ign { tr, total, s: rows }) => {
            let zero = vec![0.0; d];
            let on_diag = i == j;
            let pick = |v: &[f64]| if on_diag { v.to_vec() } else { zero.clone() };
            let pair_sum = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<f64>>();
            let ops: [Vec<f64>; 9] = [
                state.cell(i, j).to_vec(),
                tr.clone(),
                total.clone(),
                pick(state.cell(i, i)),
                pick(&rows[i]),
                pick(tr),
                pick(total),
                pair_sum(&rows[i], &rows[j]),
                pair_sum(state.cell(i, i), state.cell(j, j)),
            ];
            let mut out = vec![0.0; d];
            for (op, w) in ops.iter().zip(&p.w) {
                add_into(&mut out, &w.apply(op));
            }
            vec![out]
        }
        (VarMixer::Attention(p), MixCache::Et(cache)) => {
            let mut x = state.cell(i, j).to_vec();
            add_into(&mut x, &cache.tri_attn(n, d, i, j));
            vec![p.ffn.forward(&x)]
        }
        _ => unreachable!("mixer and cache built together"),
    }
}

fn layer_with(s: &Structure, arch: Arch, state: &EmbeddingState, lp: &LayerParams, d: usize) -> EmbeddingState {
    let n = s.n;
    let cache = build_cache(arch, state, &lp.mixer);
    let mut var: Vec<f64> = (0..n * n)
        .into_par_iter()
        .flat_map_iter(|c| {
            let (i, j) = (c / n, c % n);
            let h = state.cell_idx(c);
            let m_cv = sorted_sum(
                s.cell_cons[c].iter().map(|&(a, k)| lp.msg_cv.forward(&with_scalar(a, state.constraint(k)))).collect(),
                d,
            );
            let mixed = mixer_parts(s, state, &lp.mixer, &cache, i, j);
            let mut input = h.to_vec();
            for part in &mixed {
                input.extend_from_slice(part);
            }
            input.extend_from_slice(&m_cv);
            lp.upd_v.forward(&input)
        })
        .collect();
    if arch.averages_transpose() {
        for i in 0..n {
            for j in i + 1..n {
                for f in 0..d {
                    let (a, b) = ((i * n + j) * d + f, (j * n + i) * d + f);
                    let avg = (var[a] + var[b]) * 0.5;
                    var[a] = avg;
                    var[b] = avg;
                }
            }
        }
    }
    let con = (0..s.m)
        .flat_map(|k| {
            let msg = sorted_sum(
                s.con_cells[k].iter().map(|&(a, c)| lp.msg_vc.forward(&with_scalar(a, state.cell_idx(c)))).collect(),
                d,
            );
            lp.upd_c.forward(&concat(&[state.constraint(k), &msg]))
        })
        .collect();
    EmbeddingState { n, m: s.m, d, layer: state.layer + 1, var, con }
}

/// Applies layer `state.layer` of `params`.
pub fn layer(state: &EmbeddingState, inst: &SdpInstance, params: &NetParams) -> Result<EmbeddingState> {
    let s = Structure::new(inst);
    check_shapes(&s, state, params)?;
    let lp = params
        .layers
        .get(state.layer)
        .ok_or_else(|| Error::InvalidArgument(format!("network has only {} layers", params.layers.len())))?;
    Ok(layer_with(&s, params.arch, state, lp, params.d))
}

/// States after `0..=L` layers.
pub fn forward_trajectory(inst: &SdpInstance, params: &NetParams) -> Result<Vec<EmbeddingState>> {
    let s = Structure::new(inst);
    let mut out = vec![init_with(&s, params)];
    for lp in &params.layers {
        let next = layer_with(&s, params.arch, out.last().expect("non-empty"), lp, params.d);
        if !next.is_finite() {
            return Err(Error::Numerical(format!("non-finite embedding after layer {}", next.layer)));
        }
        out.push(next);
    }
    Ok(out)
}

pub fn forward(inst: &SdpInstance, params: &NetParams) -> Result<EmbeddingState> {
    Ok(forward_trajectory(inst, params)?.pop().expect("non-empty"))
}

/// Per-cell readout to a scalar, averaged with the transpose.
pub fn decode(state: &EmbeddingState, params: &NetParams) -> Result<SymMatrix> {
    params.decode.check_input(state.d, "decode")?;
    let n = state.n;
    let raw: Vec<f64> = (0..n * n).map(|c| params.decode.forward(state.cell_idx(c))[0]).collect();
    Ok(SymMatrix::from_upper_fn(n, |i, j| (raw[i * n + j] + raw[j * n + i]) * 0.5))
}

pub fn predict(inst: &SdpInstance, params: &NetParams) -> Result<SymMatrix> {
    decode(&forward(inst, params)?, params)
}

/// Largest entrywise deviation between `a` and `b` after relabeling `b`'s
/// cells by `perm` and its constraints by `order` (new `k` is old `order[k]`).
pub fn max_deviation(a: &EmbeddingState, b: &EmbeddingState, perm: &[usize], order: &[usize]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.n {
        for j in 0..a.n {
            for (x, y) in a.cell(i, j).iter().zip(b.cell(perm[i], perm[j])) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    for (new, &old) in order.iter().enumerate() {
        for (x, y) in a.constraint(old).iter().zip(b.constraint(new)) {
            worst = worst.max((x - y).abs());
        }
    }
    worst
}

/// A pair of cells (or constraints) that share a color but not an embedding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringViolation {
    pub layer: usize,
    pub kind: &'static str,
    pub first: usize,
    pub second: usize,
}

/// Checks that layer-`t` embeddings are bitwise equal whenever the matching
/// refinement's round-`t` colors are equal, for every layer.
pub fn coloring_respect(inst: &SdpInstance, params: &NetParams) -> Result<Vec<ColoringViolation>> {
    let traj = forward_trajectory(inst, params)?;
    let refiner = Refiner::new(inst);
    let colors = refiner.trajectory(params.arch.matching_algo(), params.layers.len())?;
    let mut out = Vec::new();
    for (t, (emb, col)) in traj.iter().zip(&colors).enumerate() {
        let mut first_var = std::collections::HashMap::new();
        for c in 0..emb.n * emb.n {
            let rep = *first_var.entry(col.var[c]).or_insert(c);
            if emb.cell_idx(rep).iter().zip(emb.cell_idx(c)).any(|(a, b)| a.to_bits() != b.to_bits()) {
                out.push(ColoringViolation { layer: t, kind: "var", first: rep, second: c });
            }
        }
        let mut first_con = std::collections::HashMap::new();
        for k in 0..emb.m {
            let rep = *first_con.entry(col.con[k]).or_insert(k);
            if emb.constraint(rep).iter().zip(emb.constraint(k)).any(|(a, b)| a.to_bits() != b.to_bits()) {
                out.push(ColoringViolation { layer: t, kind: "con", first: rep, second: k });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prop32() -> SdpInstance {
        SdpInstance::from_dense(
            &[vec![1.0, 1.0, 0.0], vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
            &[
                vec![vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]],
                vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]],
            ],
            &[1.0, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn zero_weights_give_zero_embeddings() {
        let mut p = NetParams::seeded(Arch::Vcmpnn, 1, 0, 0).unwrap();
        p.init_v = MlpParams::zeros(&[2, 1, 1]);
        p.init_c = MlpParams::zeros(&[1, 1, 1]);
        let e = init_embeddings(&prop32(), &p);
        assert!(e.var.iter().chain(&e.con).all(|&v| v == 0.0));
        p.decode = MlpParams::zeros(&[1, 1, 1, 1]);
        assert_eq!(decode(&e, &p).unwrap(), SymMatrix::zeros(3));
    }

    #[test]
    fn init_classes_follow_initial_colors() {
        let inst = prop32();
        let p = NetParams::seeded(Arch::Vc2fmpnn, 4, 0, 5).unwrap();
        let e = init_embeddings(&inst, &p);
        let col = Refiner::new(&inst).init();
        for a in 0..9 {
            for b in 0..9 {
                assert_eq!(col.var[a] == col.var[b], e.cell_idx(a) == e.cell_idx(b), "cells {a} {b}");
            }
        }
    }

    #[test]
    fn folklore_net_splits_what_vcmpnn_cannot() {
        let inst = prop32();
        for seed in 0..3 {
            let f = forward(&inst, &NetParams::seeded(Arch::Vc2fmpnn, 8, 2, seed).unwrap()).unwrap();
            assert_ne!(f.cell(0, 0), f.cell(2, 2));
            let v = forward(&inst, &NetParams::seeded(Arch::Vcmpnn, 8, 2, seed).unwrap()).unwrap();
            assert_eq!(v.cell(0, 0), v.cell(2, 2));
        }
    }

    #[test]
    fn attention_rows_are_stochastic() {
        let inst = prop32();
        let p = NetParams::seeded(Arch::Vcet, 8, 1, 3).unwrap();
        let e = init_embeddings(&inst, &p);
        let VarMixer::Attention(ap) = &p.layers[0].mixer else { panic!("vcet mixer") };
        for i in 0..3 {
            for j in 0..3 {
                let w = attention_weights(&e, ap, i, j).unwrap();
                assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let p = NetParams::seeded(Arch::Vc2ign, 4, 1, 1).unwrap();
        let e = init_embeddings(&prop32(), &p);
        let other = SdpInstance::from_dense(&[vec![1.0]], &[vec![vec![1.0]]], &[1.0]).unwrap();
        assert!(matches!(layer(&e, &other, &p), Err(Error::Shape(_))));
    }

    #[test]
    fn arch_names_roundtrip() {
        for a in Arch::ALL {
            assert_eq!(a.name().parse::<Arch>().unwrap(), a);
        }
    }
}
