//! Variable-constraint color refinement on SDP instances.
//!
//! Every round builds one integer signature per cell and per constraint,
//! sorts the distinct signatures and hands out dense ids in that order.
//! Signatures start with the previous color, so each round refines the last.

mod ablation;
mod aux;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::SdpInstance;

pub use ablation::{joint_encoding_init, multiset_fwl_stable};
pub use aux::{aux_graph_stable, aux_graph_stable_with_cap, AUX_DEFAULT_CAP};

/// Coefficient key: the value rounded to 12 decimal places, with -0 mapped to +0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuantizedKey(pub u64);

impl QuantizedKey {
    pub fn new(x: f64) -> Self {
        let q = (x * 1e12).round();
        let q = if q == 0.0 { 0.0 } else { q };
        QuantizedKey(q.to_bits())
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algo {
    Vcwl,
    Vc2wl,
    Vc2fwl,
    Vc2fwlPlus,
    Delta,
    Vc2ignwl,
}

impl Algo {
    pub const ALL: [Algo; 6] = [Algo::Vcwl, Algo::Vc2wl, Algo::Vc2fwl, Algo::Vc2fwlPlus, Algo::Delta, Algo::Vc2ignwl];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Vcwl => "vcwl",
            Algo::Vc2wl => "vc2wl",
            Algo::Vc2fwl => "vc2fwl",
            Algo::Vc2fwlPlus => "vc2fwl+",
            Algo::Delta => "delta",
            Algo::Vc2ignwl => "ignwl",
        }
    }

    /// Algorithms whose raw cell signatures depend on orientation and are
    /// made symmetric by copying the upper triangle onto the lower.
    pub fn copies_upper(self) -> bool {
        matches!(self, Algo::Vc2wl | Algo::Vc2fwlPlus | Algo::Delta | Algo::Vc2ignwl)
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Algo::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown algorithm `{s}`")))
    }
}

/// Colors after some number of rounds. Ids are dense per namespace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorState {
    pub round: usize,
    pub n: usize,
    pub algo: Option<Algo>,
    pub var: Vec<u32>,
    pub con: Vec<u32>,
}

impl ColorState {
    pub fn var_color(&self, i: usize, j: usize) -> u32 {
        self.var[i * self.n + j]
    }

    pub fn num_var_colors(&self) -> usize {
        count_distinct(&self.var)
    }

    pub fn num_con_colors(&self) -> usize {
        count_distinct(&self.con)
    }

    pub fn partition(&self) -> Partition {
        Partition::from_colors(self.n, &self.var, &self.con, self.round)
    }
}

fn count_distinct(ids: &[u32]) -> usize {
    ids.iter().max().map_or(0, |&m| m as usize + 1)
}

/// Equivalence classes of cells and constraints, labelled by first occurrence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub n: usize,
    pub var: Vec<usize>,
    pub con: Vec<usize>,
    pub rounds: usize,
}

fn first_occurrence<T: Copy + Eq + std::hash::Hash>(ids: &[T]) -> Vec<usize> {
    let mut seen = std::collections::HashMap::new();
    ids.iter()
        .map(|&c| {
            let next = seen.len();
            *seen.entry(c).or_insert(next)
        })
        .collect()
}

impl Partition {
    pub fn from_colors<T: Copy + Eq + std::hash::Hash>(n: usize, var: &[T], con: &[T], rounds: usize) -> Self {
        Partition { n, var: first_occurrence(var), con: first_occurrence(con), rounds }
    }

    pub fn var_class(&self, i: usize, j: usize) -> usize {
        self.var[i * self.n + j]
    }

    pub fn num_var_classes(&self) -> usize {
        self.var.iter().max().map_or(0, |m| m + 1)
    }

    pub fn num_con_classes(&self) -> usize {
        self.con.iter().max().map_or(0, |m| m + 1)
    }

    /// Same classes, ignoring the round count.
    pub fn same_classes(&self, other: &Partition) -> bool {
        self.var == other.var && self.con == other.con
    }

    pub fn var_rows(&self) -> Vec<Vec<usize>> {
        self.var.chunks(self.n.max(1)).take(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "var": self.var_rows(), "con": self.con, "rounds": self.rounds })
    }
}

fn refines_ids(p: &[usize], q: &[usize]) -> bool {
    let mut map = std::collections::HashMap::new();
    p.iter().zip(q).all(|(&a, &b)| *map.entry(a).or_insert(b) == b)
}

/// True iff every class of `p` lies inside a class of `q`.
pub fn refines(p: &Partition, q: &Partition) -> Result<bool> {
    if p.n != q.n || p.var.len() != q.var.len() || p.con.len() != q.con.len() {
        return Err(Error::Shape("partitions are over different index sets".into()));
    }
    Ok(refines_ids(&p.var, &q.var) && refines_ids(&p.con, &q.con))
}

/// Sorts the signatures and returns dense ids in sorted order.
pub(crate) fn intern(sigs: &[Vec<u64>]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..sigs.len()).collect();
    order.sort_by(|&a, &b| sigs[a].cmp(&sigs[b]));
    let mut ids = vec![0u32; sigs.len()];
    let mut next = 0u32;
    for w in 0..order.len() {
        if w > 0 && sigs[order[w]] != sigs[order[w - 1]] {
            next += 1;
        }
        ids[order[w]] = next;
    }
    ids
}

/// Renumbers ids to `0..K` keeping their relative order.
fn densify(ids: &mut [u32]) {
    let mut used: Vec<u32> = ids.to_vec();
    used.sort_unstable();
    used.dedup();
    for c in ids.iter_mut() {
        *c = used.binary_search(c).expect("id present") as u32;
    }
}

/// Per-instance lookup tables shared by all refinement rounds.
#[derive(Clone, Debug)]
pub struct Refiner {
    n: usize,
    m: usize,
    c_key: Vec<QuantizedKey>,
    adj: Vec<bool>,
    /// For each cell, the constraints touching it with their coefficient keys.
    cell_cons: Vec<Vec<(QuantizedKey, u32)>>,
    /// For each constraint, the cells it touches (both orientations).
    con_cells: Vec<Vec<(QuantizedKey, u32)>>,
    b_key: Vec<QuantizedKey>,
}

impl Refiner {
    pub fn new(inst: &SdpInstance) -> Self {
        let n = inst.n;
        let c_key: Vec<QuantizedKey> = inst.c.as_slice().iter().map(|&v| QuantizedKey::new(v)).collect();
        let adj = c_key.iter().map(|k| !k.is_zero()).collect();
        let mut cell_cons = vec![Vec::new(); n * n];
        let mut con_cells = vec![Vec::new(); inst.m];
        for (k, ak) in inst.a.iter().enumerate() {
            for &(i, j, v) in ak.coords() {
                let q = QuantizedKey::new(v);
                if q.is_zero() {
                    continue;
                }
                let cells: &[usize] = if i == j { &[i * n + i] } else { &[i * n + j, j * n + i] };
                for &cell in cells {
                    cell_cons[cell].push((q, k as u32));
                    con_cells[k].push((q, cell as u32));
                }
            }
        }
        let b_key = inst.b.iter().map(|&v| QuantizedKey::new(v)).collect();
        Refiner { n, m: inst.m, c_key, adj, cell_cons, con_cells, b_key }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Constraint neighbors `N(ij)` with coefficient keys.
    pub fn cell_constraints(&self, i: usize, j: usize) -> &[(QuantizedKey, u32)] {
        &self.cell_cons[i * self.n + j]
    }

    pub fn init(&self) -> ColorState {
        let n = self.n;
        let var_sigs: Vec<Vec<u64>> = (0..n * n).map(|c| vec![self.c_key[c].0, u64::from(c / n == c % n)]).collect();
        let con_sigs: Vec<Vec<u64>> = self.b_key.iter().map(|k| vec![k.0]).collect();
        ColorState { round: 0, n, algo: None, var: intern(&var_sigs), con: intern(&con_sigs) }
    }

    fn check_state(&self, algo: Algo, state: &ColorState) -> Result<()> {
        if state.n != self.n || state.var.len() != self.n * self.n || state.con.len() != self.m {
            return Err(Error::Shape("color state does not match the instance".into()));
        }
        if let Some(a) = state.algo {
            if a != algo {
                return Err(Error::InvalidArgument(format!("state was produced by {a}, not {algo}")));
            }
        }
        Ok(())
    }

    fn con_part(&self, state: &ColorState, cell: usize, sig: &mut Vec<u64>) {
        let mut pairs: Vec<(u64, u64)> = self.cell_cons[cell].iter().map(|&(q, k)| (q.0, state.con[k as usize] as u64)).collect();
        pairs.sort_unstable();
        sig.extend(pairs.into_iter().flat_map(|(a, b)| [a, b]));
    }

    fn var_signature(&self, algo: Algo, s: &ColorState, i: usize, j: usize) -> Vec<u64> {
        let n = self.n;
        let v = |a: usize, b: usize| s.var[a * n + b] as u64;
        let mut sig = Vec::with_capacity(2 + 2 * n + 2 * self.cell_cons[i * n + j].len());
        sig.push(v(i, j));
        let sorted = |mut xs: Vec<u64>| {
            xs.sort_unstable();
            xs
        };
        match algo {
            Algo::Vcwl => {}
            Algo::Vc2wl | Algo::Vc2ignwl => {
                sig.extend(sorted((0..n).map(|u| v(u, j)).collect()));
                sig.extend(sorted((0..n).map(|u| v(i, u)).collect()));
                if algo == Algo::Vc2ignwl {
                    sig.push(v(i, i));
                    sig.push(v(j, j));
                }
            }
            Algo::Vc2fwl => {
                sig.extend(sorted(
                    (0..n)
                        .map(|u| {
                            let (a, b) = (v(u, j), v(i, u));
                            (a.min(b) << 32) | a.max(b)
                        })
                        .collect(),
                ));
            }
            Algo::Vc2fwlPlus => {
                sig.extend(sorted((0..n).map(|u| (v(u, j) << 32) | v(i, u)).collect()));
            }
            Algo::Delta => {
                let adj = |a: usize, b: usize| u64::from(self.adj[a * n + b]);
                sig.extend(sorted((0..n).map(|u| (v(u, j) << 1) | adj(u, i)).collect()));
                sig.extend(sorted((0..n).map(|u| (v(i, u) << 1) | adj(u, j)).collect()));
            }
        }
        self.con_part(s, i * n + j, &mut sig);
        sig
    }

    fn con_signature(&self, s: &ColorState, k: usize) -> Vec<u64> {
        let mut pairs: Vec<(u64, u64)> = self.con_cells[k].iter().map(|&(q, c)| (q.0, s.var[c as usize] as u64)).collect();
        pairs.sort_unstable();
        let mut sig = Vec::with_capacity(1 + 2 * pairs.len());
        sig.push(s.con[k] as u64);
        sig.extend(pairs.into_iter().flat_map(|(a, b)| [a, b]));
        sig
    }

    /// One synchronous round: cells and constraints read only the previous
    /// round's colors.
    pub fn step(&self, algo: Algo, state: &ColorState) -> Result<ColorState> {
        self.check_state(algo, state)?;
        let n = self.n;
        let var_sigs: Vec<Vec<u64>> = (0..n * n).map(|c| self.var_signature(algo, state, c / n, c % n)).collect();
        let con_sigs: Vec<Vec<u64>> = (0..self.m).map(|k| self.con_signature(state, k)).collect();
        let mut var = intern(&var_sigs);
        if algo.copies_upper() {
            for i in 0..n {
                for j in i + 1..n {
                    var[j * n + i] = var[i * n + j];
                }
            }
            densify(&mut var);
        }
        Ok(ColorState { round: state.round + 1, n, algo: Some(algo), var, con: intern(&con_sigs) })
    }

    /// States for rounds `0..=rounds`.
    pub fn trajectory(&self, algo: Algo, rounds: usize) -> Result<Vec<ColorState>> {
        let mut out = vec![self.init()];
        for _ in 0..rounds {
            let next = self.step(algo, out.last().expect("non-empty"))?;
            out.push(next);
        }
        Ok(out)
    }

    pub fn run_to_stable(&self, algo: Algo, max_rounds: Option<usize>) -> Result<(Partition, usize)> {
        let max_rounds = max_rounds.unwrap_or(self.n * self.n + self.m + 1);
        if max_rounds == 0 {
            return Err(Error::InvalidArgument("max_rounds must be at least 1".into()));
        }
        let mut state = self.init();
        let mut classes = state.num_var_colors() + state.num_con_colors();
        for _ in 0..max_rounds {
            let next = self.step(algo, &state)?;
            let next_classes = next.num_var_colors() + next.num_con_colors();
            let rounds = next.round;
            state = next;
            if next_classes == classes {
                let mut p = state.partition();
                p.rounds = rounds;
                return Ok((p, rounds));
            }
            classes = next_classes;
        }
        Err(Error::Internal(format!("{algo} did not stabilize within {max_rounds} rounds")))
    }
}

pub fn init_colors(inst: &SdpInstance) -> ColorState {
    Refiner::new(inst).init()
}

pub fn step(algo: Algo, state: &ColorState, inst: &SdpInstance) -> Result<ColorState> {
    Refiner::new(inst).step(algo, state)
}

pub fn run_to_stable(algo: Algo, inst: &SdpInstance, max_rounds: Option<usize>) -> Result<(Partition, usize)> {
    Refiner::new(inst).run_to_stable(algo, max_rounds)
}

/// Colors after exactly `rounds` refinement steps.
pub fn run_rounds(algo: Algo, inst: &SdpInstance, rounds: usize) -> Result<ColorState> {
    Ok(Refiner::new(inst).trajectory(algo, rounds)?.pop().expect("non-empty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SymMatrix;

    fn identity_trace(n: usize) -> SdpInstance {
        SdpInstance::new(SymMatrix::identity(n), vec![crate::matrix::SparseSymMatrix::from_dense(&SymMatrix::identity(n))], vec![1.0])
            .unwrap()
    }

    #[test]
    fn quantized_key_rules() {
        assert_eq!(QuantizedKey::new(-0.0), QuantizedKey::new(0.0));
        assert_eq!(QuantizedKey::new(0.1 + 0.2), QuantizedKey::new(0.3));
        assert_ne!(QuantizedKey::new(1.0), QuantizedKey::new(1.0 + 1e-9));
        assert!(QuantizedKey::new(1e-14).is_zero());
    }

    #[test]
    fn init_on_identity() {
        let s = init_colors(&identity_trace(3));
        assert_eq!(s.num_var_colors(), 2);
        assert_eq!(s.num_con_colors(), 1);
        assert_eq!(s.var_color(0, 0), s.var_color(2, 2));
        assert_ne!(s.var_color(0, 0), s.var_color(0, 1));
    }

    #[test]
    fn one_by_one_stabilizes_in_one_round() {
        let inst = identity_trace(1);
        for algo in Algo::ALL {
            let (p, r) = run_to_stable(algo, &inst, None).unwrap();
            assert_eq!(r, 1, "{algo}");
            assert_eq!(p.num_var_classes(), 1);
        }
    }

    #[test]
    fn algo_mismatch_is_rejected() {
        let inst = identity_trace(2);
        let r = Refiner::new(&inst);
        let s = r.step(Algo::Vcwl, &r.init()).unwrap();
        assert!(r.step(Algo::Vc2wl, &s).is_err());
    }

    #[test]
    fn refines_examples() {
        let p = Partition { n: 2, var: vec![0, 1, 1, 2], con: vec![0], rounds: 0 };
        let q = Partition { n: 2, var: vec![0, 1, 1, 0], con: vec![0], rounds: 0 };
        let single = Partition { n: 2, var: vec![0, 1, 2, 3], con: vec![0], rounds: 0 };
        assert!(refines(&p, &p).unwrap());
        assert!(refines(&p, &q).unwrap());
        assert!(!refines(&q, &p).unwrap());
        assert!(refines(&single, &q).unwrap());
        let other = Partition { n: 1, var: vec![0], con: vec![], rounds: 0 };
        assert!(refines(&p, &other).is_err());
    }

    #[test]
    fn algo_names_roundtrip() {
        for a in Algo::ALL {
            assert_eq!(a.name().parse::<Algo>().unwrap(), a);
        }
        assert!("nope".parse::<Algo>().is_err());
    }
}
