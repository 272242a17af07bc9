//! Seeded samplers and SDP relaxations of combinatorial and control problems.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{InstanceMeta, SdpInstance};
use crate::matrix::{SparseSymMatrix, SymMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (u, v, w) in edges {
            if u == v {
                return Err(Error::InvalidArgument(format!("self-loop at {u}")));
            }
            if u >= n || v >= n {
                return Err(Error::InvalidArgument(format!("edge ({u},{v}) outside {n} nodes")));
            }
            if !w.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite weight on ({u},{v})")));
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(Error::InvalidArgument(format!("duplicate edge ({},{})", key.0, key.1)));
            }
            out.push((key.0, key.1, w));
        }
        out.sort_by_key(|e| (e.0, e.1));
        Ok(Graph { n, edges: out })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for &(u, v, _) in &self.edges {
            d[u] += 1;
            d[v] += 1;
        }
        d
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search_by(|e| (e.0, e.1).cmp(&key)).is_ok()
    }
}

/// Erdős–Rényi graph with unit weights.
pub fn er_graph(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("edge probability {p} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v, 1.0));
            }
        }
    }
    Graph::new(n, edges)
}

/// Uniform-ish `d`-regular graph from the pairing model, rejecting loops and
/// multi-edges and retrying with a perturbed seed.
pub fn regular_graph(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if !(n * d).is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("n·d = {} must be even", n * d)));
    }
    if d >= n.max(1) && d > 0 {
        return Err(Error::InvalidArgument(format!("degree {d} needs more than {n} nodes")));
    }
    for attempt in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15)));
        let mut points: Vec<usize> = (0..n * d).map(|p| p / d.max(1)).collect();
        points.shuffle(&mut rng);
        let mut seen = BTreeSet::new();
        let ok = points.chunks(2).all(|pair| pair[0] != pair[1] && seen.insert((pair[0].min(pair[1]), pair[0].max(pair[1]))));
        if ok {
            return Graph::new(n, seen.into_iter().map(|(u, v)| (u, v, 1.0)));
        }
    }
    Err(Error::Numerical(format!("pairing model found no simple {d}-regular graph on {n} nodes in 100 attempts")))
}

fn unit(n: usize, i: usize) -> SparseSymMatrix {
    SparseSymMatrix::new(n, [(i, i, 1.0)]).expect("valid index")
}

fn pair(n: usize, i: usize, j: usize) -> SparseSymMatrix {
    SparseSymMatrix::new(n, [(i, j, 1.0)]).expect("valid index")
}

fn meta(label: &str, offset: f64, maximize: bool) -> InstanceMeta {
    InstanceMeta { label: label.to_string(), offset, maximize }
}

/// `max ½ Σ w_ij (1 − X_ij)` s.t. `X_ii = 1`, written in min form.
pub fn maxcut_sdp(g: &Graph) -> SdpInstance {
    let n = g.n();
    let mut c = SymMatrix::zeros(n);
    for &(u, v, w) in g.edges() {
        c.set(u, v, w / 4.0);
    }
    let total: f64 = g.edges().iter().map(|e| e.2).sum();
    SdpInstance::new(c, (0..n).map(|i| unit(n, i)).collect(), vec![1.0; n])
        .expect("shapes agree")
        .with_meta(meta("maxcut", -0.5 * total, true))
}

fn theta_sdp(g: &Graph, zero_on_edges: bool, label: &str) -> SdpInstance {
    let n = g.n();
    let c = SymMatrix::ones(n).scale(-1.0);
    let mut a = vec![SparseSymMatrix::from_dense(&SymMatrix::identity(n))];
    let mut b = vec![1.0];
    for i in 0..n {
        for j in i + 1..n {
            if g.has_edge(i, j) == zero_on_edges {
                a.push(pair(n, i, j));
                b.push(0.0);
            }
        }
    }
    SdpInstance::new(c, a, b).expect("shapes agree").with_meta(meta(label, 0.0, true))
}

/// Lovász-theta relaxation: `max ⟨J, X⟩` s.t. `Tr X = 1`, `X_ij = 0` on non-edges.
pub fn maxclique_sdp(g: &Graph) -> SdpInstance {
    theta_sdp(g, false, "clique")
}

/// As [`maxclique_sdp`] with zeros forced on edges instead.
pub fn mis_sdp(g: &Graph) -> SdpInstance {
    theta_sdp(g, true, "mis")
}

/// Index 0 is the homogenizing variable; node `i` becomes index `i + 1`.
pub fn vertexcover_sdp(g: &Graph) -> SdpInstance {
    let n = g.n();
    let dim = n + 1;
    let mut c = SymMatrix::zeros(dim);
    for i in 1..dim {
        c.set(0, i, 0.25);
    }
    let mut a: Vec<SparseSymMatrix> = (0..dim).map(|i| unit(dim, i)).collect();
    let mut b = vec![1.0; dim];
    for &(u, v, _) in g.edges() {
        let (i, j) = (u + 1, v + 1);
        a.push(SparseSymMatrix::new(dim, [(0, 0, 1.0), (0, i, -0.5), (0, j, -0.5), (i, j, 0.5)]).expect("valid"));
        b.push(0.0);
    }
    SdpInstance::new(c, a, b).expect("shapes agree").with_meta(meta("vc", n as f64 / 2.0, false))
}

/// Clauses over `n_vars` variables; entries in {−1, 0, +1}, one or two
/// nonzeros per row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClauseMatrix {
    n_vars: usize,
    rows: Vec<Vec<i8>>,
}

impl ClauseMatrix {
    pub fn new(n_vars: usize, rows: Vec<Vec<i8>>) -> Result<Self> {
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n_vars {
                return Err(Error::Shape(format!("clause {r} has {} entries, expected {n_vars}", row.len())));
            }
            if row.iter().any(|&v| !(-1..=1).contains(&v)) {
                return Err(Error::InvalidArgument(format!("clause {r} has an entry outside {{-1, 0, 1}}")));
            }
            let nz = row.iter().filter(|&&v| v != 0).count();
            if !(1..=2).contains(&nz) {
                return Err(Error::InvalidArgument(format!("clause {r} has {nz} literals")));
            }
        }
        Ok(ClauseMatrix { n_vars, rows })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn rows(&self) -> &[Vec<i8>] {
        &self.rows
    }

    /// `(1/8)(xᵀAᵀAx − 2·1ᵀAx)` for `x ∈ {−1, 1}ⁿ`.
    pub fn quadratic_value(&self, x: &[f64]) -> f64 {
        let ax: Vec<f64> = self.rows.iter().map(|r| r.iter().zip(x).map(|(&a, &xi)| a as f64 * xi).sum()).collect();
        (ax.iter().map(|v| v * v).sum::<f64>() - 2.0 * ax.iter().sum::<f64>()) / 8.0
    }
}

/// Random two-literal clauses on distinct variables.
pub fn random_clauses(n_vars: usize, k: usize, seed: u64) -> Result<ClauseMatrix> {
    if n_vars < 2 && k > 0 {
        return Err(Error::InvalidArgument("two-literal clauses need at least two variables".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..k)
        .map(|_| {
            let i = rng.random_range(0..n_vars);
            let mut j = rng.random_range(0..n_vars - 1);
            if j >= i {
                j += 1;
            }
            let mut row = vec![0i8; n_vars];
            row[i] = if rng.random::<bool>() { 1 } else { -1 };
            row[j] = if rng.random::<bool>() { 1 } else { -1 };
            row
        })
        .collect();
    ClauseMatrix::new(n_vars, rows)
}

/// `C = (1/8)[[AᵀA − diag(AᵀA), −Aᵀ1], [−1ᵀA, 0]]` with `X_ii = 1` on all
/// `n + 1` diagonals; the dropped constant `Tr(AᵀA)/8` goes to the offset.
pub fn max2sat_sdp(cm: &ClauseMatrix) -> SdpInstance {
    let n = cm.n_vars();
    let dim = n + 1;
    let mut ata = vec![0.0; n * n];
    let mut at1 = vec![0.0; n];
    for row in cm.rows() {
        for i in 0..n {
            at1[i] += row[i] as f64;
            for j in 0..n {
                ata[i * n + j] += (row[i] * row[j]) as f64;
            }
        }
    }
    let c = SymMatrix::from_upper_fn(dim, |i, j| {
        if j == n {
            if i == n {
                0.0
            } else {
                -at1[i] / 8.0
            }
        } else if i == j {
            0.0
        } else {
            ata[i * n + j] / 8.0
        }
    });
    let offset = (0..n).map(|i| ata[i * n + i]).sum::<f64>() / 8.0;
    SdpInstance::new(c, (0..dim).map(|i| unit(dim, i)).collect(), vec![1.0; dim])
        .expect("shapes agree")
        .with_meta(meta("max2sat", offset, false))
}

/// Solves `A x = b` for several right-hand sides by Gaussian elimination with
/// partial pivoting. `a` is n×n row-major, `rhs` n×k row-major.
fn solve_dense(n: usize, mut a: Vec<f64>, mut rhs: Vec<f64>, k: usize) -> Option<Vec<f64>> {
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs()))?;
        if a[piv * n + col].abs() < 1e-12 {
            return None;
        }
        if piv != col {
            for c in 0..n {
                a.swap(piv * n + c, col * n + c);
            }
            for c in 0..k {
                rhs.swap(piv * k + c, col * k + c);
            }
        }
        for r in col + 1..n {
            let f = a[r * n + col] / a[col * n + col];
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[r * n + c] -= f * a[col * n + c];
            }
            for c in 0..k {
                rhs[r * k + c] -= f * rhs[col * k + c];
            }
        }
    }
    for col in (0..n).rev() {
        for c in 0..k {
            let mut s = rhs[col * k + c];
            for j in col + 1..n {
                s -= a[col * n + j] * rhs[j * k + c];
            }
            rhs[col * k + c] = s / a[col * n + col];
        }
    }
    Some(rhs)
}

pub const LMI_EPS: f64 = 0.1;

/// Inverse-Lyapunov LMI family: a hidden `P ≻ 0` with unit trace, a system
/// matrix with `AᵀP + PA = −εI`, and constraints probing `P` along sparse
/// directions. Returns the instance and `P`.
pub fn lmi_sdp(n: usize, m: usize, seed: u64) -> Result<(SdpInstance, SymMatrix)> {
    if n < 2 {
        return Err(Error::InvalidArgument("LMI instances need n ≥ 2".into()));
    }
    if m > n * (n - 1) {
        return Err(Error::InvalidArgument(format!("at most {} distinct two-entry directions for n = {n}", n * (n - 1))));
    }
    for attempt in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt.wrapping_mul(0x2545_f491_4f6c_dd1d)));
        let mut gauss = || rng.sample::<f64, _>(StandardNormal);
        let g: Vec<f64> = (0..n * n).map(|_| gauss()).collect();
        let p = SymMatrix::from_upper_fn(n, |i, j| {
            let s: f64 = (0..n).map(|k| g[i * n + k] * g[j * n + k]).sum();
            s + if i == j { 0.1 } else { 0.0 }
        });
        let p = p.scale(1.0 / p.trace());
        // PA = −ε/2·I + K for a random skew K gives AᵀP + PA = −εI
        let mut rhs = vec![0.0; n * n];
        for i in 0..n {
            rhs[i * n + i] = -LMI_EPS / 2.0;
            for j in i + 1..n {
                let k = gauss();
                rhs[i * n + j] = k;
                rhs[j * n + i] = -k;
            }
        }
        let Some(a_sys) = solve_dense(n, p.as_slice().to_vec(), rhs, n) else { continue };

        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd1b5_4a32_d192_ed03 ^ attempt);
        let mut dirs = BTreeSet::new();
        let mut mats = Vec::with_capacity(m + 1);
        while mats.len() < m {
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            if i == j {
                continue;
            }
            let sign: f64 = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let (lo, hi) = (i.min(j), i.max(j));
            if !dirs.insert((lo, hi, sign > 0.0)) {
                continue;
            }
            let mut v = vec![0.0; n];
            v[lo] = 1.0;
            v[hi] = sign;
            let av: Vec<f64> = (0..n).map(|r| (0..n).map(|c| a_sys[r * n + c] * v[c]).sum()).collect();
            let ak = SymMatrix::from_upper_fn(n, |r, c| 0.5 * (av[r] * v[c] + v[r] * av[c]));
            mats.push(SparseSymMatrix::from_dense(&ak));
        }
        mats.push(SparseSymMatrix::from_dense(&SymMatrix::identity(n)));
        let b = mats.iter().map(|ak| ak.inner(&p)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x94d0_49bb_1331_11eb);
        let c = SymMatrix::from_upper_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let inst = SdpInstance::new(c, mats, b)?.with_meta(meta("lmi", 0.0, false));
        return Ok((inst, p));
    }
    Err(Error::Numerical("could not sample a nonsingular Lyapunov system".into()))
}

/// `min cᵀx s.t. Ax = b, x ≥ 0` as an SDP over diagonal matrices.
pub fn lp_to_sdp(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<SdpInstance> {
    let n = c.len();
    if a.len() != b.len() {
        return Err(Error::Shape(format!("{} rows but {} right-hand sides", a.len(), b.len())));
    }
    let mut mats = Vec::with_capacity(a.len() + n * n.saturating_sub(1) / 2);
    for (r, row) in a.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Shape(format!("row {r} has {} entries, expected {n}", row.len())));
        }
        mats.push(SparseSymMatrix::new(n, row.iter().enumerate().map(|(i, &v)| (i, i, v)))?);
    }
    let mut rhs = b.to_vec();
    for i in 0..n {
        for j in i + 1..n {
            mats.push(pair(n, i, j));
            rhs.push(0.0);
        }
    }
    Ok(SdpInstance::new(SymMatrix::diag(c), mats, rhs)?.with_meta(meta("lp", 0.0, false)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Problem {
    Maxcut,
    Clique,
    Mis,
    Vc,
    Max2sat,
    Lmi,
}

impl Problem {
    pub const ALL: [Problem; 6] = [Problem::Maxcut, Problem::Clique, Problem::Mis, Problem::Vc, Problem::Max2sat, Problem::Lmi];

    pub fn name(self) -> &'static str {
        match self {
            Problem::Maxcut => "maxcut",
            Problem::Clique => "clique",
            Problem::Mis => "mis",
            Problem::Vc => "vc",
            Problem::Max2sat => "max2sat",
            Problem::Lmi => "lmi",
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Problem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Problem::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown problem `{s}`")))
    }
}

/// Sampling parameters shared by the generator front end.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    /// Edge probability for ER graphs.
    pub p: Option<f64>,
    /// Degree for regular graphs; takes precedence over `p`.
    pub d: Option<usize>,
    pub clauses: Option<usize>,
    pub m: Option<usize>,
}

/// Builds a seeded instance; `n` is the graph size, variable count or LMI side.
pub fn generate(problem: Problem, n: usize, params: &GenParams, seed: u64) -> Result<SdpInstance> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let graph = || match params.d {
        Some(d) => regular_graph(n, d, seed),
        None => er_graph(n, params.p.unwrap_or(0.5), seed),
    };
    Ok(match problem {
        Problem::Maxcut => maxcut_sdp(&graph()?),
        Problem::Clique => maxclique_sdp(&graph()?),
        Problem::Mis => mis_sdp(&graph()?),
        Problem::Vc => vertexcover_sdp(&graph()?),
        Problem::Max2sat => max2sat_sdp(&random_clauses(n, params.clauses.unwrap_or(2 * n), seed)?),
        Problem::Lmi => lmi_sdp(n, params.m.unwrap_or(n), seed)?.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn er_extremes() {
        assert!(er_graph(4, 0.0, 3).unwrap().edges().is_empty());
        assert_eq!(er_graph(4, 1.0, 3).unwrap().edges().len(), 6);
        assert!(er_graph(4, 1.5, 3).is_err());
    }

    #[test]
    fn regular_degrees() {
        let g = regular_graph(6, 2, 11).unwrap();
        assert!(g.degrees().iter().all(|&d| d == 2));
        assert!(regular_graph(5, 3, 1).is_err());
    }

    #[test]
    fn maxcut_single_edge() {
        let inst = maxcut_sdp(&Graph::new(2, [(0, 1, 1.0)]).unwrap());
        assert_eq!(inst.c.to_rows(), vec![vec![0.0, 0.25], vec![0.25, 0.0]]);
        assert_eq!(inst.m, 2);
        let empty = maxcut_sdp(&Graph::new(3, []).unwrap());
        assert_eq!(empty.c, SymMatrix::zeros(3));
        assert_eq!(empty.constraint_residual(&SymMatrix::identity(3)).unwrap(), 0.0);
    }

    #[test]
    fn clique_and_mis_constraint_sets() {
        let k3 = Graph::new(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(maxclique_sdp(&k3).m, 1);
        assert_eq!(mis_sdp(&k3).m, 4);
        let single = maxclique_sdp(&Graph::new(1, []).unwrap());
        assert_eq!(single.objective(&SymMatrix::identity(1)).unwrap(), -1.0);
    }

    #[test]
    fn vertex_cover_counts() {
        let inst = vertexcover_sdp(&Graph::new(2, [(0, 1, 1.0)]).unwrap());
        assert_eq!((inst.n, inst.m), (3, 4));
        // the all-in-cover lift x = (1, 1, 1) is feasible
        assert_eq!(inst.constraint_residual(&SymMatrix::ones(3)).unwrap(), 0.0);
    }

    #[test]
    fn max2sat_single_clause() {
        let cm = ClauseMatrix::new(2, vec![vec![1, 1]]).unwrap();
        let inst = max2sat_sdp(&cm);
        let e = 1.0 / 8.0;
        assert_eq!(inst.c.to_rows(), vec![vec![0.0, e, -e], vec![e, 0.0, -e], vec![-e, -e, 0.0]]);
        assert_eq!(inst.m, 3);
        let empty = max2sat_sdp(&ClauseMatrix::new(3, vec![]).unwrap());
        assert_eq!(empty.c, SymMatrix::zeros(4));
        assert!(ClauseMatrix::new(2, vec![vec![0, 0]]).is_err());
        assert!(ClauseMatrix::new(3, vec![vec![1, 1, 1]]).is_err());
    }

    #[test]
    fn lmi_is_feasible_at_hidden_point() {
        let (inst, p) = lmi_sdp(4, 5, 9).unwrap();
        assert!(inst.constraint_residual(&p).unwrap() <= 1e-10);
        assert!((p.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lp_embedding_counts() {
        let inst = lp_to_sdp(&[0.0, 1.0], &[vec![1.0, 1.0]], &[1.0]).unwrap();
        assert_eq!(inst.m, 1 + 1);
        let one = lp_to_sdp(&[1.0], &[vec![1.0]], &[1.0]).unwrap();
        assert_eq!((one.n, one.m), (1, 1));
    }

    #[test]
    fn determinism() {
        for p in Problem::ALL {
            let params = GenParams { p: Some(0.4), ..Default::default() };
            assert_eq!(generate(p, 6, &params, 42).unwrap(), generate(p, 6, &params, 42).unwrap(), "{p}");
        }
    }
}
