//! Dense symmetric and sparse symmetric matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense symmetric matrix stored row-major. Symmetry is exact: every
/// constructor writes mirrored entries with the same bits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn ones(n: usize) -> Self {
        SymMatrix { n, data: vec![1.0; n * n] }
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds a matrix from `f(i, j)` evaluated on the upper triangle only.
    pub fn from_upper_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Accepts rows that are already exactly symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = check_square(rows)?;
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate().take(i) {
                if v.to_bits() != rows[j][i].to_bits() {
                    return Err(Error::Shape(format!("entry ({i},{j}) differs from ({j},{i})")));
                }
            }
        }
        Ok(SymMatrix { n, data: rows.iter().flatten().copied().collect() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets both (i, j) and (j, i).
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).take(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn inner(&self, other: &SymMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        self.map(|v| v * s)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        SymMatrix { n: self.n, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, other.n);
        SymMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + s * b).collect(),
        }
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        self.axpy(-1.0, other)
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        self.axpy(1.0, other)
    }

    /// `P M Pᵀ` where `perm[i]` is the image of index `i`.
    pub fn permuted(&self, perm: &[usize]) -> SymMatrix {
        let mut out = SymMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.data[perm[i] * self.n + perm[j]] = self.get(i, j);
            }
        }
        out
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        SymMatrix::from_rows(&rows)
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(m: SymMatrix) -> Self {
        m.to_rows()
    }
}

fn check_square(rows: &[Vec<f64>]) -> Result<usize> {
    let n = rows.len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::Shape(format!("row {i} has length {} but matrix has {n} rows", r.len())));
    }
    Ok(n)
}

/// Returns `(M + Mᵀ)/2`.
pub fn symmetrize(rows: &[Vec<f64>]) -> Result<SymMatrix> {
    let n = check_square(rows)?;
    Ok(SymMatrix::from_upper_fn(n, |i, j| if i == j { rows[i][i] } else { 0.5 * (rows[i][j] + rows[j][i]) }))
}

/// Sparse symmetric matrix holding the upper triangle as sorted `(i, j, v)`
/// with `i <= j` and `v != 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseSymMatrix {
    n: usize,
    coords: Vec<(usize, usize, f64)>,
}

impl SparseSymMatrix {
    /// Canonicalizes the given coordinates: entries below the diagonal are
    /// mirrored up, zeros dropped, and the list sorted. Duplicates are an error.
    pub fn new(n: usize, entries: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut coords = Vec::new();
        for (i, j, v) in entries {
            if i >= n || j >= n {
                return Err(Error::Shape(format!("coordinate ({i},{j}) outside side {n}")));
            }
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite value at ({i},{j})")));
            }
            if v != 0.0 {
                coords.push((i.min(j), i.max(j), v));
            }
        }
        coords.sort_by_key(|e| (e.0, e.1));
        if let Some(w) = coords.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::InvalidArgument(format!("duplicate coordinate ({},{})", w[0].0, w[0].1)));
        }
        Ok(SparseSymMatrix { n, coords })
    }

    pub fn from_dense(m: &SymMatrix) -> Self {
        let n = m.n();
        let mut coords = Vec::new();
        for i in 0..n {
            for j in i..n {
                let v = m.get(i, j);
                if v != 0.0 {
                    coords.push((i, j, v));
                }
            }
        }
        SparseSymMatrix { n, coords }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> &[(usize, usize, f64)] {
        &self.coords
    }

    /// Stored entries with off-diagonals counted twice.
    pub fn nnz(&self) -> usize {
        self.coords.iter().map(|&(i, j, _)| if i == j { 1 } else { 2 }).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let key = (i.min(j), i.max(j));
        self.coords
            .binary_search_by(|c| (c.0, c.1).cmp(&key))
            .map(|p| self.coords[p].2)
            .unwrap_or(0.0)
    }

    pub fn to_dense(&self) -> SymMatrix {
        let mut m = SymMatrix::zeros(self.n);
        for &(i, j, v) in &self.coords {
            m.set(i, j, v);
        }
        m
    }

    /// `⟨self, X⟩` summed in coordinate order.
    pub fn inner(&self, x: &SymMatrix) -> f64 {
        let mut s = 0.0;
        for &(i, j, v) in &self.coords {
            s += if i == j { v * x.get(i, i) } else { 2.0 * v * x.get(i, j) };
        }
        s
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.coords.iter().map(|&(i, j, v)| if i == j { v * v } else { 2.0 * v * v }).sum()
    }

    pub fn scale(&self, s: f64) -> SparseSymMatrix {
        let coords = self.coords.iter().map(|&(i, j, v)| (i, j, v * s)).filter(|c| c.2 != 0.0).collect();
        SparseSymMatrix { n: self.n, coords }
    }

    pub fn permuted(&self, perm: &[usize]) -> SparseSymMatrix {
        SparseSymMatrix::new(self.n, self.coords.iter().map(|&(i, j, v)| (perm[i], perm[j], v)))
            .expect("permutation of a valid matrix is valid")
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetrize_examples() {
        let s = symmetrize(&[vec![0.0, 2.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(s.to_rows(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let s = symmetrize(&[vec![1.0, 4.0], vec![2.0, 3.0]]).unwrap();
        assert_eq!(s.to_rows(), vec![vec![1.0, 3.0], vec![3.0, 3.0]]);
        let id = SymMatrix::identity(3);
        assert_eq!(symmetrize(&id.to_rows()).unwrap(), id);
    }

    #[test]
    fn symmetrize_rejects_ragged() {
        assert!(matches!(symmetrize(&[vec![1.0, 2.0]]), Err(Error::Shape(_))));
        assert!(matches!(symmetrize(&[vec![1.0, 2.0], vec![1.0]]), Err(Error::Shape(_))));
    }

    #[test]
    fn sparse_canonicalizes() {
        let a = SparseSymMatrix::new(3, [(2, 0, 1.5), (1, 1, 0.0), (0, 0, 2.0)]).unwrap();
        assert_eq!(a.coords(), &[(0, 0, 2.0), (0, 2, 1.5)]);
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(2, 0), 1.5);
        assert!(SparseSymMatrix::new(3, [(0, 1, 1.0), (1, 0, 2.0)]).is_err());
        assert!(SparseSymMatrix::new(2, [(0, 2, 1.0)]).is_err());
    }

    #[test]
    fn from_rows_requires_exact_symmetry() {
        assert!(SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0 + 1e-16 * 4.0, 1.0]]).is_err());
        assert!(SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).is_ok());
    }

    #[test]
    fn json_roundtrip() {
        let m = SymMatrix::from_upper_fn(3, |i, j| (i * 3 + j) as f64 * 0.1);
        let s = serde_json::to_string(&m).unwrap();
        let back: SymMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
