//! SDP instances in the form `min ⟨C, X⟩ s.t. ⟨A_k, X⟩ = b_k, X ⪰ 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{SparseSymMatrix, SymMatrix};

/// Bookkeeping for objectives that were rewritten into min form.
///
/// The value of the original problem is `sign * (⟨C, X⟩ + offset)` where
/// `sign` is -1 when the source problem was a maximization.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub label: String,
    pub offset: f64,
    pub maximize: bool,
}

impl InstanceMeta {
    pub fn source_value(&self, objective: f64) -> f64 {
        let v = objective + self.offset;
        if self.maximize {
            -v
        } else {
            v
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpInstance {
    pub n: usize,
    pub m: usize,
    pub c: SymMatrix,
    pub a: Vec<SparseSymMatrix>,
    pub b: Vec<f64>,
    #[serde(default)]
    pub meta: InstanceMeta,
}

/// Primal/dual pair with optional slack.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionTriple {
    pub x: SymMatrix,
    pub y: Vec<f64>,
    pub s: Option<SymMatrix>,
}

impl SdpInstance {
    pub fn new(c: SymMatrix, a: Vec<SparseSymMatrix>, b: Vec<f64>) -> Result<Self> {
        let n = c.n();
        if n == 0 {
            return Err(Error::Shape("empty objective matrix".into()));
        }
        if a.len() != b.len() {
            return Err(Error::Shape(format!("{} constraint matrices but {} right-hand sides", a.len(), b.len())));
        }
        if let Some((k, ak)) = a.iter().enumerate().find(|(_, ak)| ak.n() != n) {
            return Err(Error::Shape(format!("A_{k} has side {} but C has side {n}", ak.n())));
        }
        if c.as_slice().iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite entry in C or b".into()));
        }
        Ok(SdpInstance { n, m: a.len(), c, a, b, meta: InstanceMeta::default() })
    }

    /// Convenience constructor from dense row lists; `C` is symmetrized and
    /// the `A_k` must be symmetric.
    pub fn from_dense(c: &[Vec<f64>], a: &[Vec<Vec<f64>>], b: &[f64]) -> Result<Self> {
        let c = crate::matrix::symmetrize(c)?;
        let a = a
            .iter()
            .map(|ak| SymMatrix::from_rows(ak).map(|d| SparseSymMatrix::from_dense(&d)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(c, a, b.to_vec())
    }

    pub fn with_meta(mut self, meta: InstanceMeta) -> Self {
        self.meta = meta;
        self
    }

    fn check_x(&self, x: &SymMatrix) -> Result<()> {
        if x.n() != self.n {
            return Err(Error::Shape(format!("X has side {} but instance has n = {}", x.n(), self.n)));
        }
        Ok(())
    }

    /// `A(X)_k = ⟨A_k, X⟩`.
    pub fn apply_a(&self, x: &SymMatrix) -> Result<Vec<f64>> {
        self.check_x(x)?;
        Ok(self.a.iter().map(|ak| ak.inner(x)).collect())
    }

    /// `A*(y) = Σ_k y_k A_k`.
    pub fn apply_a_adjoint(&self, y: &[f64]) -> Result<SymMatrix> {
        if y.len() != self.m {
            return Err(Error::Shape(format!("y has length {} but m = {}", y.len(), self.m)));
        }
        let mut out = SymMatrix::zeros(self.n);
        for (ak, &yk) in self.a.iter().zip(y) {
            if yk == 0.0 {
                continue;
            }
            for &(i, j, v) in ak.coords() {
                let cur = out.get(i, j);
                out.set(i, j, cur + yk * v);
            }
        }
        Ok(out)
    }

    pub fn objective(&self, x: &SymMatrix) -> Result<f64> {
        self.check_x(x)?;
        Ok(self.c.inner(x))
    }

    /// Mean absolute constraint violation.
    pub fn constraint_residual(&self, x: &SymMatrix) -> Result<f64> {
        if self.m == 0 {
            return Ok(0.0);
        }
        let ax = self.apply_a(x)?;
        Ok(ax.iter().zip(&self.b).map(|(a, b)| (a - b).abs()).sum::<f64>() / self.m as f64)
    }

    /// `‖A(X) - b‖_∞`.
    pub fn primal_residual_inf(&self, x: &SymMatrix) -> Result<f64> {
        let ax = self.apply_a(x)?;
        Ok(ax.iter().zip(&self.b).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn nnz(&self) -> usize {
        self.a.iter().map(|a| a.nnz()).sum()
    }

    /// Rejects instances containing an all-zero constraint matrix.
    pub fn check_nonzero_constraints(&self) -> Result<()> {
        match self.a.iter().position(|a| a.is_zero()) {
            Some(k) => Err(Error::LinearlyDependent(format!("constraint {} has an all-zero matrix", k + 1))),
            None => Ok(()),
        }
    }

    /// Numerical rank of the Gram matrix `G_kl = ⟨A_k, A_l⟩`, or `None` when
    /// `m > 64`.
    pub fn constraint_rank(&self) -> Option<usize> {
        if self.m > 64 {
            return None;
        }
        let dense: Vec<SymMatrix> = self.a.iter().map(|a| a.to_dense()).collect();
        let g = SymMatrix::from_upper_fn(self.m, |k, l| dense[k].inner(&dense[l]));
        if self.m == 0 {
            return Some(0);
        }
        let eig = crate::pdhg::eig_sym(&g, 1e-14).ok()?;
        let top = eig.eigvals.first().copied().unwrap_or(0.0).max(0.0);
        let cut = top * 1e-10 * self.m as f64;
        Some(eig.eigvals.iter().filter(|&&l| l > cut).count())
    }

    /// Relabels variables by `perm` (index `i` moves to `perm[i]`).
    pub fn permuted(&self, perm: &[usize]) -> SdpInstance {
        SdpInstance {
            n: self.n,
            m: self.m,
            c: self.c.permuted(perm),
            a: self.a.iter().map(|a| a.permuted(perm)).collect(),
            b: self.b.clone(),
            meta: self.meta.clone(),
        }
    }

    /// Reorders constraints so that new constraint `k` is old `order[k]`.
    pub fn reorder_constraints(&self, order: &[usize]) -> SdpInstance {
        SdpInstance {
            n: self.n,
            m: self.m,
            c: self.c.clone(),
            a: order.iter().map(|&k| self.a[k].clone()).collect(),
            b: order.iter().map(|&k| self.b[k]).collect(),
            meta: self.meta.clone(),
        }
    }

    /// Same instance with right-hand side scaled by `s`.
    pub fn scaled_rhs(&self, s: f64) -> SdpInstance {
        let mut out = self.clone();
        out.b.iter_mut().for_each(|v| *v *= s);
        out
    }
}

/// `|(pred - opt) / opt| * 100`.
pub fn relative_obj_gap(pred: f64, opt: f64) -> Result<f64> {
    if opt == 0.0 {
        return Err(Error::DivisionGuard("optimal objective is zero; use the absolute gap".into()));
    }
    Ok(((pred - opt) / opt).abs() * 100.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn two_constraint() -> SdpInstance {
        let a1 = vec![vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0; 3]];
        let a2 = vec![vec![0.0, 0.0, 1.0], vec![0.0; 3], vec![1.0, 0.0, 0.0]];
        let c = vec![vec![1.0, 1.0, 0.0], vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        SdpInstance::from_dense(&c, &[a1, a2], &[1.0, 1.0]).unwrap()
    }

    #[test]
    fn operators_on_hand_examples() {
        let inst = two_constraint();
        // each constraint touches one mirrored off-diagonal pair of J
        assert_eq!(inst.apply_a(&SymMatrix::ones(3)).unwrap(), vec![2.0, 2.0]);
        let adj = inst.apply_a_adjoint(&[1.0, 1.0]).unwrap();
        assert_eq!(adj.to_rows(), vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]]);
        assert_eq!(inst.apply_a_adjoint(&[0.0, 0.0]).unwrap(), SymMatrix::zeros(3));
        assert_eq!(inst.apply_a_adjoint(&[1.0, 0.0]).unwrap(), inst.a[0].to_dense());
        assert_eq!(inst.apply_a(&SymMatrix::zeros(3)).unwrap(), vec![0.0, 0.0]);
        assert!(inst.apply_a(&SymMatrix::zeros(2)).is_err());
        assert!(inst.apply_a_adjoint(&[1.0]).is_err());
    }

    #[test]
    fn objective_examples() {
        let c = SymMatrix::identity(3);
        let inst = SdpInstance::new(c, vec![], vec![]).unwrap();
        assert_eq!(inst.objective(&SymMatrix::identity(3)).unwrap(), 3.0);
        assert_eq!(inst.objective(&SymMatrix::zeros(3)).unwrap(), 0.0);
    }

    #[test]
    fn gap_examples() {
        assert_relative_eq!(relative_obj_gap(99.0, 100.0).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(relative_obj_gap(100.0, 100.0).unwrap(), 0.0);
        assert_relative_eq!(relative_obj_gap(-1.01, -1.0).unwrap(), 1.0, epsilon = 1e-9);
        assert!(matches!(relative_obj_gap(1.0, 0.0), Err(Error::DivisionGuard(_))));
    }

    #[test]
    fn residual_and_rank() {
        let inst = two_constraint();
        assert_eq!(inst.constraint_residual(&SymMatrix::zeros(3)).unwrap(), 1.0);
        assert_eq!(inst.constraint_rank(), Some(2));
        let dup = SdpInstance::new(inst.c.clone(), vec![inst.a[0].clone(), inst.a[0].scale(2.0)], vec![1.0, 2.0]).unwrap();
        assert_eq!(dup.constraint_rank(), Some(1));
    }

    #[test]
    fn rejects_bad_shapes() {
        let c = SymMatrix::identity(2);
        assert!(SdpInstance::new(c.clone(), vec![SparseSymMatrix::new(3, []).unwrap()], vec![1.0]).is_err());
        assert!(SdpInstance::new(c, vec![], vec![1.0]).is_err());
    }
}
