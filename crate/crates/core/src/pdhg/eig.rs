//! Cyclic Jacobi eigensolver for dense symmetric matrices.

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;

pub const MAX_SWEEPS: usize = 100;

/// Eigenvalues in descending order; `eigvecs` is row-major with the
/// eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct SpectralDecomp {
    pub n: usize,
    pub eigvals: Vec<f64>,
    pub eigvecs: Vec<f64>,
}

impl SpectralDecomp {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.n).map(|r| self.eigvecs[r * self.n + k]).collect()
    }

    /// `Σ f(λ_k) v_k v_kᵀ` over the eigenpairs with `f(λ_k) != 0`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let n = self.n;
        let weights: Vec<(usize, f64)> =
            self.eigvals.iter().enumerate().map(|(k, &l)| (k, f(l))).filter(|&(_, w)| w != 0.0).collect();
        SymMatrix::from_upper_fn(n, |i, j| {
            let mut s = 0.0;
            for &(k, w) in &weights {
                s += w * self.eigvecs[i * n + k] * self.eigvecs[j * n + k];
            }
            s
        })
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.reconstruct_with(|l| l)
    }
}

fn jacobi(m: &SymMatrix, tol: f64, want_vectors: bool) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = m.n();
    let mut a = m.as_slice().to_vec();
    let mut v = if want_vectors { SymMatrix::identity(n).as_slice().to_vec() } else { Vec::new() };
    let scale = m.frobenius();
    let target = (tol * scale).powi(2);
    let mut converged = scale == 0.0;
    for sweep in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off <= target || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let g = 100.0 * apq.abs();
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let sgn = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sgn / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                if want_vectors {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    if !converged {
        let off: f64 = (0..n).flat_map(|p| (p + 1..n).map(move |q| (p, q))).map(|(p, q)| a[p * n + q].powi(2)).sum();
        if off > target && off != 0.0 {
            return Err(Error::Numerical(format!("Jacobi did not converge in {MAX_SWEEPS} sweeps")));
        }
    }
    let vals: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    Ok((vals, v))
}

fn descending_order(vals: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&x, &y| vals[y].total_cmp(&vals[x]).then(x.cmp(&y)));
    order
}

pub fn eig_sym(m: &SymMatrix, tol: f64) -> Result<SpectralDecomp> {
    if m.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite matrix entry".into()));
    }
    let n = m.n();
    let (vals, v) = jacobi(m, tol, true)?;
    let order = descending_order(&vals);
    let eigvals = order.iter().map(|&k| vals[k]).collect();
    let mut eigvecs = vec![0.0; n * n];
    for (new, &old) in order.iter().enumerate() {
        for r in 0..n {
            eigvecs[r * n + new] = v[r * n + old];
        }
    }
    Ok(SpectralDecomp { n, eigvals, eigvecs })
}

/// Eigenvalues only, descending.
pub fn eigvals_sym(m: &SymMatrix, tol: f64) -> Result<Vec<f64>> {
    if m.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite matrix entry".into()));
    }
    let (mut vals, _) = jacobi(m, tol, false)?;
    vals.sort_by(|a, b| b.total_cmp(a));
    Ok(vals)
}

/// Frobenius projection onto the PSD cone: keep the positive eigenpairs.
pub fn project_psd(m: &SymMatrix, tol: f64) -> Result<SymMatrix> {
    let d = eig_sym(m, tol)?;
    Ok(d.reconstruct_with(|l| l.max(0.0)))
}

/// `‖M - Proj(M)‖_F`, the distance from `M` to the PSD cone.
pub fn psd_distance(m: &SymMatrix, tol: f64) -> Result<f64> {
    Ok(eigvals_sym(m, tol)?.iter().filter(|&&l| l < 0.0).map(|l| l * l).sum::<f64>().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn diagonal_input() {
        let d = eig_sym(&SymMatrix::diag(&[1.0, 3.0]), 1e-14).unwrap();
        assert_eq!(d.eigvals, vec![3.0, 1.0]);
        assert_eq!(d.vector(0), vec![0.0, 1.0]);
        assert_eq!(d.vector(1), vec![1.0, 0.0]);
        let z = eig_sym(&SymMatrix::zeros(3), 1e-14).unwrap();
        assert_eq!(z.eigvals, vec![0.0; 3]);
    }

    #[test]
    fn projection_examples() {
        let p = project_psd(&SymMatrix::diag(&[1.0, -2.0]), 1e-14).unwrap();
        assert_eq!(p.to_rows(), vec![vec![1.0, 0.0], vec![0.0, 0.0]]);
        let swap = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let p = project_psd(&swap, 1e-14).unwrap();
        for v in p.as_slice() {
            assert_abs_diff_eq!(*v, 0.5, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(psd_distance(&swap, 1e-14).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn non_finite_rejected() {
        let m = SymMatrix::diag(&[f64::NAN, 1.0]);
        assert!(eig_sym(&m, 1e-14).is_err());
    }
}
