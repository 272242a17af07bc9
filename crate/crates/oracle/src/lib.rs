//! Reference computations for tests, deliberately sharing no code with the
//! main library: a low-rank augmented-Lagrangian SDP solver and a
//! tridiagonal bisection eigenvalue routine. Matrices are dense row vectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Dense = Vec<Vec<f64>>;

fn inner(a: &Dense, b: &Dense) -> f64 {
    a.iter().zip(b).map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x * y).sum::<f64>()).sum()
}

/// `R Rᵀ` for an `n × r` factor stored row-major.
fn gram(rf: &[f64], n: usize, r: usize) -> Dense {
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..r).map(|c| rf[i * r + c] * rf[j * r + c]).sum();
            out[i][j] = s;
            out[j][i] = s;
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct OracleSolution {
    pub x: Dense,
    pub objective: f64,
    pub max_residual: f64,
}

struct Problem<'a> {
    c: &'a Dense,
    a: &'a [Dense],
    b: &'a [f64],
    n: usize,
    r: usize,
}

impl Problem<'_> {
    fn residuals(&self, x: &Dense) -> Vec<f64> {
        self.a.iter().zip(self.b).map(|(ak, bk)| inner(ak, x) - bk).collect()
    }

    /// Augmented Lagrangian value and gradient in the factor.
    fn eval(&self, rf: &[f64], lam: &[f64], sigma: f64) -> (f64, Vec<f64>) {
        let (n, r) = (self.n, self.r);
        let x = gram(rf, n, r);
        let res = self.residuals(&x);
        let val = inner(self.c, &x) - lam.iter().zip(&res).map(|(l, v)| l * v).sum::<f64>()
            + 0.5 * sigma * res.iter().map(|v| v * v).sum::<f64>();
        let mut s = self.c.clone();
        for ((ak, l), v) in self.a.iter().zip(lam).zip(&res) {
            let w = sigma * v - l;
            for i in 0..n {
                for j in 0..n {
                    s[i][j] += w * ak[i][j];
                }
            }
        }
        let mut g = vec![0.0; n * r];
        for i in 0..n {
            for c in 0..r {
                g[i * r + c] = 2.0 * (0..n).map(|k| s[i][k] * rf[k * r + c]).sum::<f64>();
            }
        }
        (val, g)
    }

    /// L-BFGS with Armijo backtracking on the augmented Lagrangian.
    fn minimize(&self, rf: &mut Vec<f64>, lam: &[f64], sigma: f64, iters: usize) {
        let mem = 10;
        let mut s_hist: Vec<Vec<f64>> = Vec::new();
        let mut y_hist: Vec<Vec<f64>> = Vec::new();
        let (mut f, mut g) = self.eval(rf, lam, sigma);
        for _ in 0..iters {
            let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if gnorm < 1e-11 {
                break;
            }
            let mut q = g.clone();
            let mut alphas = Vec::with_capacity(s_hist.len());
            for (s, y) in s_hist.iter().zip(&y_hist).rev() {
                let rho = 1.0 / dot(y, s);
                let a = rho * dot(s, &q);
                axpy(&mut q, -a, y);
                alphas.push((a, rho));
            }
            if let (Some(s), Some(y)) = (s_hist.last(), y_hist.last()) {
                let gamma = dot(s, y) / dot(y, y);
                q.iter_mut().for_each(|v| *v *= gamma);
            }
            for ((s, y), (a, rho)) in s_hist.iter().zip(&y_hist).zip(alphas.into_iter().rev()) {
                let bcoef = rho * dot(y, &q);
                axpy(&mut q, a - bcoef, s);
            }
            let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
            let mut slope = dot(&g, &dir);
            if slope >= 0.0 {
                dir = g.iter().map(|v| -v).collect();
                slope = -gnorm * gnorm;
                s_hist.clear();
                y_hist.clear();
            }
            let mut step = 1.0;
            let (mut nf, mut ng, mut nr);
            loop {
                nr = rf.iter().zip(&dir).map(|(x, d)| x + step * d).collect::<Vec<f64>>();
                (nf, ng) = self.eval(&nr, lam, sigma);
                if nf <= f + 1e-4 * step * slope || step < 1e-20 {
                    break;
                }
                step *= 0.5;
            }
            let s: Vec<f64> = nr.iter().zip(rf.iter()).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = ng.iter().zip(&g).map(|(a, b)| a - b).collect();
            if dot(&s, &y) > 1e-16 {
                s_hist.push(s);
                y_hist.push(y);
                if s_hist.len() > mem {
                    s_hist.remove(0);
                    y_hist.remove(0);
                }
            }
            let improvement = f - nf;
            *rf = nr;
            f = nf;
            g = ng;
            if improvement.abs() <= 1e-15 * f.abs().max(1.0) && step < 1e-10 {
                break;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

/// Solves `min ⟨C,X⟩ s.t. ⟨A_k,X⟩ = b_k, X ⪰ 0` through the factorization
/// `X = R Rᵀ` with full column rank and a multiplier/penalty outer loop.
pub fn penalty_sdp(c: &Dense, a: &[Dense], b: &[f64], seed: u64) -> OracleSolution {
    let n = c.len();
    let r = n;
    let p = Problem { c, a, b, n, r };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rf: Vec<f64> = (0..n * r).map(|_| rng.random_range(-1.0..1.0) / (n as f64).sqrt()).collect();
    let mut lam = vec![0.0; a.len()];
    let mut sigma = 10.0;
    let mut last_res = f64::INFINITY;
    for _ in 0..200 {
        p.minimize(&mut rf, &lam, sigma, 2000);
        let res = p.residuals(&gram(&rf, n, r));
        let worst = res.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (l, v) in lam.iter_mut().zip(&res) {
            *l -= sigma * v;
        }
        if worst < 1e-10 {
            break;
        }
        if worst > 0.25 * last_res {
            sigma = (sigma * 5.0).min(1e8);
        }
        last_res = worst;
    }
    let x = gram(&rf, n, r);
    let res = p.residuals(&x);
    OracleSolution { objective: inner(c, &x), max_residual: res.iter().fold(0.0, |m, v| m.max(v.abs())), x }
}

/// Householder reduction to tridiagonal form: `(diagonal, off-diagonal)`.
fn tridiagonalize(m: &Dense) -> (Vec<f64>, Vec<f64>) {
    let n = m.len();
    let mut a = m.clone();
    for k in 0..n.saturating_sub(2) {
        let alpha_sq: f64 = (k + 1..n).map(|i| a[i][k] * a[i][k]).sum();
        if alpha_sq == 0.0 {
            continue;
        }
        let alpha = if a[k + 1][k] >= 0.0 { -alpha_sq.sqrt() } else { alpha_sq.sqrt() };
        let mut v = vec![0.0; n];
        v[k + 1] = a[k + 1][k] - alpha;
        for i in k + 2..n {
            v[i] = a[i][k];
        }
        let vnorm_sq: f64 = v.iter().map(|x| x * x).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        // A ← H A H with H = I − 2 v vᵀ / (vᵀv)
        let p: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a[i][j] * v[j]).sum::<f64>() * 2.0 / vnorm_sq).collect();
        let kk = dot(&v, &p) / vnorm_sq;
        let q: Vec<f64> = (0..n).map(|i| p[i] - kk * v[i]).collect();
        for i in 0..n {
            for j in 0..n {
                a[i][j] -= v[i] * q[j] + q[i] * v[j];
            }
        }
    }
    let d = (0..n).map(|i| a[i][i]).collect();
    let e = (0..n.saturating_sub(1)).map(|i| a[i + 1][i]).collect();
    (d, e)
}

/// Number of eigenvalues of the tridiagonal matrix strictly below `x`.
fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let off = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] };
        q = d[i] - x - if i == 0 { 0.0 } else { off / q };
        if q == 0.0 {
            q = -f64::EPSILON * (d[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Eigenvalues of a symmetric matrix in descending order.
pub fn eigenvalues(m: &Dense) -> Vec<f64> {
    let n = m.len();
    if n == 0 {
        return vec![];
    }
    let (d, e) = tridiagonalize(m);
    let radius = (0..n)
        .map(|i| d[i].abs() + if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 })
        .fold(0.0, f64::max);
    let (lo0, hi0) = (-radius - 1.0, radius + 1.0);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        // k-th smallest eigenvalue: smallest x with more than k eigenvalues below it
        let (mut lo, mut hi) = (lo0, hi0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sturm_count(&d, &e, mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    out.reverse();
    out
}
