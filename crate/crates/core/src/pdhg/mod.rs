//! Primal-dual hybrid gradient for `min ⟨C,X⟩ + ε/2 ‖X‖²_F` over the PSD
//! cone with linear equality constraints.

mod eig;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{SdpInstance, SolutionTriple};
use crate::matrix::SymMatrix;

pub use eig::{eig_sym, eigvals_sym, project_psd, psd_distance, SpectralDecomp, MAX_SWEEPS};

/// Regularization ladder used by [`min_norm_solve`].
pub const EPS_LADDER: [f64; 3] = [1e-2, 1e-4, 1e-6];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdhgConfig {
    pub eps: f64,
    /// Primal step; `None` means `1/√λ_max`.
    pub alpha: Option<f64>,
    /// `ρ` in `α β λ_max = ρ`.
    pub safety: f64,
    pub theta: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub eig_tol: f64,
}

impl Default for PdhgConfig {
    fn default() -> Self {
        PdhgConfig { eps: 1e-6, alpha: None, safety: 0.9, theta: 1.0, tol: 1e-7, max_iters: 100_000, eig_tol: 1e-13 }
    }
}

impl PdhgConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return bad("eps must be a finite non-negative number");
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a.is_finite()) {
                return bad("alpha must be positive");
            }
        }
        if !(self.safety > 0.0 && self.safety < 1.0) {
            return bad("safety must lie in (0, 1)");
        }
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return bad("theta must be non-negative");
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return bad("tol must be positive");
        }
        if self.eig_tol.is_nan() || self.eig_tol <= 0.0 {
            return bad("eig_tol must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSizes {
    pub alpha: f64,
    pub beta: f64,
    pub lambda_max: f64,
}

impl StepSizes {
    pub fn new(inst: &SdpInstance, cfg: &PdhgConfig) -> Result<Self> {
        cfg.validate()?;
        let lambda_max = lambda_max_op(inst)?;
        Ok(Self::with_lambda(lambda_max, cfg))
    }

    pub fn with_lambda(lambda_max: f64, cfg: &PdhgConfig) -> Self {
        let alpha = cfg.alpha.unwrap_or(1.0 / lambda_max.sqrt());
        let beta = cfg.safety / (alpha * lambda_max);
        let s = StepSizes { alpha, beta, lambda_max };
        assert!(s.alpha * s.beta * s.lambda_max < 1.0, "step sizes violate αβλ < 1");
        s
    }
}

/// Largest eigenvalue of `X ↦ A*(A(X))` by power iteration.
pub fn lambda_max_op(inst: &SdpInstance) -> Result<f64> {
    if inst.m == 0 || inst.a.iter().all(|a| a.is_zero()) {
        return Err(Error::Numerical("constraint operator is zero".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let r: Vec<f64> = (0..inst.m).map(|_| rng.random_range(0.5..1.5)).collect();
    let mut x = inst.apply_a_adjoint(&r)?;
    let norm = x.frobenius();
    if norm == 0.0 {
        return Err(Error::Numerical("constraint operator is zero".into()));
    }
    x = x.scale(1.0 / norm);
    // ‖T x‖ for unit x is a lower bound on λ_max that increases under iteration
    let mut lambda = 0.0;
    for _ in 0..20_000 {
        let tx = inst.apply_a_adjoint(&inst.apply_a(&x)?)?;
        let next = tx.frobenius();
        if next == 0.0 {
            return Err(Error::Numerical("constraint operator is zero".into()));
        }
        x = tx.scale(1.0 / next);
        let done = (next - lambda).abs() <= 1e-12 * next;
        lambda = next;
        if done {
            break;
        }
    }
    Ok(lambda)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdhgState {
    pub x: SymMatrix,
    pub y: Vec<f64>,
    pub t: usize,
    /// `A(X)` for the current `x`.
    pub ax: Vec<f64>,
    pub primal_res: f64,
    pub step_res: f64,
}

impl PdhgState {
    pub fn new(inst: &SdpInstance, x: SymMatrix, y: Vec<f64>) -> Result<Self> {
        if y.len() != inst.m {
            return Err(Error::Shape(format!("y has length {} but m = {}", y.len(), inst.m)));
        }
        let ax = inst.apply_a(&x)?;
        let primal_res = inf_residual(&ax, &inst.b);
        Ok(PdhgState { x, y, t: 0, ax, primal_res, step_res: f64::INFINITY })
    }

    pub fn zero(inst: &SdpInstance) -> Self {
        Self::new(inst, SymMatrix::zeros(inst.n), vec![0.0; inst.m]).expect("shapes match")
    }
}

fn inf_residual(ax: &[f64], b: &[f64]) -> f64 {
    ax.iter().zip(b).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
}

/// One PDHG iteration, primal first:
/// `X⁺ = Proj[(X − αA*(y) − αC)/(1+αε)]`, `y⁺ = y + βA(X⁺ + θ(X⁺−X)) − βb`.
pub fn pdhg_step_with(state: &PdhgState, inst: &SdpInstance, cfg: &PdhgConfig, steps: &StepSizes) -> Result<PdhgState> {
    let StepSizes { alpha, beta, .. } = *steps;
    let aty = inst.apply_a_adjoint(&state.y)?;
    let denom = 1.0 + alpha * cfg.eps;
    let z = SymMatrix::from_upper_fn(inst.n, |i, j| (state.x.get(i, j) - alpha * aty.get(i, j) - alpha * inst.c.get(i, j)) / denom);
    let x = project_psd(&z, cfg.eig_tol).map_err(|e| Error::Divergence { iter: state.t + 1, msg: e.to_string() })?;
    let ax = inst.apply_a(&x)?;
    let y: Vec<f64> = (0..inst.m)
        .map(|k| {
            let ext = ax[k] + cfg.theta * (ax[k] - state.ax[k]);
            state.y[k] + beta * ext - beta * inst.b[k]
        })
        .collect();
    if x.as_slice().iter().chain(&y).any(|v| !v.is_finite()) {
        return Err(Error::Divergence { iter: state.t + 1, msg: "non-finite iterate".into() });
    }
    let step_res = x.sub(&state.x).frobenius();
    let primal_res = inf_residual(&ax, &inst.b);
    Ok(PdhgState { x, y, t: state.t + 1, ax, primal_res, step_res })
}

pub fn pdhg_step(state: &PdhgState, inst: &SdpInstance, cfg: &PdhgConfig) -> Result<PdhgState> {
    let steps = StepSizes::new(inst, cfg)?;
    pdhg_step_with(state, inst, cfg, &steps)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub converged: bool,
    pub primal_res: f64,
    pub dual_res: f64,
    pub step_res: f64,
    pub objective: f64,
    pub alpha: f64,
    pub beta: f64,
    pub lambda_max: f64,
    pub cold_start_iterations: Option<usize>,
}

/// Distance of `C + εX + A*(y)` to the PSD cone.
fn regularized_dual_res(inst: &SdpInstance, x: &SymMatrix, y: &[f64], eps: f64, eig_tol: f64) -> Result<f64> {
    let s = inst.c.add(&inst.apply_a_adjoint(y)?).axpy(eps, x);
    psd_distance(&s, eig_tol)
}

/// Iterates from `start` until the primal residual, the dual cone distance
/// and the relative step all fall below `tol`, or `max_iters` is reached.
pub fn solve_from(inst: &SdpInstance, cfg: &PdhgConfig, start: PdhgState) -> Result<(SolutionTriple, SolveStats)> {
    let steps = StepSizes::new(inst, cfg)?;
    solve_with_steps(inst, cfg, &steps, start)
}

fn solve_with_steps(inst: &SdpInstance, cfg: &PdhgConfig, steps: &StepSizes, start: PdhgState) -> Result<(SolutionTriple, SolveStats)> {
    let mut state = start;
    let mut best_primal = state.primal_res;
    // dips to machine precision are not a meaningful baseline for growth
    let floor = 1e-6 * (1.0 + inst.b.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    let mut dual_res = f64::INFINITY;
    let mut converged = false;
    while state.t < cfg.max_iters {
        let next = pdhg_step_with(&state, inst, cfg, steps)?;
        let rel_step = next.step_res / state.x.frobenius().max(1.0);
        state = next;
        best_primal = best_primal.min(state.primal_res);
        if state.primal_res > 1e6 * best_primal.max(floor) {
            return Err(Error::Divergence {
                iter: state.t,
                msg: format!("primal residual {:.3e} grew from minimum {:.3e}", state.primal_res, best_primal),
            });
        }
        if state.primal_res <= cfg.tol && rel_step <= cfg.tol {
            dual_res = regularized_dual_res(inst, &state.x, &state.y, cfg.eps, cfg.eig_tol)?;
            if dual_res <= cfg.tol {
                converged = true;
                break;
            }
        }
    }
    if !converged && state.t > 0 {
        dual_res = regularized_dual_res(inst, &state.x, &state.y, cfg.eps, cfg.eig_tol)?;
    }
    let stats = SolveStats {
        iterations: state.t,
        converged,
        primal_res: state.primal_res,
        dual_res,
        step_res: state.step_res,
        objective: inst.c.inner(&state.x),
        alpha: steps.alpha,
        beta: steps.beta,
        lambda_max: steps.lambda_max,
        cold_start_iterations: None,
    };
    Ok((SolutionTriple { x: state.x, y: state.y, s: None }, stats))
}

/// Cold start from `(0, 0)`.
pub fn solve(inst: &SdpInstance, cfg: &PdhgConfig) -> Result<(SolutionTriple, SolveStats)> {
    solve_from(inst, cfg, PdhgState::zero(inst))
}

/// Starts from `X0` projected onto the PSD cone and `y0`. When
/// `compare_cold` is set, a cold solve is run too and its iteration count
/// reported in `cold_start_iterations`.
pub fn warm_start_solve(
    inst: &SdpInstance,
    x0: &SymMatrix,
    y0: &[f64],
    cfg: &PdhgConfig,
    compare_cold: bool,
) -> Result<(SolutionTriple, SolveStats)> {
    let x0 = project_psd(x0, cfg.eig_tol)?;
    let start = PdhgState::new(inst, x0, y0.to_vec())?;
    let steps = StepSizes::new(inst, cfg)?;
    let (sol, mut stats) = solve_with_steps(inst, cfg, &steps, start)?;
    if compare_cold {
        let (_, cold) = solve_with_steps(inst, cfg, &steps, PdhgState::zero(inst))?;
        stats.cold_start_iterations = Some(cold.iterations);
    }
    Ok((sol, stats))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MinNormStats {
    pub stages: Vec<(f64, SolveStats)>,
    pub total_iterations: usize,
    pub converged: bool,
}

/// Continuation over [`EPS_LADDER`], each stage warm-started from the last,
/// followed by an unregularized stage from the final iterate. `cfg.eps` is
/// ignored; `cfg.max_iters` applies per stage.
pub fn min_norm_solve(inst: &SdpInstance, cfg: &PdhgConfig) -> Result<(SolutionTriple, MinNormStats)> {
    let steps = StepSizes::new(inst, cfg)?;
    let mut state = PdhgState::zero(inst);
    let mut stats = MinNormStats { converged: true, ..Default::default() };
    let ladder = EPS_LADDER.iter().copied().chain(std::iter::once(0.0));
    let mut sol = None;
    for (stage, eps) in ladder.enumerate() {
        let stage_cfg = PdhgConfig { eps, ..cfg.clone() };
        let start = PdhgState { t: 0, ..state.clone() };
        let (s, st) =
            solve_with_steps(inst, &stage_cfg, &steps, start).map_err(|e| Error::Stage { stage, source: Box::new(e) })?;
        stats.total_iterations += st.iterations;
        stats.converged &= st.converged;
        state = PdhgState::new(inst, s.x.clone(), s.y.clone())?;
        stats.stages.push((eps, st));
        sol = Some(s);
    }
    Ok((sol.expect("ladder is non-empty"), stats))
}

pub fn min_norm_solution(inst: &SdpInstance, cfg: &PdhgConfig) -> Result<SymMatrix> {
    Ok(min_norm_solve(inst, cfg)?.0.x)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KktResiduals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

/// Residuals of the unregularized KKT system with `S = C + A*(y)`.
pub fn kkt_residuals(inst: &SdpInstance, x: &SymMatrix, y: &[f64]) -> Result<KktResiduals> {
    let primal = inst.primal_residual_inf(x)?;
    let s = inst.c.add(&inst.apply_a_adjoint(y)?);
    let dual = psd_distance(&s, 1e-14)?;
    Ok(KktResiduals { primal, dual, gap: x.inner(&s).abs() })
}

/// Symmetric Gaussian perturbation with entrywise standard deviation `sigma`.
pub fn symmetric_noise(n: usize, sigma: f64, seed: u64) -> SymMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SymMatrix::from_upper_fn(n, |_, _| sigma * rng.sample::<f64, _>(StandardNormal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SparseSymMatrix;
    use approx::assert_abs_diff_eq;

    fn scalar(c: f64, a: f64, b: f64) -> SdpInstance {
        SdpInstance::new(SymMatrix::diag(&[c]), vec![SparseSymMatrix::new(1, [(0, 0, a)]).unwrap()], vec![b]).unwrap()
    }

    #[test]
    fn one_step_hand_trace() {
        let inst = scalar(1.0, 1.0, 1.0);
        let cfg = PdhgConfig { eps: 0.0, alpha: Some(0.5), ..Default::default() };
        let steps = StepSizes::new(&inst, &cfg).unwrap();
        assert_abs_diff_eq!(steps.lambda_max, 1.0, epsilon = 1e-12);
        let s1 = pdhg_step_with(&PdhgState::zero(&inst), &inst, &cfg, &steps).unwrap();
        assert_eq!(s1.x.get(0, 0), 0.0);
        assert_abs_diff_eq!(s1.y[0], -steps.beta, epsilon = 1e-15);
        assert_abs_diff_eq!(steps.alpha * steps.beta * steps.lambda_max, 0.9, epsilon = 1e-12);
    }

    #[test]
    fn zero_problem_is_fixed_point() {
        let inst = SdpInstance::new(SymMatrix::zeros(2), vec![SparseSymMatrix::new(2, [(0, 0, 1.0)]).unwrap()], vec![0.0]).unwrap();
        let s = pdhg_step(&PdhgState::zero(&inst), &inst, &PdhgConfig::default()).unwrap();
        assert_eq!(s.x, SymMatrix::zeros(2));
        assert_eq!(s.y, vec![0.0]);
    }

    #[test]
    fn scalar_solve() {
        let inst = scalar(1.0, 1.0, 1.0);
        let (sol, st) = solve(&inst, &PdhgConfig::default()).unwrap();
        assert!(st.converged);
        assert_abs_diff_eq!(sol.x.get(0, 0), 1.0, epsilon = 1e-6);
        let x = min_norm_solution(&inst, &PdhgConfig::default()).unwrap();
        assert_abs_diff_eq!(x.get(0, 0), 1.0, epsilon = 1e-6);
        let k = kkt_residuals(&inst, &SymMatrix::diag(&[1.0]), &[-1.0]).unwrap();
        assert!(k.max() <= 1e-8);
    }

    #[test]
    fn trace_constraint_min_norm() {
        let inst = SdpInstance::new(SymMatrix::identity(2), vec![SparseSymMatrix::from_dense(&SymMatrix::identity(2))], vec![1.0]).unwrap();
        let cfg = PdhgConfig { eps: 1e-6, ..Default::default() };
        let (sol, st) = solve(&inst, &cfg).unwrap();
        assert!(st.converged);
        assert_abs_diff_eq!(sol.x.get(0, 0), 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(sol.x.get(1, 1), 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(sol.x.get(0, 1), 0.0, epsilon = 1e-6);
    }

    #[test]
    fn lambda_examples() {
        let trace = SdpInstance::new(SymMatrix::zeros(3), vec![SparseSymMatrix::from_dense(&SymMatrix::identity(3))], vec![1.0]).unwrap();
        assert_abs_diff_eq!(lambda_max_op(&trace).unwrap(), 3.0, epsilon = 1e-9);
        let zero = SdpInstance::new(SymMatrix::zeros(2), vec![SparseSymMatrix::new(2, []).unwrap()], vec![0.0]).unwrap();
        assert!(lambda_max_op(&zero).is_err());
    }

    #[test]
    fn bad_config_rejected() {
        let inst = scalar(1.0, 1.0, 1.0);
        for cfg in [
            PdhgConfig { safety: 1.0, ..Default::default() },
            PdhgConfig { eps: -1.0, ..Default::default() },
            PdhgConfig { alpha: Some(0.0), ..Default::default() },
            PdhgConfig { tol: 0.0, ..Default::default() },
        ] {
            assert!(solve(&inst, &cfg).is_err());
        }
    }
}
