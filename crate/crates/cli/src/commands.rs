use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, Context};
use serde::Deserialize;
use serde_json::{json, Value};

use sdpxlab::color::{Algo, Refiner};
use sdpxlab::nn::{self, Arch, NetParams};
use sdpxlab::pdhg::{self, PdhgConfig};
use sdpxlab::relax::{self, GenParams, Problem};
use sdpxlab::verify;
use sdpxlab::{read_sdpa, write_sdpa, Error, SdpInstance, SymMatrix};

use crate::{BenchArgs, ColorArgs, GenArgs, NnArgs, SolveArgs, VerifyArgs};

#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Verify(String),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Verify(_) | Failure::Runtime(_) => 1,
        }
    }

    pub fn report(&self) {
        match self {
            Failure::Usage(e) => eprintln!("status=usage_error error={e:#}"),
            Failure::Verify(msg) => eprintln!("status=verify_failed {msg}"),
            Failure::Runtime(e) => eprintln!("status=error error={e:#}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. }
            | Error::Shape(_)
            | Error::InvalidArgument(_)
            | Error::Unsupported(_)
            | Error::LinearlyDependent(_)
            | Error::SizeGuard(_) => Failure::Usage(e.into()),
            _ => Failure::Runtime(e.into()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(anyhow!(msg.into()))
}

fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(anyhow!("cannot read {}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<SdpInstance, Failure> {
    let text = read_input(path)?;
    read_sdpa(&text).map_err(|e| Failure::from(e).context(path))
}

impl Failure {
    fn context(self, path: &Path) -> Failure {
        match self {
            Failure::Usage(e) => Failure::Usage(e.context(path.display().to_string())),
            Failure::Runtime(e) => Failure::Runtime(e.context(path.display().to_string())),
            other => other,
        }
    }
}

fn write_output(path: &Path, contents: &str) -> Outcome {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display())).map_err(Failure::Runtime)
}

fn write_json(path: Option<&Path>, value: &Value) -> Outcome {
    if let Some(p) = path {
        let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Runtime(e.into()))?;
        write_output(p, &text)?;
    }
    Ok(())
}

pub fn gen(a: GenArgs) -> Outcome {
    let problem: Problem = a.problem.parse()?;
    let params = GenParams { p: a.p, d: a.d, clauses: a.clauses, m: a.m };
    let inst = relax::generate(problem, a.n, &params, a.seed)?;
    write_output(&a.output, &write_sdpa(&inst))?;
    println!(
        "status=ok problem={problem} n={} m={} nnz={} seed={} offset={} maximize={} output={}",
        inst.n,
        inst.m,
        inst.nnz(),
        a.seed,
        inst.meta.offset,
        inst.meta.maximize,
        a.output.display()
    );
    write_json(a.json.as_deref(), &json!({ "problem": problem.name(), "n": inst.n, "m": inst.m, "seed": a.seed, "meta": inst.meta }))
}

#[derive(Deserialize)]
struct WarmStart {
    #[serde(rename = "X")]
    x: Vec<Vec<f64>>,
    #[serde(default)]
    y: Option<Vec<f64>>,
}

pub fn solve(a: SolveArgs) -> Outcome {
    let inst = load_instance(&a.file)?;
    let defaults = PdhgConfig::default();
    let cfg = PdhgConfig {
        eps: a.eps.unwrap_or(defaults.eps),
        tol: a.tol.unwrap_or(defaults.tol),
        max_iters: a.max_iters.unwrap_or(defaults.max_iters),
        ..defaults
    };
    cfg.validate()?;
    if cfg.max_iters == 0 {
        return Err(usage("--max-iters must be positive"));
    }
    let start = Instant::now();
    let (sol, iterations, converged) = if let Some(ws) = &a.warm_start {
        let w: WarmStart = serde_json::from_str(&read_input(ws)?).map_err(|e| usage(format!("bad warm start {}: {e}", ws.display())))?;
        let x0 = sdpxlab::symmetrize(&w.x)?;
        let y0 = w.y.unwrap_or_else(|| vec![0.0; inst.m]);
        let (sol, st) = pdhg::warm_start_solve(&inst, &x0, &y0, &cfg, false)?;
        (sol, st.iterations, st.converged)
    } else if a.min_norm {
        let (sol, st) = pdhg::min_norm_solve(&inst, &cfg)?;
        (sol, st.total_iterations, st.converged)
    } else {
        let (sol, st) = pdhg::solve(&inst, &cfg)?;
        (sol, st.iterations, st.converged)
    };
    let elapsed = start.elapsed().as_secs_f64();
    let objective = inst.objective(&sol.x)?;
    let kkt = pdhg::kkt_residuals(&inst, &sol.x, &sol.y)?;
    println!(
        "status=ok converged={converged} iterations={iterations} objective={objective:.12e} source_objective={:.12e} primal_res={:.3e} dual_res={:.3e} gap={:.3e} seconds={elapsed:.3}",
        inst.meta.source_value(objective),
        kkt.primal,
        kkt.dual,
        kkt.gap
    );
    write_json(
        a.json.as_deref(),
        &json!({
            "X": sol.x.to_rows(),
            "y": sol.y,
            "objective": objective,
            "residuals": kkt,
            "iterations": iterations,
            "converged": converged,
        }),
    )
}

pub fn color(a: ColorArgs) -> Outcome {
    let algo: Algo = a.algo.parse()?;
    if a.max_rounds == Some(0) {
        return Err(usage("--max-rounds must be positive"));
    }
    let inst = load_instance(&a.file)?;
    let (p, rounds) = Refiner::new(&inst).run_to_stable(algo, a.max_rounds)?;
    println!("status=ok algo={algo} rounds={rounds} var_classes={} con_classes={}", p.num_var_classes(), p.num_con_classes());
    write_json(a.json.as_deref(), &p.to_json())
}

pub fn nn_forward(a: NnArgs) -> Outcome {
    let arch: Arch = a.arch.parse()?;
    if a.dim == 0 {
        return Err(usage("--dim must be positive"));
    }
    let inst = load_instance(&a.file)?;
    let params = NetParams::seeded(arch, a.dim, a.layers, a.seed)?;
    let out = nn::predict(&inst, &params)?;
    let mut report = json!({ "arch": arch.name(), "layers": a.layers, "dim": a.dim, "seed": a.seed, "prediction": out.to_rows() });
    let mut line = format!("status=ok arch={arch} layers={} dim={} seed={} max_abs_output={:.6e}", a.layers, a.dim, a.seed, out.max_abs());
    let mut failed = None;
    if let Some(check) = &a.check {
        let s = verify::nn_sweep(arch, std::slice::from_ref(&inst), &[a.seed], a.dim, a.layers)?;
        let (value, pass) = match check.as_str() {
            "symmetry" => (s.max_asymmetry, s.max_asymmetry <= 1e-12),
            "equivariance" => {
                let dev = s.max_equivariance.max(s.max_decode_equivariance);
                (dev, dev <= 1e-9)
            }
            _ => (s.coloring_violations as f64, s.coloring_violations == 0),
        };
        line.push_str(&format!(" check={check} value={value:e} pass={pass}"));
        report["check"] = json!({ "name": check, "value": value, "pass": pass });
        if !pass {
            failed = Some(format!("check={check} value={value:e}"));
        }
    }
    println!("{line}");
    write_json(a.json.as_deref(), &report)?;
    failed.map_or(Ok(()), |m| Err(Failure::Verify(m)))
}

pub fn verify(a: VerifyArgs) -> Outcome {
    let start = Instant::now();
    let reports = match &a.case {
        Some(id) => vec![verify::run_case(id)?],
        None => verify::run_all(a.seed)?.reports,
    };
    for r in &reports {
        println!("{}", r.summary_line());
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.id.as_str()).collect();
    println!("status={} cases={} failed={} seconds={:.3}", if failed.is_empty() { "ok" } else { "fail" }, reports.len(), failed.len(), start.elapsed().as_secs_f64());
    write_json(a.json.as_deref(), &serde_json::to_value(&reports).map_err(|e| Failure::Runtime(e.into()))?)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verify(format!("failed_cases={}", failed.join(","))))
    }
}

pub fn bench(a: BenchArgs) -> Outcome {
    let problem: Problem = a.problem.parse()?;
    if a.sizes.is_empty() || a.sizes.iter().any(|&n| n < 2) {
        return Err(usage("--sizes needs values of at least 2"));
    }
    let cfg = PdhgConfig::default();
    let mut rows = Vec::new();
    for &n in &a.sizes {
        let params = GenParams { p: Some(0.5), ..Default::default() };
        let inst = relax::generate(problem, n, &params, a.seed.wrapping_add(n as u64))?;
        let t = Instant::now();
        let (sol, cold) = pdhg::solve(&inst, &cfg)?;
        let cold_s = t.elapsed().as_secs_f64();
        let x0: SymMatrix = sol.x.add(&pdhg::symmetric_noise(inst.n, 1e-3, a.seed));
        let t = Instant::now();
        let (_, warm) = pdhg::warm_start_solve(&inst, &x0, &sol.y, &cfg, false)?;
        let warm_s = t.elapsed().as_secs_f64();
        println!(
            "problem={problem} n={} m={} cold_iters={} cold_seconds={cold_s:.4} warm_iters={} warm_seconds={warm_s:.4} speedup={:.3}",
            inst.n,
            inst.m,
            cold.iterations,
            warm.iterations,
            if warm_s > 0.0 { cold_s / warm_s } else { f64::INFINITY }
        );
        rows.push(json!({
            "n": inst.n, "m": inst.m,
            "cold": { "iterations": cold.iterations, "seconds": cold_s, "converged": cold.converged },
            "warm": { "iterations": warm.iterations, "seconds": warm_s, "converged": warm.converged },
        }));
    }
    write_json(a.json.as_deref(), &json!({ "problem": problem.name(), "seed": a.seed, "runs": rows }))
}
