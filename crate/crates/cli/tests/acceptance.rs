//! End-to-end acceptance checks. Runs without the libtest harness so each
//! criterion prints exactly one `criterion N: PASS|FAIL` line.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use sdpxlab::pdhg::{self, PdhgConfig};
use sdpxlab::relax::{self, GenParams, Problem};
use sdpxlab::verify::{self, instances, CaseReport};
use sdpxlab::{read_sdpa, write_sdpa, SdpInstance, SymMatrix};
use sdpxlab_oracle::penalty_sdp;

const SEED: u64 = 2024;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn failed_names(reports: &[CaseReport]) -> Vec<String> {
    reports
        .iter()
        .flat_map(|r| r.checks.iter().filter(|c| !c.pass).map(move |c| format!("{}/{}", r.id, c.name)))
        .collect()
}

fn within(limit: Duration, start: Instant) -> (bool, f64) {
    let t = start.elapsed();
    (t <= limit, t.as_secs_f64())
}

fn observed(report: &CaseReport, name: &str) -> Option<f64> {
    report.checks.iter().find(|c| c.name == name).and_then(|c| c.observed.as_f64())
}

fn criterion_1() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_sdpxlab");
    let mut details = Vec::new();
    let mut pass = true;
    for (case, keys) in [("vcwl_fail", ["x_11", "x_33"]), ("vc2wl_fail", ["x_15", "x_24"])] {
        let start = Instant::now();
        let status = Command::new(bin).args(["verify", "--case", case]).output().expect("spawn cli");
        let (fast, secs) = within(Duration::from_secs(10), start);
        let report = verify::run_case(case).expect("known case");
        let values: Vec<String> = keys.iter().map(|k| format!("{k}={:.5}", observed(&report, k).unwrap_or(f64::NAN))).collect();
        let ok = status.status.code() == Some(0) && report.pass && fast;
        pass &= ok;
        details.push(format!("{case} exit={:?} {} secs={secs:.2}", status.status.code(), values.join(" ")));
        if !report.pass {
            details.push(format!("failed={:?}", failed_names(&[report])));
        }
    }
    outcome(pass, details.join("; "))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let lattice = verify::random_instances(SEED, 50, 12).expect("generators");
    let mut reports = vec![verify::check_hierarchy(&lattice)];
    for case in ["vc2wl_fail", "fwlplus_strict", "incomparable", "delta_strict"] {
        reports.push(verify::run_case(case).expect("known case"));
    }
    let (fast, secs) = within(Duration::from_secs(120), start);
    let failed = failed_names(&reports);
    outcome(failed.is_empty() && fast, format!("instances={} witnesses=4 failed={failed:?} secs={secs:.2}", lattice.len()))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let pool = verify::random_instances(SEED ^ 0x3, 4, 10).expect("generators");
    let insts = &pool[..20];
    let report = verify::check_aux_equivalence(insts);
    let (fast, secs) = within(Duration::from_secs(120), start);
    let failed = failed_names(std::slice::from_ref(&report));
    outcome(report.pass && fast, format!("instances={} mismatches={} secs={secs:.2}", insts.len(), failed.len()))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut insts = vec![("three_by_three".to_string(), instances::three_by_three()), ("latin_square".to_string(), instances::latin_square())];
    insts.extend(verify::maxcut_instances(SEED ^ 0x4, 10, (4, 12), 0.5).expect("generators"));
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for (_, inst) in &insts {
        match verify::trajectory_spread(inst, 500) {
            Ok(s) => {
                worst = worst.max(s.x_rel).max(s.y_rel);
                pass &= s.x_rel <= verify::TRAJECTORY_TOL && s.y_rel <= verify::TRAJECTORY_TOL;
            }
            Err(_) => pass = false,
        }
    }
    let (fast, secs) = within(Duration::from_secs(120), start);
    outcome(pass && fast, format!("instances={} worst_rel_spread={worst:.3e} secs={secs:.2}", insts.len()))
}

fn dense(m: &SymMatrix) -> Vec<Vec<f64>> {
    m.to_rows()
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let g = relax::er_graph(20, 0.3, SEED).expect("graph");
    let inst = relax::maxcut_sdp(&g);
    let cfg = PdhgConfig { max_iters: 50_000, ..PdhgConfig::default() };
    let (kkt_ok, kkt_detail) = match pdhg::min_norm_solve(&inst, &cfg) {
        Ok((sol, stats)) => {
            let k = pdhg::kkt_residuals(&inst, &sol.x, &sol.y).expect("shapes");
            (k.max() <= 1e-5 && stats.total_iterations <= 50_000, format!("kkt={:.2e} iters={}", k.max(), stats.total_iterations))
        }
        Err(e) => (false, format!("solve error: {e}")),
    };

    let mut worst_gap: f64 = 0.0;
    let mut oracle_ok = true;
    let problems = [Problem::Maxcut, Problem::Clique, Problem::Mis, Problem::Vc, Problem::Max2sat];
    for (t, problem) in problems.into_iter().enumerate() {
        let n = 5 + t;
        let inst = relax::generate(problem, n, &GenParams { p: Some(0.5), ..Default::default() }, SEED + t as u64).expect("generate");
        let ours = match pdhg::min_norm_solve(&inst, &PdhgConfig::default()) {
            Ok((sol, _)) => inst.objective(&sol.x).expect("shape"),
            Err(_) => {
                oracle_ok = false;
                continue;
            }
        };
        let a: Vec<Vec<Vec<f64>>> = inst.a.iter().map(|ak| dense(&ak.to_dense())).collect();
        let reference = penalty_sdp(&dense(&inst.c), &a, &inst.b, SEED);
        let gap = (ours - reference.objective).abs() / reference.objective.abs().max(1.0);
        worst_gap = worst_gap.max(gap);
        oracle_ok &= gap <= 1e-3 && reference.max_residual <= 1e-6;
    }
    let (fast, secs) = within(Duration::from_secs(180), start);
    outcome(kkt_ok && oracle_ok && fast, format!("{kkt_detail} oracle_instances=5 worst_rel_obj_gap={worst_gap:.2e} secs={secs:.2}"))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut insts = vec![instances::three_by_three()];
    insts.extend(verify::maxcut_instances(SEED ^ 0x6, 5, (4, 8), 0.5).expect("generators").into_iter().map(|(_, i)| i));
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for inst in &insts {
        match verify::scale_errors(inst, &verify::SCALE_ALPHAS) {
            Ok(errs) => errs.iter().for_each(|e| {
                worst = worst.max(*e);
                pass &= *e <= 1e-3;
            }),
            Err(_) => pass = false,
        }
    }
    let (fast, secs) = within(Duration::from_secs(60), start);
    outcome(pass && fast, format!("instances={} worst_rel_err={worst:.2e} secs={secs:.2}", insts.len()))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let insts: Vec<SdpInstance> = verify::random_instances(SEED ^ 0x7, 1, 10).expect("generators").into_iter().map(|(_, i)| i).collect();
    let seeds: Vec<u64> = (0..10).collect();
    let report = verify::check_nn_properties(&insts[..2], &seeds, 8, 3);
    let (fast, secs) = within(Duration::from_secs(120), start);
    let failed = failed_names(std::slice::from_ref(&report));
    outcome(report.pass && fast, format!("archs=6 seeds=10 instances=2 failed={failed:?} secs={secs:.2}"))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let insts = verify::maxcut_instances(SEED ^ 0x8, 10, (6, 14), 0.4).expect("generators");
    let mut wins = 0;
    let mut counts = Vec::new();
    for (i, (_, inst)) in insts.iter().enumerate() {
        if let Ok((warm, cold)) = verify::warm_vs_cold(inst, 1e-3, SEED + i as u64) {
            counts.push(format!("{warm}/{cold}"));
            wins += usize::from(warm < cold);
        }
    }
    let (fast, secs) = within(Duration::from_secs(120), start);
    outcome(wins == insts.len() && fast, format!("warm<cold on {wins}/{} warm/cold=[{}] secs={secs:.2}", insts.len(), counts.join(",")))
}

fn criterion_9() -> Outcome {
    let mut exact = 0;
    let total = 20;
    for t in 0..total {
        let problem = Problem::ALL[t % Problem::ALL.len()];
        let inst = relax::generate(problem, 4 + t % 5, &GenParams::default(), SEED + t as u64).expect("generate");
        let text = write_sdpa(&inst);
        let back = read_sdpa(&text).expect("parse");
        if back == inst && write_sdpa(&back) == text {
            exact += 1;
        }
    }
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/hand.dat-s");
    let fixture = read_sdpa(&std::fs::read_to_string(path).expect("fixture")).expect("fixture parses");
    let expected = SdpInstance::from_dense(&[vec![-1.0, 0.0], vec![0.0, 0.0]], &[vec![vec![1.0, 0.0], vec![0.0, 0.0]]], &[1.0]).expect("instance");
    let fixture_ok = fixture.c == expected.c && fixture.a == expected.a && fixture.b == expected.b;
    outcome(exact == total && fixture_ok, format!("round_trip_exact={exact}/{total} fixture_ok={fixture_ok}"))
}

fn main() -> ExitCode {
    let criteria: [fn() -> Outcome; 9] =
        [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8, criterion_9];
    let mut all = true;
    for (i, f) in criteria.iter().enumerate() {
        let o = f();
        all &= o.pass;
        println!("criterion {}: {} {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
