use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sdpxlab"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sdpxlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(cmd: &mut Command) -> (Option<i32>, String) {
    let Output { status, stdout, stderr } = cmd.output().unwrap();
    (status.code(), format!("{}{}", String::from_utf8_lossy(&stdout), String::from_utf8_lossy(&stderr)))
}

#[test]
fn gen_then_solve_converges() {
    let file = scratch("maxcut.dat-s");
    let json = scratch("solution.json");
    let (code, out) = run(bin().args(["gen", "--problem", "maxcut", "--n", "8", "--p", "0.5", "--seed", "4", "-o"]).arg(&file));
    assert_eq!(code, Some(0), "{out}");
    let (code, out) = run(bin().arg("solve").arg(&file).arg("--json").arg(&json));
    assert_eq!(code, Some(0), "{out}");
    assert!(out.contains("converged=true"), "{out}");
    let sol: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(sol["X"].as_array().unwrap().len(), 8);
    assert_eq!(sol["converged"], serde_json::json!(true));

    let (code, out) = run(bin().arg("solve").arg(&file).arg("--warm-start").arg(&json));
    assert_eq!(code, Some(0), "{out}");
    let iters: usize = out.split_whitespace().find_map(|t| t.strip_prefix("iterations=")).unwrap().parse().unwrap();
    assert!(iters <= 5, "{out}");
}

#[test]
fn color_writes_partition_json() {
    let file = scratch("clique.dat-s");
    let json = scratch("partition.json");
    run(bin().args(["gen", "--problem", "clique", "--n", "6", "--seed", "1", "-o"]).arg(&file));
    let (code, out) = run(bin().arg("color").arg(&file).args(["--algo", "vc2fwl", "--json"]).arg(&json));
    assert_eq!(code, Some(0), "{out}");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert!(v.is_object());
}

#[test]
fn nn_forward_checks_pass() {
    let file = scratch("mis.dat-s");
    run(bin().args(["gen", "--problem", "mis", "--n", "6", "--seed", "2", "-o"]).arg(&file));
    for check in ["equivariance", "symmetry", "coloring"] {
        let (code, out) = run(bin().arg("nn-forward").arg(&file).args(["--arch", "vc2fmpnn", "--check", check]));
        assert_eq!(code, Some(0), "{out}");
        assert!(out.contains("pass=true"), "{out}");
    }
}

#[test]
fn verify_named_cases_exit_zero() {
    for case in ["vcwl_fail", "vc2wl_fail"] {
        let (code, out) = run(bin().args(["verify", "--case", case]));
        assert_eq!(code, Some(0), "{out}");
        assert!(out.contains(&format!("case={case} pass=true")), "{out}");
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(bin().args(["color", "missing.dat-s", "--algo", "vcwl"])).0, Some(2));
    assert_eq!(run(bin().args(["verify", "--case", "no_such_case"])).0, Some(2));
    assert_eq!(run(bin().args(["gen", "--problem", "tsp", "--n", "4", "-o", "x"])).0, Some(2));
    assert_eq!(run(bin().arg("frobnicate")).0, Some(2));
    let bad = scratch("bad.dat-s");
    std::fs::write(&bad, "1\n1\n2\n1.0\n0 1 1 x 1.0\n").unwrap();
    let (code, out) = run(bin().arg("solve").arg(&bad));
    assert_eq!(code, Some(2), "{out}");
    assert!(out.contains("line 5"), "{out}");
}

#[test]
fn bench_reports_each_size() {
    let (code, out) = run(bin().args(["bench", "--sizes", "6,8", "--seed", "3"]));
    assert_eq!(code, Some(0), "{out}");
    assert_eq!(out.lines().filter(|l| l.contains("cold_iters=")).count(), 2);
}
