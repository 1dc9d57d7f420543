use serde_json::Value;
use std::process::Command;
use topoforge::cli::{dispatch, EXIT_BUDGET, EXIT_FAIL, EXIT_PASS, EXIT_USAGE};

fn run(args: &[&str]) -> topoforge::cli::Outcome {
    dispatch(std::iter::once("topoforge").chain(args.iter().copied()))
}

fn without_wall_time(s: &str) -> String {
    s.lines().filter(|l| !l.starts_with("wall_time")).collect::<Vec<_>>().join("\n")
}

#[test]
fn fsym_pentagon_example() {
    let o = run(&["fsym", "--group", "Z2", "--check-pentagon"]);
    assert_eq!(o.code, EXIT_PASS, "{}", o.stderr);
    assert!(o.stdout.contains("pentagon_residual = 0\n"));
}

#[test]
fn tv_sphere_example() {
    let o = run(&["tv", "--group", "Z2", "--complex", "sphere_d4.tri"]);
    assert_eq!(o.code, EXIT_PASS, "{}", o.stderr);
    assert!(o.stdout.contains("\nZ = 0.5\n"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["kitaev", "--group", "Z9999"]).code, EXIT_USAGE);
    assert_eq!(run(&["kitaev"]).code, EXIT_USAGE);
    assert_eq!(run(&["frobnicate"]).code, EXIT_USAGE);
    assert_eq!(run(&["kitaev", "--group", "Z2", "--torus", "2by2"]).code, EXIT_USAGE);
    assert_eq!(run(&["tv", "--group", "Z2", "--complex", "/nonexistent/x.tri"]).code, EXIT_USAGE);
    let o = run(&["kitaev", "--group", "Z9999"]);
    assert!(o.stdout.is_empty() && o.stderr.contains("Z9999"));
}

#[test]
fn budget_exceeded_exits_three() {
    assert_eq!(run(&["kitaev", "--group", "S3", "--torus", "2x2", "--ground-dim"]).code, EXIT_BUDGET);
    assert_eq!(run(&["tv", "--group", "D4", "--complex", "sphere_d4.tri", "--budget", "1000"]).code, EXIT_BUDGET);
}

#[test]
fn failed_checks_exit_one() {
    let o = run(&["duality", "--group", "Z2", "--corrupt", "0.1"]);
    assert_eq!(o.code, EXIT_FAIL);
    assert!(o.stdout.contains("check.fourier_equals_six_j = fail"));
    let o = run(&["fsym", "--group", "S3", "--check-pentagon", "--corrupt", "0.1"]);
    assert_eq!(o.code, EXIT_FAIL);
}

#[test]
fn every_subcommand_runs() {
    let cases: [&[&str]; 11] = [
        &["group", "--group", "D4"],
        &["fsym", "--group", "S3", "--dump"],
        &["kitaev", "--group", "Z2", "--torus", "2x2", "--ground-dim", "--check-constraints"],
        &["stringnet", "--group", "Z2", "--torus", "2x2", "--check-duality"],
        &["stringnet", "--group", "S3", "--loop", "1", "--types", "2"],
        &["ribbon", "--group", "Z2", "--random", "4"],
        &["ribbon", "--group", "Z2", "--path", "0:0,1:0", "--pair", "1,0", "--check-endpoints"],
        &["dw", "--group", "S3", "--complex", "s2xs1.tri", "--check-tv"],
        &["cylinder-check", "--group", "Z2", "--torus", "2x2"],
        &["duality", "--group", "S3", "--samples", "50"],
        &["tv", "--group", "S3", "--complex", "rp3.tri"],
    ];
    for args in cases {
        let o = run(args);
        assert_eq!(o.code, EXIT_PASS, "{args:?}: {}{}", o.stdout, o.stderr);
        assert!(o.stdout.ends_with('\n') && o.stdout.contains("status = pass"), "{args:?}");
    }
}

#[test]
fn json_is_one_object_with_tolerances() {
    let o = run(&["--json", "dw", "--group", "Z2", "--complex", "sphere_2t.tri"]);
    assert_eq!(o.code, EXIT_PASS);
    assert_eq!(o.stdout.trim().lines().count(), 1);
    let v: Value = serde_json::from_str(o.stdout.trim()).unwrap();
    assert_eq!(v["command"], "dw");
    assert_eq!(v["results"]["Z"]["value"], 0.5);
    assert_eq!(v["results"]["Z"]["tolerance"], 1e-9);
}

#[test]
fn reports_are_reproducible() {
    let args = ["cylinder-check", "--group", "Z3", "--samples", "8", "--seed", "4"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.code, EXIT_PASS, "{}", a.stderr);
    assert_eq!(without_wall_time(&a.stdout), without_wall_time(&b.stdout));
}

#[test]
fn tolerance_flag_is_used() {
    let o = run(&["--tolerance", "1e-3", "duality", "--group", "Z2", "--corrupt", "1e-5"]);
    assert_eq!(o.code, EXIT_PASS, "{}", o.stdout);
    assert!(o.stdout.contains("check.fourier_equals_six_j.tolerance = 1e-3"));
}

#[test]
fn boundary_file_overrides_colors() {
    let dir = std::env::temp_dir().join(format!("topoforge-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cx = dir.join("tet.tri");
    std::fs::write(&cx, "tetrahedra 1\ntet 0 - - - -\n").unwrap();
    let good = dir.join("good.col");
    let lines: String = ["01", "02", "03", "12", "13", "23"].iter().map(|e| format!("color 0.{e} 0\n")).collect();
    std::fs::write(&good, lines).unwrap();
    let bad = dir.join("bad.col");
    std::fs::write(&bad, "color 0.01 1\ncolor 0.02 0\ncolor 0.03 0\ncolor 0.12 0\ncolor 0.13 0\ncolor 0.23 0\n").unwrap();
    let c = cx.to_str().unwrap();
    let o = run(&["tv", "--group", "Z2", "--complex", c, "--boundary", good.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_PASS, "{}", o.stderr);
    let o = run(&["tv", "--group", "Z2", "--complex", c, "--boundary", bad.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_FAIL);
    assert!(o.stderr.contains("inadmissible"), "{}", o.stderr);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn binary_honours_thread_variable() {
    let out = Command::new(env!("CARGO_BIN_EXE_topoforge"))
        .args(["tv", "--group", "S3", "--complex", "s2xs1.tri"])
        .env("TOPOFORGE_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_PASS));
    assert!(String::from_utf8_lossy(&out.stdout).contains("\nZ = 1\n"));
    let out = Command::new(env!("CARGO_BIN_EXE_topoforge")).args(["kitaev", "--group", "Z9999"]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
}
