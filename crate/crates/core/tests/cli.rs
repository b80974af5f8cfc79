use std::path::PathBuf;
use std::process::{Command, Output};

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cutproject")).args(args).output().expect("binary runs")
}

fn cfg(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_tmp(name: &str, text: &str) -> String {
    let dir = std::env::temp_dir().join(format!("cutproject-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn count_row_matches_library() {
    let o = run(&["count", "--config", &cfg("golden.json"), "--t", "100"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,count,main_term,discrepancy,boundary_warnings"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    // Golden chain with unit window: ⌊tτ⌋-type count, main term t/√5.
    let n: i64 = row[1].parse().unwrap();
    let main: f64 = row[2].parse().unwrap();
    assert!((main - 100.0 / 5f64.sqrt()).abs() < 1e-12);
    let delta: f64 = row[3].parse().unwrap();
    assert!((delta - (n as f64 - main)).abs() < 1e-12);
}

#[test]
fn outputs_are_byte_identical() {
    let golden = cfg("golden.json");
    let cases: Vec<Vec<&str>> = vec![
        vec!["sweep", "--config", &golden],
        vec!["variance", "--config", &golden, "--mode", "mc", "--t", "20", "--samples", "3000"],
        vec!["patterns", "--config", &golden, "--r", "3"],
        vec!["blsum", "--config", &golden, "--n-max", "5", "--range", "20"],
    ];
    for args in cases {
        let a = run(&args);
        assert!(a.status.success(), "{args:?}: {}", stderr(&a));
        for threads in ["1", "3"] {
            let mut with = args.clone();
            with.extend(["--threads", threads]);
            let b = run(&with);
            assert_eq!(a.stdout, b.stdout, "{with:?}");
        }
    }
}

#[test]
fn seed_override_changes_samples() {
    let golden = cfg("golden.json");
    let base = ["variance", "--config", &golden, "--mode", "mc", "--t", "20", "--samples", "500"];
    let a = run(&base);
    let mut other = base.to_vec();
    other.extend(["--seed", "99"]);
    let b = run(&other);
    assert!(a.status.success() && b.status.success());
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn unknown_key_is_a_config_error_with_path() {
    let p = write_tmp(
        "unknown.json",
        r#"{"split":{"d_down":1,"d_left":1},"lattice":{"kind":"golden"},
            "window":{"type":"intervals","intervals":[[0,1]]},
            "search":{"type":"intervals","intervals":[[0,1]]},"seed":1,"serch":2}"#,
    );
    let o = run(&["count", "--config", &p, "--t", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert_eq!(e.lines().count(), 1);
    assert!(e.starts_with("error code=2 kind=config"), "{e}");
    assert!(e.contains("serch"), "{e}");
}

#[test]
fn nested_field_path_is_reported() {
    let p = write_tmp(
        "nested.json",
        r#"{"split":{"d_down":1,"d_left":1},"lattice":{"kind":"golden"},
            "window":{"type":"intervals","intervals":[[0,"x"]]},
            "search":{"type":"intervals","intervals":[[0,1]]},"seed":1}"#,
    );
    let o = run(&["count", "--config", &p, "--t", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("at window:"), "{}", stderr(&o));
}

#[test]
fn invalid_window_is_a_config_error() {
    let p = write_tmp(
        "empty.json",
        r#"{"split":{"d_down":1,"d_left":1},"lattice":{"kind":"golden"},
            "window":{"type":"intervals","intervals":[[1,0]]},
            "search":{"type":"intervals","intervals":[[0,1]]},"seed":1}"#,
    );
    assert_eq!(run(&["count", "--config", &p, "--t", "3"]).status.code(), Some(2));
    assert_eq!(run(&["count", "--config", "/nonexistent.json", "--t", "3"]).status.code(), Some(2));
}

#[test]
fn unreachable_tolerance_exits_3() {
    let o = run(&["poisson-check", "--config", &cfg("golden.json"), "--t", "5", "--tolerance", "1e-30"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("error code=3 "));
}

#[test]
fn translate_budget_exits_4() {
    let o = run(&["blsum", "--config", &cfg("golden.json"), "--n-max", "3", "--range", "100000000"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).starts_with("error code=4 kind=budget-exceeded"));
}

#[test]
fn poisson_check_succeeds() {
    let o = run(&["poisson-check", "--config", &cfg("z2.json"), "--t", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let direct = v["direct"].as_f64().unwrap();
    let split = v["volume_term"].as_f64().unwrap() + v["remainder_term"].as_f64().unwrap();
    assert!((direct - split).abs() <= 1e-6f64.max(v["tail_bound"].as_f64().unwrap()) + 1e-9);
}

#[test]
fn predict_exponent_ball() {
    let o = run(&["predict-exponent", "--d-down", "2", "--d-left", "1", "--s", "1", "--mu", "1", "--region", "ball"]);
    assert!(o.status.success());
    // 2 − 2·1·2/((2+1)(1+1) + 2) = 2 − 4/8.
    assert_eq!(stdout(&o).trim().parse::<f64>().unwrap(), 1.5);
}

#[test]
fn liouville_preset_runs() {
    let o = run(&["liouville", "--config", &cfg("liouville.json")]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["c_n"].as_array().unwrap().len(), 4);
    assert!(v["spike_scan"]["rows"].as_array().unwrap().len() >= 2);
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("cutproject-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("count.csv");
    let o = run(&["count", "--config", &cfg("z2.json"), "--t", "10", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().nth(1).unwrap().split(',').nth(1), Some("10"));
}

#[test]
fn help_documents_schemas() {
    let text = stdout(&run(&["--help"]));
    for needle in [
        "t,count,main_term,discrepancy,boundary_warnings",
        "epsilon,min_left,witness_coords,psi_value,margin",
        "t,nv_diff,tail_bound,nv_mc,nv_stderr,l1_mc,mean_mc",
        "n,t,Z_estimate,log_Z,partial_sum,argmax",
        "{t, direct, volume_term, remainder_term, tail_bound, residual}",
        "[{pattern, volume, frequency}]",
    ] {
        assert!(text.contains(needle), "missing {needle}");
    }
}
