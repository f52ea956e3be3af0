use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symdyn"))
        .args(args)
        .env("SYMDYN_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn summary(o: &Output) -> serde_json::Value {
    let text = stdout(o);
    let line = text
        .lines()
        .find_map(|l| l.strip_prefix("# summary: "))
        .expect("summary line");
    serde_json::from_str(line).unwrap()
}

#[test]
fn graph_dim_of_the_plane() {
    let o = run(&[
        "graph-dim",
        "--family",
        "cayley_zd",
        "--D",
        "2",
        "--rmin",
        "16",
        "--rmax",
        "64",
        "--expect",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let slope = summary(&o)["fit_slope"].as_f64().unwrap();
    assert!((slope - 2.0).abs() < 0.15, "slope {slope}");
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("16,64,")).count(), 49);
}

#[test]
fn cex_roundtrip_passes() {
    let o = run(&["cex-roundtrip", "--J", "4", "--trials", "200", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(summary(&o)["failures"], 0);
}

#[test]
fn odometer_panorama_stays_at_zero() {
    let o = run(&["sys-panorama", "--system", "odometer", "--window", "0", "--T", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<String> = stdout(&o).lines().skip(5).map(String::from).collect();
    assert_eq!(rows.len(), 11);
    for (t, row) in rows.iter().enumerate() {
        assert_eq!(row, &format!("10,{t},1,0"));
    }
}

#[test]
fn uncovered_target_exits_one() {
    let o = run(&[
        "sys-panorama",
        "--system",
        "odometer",
        "--window",
        "0",
        "--T",
        "4",
        "--target",
        "0;1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(summary(&o)["missing"], "1");
}

#[test]
fn propagation_violation_exits_one() {
    let o = run(&["cex-propagation", "--T", "8"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(summary(&o)["first_violation"], 6);
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = [
        "metric-lipschitz",
        "--system",
        "ca",
        "--D",
        "2",
        "--neighborhood",
        "0,0;1,0;0,1",
        "--table-seed",
        "3",
        "--samples",
        "300",
        "--seed",
        "9",
        "--format",
        "json",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let trace = ["cex-roundtrip", "--J", "3", "--trace", "--seed", "5"];
    assert_eq!(run(&trace).stdout, run(&trace).stdout);
}

#[test]
fn output_embeds_config() {
    let o = run(&[
        "cex-roundtrip",
        "--J",
        "2",
        "--trials",
        "5",
        "--seed",
        "77",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["seed"], 77);
    assert_eq!(v["config"]["j"], 2);
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("symdyn-cli-test-{}.csv", std::process::id()));
    let o = run(&["cex-propagation", "--T", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert!(text.contains("3,3,8,7,true"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["graph-dim", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(
        run(&["sys-panorama", "--window", "0", "--T", "2"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["graph-dim", "--rmin", "9", "--rmax", "3"]).status.code(), Some(2));
    assert_eq!(
        run(&["sys-propagation", "--system-file", "/nonexistent.json", "--T", "2"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn system_file_is_loaded() {
    let path = std::env::temp_dir().join(format!("symdyn-cli-sys-{}.json", std::process::id()));
    std::fs::write(&path, r#"{"system": "full_shift", "k": 3}"#).unwrap();
    let o = run(&["sys-propagation", "--system-file", path.to_str().unwrap(), "--T", "4"]);
    std::fs::remove_file(&path).unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("4,4,5"));
}

#[test]
fn bad_thread_count_is_rejected() {
    let o = Command::new(env!("CARGO_BIN_EXE_symdyn"))
        .args(["cex-propagation", "--T", "2"])
        .env("SYMDYN_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
