use std::path::Path;
use std::process::{Command, Output};

fn slz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slz")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn small_batch_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("cfg.json");
    std::fs::write(
        &path,
        r#"{
  "episodes": 2,
  "base_seed": 5,
  "world": {"kind": "generate", "width_m": 256, "height_m": 256, "meters_per_cell": 0.5},
  "defaults": {"max_time": 150}
}"#,
    )
    .unwrap();
    path
}

#[test]
fn usage_errors_exit_with_1() {
    let out = slz(&["run", "--focus", "maybe"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("maybe"));

    let out = slz(&["batch", "--no-such-flag"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    assert_eq!(code(&slz(&[])), 1);
    assert_eq!(code(&slz(&["--help"])), 0);
}

#[test]
fn bad_config_exits_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"episodes": 0}"#).unwrap();
    let out = slz(&["batch", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stderr));

    std::fs::write(&cfg, "{not json").unwrap();
    assert_eq!(code(&slz(&["batch", "--config", cfg.to_str().unwrap()])), 1);

    assert_eq!(code(&slz(&["run", "--backend", "remote"])), 1);
}

#[test]
fn run_on_demo_world_writes_a_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = slz(&["run", "--seed", "1", "--focus", "on", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let traj = std::fs::read_to_string(out_dir.join("focus_1.csv")).unwrap();
    assert!(traj.starts_with("t,x,y,z,vx,vy,vz,state,r_focus,best_u,best_v,score\n"));
    assert!(traj.lines().count() > 1);
}

#[test]
fn debug_frames_are_dumped() {
    let dir = tempfile::tempdir().unwrap();
    let world = dir.path().join("w");
    let made = slz(&["gen-world", "--seed", "3", "--width-m", "200", "--height-m", "200", "--meters-per-cell", "0.5", "--out", world.to_str().unwrap()]);
    assert_eq!(code(&made), 0, "{}", String::from_utf8_lossy(&made.stderr));
    assert!(world.with_extension("png").exists() && world.with_extension("json").exists());

    let out_dir = dir.path().join("run");
    let out = slz(&[
        "run",
        "--world",
        world.to_str().unwrap(),
        "--focus",
        "off",
        "--dump-debug-frames",
        "50",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("no_focus_1.csv").exists());
    for kind in ["raw", "avg", "mask", "dist", "cand"] {
        assert!(out_dir.join(format!("debug/frame_00000_{kind}.png")).exists(), "{kind}");
    }
}

#[test]
fn unreachable_remote_backend_is_a_runtime_error() {
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let dir = tempfile::tempdir().unwrap();
    let url = format!("http://127.0.0.1:{port}");
    let out = slz(&["run", "--backend", "remote", "--backend-url", &url, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn batch_is_reproducible_and_report_matches_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_batch_config(dir.path());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out_dir in [&a, &b] {
        let out = slz(&["batch", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--jobs", "2"]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["metrics.csv", "summary.json"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
    let metrics = std::fs::read_to_string(a.join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 1 + 2 * 2);
    assert!(a.join("trajectories/focus_5.csv").exists());

    let summary = a.join("again.json");
    let out = slz(&["report", a.join("metrics.csv").to_str().unwrap(), "--out", summary.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read(&summary).unwrap(), std::fs::read(a.join("summary.json")).unwrap());
}

#[test]
fn batch_flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_batch_config(dir.path());
    let out_dir = dir.path().join("o");
    let out = slz(&[
        "batch",
        "--config",
        cfg.to_str().unwrap(),
        "--episodes",
        "1",
        "--seed",
        "9",
        "--focus",
        "on",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let metrics = std::fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    let rows: Vec<&str> = metrics.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("focus,9,"));
}

#[test]
fn report_on_missing_file_is_a_runtime_error() {
    let out = slz(&["report", "/nonexistent/metrics.csv"]);
    assert_ne!(code(&out), 0);
}
