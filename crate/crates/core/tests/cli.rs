use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn dmm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dmm")).args(args).output().expect("binary runs")
}

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("darkmode-cli-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn multiround_writes_csv_and_manifest() {
    let d = scratch("multiround");
    let out = d.join("out");
    let o = dmm(&["--scenario", "multiround", "--out", out.to_str().unwrap(), "--threads", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("multiround.csv")).unwrap();
    assert!(csv.starts_with("p_success,t_attempt_us,t_reset_us,mean_attempts,mean_wait_us,rate_khz\n"));
    let manifest = std::fs::read_to_string(out.join("manifest.toml")).unwrap();
    assert!(manifest.contains("scenario = \"multiround\""));
    assert!(manifest.contains("threads = 2"));
    let _ = std::fs::remove_dir_all(&d);
}

#[test]
fn flags_override_config_file() {
    let d = scratch("override");
    let cfg = write(&d, "c.toml", "scenario = \"dual-rail\"\n[multiround]\nt_attempt = 10.0\n");
    let out = d.join("out");
    let o = dmm(&["--config", &cfg, "--scenario", "multiround", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("multiround.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().contains(",10,"), "{csv}");
    assert!(!out.join("dual_rail.csv").exists());
    let _ = std::fs::remove_dir_all(&d);
}

#[test]
fn unknown_config_key_exits_2() {
    let d = scratch("unknown");
    let cfg = write(&d, "c.toml", "scenario = \"multiround\"\n[system]\ng_hz = 1.0\n");
    assert_eq!(dmm(&["--config", &cfg]).status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&d);
}

#[test]
fn sampling_scenario_without_seed_exits_2() {
    let o = dmm(&["--scenario", "tomo-demo"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
}

#[test]
fn unknown_scenario_and_zero_threads_exit_2() {
    assert_eq!(dmm(&["--scenario", "nonsense"]).status.code(), Some(2));
    assert_eq!(dmm(&["--scenario", "multiround", "--threads", "0"]).status.code(), Some(2));
}

#[test]
fn inadequate_truncation_exits_3() {
    let d = scratch("truncation");
    let cfg = write(&d, "c.toml", "scenario = \"entangle\"\n[protocol]\ncavity_dim = 3\n");
    let out = d.join("out");
    assert_eq!(dmm(&["--config", &cfg, "--out", out.to_str().unwrap()]).status.code(), Some(3));
    let _ = std::fs::remove_dir_all(&d);
}

#[test]
fn seeded_reruns_are_byte_identical() {
    let d = scratch("rerun");
    let run = |tag: &str, seed: &str| {
        let out = d.join(tag);
        let o = dmm(&["--scenario", "tomo-demo", "--seed", seed, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        (std::fs::read(out.join("wigner.csv")).unwrap(), std::fs::read(out.join("tomography.csv")).unwrap())
    };
    let a = run("a", "5");
    assert_eq!(a, run("b", "5"));
    assert_ne!(a.0, run("c", "6").0);
    let _ = std::fs::remove_dir_all(&d);
}
