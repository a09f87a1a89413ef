use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn hwlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hwlab")).args(args).env_remove("HWLAB_OUT").output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hwlab-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn help_lists_subcommands() {
    let o = hwlab(&["--help"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    for cmd in ["groundstate", "scan", "evolve", "stability", "check", "replay"] {
        assert!(text.contains(cmd), "{cmd}");
    }
}

#[test]
fn malformed_config_exits_with_2() {
    let dir = scratch("malformed");
    let bad = write(&dir, "bad.toml", "[model\nq = ");
    let o = hwlab(&["--config", &bad, "--out", dir.to_str().unwrap(), "groundstate"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let unknown = write(&dir, "unknown.toml", "[model]\nqq = 1.5\n");
    let o = hwlab(&["--config", &unknown, "--out", dir.to_str().unwrap(), "groundstate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("qq"), "{}", stderr(&o));

    let o = hwlab(&["--config", dir.join("absent.toml").to_str().unwrap(), "groundstate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_parameters_exit_with_2() {
    let dir = scratch("params");
    let out = dir.to_str().unwrap();
    for args in [
        vec!["--out", out, "--q", "2.6", "groundstate"],
        vec!["--out", out, "--p", "3.5", "groundstate"],
        vec!["--out", out, "--v", "1.2", "groundstate"],
        vec!["--out", out, "evolve", "--scheme", "rk4"],
    ] {
        let o = hwlab(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn evolve_refuses_two_dimensions() {
    let dir = scratch("evolve2d");
    let o = hwlab(&[
        "--out",
        dir.to_str().unwrap(),
        "--dim",
        "2",
        "--q",
        "1.2",
        "--p",
        "1.8",
        "--n",
        "32",
        "evolve",
        "--initial",
        "gaussian",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("one dimension"), "{}", stderr(&o));
}

#[test]
fn stability_refuses_subcritical_mass() {
    let dir = scratch("stab");
    let o = hwlab(&["--out", dir.to_str().unwrap(), "stability", "--rho", "1.0", "--rho0-bracket", "2.5,3.0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("critical-mass bracket"), "{}", stderr(&o));
}

#[test]
fn groundstate_outputs_and_replay() {
    let dir = scratch("gs");
    let out = dir.to_str().unwrap();
    let o = hwlab(&["--out", out, "--n", "256", "--len", "40", "groundstate", "--rho", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let gs = dir.join("groundstate");
    for f in ["groundstate.hwf", "groundstate.json", "certificate.json", "groundstate.csv", "manifest.json", "timing.json"] {
        assert!(gs.join(f).exists(), "{f}");
    }
    let first = std::fs::read(gs.join("groundstate.hwf")).unwrap();
    let manifest = std::fs::read(gs.join("manifest.json")).unwrap();

    let again = scratch("gs-replay");
    let o = hwlab(&["--out", again.to_str().unwrap(), "replay", gs.join("manifest.json").to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read(again.join("groundstate/groundstate.hwf")).unwrap(), first);
    assert_eq!(std::fs::read(again.join("groundstate/manifest.json")).unwrap(), manifest);
}

#[test]
fn evolve_writes_invariants() {
    let dir = scratch("evolve");
    let o = hwlab(&[
        "--out",
        dir.to_str().unwrap(),
        "--n",
        "256",
        "--len",
        "40",
        "evolve",
        "--initial",
        "gaussian",
        "--rho",
        "2",
        "--t-final",
        "0.5",
        "--dt",
        "0.01",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.join("evolve/invariants.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,mass,energy,momentum,Ev"));
    assert_eq!(lines.count(), 2);
    assert!(dir.join("evolve/snapshots/snap_000001.hwf").exists());
    assert!(dir.join("evolve/final.csv").exists());
}

#[test]
fn failing_check_exits_with_4() {
    let dir = scratch("check");
    // certification on a coarse 256-point grid cannot resolve the profile
    let cfg = write(
        &dir,
        "check.toml",
        "[model]\nn = 256\nlen = 40.0\n[check]\ncertify_n = 256\ncertify_len = 40.0\nscan_rhos = [0.5, 4.0]\nt_final = 0.1\n",
    );
    let o = hwlab(&["--config", &cfg, "--out", dir.to_str().unwrap(), "check"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.contains("FAIL") && table.contains("PASS"));
    assert!(dir.join("check/check.json").exists());
}
