use std::path::Path;
use std::process::{Command, Output};

use nalgebra::Matrix3;
use serde_json::Value;

use obsreg::io::observation::{save_observation, ObservationFile};
use obsreg::io::snapshot::load_snapshot;
use obsreg::observers::Boundary;
use obsreg::{NodalData, Observation};

fn obsreg(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_obsreg"))
        .args(args)
        .current_dir(dir)
        .env_remove("OBSREG_OUT")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, initial: &str) {
    let text = format!(
        r#"
        output_dir = "out"
        [torus]
        n_spec = 8
        [solver]
        nu = 0.1
        dt = 0.05
        t_end = 0.2
        snapshot_every = 2
        [initial]
        {initial}
        [observer]
        kind = "nodal"
        n_cubes = 4
        "#
    );
    std::fs::write(dir.join("c.toml"), text).unwrap();
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_zero_data_writes_zero_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "kind = \"zero\"");
    let out = obsreg(&["simulate", "--config", "c.toml"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let snaps = dir.path().join("out/snapshots");
    let index = std::fs::read_to_string(snaps.join("index.csv")).unwrap();
    assert_eq!(index.lines().count(), 1 + 3);
    for i in 0..3 {
        let s = load_snapshot(&snaps.join(format!("snap_{i:05}.bin"))).unwrap();
        assert!(s.field.coeffs().iter().flatten().all(|c| c.norm() == 0.0));
    }
}

#[test]
fn monitor_on_zero_flow_is_satisfied() {
    // L = 2π gives λ₁ = 1; with ν = 0.1 only the viscous term survives.
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "kind = \"zero\"");
    let out = obsreg(&["monitor", "--config", "c.toml", "--h", "0.5", "--c", "1"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("satisfied: true"));
    let report = json(&dir.path().join("out/monitor.json"));
    assert_eq!(report["satisfied"], Value::Bool(true));
    assert_eq!(report["lambda1"].as_f64(), Some(1.0));
    // 2π / 0.5 ≈ 12.57 cubes, rounded to 13
    let h = report["h"].as_f64().unwrap();
    assert!((h - 2.0 * std::f64::consts::PI / 13.0).abs() < 1e-15);
    assert!((report["threshold"].as_f64().unwrap() - 0.1 / (h * h)).abs() < 1e-12);
    assert_eq!(report["terms"]["data"].as_f64(), Some(0.0));
    let series = std::fs::read_to_string(dir.path().join("out/mh_series.csv")).unwrap();
    assert!(series.starts_with("t,mh_sq\n"));
}

#[test]
fn monitor_with_large_h_is_not_satisfied() {
    // h² = (2π/2)² > 1/(c λ₁) = 1
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "kind = \"zero\"");
    let out = obsreg(&["monitor", "--config", "c.toml", "--h", "3.2"], dir.path());
    assert!(out.status.success());
    assert_eq!(json(&dir.path().join("out/monitor.json"))["satisfied"], Value::Bool(false));
}

#[test]
fn interpolate_linear_file_reports_exact_gradient_norm() {
    let dir = tempfile::tempdir().unwrap();
    let (n, length) = (4, 2.0);
    let g = Matrix3::new(1.0, 2.0, -0.5, 0.0, 0.3, 1.5, -2.0, 0.25, 0.75);
    let nodal = NodalData::from_fn(n, length, Boundary::Open, |x| {
        [0, 1, 2].map(|l| (0..3).map(|j| g[(l, j)] * x[j]).sum::<f64>())
    })
    .unwrap();
    let obs_dir = dir.path().join("out/observations");
    save_observation(
        &obs_dir.join("obs_00000.json"),
        &ObservationFile {
            t: 0.0,
            observation: Observation::Nodal(nodal),
        },
    )
    .unwrap();
    let out = obsreg(&["interpolate", "--out", "out"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = json(&dir.path().join("out/interpolate.json"));
    let exact = rows[0]["exact"].as_f64().unwrap();
    let want = length.powi(3) * g.norm_squared();
    assert!((exact * exact - want).abs() < 1e-12 * want, "{} vs {want}", exact * exact);
    let lower = rows[0]["lower"].as_f64().unwrap();
    let upper = rows[0]["upper"].as_f64().unwrap();
    assert!(lower <= exact * (1.0 + 1e-12) && exact <= upper * (1.0 + 1e-12));
    let csv = std::fs::read_to_string(dir.path().join("out/interpolate.csv")).unwrap();
    assert!(csv.starts_with("t,exact,data,lower,upper,max_face_jump\n"));
}

#[test]
fn interpolate_rejects_modal_files() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "kind = \"random\"\namplitude = 0.1\nseed = 3");
    assert!(obsreg(&["simulate", "--config", "c.toml"], dir.path()).status.success());
    assert!(obsreg(&["observe", "--config", "c.toml", "--N", "10"], dir.path()).status.success());
    let out = obsreg(&["interpolate"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nodal"));
}

#[test]
fn repeated_pipelines_are_byte_identical() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        write_config(dir.path(), "kind = \"random\"\namplitude = 0.3\nseed = 11");
        for args in [
            &["simulate", "--config", "c.toml"][..],
            &["observe", "--config", "c.toml"],
            &["interpolate"],
            &["monitor", "--config", "c.toml", "--t0", "0.1"],
            &["nudge", "--config", "c.toml", "--mu", "2"],
            &["report", "--config", "c.toml"],
        ] {
            let out = obsreg(args, dir.path());
            assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        }
        let mut files = Vec::new();
        for name in [
            "snapshots/snap_00002.bin",
            "observations/obs_00001.json",
            "interpolate.json",
            "monitor.json",
            "mh_series.csv",
            "nudge.json",
            "sync.csv",
            "report/energy.csv",
            "report/mh_sweep.csv",
        ] {
            files.push(std::fs::read(dir.path().join("out").join(name)).unwrap());
        }
        files
    };
    assert_eq!(run(), run());
}

#[test]
fn late_start_uses_characterization_variant() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "kind = \"zero\"");
    assert!(obsreg(&["monitor", "--config", "c.toml", "--t0", "0.1"], dir.path()).status.success());
    let report = json(&dir.path().join("out/monitor.json"));
    assert_eq!(report["variant"], "characterization");
    assert_eq!(report["t0"].as_f64(), Some(0.1));
}

#[test]
fn out_env_overrides_config_dir() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "kind = \"zero\"");
    let out = Command::new(env!("CARGO_BIN_EXE_obsreg"))
        .args(["simulate", "--config", "c.toml"])
        .current_dir(dir.path())
        .env("OBSREG_OUT", "elsewhere")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("elsewhere/snapshots/index.csv").exists());
    assert!(!dir.path().join("out").exists());
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "kind = \"zero\"");
    for args in [
        &["simulate", "--config", "c.toml", "--bogus"][..],
        &["frobnicate"],
        &[],
        &["monitor"],
        &["monitor", "--config", "c.toml", "--h", "0.5", "--N", "4"],
        &["nudge", "--config", "c.toml", "--mu", "fast"],
    ] {
        let out = obsreg(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.starts_with("error:") || err.contains("Usage:"), "{args:?}");
    }
    assert_eq!(obsreg(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn domain_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "kind = \"zero\"");
    std::fs::write(dir.path().join("bad.toml"), "[torus]\nn_spec = 8\n").unwrap();
    for args in [
        &["simulate", "--config", "missing.toml"][..],
        &["simulate", "--config", "bad.toml"],
        &["observe", "--config", "c.toml"],
        &["monitor", "--config", "c.toml", "--N", "100000"],
        &["monitor", "--config", "c.toml", "--t0", "5"],
        &["nudge", "--config", "c.toml", "--mu=-1"],
    ] {
        let out = obsreg(args, dir.path());
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"), "{args:?}");
    }
}

#[test]
fn nudge_and_report_outputs() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "kind = \"beltrami\"\namplitude = 0.5\nwavenumber = 1");
    let out = obsreg(&["nudge", "--config", "c.toml", "--N", "26"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(&dir.path().join("out/nudge.json"));
    assert_eq!(summary["mu_source"], "default");
    assert_eq!(summary["observer"]["kind"], "modal");
    let sync = std::fs::read_to_string(dir.path().join("out/sync.csv")).unwrap();
    assert!(sync.starts_with("t,l2_error,h1_error\n"));
    assert_eq!(sync.lines().count(), 1 + 3);

    assert!(obsreg(&["report", "--config", "c.toml"], dir.path()).status.success());
    let energy = std::fs::read_to_string(dir.path().join("out/report/energy.csv")).unwrap();
    assert!(energy.starts_with("t,energy,enstrophy\n"));
    let sweep = std::fs::read_to_string(dir.path().join("out/report/mh_sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 1 + 4);
}
