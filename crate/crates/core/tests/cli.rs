use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL: &str = "p_max = 1\nomega_min = -600\nomega_max = 600\nomega_points = 121\n";

fn qdcavity(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdcavity"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn with_config(text: &str) -> TempDir {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("run.cfg"), text).unwrap();
    dir
}

fn run(dir: &TempDir, sub: &str, out: &str) -> Output {
    qdcavity(dir.path(), &[sub, "--config", "run.cfg", "--out", out, "--workers", "2"])
}

#[test]
fn negative_exchange_energy_exits_with_config_error() {
    let dir = with_config("# header\np_max = 1\nJ_ee = -1\n");
    let out = run(&dir, "spectrum", "out");
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 3"), "{stderr}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_key_exits_with_config_error() {
    let dir = with_config("two_hbar_gg = 210\n");
    let out = run(&dir, "spectrum", "out");
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("two_hbar_gg"));
}

#[test]
fn missing_config_file_exits_with_config_error() {
    let dir = TempDir::new().unwrap();
    let out = qdcavity(dir.path(), &["spectrum", "--config", "absent.cfg"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn spectrum_writes_channels_and_manifest() {
    let dir = with_config(&format!("{SMALL}channels = cav, spon\n"));
    let out = run(&dir, "spectrum", "out");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/spectrum_cav.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("omega_ueV,lambda_nm,intensity"));
    assert_eq!(lines.count(), 121);
    assert!(dir.path().join("out/spectrum_spon.csv").exists());
    let manifest = fs::read_to_string(dir.path().join("out/manifest.txt")).unwrap();
    for key in ["two_hbar_g", "convergence_delta", "wall_clock_s"] {
        assert!(manifest.lines().any(|l| l.starts_with(key)), "missing {key}");
    }
}

#[test]
fn identical_runs_give_identical_csv() {
    let cfg = format!(
        "{SMALL}overhauser_mode = monte_carlo\noverhauser_samples = 3\nseed = 7\nsweep_parameter = delta_omega_BX\nsweep_values = 0, 100\n"
    );
    let dir = with_config(&cfg);
    assert!(run(&dir, "overhauser", "a").status.success());
    assert!(run(&dir, "overhauser", "b").status.success());
    for f in ["overhauser_on.csv", "overhauser_off.csv", "overhauser_dx.csv"] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs");
    }
}

#[test]
fn seed_flag_changes_monte_carlo_average() {
    let cfg = format!("{SMALL}overhauser_mode = monte_carlo\noverhauser_samples = 2\nsweep_parameter = delta_omega_BX\nsweep_values = 0\n");
    let dir = with_config(&cfg);
    let base = ["overhauser", "--config", "run.cfg"];
    assert!(qdcavity(dir.path(), &[&base[..], &["--out", "a", "--seed", "1"]].concat()).status.success());
    assert!(qdcavity(dir.path(), &[&base[..], &["--out", "b", "--seed", "2"]].concat()).status.success());
    let a = fs::read(dir.path().join("a/overhauser_on.csv")).unwrap();
    let b = fs::read(dir.path().join("b/overhauser_on.csv")).unwrap();
    assert_ne!(a, b);
}

fn sorted_rows(path: &Path) -> Vec<String> {
    let mut rows: Vec<String> = fs::read_to_string(path).unwrap().lines().skip(1).map(String::from).collect();
    rows.sort();
    rows
}

#[test]
fn sweep_order_does_not_change_rows() {
    let ordered = with_config(&format!("{SMALL}sweep_parameter = delta_omega_BX\nsweep_values = -200, 0, 150\n"));
    let shuffled = with_config(&format!("{SMALL}sweep_parameter = delta_omega_BX\nsweep_values = 150, -200, 0\n"));
    assert!(run(&ordered, "sweep-detuning", "out").status.success());
    assert!(run(&shuffled, "sweep-detuning", "out").status.success());
    for f in ["detuning_phase0_cav.csv", "detuning_phase30_total.csv"] {
        assert_eq!(sorted_rows(&ordered.path().join("out").join(f)), sorted_rows(&shuffled.path().join("out").join(f)), "{f}");
    }
}

#[test]
fn zero_injection_gives_zero_spectra() {
    let dir = with_config(&format!("{SMALL}two_hbar_P = 0\nchannels = cav, total\n"));
    let out = run(&dir, "spectrum", "out");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["spectrum_cav.csv", "spectrum_total.csv"] {
        let csv = fs::read_to_string(dir.path().join("out").join(f)).unwrap();
        for row in csv.lines().skip(1) {
            let v: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
            assert_eq!(v, 0.0, "{f}: {row}");
        }
    }
}

#[test]
fn mismatched_sweep_parameter_is_a_config_error() {
    let dir = with_config(&format!("{SMALL}sweep_parameter = two_hbar_P\nsweep_values = 33\n"));
    assert_eq!(run(&dir, "sweep-detuning", "out").status.code(), Some(1));
}
