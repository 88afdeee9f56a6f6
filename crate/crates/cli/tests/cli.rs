use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const MODEL: &str = "[model]\nc_in = \"1 pF\"\nc_ds3 = \"1 pF\"\ng_m1 = \"10 mS\"\ng_m2 = \"60 mS\"\n";

const NOISE: &str = r#"
[[device.noise]]
freq = "1.0 GHz"
nf_min_db = 0.01
r_n = 0.04
gamma_opt_mag = 0.35
gamma_opt_deg = 20.0

[[device.noise]]
freq = "2.0 GHz"
nf_min_db = 0.012
r_n = 0.05
gamma_opt_mag = 0.31
gamma_opt_deg = 50.0
"#;

fn lnakit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lnakit")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p
}

fn run(dir: &TempDir, cfg: &Path, out: &str, args: &[&str]) -> Output {
    let out = dir.path().join(out);
    let mut all = vec!["--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()];
    all.extend_from_slice(args);
    lnakit(&all)
}

fn table(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn convert_reproduces_noise_temperatures() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = lnakit(&["convert", "--nf-db", "0.009,0.012,0.028", "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = table(&out.join("convert.csv"));
    let t: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    for (got, want) in t.iter().zip([0.602, 0.802, 1.876]) {
        assert!((got - want).abs() < 0.01, "{got} vs {want}");
    }
}

#[test]
fn missing_coupling_capacitor_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "[model]\nc_ds3 = \"1 pF\"\n");
    let o = run(&dir, &cfg, "out", &["quantum-sweep"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("model.c_in"), "{}", stderr(&o));
}

#[test]
fn wrong_unit_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "[model]\nc_in = \"1 nH\"\nc_ds3 = \"1 pF\"\n");
    let o = run(&dir, &cfg, "out", &["quantum-sweep"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("model.c_in"));
}

#[test]
fn infeasible_start_is_a_numerical_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &format!("{NOISE}\n[optimizer]\nstart = [1.5, 0.0]\n"));
    let o = run(&dir, &cfg, "out", &["optimize"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn io_failures_exit_with_three() {
    let dir = TempDir::new().unwrap();
    let o = lnakit(&["convert", "--config", dir.path().join("absent.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));

    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = lnakit(&["convert", "--nf-db", "0.01", "--out-dir", blocker.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));

    let cfg = write_config(dir.path(), "[device]\ntouchstone = \"missing.s2p\"\n");
    let o = run(&dir, &cfg, "out", &["nf-map"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bad_flag_is_a_validation_error() {
    assert_eq!(lnakit(&["convert", "--variant", "other"]).status.code(), Some(1));
    assert_eq!(lnakit(&["--help"]).status.code(), Some(0));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let text = format!("{MODEL}{NOISE}\n[analysis]\naverages = 16\n[sweep]\ng_m1 = {{ start = \"1 mS\", stop = \"100 mS\", points = 5 }}\n[nf_map]\npoints = 11\n[band]\npoints = 11\n");
    let cfg = write_config(dir.path(), &text);
    for cmd in ["quantum-sweep", "nf-map", "stability", "two-tone", "snr-sim", "optimize"] {
        for fmt in ["csv", "json"] {
            run(&dir, &cfg, "a", &[cmd, "--format", fmt, "--seed", "11"]);
            run(&dir, &cfg, "b", &[cmd, "--format", fmt, "--seed", "11"]);
        }
    }
    let mut names: Vec<_> = fs::read_dir(dir.path().join("a")).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 13);
    for n in names {
        let a = fs::read(dir.path().join("a").join(&n)).unwrap();
        let b = fs::read(dir.path().join("b").join(&n)).unwrap();
        assert!(a == b, "{n:?} differs between runs");
    }
}

#[test]
fn seed_changes_simulation_and_is_embedded() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "[analysis]\naverages = 16\n");
    run(&dir, &cfg, "a", &["snr-sim", "--seed", "1"]);
    run(&dir, &cfg, "b", &["snr-sim", "--seed", "2"]);
    let a = fs::read_to_string(dir.path().join("a/snr-sim.csv")).unwrap();
    let b = fs::read_to_string(dir.path().join("b/snr-sim.csv")).unwrap();
    assert!(a.contains("# seed: 1\n") && b.contains("# seed: 2\n"));
    assert_ne!(table(&dir.path().join("a/snr-sim.csv")), table(&dir.path().join("b/snr-sim.csv")));
}

#[test]
fn artifacts_rerun_from_their_embedded_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &format!("{NOISE}\n[analysis]\naverages = 16\nseed = 5\n"));
    for (cmd, fmt) in [("snr-sim", "json"), ("optimize", "csv"), ("optimize", "json")] {
        assert!(run(&dir, &cfg, "a", &[cmd, "--format", fmt]).status.success());
        let artifact = dir.path().join("a").join(format!("{cmd}.{fmt}"));
        let o = run(&dir, &artifact, "b", &[cmd, "--format", fmt]);
        assert!(o.status.success(), "{}", stderr(&o));
        let a = fs::read(&artifact).unwrap();
        let b = fs::read(dir.path().join("b").join(format!("{cmd}.{fmt}"))).unwrap();
        assert!(a == b, "{cmd}.{fmt} differs after rerun from artifact");
    }
}

fn argmax(dir: &TempDir, extra: &str) -> (f64, f64) {
    let cfg = write_config(dir.path(), &format!("{MODEL}{extra}"));
    let o = run(dir, &cfg, "q", &["quantum-sweep", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("q/quantum-sweep.json")).unwrap()).unwrap();
    let a = &v["result"]["argmax"];
    (a["g_m1"].as_f64().unwrap(), a["g_m2"].as_f64().unwrap())
}

#[test]
fn quantum_sweep_reports_the_argmax() {
    let dir = TempDir::new().unwrap();
    // The default impedance rule puts the maximum at the low corner of both
    // transconductances; the inductive-reactance rule moves it to
    // (min g_m1, max g_m2).
    assert_eq!(argmax(&dir, ""), (0.001, 0.001));
    let rule = "[oscillators]\nimpedance_rule = \"inductive-reactance\"\nrule_freq = \"1.6 GHz\"\n";
    assert_eq!(argmax(&dir, rule), (0.001, 0.1));
}

#[test]
fn stability_touchstone_round_trips_through_the_device_path() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &format!("{MODEL}[band]\npoints = 21\n"));
    assert!(run(&dir, &cfg, "a", &["stability"]).status.success());
    let text = format!("{MODEL}[band]\npoints = 21\n[device]\ntouchstone = \"a/stability.s2p\"\n[stability]\nsource = \"touchstone\"\n");
    let cfg = write_config(dir.path(), &text);
    let o = run(&dir, &cfg, "b", &["stability"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(table(&dir.path().join("a/stability.csv")), table(&dir.path().join("b/stability.csv")));
}

#[test]
fn shipped_reference_config_loads() {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reference.toml");
    let dir = TempDir::new().unwrap();
    for cmd in ["quantum-sweep", "two-tone", "convert"] {
        let o = run(&dir, &cfg, "out", &[cmd]);
        assert!(o.status.success(), "{cmd}: {}", stderr(&o));
    }
}
