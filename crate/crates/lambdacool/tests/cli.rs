//! End-to-end checks of the `lambdacool` binary: exit codes, output layout
//! and reproducibility.

use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_lambdacool");

fn run(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args);
    match threads {
        Some(n) => cmd.env("LAMBDACOOL_THREADS", n),
        None => cmd.env_remove("LAMBDACOOL_THREADS"),
    };
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

fn data_lines(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

const MINIMAL: &str = r#"
schema = 1
scheme = "eit_feedback"

[mech]
omega_m_hz = 300e3
quality_factor = 5e7
g0_hz = 200.0
bath_temperature_k = 300.0

[cavity_m]
kappa_hz = 240e3
input_power_w = 200e-9

[cavity_a]
kappa_hz = 70e6
kappa_in_hz = 70e6

[eit]
n_atoms = 1e8
rabi_control_gamma_e = 6.0
rabi_single_atom_hz = 100e3
delta_a_gamma_e = 500.0

[sweep]
observable = "cooling"

[sweep.axis1]
path = "cavity_m.detuning_hz"
start = -600e3
stop = 600e3
n_points = 25
"#;

#[test]
fn repeated_runs_differ_only_in_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for (p, threads) in [(&a, "1"), (&b, "3")] {
        let o = run(&["chi-rir", "--points", "41", "-o", p.to_str().unwrap()], Some(threads));
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let (a, b) = (read(&a), read(&b));
    let strip = |s: &str| s.lines().filter(|l| !l.starts_with("# timestamp=")).map(str::to_string).collect::<Vec<_>>();
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(a.lines().count(), b.lines().count());
}

#[test]
fn csv_layout_and_row_hashes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cool.csv");
    let o = run(&["cool", "--no-series", "--points", "11", "--mech.omega_m_hz", "310e3", "-o", out.to_str().unwrap()], None);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = read(&out);
    assert!(text.starts_with("# lambdacool_version="));
    assert!(text.contains("\n# param.mech.omega_m_hz=310000.0\n"));
    assert!(text.contains("\n# assumption.g_convention="));
    let rows = data_lines(&text);
    assert!(rows[0].starts_with("param_hash,status,cavity_m.detuning_hz,"));
    assert_eq!(rows.len(), 12);
    for r in &rows[1..] {
        let hash = r.split(',').next().unwrap();
        assert_eq!(hash.len(), 16);
        assert!(hash.chars().all(|c| c.is_ascii_hexdigit()));
    }
}

#[test]
fn sweep_from_config_file_and_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, MINIMAL).unwrap();
    let out = dir.path().join("out/sweep.csv");
    let o = run(&["sweep", "-c", cfg.to_str().unwrap(), "-o", out.to_str().unwrap(), "--plot-script"], None);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(data_lines(&read(&out)).len(), 26);
    let script = read(&dir.path().join("out/sweep.csv.plot.py"));
    assert!(script.contains("matplotlib"));
}

#[test]
fn unknown_key_in_file_is_exit_2_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, MINIMAL.replace("g0_hz = 200.0", "g0_hz = 200.0\ng0_khz = 0.2")).unwrap();
    let o = run(&["sweep", "-c", cfg.to_str().unwrap()], None);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("g0_khz"), "{}", stderr(&o));
}

#[test]
fn wrong_schema_and_invalid_values_are_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("v2.toml");
    std::fs::write(&cfg, MINIMAL.replace("schema = 1", "schema = 2")).unwrap();
    assert_eq!(code(&run(&["sweep", "-c", cfg.to_str().unwrap()], None)), 2);
    let o = run(&["cool", "--at", "-3e5", "--no-series", "--cavity_m.kappa_in_hz", "1e9"], None);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("kappa_in"), "{}", stderr(&o));
    assert_eq!(code(&run(&["cool", "--at", "-3e5"], Some("zero"))), 2);
    assert_eq!(code(&run(&["reproduce", "fig7"], None)), 2);
}

#[test]
fn numerical_failure_is_exit_3_with_table_written() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("overflow.csv");
    let o = run(&["chi-eit", "--at", "0", "--no-series", "--eit.rabi_single_atom_hz", "1e160", "-o", out.to_str().unwrap()], None);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let text = read(&out);
    assert!(data_lines(&text)[1].contains(",non_finite,"));
}

#[test]
fn reproduce_writes_table_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["reproduce", "fig10", "--out-dir", dir.path().to_str().unwrap(), "--plot-script"], None);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let meta: toml::Table = read(&dir.path().join("fig10.meta.toml")).parse().unwrap();
    assert_eq!(meta["figure"].as_str(), Some("fig10"));
    assert_eq!(meta["rows"].as_integer(), Some(61));
    assert!(meta["config"]["mech"].is_table());
    assert!(dir.path().join("fig10.csv.plot.py").exists());
    assert_eq!(data_lines(&read(&dir.path().join("fig10.csv"))).len(), 62);
}

#[test]
fn oracle_check_reports_per_point() {
    let o = run(&["oracle-check", "--points", "2"], None);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = String::from_utf8_lossy(&o.stdout);
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS ")).count(), 4);
    assert_eq!(code(&run(&["oracle-check", "--points", "1", "--tolerance", "1e-15"], None)), 4);
    assert_eq!(code(&run(&["oracle-check", "--points", "1", "--mech.q", "1"], None)), 2);
}
