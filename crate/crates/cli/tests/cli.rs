use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bec_probe::acceptance::AcceptanceOptions;
use bec_probe::propagate::analytic_gamma_bar;
use bec_probe_cli::config::{config_hash, plan};
use bec_probe_cli::{verify, CliError};

const MINIMAL: &str = r#"
[model]
chi = 1.0

[oscillator]
kind = "coherent"
alpha = 3.0

[[channel]]
kind = "one_body"
rate = 0.005
"#;

const SWEEP: &str = r#"
[model]
chi = 1.0

[oscillator]
kind = "coherent"
alpha = 3.0

[[channel]]
kind = "one_body"
rate = 0.0

[sweep]
axis = "gamma"
values = [0.0, 0.002, 0.005, 0.01]
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bec-probe"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn minimal_run_matches_analytic_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "min.toml", MINIMAL);
    let out = dir.path().join("out");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("Gamma_bar measured"));

    let csv = fs::read_to_string(out.join("probe.csv")).unwrap();
    assert!(csv.contains(&format!("# config_hash: {}", config_hash(MINIMAL.as_bytes()))));
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "delta,p_e");
    assert_eq!(data_rows(&csv).len(), 16);
    let measured: f64 = csv.lines().find_map(|l| l.strip_prefix("# gamma_bar_measured: ")).unwrap().parse().unwrap();
    assert!((measured - 0.283).abs() <= 0.03 * 0.283);
}

#[test]
fn gamma_sweep_summary_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sweep.toml", SWEEP);
    let out = dir.path().join("out");
    let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(out.join("probe_summary.csv")).unwrap();
    let header = summary.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(
        header,
        "axis_value,visibility,gamma_bar_measured,gamma_bar_analytic,rel_error,disentanglement_fidelity,n_max,config_hash"
    );
    let rows = data_rows(&summary);
    assert_eq!(rows.len(), 4);
    let hash = config_hash(SWEEP.as_bytes());
    let gammas: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    for w in gammas.windows(2) {
        assert!(w[1] >= w[0]);
    }
    for r in &rows {
        assert_eq!(r[7], hash);
        assert_eq!(r[6], "38");
    }
    for i in 0..4 {
        assert!(out.join(format!("probe_gamma_{i:03}.csv")).exists());
    }
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sweep.toml", SWEEP);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert!(run(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]).status.success());
    }
    for name in ["probe_summary.csv", "probe_gamma_000.csv", "probe_gamma_003.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap());
    }
}

#[test]
fn negative_rate_is_a_validation_error_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", &MINIMAL.replace("rate = 0.005", "rate = -0.005"));
    let out = dir.path().join("out");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!out.exists());
}

#[test]
fn error_classes_have_distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();

    let garbled = write_config(dir.path(), "garbled.toml", "[model\nchi = ");
    assert_eq!(run(&["run", "--config", garbled.to_str().unwrap(), "--out", out_s]).status.code(), Some(2));

    let unknown = write_config(dir.path(), "unknown.toml", &format!("{MINIMAL}\n[extra]\nx = 1\n"));
    assert_eq!(run(&["run", "--config", unknown.to_str().unwrap(), "--out", out_s]).status.code(), Some(2));

    let plain = write_config(dir.path(), "plain.toml", MINIMAL);
    assert_eq!(run(&["sweep", "--config", plain.to_str().unwrap(), "--out", out_s]).status.code(), Some(3));

    let axis = write_config(dir.path(), "axis.toml", &SWEEP.replace("\"gamma\"", "\"temperature\""));
    assert_eq!(run(&["run", "--config", axis.to_str().unwrap(), "--out", out_s]).status.code(), Some(3));

    let both = write_config(
        dir.path(),
        "both.toml",
        &MINIMAL
            .replace("rate = 0.005", "rate = 0.005\ncatalog = { K1 = 1.0, N = 1.0, V = 1.0, source = \"one_body\" }"),
    );
    assert_eq!(run(&["run", "--config", both.to_str().unwrap(), "--out", out_s]).status.code(), Some(3));

    let missing = dir.path().join("nope.toml");
    assert_eq!(run(&["run", "--config", missing.to_str().unwrap(), "--out", out_s]).status.code(), Some(5));

    // output path occupied by a file
    let blocker = write_config(dir.path(), "blocker", "");
    assert_eq!(
        run(&["run", "--config", plain.to_str().unwrap(), "--out", blocker.to_str().unwrap()]).status.code(),
        Some(5)
    );
    assert!(!out.exists());
}

#[test]
fn catalog_rates_feed_channels() {
    let text = MINIMAL.replace(
        "rate = 0.005",
        "catalog = { K3 = 1.0e-29, N = 1.0e4, V = 1.0e-9, source = \"three_body\", multiplier = 5.0e-4 }",
    );
    let p = plan(&text, false).unwrap();
    // K3 N^3 / V^2 = 10, scaled to 0.005
    assert!((p.runs[0].probe.channels[0].rate() - 0.005).abs() < 1e-12);
}

#[test]
fn physical_units_rescale_by_the_coupling() {
    let text = r#"
[unit_system]
kind = "physical"
mass = 2.0
volume = 3.0
scattering_length = 1.5
hbar = 1.0

[oscillator]
kind = "coherent"
alpha = 1.0

[model]

[[channel]]
kind = "one_body"
rate = 0.5
"#;
    let p = plan(text, false).unwrap();
    let chi = 2.0 * std::f64::consts::PI * 1.5 / (2.0 * 3.0);
    assert_eq!(p.runs[0].probe.params.chi, 1.0);
    assert!((p.runs[0].probe.channels[0].rate() - 0.5 / chi).abs() < 1e-15);
    assert!(plan(&text.replace("[model]", "[model]\nchi = 1.0"), false).is_err());
}

#[test]
fn verify_subset_is_deterministic_and_passes() {
    let a = run(&["verify", "--only", "AC-1,AC-6"]);
    let b = run(&["verify", "--only", "AC-1,AC-6"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stdout));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("AC-1 PASS"));
    assert!(text.contains("AC-6 PASS"));
}

fn inflated_gamma_bar(a2: f64, gamma: f64, chi: f64) -> bec_probe::Result<f64> {
    Ok(1.1 * analytic_gamma_bar(a2, gamma, chi)?)
}

#[test]
fn injected_reference_error_fails_verification() {
    let opts = AcceptanceOptions { gamma_bar: inflated_gamma_bar };
    let mut out = Vec::new();
    let code = verify(&opts, Some(&["AC-1".to_string()]), &mut out).unwrap();
    assert_ne!(code, 0);
    assert!(String::from_utf8(out).unwrap().contains("AC-1 FAIL"));

    let mut out = Vec::new();
    assert!(matches!(verify(&opts, Some(&["AC-9".to_string()]), &mut out), Err(CliError::Validation(_))));
}
