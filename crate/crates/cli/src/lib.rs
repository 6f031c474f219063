//! Configuration-driven probe runs, sweeps and the acceptance report.

pub mod config;

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use bec_probe::acceptance::{compare_hp, run_selected, AcceptanceOptions, CRITERIA};
use bec_probe::protocol::{run_probe, thermal_probe, ProbeResult};

use config::{Plan, PlannedRun, SweepAxis};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config parse error: {0}")]
    ConfigParse(String),
    #[error("invalid config: {0}")]
    Validation(String),
    #[error("simulation failed: {0}")]
    Simulation(#[from] bec_probe::Error),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ConfigParse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Simulation(_) => 4,
            CliError::Io { .. } => 5,
        }
    }
}

/// Exit code for a failed `verify`.
pub const VERIFY_FAILED: i32 = 1;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// One row of a sweep summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub axis_value: f64,
    pub visibility: f64,
    pub gamma_bar_measured: f64,
    pub gamma_bar_analytic: f64,
    pub rel_error: f64,
    pub disentanglement_fidelity: f64,
    pub n_max: usize,
    pub hp_deviation: Option<f64>,
}

fn rel_error(measured: f64, analytic: f64) -> f64 {
    if analytic > 0.0 {
        (measured - analytic).abs() / analytic
    } else {
        f64::NAN
    }
}

fn fmt_f(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.10e}")
    }
}

fn run_csv(plan: &Plan, run: &PlannedRun, r: &ProbeResult, extra: &[String]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# config_hash: {}", plan.config_hash);
    let _ = writeln!(s, "# units: {}", plan.units);
    if let (Some(axis), Some(v)) = (plan.axis, run.axis_value) {
        let _ = writeln!(s, "# sweep: {} = {}", axis.name(), v);
    }
    let _ = writeln!(s, "# n_max: {}", r.metadata.n_max);
    let _ = writeln!(s, "# method: {}", r.metadata.method.name());
    let _ = writeln!(s, "# probe_time: {}", r.metadata.probe_time);
    let _ = writeln!(s, "# visibility: {}", fmt_f(r.visibility));
    let _ = writeln!(s, "# gamma_bar_measured: {}", fmt_f(r.gamma_bar_measured));
    let _ = writeln!(s, "# gamma_bar_analytic: {}", fmt_f(r.gamma_bar_analytic));
    let _ = writeln!(s, "# disentanglement_fidelity: {}", fmt_f(r.disentanglement_fidelity));
    for line in extra {
        let _ = writeln!(s, "# {line}");
    }
    s.push_str("delta,p_e\n");
    for &(d, p) in &r.pe_samples {
        let _ = writeln!(s, "{},{}", fmt_f(d), fmt_f(p));
    }
    s
}

fn summary_csv(plan: &Plan, rows: &[SummaryRow]) -> String {
    let axis = plan.axis.expect("summary only for sweeps");
    let mut s = String::new();
    let _ = writeln!(s, "# config_hash: {}", plan.config_hash);
    let _ = writeln!(s, "# units: {}", plan.units);
    let _ = writeln!(s, "# axis: {}", axis.name());
    s.push_str("axis_value,visibility,gamma_bar_measured,gamma_bar_analytic,rel_error,disentanglement_fidelity,n_max,config_hash");
    if axis == SweepAxis::NAtoms {
        s.push_str(",hp_deviation");
    }
    s.push('\n');
    for r in rows {
        let _ = write!(
            s,
            "{},{},{},{},{},{},{},{}",
            fmt_f(r.axis_value),
            fmt_f(r.visibility),
            fmt_f(r.gamma_bar_measured),
            fmt_f(r.gamma_bar_analytic),
            fmt_f(r.rel_error),
            fmt_f(r.disentanglement_fidelity),
            r.n_max,
            plan.config_hash
        );
        if let Some(h) = r.hp_deviation {
            let _ = write!(s, ",{}", fmt_f(h));
        }
        s.push('\n');
    }
    s
}

/// Execute a validated plan, writing CSVs into `out`. Returns the summary rows
/// (one per run) and prints a line per run to `log`.
pub fn execute(plan: &Plan, out: &Path, log: &mut dyn Write) -> Result<Vec<SummaryRow>, CliError> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    let mut rows = Vec::new();
    for (i, run) in plan.runs.iter().enumerate() {
        let mut extra = Vec::new();
        let result = match run.quadrature {
            Some(q) => {
                let cmp = thermal_probe(&run.probe, &q)?;
                extra.push(format!(
                    "quadrature_visibility: {} ({} nodes, largest n_max {})",
                    fmt_f(cmp.quadrature.visibility),
                    cmp.nodes.len(),
                    cmp.quadrature.metadata.n_max
                ));
                extra.push(format!("paths_relative_difference: {}", fmt_f(cmp.relative_visibility_difference)));
                cmp.direct
            }
            None => run_probe(&run.probe)?,
        };
        let hp_deviation = match run.n_atoms {
            Some(n) => {
                let cmp = compare_hp(n, run.probe.osc.mean_occupation(), run.probe.samples, &mut Vec::new())?;
                extra.push(format!("hp_deviation: {}", fmt_f(cmp.max_rel_deviation)));
                Some(cmp.max_rel_deviation)
            }
            None => None,
        };
        let name = match plan.axis {
            Some(axis) => format!("{}_{}_{:03}.csv", plan.prefix, axis.name(), i),
            None => format!("{}.csv", plan.prefix),
        };
        let path = out.join(name);
        fs::write(&path, run_csv(plan, run, &result, &extra)).map_err(io_err(&path))?;
        let row = SummaryRow {
            axis_value: run.axis_value.unwrap_or(f64::NAN),
            visibility: result.visibility,
            gamma_bar_measured: result.gamma_bar_measured,
            gamma_bar_analytic: result.gamma_bar_analytic,
            rel_error: rel_error(result.gamma_bar_measured, result.gamma_bar_analytic),
            disentanglement_fidelity: result.disentanglement_fidelity,
            n_max: result.metadata.n_max,
            hp_deviation,
        };
        let prefix = match (plan.axis, run.axis_value) {
            (Some(a), Some(v)) => format!("{} = {v}: ", a.name()),
            _ => String::new(),
        };
        let _ = writeln!(
            log,
            "{prefix}Gamma_bar measured {:.5} analytic {:.5} (rel error {}), visibility {:.5}, n_max {}",
            row.gamma_bar_measured,
            row.gamma_bar_analytic,
            if row.rel_error.is_nan() { "n/a".to_string() } else { format!("{:.2}%", 100.0 * row.rel_error) },
            row.visibility,
            row.n_max
        );
        rows.push(row);
    }
    if plan.axis.is_some() {
        let path = out.join(format!("{}_summary.csv", plan.prefix));
        fs::write(&path, summary_csv(plan, &rows)).map_err(io_err(&path))?;
        let _ = writeln!(log, "summary written to {}", path.display());
    }
    Ok(rows)
}

/// `run` / `sweep`: read, validate, then simulate and write.
pub fn run_command(
    config: &Path,
    out: &Path,
    require_sweep: bool,
    log: &mut dyn Write,
) -> Result<Vec<SummaryRow>, CliError> {
    let text = fs::read_to_string(config).map_err(io_err(config))?;
    let plan = config::plan(&text, require_sweep)?;
    execute(&plan, out, log)
}

/// `verify`: print the acceptance report and return the exit code.
pub fn verify(opts: &AcceptanceOptions, only: Option<&[String]>, out: &mut dyn Write) -> Result<i32, CliError> {
    let ids: Vec<&str> = match only {
        Some(list) => {
            for id in list {
                if !CRITERIA.iter().any(|c| c.eq_ignore_ascii_case(id)) {
                    return Err(CliError::Validation(format!("unknown criterion '{id}'")));
                }
            }
            list.iter().map(String::as_str).collect()
        }
        None => CRITERIA.to_vec(),
    };
    let report = run_selected(opts, &ids);
    let _ = write!(out, "{report}");
    Ok(if report.all_passed() { 0 } else { VERIFY_FAILED })
}
