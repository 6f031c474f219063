//! TOML run configuration.
//!
//! ```toml
//! [model]            # rates and frequencies in units of chi
//! chi = 1.0
//! omega0 = 0.0
//! omega = 0.0
//! kappa = 0.0
//!
//! [oscillator]
//! kind = "coherent"  # coherent | thermal | mixture
//! alpha = 3.0        # coherent: amplitude, optional phase
//! # nbar = 2.0       # thermal
//! # components = [{ weight = 0.5, alpha = 2.0, phase = 0.0 }, ...]
//!
//! [[channel]]
//! kind = "one_body"  # one_body | three_body | dephasing
//! rate = 0.005       # or: catalog = { K1 = .., K2 = .., K3 = .., N = .., V = .., source = "three_body" }
//!
//! [protocol]
//! grid_points = 16
//! method = "exact"   # exact | rk4
//! # dt, n_max, tail_tol, samples, duration, quadrature_nodes
//!
//! [sweep]
//! axis = "gamma"     # gamma | alpha_sq | nbar | kappa | n_atoms
//! values = [0.0, 0.002, 0.005, 0.01]
//!
//! [output]
//! prefix = "probe"
//! format = "csv"
//! ```

use serde::Deserialize;
use sha2::{Digest, Sha256};

use bec_probe::dissipation::{loss_rates, make_channel, ChannelKind, LossRateCatalog};
use bec_probe::fock::{FockCutoff, OscState, DEFAULT_TAIL_TOL};
use bec_probe::linalg::C64;
use bec_probe::model::{coupling_from_geometry, feshbach_length, FeshbachParams, ModelParams};
use bec_probe::propagate::Method;
use bec_probe::protocol::{uniform_grid, ProbeConfig, QuadratureOptions, DEFAULT_SAMPLES};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub oscillator: OscSection,
    #[serde(default, rename = "channel")]
    pub channels: Vec<ChannelSection>,
    #[serde(default)]
    pub protocol: ProtocolSection,
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: OutputSection,
    pub unit_system: Option<UnitSystemSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub chi: Option<f64>,
    #[serde(default)]
    pub omega0: f64,
    #[serde(default)]
    pub omega: f64,
    #[serde(default)]
    pub kappa: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscSection {
    pub kind: String,
    pub alpha: Option<f64>,
    #[serde(default)]
    pub phase: f64,
    pub nbar: Option<f64>,
    pub components: Option<Vec<ComponentSection>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSection {
    pub weight: f64,
    pub alpha: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub kind: String,
    pub rate: Option<f64>,
    pub catalog: Option<CatalogSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogSection {
    #[serde(rename = "K1", default)]
    pub k1: f64,
    #[serde(rename = "K2", default)]
    pub k2: f64,
    #[serde(rename = "K3", default)]
    pub k3: f64,
    #[serde(rename = "N")]
    pub n_atoms: f64,
    #[serde(rename = "V")]
    pub volume: f64,
    /// Which catalog rate feeds the channel: one_body | two_body | three_body.
    pub source: String,
    /// Extra factor applied to the catalog rate (e.g. a unit conversion).
    #[serde(default = "one")]
    pub multiplier: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    #[serde(default = "default_grid")]
    pub grid_points: usize,
    #[serde(default = "default_method")]
    pub method: String,
    pub dt: Option<f64>,
    pub n_max: Option<usize>,
    pub tail_tol: Option<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    pub duration: Option<f64>,
    /// Thermal inputs only: also run the Gauss-Laguerre mixture realisation.
    pub quadrature_nodes: Option<usize>,
}

fn default_grid() -> usize {
    16
}

fn default_method() -> String {
    "exact".into()
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

impl Default for ProtocolSection {
    fn default() -> Self {
        Self {
            grid_points: default_grid(),
            method: default_method(),
            dt: None,
            n_max: None,
            tail_tol: None,
            samples: default_samples(),
            duration: None,
            quadrature_nodes: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_prefix")]
    pub prefix: String,
    #[serde(default = "default_format")]
    pub format: String,
}

fn default_prefix() -> String {
    "probe".into()
}

fn default_format() -> String {
    "csv".into()
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { prefix: default_prefix(), format: default_format() }
    }
}

/// Physical inputs (SI). When present, `chi` is derived from the contact
/// coupling and every rate and frequency in the file is read in s^-1 and
/// divided by it.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitSystemSection {
    pub kind: String,
    pub mass: f64,
    pub volume: f64,
    pub scattering_length: Option<f64>,
    pub feshbach: Option<FeshbachSection>,
    #[serde(default = "hbar_si")]
    pub hbar: f64,
}

fn hbar_si() -> f64 {
    1.054_571_817e-34
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeshbachSection {
    pub a_bg: f64,
    pub b0: f64,
    pub width: f64,
    pub field: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Gamma,
    AlphaSq,
    Nbar,
    Kappa,
    NAtoms,
}

impl SweepAxis {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "gamma" => SweepAxis::Gamma,
            "alpha_sq" => SweepAxis::AlphaSq,
            "nbar" => SweepAxis::Nbar,
            "kappa" => SweepAxis::Kappa,
            "n_atoms" => SweepAxis::NAtoms,
            other => {
                return Err(CliError::Validation(format!(
                    "unknown sweep axis '{other}' (expected gamma, alpha_sq, nbar, kappa or n_atoms)"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Gamma => "gamma",
            SweepAxis::AlphaSq => "alpha_sq",
            SweepAxis::Nbar => "nbar",
            SweepAxis::Kappa => "kappa",
            SweepAxis::NAtoms => "n_atoms",
        }
    }
}

/// A probe ready to run, with everything the CSV needs.
#[derive(Debug, Clone)]
pub struct PlannedRun {
    pub axis_value: Option<f64>,
    pub probe: ProbeConfig,
    pub quadrature: Option<QuadratureOptions>,
    /// Atom number for the Holstein-Primakoff check (n_atoms sweeps).
    pub n_atoms: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Plan {
    pub config_hash: String,
    pub units: String,
    pub prefix: String,
    pub axis: Option<SweepAxis>,
    pub runs: Vec<PlannedRun>,
}

/// First 16 hex characters of the SHA-256 of the config bytes.
pub fn config_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))[..16].to_string()
}

pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::ConfigParse(e.to_string()))
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

/// Base-unit conversion: returns `(chi, scale)` with every input rate multiplied by `scale`.
fn units(cfg: &RunConfig) -> Result<(f64, f64, String), CliError> {
    match &cfg.unit_system {
        None => {
            let chi = cfg.model.chi.ok_or_else(|| invalid("model.chi is required"))?;
            Ok((chi, 1.0, "rates and frequencies in units of chi; time in 1/chi".into()))
        }
        Some(u) => {
            if u.kind != "physical" {
                return Err(invalid(format!("unit_system.kind must be 'physical', got '{}'", u.kind)));
            }
            if cfg.model.chi.is_some() {
                return Err(invalid("model.chi must be omitted when unit_system is physical"));
            }
            let a = match (u.scattering_length, &u.feshbach) {
                (Some(a), None) => a,
                (None, Some(f)) => feshbach_length(f.field, &FeshbachParams { a_bg: f.a_bg, b0: f.b0, width: f.width })
                    .map_err(invalid)?,
                _ => return Err(invalid("unit_system needs exactly one of scattering_length or feshbach")),
            };
            let chi_phys = u.hbar * coupling_from_geometry(a, u.mass, u.volume).map_err(invalid)?;
            if !(chi_phys.is_finite() && chi_phys > 0.0) {
                return Err(invalid(format!("derived coupling {chi_phys} s^-1 is not usable")));
            }
            Ok((1.0, 1.0 / chi_phys, format!("physical inputs scaled by chi = {chi_phys:.6e} s^-1; time in 1/chi")))
        }
    }
}

fn osc_state(sec: &OscSection) -> Result<OscState, CliError> {
    let osc = match sec.kind.as_str() {
        "coherent" => {
            let a = sec.alpha.ok_or_else(|| invalid("coherent oscillator needs 'alpha'"))?;
            OscState::Coherent(C64::from_polar(a, sec.phase))
        }
        "thermal" => OscState::Thermal(sec.nbar.ok_or_else(|| invalid("thermal oscillator needs 'nbar'"))?),
        "mixture" => {
            let comps = sec.components.as_ref().ok_or_else(|| invalid("mixture oscillator needs 'components'"))?;
            OscState::Mixture(comps.iter().map(|c| (c.weight, C64::from_polar(c.alpha, c.phase))).collect())
        }
        other => return Err(invalid(format!("unknown oscillator kind '{other}'"))),
    };
    osc.validate().map_err(invalid)?;
    Ok(osc)
}

fn channel_rate(ch: &ChannelSection, scale: f64) -> Result<(ChannelKind, f64), CliError> {
    let kind: ChannelKind = ch.kind.parse().map_err(invalid)?;
    let rate = match (ch.rate, &ch.catalog) {
        (Some(r), None) => r,
        (None, Some(c)) => {
            let rates =
                loss_rates(&LossRateCatalog { k1: c.k1, k2: c.k2, k3: c.k3, n_atoms: c.n_atoms, volume: c.volume })
                    .map_err(invalid)?;
            let base = match c.source.as_str() {
                "one_body" => rates.one_body,
                "two_body" => rates.two_body,
                "three_body" => rates.three_body,
                other => return Err(invalid(format!("unknown catalog source '{other}'"))),
            };
            base * c.multiplier
        }
        _ => return Err(invalid(format!("channel '{}' needs exactly one of 'rate' or 'catalog'", ch.kind))),
    };
    if !(rate.is_finite() && rate >= 0.0) {
        return Err(invalid(format!("channel '{}' has negative or non-finite rate {rate}", ch.kind)));
    }
    Ok((kind, rate * scale))
}

struct Base {
    params: ModelParams,
    osc: OscState,
    channels: Vec<(ChannelKind, f64)>,
}

fn build_probe(cfg: &RunConfig, base: &Base) -> Result<ProbeConfig, CliError> {
    let p = &cfg.protocol;
    let tail_tol = p.tail_tol.unwrap_or(DEFAULT_TAIL_TOL);
    let cutoff = match p.n_max {
        Some(n) => FockCutoff::new(n, tail_tol).map_err(invalid)?,
        None => {
            let c = base.osc.default_cutoff().map_err(invalid)?;
            match (&base.osc, p.tail_tol) {
                (OscState::Thermal(nbar), Some(tol)) => FockCutoff::for_thermal(*nbar, tol).map_err(invalid)?,
                _ => c,
            }
        }
    };
    // realisability is a configuration problem, not a simulation failure
    base.osc.realize(cutoff).map_err(invalid)?;
    let channels = base
        .channels
        .iter()
        .map(|&(k, r)| make_channel(k, r, cutoff))
        .collect::<Result<Vec<_>, _>>()
        .map_err(invalid)?;
    let mut probe = ProbeConfig::new(base.params, base.osc.clone(), channels, cutoff);
    probe.delta_grid = uniform_grid(p.grid_points);
    probe.samples = p.samples;
    probe.duration = p.duration;
    probe.method = match p.method.as_str() {
        "exact" => Method::Exact,
        "rk4" => match p.dt {
            Some(dt) => Method::Rk4 { dt },
            None => probe.default_rk4().map_err(invalid)?,
        },
        other => return Err(invalid(format!("unknown method '{other}' (expected exact or rk4)"))),
    };
    probe.validate().map_err(invalid)?;
    Ok(probe)
}

/// Parse-level checks, unit conversion and sweep expansion. Nothing is
/// written and nothing is simulated.
pub fn plan(text: &str, require_sweep: bool) -> Result<Plan, CliError> {
    let cfg = parse(text)?;
    if cfg.output.format != "csv" {
        return Err(invalid(format!("unsupported output format '{}'", cfg.output.format)));
    }
    if cfg.output.prefix.is_empty() || cfg.output.prefix.contains(['/', '\\']) {
        return Err(invalid("output.prefix must be a plain file-name stem"));
    }
    if require_sweep && cfg.sweep.is_none() {
        return Err(invalid("'sweep' needs a [sweep] block in the config"));
    }
    let (chi, scale, units) = units(&cfg)?;
    let m = &cfg.model;
    let params = ModelParams { omega0: m.omega0 * scale, omega: m.omega * scale, kappa: m.kappa * scale, chi };
    params.validate().map_err(invalid)?;
    let osc = osc_state(&cfg.oscillator)?;
    let channels = cfg.channels.iter().map(|c| channel_rate(c, scale)).collect::<Result<Vec<_>, _>>()?;
    let quadrature = match (cfg.protocol.quadrature_nodes, &osc) {
        (None, _) => None,
        (Some(n), OscState::Thermal(_)) if n > 0 => Some(QuadratureOptions { nodes: n, ..Default::default() }),
        (Some(_), OscState::Thermal(_)) => return Err(invalid("quadrature_nodes must be positive")),
        (Some(_), _) => return Err(invalid("quadrature_nodes applies to thermal oscillators only")),
    };
    let base = Base { params, osc, channels };

    let mut runs = Vec::new();
    let axis = match &cfg.sweep {
        None => {
            runs.push(PlannedRun { axis_value: None, probe: build_probe(&cfg, &base)?, quadrature, n_atoms: None });
            None
        }
        Some(sw) => {
            let axis = SweepAxis::parse(&sw.axis)?;
            if sw.values.is_empty() {
                return Err(invalid("sweep.values is empty"));
            }
            for &v in &sw.values {
                if !v.is_finite() {
                    return Err(invalid(format!("sweep value {v} is not finite")));
                }
                let mut point = Base { params: base.params, osc: base.osc.clone(), channels: base.channels.clone() };
                let mut n_atoms = None;
                match axis {
                    SweepAxis::Gamma => {
                        let mut hit = false;
                        for ch in point.channels.iter_mut().filter(|c| c.0 == ChannelKind::OneBody) {
                            ch.1 = v * scale;
                            hit = true;
                        }
                        if !hit {
                            return Err(invalid("gamma sweep needs a one_body channel"));
                        }
                        if v < 0.0 {
                            return Err(invalid(format!("negative rate {v} in gamma sweep")));
                        }
                    }
                    SweepAxis::AlphaSq => match &point.osc {
                        OscState::Coherent(a) if v >= 0.0 => {
                            point.osc = OscState::Coherent(C64::from_polar(v.sqrt(), a.arg()))
                        }
                        OscState::Coherent(_) => return Err(invalid(format!("alpha_sq {v} is negative"))),
                        _ => return Err(invalid("alpha_sq sweep needs a coherent oscillator")),
                    },
                    SweepAxis::Nbar => match &point.osc {
                        OscState::Thermal(_) => point.osc = OscState::Thermal(v),
                        _ => return Err(invalid("nbar sweep needs a thermal oscillator")),
                    },
                    SweepAxis::Kappa => point.params.kappa = v * scale,
                    SweepAxis::NAtoms => {
                        if !(v >= 1.0 && v.fract() == 0.0) {
                            return Err(invalid(format!("n_atoms {v} must be a positive integer")));
                        }
                        if !matches!(point.osc, OscState::Coherent(_)) {
                            return Err(invalid("n_atoms sweep needs a coherent oscillator"));
                        }
                        n_atoms = Some(v as usize);
                    }
                }
                point.osc.validate().map_err(invalid)?;
                runs.push(PlannedRun { axis_value: Some(v), probe: build_probe(&cfg, &point)?, quadrature, n_atoms });
            }
            Some(axis)
        }
    };
    Ok(Plan { config_hash: config_hash(text.as_bytes()), units, prefix: cfg.output.prefix.clone(), axis, runs })
}
