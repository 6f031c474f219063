//! The Ramsey-type probe: prepare `(|g> + e^{i delta}|e>)/sqrt 2 (x) rho_osc`,
//! let the branches separate and recombine over `t' = pi/chi`, rotate the
//! qubit back with a pi/2 pulse and record `P_e` as a function of `delta`.
//!
//! The model Hamiltonian commutes with `sigma_z`, so the bare excited-state
//! population is `1/2` for every `delta`. The fringe only becomes visible
//! after the readout rotation, which maps `|+>` to `|e>` and `|->` to `|g>`;
//! afterwards `P_e = (1 + V cos(delta - 2 omega0 t')) / 2`.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::dissipation::{gamma_eff_three_body, make_channel, ChannelKind, LindbladChannel};
use crate::error::{Error, Result};
use crate::fock::{self, qubit, FockCutoff, OscState, State, StateTolerances};
use crate::linalg::{CMatrix, C64};
use crate::model::{build_hamiltonian, ModelParams};
use crate::propagate::{
    analytic_gamma_bar, analytic_thermal_visibility, build_liouvillian, default_rk4_dt, evolve_with, InvariantLog,
    Method, Propagator,
};

/// Number of invariant checkpoints along each evolution.
pub const DEFAULT_SAMPLES: usize = 20;
pub const DEFAULT_GRID_POINTS: usize = 16;

/// `2 pi k / m`, `k = 0..m`.
pub fn uniform_grid(m: usize) -> Vec<f64> {
    (0..m).map(|k| TAU * k as f64 / m as f64).collect()
}

fn check_grid(grid: &[f64]) -> Result<()> {
    let m = grid.len();
    if m < 8 {
        return Err(Error::NonUniformGrid(format!("need at least 8 points, got {m}")));
    }
    let h = TAU / m as f64;
    if !(grid[0] >= -1e-12 && grid[0] < h) {
        return Err(Error::NonUniformGrid(format!("first point {} outside [0, {h})", grid[0])));
    }
    for (k, pair) in grid.windows(2).enumerate() {
        if ((pair[1] - pair[0]) - h).abs() > 1e-9 {
            return Err(Error::NonUniformGrid(format!("spacing {} at index {k}, expected {h}", pair[1] - pair[0])));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    pub params: ModelParams,
    pub osc: OscState,
    pub channels: Vec<LindbladChannel>,
    pub delta_grid: Vec<f64>,
    pub method: Method,
    pub cutoff: FockCutoff,
    /// Invariant checkpoints per evolution.
    pub samples: usize,
    /// Probe duration; `None` means `pi/|chi|`.
    pub duration: Option<f64>,
}

impl ProbeConfig {
    /// Exact propagation, 16-point grid, 20 checkpoints, `t' = pi/|chi|`.
    pub fn new(params: ModelParams, osc: OscState, channels: Vec<LindbladChannel>, cutoff: FockCutoff) -> Self {
        Self {
            params,
            osc,
            channels,
            delta_grid: uniform_grid(DEFAULT_GRID_POINTS),
            method: Method::Exact,
            cutoff,
            samples: DEFAULT_SAMPLES,
            duration: None,
        }
    }

    pub fn probe_time(&self) -> Result<f64> {
        match self.duration {
            Some(t) if t >= 0.0 && t.is_finite() => Ok(t),
            Some(t) => Err(Error::InvalidParameter(format!("probe duration must be finite and >= 0, got {t}"))),
            None if self.params.chi == 0.0 => Err(Error::ZeroChi),
            None => Ok(PI / self.params.chi.abs()),
        }
    }

    /// Effective one-body rate seen by the analytic reference: the one-body
    /// rates plus `3 N^2 gamma3 / 2` per three-body channel with `N` the
    /// initial mean occupation. Dephasing does not enter.
    pub fn effective_gamma(&self) -> f64 {
        let n = self.osc.mean_occupation();
        self.channels
            .iter()
            .map(|c| match c.kind() {
                ChannelKind::OneBody => c.rate(),
                ChannelKind::ThreeBody => gamma_eff_three_body(n, c.rate()),
                ChannelKind::Dephasing => 0.0,
            })
            .fold(0.0, |a, b| a + b)
    }

    /// RK4 with the default step `min(1e-3/|chi|, 0.1/||L||_inf)`.
    pub fn default_rk4(&self) -> Result<Method> {
        let l = build_liouvillian(&build_hamiltonian(&self.params, self.cutoff), &self.channels)?;
        Ok(Method::Rk4 { dt: default_rk4_dt(&l, self.params.chi) })
    }

    /// The same configuration with the channels rebuilt on another cutoff.
    pub fn with_cutoff(&self, cutoff: FockCutoff) -> Result<Self> {
        let channels = self.channels.iter().map(|c| make_channel(c.kind(), c.rate(), cutoff)).collect::<Result<_>>()?;
        Ok(Self { cutoff, channels, ..self.clone() })
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.osc.validate()?;
        check_grid(&self.delta_grid)?;
        self.probe_time()?;
        if self.samples == 0 {
            return Err(Error::InvalidParameter("samples must be >= 1".into()));
        }
        for c in &self.channels {
            if c.jump().dim() != self.cutoff.dim() {
                return Err(Error::DimMismatch { expected: self.cutoff.dim(), found: c.jump().dim() });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Timings {
    pub setup_s: f64,
    pub evolve_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeMetadata {
    pub n_max: usize,
    pub method: Method,
    pub probe_time: f64,
    pub samples: usize,
    pub timings: Option<Timings>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    /// `(delta, P_e)` in grid order.
    pub pe_samples: Vec<(f64, f64)>,
    pub visibility: f64,
    pub phase_offset: f64,
    pub gamma_bar_measured: f64,
    pub gamma_bar_analytic: f64,
    /// Fidelity of the final oscillator marginal (`delta = 0`) with the
    /// loss-free reference.
    pub disentanglement_fidelity: f64,
    /// Purity of the final qubit marginal for `delta = 0`.
    pub qubit_purity: f64,
    pub invariants: InvariantLog,
    pub metadata: ProbeMetadata,
}

/// `(|g> + e^{i delta}|e>)/sqrt 2 (x) rho_osc`.
pub fn prepare_initial(delta: f64, osc: &OscState, cutoff: FockCutoff) -> Result<State> {
    Ok(qubit::equatorial(delta).tensor(&osc.realize(cutoff)?))
}

/// `<e|rho|e>` of a single-qubit state.
pub fn excited_probability(rho_qubit: &State) -> Result<f64> {
    if rho_qubit.dims() != [2] {
        return Err(Error::BadDims(format!("expected a qubit state, found {:?}", rho_qubit.dims())));
    }
    Ok(rho_qubit.density_matrix()[(qubit::EXCITED, qubit::EXCITED)].re.clamp(0.0, 1.0))
}

/// The pi/2 readout rotation `|e><+| + |g><-|` (a Hadamard in the `e, g` basis).
pub fn readout_pulse() -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_row_slice(2, 2, &[C64::new(s, 0.0), C64::new(s, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0)])
}

/// Excited population after the readout rotation.
pub fn readout_probability(rho_qubit: &State) -> Result<f64> {
    if rho_qubit.dims() != [2] {
        return Err(Error::BadDims(format!("expected a qubit state, found {:?}", rho_qubit.dims())));
    }
    let r = readout_pulse();
    let rotated = &r * rho_qubit.density_matrix().as_ref() * r.adjoint();
    excited_probability(&State::mixed_unchecked(vec![2], rotated)?)
}

/// First-harmonic projection of `P(delta)`: returns `(visibility, phase)`
/// with `P = (1 + visibility cos(delta - phase)) / 2 + higher harmonics`.
pub fn extract_visibility(samples: &[(f64, f64)]) -> Result<(f64, f64)> {
    let grid: Vec<f64> = samples.iter().map(|s| s.0).collect();
    check_grid(&grid)?;
    let m = samples.len() as f64;
    let (mut a, mut b) = (0.0, 0.0);
    for &(d, p) in samples {
        a += p * d.cos();
        b += p * d.sin();
    }
    a *= 2.0 / m;
    b *= 2.0 / m;
    let vis = 2.0 * a.hypot(b);
    Ok((vis, b.atan2(a).rem_euclid(TAU)))
}

/// Largest deviation of `P(delta)` from its mean plus first harmonic,
/// relative to the fringe amplitude `V/2`.
pub fn fringe_residual(samples: &[(f64, f64)]) -> Result<f64> {
    let (vis, phase) = extract_visibility(samples)?;
    let mean = samples.iter().map(|s| s.1).sum::<f64>() / samples.len() as f64;
    let worst = samples.iter().map(|&(d, p)| (p - mean - 0.5 * vis * (d - phase).cos()).abs()).fold(0.0, f64::max);
    Ok(if vis > 0.0 { worst / (0.5 * vis) } else { worst })
}

/// Phase-space separation `2|a| |sin chi t|` of the two branches.
pub fn distance_d(alpha: C64, chi: f64, t: f64) -> f64 {
    2.0 * alpha.norm() * (chi * t).sin().abs()
}

/// `int_0^t D(s)^2 ds / |a|^2`, so that the accumulated exponent at time `t`
/// is `Gamma |a|^2` times this.
pub fn accumulated_weight(chi: f64, t: f64) -> f64 {
    if chi == 0.0 {
        return 0.0;
    }
    4.0 * (t / 2.0 - (2.0 * chi * t).sin() / (4.0 * chi))
}

fn analytic_reference(cfg: &ProbeConfig, t: f64) -> Result<f64> {
    let gamma = cfg.effective_gamma();
    let chi = cfg.params.chi;
    // a full period uses the closed forms; other durations integrate D^2
    let full = cfg.duration.is_none();
    let per_quantum = |a2: f64| -> Result<f64> {
        if full {
            analytic_gamma_bar(a2, gamma, chi)
        } else {
            Ok(gamma * a2 * accumulated_weight(chi, t))
        }
    };
    match &cfg.osc {
        OscState::Coherent(alpha) => per_quantum(alpha.norm_sqr()),
        OscState::Thermal(nbar) => {
            if full {
                Ok(-analytic_thermal_visibility(*nbar, gamma, chi)?.ln())
            } else {
                Ok((1.0 + nbar * per_quantum(1.0)?).ln())
            }
        }
        OscState::Mixture(parts) => {
            let mut v = 0.0;
            for (w, a) in parts {
                v += w * (-per_quantum(a.norm_sqr())?).exp();
            }
            Ok(-v.ln())
        }
    }
}

#[cfg(not(target_arch = "wasm32"))]
fn now() -> Option<std::time::Instant> {
    Some(std::time::Instant::now())
}

#[cfg(target_arch = "wasm32")]
fn now() -> Option<()> {
    None
}

#[cfg(not(target_arch = "wasm32"))]
fn elapsed(t: &Option<std::time::Instant>) -> f64 {
    t.map(|t| t.elapsed().as_secs_f64()).unwrap_or(0.0)
}

#[cfg(target_arch = "wasm32")]
fn elapsed(_: &Option<()>) -> f64 {
    0.0
}

/// Run the probe over the configured phase grid.
pub fn run_probe(cfg: &ProbeConfig) -> Result<ProbeResult> {
    cfg.validate()?;
    let t_total = now();
    let t_prime = cfg.probe_time()?;
    let h = build_hamiltonian(&cfg.params, cfg.cutoff);
    let l = build_liouvillian(&h, &cfg.channels)?;
    let prop = Propagator::new(&l, t_prime / cfg.samples as f64, cfg.method)?;
    let osc0 = cfg.osc.realize(cfg.cutoff)?;
    let setup_s = elapsed(&t_total);

    let tol = StateTolerances::EVOLUTION;
    let mut log = InvariantLog::default();
    let mut pe_samples = Vec::with_capacity(cfg.delta_grid.len());
    let mut at_zero: Option<State> = None;
    for &delta in &cfg.delta_grid {
        let init = qubit::equatorial(delta).tensor(&osc0);
        let (fin, run_log) = evolve_with(&prop, &init, cfg.samples, &tol)?;
        log.merge(&run_log);
        let q = fock::partial_trace_oscillator(&fin)?;
        pe_samples.push((delta, readout_probability(&q)?));
        if delta.abs() < 1e-12 {
            at_zero = Some(fin);
        }
    }
    let fin0 = match at_zero {
        Some(s) => s,
        None => {
            let init = qubit::equatorial(0.0).tensor(&osc0);
            let (fin, run_log) = evolve_with(&prop, &init, cfg.samples, &tol)?;
            log.merge(&run_log);
            fin
        }
    };

    // loss-free reference: the excited branch evolves under omega n + kappa n^2
    let osc_h = crate::fock::Operator::from_diagonal(
        vec![cfg.cutoff.dim()],
        &cfg.params.branch_energies(qubit::EXCITED, cfg.cutoff.dim()),
    )?;
    let reference = Propagator::new(&build_liouvillian(&osc_h, &[])?, t_prime, Method::Exact)?.apply(&osc0)?;
    let osc_final = fock::partial_trace_qubit(&fin0)?;
    let disentanglement_fidelity = fock::fidelity(&osc_final, &reference)?.min(1.0);
    let qubit_purity = fock::partial_trace_oscillator(&fin0)?.purity();

    let (visibility, phase_offset) = extract_visibility(&pe_samples)?;
    let visibility = visibility.min(1.0);
    let gamma_bar_analytic = analytic_reference(cfg, t_prime)?;
    let evolve_s = elapsed(&t_total) - setup_s;
    Ok(ProbeResult {
        pe_samples,
        visibility,
        phase_offset,
        gamma_bar_measured: 0.0 - visibility.ln(),
        gamma_bar_analytic,
        disentanglement_fidelity,
        qubit_purity,
        invariants: log,
        metadata: ProbeMetadata {
            n_max: cfg.cutoff.n_max(),
            method: cfg.method,
            probe_time: t_prime,
            samples: cfg.samples,
            timings: t_total.map(|_| Timings { setup_s, evolve_s }),
        },
    })
}

/// Weighted combination of component runs sharing one phase grid.
fn combine(cfg: &ProbeConfig, weights: &[f64], parts: &[ProbeResult], n_max: usize) -> Result<ProbeResult> {
    let grid = &parts[0].pe_samples;
    let pe_samples: Vec<(f64, f64)> = (0..grid.len())
        .map(|k| (grid[k].0, weights.iter().zip(parts).map(|(w, r)| w * r.pe_samples[k].1).sum()))
        .collect();
    let (visibility, phase_offset) = extract_visibility(&pe_samples)?;
    let visibility = visibility.min(1.0);
    let mut log = InvariantLog::default();
    for r in parts {
        log.merge(&r.invariants);
    }
    let timings = parts.iter().map(|r| r.metadata.timings).try_fold(Timings::default(), |acc, t| {
        t.map(|t| Timings { setup_s: acc.setup_s + t.setup_s, evolve_s: acc.evolve_s + t.evolve_s })
    });
    Ok(ProbeResult {
        pe_samples,
        visibility,
        phase_offset,
        gamma_bar_measured: 0.0 - visibility.ln(),
        gamma_bar_analytic: analytic_reference(cfg, parts[0].metadata.probe_time)?,
        // joint concavity: a lower bound on the mixture's fidelity
        disentanglement_fidelity: weights.iter().zip(parts).map(|(w, r)| w * r.disentanglement_fidelity).sum(),
        qubit_purity: weights.iter().zip(parts).map(|(w, r)| w * r.qubit_purity).sum(),
        invariants: log,
        metadata: ProbeMetadata {
            n_max,
            method: cfg.method,
            probe_time: parts[0].metadata.probe_time,
            samples: cfg.samples,
            timings,
        },
    })
}

/// Both realisations of a mixed-state probe.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureComparison {
    /// Per-component runs combined by weight.
    pub components: ProbeResult,
    /// The mixed density matrix evolved as a whole.
    pub direct: ProbeResult,
    pub max_pe_difference: f64,
}

/// Probe a `Mixture` oscillator state both component-wise and directly.
pub fn mixture_probe(cfg: &ProbeConfig) -> Result<MixtureComparison> {
    let OscState::Mixture(parts) = &cfg.osc else {
        return Err(Error::InvalidOscState("mixture_probe needs a Mixture oscillator state".into()));
    };
    cfg.validate()?;
    let weights: Vec<f64> = parts.iter().map(|p| p.0).collect();
    let runs = parts
        .iter()
        .map(|(_, a)| run_probe(&ProbeConfig { osc: OscState::Coherent(*a), ..cfg.clone() }))
        .collect::<Result<Vec<_>>>()?;
    let components = combine(cfg, &weights, &runs, cfg.cutoff.n_max())?;
    let direct = run_probe(cfg)?;
    let max_pe_difference =
        components.pe_samples.iter().zip(&direct.pe_samples).map(|(a, b)| (a.1 - b.1).abs()).fold(0.0, f64::max);
    Ok(MixtureComparison { components, direct, max_pe_difference })
}

/// Gauss-Laguerre rule for `int_0^inf e^{-x} f(x) dx` (Golub-Welsch).
pub fn gauss_laguerre(n: usize) -> Vec<(f64, f64)> {
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            (2 * i + 1) as f64
        } else if i.abs_diff(j) == 1 {
            i.max(j) as f64
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut rule: Vec<(f64, f64)> = (0..n).map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2))).collect();
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub nodes: usize,
    /// Nodes whose weight falls below this are dropped and the rest
    /// renormalised.
    pub weight_floor: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { nodes: 16, weight_floor: 1e-13 }
    }
}

/// Radial coherent-state decomposition of a thermal state as
/// `(weight, |a|^2)` pairs: `|a|^2 = nbar x_k` over a Gauss-Laguerre rule.
pub fn thermal_quadrature(nbar: f64, opts: &QuadratureOptions) -> Result<Vec<(f64, f64)>> {
    if !(nbar.is_finite() && nbar >= 0.0) {
        return Err(Error::InvalidOscState(format!("thermal occupation must be finite and >= 0, got {nbar}")));
    }
    if opts.nodes == 0 {
        return Err(Error::InvalidParameter("quadrature needs at least one node".into()));
    }
    if nbar == 0.0 {
        return Ok(vec![(1.0, 0.0)]);
    }
    let kept: Vec<(f64, f64)> =
        gauss_laguerre(opts.nodes).into_iter().filter(|&(_, w)| w >= opts.weight_floor).collect();
    let total: f64 = kept.iter().map(|k| k.1).sum();
    Ok(kept.into_iter().map(|(x, w)| (w / total, nbar * x)).collect())
}

/// Direct thermal evolution against the radial coherent-state quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalComparison {
    pub direct: ProbeResult,
    pub quadrature: ProbeResult,
    pub nodes: Vec<(f64, f64)>,
    pub relative_visibility_difference: f64,
}

/// Probe a `Thermal` state directly and through its quadrature; each
/// quadrature component gets its own coherent-state cutoff.
pub fn thermal_probe(cfg: &ProbeConfig, opts: &QuadratureOptions) -> Result<ThermalComparison> {
    let OscState::Thermal(nbar) = cfg.osc else {
        return Err(Error::InvalidOscState("thermal_probe needs a Thermal oscillator state".into()));
    };
    let direct = run_probe(cfg)?;
    let nodes = thermal_quadrature(nbar, opts)?;
    let mut runs = Vec::with_capacity(nodes.len());
    let mut n_max = 0;
    for &(_, a2) in &nodes {
        let cutoff = FockCutoff::for_coherent(a2);
        n_max = n_max.max(cutoff.n_max());
        let comp = ProbeConfig { osc: OscState::Coherent(C64::new(a2.sqrt(), 0.0)), ..cfg.with_cutoff(cutoff)? };
        runs.push(run_probe(&comp)?);
    }
    let weights: Vec<f64> = nodes.iter().map(|n| n.0).collect();
    let quadrature = combine(cfg, &weights, &runs, n_max)?;
    let relative_visibility_difference = (quadrature.visibility - direct.visibility).abs() / direct.visibility;
    Ok(ThermalComparison { direct, quadrature, nodes, relative_visibility_difference })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissipation::make_channel;
    use crate::fock::Tensor;
    use crate::linalg::ONE;

    fn coherent_cfg(alpha: f64, gamma: f64) -> ProbeConfig {
        let cutoff = FockCutoff::for_coherent(alpha * alpha);
        let ch = make_channel(ChannelKind::OneBody, gamma, cutoff).unwrap();
        ProbeConfig::new(ModelParams::unit_coupling(), OscState::Coherent(C64::new(alpha, 0.0)), vec![ch], cutoff)
    }

    #[test]
    fn prepare_examples() {
        let c = FockCutoff::with_n_max(10).unwrap();
        let s = prepare_initial(0.0, &OscState::Coherent(C64::new(0.0, 0.0)), c).unwrap();
        assert!((s.purity() - 1.0).abs() < 1e-14);
        let sx = qubit::sigma_x().tensor(&crate::fock::Operator::identity(vec![11]).unwrap());
        assert!((s.expectation(&sx).re - 1.0).abs() < 1e-14);
        let s = prepare_initial(PI, &OscState::Coherent(C64::new(0.0, 0.0)), c).unwrap();
        assert!((s.expectation(&sx).re + 1.0).abs() < 1e-14);

        let c = FockCutoff::for_thermal(1.0, 1e-12).unwrap();
        let s = prepare_initial(0.3, &OscState::Thermal(1.0), c).unwrap();
        assert!((fock::partial_trace_oscillator(&s).unwrap().purity() - 1.0).abs() < 1e-12);
        assert!((fock::partial_trace_qubit(&s).unwrap().purity() - 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn excited_probability_examples() {
        assert_eq!(excited_probability(&State::basis(vec![2], qubit::EXCITED).unwrap()).unwrap(), 1.0);
        let mixed = State::mixed(vec![2], CMatrix::identity(2, 2).scale(0.5)).unwrap();
        assert_eq!(excited_probability(&mixed).unwrap(), 0.5);
        let v = (-0.2f64).exp();
        let rho = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new((1.0 + v) / 2.0, 0.0), ONE * 0.0, ONE * 0.0, C64::new((1.0 - v) / 2.0, 0.0)],
        );
        let p = excited_probability(&State::mixed(vec![2], rho).unwrap()).unwrap();
        assert!((p - 0.9094).abs() < 1e-4);
        let wrong = State::basis(vec![3], 0).unwrap();
        assert!(matches!(excited_probability(&wrong), Err(Error::BadDims(_))));
    }

    #[test]
    fn readout_maps_equator_to_fringe() {
        for k in 0..8 {
            let d = k as f64 * 0.7;
            let p = readout_probability(&qubit::equatorial(d)).unwrap();
            assert!((p - (1.0 + d.cos()) / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn visibility_examples() {
        let grid = uniform_grid(16);
        let half: Vec<(f64, f64)> = grid.iter().map(|&d| (d, (1.0 + 0.5 * d.cos()) / 2.0)).collect();
        let (v, phase) = extract_visibility(&half).unwrap();
        assert!((v - 0.5).abs() < 1e-14);
        assert!((-v.ln() - 2f64.ln()).abs() < 1e-13);
        assert!(phase.min(TAU - phase) < 1e-12);

        let flat: Vec<(f64, f64)> = grid.iter().map(|&d| (d, 0.5)).collect();
        assert!(extract_visibility(&flat).unwrap().0 < 1e-15);

        let shifted: Vec<(f64, f64)> = grid.iter().map(|&d| (d, (1.0 + 0.8 * (d - 1.1).cos()) / 2.0)).collect();
        let (v, phase) = extract_visibility(&shifted).unwrap();
        assert!((v - 0.8).abs() < 1e-14 && (phase - 1.1).abs() < 1e-12);
    }

    #[test]
    fn grid_checks() {
        let short: Vec<(f64, f64)> = uniform_grid(6).into_iter().map(|d| (d, 0.5)).collect();
        assert!(matches!(extract_visibility(&short), Err(Error::NonUniformGrid(_))));
        let mut g = uniform_grid(10);
        g[3] += 0.01;
        let bad: Vec<(f64, f64)> = g.into_iter().map(|d| (d, 0.5)).collect();
        assert!(matches!(extract_visibility(&bad), Err(Error::NonUniformGrid(_))));
        // half a period is uniform but does not cover the circle
        let half: Vec<(f64, f64)> = (0..10).map(|k| (k as f64 * PI / 10.0, 0.5)).collect();
        assert!(matches!(extract_visibility(&half), Err(Error::NonUniformGrid(_))));
    }

    #[test]
    fn distance_examples() {
        let a = C64::new(3.0, 0.0);
        assert_eq!(distance_d(a, 1.0, 0.0), 0.0);
        assert!((distance_d(a, 1.0, PI / 2.0) - 6.0).abs() < 1e-14);
        assert!(distance_d(a, 1.0, PI) < 1e-14);
        assert!((accumulated_weight(1.0, PI) - 2.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn closed_probe_returns_full_contrast() {
        let r = run_probe(&coherent_cfg(2.0, 0.0)).unwrap();
        assert!((r.visibility - 1.0).abs() < 1e-6);
        assert!((r.disentanglement_fidelity - 1.0).abs() < 1e-8);
        assert!((r.qubit_purity - 1.0).abs() < 1e-8);
        assert_eq!(r.gamma_bar_analytic, 0.0);
        assert!(r.invariants.samples >= 20 * 16);
    }

    #[test]
    fn phase_offset_tracks_qubit_splitting() {
        let mut cfg = coherent_cfg(1.0, 0.0);
        cfg.params.omega0 = 0.1;
        let r = run_probe(&cfg).unwrap();
        assert!((r.phase_offset - (2.0 * 0.1 * PI).rem_euclid(TAU)).abs() < 1e-9);
        assert!((r.visibility - 1.0).abs() < 1e-6);
    }

    #[test]
    fn uncoupled_probe_is_inert() {
        let mut cfg = coherent_cfg(1.5, 0.0);
        cfg.params.chi = 0.0;
        assert_eq!(run_probe(&cfg).unwrap_err(), Error::ZeroChi);
        cfg.duration = Some(2.0);
        let r = run_probe(&cfg).unwrap();
        assert!((r.visibility - 1.0).abs() < 1e-10);
        assert!((r.disentanglement_fidelity - 1.0).abs() < 1e-10);
    }

    #[test]
    fn lossy_probe_roughly_matches_rate_integral() {
        let r = run_probe(&coherent_cfg(2.0, 0.005)).unwrap();
        let expected = analytic_gamma_bar(4.0, 0.005, 1.0).unwrap();
        assert!((r.gamma_bar_analytic - expected).abs() < 1e-15);
        assert!((r.gamma_bar_measured - expected).abs() / expected < 0.03);
        assert!(fringe_residual(&r.pe_samples).unwrap() < 1e-4);
    }

    #[test]
    fn mixture_paths_agree() {
        let cutoff = FockCutoff::for_coherent(4.0);
        let ch = make_channel(ChannelKind::OneBody, 0.01, cutoff).unwrap();
        let a = C64::new(2.0, 0.0);
        let osc = OscState::Mixture(vec![(0.5, a), (0.5, a * C64::from_polar(1.0, 1.3))]);
        let cfg = ProbeConfig::new(ModelParams::unit_coupling(), osc, vec![ch.clone()], cutoff);
        let cmp = mixture_probe(&cfg).unwrap();
        assert!(cmp.max_pe_difference < 1e-9);
        let single = run_probe(&ProbeConfig { osc: OscState::Coherent(a), ..cfg.clone() }).unwrap();
        assert!((cmp.direct.visibility - single.visibility).abs() < 1e-6);

        let one = ProbeConfig { osc: OscState::Mixture(vec![(1.0, a)]), ..cfg };
        let cmp1 = mixture_probe(&one).unwrap();
        assert_eq!(cmp1.components.pe_samples, single.pe_samples);
    }

    #[test]
    fn gauss_laguerre_is_exact_for_polynomials() {
        let rule = gauss_laguerre(16);
        let mut fact = 1.0;
        for k in 0..20 {
            if k > 0 {
                fact *= k as f64;
            }
            let q: f64 = rule.iter().map(|&(x, w)| w * x.powi(k)).sum();
            assert!((q - fact).abs() / fact < 1e-10, "k={k}");
        }
        let nodes = thermal_quadrature(2.0, &QuadratureOptions::default()).unwrap();
        assert!((nodes.iter().map(|n| n.0).sum::<f64>() - 1.0).abs() < 1e-14);
        let mean: f64 = nodes.iter().map(|&(w, a2)| w * a2).sum();
        assert!((mean - 2.0).abs() < 1e-9);
    }
}
