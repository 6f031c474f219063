//! Browser bindings: fringe curves, the accumulated decoherence exponent and
//! thermal visibilities. The plain functions are usable natively; the
//! `#[wasm_bindgen]` wrappers only translate errors.

use std::f64::consts::PI;

use bec_probe::dissipation::{make_channel, ChannelKind};
use bec_probe::fock::{FockCutoff, OscState};
use bec_probe::model::ModelParams;
use bec_probe::propagate::{analytic_gamma_bar, analytic_thermal_visibility};
use bec_probe::protocol::{accumulated_weight, distance_d, run_probe, uniform_grid, ProbeConfig};
use num_complex::Complex64 as C64;
use wasm_bindgen::prelude::*;

/// Largest mean occupation accepted by the demo; keeps a single run well
/// under a second in the browser.
pub const MAX_OCCUPATION: f64 = 16.0;

fn check_inputs(mean: f64, gamma: f64, dephasing: f64) -> bec_probe::Result<()> {
    let bad = |m: String| Err(bec_probe::Error::InvalidParameter(m));
    if !(0.0..=MAX_OCCUPATION).contains(&mean) {
        return bad(format!("mean occupation must lie in [0, {MAX_OCCUPATION}], got {mean}"));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) || !(dephasing >= 0.0 && dephasing.is_finite()) {
        return bad(format!("rates must be finite and >= 0, got {gamma}, {dephasing}"));
    }
    Ok(())
}

#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Fringe {
    deltas: Vec<f64>,
    pe: Vec<f64>,
    visibility: f64,
    gamma_bar_measured: f64,
    gamma_bar_analytic: f64,
    n_max: usize,
}

#[wasm_bindgen]
impl Fringe {
    #[wasm_bindgen(getter)]
    pub fn deltas(&self) -> Vec<f64> {
        self.deltas.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn pe(&self) -> Vec<f64> {
        self.pe.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn visibility(&self) -> f64 {
        self.visibility
    }
    #[wasm_bindgen(getter, js_name = gammaBarMeasured)]
    pub fn gamma_bar_measured(&self) -> f64 {
        self.gamma_bar_measured
    }
    #[wasm_bindgen(getter, js_name = gammaBarAnalytic)]
    pub fn gamma_bar_analytic(&self) -> f64 {
        self.gamma_bar_analytic
    }
    #[wasm_bindgen(getter, js_name = nMax)]
    pub fn n_max(&self) -> usize {
        self.n_max
    }
}

fn probe(osc: OscState, cutoff: FockCutoff, gamma: f64, dephasing: f64, points: usize) -> bec_probe::Result<Fringe> {
    let mut channels = vec![make_channel(ChannelKind::OneBody, gamma, cutoff)?];
    if dephasing > 0.0 {
        channels.push(make_channel(ChannelKind::Dephasing, dephasing, cutoff)?);
    }
    let mut cfg = ProbeConfig::new(ModelParams::unit_coupling(), osc, channels, cutoff);
    cfg.delta_grid = uniform_grid(points);
    let r = run_probe(&cfg)?;
    Ok(Fringe {
        deltas: r.pe_samples.iter().map(|s| s.0).collect(),
        pe: r.pe_samples.iter().map(|s| s.1).collect(),
        visibility: r.visibility,
        gamma_bar_measured: r.gamma_bar_measured,
        gamma_bar_analytic: r.gamma_bar_analytic,
        n_max: r.metadata.n_max,
    })
}

/// Simulated `P_e(delta)` for a coherent input with `|a|^2 = alpha_sq`, chi = 1.
pub fn coherent_fringe(alpha_sq: f64, gamma: f64, dephasing: f64, points: usize) -> bec_probe::Result<Fringe> {
    check_inputs(alpha_sq, gamma, dephasing)?;
    probe(
        OscState::Coherent(C64::new(alpha_sq.sqrt(), 0.0)),
        FockCutoff::for_coherent(alpha_sq),
        gamma,
        dephasing,
        points,
    )
}

/// Simulated `P_e(delta)` for a thermal input with mean occupation `nbar`.
pub fn thermal_fringe(nbar: f64, gamma: f64, points: usize) -> bec_probe::Result<Fringe> {
    check_inputs(nbar, gamma, 0.0)?;
    probe(OscState::Thermal(nbar), FockCutoff::for_thermal(nbar, 1e-12)?, gamma, 0.0, points)
}

/// Interleaved `[t, D(t), Gamma |a|^2 int_0^t D^2/|a|^2]` over `t in [0, pi]`, chi = 1.
pub fn decoherence_curve(alpha_sq: f64, gamma: f64, steps: usize) -> Vec<f64> {
    let alpha = C64::new(alpha_sq.max(0.0).sqrt(), 0.0);
    let steps = steps.max(1);
    (0..=steps)
        .flat_map(|k| {
            let t = PI * k as f64 / steps as f64;
            [t, distance_d(alpha, 1.0, t), gamma * alpha_sq * accumulated_weight(1.0, t)]
        })
        .collect()
}

/// Interleaved `[nbar, V_thermal, V_coherent]` for `nbar in [0, nbar_max]`,
/// both from the closed forms at chi = 1.
pub fn visibility_curves(nbar_max: f64, gamma: f64, steps: usize) -> bec_probe::Result<Vec<f64>> {
    let steps = steps.max(1);
    let mut out = Vec::with_capacity(3 * (steps + 1));
    for k in 0..=steps {
        let n = nbar_max * k as f64 / steps as f64;
        out.extend([n, analytic_thermal_visibility(n, gamma, 1.0)?, (-analytic_gamma_bar(n, gamma, 1.0)?).exp()]);
    }
    Ok(out)
}

fn js(e: bec_probe::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = coherentFringe)]
pub fn coherent_fringe_js(alpha_sq: f64, gamma: f64, dephasing: f64, points: usize) -> Result<Fringe, JsError> {
    coherent_fringe(alpha_sq, gamma, dephasing, points).map_err(js)
}

#[wasm_bindgen(js_name = thermalFringe)]
pub fn thermal_fringe_js(nbar: f64, gamma: f64, points: usize) -> Result<Fringe, JsError> {
    thermal_fringe(nbar, gamma, points).map_err(js)
}

#[wasm_bindgen(js_name = decoherenceCurve)]
pub fn decoherence_curve_js(alpha_sq: f64, gamma: f64, steps: usize) -> Vec<f64> {
    decoherence_curve(alpha_sq, gamma, steps)
}

#[wasm_bindgen(js_name = visibilityCurves)]
pub fn visibility_curves_js(nbar_max: f64, gamma: f64, steps: usize) -> Result<Vec<f64>, JsError> {
    visibility_curves(nbar_max, gamma, steps).map_err(js)
}
