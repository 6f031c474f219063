//! Lindblad channels for condensate atom loss and phase damping.
//!
//! Every channel acts as `c [2 J rho J+ - J+J rho - rho J+J]` with
//!
//! | kind      | jump  | c        |
//! |-----------|-------|----------|
//! | OneBody   | d     | Gamma    |
//! | ThreeBody | d^3   | gamma3/6 |
//! | Dephasing | d+d   | Gamma_p  |

use crate::error::{Error, Result};
use crate::fock::{self, FockCutoff, Operator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    OneBody,
    ThreeBody,
    Dephasing,
}

impl ChannelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ChannelKind::OneBody => "one_body",
            ChannelKind::ThreeBody => "three_body",
            ChannelKind::Dephasing => "dephasing",
        }
    }
}

impl std::str::FromStr for ChannelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one_body" | "onebody" | "one-body" => Ok(ChannelKind::OneBody),
            "three_body" | "threebody" | "three-body" => Ok(ChannelKind::ThreeBody),
            "dephasing" | "phase_damping" => Ok(ChannelKind::Dephasing),
            other => Err(Error::InvalidParameter(format!("unknown channel kind '{other}'"))),
        }
    }
}

/// A jump operator on the oscillator together with its rate.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladChannel {
    kind: ChannelKind,
    rate: f64,
    jump: Operator,
}

impl LindbladChannel {
    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    /// The rate as specified: Gamma, gamma3 or Gamma_p.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn jump(&self) -> &Operator {
        &self.jump
    }

    /// Prefactor multiplying `[2 J rho J+ - {J+J, rho}]`.
    pub fn coefficient(&self) -> f64 {
        match self.kind {
            ChannelKind::ThreeBody => self.rate / 6.0,
            ChannelKind::OneBody | ChannelKind::Dephasing => self.rate,
        }
    }
}

pub fn make_channel(kind: ChannelKind, rate: f64, cutoff: FockCutoff) -> Result<LindbladChannel> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::NegativeRate(rate));
    }
    let a = fock::annihilator(cutoff);
    let jump = match kind {
        ChannelKind::OneBody => a,
        ChannelKind::ThreeBody => a.pow(3),
        ChannelKind::Dephasing => fock::number(cutoff),
    };
    Ok(LindbladChannel { kind, rate, jump })
}

/// Effective one-body rate `3 N^2 gamma3 / 2` of three-body loss in a
/// large condensate.
pub fn gamma_eff_three_body(n_atoms: f64, gamma3: f64) -> f64 {
    1.5 * n_atoms * n_atoms * gamma3
}

/// Loss coefficients for an `N`-atom condensate of volume `V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossRateCatalog {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub n_atoms: f64,
    pub volume: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossRates {
    pub one_body: f64,
    pub two_body: f64,
    pub three_body: f64,
}

/// `K1 N`, `K2 N^2 / V`, `K3 N^3 / V^2`.
pub fn loss_rates(cat: &LossRateCatalog) -> Result<LossRates> {
    if !(cat.volume > 0.0) {
        return Err(Error::NonPositiveVolume(cat.volume));
    }
    for (name, v) in [("K1", cat.k1), ("K2", cat.k2), ("K3", cat.k3), ("N", cat.n_atoms)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {v}")));
        }
    }
    let n = cat.n_atoms;
    let v = cat.volume;
    Ok(LossRates { one_body: cat.k1 * n, two_body: cat.k2 * n * n / v, three_body: cat.k3 * n * n * n / (v * v) })
}
