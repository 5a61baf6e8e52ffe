//! Phase-modulation model of reflection on the vibrating mirror.
//!
//! Along the classical path the modulation adds a phase `u sin(ωt₀ − φ)` to the
//! reflected wave, so the outgoing wave splits into sidebands of energy
//! `E_i + nω` with amplitudes `J_n(u)`.

mod bessel;
mod validity;

pub use bessel::{bessel_j, bessel_j_orders, MAX_ARG, MAX_ORDER};
pub use validity::{validity_report, Margin, Regime, ValidityReport};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::mirror::MirrorConfig;
use crate::units::ScaledState;
use crate::C64;

/// `β(x) = (πx/2)/sinh(πx/2)`, with `β(0) = 1`.
pub fn beta(x: f64) -> f64 {
    ln_beta(x).exp()
}

/// `ln β(x)`, finite for arbitrarily large `|x|`.
pub fn ln_beta(x: f64) -> f64 {
    let y = 0.5 * std::f64::consts::PI * x.abs();
    if y < 1e-4 {
        let y2 = y * y;
        return (1.0 - y2 / 6.0 + 7.0 * y2 * y2 / 360.0).ln();
    }
    y.ln() - crate::born::ln_sinh(y)
}

/// `u = ε P_i β(Q)`.
pub fn modulation_index(p_i: f64, q_mod: f64, epsilon: f64) -> Result<f64> {
    if !(p_i > 0.0 && p_i.is_finite()) {
        return domain(format!("incident momentum must be positive, got {p_i}"));
    }
    if !(q_mod >= 0.0 && q_mod.is_finite()) {
        return domain(format!("Q must be non-negative, got {q_mod}"));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return domain(format!("modulation depth must lie in [0, 1], got {epsilon}"));
    }
    Ok(epsilon * p_i * beta(q_mod))
}

/// Index of an ideal mirror vibrating with amplitude `z0`: `u = 2 P_i z0`.
pub fn hard_mirror_index(p_i: f64, z0: f64) -> Result<f64> {
    if !(z0 >= 0.0) {
        return domain(format!("vibration amplitude must be non-negative, got {z0}"));
    }
    Ok(2.0 * p_i * z0)
}

/// How sideband `n` is assigned a final momentum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentumRule {
    /// `P_i + n q`
    Linearized,
    /// `sqrt(P_i² + 2 n P_i Q)`, i.e. energy `E_i + nω`
    Exact,
}

/// Complex amplitudes of the reflected sidebands `n = −N ..= N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidebandSpectrum {
    pub orders: Vec<i32>,
    pub amplitudes: Vec<C64>,
    pub momentum_rule: MomentumRule,
    /// Incident momentum `P_i`.
    pub carrier: f64,
    /// Sideband spacing `q`.
    pub spacing: f64,
    /// Modulation index.
    pub u: f64,
    pub xi_eff: f64,
    pub phi: f64,
}

impl SidebandSpectrum {
    pub fn n_max(&self) -> i32 {
        *self.orders.last().unwrap_or(&0)
    }

    pub fn amplitude(&self, n: i32) -> Option<C64> {
        let n_max = self.n_max();
        if n.abs() > n_max {
            return None;
        }
        Some(self.amplitudes[(n + n_max) as usize])
    }

    pub fn weight(&self, n: i32) -> f64 {
        self.amplitude(n).map_or(0.0, |a| a.norm_sqr())
    }

    pub fn total_weight(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn with_rule(mut self, rule: MomentumRule) -> Self {
        self.momentum_rule = rule;
        self
    }

    /// Final momentum of order `n` under the spectrum's own rule.
    pub fn momentum(&self, n: i32) -> Result<f64> {
        self.momentum_with(n, self.momentum_rule)
    }

    pub fn momentum_with(&self, n: i32, rule: MomentumRule) -> Result<f64> {
        match rule {
            MomentumRule::Linearized => Ok(self.carrier + n as f64 * self.spacing),
            MomentumRule::Exact => {
                crate::born::sideband_momenta_exact(self.carrier, self.spacing, n)
            }
        }
    }
}

/// Default truncation `ceil(u) + 15`.
pub fn default_order(u: f64) -> usize {
    u.ceil() as usize + 15
}

/// `a_n = J_n(u) e^{−i n q ξ_eff} e^{i n φ}` for `|n| ≤ n_max`.
///
/// `ε`, `φ` and `V₀` come from `cfg`; `P_i`, `Q` and `q` from `state`. When the
/// state carries no `ξ_eff` it is computed from `cfg.v0`.
pub fn sideband_amplitudes(
    state: &ScaledState,
    cfg: &MirrorConfig,
    n_max: Option<usize>,
) -> Result<SidebandSpectrum> {
    cfg.validate()?;
    let u = modulation_index(state.p_i, state.q_mod, cfg.epsilon)?;
    let n_max = n_max.unwrap_or_else(|| default_order(u));
    if (n_max as f64) < u.ceil() + 10.0 {
        return Err(Error::Precondition(format!(
            "truncation order {n_max} too small for modulation index {u:.3}"
        )));
    }
    if n_max > MAX_ORDER as usize || u > MAX_ARG {
        return domain(format!("modulation index {u:.3} beyond supported range"));
    }
    let xi = state
        .xi_eff
        .unwrap_or_else(|| cfg.xi_eff(state.energy()));
    let js = bessel_j_orders(n_max, u);
    let n_max_i = n_max as i32;
    let orders: Vec<i32> = (-n_max_i..=n_max_i).collect();
    let amplitudes = orders
        .iter()
        .map(|&n| {
            let m = n.unsigned_abs() as usize;
            let j = if n < 0 && m % 2 == 1 { -js[m] } else { js[m] };
            let phase = n as f64 * (cfg.phi - state.spacing * xi);
            C64::from_polar(j, phase)
        })
        .collect();
    Ok(SidebandSpectrum {
        orders,
        amplitudes,
        momentum_rule: MomentumRule::Exact,
        carrier: state.p_i,
        spacing: state.spacing,
        u,
        xi_eff: xi,
        phi: cfg.phi,
    })
}

/// Largest velocity change a classical atom can pick up in one bounce.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityChange {
    /// `Δv_max / v_i = ε Q β(Q)`
    pub relative: f64,
    /// `Δv_max = ε ω β(Q)` in scaled velocity units.
    pub absolute: f64,
    /// Sidebands around `n ≈ ±u` carry most of the weight.
    pub dominant_order: f64,
}

pub fn max_velocity_change(state: &ScaledState, cfg: &MirrorConfig) -> Result<VelocityChange> {
    let u = modulation_index(state.p_i, state.q_mod, cfg.epsilon)?;
    let relative = cfg.epsilon * state.q_mod * beta(state.q_mod);
    Ok(VelocityChange {
        relative,
        absolute: relative * state.p_i,
        dominant_order: u,
    })
}
