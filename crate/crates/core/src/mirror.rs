//! The modulated evanescent-wave potential and classical bounces on it.
//!
//! `V(z, t) = V₀ e^{-2z} (1 + ε sin(ωt − φ))` for `z ≥ 0`, zero below the
//! dielectric surface at `z = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::units::{effective_mirror_position, ScaledState};

/// `ln(V₀/E_i)` used when no explicit light shift is given. Puts the classical
/// turning point at `z = 5`.
pub const DEFAULT_LOG_V0_OVER_E: f64 = 10.0;

/// Static and modulated parameters of the mirror potential (scaled units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MirrorConfig {
    /// Light shift at the surface `z = 0`.
    pub v0: f64,
    /// Modulation depth in `[0, 1]`.
    pub epsilon: f64,
    /// Modulation angular frequency.
    pub omega: f64,
    /// Modulation phase: the potential oscillates as `sin(ωt − φ)`.
    pub phi: f64,
}

impl MirrorConfig {
    pub fn new(v0: f64, epsilon: f64, omega: f64, phi: f64) -> Result<Self> {
        let cfg = Self {
            v0,
            epsilon,
            omega,
            phi,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Mirror for an incident atom: `V₀ = e^{10} E_i`, `ω = Q/τ`, `φ = 0`.
    pub fn for_incident(state: &ScaledState, epsilon: f64) -> Result<Self> {
        Self::new(
            DEFAULT_LOG_V0_OVER_E.exp() * state.energy(),
            epsilon,
            state.omega(),
            0.0,
        )
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.epsilon = epsilon;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v0 > 0.0 && self.v0.is_finite()) {
            return domain(format!("V0 must be positive, got {}", self.v0));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return domain(format!("modulation depth must lie in [0, 1], got {}", self.epsilon));
        }
        if !(self.omega >= 0.0 && self.omega.is_finite()) {
            return domain(format!("omega must be non-negative, got {}", self.omega));
        }
        if !self.phi.is_finite() {
            return domain("modulation phase must be finite");
        }
        Ok(())
    }

    /// `1 + ε sin(ωt − φ)`
    #[inline]
    pub fn modulation(&self, t: f64) -> f64 {
        1.0 + self.epsilon * (self.omega * t - self.phi).sin()
    }

    /// `∫ m(t) dt` over `[a, b]`.
    pub fn modulation_integral(&self, a: f64, b: f64) -> f64 {
        if self.epsilon == 0.0 {
            return b - a;
        }
        if self.omega == 0.0 {
            return (b - a) * self.modulation(a);
        }
        // cos x − cos y = 2 sin((x+y)/2) sin((y−x)/2)
        let mid = self.omega * 0.5 * (a + b) - self.phi;
        let half = 0.5 * self.omega * (b - a);
        (b - a) + 2.0 * self.epsilon / self.omega * mid.sin() * half.sin()
    }

    /// Classical turning point `½ ln(V₀/E)` in the unmodulated potential.
    pub fn turning_point(&self, energy: f64) -> f64 {
        0.5 * (self.v0 / energy).ln()
    }

    pub fn xi_eff(&self, energy: f64) -> f64 {
        effective_mirror_position(self.v0, energy)
    }
}

/// Potential energy at height `z` and time `t`.
#[inline]
pub fn potential(z: f64, t: f64, cfg: &MirrorConfig) -> f64 {
    if z < 0.0 {
        0.0
    } else {
        cfg.v0 * (-2.0 * z).exp() * cfg.modulation(t)
    }
}

/// Position of the ideal (unmodulated) mirror that the modulated exponential
/// is equivalent to: `z_m(t) = ½ ln(1 + ε sin(ωt − φ))`.
pub fn equivalent_displacement(cfg: &MirrorConfig, t: f64) -> Result<f64> {
    let m = cfg.modulation(t);
    if m <= 0.0 {
        return domain(format!(
            "mirror vanishes at t = {t}: 1 + ε sin(ωt − φ) = {m}, displacement is −∞"
        ));
    }
    Ok(0.5 * m.ln())
}

/// Reflection in the unmodulated potential,
/// `z_c(t) = ½ ln[(V₀/E) cosh²((t − t₀)/τ)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalTrajectory {
    /// Time of the classical turning point.
    pub t0: f64,
    /// Incident energy.
    pub e_i: f64,
    /// Interaction time `1/P_i`.
    pub tau: f64,
    pub v0: f64,
}

impl ClassicalTrajectory {
    pub fn momentum(&self) -> f64 {
        (2.0 * self.e_i).sqrt()
    }

    pub fn position(&self, t: f64) -> f64 {
        let s = (t - self.t0) / self.tau;
        // ln cosh(s) without overflow for large |s|
        let a = s.abs();
        let ln_cosh = a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2;
        0.5 * (self.v0 / self.e_i).ln() + ln_cosh
    }

    pub fn velocity(&self, t: f64) -> f64 {
        self.momentum() * ((t - self.t0) / self.tau).tanh()
    }

    pub fn turning_point(&self) -> f64 {
        0.5 * (self.v0 / self.e_i).ln()
    }

    pub fn xi_eff(&self) -> f64 {
        effective_mirror_position(self.v0, self.e_i)
    }

    /// Free-flight asymptote `ξ_eff + P_i |t − t₀|`.
    pub fn asymptote(&self, t: f64) -> f64 {
        self.xi_eff() + self.momentum() * (t - self.t0).abs()
    }

    /// `V₀ e^{-2 z_c(t)} = E_i / cosh²((t − t₀)/τ)`.
    pub fn potential_along(&self, t: f64) -> f64 {
        let c = ((t - self.t0) / self.tau).cosh();
        self.e_i / (c * c)
    }
}

pub fn classical_trajectory(e_i: f64, t0: f64, cfg: &MirrorConfig) -> Result<ClassicalTrajectory> {
    if !(e_i > 0.0 && e_i.is_finite()) {
        return domain(format!("incident energy must be positive, got {e_i}"));
    }
    Ok(ClassicalTrajectory {
        t0,
        e_i,
        tau: 1.0 / (2.0 * e_i).sqrt(),
        v0: cfg.v0,
    })
}

/// Settings for [`classical_bounce_ode`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeParams {
    /// RK4 steps per interaction time `τ`, further divided by `Q` when `Q > 1`.
    pub steps_per_tau: f64,
    /// Start (and finish) this far above `ξ_eff`, in units of `1/κ`.
    pub start_offset: f64,
    /// Give up after this many times the expected round-trip duration.
    pub time_budget: f64,
}

impl Default for OdeParams {
    fn default() -> Self {
        Self {
            steps_per_tau: 200.0,
            start_offset: 8.0,
            time_budget: 10.0,
        }
    }
}

/// Outcome of one classical bounce on the modulated potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BounceKick {
    /// Incident energy `P_i²/2`.
    pub e_i: f64,
    /// Final minus initial energy, measured far from the mirror.
    pub delta_e: f64,
    /// Outgoing minus incoming speed.
    pub delta_v: f64,
    /// Time at which the velocity changed sign.
    pub t0: f64,
    /// Modulation phase `ωt₀ − φ` at the actual turning time.
    pub phase: f64,
}

impl BounceKick {
    pub fn relative_energy_change(&self) -> f64 {
        self.delta_e / self.e_i
    }

    pub fn relative_velocity_change(&self) -> f64 {
        self.delta_v / (2.0 * self.e_i).sqrt()
    }
}

fn rk4_step<F>(f: &F, t: f64, y: [f64; 2], h: f64) -> [f64; 2]
where
    F: Fn(f64, [f64; 2]) -> [f64; 2],
{
    let add = |y: [f64; 2], k: [f64; 2], s: f64| [y[0] + s * k[0], y[1] + s * k[1]];
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, add(y, k1, 0.5 * h));
    let k3 = f(t + 0.5 * h, add(y, k2, 0.5 * h));
    let k4 = f(t + h, add(y, k3, h));
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Integrate `z̈ = 2V₀ e^{-2z}(1 + ε sin(ωt − φ))` through one bounce.
///
/// The atom starts at `ξ_eff + start_offset` moving down with asymptotic
/// momentum `p_i`. `cfg.phi` is overridden so that the modulation phase at the
/// unperturbed turning time equals `t0_phase`; the phase at the actual turning
/// time is reported in the result.
pub fn classical_bounce_ode(
    p_i: f64,
    cfg: &MirrorConfig,
    t0_phase: f64,
    params: &OdeParams,
) -> Result<BounceKick> {
    cfg.validate()?;
    if !(p_i > 0.0 && p_i.is_finite()) {
        return domain(format!("incident momentum must be positive, got {p_i}"));
    }
    let e_i = 0.5 * p_i * p_i;
    let tau = 1.0 / p_i;
    let q_mod = cfg.omega * tau;
    let z_start = cfg.xi_eff(e_i) + params.start_offset;
    let v_static = |z: f64| cfg.v0 * (-2.0 * z).exp();
    if v_static(z_start) >= e_i {
        return domain("start position lies inside the classically forbidden region");
    }

    // unperturbed turning time for this start point
    let cosh_arg = (e_i * (2.0 * z_start).exp() / cfg.v0).sqrt();
    let t0_pred = tau * cosh_arg.acosh();
    let phi = cfg.omega * t0_pred - t0_phase;
    let force = |t: f64, y: [f64; 2]| {
        let m = 1.0 + cfg.epsilon * (cfg.omega * t - phi).sin();
        [y[1], 2.0 * v_static(y[0]) * m]
    };

    let h = tau / params.steps_per_tau * (1.0f64).min(1.0 / q_mod.max(f64::MIN_POSITIVE));
    let budget = params.time_budget * 2.0 * t0_pred.max(tau);
    let mut t = 0.0;
    let mut y = [z_start, -(2.0 * (e_i - v_static(z_start))).sqrt()];
    let mut t0_actual = None;
    loop {
        let next = rk4_step(&force, t, y, h);
        if !(next[0].is_finite() && next[1].is_finite()) {
            return Err(Error::Integration(format!("non-finite state at t = {t}")));
        }
        if y[1] < 0.0 && next[1] >= 0.0 {
            // linear interpolation of the velocity zero crossing
            let frac = -y[1] / (next[1] - y[1]);
            t0_actual = Some(t + frac * h);
        }
        t += h;
        y = next;
        if t0_actual.is_some() && y[0] >= z_start {
            break;
        }
        if t > budget {
            return Err(Error::Integration(format!(
                "atom did not return to z = {z_start:.3} within t = {budget:.4}"
            )));
        }
    }

    let e_f = 0.5 * y[1] * y[1] + v_static(y[0]);
    let t0 = t0_actual.expect("loop exits only after the turning point");
    Ok(BounceKick {
        e_i,
        delta_e: e_f - e_i,
        delta_v: (2.0 * e_f).sqrt() - p_i,
        t0,
        phase: (cfg.omega * t0 - phi).rem_euclid(2.0 * std::f64::consts::PI),
    })
}
