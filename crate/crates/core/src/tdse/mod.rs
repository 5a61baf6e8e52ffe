//! Direct integration of the Schrödinger equation for a wavepacket bouncing on
//! the modulated mirror.

mod grid;
mod propagate;
mod spectrum;

pub use grid::{GridSpec, DEFAULT_DZ, DT_OVER_DZ2, SAMPLES_PER_WAVELENGTH};
pub use propagate::{
    evolve, evolve_with, static_potential, EvolveOptions, EvolveReport, Hamiltonian,
    NORM_DRIFT_LIMIT,
};
pub use spectrum::{
    extract_sidebands, fourier_at, momentum_spectrum, predicted_spectrum, require_free,
    MomentumSpectrum, PacketParams, PredictedSpectrum, SidebandMeasurement, SidebandTable,
    DEFAULT_PADDING,
};

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::born::sideband_momenta_exact;
use crate::error::{Error, Result};
use crate::mirror::{MirrorConfig, DEFAULT_LOG_V0_OVER_E};
use crate::units::ScaledState;
use crate::C64;

/// Probability allowed outside the box when a packet is created.
pub const TRUNCATION_LIMIT: f64 = 1e-8;

/// Wavefunction samples on a grid at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavepacketState {
    pub grid: GridSpec,
    pub psi: Vec<C64>,
    pub t: f64,
}

impl WavepacketState {
    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dz()
    }

    pub fn density(&self) -> Vec<f64> {
        self.psi.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn mean_position(&self) -> f64 {
        let dz = self.grid.dz();
        let s: f64 = self
            .psi
            .iter()
            .enumerate()
            .map(|(j, a)| self.grid.z(j) * a.norm_sqr())
            .sum();
        s * dz / self.norm()
    }

    /// Probability below `z`.
    pub fn probability_below(&self, z: f64) -> f64 {
        let dz = self.grid.dz();
        (0..self.grid.n_points)
            .take_while(|&j| self.grid.z(j) < z)
            .map(|j| self.psi[j].norm_sqr())
            .sum::<f64>()
            * dz
    }

    /// CSV with columns `z,re,im,abs2`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("z,re,im,abs2\n");
        for (j, a) in self.psi.iter().enumerate() {
            let _ = writeln!(s, "{},{},{},{}", self.grid.z(j), a.re, a.im, a.norm_sqr());
        }
        s
    }
}

impl MomentumSpectrum {
    /// CSV with columns `p,re,im,abs2`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("p,re,im,abs2\n");
        for (p, a) in self.p.iter().zip(&self.amplitude) {
            let _ = writeln!(s, "{},{},{},{}", p, a.re, a.im, a.norm_sqr());
        }
        s
    }
}

/// Minimum-uncertainty packet centred at `z_i` with position spread `dz_i`,
/// moving towards the mirror with momentum `p_i`.
pub fn init_gaussian(z_i: f64, dz_i: f64, p_i: f64, grid: GridSpec) -> Result<WavepacketState> {
    grid.validate()?;
    if !(dz_i > 0.0) || !(p_i > 0.0) {
        return Err(Error::Config(format!(
            "need positive width and momentum, got dz_i = {dz_i}, p_i = {p_i}"
        )));
    }
    if !(z_i - 3.0 * dz_i > 0.0) {
        return Err(Error::Config(format!(
            "packet at z_i = {z_i} with width {dz_i} overlaps the surface"
        )));
    }
    let tail = |d: f64| 0.5 * erfc(d / (std::f64::consts::SQRT_2 * dz_i));
    let outside = tail(grid.z_max - z_i) + tail(z_i - grid.z_min);
    if outside > TRUNCATION_LIMIT {
        return Err(Error::Config(format!(
            "packet probability {outside:.2e} lies outside the box [{}, {}]",
            grid.z_min, grid.z_max
        )));
    }
    let mut psi: Vec<C64> = (0..grid.n_points)
        .map(|j| {
            let x = grid.z(j) - z_i;
            C64::from_polar((-x * x / (4.0 * dz_i * dz_i)).exp(), -p_i * x)
        })
        .collect();
    let last = grid.n_points - 1;
    psi[0] = C64::new(0.0, 0.0);
    psi[last] = C64::new(0.0, 0.0);
    let mut state = WavepacketState { grid, psi, t: 0.0 };
    let scale = 1.0 / state.norm().sqrt();
    state.psi.iter_mut().for_each(|a| *a *= scale);
    Ok(state)
}

/// Width of the smooth edge used by [`clip_below`].
pub const CLIP_WIDTH: f64 = 0.25;

/// Remove the part of the packet below `z_c` with a `tanh` edge and
/// renormalize. Returns the probability removed.
///
/// A Gaussian started near the mirror has a tail inside the barrier that the
/// grid cannot propagate out again; clipping it at `ξ_eff` keeps that tail
/// from lingering next to the surface.
pub fn clip_below(state: &mut WavepacketState, z_c: f64) -> f64 {
    let g = state.grid;
    let before = state.norm();
    for (j, a) in state.psi.iter_mut().enumerate() {
        *a *= 0.5 * (1.0 + ((g.z(j) - z_c) / CLIP_WIDTH).tanh());
    }
    let n = state.norm();
    state.psi.iter_mut().for_each(|a| *a *= (before / n).sqrt());
    1.0 - n / before
}

/// Everything needed to simulate one bounce.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BounceConfig {
    pub p_i: f64,
    pub q_mod: f64,
    pub epsilon: f64,
    pub phi: f64,
    /// `ln(V₀/E_i)`
    pub log_v0: f64,
    pub z_i: f64,
    pub dz_i: f64,
    pub grid: GridSpec,
    /// Time after the classical return to `z_i`, in units of `τ`.
    pub settle_tau: f64,
    /// Highest sideband the grid must resolve.
    pub n_keep: i32,
}

impl Default for BounceConfig {
    fn default() -> Self {
        Self {
            p_i: 100.0,
            q_mod: 4.2,
            epsilon: 1.0,
            phi: 0.0,
            log_v0: DEFAULT_LOG_V0_OVER_E,
            z_i: 13.0,
            dz_i: 2.0,
            grid: GridSpec::with_spacing(-5.0, 60.0, DEFAULT_DZ),
            settle_tau: 8.0,
            n_keep: 3,
        }
    }
}

impl BounceConfig {
    /// Momentum spread `1/(2 δz)`.
    pub fn dp_i(&self) -> f64 {
        0.5 / self.dz_i
    }

    /// The same physical mirror seen by an atom arriving with energy
    /// `E_i + nω`: `P_i → p_n`, `Q → ω/p_n`, `ln(V₀/E)` shifted to match.
    pub fn raised(&self, n: i32) -> Result<Self> {
        let p = sideband_momenta_exact(self.p_i, self.q_mod, n)?;
        let omega = self.q_mod * self.p_i;
        Ok(Self {
            p_i: p,
            q_mod: omega / p,
            log_v0: self.log_v0 - 2.0 * (p / self.p_i).ln(),
            ..*self
        })
    }

    /// Same packet and grid with the modulation switched off.
    pub fn reference(&self) -> Self {
        Self {
            epsilon: 0.0,
            ..*self
        }
    }

    pub fn scaled(&self) -> Result<ScaledState> {
        ScaledState::new(self.p_i, self.q_mod)
    }

    pub fn mirror(&self) -> Result<MirrorConfig> {
        let s = self.scaled()?;
        MirrorConfig::new(self.log_v0.exp() * s.energy(), self.epsilon, s.omega(), self.phi)
    }

    /// `2(z_i − ξ_eff)/P_i + settle·τ`
    pub fn t_end(&self) -> Result<f64> {
        let s = self.scaled()?;
        let m = self.mirror()?;
        Ok(2.0 * (self.z_i - m.xi_eff(s.energy())) / self.p_i + self.settle_tau * s.tau)
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.scaled()?;
        let m = self.mirror()?;
        self.grid.validate()?;
        let p_max = sideband_momenta_exact(self.p_i, self.q_mod, self.n_keep)?;
        self.grid.check_resolution(p_max)?;
        let turning = m.turning_point(s.energy());
        if !(self.z_i - 3.0 * self.dz_i > turning) {
            return Err(Error::Config(format!(
                "packet start z_i - 3 dz_i = {} is not above the turning point {turning:.3}",
                self.z_i - 3.0 * self.dz_i
            )));
        }
        // the outgoing packet must still fit in the box at t_end
        let t = self.t_end()?;
        let width = self.dz_i * (1.0 + (t / (2.0 * self.dz_i * self.dz_i)).powi(2)).sqrt();
        let centre = self.z_i + self.settle_tau;
        let outside = 0.5 * erfc((self.grid.z_max - centre) / (std::f64::consts::SQRT_2 * width));
        if outside > TRUNCATION_LIMIT {
            return Err(Error::Config(format!(
                "packet ends near z = {centre:.2} with width {width:.2}; {outside:.2e} of it would reach z_max = {}",
                self.grid.z_max
            )));
        }
        Ok(())
    }
}

/// Result of [`run_bounce`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BounceRun {
    pub config: BounceConfig,
    pub mirror: MirrorConfig,
    pub state: WavepacketState,
    pub report: EvolveReport,
    /// Classical turning time of the packet centre.
    pub t0: f64,
    /// Modulation phase `ωt₀ − φ` at the turning time, in `[0, 2π)`.
    pub bounce_phase: f64,
    /// `⟨V⟩/⟨H⟩` at the end of the run.
    pub potential_fraction: f64,
}

impl BounceRun {
    /// Momentum distribution; fails if the packet still feels the mirror.
    pub fn spectrum(&self, padding: usize) -> Result<MomentumSpectrum> {
        require_free(self.potential_fraction)?;
        Ok(momentum_spectrum(&self.state, padding))
    }

    /// Keep evolving to `t_end`.
    pub fn continue_to(&self, t_end: f64) -> Result<BounceRun> {
        let (state, report) = evolve_with(&self.state, &self.mirror, t_end, &EvolveOptions::default())?;
        let ham = Hamiltonian::new(&state.grid, &self.mirror);
        Ok(BounceRun {
            potential_fraction: ham.potential_fraction(&state.psi, state.t),
            state,
            report,
            ..self.clone()
        })
    }

    /// Sideband table against an unmodulated reference run.
    pub fn sidebands(&self, reference: &BounceRun, orders: &[i32]) -> Result<SidebandTable> {
        require_free(self.potential_fraction)?;
        require_free(reference.potential_fraction)?;
        extract_sidebands(
            &self.state,
            &reference.state,
            self.config.p_i,
            self.config.q_mod,
            orders,
        )
    }
}

/// Prepare the packet, integrate through one bounce and let it fly clear.
pub fn run_bounce(cfg: &BounceConfig) -> Result<BounceRun> {
    cfg.validate()?;
    let s = cfg.scaled()?;
    let mirror = cfg.mirror()?;
    let mut psi0 = init_gaussian(cfg.z_i, cfg.dz_i, cfg.p_i, cfg.grid)?;
    clip_below(&mut psi0, mirror.xi_eff(s.energy()));
    let t_end = cfg.t_end()?;
    let (state, report) = evolve_with(&psi0, &mirror, t_end, &EvolveOptions::default())?;
    let t0 = s.tau * (s.energy() * (2.0 * cfg.z_i).exp() / mirror.v0).sqrt().acosh();
    let ham = Hamiltonian::new(&state.grid, &mirror);
    Ok(BounceRun {
        config: *cfg,
        mirror,
        potential_fraction: ham.potential_fraction(&state.psi, state.t),
        state,
        report,
        t0,
        bounce_phase: (mirror.omega * t0 - cfg.phi).rem_euclid(2.0 * std::f64::consts::PI),
    })
}
