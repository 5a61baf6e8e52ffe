//! Strang splitting: exact phase for the potential, RK4 for the free part
//! with 6th-order central differences and Dirichlet walls.

use serde::{Deserialize, Serialize};

use super::{GridSpec, WavepacketState};
use crate::error::{Error, Result};
use crate::mirror::MirrorConfig;
use crate::C64;

/// Relative norm change that aborts a run.
pub const NORM_DRIFT_LIMIT: f64 = 1e-4;
const GHOST: usize = 3;
/// Potential phases below this are applied by a third-order Taylor series.
const SMALL_PHASE: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    /// Sample the probability below `z = 0` every this many steps.
    pub loss_sample_every: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            loss_sample_every: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveReport {
    pub steps: usize,
    pub dt: f64,
    pub norm_initial: f64,
    pub norm_final: f64,
    /// Largest probability found below the dielectric surface during the run.
    pub lost_fraction: f64,
}

impl EvolveReport {
    pub fn norm_drift(&self) -> f64 {
        (self.norm_final - self.norm_initial).abs() / self.norm_initial
    }
}

/// Static part of the potential `V₀ e^{-2z}` on the grid, zero below the surface.
pub fn static_potential(grid: &GridSpec, cfg: &MirrorConfig) -> Vec<f64> {
    (0..grid.n_points)
        .map(|j| {
            let z = grid.z(j);
            if z < 0.0 {
                0.0
            } else {
                cfg.v0 * (-2.0 * z).exp()
            }
        })
        .collect()
}

/// Precomputed operator `H = −½ ∂² + V_s(z) m(t)` on one grid.
pub struct Hamiltonian {
    vs: Vec<f64>,
    k0: f64,
    k1: f64,
    k2: f64,
    k3: f64,
    cfg: MirrorConfig,
}

impl Hamiltonian {
    pub fn new(grid: &GridSpec, cfg: &MirrorConfig) -> Self {
        let inv = 1.0 / (grid.dz() * grid.dz());
        Self {
            vs: static_potential(grid, cfg),
            // −½ (2ψ₋₃ − 27ψ₋₂ + 270ψ₋₁ − 490ψ₀ + 270ψ₁ − 27ψ₂ + 2ψ₃) / 180dz²
            k0: 49.0 / 36.0 * inv,
            k1: -0.75 * inv,
            k2: 0.075 * inv,
            k3: -inv / 180.0,
            cfg: *cfg,
        }
    }

    /// `⟨ψ|H(t)|ψ⟩ / ⟨ψ|ψ⟩`
    pub fn energy(&self, psi: &[C64], t: f64) -> f64 {
        let m = self.cfg.modulation(t);
        let padded = pad(psi);
        let n = psi.len();
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 1..n - 1 {
            let p = GHOST + j;
            let h = padded[p] * (self.k0 + m * self.vs[j])
                + (padded[p - 1] + padded[p + 1]) * self.k1
                + (padded[p - 2] + padded[p + 2]) * self.k2
                + (padded[p - 3] + padded[p + 3]) * self.k3;
            num += (padded[p].conj() * h).re;
            den += padded[p].norm_sqr();
        }
        num / den
    }

    /// `⟨V⟩/⟨H⟩` at time `t`.
    pub fn potential_fraction(&self, psi: &[C64], t: f64) -> f64 {
        let m = self.cfg.modulation(t);
        let v: f64 = psi.iter().zip(&self.vs).map(|(a, v)| a.norm_sqr() * v * m).sum();
        let n: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        v / n / self.energy(psi, t)
    }

    /// `ψ ← exp(−i V_s ∫m dt) ψ` on the padded array.
    fn kick(&self, psi: &mut [C64], integral: f64) {
        for (a, &v) in psi[GHOST..].iter_mut().zip(&self.vs) {
            let th = v * integral;
            if th == 0.0 {
                continue;
            }
            let rot = if th.abs() < SMALL_PHASE {
                let t2 = th * th;
                C64::new(1.0 - 0.5 * t2, -th + t2 * th / 6.0)
            } else {
                let (s, c) = th.sin_cos();
                C64::new(c, -s)
            };
            *a *= rot;
        }
    }
}

fn pad(psi: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); psi.len() + 2 * GHOST];
    out[GHOST..GHOST + psi.len()].copy_from_slice(psi);
    out
}

/// One fused RK4 stage of the free evolution: `k = −iT tmp_in`,
/// `acc += w k`, `tmp_out = psi + c k`.
#[allow(clippy::too_many_arguments)]
#[inline(always)]
fn stage(h: &Hamiltonian, psi: &[C64], tmp_in: &[C64], tmp_out: &mut [C64], acc: &mut [C64], w: f64, c: f64) {
    let n = h.vs.len();
    let (k0, k1, k2, k3) = (h.k0, h.k1, h.k2, h.k3);
    // interior points j = 1 .. n-2 live at padded index j + GHOST
    let tin = &tmp_in[GHOST - 2..GHOST + n + 2];
    for j in 1..n - 1 {
        let i = j - 1;
        let hv = tin[i + 3] * k0
            + (tin[i + 2] + tin[i + 4]) * k1
            + (tin[i + 1] + tin[i + 5]) * k2
            + (tin[i] + tin[i + 6]) * k3;
        // −i (a + ib) = b − ia
        let k = C64::new(hv.im, -hv.re);
        let p = GHOST + j;
        acc[p] += k * w;
        tmp_out[p] = psi[p] + k * c;
    }
}

fn probability_below_zero(grid: &GridSpec, psi: &[C64]) -> f64 {
    let dz = grid.dz();
    (0..grid.n_points)
        .take_while(|&j| grid.z(j) < 0.0)
        .map(|j| psi[GHOST + j].norm_sqr())
        .sum::<f64>()
        * dz
}

/// Integrate from `state.t` to `t_end`.
pub fn evolve_with(
    state: &WavepacketState,
    cfg: &MirrorConfig,
    t_end: f64,
    opts: &EvolveOptions,
) -> Result<(WavepacketState, EvolveReport)> {
    let grid = state.grid;
    grid.validate()?;
    cfg.validate()?;
    if state.psi.len() != grid.n_points {
        return Err(Error::Config(format!(
            "state has {} samples but the grid has {}",
            state.psi.len(),
            grid.n_points
        )));
    }
    let span = t_end - state.t;
    if span < 0.0 {
        return Err(Error::Config(format!("t_end = {t_end} lies before t = {}", state.t)));
    }
    let steps = (span / grid.dt).ceil() as usize;
    let dt = if steps == 0 { 0.0 } else { span / steps as f64 };

    let ham = Hamiltonian::new(&grid, cfg);
    let n = grid.n_points;
    let mut psi = pad(&state.psi);
    psi[GHOST] = C64::new(0.0, 0.0);
    psi[GHOST + n - 1] = C64::new(0.0, 0.0);
    let mut a = psi.clone();
    let mut b = psi.clone();
    let mut acc = vec![C64::new(0.0, 0.0); psi.len()];

    let norm_initial = state.norm();
    let mut lost: f64 = probability_below_zero(&grid, &psi);
    let every = opts.loss_sample_every.max(1);
    for s in 0..steps {
        let t = state.t + s as f64 * dt;
        // Strang splitting: half potential kick, RK4 free step, half kick
        ham.kick(&mut psi, cfg.modulation_integral(t, t + 0.5 * dt));
        acc.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
        stage(&ham, &psi, &psi, &mut a, &mut acc, 1.0, 0.5 * dt);
        stage(&ham, &psi, &a, &mut b, &mut acc, 2.0, 0.5 * dt);
        stage(&ham, &psi, &b, &mut a, &mut acc, 2.0, dt);
        stage(&ham, &psi, &a, &mut b, &mut acc, 1.0, 0.0);
        let w = dt / 6.0;
        for j in GHOST + 1..GHOST + n - 1 {
            psi[j] += acc[j] * w;
        }
        ham.kick(&mut psi, cfg.modulation_integral(t + 0.5 * dt, t + dt));
        if (s + 1) % every == 0 || s + 1 == steps {
            lost = lost.max(probability_below_zero(&grid, &psi));
            let probe = psi[GHOST + n / 2];
            if !(probe.re.is_finite() && probe.im.is_finite()) {
                return Err(Error::Instability(format!(
                    "non-finite amplitude after {} steps at t = {:.6}",
                    s + 1,
                    t + dt
                )));
            }
        }
    }

    let out = WavepacketState {
        grid,
        psi: psi[GHOST..GHOST + n].to_vec(),
        t: t_end,
    };
    let report = EvolveReport {
        steps,
        dt,
        norm_initial,
        norm_final: out.norm(),
        lost_fraction: lost,
    };
    if !(report.norm_drift() <= NORM_DRIFT_LIMIT) {
        return Err(Error::Instability(format!(
            "norm drifted from {:.12} to {:.12} ({:.3e} relative) over {} steps of dt = {:.3e}",
            report.norm_initial,
            report.norm_final,
            report.norm_drift(),
            steps,
            dt
        )));
    }
    Ok((out, report))
}

/// [`evolve_with`] using default options, discarding the report.
pub fn evolve(state: &WavepacketState, cfg: &MirrorConfig, t_end: f64) -> Result<WavepacketState> {
    evolve_with(state, cfg, t_end, &EvolveOptions::default()).map(|(s, _)| s)
}
