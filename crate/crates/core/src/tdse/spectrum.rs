//! Momentum distributions of a wavepacket and the sideband measurements taken
//! from them.

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::WavepacketState;
use crate::error::{Error, Result};
use crate::semiclassical::{modulation_index, MomentumRule, SidebandSpectrum};
use crate::C64;

/// Zero padding applied before the FFT, for a smooth plotted curve.
pub const DEFAULT_PADDING: usize = 8;

/// `ψ̄(p)` on a uniform momentum axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumSpectrum {
    pub p: Vec<f64>,
    pub amplitude: Vec<C64>,
    /// Natural resolution `2π/L` of the underlying box.
    pub bin_width: f64,
}

impl MomentumSpectrum {
    pub fn density(&self) -> Vec<f64> {
        self.amplitude.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Restrict to `p_lo ..= p_hi`.
    pub fn window(&self, p_lo: f64, p_hi: f64) -> Self {
        let keep: Vec<usize> = (0..self.p.len())
            .filter(|&k| self.p[k] >= p_lo && self.p[k] <= p_hi)
            .collect();
        Self {
            p: keep.iter().map(|&k| self.p[k]).collect(),
            amplitude: keep.iter().map(|&k| self.amplitude[k]).collect(),
            bin_width: self.bin_width,
        }
    }

    /// Momentum of the largest `|ψ̄|²` within `half_width` of `p0`.
    pub fn peak_near(&self, p0: f64, half_width: f64) -> Option<f64> {
        (0..self.p.len())
            .filter(|&k| (self.p[k] - p0).abs() <= half_width)
            .max_by(|&a, &b| {
                self.amplitude[a]
                    .norm_sqr()
                    .total_cmp(&self.amplitude[b].norm_sqr())
            })
            .map(|k| self.p[k])
    }

    pub fn max_density(&self) -> f64 {
        self.amplitude.iter().map(|a| a.norm_sqr()).fold(0.0, f64::max)
    }
}

/// `ψ̄(p) = (2π)^{-1/2} Σ_j ψ(z_j) e^{−ipz_j} Δz` at one momentum.
pub fn fourier_at(state: &WavepacketState, p: f64) -> C64 {
    let g = &state.grid;
    let dz = g.dz();
    let step = C64::from_polar(1.0, -p * dz);
    let mut phase = C64::from_polar(1.0, -p * g.z_min);
    let mut sum = C64::new(0.0, 0.0);
    for (j, a) in state.psi.iter().enumerate() {
        sum += a * phase;
        phase *= step;
        // re-anchor to stop the recurrence drifting
        if j % 512 == 511 {
            phase = C64::from_polar(1.0, -p * g.z(j + 1));
        }
    }
    sum * dz / (2.0 * std::f64::consts::PI).sqrt()
}

/// FFT of the wavefunction, zero padded by `padding`, on `p ∈ [−π/Δz, π/Δz)`.
pub fn momentum_spectrum(state: &WavepacketState, padding: usize) -> MomentumSpectrum {
    let g = &state.grid;
    let n = g.n_points;
    let m = (n * padding.max(1)).next_power_of_two();
    let dz = g.dz();
    let mut buf = vec![C64::new(0.0, 0.0); m];
    buf[..n].copy_from_slice(&state.psi);
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);

    let dp = 2.0 * std::f64::consts::PI / (m as f64 * dz);
    let norm = dz / (2.0 * std::f64::consts::PI).sqrt();
    let half = m / 2;
    let mut p = Vec::with_capacity(m);
    let mut amplitude = Vec::with_capacity(m);
    for s in 0..m {
        // fftshift: negative momenta first
        let k = (s + half) % m;
        let kk = k as i64 - if k >= half { m as i64 } else { 0 };
        let pk = kk as f64 * dp;
        p.push(pk);
        amplitude.push(buf[k] * C64::from_polar(norm, -pk * g.z_min));
    }
    MomentumSpectrum {
        p,
        amplitude,
        bin_width: g.momentum_bin(),
    }
}

/// Check that the packet no longer interacts with the mirror.
pub fn require_free(potential_fraction: f64) -> Result<()> {
    if !(potential_fraction < 1e-6) {
        return Err(Error::Precondition(format!(
            "packet still interacting: <V>/<E> = {potential_fraction:.3e}"
        )));
    }
    Ok(())
}

/// One extracted sideband.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidebandMeasurement {
    pub order: i32,
    /// Exact-dispersion momentum `sqrt(P_i² + 2nP_iQ)`.
    pub momentum: f64,
    /// Local maximum of `|ψ̄|²` nearest `momentum`.
    pub peak_momentum: f64,
    /// `|ψ̄(p_n)|² / |ψ̄_ref(P_i)|²`
    pub height: f64,
    /// `ψ̄(p_n) / ψ̄_ref(P_i)`
    pub ratio: C64,
}

impl SidebandMeasurement {
    /// Probability amplitude of the sideband. A narrow packet maps `p → p_n`
    /// with `dp_n/dp = P_i/p_n`, so the peak height is `|a_n|² p_n/P_i`.
    pub fn amplitude(&self, p_i: f64) -> C64 {
        self.ratio * (p_i / self.momentum).sqrt()
    }

    pub fn weight(&self, p_i: f64) -> f64 {
        self.height * p_i / self.momentum
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidebandTable {
    pub p_i: f64,
    pub q_mod: f64,
    pub rows: Vec<SidebandMeasurement>,
}

impl SidebandTable {
    pub fn get(&self, n: i32) -> Option<&SidebandMeasurement> {
        self.rows.iter().find(|r| r.order == n)
    }

    pub fn height(&self, n: i32) -> Result<f64> {
        self.get(n).map(|r| r.height).ok_or(Error::MissingSideband(n))
    }

    pub fn weight(&self, n: i32) -> Result<f64> {
        self.get(n).map(|r| r.weight(self.p_i)).ok_or(Error::MissingSideband(n))
    }

    /// `(a₋₁, a₀, a₁)`
    pub fn triplet(&self) -> Result<[C64; 3]> {
        let mut out = [C64::new(0.0, 0.0); 3];
        for (slot, n) in out.iter_mut().zip(-1..=1) {
            *slot = self.get(n).ok_or(Error::MissingSideband(n))?.amplitude(self.p_i);
        }
        Ok(out)
    }

    /// `(a₋₁, a₀, a₁)` for one interferometer bounce: `a₀` and `a₁` from this
    /// table (atom arriving at `E_i`), `a₋₁` from `upper`, measured on an atom
    /// arriving at `E_i + ω`.
    pub fn interferometer_triplet(&self, upper: &SidebandTable) -> Result<[C64; 3]> {
        let down = upper.get(-1).ok_or(Error::MissingSideband(-1))?;
        if (down.momentum - self.p_i).abs() > 1e-9 * self.p_i {
            return Err(Error::Precondition(format!(
                "upper run lands at p = {} instead of P_i = {}",
                down.momentum, self.p_i
            )));
        }
        let a0 = self.get(0).ok_or(Error::MissingSideband(0))?.amplitude(self.p_i);
        let a1 = self.get(1).ok_or(Error::MissingSideband(1))?.amplitude(self.p_i);
        Ok([down.amplitude(upper.p_i), a0, a1])
    }

    /// Upper-to-lower probability ratio `W₊/W₋`.
    pub fn asymmetry(&self) -> Result<f64> {
        Ok(self.weight(1)? / self.weight(-1)?)
    }
}

/// Read sideband heights off a modulated run, normalized by the carrier of an
/// unmodulated reference run with the same packet.
pub fn extract_sidebands(
    state: &WavepacketState,
    reference: &WavepacketState,
    p_i: f64,
    q_mod: f64,
    orders: &[i32],
) -> Result<SidebandTable> {
    let r0 = fourier_at(reference, p_i);
    if !(r0.norm_sqr() > 0.0) {
        return Err(Error::Precondition("reference spectrum vanishes at P_i".into()));
    }
    let fine = momentum_spectrum(state, DEFAULT_PADDING);
    let mut rows = Vec::with_capacity(orders.len());
    for &n in orders {
        let p_n = crate::born::sideband_momenta_exact(p_i, q_mod, n)?;
        let a = fourier_at(state, p_n);
        rows.push(SidebandMeasurement {
            order: n,
            momentum: p_n,
            peak_momentum: fine.peak_near(p_n, 0.4 * q_mod).unwrap_or(f64::NAN),
            height: a.norm_sqr() / r0.norm_sqr(),
            ratio: a / r0,
        });
    }
    Ok(SidebandTable { p_i, q_mod, rows })
}

/// Packet parameters needed for the semiclassical spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketParams {
    pub p_i: f64,
    pub dp_i: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedSpectrum {
    pub spectrum: MomentumSpectrum,
    /// Orders closer than six standard deviations overlap.
    pub overlapping: bool,
}

/// Semiclassical `ψ̄(p) = Σ_n a_n(p_n) G(p_n − P_i)` where `p_n` is the incident
/// momentum that ends up at `p` in order `n` (`p − nq` or `sqrt(p² − 2nω)` by
/// the spectrum's rule) and `G` is the incident Gaussian with unit peak.
pub fn predicted_spectrum(
    packet: &PacketParams,
    spectrum: &SidebandSpectrum,
    epsilon: f64,
    p_axis: &[f64],
) -> Result<PredictedSpectrum> {
    let omega = spectrum.spacing * spectrum.carrier;
    let q0 = spectrum.spacing;
    let beta_u = |p: f64| -> Result<f64> { modulation_index(p, omega / p, epsilon) };
    let mut amplitude = Vec::with_capacity(p_axis.len());
    for &p in p_axis {
        let mut sum = C64::new(0.0, 0.0);
        for &n in &spectrum.orders {
            let p_in = match spectrum.momentum_rule {
                MomentumRule::Linearized => p - n as f64 * q0,
                MomentumRule::Exact => {
                    let d = p * p - 2.0 * n as f64 * omega;
                    if d <= 0.0 {
                        continue;
                    }
                    d.sqrt()
                }
            };
            if p_in <= 0.0 {
                continue;
            }
            let x = (p_in - packet.p_i) / packet.dp_i;
            if x.abs() > 12.0 {
                continue;
            }
            let g = (-0.25 * x * x).exp();
            let u = beta_u(p_in)?;
            let j = crate::semiclassical::bessel_j(n, u)?;
            let phase = n as f64 * (spectrum.phi - (omega / p_in) * spectrum.xi_eff);
            sum += C64::from_polar(j * g, phase);
        }
        amplitude.push(sum);
    }
    let bin = p_axis.get(1).zip(p_axis.first()).map_or(0.0, |(b, a)| b - a);
    Ok(PredictedSpectrum {
        spectrum: MomentumSpectrum {
            p: p_axis.to_vec(),
            amplitude,
            bin_width: bin,
        },
        overlapping: 6.0 * packet.dp_i > q0,
    })
}
