//! Three-bounce interferometer built from one vibrating mirror.
//!
//! Bounce 1 splits the atom into the carrier and the first upper sideband,
//! bounce 2 swaps them (`+1` and `−1` orders) and bounce 3 recombines. The two
//! retained paths end in the channels `E_i` and `E_i + ω`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::semiclassical::{beta, bessel_j_orders, modulation_index, SidebandSpectrum};
use crate::C64;

/// Amplitudes weaker than this are treated as absent.
pub const NOISE_FLOOR: f64 = 1e-8;

/// Free-flight action phases of the four path segments.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FlightPhases {
    pub ab: f64,
    pub bc: f64,
    pub ad: f64,
    pub dc: f64,
}

impl FlightPhases {
    /// `α_AB = α_DC` and `α_AD = α_BC`.
    pub fn symmetric(upper: f64, lower: f64) -> Self {
        Self {
            ab: upper,
            dc: upper,
            ad: lower,
            bc: lower,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.ab == self.dc && self.ad == self.bc
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferometerPlan {
    /// Modulation index at each bounce.
    pub u: [f64; 3],
    /// Mirror vibration phase at each bounce.
    pub phi: [f64; 3],
    /// Modulation depth at each bounce.
    pub epsilon: [f64; 3],
    pub alpha: FlightPhases,
    pub symmetric: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl InterferometerPlan {
    pub fn new(u: [f64; 3], phi: [f64; 3]) -> Self {
        Self {
            u,
            phi,
            epsilon: [f64::NAN; 3],
            alpha: FlightPhases::default(),
            symmetric: true,
            warnings: Vec::new(),
        }
    }

    pub fn with_alpha(mut self, alpha: FlightPhases) -> Self {
        self.symmetric = alpha.is_symmetric();
        self.alpha = alpha;
        self
    }

    /// `θ = φ₁ − 2φ₂ + φ₃`
    pub fn theta(&self) -> f64 {
        self.phi[0] - 2.0 * self.phi[1] + self.phi[2]
    }

    /// Semiclassical amplitudes `J_n(u_m)` for `n = −1, 0, 1` at each bounce,
    /// with `φ = 0` and `ξ_eff = 0`.
    pub fn bessel_triplets(&self) -> [[C64; 3]; 3] {
        self.u.map(|u| {
            let (j0, j1) = j01(u);
            [C64::new(-j1, 0.0), C64::new(j0, 0.0), C64::new(j1, 0.0)]
        })
    }
}

/// Output amplitudes of the two channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelAmplitudes {
    pub a_ei: C64,
    pub a_ei_plus: C64,
    /// θ-dependent part of `|A(E_i)|²`.
    pub fringe: f64,
}

impl ChannelAmplitudes {
    pub fn probability_ei(&self) -> f64 {
        self.a_ei.norm_sqr()
    }

    pub fn probability_ei_plus(&self) -> f64 {
        self.a_ei_plus.norm_sqr()
    }

    pub fn total(&self) -> f64 {
        self.probability_ei() + self.probability_ei_plus()
    }
}

/// `(J_0(u), J_1(u))` for any real `u`.
fn j01(u: f64) -> (f64, f64) {
    let j = bessel_j_orders(1, u.abs());
    (j[0], if u < 0.0 { -j[1] } else { j[1] })
}

fn triplet_from_spectrum(sp: &SidebandSpectrum, phi: f64) -> Result<[C64; 3]> {
    let mut out = [C64::new(0.0, 0.0); 3];
    for (slot, n) in out.iter_mut().zip(-1..=1) {
        let a = sp.amplitude(n).ok_or(Error::MissingSideband(n))?;
        // re-reference the vibration phase from the spectrum's φ to the plan's
        *slot = a * C64::from_polar(1.0, n as f64 * (phi - sp.phi));
    }
    Ok(out)
}

/// Channel amplitudes for the two retained paths.
///
/// Each spectrum is re-phased so that its vibration phase is the plan's
/// `φ_m`; the `e^{inφ_m}` factors then appear once, as in the path sums.
pub fn channel_amplitudes(
    plan: &InterferometerPlan,
    spectra: &[SidebandSpectrum; 3],
) -> Result<ChannelAmplitudes> {
    let t = [
        triplet_from_spectrum(&spectra[0], 0.0)?,
        triplet_from_spectrum(&spectra[1], 0.0)?,
        triplet_from_spectrum(&spectra[2], 0.0)?,
    ];
    Ok(channel_amplitudes_from_triplets(plan, &t))
}

/// As [`channel_amplitudes`], from `(a₋₁, a₀, a₁)` per bounce taken at zero
/// vibration phase.
pub fn channel_amplitudes_from_triplets(
    plan: &InterferometerPlan,
    t: &[[C64; 3]; 3],
) -> ChannelAmplitudes {
    let [p1, p2, p3] = plan.phi;
    let al = &plan.alpha;
    let e = |x: f64| C64::from_polar(1.0, x);
    let (m, z, p) = (0, 1, 2);

    let x = t[0][z] * t[1][p] * t[2][m] * e(p2 - p3) * e(al.ab + al.bc);
    let y = t[0][p] * t[1][m] * t[2][z] * e(p1 - p2) * e(al.ad + al.dc);
    let xp = t[0][z] * t[1][p] * t[2][z] * e(p2) * e(al.ab + al.bc);
    let yp = t[0][p] * t[1][m] * t[2][p] * e(p1 - p2 + p3) * e(al.ad + al.dc);
    ChannelAmplitudes {
        a_ei: x + y,
        a_ei_plus: xp + yp,
        fringe: 2.0 * (x * y.conj()).re,
    }
}

/// `F = 2 J₀(u₁)J₁(u₁) J₁(u₂)² J₀(u₃)J₁(u₃) cos θ`
pub fn fringe_amplitude(u1: f64, u2: f64, u3: f64, theta: f64) -> f64 {
    let (a0, a1) = j01(u1);
    let (_, b1) = j01(u2);
    let (c0, c1) = j01(u3);
    2.0 * a0 * a1 * b1 * b1 * c0 * c1 * theta.cos()
}

/// `F = 2 Re[(a₀a₁*)⁽¹⁾ (a₁a₋₁*)⁽²⁾ (a₋₁a₀*)⁽³⁾ e^{iθ}]` for measured
/// `(a₋₁, a₀, a₁)` triplets.
pub fn fringe_from_tdse(triplets: &[[C64; 3]; 3], theta: f64) -> Result<f64> {
    Ok(2.0 * (fringe_product(triplets)? * C64::from_polar(1.0, theta)).re)
}

/// Fringe amplitude maximized over `θ`: `2 |product|`.
pub fn fringe_max_from_tdse(triplets: &[[C64; 3]; 3]) -> Result<f64> {
    Ok(2.0 * fringe_product(triplets)?.norm())
}

fn fringe_product(t: &[[C64; 3]; 3]) -> Result<C64> {
    let needed = [(0, 1), (0, 2), (1, 2), (1, 0), (2, 0), (2, 1)];
    for &(bounce, slot) in &needed {
        let a = t[bounce][slot];
        if !(a.norm() >= NOISE_FLOOR) {
            return Err(Error::MissingSideband(slot as i32 - 1));
        }
    }
    let (m, z, p) = (0, 1, 2);
    Ok(t[0][z] * t[0][p].conj() * (t[1][p] * t[1][m].conj()) * (t[2][m] * t[2][z].conj()))
}

/// Argmax and max of a smooth function on `[lo, hi]`: grid scan, then golden
/// section around the best grid point.
pub fn maximize_1d<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, grid: usize, tol: f64) -> (f64, f64) {
    let grid = grid.max(3);
    let h = (hi - lo) / (grid - 1) as f64;
    let best = (0..grid)
        .map(|k| lo + h * k as f64)
        .fold((lo, f(lo)), |acc, x| {
            let v = f(x);
            if v > acc.1 {
                (x, v)
            } else {
                acc
            }
        });
    let mut a = (best.0 - h).max(lo);
    let mut b = (best.0 + h).min(hi);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeOptimum {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub f_max: f64,
}

const SEARCH_HI: f64 = 3.0;
const GRID: usize = 301;
const TOL: f64 = 1e-10;

/// Maximize `|F|` over `u₁, u₂, u₃ ∈ (0, 3)`. The objective factorizes, so
/// `u₁ = u₃ = argmax J₀J₁` and `u₂ = argmax J₁²`.
pub fn optimize_fringe() -> FringeOptimum {
    let (u_outer, _) = maximize_1d(|u| { let (a, b) = j01(u); a * b }, 0.0, SEARCH_HI, GRID, TOL);
    let (u_mid, _) = maximize_1d(|u| j01(u).1.powi(2), 0.0, SEARCH_HI, GRID, TOL);
    FringeOptimum {
        u1: u_outer,
        u2: u_mid,
        u3: u_outer,
        f_max: fringe_amplitude(u_outer, u_mid, u_outer, 0.0).abs(),
    }
}

/// Same search with one index shared by all three bounces.
pub fn optimize_fringe_equal() -> FringeOptimum {
    let (u, f) = maximize_1d(|u| fringe_amplitude(u, u, u, 0.0).abs(), 0.0, SEARCH_HI, GRID, TOL);
    FringeOptimum {
        u1: u,
        u2: u,
        u3: u,
        f_max: f,
    }
}

/// Smallest positive `u` with `J₀(u) = J₁(u)`: equal carrier and sideband
/// weights, giving full fringe contrast when used at bounces 1 and 3.
pub fn equal_weight_index() -> f64 {
    let g = |u: f64| {
        let (a, b) = j01(u);
        a - b
    };
    let (mut lo, mut hi) = (0.5, 2.0);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Indices `u_m = ε_m P_i β(Q)`, with a warning for every bounce more than 10%
/// away from the fringe optimum.
pub fn plan_from_physics(p_i: f64, q_mod: f64, epsilon: [f64; 3]) -> Result<InterferometerPlan> {
    let mut u = [0.0; 3];
    for (slot, &eps) in u.iter_mut().zip(&epsilon) {
        *slot = modulation_index(p_i, q_mod, eps)?;
    }
    let opt = optimize_fringe();
    let target = [opt.u1, opt.u2, opt.u3];
    let warnings = (0..3)
        .filter(|&m| (u[m] - target[m]).abs() > 0.1 * target[m])
        .map(|m| {
            format!(
                "bounce {}: u = {:.4} is more than 10% from the optimum {:.4}",
                m + 1,
                u[m],
                target[m]
            )
        })
        .collect();
    Ok(InterferometerPlan {
        u,
        phi: [0.0; 3],
        epsilon,
        alpha: FlightPhases::default(),
        symmetric: true,
        warnings,
    })
}

/// Depth at the outer bounces that puts `u` at the optimum when the middle
/// bounce runs at `ε₂`.
pub fn outer_depth_for_optimum(epsilon_mid: f64) -> f64 {
    let opt = optimize_fringe();
    epsilon_mid * opt.u1 / opt.u2
}

/// Phase shift `ε P_i` picked up when the mirror intensity fluctuates by a
/// relative amount `ε` (the effective mirror moves by `ε/2`).
pub fn intensity_noise_phase(p_i: f64, epsilon: f64) -> Result<f64> {
    if !(p_i > 0.0) {
        return domain(format!("incident momentum must be positive, got {p_i}"));
    }
    Ok(epsilon * p_i)
}

/// `P_i β(Q)`, the index per unit depth.
pub fn index_per_depth(p_i: f64, q_mod: f64) -> f64 {
    p_i * beta(q_mod)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mirror::MirrorConfig;
    use crate::semiclassical::{bessel_j, sideband_amplitudes};
    use crate::units::ScaledState;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn spectra(p: f64, q: f64, eps: [f64; 3], phi: [f64; 3]) -> [SidebandSpectrum; 3] {
        let s = ScaledState::new(p, q).unwrap();
        let mk = |m: usize| {
            let c = MirrorConfig::for_incident(&s, eps[m]).unwrap().with_phi(phi[m]);
            sideband_amplitudes(&s, &c, None).unwrap()
        };
        [mk(0), mk(1), mk(2)]
    }

    #[test]
    fn optimum() {
        let o = optimize_fringe();
        assert!((o.u1 - 1.08).abs() < 0.01 && (o.u3 - 1.08).abs() < 0.01, "{o:?}");
        assert!((o.u2 - 1.84).abs() < 0.01, "{o:?}");
        assert!((o.f_max - 0.078).abs() < 0.001, "{o:?}");
        assert_eq!(o, optimize_fringe());
    }

    #[test]
    fn optimum_beats_brute_force_grid() {
        let o = optimize_fringe();
        let mut best: f64 = 0.0;
        for i in 1..60 {
            for j in 1..60 {
                for k in 1..60 {
                    let (a, b, c) = (i as f64 * 0.05, j as f64 * 0.05, k as f64 * 0.05);
                    best = best.max(fringe_amplitude(a, b, c, 0.0).abs());
                }
            }
        }
        assert!(o.f_max >= best - 1e-12);
        assert!(o.f_max - best < 1e-3);
    }

    #[test]
    fn equal_indices_do_worse() {
        let eq = optimize_fringe_equal();
        assert!(eq.f_max < optimize_fringe().f_max);
        assert!(eq.f_max > 0.0);
    }

    #[test]
    fn fringe_zeros() {
        assert_eq!(fringe_amplitude(1.08, 1.84, 1.08, FRAC_PI_2).abs() < 1e-17, true);
        // first zero of J₁, located by bisection
        let (mut lo, mut hi) = (3.0, 4.5);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if bessel_j(1, mid).unwrap() > 0.0 { lo = mid } else { hi = mid }
        }
        assert!((lo - 3.8317).abs() < 1e-4);
        assert!(fringe_amplitude(1.08, lo, 1.08, 0.0).abs() < 1e-14);
    }

    #[test]
    fn no_split_no_fringe() {
        let plan = InterferometerPlan::new([0.0, 1.84, 1.08], [0.3, 0.1, 0.7]);
        let ch = channel_amplitudes_from_triplets(&plan, &plan.bessel_triplets());
        assert_eq!(ch.fringe, 0.0);
    }

    #[test]
    fn contrast_point() {
        let u = equal_weight_index();
        assert!((u - 1.435).abs() < 1e-3, "{u}");
        let (a, b) = j01(u);
        assert!((a - b).abs() < 1e-12);
        let plan = |theta: f64| InterferometerPlan::new([u, 1.84, u], [theta, 0.0, 0.0]);
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for k in 0..400 {
            let p = plan(2.0 * PI * k as f64 / 400.0);
            let ch = channel_amplitudes_from_triplets(&p, &p.bessel_triplets());
            lo = lo.min(ch.probability_ei());
            hi = hi.max(ch.probability_ei());
        }
        assert!(lo < 1e-6 * hi, "min {lo}, max {hi}");
    }

    #[test]
    fn plan_from_depths() {
        let p = plan_from_physics(100.0, 4.2, [0.6, 1.0, 0.6]).unwrap();
        assert!((p.u[1] - 1.80).abs() < 0.01);
        assert!((p.u[0] - 1.08).abs() < 0.01);
        assert!(p.warnings.is_empty(), "{:?}", p.warnings);
        let z = plan_from_physics(100.0, 4.2, [0.0; 3]).unwrap();
        assert_eq!(z.u, [0.0; 3]);
        assert_eq!(z.warnings.len(), 3);
        let half = plan_from_physics(100.0, 4.2, [0.3, 0.5, 0.3]).unwrap();
        for m in 0..3 {
            assert!((2.0 * half.u[m] - p.u[m]).abs() < 1e-12);
        }
        assert!((outer_depth_for_optimum(1.0) - 0.588).abs() < 0.005);
        assert!(plan_from_physics(100.0, 4.2, [0.6, 1.1, 0.6]).is_err());
    }

    #[test]
    fn semiclassical_amplitudes_give_optimum() {
        let o = optimize_fringe();
        let plan = InterferometerPlan::new([o.u1, o.u2, o.u3], [0.0; 3]);
        let f = fringe_max_from_tdse(&plan.bessel_triplets()).unwrap();
        assert!((f - o.f_max).abs() < 1e-14);
        assert!((f - 0.078).abs() < 0.001);
    }

    #[test]
    fn missing_sideband_is_an_error() {
        let mut t = InterferometerPlan::new([1.0, 1.8, 1.0], [0.0; 3]).bessel_triplets();
        t[1][0] = C64::new(0.0, 0.0);
        assert!(matches!(fringe_from_tdse(&t, 0.0), Err(Error::MissingSideband(-1))));
    }

    #[test]
    fn noise_phase() {
        assert_eq!(intensity_noise_phase(100.0, 0.01).unwrap(), 1.0);
    }

    proptest! {
        #[test]
        fn common_phase_per_bounce_cancels(g in prop::array::uniform3(-PI..PI), theta in -PI..PI) {
            let t = InterferometerPlan::new([1.1, 1.7, 0.9], [0.0; 3]).bessel_triplets();
            let mut r = t;
            for m in 0..3 {
                for a in r[m].iter_mut() {
                    *a *= C64::from_polar(1.0, g[m]);
                }
            }
            let a = fringe_from_tdse(&t, theta).unwrap();
            let b = fringe_from_tdse(&r, theta).unwrap();
            prop_assert!((a - b).abs() < 1e-14);
        }

        #[test]
        fn symmetric_plan_depends_on_theta_only(
            phi in prop::array::uniform3(-PI..PI),
            shift in -PI..PI,
            up in -10.0f64..10.0,
            down in -10.0f64..10.0,
            q in 2.0f64..6.0,
        ) {
            // (φ₁, φ₂, φ₃) → (φ₁ + s, φ₂ + s, φ₃ + s) keeps θ fixed
            let moved = [phi[0] + shift, phi[1] + shift, phi[2] + shift];
            let eps = [0.6, 1.0, 0.6];
            let alpha = FlightPhases::symmetric(up, down);
            let sa = spectra(100.0, q, eps, phi);
            let sb = spectra(100.0, q, eps, moved);
            let mut pa = InterferometerPlan::new([0.0; 3], phi).with_alpha(alpha);
            let mut pb = InterferometerPlan::new([0.0; 3], moved).with_alpha(alpha);
            pa.u = [sa[0].u, sa[1].u, sa[2].u];
            pb.u = pa.u;
            let ca = channel_amplitudes(&pa, &sa).unwrap();
            let cb = channel_amplitudes(&pb, &sb).unwrap();
            prop_assert!((ca.probability_ei() - cb.probability_ei()).abs() < 1e-12);
            prop_assert!((ca.probability_ei_plus() - cb.probability_ei_plus()).abs() < 1e-12);
            // and with the same θ, F matches the closed form
            let closed = fringe_amplitude(pa.u[0], pa.u[1], pa.u[2], pa.theta());
            prop_assert!((ca.fringe - closed).abs() < 1e-10, "{} vs {}", ca.fringe, closed);
            // total is flat in θ
            let mut pc = pa.clone();
            pc.phi[0] += 1.234;
            let cc = channel_amplitudes(&pc, &sa).unwrap();
            prop_assert!((ca.total() - cc.total()).abs() < 1e-10);
        }

        #[test]
        fn grating_identity(q in 2.0f64..8.0, eps in 0.0f64..1.0, phi in -PI..PI) {
            let s = spectra(100.0, q, [eps; 3], [phi; 3]);
            let (a0, a1, am) = (s[0].amplitude(0).unwrap(), s[0].amplitude(1).unwrap(), s[0].amplitude(-1).unwrap());
            prop_assert!((a0.conj() * am + a0 * a1.conj()).norm() < 1e-14);
        }
    }
}
