//! Dimensionless units and SI conversion.
//!
//! Internally `ħ = M = κ = 1`: lengths are in `1/κ`, momenta in `ħκ`, energies
//! in `ħ²κ²/M`, times in `M/(ħκ²)` and frequencies in `ħκ²/M`. With this choice
//! the scaled incident momentum `P_i = p_i/ħκ` is also the incident velocity,
//! the interaction time is `τ = 1/P_i` and the sideband spacing `q` equals
//! `Q = ωτ`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Unified atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Mass of ¹³³Cs in atomic mass units.
pub const CESIUM_MASS_U: f64 = 132.905_451_961;
/// Standard gravity, m/s².
pub const STANDARD_GRAVITY: f64 = 9.81;

/// An atom bouncing on a particular evanescent wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalAtom {
    /// kg
    pub mass: f64,
    /// Evanescent decay parameter, 1/m. The potential falls off as `exp(-2κz)`.
    pub kappa: f64,
    /// m/s², only used to convert velocities to bounce heights.
    pub gravity: f64,
}

impl PhysicalAtom {
    pub fn new(mass: f64, kappa: f64) -> Result<Self> {
        let atom = Self {
            mass,
            kappa,
            gravity: STANDARD_GRAVITY,
        };
        atom.validate()?;
        Ok(atom)
    }

    /// Cesium on an evanescent wave near-resonant with the 852 nm D2 line,
    /// `κ = 2π/852 nm`.
    pub fn cesium() -> Self {
        Self {
            mass: CESIUM_MASS_U * ATOMIC_MASS_UNIT,
            kappa: 2.0 * std::f64::consts::PI / 852e-9,
            gravity: STANDARD_GRAVITY,
        }
    }

    pub fn with_gravity(mut self, gravity: f64) -> Self {
        self.gravity = gravity;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return domain(format!("atom mass must be positive, got {}", self.mass));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return domain(format!("kappa must be positive, got {}", self.kappa));
        }
        Ok(())
    }

    pub fn units(&self) -> UnitSystem {
        UnitSystem { atom: *self }
    }
}

/// Conversion factors between the scaled (`ħ = M = κ = 1`) system and SI for
/// one atom. Multiply a scaled quantity by the matching unit to get SI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    atom: PhysicalAtom,
}

impl UnitSystem {
    pub fn atom(&self) -> &PhysicalAtom {
        &self.atom
    }

    /// m
    pub fn length(&self) -> f64 {
        1.0 / self.atom.kappa
    }

    /// kg·m/s
    pub fn momentum(&self) -> f64 {
        HBAR * self.atom.kappa
    }

    /// m/s
    pub fn velocity(&self) -> f64 {
        HBAR * self.atom.kappa / self.atom.mass
    }

    /// J
    pub fn energy(&self) -> f64 {
        HBAR * HBAR * self.atom.kappa * self.atom.kappa / self.atom.mass
    }

    /// s
    pub fn time(&self) -> f64 {
        self.atom.mass / (HBAR * self.atom.kappa * self.atom.kappa)
    }

    /// rad/s
    pub fn frequency(&self) -> f64 {
        1.0 / self.time()
    }
}

/// Dimensionless kinematics of one incident atom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledState {
    /// Incident momentum `p_i/ħκ`.
    pub p_i: f64,
    /// Modulation frequency times interaction time, `Q = ωτ`.
    pub q_mod: f64,
    /// Interaction time `M/(κ p_i)` in scaled time units, i.e. `1/P_i`.
    pub tau: f64,
    /// Elementary sideband spacing `ħωM/p_i` in units of `ħκ`. Equal to `q_mod`.
    pub spacing: f64,
    /// Effective hard-mirror position in units of `1/κ`; needs `V₀`.
    pub xi_eff: Option<f64>,
}

impl ScaledState {
    /// Build directly from scaled quantities.
    pub fn new(p_i: f64, q_mod: f64) -> Result<Self> {
        if !(p_i > 0.0 && p_i.is_finite()) {
            return domain(format!("incident momentum must be positive, got {p_i}"));
        }
        if !(q_mod >= 0.0 && q_mod.is_finite()) {
            return domain(format!("modulation frequency must be non-negative, got {q_mod}"));
        }
        let tau = 1.0 / p_i;
        Ok(Self {
            p_i,
            q_mod,
            tau,
            spacing: q_mod,
            xi_eff: None,
        })
    }

    /// Incident kinetic energy `P_i²/2`.
    pub fn energy(&self) -> f64 {
        0.5 * self.p_i * self.p_i
    }

    /// Modulation angular frequency `ω = Q/τ` in scaled units.
    pub fn omega(&self) -> f64 {
        self.q_mod / self.tau
    }

    /// Fix the effective mirror position `½ ln(V₀/4E_i)` once `V₀` is known.
    pub fn with_v0(mut self, v0: f64) -> Result<Self> {
        if !(v0 > 0.0) {
            return domain(format!("V0 must be positive, got {v0}"));
        }
        self.xi_eff = Some(effective_mirror_position(v0, self.energy()));
        Ok(self)
    }
}

/// `ξ_eff = ½ ln(V₀ / 4E)`, where the asymptotes of the classical bounce meet.
pub fn effective_mirror_position(v0: f64, energy: f64) -> f64 {
    0.5 * (v0 / (4.0 * energy)).ln()
}

/// Express a physical incident momentum and modulation frequency in scaled
/// units. `ξ_eff` is left unset.
pub fn scale_incident(p_physical: f64, atom: &PhysicalAtom, omega: f64) -> Result<ScaledState> {
    atom.validate()?;
    if !(p_physical > 0.0 && p_physical.is_finite()) {
        return domain(format!("incident momentum must be positive, got {p_physical} kg m/s"));
    }
    if !(omega >= 0.0 && omega.is_finite()) {
        return domain(format!("modulation frequency must be non-negative, got {omega} rad/s"));
    }
    let units = atom.units();
    let p_i = p_physical / units.momentum();
    // τ = M/(κp) in seconds
    let tau_si = atom.mass / (atom.kappa * p_physical);
    ScaledState::new(p_i, omega * tau_si)
}

/// Inverse of [`scale_incident`]: returns `(p, ω)` in kg·m/s and rad/s.
pub fn unscale(state: &ScaledState, atom: &PhysicalAtom) -> (f64, f64) {
    let units = atom.units();
    let p = state.p_i * units.momentum();
    let omega = state.omega() * units.frequency();
    (p, omega)
}

/// Height `v²/2g` reached by an atom leaving the mirror with momentum `p`.
pub fn bounce_height(p_physical: f64, atom: &PhysicalAtom) -> Result<f64> {
    atom.validate()?;
    if !(p_physical >= 0.0 && p_physical.is_finite()) {
        return domain(format!("momentum must be non-negative, got {p_physical}"));
    }
    if !(atom.gravity > 0.0 && atom.gravity.is_finite()) {
        return domain(format!("gravity must be positive, got {}", atom.gravity));
    }
    let v = p_physical / atom.mass;
    Ok(v * v / (2.0 * atom.gravity))
}

/// Modulation frequency (rad/s) whose sideband spacing is `spacing` (in `ħκ`)
/// for incident momentum `p_i` (in `ħκ`).
pub fn omega_for_spacing(p_i: f64, spacing: f64, atom: &PhysicalAtom) -> f64 {
    // q = ħωM/p  =>  ω = q p / (ħ M), and in scaled units ω = q P.
    spacing * p_i * atom.units().frequency()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn zero_frequency_gives_zero_spacing() {
        let cs = PhysicalAtom::cesium();
        let s = scale_incident(100.0 * cs.units().momentum(), &cs, 0.0).unwrap();
        assert_eq!(s.q_mod, 0.0);
        assert_eq!(s.spacing, 0.0);
        assert_relative_eq!(s.p_i, 100.0, max_relative = 1e-12);
    }

    #[test]
    fn tau_is_inverse_momentum() {
        let s = ScaledState::new(37.5, 2.0).unwrap();
        assert_relative_eq!(s.tau, 1.0 / 37.5);
        assert_relative_eq!(s.omega(), 75.0);
    }

    #[test]
    fn rejects_bad_input() {
        let cs = PhysicalAtom::cesium();
        assert!(scale_incident(0.0, &cs, 1.0).is_err());
        assert!(scale_incident(-1e-27, &cs, 1.0).is_err());
        assert!(scale_incident(1e-27, &cs, -1.0).is_err());
        assert!(bounce_height(1e-27, &cs.with_gravity(0.0)).is_err());
        assert!(PhysicalAtom::new(0.0, 1.0).is_err());
        assert!(PhysicalAtom::new(1.0, -1.0).is_err());
    }

    #[test]
    fn bounce_height_scales_quadratically() {
        let cs = PhysicalAtom::cesium();
        let p = 100.0 * cs.units().momentum();
        let h1 = bounce_height(p, &cs).unwrap();
        let h2 = bounce_height(2.0 * p, &cs).unwrap();
        assert_relative_eq!(h2, 4.0 * h1, max_relative = 1e-14);
        assert_eq!(bounce_height(0.0, &cs).unwrap(), 0.0);
    }

    #[test]
    fn cesium_example_numbers() {
        let cs = PhysicalAtom::cesium();
        let v = 100.0 * cs.units().velocity();
        assert!((v - 0.35).abs() / 0.35 < 0.01, "v = {v}");
        let h = bounce_height(100.0 * cs.units().momentum(), &cs).unwrap();
        assert!((h - 6.2e-3).abs() / 6.2e-3 < 0.05, "h = {h}");
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(p in 1.0e-3f64..1.0e4, q in 0.0f64..50.0) {
            let cs = PhysicalAtom::cesium();
            let s = ScaledState::new(p, q).unwrap();
            let (p_si, w_si) = unscale(&s, &cs);
            let back = scale_incident(p_si, &cs, w_si).unwrap();
            prop_assert!((back.p_i - s.p_i).abs() <= 1e-12 * s.p_i);
            prop_assert!((back.q_mod - s.q_mod).abs() <= 1e-12 * s.q_mod.max(1e-300));
            prop_assert!((back.tau - s.tau).abs() <= 1e-12 * s.tau);
        }

        #[test]
        fn spacing_equals_q(p in 1.0e-28f64..1.0e-24, w in 0.0f64..1.0e8) {
            let cs = PhysicalAtom::cesium();
            let s = scale_incident(p, &cs, w).unwrap();
            prop_assert_eq!(s.spacing, s.q_mod);
            // also against the SI definition ħωM/p
            let q_si = HBAR * w * cs.mass / p / cs.units().momentum();
            prop_assert!((q_si - s.q_mod).abs() <= 1e-12 * q_si.max(1e-300));
        }
    }
}
