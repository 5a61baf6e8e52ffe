//! First-order (golden rule) transitions between mirror eigenstates.
//!
//! The closed form for the transition probability mixes `sinh(πP)` with
//! `P ~ 100` and `sinh(πΔP/2)` with `ΔP ~ 1`, so everything is done in logs.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::semiclassical::{beta, ln_beta};

/// Above this a result is no longer a small perturbation.
pub const PERTURBATIVE_LIMIT: f64 = 0.1;

/// `ln sinh(x)` for `x > 0`.
pub fn ln_sinh(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 1e-2 {
        let x2 = x * x;
        x.ln() + (x2 / 6.0 + x2 * x2 / 120.0).ln_1p()
    } else if x > 20.0 {
        x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p()
    } else {
        x.sinh().ln()
    }
}

fn check_inputs(p_i: f64, p_f: f64, epsilon: f64) -> Result<()> {
    if !(p_i > 0.0 && p_i.is_finite()) || !(p_f > 0.0 && p_f.is_finite()) {
        return domain(format!("momenta must be positive, got P_i = {p_i}, P_f = {p_f}"));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return domain(format!("modulation depth must lie in [0, 1], got {epsilon}"));
    }
    Ok(())
}

/// Transition probability `P_i → P_f`:
///
/// `W = (ε²/16) sinh(πP_i) sinh(πP_f) (P_i+P_f)² β²(P_i−P_f) / sinh²(π(P_i+P_f)/2)`
pub fn born_probability(p_i: f64, p_f: f64, epsilon: f64) -> Result<f64> {
    check_inputs(p_i, p_f, epsilon)?;
    if epsilon == 0.0 {
        return Ok(0.0);
    }
    let pi = std::f64::consts::PI;
    // fixed operand order keeps the result bit-identical under P_i <-> P_f
    let (p_i, p_f) = (p_i.min(p_f), p_i.max(p_f));
    let s = p_i + p_f;
    let ln_w = 2.0 * epsilon.ln() - 16f64.ln()
        + ln_sinh(pi * p_i)
        + ln_sinh(pi * p_f)
        + 2.0 * s.ln()
        + 2.0 * ln_beta(p_i - p_f)
        - 2.0 * ln_sinh(0.5 * pi * s);
    Ok(ln_w.exp())
}

/// `(ε²/4) P_i² β²(ΔP)`, valid for `P_i, P_f ≫ 1`.
pub fn semiclassical_limit(p_i: f64, delta_p: f64, epsilon: f64) -> f64 {
    let b = beta(delta_p);
    0.25 * epsilon * epsilon * p_i * p_i * b * b
}

/// `(ε²/4) P_i P_f`, valid for `P_i, P_f ≪ 1`.
pub fn quantum_limit(p_i: f64, p_f: f64, epsilon: f64) -> f64 {
    0.25 * epsilon * epsilon * p_i * p_f
}

/// `sqrt(P_i² + 2 n P_i Q)`, the momentum of sideband `n` with energy `E_i + nω`.
pub fn sideband_momenta_exact(p_i: f64, q_mod: f64, n: i32) -> Result<f64> {
    let disc = p_i * p_i + 2.0 * n as f64 * p_i * q_mod;
    if disc < 0.0 {
        return Err(Error::ClosedChannel {
            order: n,
            discriminant: disc,
        });
    }
    Ok(disc.sqrt())
}

/// Born weights of the first upper and lower sidebands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BornResult {
    pub p_plus: f64,
    pub w_plus: f64,
    /// `None` when the lower sideband is energetically closed.
    pub p_minus: Option<f64>,
    pub w_minus: Option<f64>,
    /// `W₊ P_i / P_f₊`, the squared amplitude of the outgoing wave for a unit
    /// incident amplitude.
    pub flux_plus: f64,
    pub flux_minus: Option<f64>,
    /// `max W ≤ 0.1`
    pub perturbative: bool,
}

pub fn born_sidebands(p_i: f64, q_mod: f64, epsilon: f64) -> Result<BornResult> {
    let p_plus = sideband_momenta_exact(p_i, q_mod, 1)?;
    let w_plus = born_probability(p_i, p_plus, epsilon)?;
    let p_minus = sideband_momenta_exact(p_i, q_mod, -1).ok().filter(|&p| p > 0.0);
    let w_minus = p_minus
        .map(|p| born_probability(p_i, p, epsilon))
        .transpose()?;
    let w_max = w_plus.max(w_minus.unwrap_or(0.0));
    Ok(BornResult {
        p_plus,
        w_plus,
        p_minus,
        w_minus,
        flux_plus: w_plus * p_i / p_plus,
        flux_minus: w_minus.zip(p_minus).map(|(w, p)| w * p_i / p),
        perturbative: w_max <= PERTURBATIVE_LIMIT,
    })
}

/// Upper-to-lower sideband weight ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryRatio {
    /// `exp(πQ²/P_i)`
    pub approx: f64,
    /// `W₊/W₋` from [`born_probability`].
    pub exact: f64,
}

pub fn asymmetry_ratio(p_i: f64, q_mod: f64) -> Result<AsymmetryRatio> {
    if !(p_i > 0.0) || !(q_mod >= 0.0) {
        return domain(format!("need P_i > 0 and Q >= 0, got P_i = {p_i}, Q = {q_mod}"));
    }
    if 2.0 * q_mod >= p_i {
        return Err(Error::ClosedChannel {
            order: -1,
            discriminant: p_i * p_i - 2.0 * p_i * q_mod,
        });
    }
    let approx = (std::f64::consts::PI * q_mod * q_mod / p_i).exp();
    if q_mod == 0.0 {
        return Ok(AsymmetryRatio { approx, exact: 1.0 });
    }
    let up = born_probability(p_i, sideband_momenta_exact(p_i, q_mod, 1)?, 1.0)?;
    let down = born_probability(p_i, sideband_momenta_exact(p_i, q_mod, -1)?, 1.0)?;
    Ok(AsymmetryRatio {
        approx,
        exact: up / down,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// The closed form exactly as written, with plain `sinh`.
    fn naive(p_i: f64, p_f: f64, eps: f64) -> f64 {
        let d = p_i - p_f;
        let ratio = if d == 0.0 {
            2.0 / PI
        } else {
            d / (0.5 * PI * d).sinh()
        };
        let s = p_i + p_f;
        eps * eps * PI * PI / 64.0
            * (PI * p_i).sinh()
            * (PI * p_f).sinh()
            * (s * ratio / (0.5 * PI * s).sinh()).powi(2)
    }

    #[test]
    fn ln_sinh_branches() {
        for &x in &[1e-8, 5e-3, 1e-2, 0.7, 19.9, 20.1, 35.0] {
            assert_relative_eq!(ln_sinh(x), x.sinh().ln(), max_relative = 1e-13);
        }
        assert_relative_eq!(ln_sinh(1000.0), 1000.0 - 2f64.ln(), max_relative = 1e-15);
    }

    #[test]
    fn quantum_limit_small_momenta() {
        let w = born_probability(0.02, 0.02, 1.0).unwrap();
        assert!((w / 1.0e-4 - 1.0).abs() < 0.01, "{w}");
    }

    #[test]
    fn diagonal_uses_analytic_limit() {
        let w = born_probability(3.0, 3.0, 0.5).unwrap();
        assert_relative_eq!(w, naive(3.0, 3.0, 0.5), max_relative = 1e-12);
        let near = born_probability(3.0, 3.0 + 1e-9, 0.5).unwrap();
        assert_relative_eq!(w, near, max_relative = 1e-7);
    }

    #[test]
    fn no_overflow_at_large_momenta() {
        let w = born_probability(100.0, 104.1, 1.0).unwrap();
        assert!(w.is_finite() && w > 0.0);
        assert_eq!(born_probability(100.0, 104.1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn exact_momenta() {
        assert_eq!(sideband_momenta_exact(100.0, 4.2, 0).unwrap(), 100.0);
        assert_relative_eq!(sideband_momenta_exact(100.0, 4.2, 1).unwrap(), 104.115_320_679, epsilon = 1e-7);
        assert_relative_eq!(sideband_momenta_exact(100.0, 4.2, -1).unwrap(), 95.707_888_912, epsilon = 1e-7);
        let up = sideband_momenta_exact(100.0, 4.2, 1).unwrap() - 100.0;
        let down = 100.0 - sideband_momenta_exact(100.0, 4.2, -1).unwrap();
        assert!((up - down + 0.1764).abs() < 4.2f64.powi(3) / 1e4);
        assert!(matches!(
            sideband_momenta_exact(1.0, 4.2, -1),
            Err(Error::ClosedChannel { order: -1, .. })
        ));
    }

    #[test]
    fn asymmetry() {
        let r = asymmetry_ratio(100.0, 0.0).unwrap();
        assert_eq!((r.approx, r.exact), (1.0, 1.0));
        let r = asymmetry_ratio(100.0, 4.2).unwrap();
        assert_relative_eq!(r.approx, (PI * 0.1764f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(r.approx, 1.7407, max_relative = 2e-4);
        assert!(asymmetry_ratio(10.0, 5.0).is_err());
    }

    #[test]
    fn asymmetry_gap_is_small_when_q2_over_p_small() {
        for &p in &[100.0, 200.0, 400.0] {
            for k in 1..=20 {
                let q = k as f64 * 0.3;
                if q * q / p >= 0.2 {
                    continue;
                }
                let r = asymmetry_ratio(p, q).unwrap();
                assert!((r.exact / r.approx - 1.0).abs() < 0.05, "P={p} Q={q} {r:?}");
            }
        }
    }

    #[test]
    fn sidebands_flags() {
        let weak = born_sidebands(100.0, 6.0, 0.05).unwrap();
        assert!(weak.perturbative);
        let strong = born_sidebands(100.0, 4.2, 1.0).unwrap();
        assert!(!strong.perturbative);
        assert!(strong.w_plus > strong.w_minus.unwrap());
        assert_relative_eq!(strong.flux_plus, strong.w_plus * 100.0 / strong.p_plus);
        let closed = born_sidebands(3.0, 2.0, 0.5).unwrap();
        assert!(closed.w_minus.is_none() && closed.flux_minus.is_none());
    }

    proptest! {
        #[test]
        fn log_space_matches_naive(p_i in 0.01f64..25.0, p_f in 0.01f64..25.0, eps in 0.0f64..1.0) {
            let a = born_probability(p_i, p_f, eps).unwrap();
            let b = naive(p_i, p_f, eps);
            prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1e-300), "{a} vs {b}");
        }

        #[test]
        fn exchange_symmetry(p_i in 0.01f64..300.0, p_f in 0.01f64..300.0, eps in 0.0f64..1.0) {
            let a = born_probability(p_i, p_f, eps).unwrap();
            let b = born_probability(p_f, p_i, eps).unwrap();
            prop_assert!((a - b).abs() <= 1e-14 * a.abs().max(1e-300));
        }

        #[test]
        fn quantum_limit_property(p_i in 0.001f64..0.05, p_f in 0.001f64..0.05) {
            let w = born_probability(p_i, p_f, 0.7).unwrap();
            prop_assert!((w / quantum_limit(p_i, p_f, 0.7) - 1.0).abs() < 0.01);
        }

        #[test]
        fn non_negative(p_i in 0.001f64..500.0, p_f in 0.001f64..500.0, eps in 0.0f64..1.0) {
            prop_assert!(born_probability(p_i, p_f, eps).unwrap() >= 0.0);
        }
    }
}
