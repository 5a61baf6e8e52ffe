use serde::{Deserialize, Serialize};

use super::modulation_index;
use crate::error::Result;
use crate::mirror::MirrorConfig;
use crate::units::ScaledState;

/// One "much greater than" condition, stored as `margin = value / threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub value: f64,
    pub threshold: f64,
    pub margin: f64,
}

impl Margin {
    fn new(value: f64, threshold: f64) -> Self {
        let margin = if threshold == 0.0 {
            f64::INFINITY
        } else {
            value / threshold
        };
        Self {
            value,
            threshold,
            margin,
        }
    }

    pub fn satisfied(&self) -> bool {
        self.margin > 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    LowIndex,
    HighIndex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    /// `P_i ≫ 1`
    pub semiclassical: Margin,
    /// `Q ≫ 1`, with `Q = 3` taken as the practical boundary.
    pub micromotion: Margin,
    /// `P_i ≫ 2Q²`, needed for a nearly symmetric spectrum.
    pub low_index: Margin,
    /// `P_i ≫ 2(ΔP_max)²` with `ΔP_max = uQ`.
    pub high_index: Margin,
    pub u: f64,
    pub regime: Regime,
}

impl ValidityReport {
    /// The bound that applies in the current regime.
    pub fn index_bound(&self) -> &Margin {
        match self.regime {
            Regime::LowIndex => &self.low_index,
            Regime::HighIndex => &self.high_index,
        }
    }

    pub fn all_satisfied(&self) -> bool {
        self.semiclassical.satisfied()
            && self.micromotion.satisfied()
            && self.low_index.satisfied()
            && (self.regime == Regime::LowIndex || self.high_index.satisfied())
    }

    /// Names of the violated conditions.
    pub fn violations(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.semiclassical.satisfied() {
            out.push("semiclassical");
        }
        if !self.micromotion.satisfied() {
            out.push("micromotion");
        }
        if !self.low_index.satisfied() {
            out.push("low_index");
        }
        if self.regime == Regime::HighIndex && !self.high_index.satisfied() {
            out.push("high_index");
        }
        out
    }
}

pub fn validity_report(state: &ScaledState, cfg: &MirrorConfig) -> Result<ValidityReport> {
    let p = state.p_i;
    let q = state.q_mod;
    let u = modulation_index(p, q, cfg.epsilon)?;
    let dp_max = u * q;
    Ok(ValidityReport {
        semiclassical: Margin::new(p, 1.0),
        micromotion: Margin::new(q, 3.0),
        low_index: Margin::new(p, 2.0 * q * q),
        high_index: Margin::new(p, 2.0 * dp_max * dp_max),
        u,
        regime: if u < 1.0 {
            Regime::LowIndex
        } else {
            Regime::HighIndex
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(p: f64, q: f64, eps: f64) -> ValidityReport {
        let s = ScaledState::new(p, q).unwrap();
        let c = MirrorConfig::for_incident(&s, eps).unwrap();
        validity_report(&s, &c).unwrap()
    }

    #[test]
    fn figure_parameters_are_marginal() {
        let r = report(100.0, 4.2, 1.0);
        assert_eq!(r.regime, Regime::HighIndex);
        assert!((r.u - 1.7997).abs() < 1e-3);
        // 2 (uQ)² ≈ 114 against P_i = 100
        assert!((r.high_index.threshold - 114.3).abs() < 0.5, "{:?}", r.high_index);
        assert!(!r.high_index.satisfied());
        assert!(r.low_index.satisfied());
        assert_eq!(r.violations(), vec!["high_index"]);
    }

    #[test]
    fn static_mirror_has_no_micromotion() {
        let r = report(100.0, 0.0, 0.5);
        assert!(!r.micromotion.satisfied());
        assert_eq!(r.micromotion.margin, 0.0);
    }

    #[test]
    fn fast_heavy_atom_passes() {
        let r = report(1e4, 5.0, 0.1);
        assert!(r.all_satisfied(), "{r:?}");
        assert!(r.violations().is_empty());
    }

    #[test]
    fn low_index_regime() {
        let r = report(100.0, 5.0, 0.1);
        assert_eq!(r.regime, Regime::LowIndex);
        assert_eq!(r.index_bound(), &r.low_index);
    }
}
