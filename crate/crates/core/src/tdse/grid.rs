use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `dt / Δz²` allowed: half the explicit-scheme bound `2/π²`.
pub const DT_OVER_DZ2: f64 = 1.0 / (std::f64::consts::PI * std::f64::consts::PI);
/// Spacing of the reference grid: 8192 points on `[-25, 25]`.
pub const DEFAULT_DZ: f64 = 50.0 / 8191.0;
/// Minimum samples per shortest de Broglie wavelength.
pub const SAMPLES_PER_WAVELENGTH: f64 = 8.0;

/// Uniform grid on `[z_min, z_max]` with both end points included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub z_min: f64,
    pub z_max: f64,
    pub n_points: usize,
    pub dt: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::new(-25.0, 25.0, 8192)
    }
}

impl GridSpec {
    /// Grid with the largest allowed time step.
    pub fn new(z_min: f64, z_max: f64, n_points: usize) -> Self {
        let mut g = Self {
            z_min,
            z_max,
            n_points,
            dt: 0.0,
        };
        g.dt = DT_OVER_DZ2 * g.dz() * g.dz();
        g
    }

    /// Grid starting at `z_min` with spacing `dz`, reaching at least to about
    /// `z_max` (rounded to a whole number of steps).
    pub fn with_spacing(z_min: f64, z_max: f64, dz: f64) -> Self {
        let n = ((z_max - z_min) / dz).round().max(1.0) as usize + 1;
        Self {
            z_min,
            z_max: z_min + dz * (n - 1) as f64,
            n_points: n,
            dt: DT_OVER_DZ2 * dz * dz,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    /// Same box and spacing, longer in both directions.
    pub fn extended_to(&self, z_min: f64, z_max: f64) -> Self {
        let dz = self.dz();
        let n = ((z_max - z_min) / dz).round() as usize + 1;
        Self {
            z_min,
            z_max: z_min + dz * (n - 1) as f64,
            n_points: n,
            dt: self.dt,
        }
    }

    /// Twice the resolution, time step rescaled to the stability bound.
    pub fn refined(&self) -> Self {
        let ratio = self.dt / (self.dz() * self.dz());
        let mut g = Self::new(self.z_min, self.z_max, 2 * self.n_points - 1);
        g.dt = ratio * g.dz() * g.dz();
        g
    }

    pub fn dz(&self) -> f64 {
        (self.z_max - self.z_min) / (self.n_points - 1) as f64
    }

    pub fn z(&self, j: usize) -> f64 {
        self.z_min + self.dz() * j as f64
    }

    pub fn length(&self) -> f64 {
        self.z_max - self.z_min
    }

    /// Natural momentum resolution `2π / L`.
    pub fn momentum_bin(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.dz() * self.n_points as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.z_max > self.z_min) || !self.z_min.is_finite() || !self.z_max.is_finite() {
            return Err(Error::Config(format!(
                "grid needs z_min < z_max, got [{}, {}]",
                self.z_min, self.z_max
            )));
        }
        if self.n_points < 16 {
            return Err(Error::Config(format!("grid needs at least 16 points, got {}", self.n_points)));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Config(format!("time step must be positive, got {}", self.dt)));
        }
        let bound = DT_OVER_DZ2 * self.dz() * self.dz() * (1.0 + 1e-12);
        if self.dt > bound {
            return Err(Error::Config(format!(
                "time step {:.3e} exceeds the stability bound {:.3e} for dz = {:.3e}",
                self.dt,
                bound,
                self.dz()
            )));
        }
        Ok(())
    }

    /// Check that momenta up to `p_max` get at least eight samples per wavelength.
    pub fn check_resolution(&self, p_max: f64) -> Result<()> {
        let limit = 2.0 * std::f64::consts::PI / (SAMPLES_PER_WAVELENGTH * p_max);
        if self.dz() > limit {
            return Err(Error::Config(format!(
                "dz = {:.4e} too coarse for momentum {p_max:.3}: need dz <= {limit:.4e}",
                self.dz()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let g = GridSpec::default();
        assert!((g.dz() - 50.0 / 8191.0).abs() < 1e-15);
        assert!(g.validate().is_ok());
        assert!(g.check_resolution(120.0).is_ok());
        assert!(g.check_resolution(140.0).is_err());
        assert!(g.with_dt(1e-4).validate().is_err());
    }

    #[test]
    fn derived_grids() {
        let g = GridSpec::default();
        let w = GridSpec::with_spacing(-5.0, 60.0, DEFAULT_DZ);
        assert_eq!(w.n_points, 10649);
        assert!((w.dz() - g.dz()).abs() < 1e-15);
        let e = g.extended_to(-25.0, 47.0);
        assert!((e.dz() - g.dz()).abs() < 1e-12);
        assert!((e.z_max - 47.0).abs() < g.dz());
        let r = g.refined();
        assert!((2.0 * r.dz() - g.dz()).abs() < 1e-15);
        assert!((4.0 * r.dt - g.dt).abs() < 1e-18);
        assert!(r.validate().is_ok());
    }
}
