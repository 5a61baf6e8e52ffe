//! Flat `key = value` experiment description.
//!
//! Lines are `key = value`; blank lines and lines starting with `#` are
//! skipped. [`ExperimentConfig::to_text`] writes every key, so its output
//! parses back to the same config.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mirror::DEFAULT_LOG_V0_OVER_E;
use crate::tdse::{BounceConfig, GridSpec, DEFAULT_DZ};
use crate::units::{PhysicalAtom, ATOMIC_MASS_UNIT, CESIUM_MASS_U, STANDARD_GRAVITY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Born,
    Semiclassical,
    Tdse,
    Classical,
    Interferometer,
    Compare,
    Units,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Born,
        Method::Semiclassical,
        Method::Tdse,
        Method::Classical,
        Method::Interferometer,
        Method::Compare,
        Method::Units,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Born => "born",
            Method::Semiclassical => "semiclassical",
            Method::Tdse => "tdse",
            Method::Classical => "classical",
            Method::Interferometer => "interferometer",
            Method::Compare => "compare",
            Method::Units => "units",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(format!("unknown format `{s}` (expected csv or json)")),
        }
    }
}

/// Physics parameter a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    PI,
    Q,
    Epsilon,
    Phi,
    LogV0,
}

impl SweepVar {
    const ALL: [SweepVar; 5] = [SweepVar::PI, SweepVar::Q, SweepVar::Epsilon, SweepVar::Phi, SweepVar::LogV0];

    pub fn key(self) -> &'static str {
        match self {
            SweepVar::PI => "p_i",
            SweepVar::Q => "q",
            SweepVar::Epsilon => "epsilon",
            SweepVar::Phi => "phi",
            SweepVar::LogV0 => "log_v0",
        }
    }
}

impl FromStr for SweepVar {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        SweepVar::ALL
            .into_iter()
            .find(|v| v.key() == s)
            .ok_or_else(|| format!("cannot sweep `{s}` (expected p_i, q, epsilon, phi or log_v0)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub var: SweepVar,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Sweep {
    /// `steps` evenly spaced values from `start` to `stop` inclusive.
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let h = (self.stop - self.start) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| if k + 1 == self.steps { self.stop } else { self.start + h * k as f64 })
            .collect()
    }
}

/// One run of the `simulate` binary.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub method: Method,
    /// Methods overlaid by `compare`.
    pub methods: Vec<Method>,
    pub p_i: f64,
    /// `Q = ωτ`, equal to the sideband spacing `q` in units of `ħκ`.
    pub q: f64,
    pub epsilon: f64,
    pub phi: f64,
    /// `ln(V₀/E_i)`
    pub log_v0: f64,
    pub z_i: f64,
    pub dz_i: f64,
    pub grid_z_min: f64,
    pub grid_z_max: f64,
    pub grid_dz: f64,
    /// `None` picks the largest stable step.
    pub grid_dt: Option<f64>,
    pub settle_tau: f64,
    /// Also write the final momentum distribution (`tdse` only).
    pub spectrum: bool,
    pub orders: Vec<i32>,
    /// Depths at the three interferometer bounces.
    pub bounce_epsilon: [f64; 3],
    pub theta_steps: usize,
    /// Bounce phases per point for `classical`.
    pub phases: usize,
    /// Atom mass in atomic mass units.
    pub atom_mass_u: f64,
    /// Evanescent decay constant in 1/m.
    pub atom_kappa: f64,
    pub gravity: f64,
    pub sweep: Option<Sweep>,
    /// Output file stem; defaults to the config name.
    pub output_path: Option<String>,
    pub format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let tdse = BounceConfig::default();
        let cs = PhysicalAtom::cesium();
        Self {
            name: "run".into(),
            method: Method::Semiclassical,
            methods: vec![Method::Born, Method::Semiclassical, Method::Tdse],
            p_i: tdse.p_i,
            q: tdse.q_mod,
            epsilon: tdse.epsilon,
            phi: 0.0,
            log_v0: DEFAULT_LOG_V0_OVER_E,
            z_i: tdse.z_i,
            dz_i: tdse.dz_i,
            grid_z_min: tdse.grid.z_min,
            grid_z_max: 60.0,
            grid_dz: DEFAULT_DZ,
            grid_dt: None,
            settle_tau: tdse.settle_tau,
            spectrum: false,
            orders: vec![-1, 1],
            bounce_epsilon: [0.6, 1.0, 0.6],
            theta_steps: 73,
            phases: 16,
            atom_mass_u: CESIUM_MASS_U,
            atom_kappa: cs.kappa,
            gravity: STANDARD_GRAVITY,
            sweep: None,
            output_path: None,
            format: OutputFormat::Csv,
        }
    }
}

fn parse_f64(v: &str) -> std::result::Result<f64, String> {
    v.parse::<f64>().map_err(|_| format!("`{v}` is not a number"))
}

fn parse_usize(v: &str) -> std::result::Result<usize, String> {
    v.parse::<usize>().map_err(|_| format!("`{v}` is not a non-negative integer"))
}

fn parse_list<T: FromStr>(v: &str) -> std::result::Result<Vec<T>, String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| format!("bad list entry `{s}`")))
        .collect()
}

fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Parse a config file. Errors carry the 1-based line number.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// Apply the `key = value` lines of `text` on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`, got `{line}`", k + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {}", k + 1, strip(e))))?;
        }
        Ok(())
    }

    /// Recover a config from the `# key = value` header of an output file.
    pub fn from_header(text: &str) -> Result<Self> {
        let body: String = text
            .lines()
            .filter_map(|l| l.strip_prefix("# "))
            .filter(|l| l.contains('='))
            .map(|l| format!("{l}\n"))
            .collect();
        Self::parse(&body)
    }

    /// Set one key. `sweep.var = none` clears the sweep and `grid.dt = auto`
    /// restores the default step.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        self.set_inner(key, value).map_err(|msg| Error::Config(format!("{key}: {msg}")))
    }

    fn sweep_mut(&mut self) -> &mut Sweep {
        let start = self.q;
        self.sweep.get_or_insert(Sweep {
            var: SweepVar::Q,
            start,
            stop: start,
            steps: 1,
        })
    }

    fn set_inner(&mut self, key: &str, v: &str) -> std::result::Result<(), String> {
        match key {
            "name" => {
                if v.is_empty() || v.contains(['/', '\\']) {
                    return Err(format!("`{v}` is not a usable name"));
                }
                self.name = v.to_string();
            }
            "method" => self.method = v.parse()?,
            "methods" => self.methods = parse_list(v)?,
            "p_i" => self.p_i = parse_f64(v)?,
            "q" => self.q = parse_f64(v)?,
            "epsilon" => self.epsilon = parse_f64(v)?,
            "phi" => self.phi = parse_f64(v)?,
            "log_v0" => self.log_v0 = parse_f64(v)?,
            "z_i" => self.z_i = parse_f64(v)?,
            "dz_i" => self.dz_i = parse_f64(v)?,
            "grid.z_min" => self.grid_z_min = parse_f64(v)?,
            "grid.z_max" => self.grid_z_max = parse_f64(v)?,
            "grid.dz" => self.grid_dz = parse_f64(v)?,
            "grid.dt" => self.grid_dt = if v == "auto" { None } else { Some(parse_f64(v)?) },
            "settle_tau" => self.settle_tau = parse_f64(v)?,
            "spectrum" => {
                self.spectrum = v.parse::<bool>().map_err(|_| format!("`{v}` is not true or false"))?
            }
            "orders" => self.orders = parse_list(v)?,
            "epsilon_bounces" => {
                let xs: Vec<f64> = parse_list(v)?;
                self.bounce_epsilon = xs
                    .try_into()
                    .map_err(|xs: Vec<f64>| format!("need three depths, got {}", xs.len()))?;
            }
            "theta_steps" => self.theta_steps = parse_usize(v)?,
            "phases" => self.phases = parse_usize(v)?,
            "atom.mass_u" => self.atom_mass_u = parse_f64(v)?,
            "atom.kappa" => self.atom_kappa = parse_f64(v)?,
            "atom.gravity" => self.gravity = parse_f64(v)?,
            "sweep.var" => {
                if v == "none" {
                    self.sweep = None;
                } else {
                    let var = v.parse()?;
                    self.sweep_mut().var = var;
                }
            }
            "sweep.start" => {
                let x = parse_f64(v)?;
                self.sweep_mut().start = x;
            }
            "sweep.stop" => {
                let x = parse_f64(v)?;
                self.sweep_mut().stop = x;
            }
            "sweep.steps" => {
                let n = parse_usize(v)?;
                self.sweep_mut().steps = n;
            }
            "output.path" => self.output_path = if v.is_empty() { None } else { Some(v.to_string()) },
            "output.format" => self.format = v.parse()?,
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    /// Every key in a fixed order.
    pub fn to_text(&self) -> String {
        let mut lines = vec![
            ("name", self.name.clone()),
            ("method", self.method.to_string()),
            ("methods", join(&self.methods)),
            ("p_i", self.p_i.to_string()),
            ("q", self.q.to_string()),
            ("epsilon", self.epsilon.to_string()),
            ("phi", self.phi.to_string()),
            ("log_v0", self.log_v0.to_string()),
            ("z_i", self.z_i.to_string()),
            ("dz_i", self.dz_i.to_string()),
            ("grid.z_min", self.grid_z_min.to_string()),
            ("grid.z_max", self.grid_z_max.to_string()),
            ("grid.dz", self.grid_dz.to_string()),
            ("grid.dt", self.grid_dt.map_or("auto".into(), |x| x.to_string())),
            ("settle_tau", self.settle_tau.to_string()),
            ("spectrum", self.spectrum.to_string()),
            ("orders", join(&self.orders)),
            ("epsilon_bounces", join(&self.bounce_epsilon)),
            ("theta_steps", self.theta_steps.to_string()),
            ("phases", self.phases.to_string()),
            ("atom.mass_u", self.atom_mass_u.to_string()),
            ("atom.kappa", self.atom_kappa.to_string()),
            ("atom.gravity", self.gravity.to_string()),
        ];
        match &self.sweep {
            None => lines.push(("sweep.var", "none".into())),
            Some(s) => {
                lines.push(("sweep.var", s.var.key().into()));
                lines.push(("sweep.start", s.start.to_string()));
                lines.push(("sweep.stop", s.stop.to_string()));
                lines.push(("sweep.steps", s.steps.to_string()));
            }
        }
        lines.push(("output.path", self.output_path.clone().unwrap_or_default()));
        lines.push(("output.format", self.format.to_string()));
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        for (key, x) in [
            ("p_i", self.p_i),
            ("q", self.q),
            ("epsilon", self.epsilon),
            ("phi", self.phi),
            ("log_v0", self.log_v0),
        ] {
            if !x.is_finite() {
                return bad(format!("{key} must be finite"));
            }
        }
        if let Some(s) = &self.sweep {
            if !(s.start.is_finite() && s.stop.is_finite()) {
                return bad("sweep bounds must be finite".into());
            }
            if s.steps < 1 {
                return bad("sweep.steps must be at least 1".into());
            }
            if matches!(self.method, Method::Interferometer) {
                return bad("the interferometer method does not take a sweep".into());
            }
        }
        match self.method {
            Method::Compare => {
                if self.methods.is_empty() {
                    return bad("compare needs at least one entry in `methods`".into());
                }
                if let Some(m) = self
                    .methods
                    .iter()
                    .find(|m| !matches!(m, Method::Born | Method::Semiclassical | Method::Tdse))
                {
                    return bad(format!("compare can overlay born, semiclassical and tdse, not {m}"));
                }
                if !self.orders.contains(&1) || !self.orders.contains(&-1) {
                    return bad("compare needs orders -1 and 1".into());
                }
            }
            Method::Tdse | Method::Semiclassical => {
                if self.orders.is_empty() {
                    return bad("`orders` is empty".into());
                }
                if self.spectrum && self.sweep.as_ref().is_some_and(|s| s.steps > 1) {
                    return bad("spectrum output needs a single point, not a sweep".into());
                }
            }
            Method::Classical => {
                if self.phases < 1 {
                    return bad("`phases` must be at least 1".into());
                }
            }
            Method::Interferometer => {
                if self.theta_steps < 2 {
                    return bad("`theta_steps` must be at least 2".into());
                }
            }
            Method::Born | Method::Units => {}
        }
        if self.spectrum && self.method != Method::Tdse {
            return bad("`spectrum = true` only applies to the tdse method".into());
        }
        Ok(())
    }

    /// Scalar physics key by sweep variable.
    pub fn with_value(&self, var: SweepVar, x: f64) -> Self {
        let mut c = self.clone();
        match var {
            SweepVar::PI => c.p_i = x,
            SweepVar::Q => c.q = x,
            SweepVar::Epsilon => c.epsilon = x,
            SweepVar::Phi => c.phi = x,
            SweepVar::LogV0 => c.log_v0 = x,
        }
        c
    }

    pub fn value(&self, var: SweepVar) -> f64 {
        match var {
            SweepVar::PI => self.p_i,
            SweepVar::Q => self.q,
            SweepVar::Epsilon => self.epsilon,
            SweepVar::Phi => self.phi,
            SweepVar::LogV0 => self.log_v0,
        }
    }

    /// Points of the sweep, or the single configured point.
    pub fn points(&self) -> (SweepVar, Vec<Self>) {
        match &self.sweep {
            Some(s) => (s.var, s.values().into_iter().map(|x| self.with_value(s.var, x)).collect()),
            None => (SweepVar::Q, vec![self.clone()]),
        }
    }

    pub fn grid(&self) -> GridSpec {
        let g = GridSpec::with_spacing(self.grid_z_min, self.grid_z_max, self.grid_dz);
        match self.grid_dt {
            Some(dt) => g.with_dt(dt),
            None => g,
        }
    }

    pub fn bounce(&self) -> BounceConfig {
        BounceConfig {
            p_i: self.p_i,
            q_mod: self.q,
            epsilon: self.epsilon,
            phi: self.phi,
            log_v0: self.log_v0,
            z_i: self.z_i,
            dz_i: self.dz_i,
            grid: self.grid(),
            settle_tau: self.settle_tau,
            n_keep: self.orders.iter().map(|n| n.abs()).max().unwrap_or(1).max(1),
        }
    }

    pub fn atom(&self) -> Result<PhysicalAtom> {
        Ok(PhysicalAtom::new(self.atom_mass_u * ATOMIC_MASS_UNIT, self.atom_kappa)?.with_gravity(self.gravity))
    }

    /// Output file stem.
    pub fn stem(&self) -> String {
        self.output_path.clone().unwrap_or_else(|| self.name.clone())
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut c = ExperimentConfig::default();
        c.method = Method::Compare;
        c.sweep = Some(Sweep {
            var: SweepVar::Q,
            start: 1.0,
            stop: 8.0,
            steps: 15,
        });
        c.grid_dt = Some(1.0 / 3.0);
        c.output_path = Some("out/x".into());
        let back = ExperimentConfig::parse(&c.to_text()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_text(), c.to_text());
    }

    #[test]
    fn errors_name_the_line() {
        let err = ExperimentConfig::parse("p_i = 100\n\n# note\nq = fast\n").unwrap_err();
        assert_eq!(err, Error::Config("line 4: q: `fast` is not a number".into()));
        let err = ExperimentConfig::parse("p_i = 100\nwidth = 3\n").unwrap_err();
        assert!(err.to_string().contains("line 2: width: unknown key"), "{err}");
        let err = ExperimentConfig::parse("p_i 100\n").unwrap_err();
        assert!(err.to_string().contains("line 1: expected `key = value`"), "{err}");
    }

    #[test]
    fn sweep_values() {
        let s = Sweep {
            var: SweepVar::Q,
            start: 1.0,
            stop: 8.0,
            steps: 15,
        };
        let v = s.values();
        assert_eq!(v.len(), 15);
        assert_eq!(v[0], 1.0);
        assert_eq!(v[14], 8.0);
        assert!((v[1] - 1.5).abs() < 1e-15);
        assert_eq!(Sweep { steps: 1, ..s }.values(), vec![1.0]);
    }

    #[test]
    fn validation() {
        let mut c = ExperimentConfig::default();
        assert!(c.validate().is_ok());
        c.sweep = Some(Sweep {
            var: SweepVar::Q,
            start: 1.0,
            stop: f64::INFINITY,
            steps: 3,
        });
        assert!(c.validate().is_err());
        c.sweep = None;
        c.method = Method::Compare;
        c.methods = vec![Method::Classical];
        assert!(c.validate().is_err());
        c.methods = vec![Method::Born];
        assert!(c.validate().is_ok());
        c.spectrum = true;
        assert!(c.validate().is_err());
    }

    #[test]
    fn default_bounce_matches_library() {
        let b = ExperimentConfig::default().bounce();
        let lib = BounceConfig::default();
        assert_eq!(b.grid.n_points, lib.grid.n_points);
        assert_eq!(b.grid.dt, lib.grid.dt);
        assert_eq!(BounceConfig { n_keep: lib.n_keep, ..b }, lib);
    }

    #[test]
    fn header_round_trip() {
        let c = ExperimentConfig {
            name: "fig".into(),
            ..Default::default()
        };
        let header: String = c.to_text().lines().map(|l| format!("# {l}\n")).collect();
        let file = format!("# generated by test\n{header}q,u\n1,2\n");
        assert_eq!(ExperimentConfig::from_header(&file).unwrap(), c);
    }
}
