//! Command-line front end: experiment configs, presets, sweeps and data files.
//!
//! ```text
//! simulate <method> [--preset NAME] [--config FILE] [--set key=val ...]
//!          [--out PATH] [--format csv|json] [--jobs N]
//! ```
//!
//! Settings are applied in order: defaults, preset, config file, `--set`,
//! `--out`/`--format`, and finally the method. Exit codes are 0 on success,
//! 2 for configuration errors, 3 for numerical failures and 1 for I/O errors.

pub mod config;
pub mod output;
pub mod presets;
pub mod run;

use std::path::PathBuf;

use clap::Parser;

pub use config::{ExperimentConfig, Method, OutputFormat, Sweep, SweepVar};
pub use output::{config_from_output, OutputFile, Table};
pub use presets::{find_preset, preset_names, presets};
pub use run::execute;

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "simulate", version, about = "Sideband spectra and interferometer fringes for a modulated atom mirror")]
pub struct Args {
    /// born, semiclassical, tdse, classical, interferometer, compare or units
    pub method: Method,
    /// Start from a named parameter set.
    #[arg(long)]
    pub preset: Option<String>,
    /// Flat `key = value` file applied after the preset.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one key; may be repeated.
    #[arg(long = "set", value_name = "KEY=VAL")]
    pub set: Vec<String>,
    /// Output path stem.
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub format: Option<OutputFormat>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl Args {
    /// Assemble the config described by the arguments.
    pub fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.preset {
            Some(name) => find_preset(name).ok_or_else(|| {
                Error::Config(format!("unknown preset `{name}` (available: {})", preset_names().join(", ")))
            })?,
            None => ExperimentConfig::default(),
        };
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            cfg.apply_text(&text)
                .map_err(|e| Error::Config(format!("{}: {}", path.display(), e.to_string().trim_start_matches("invalid configuration: "))))?;
        }
        for s in &self.set {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects key=val, got `{s}`")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        if let Some(out) = &self.out {
            cfg.output_path = Some(out.clone());
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        cfg.method = self.method;
        if self.jobs == Some(0) {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Domain(_) | Error::ClosedChannel { .. } => 2,
        Error::Instability(_) | Error::Integration(_) | Error::Precondition(_) | Error::MissingSideband(_) => 3,
        Error::Io(_) => 1,
    }
}

/// Run the experiment and write its files; returns the written paths.
pub fn run(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<Vec<PathBuf>> {
    let files = execute(cfg, jobs)?;
    let stem = output::normalize_stem(&cfg.stem(), cfg.format);
    output::write_all(&files, cfg, &stem, cfg.format)
}

/// Entry point for the binary.
pub fn main_with(args: Args) -> i32 {
    let result = args.config().and_then(|cfg| {
        let paths = run(&cfg, args.jobs)?;
        Ok((cfg, paths))
    });
    match result {
        Ok((_, paths)) => {
            for p in paths {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("simulate: {e}");
            exit_code(&e)
        }
    }
}
