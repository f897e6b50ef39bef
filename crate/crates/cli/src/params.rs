//! Parameter resolution: built-in defaults, then a JSON config file,
//! then explicit flags, each layer overriding the previous one.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use vortex_core::config::SpectralConfig;
use vortex_core::error::{Result, VortexError};
use vortex_core::stability::EvolutionConfig;

/// Shared flags accepted by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct CommonFlags {
    /// JSON file carrying any of the shared parameters by flag name.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Circulation of the vortex.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Strain asymmetry.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Outer radius of the computational disk.
    #[arg(long)]
    pub rmax: Option<f64>,
    /// Number of radial nodes.
    #[arg(long)]
    pub nr: Option<usize>,
    /// Azimuthal band limit.
    #[arg(long)]
    pub nmodes: Option<usize>,
    /// Relative residual target of the fixed-point solver.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Time step of the evolution integrator.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Final time of the evolution integrator.
    #[arg(long)]
    pub tfinal: Option<f64>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Seed for generated perturbation fields.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// The same parameters as optional JSON keys.  Unknown keys are
/// rejected so typos surface as configuration errors.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
    pub rmax: Option<f64>,
    pub nr: Option<usize>,
    pub nmodes: Option<usize>,
    pub tol: Option<f64>,
    pub dt: Option<f64>,
    pub tfinal: Option<f64>,
    pub seed: Option<u64>,
}

fn load_file(path: &Path) -> Result<FileConfig> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Fully resolved run parameters.
#[derive(Debug, Clone)]
pub struct Params {
    pub spectral: SpectralConfig,
    pub evolution: EvolutionConfig,
    pub alpha: Option<f64>,
    pub lambda: f64,
    pub seed: u64,
    pub out: PathBuf,
    /// Whether the band limit came from the user rather than defaults.
    pub nmodes_explicit: bool,
}

impl CommonFlags {
    pub fn resolve(&self) -> Result<Params> {
        let file = match &self.config {
            Some(path) => load_file(path)?,
            None => FileConfig::default(),
        };
        let mut spectral = SpectralConfig::default();
        if let Some(v) = self.rmax.or(file.rmax) {
            spectral.r_max = v;
        }
        if let Some(v) = self.nr.or(file.nr) {
            spectral.n_r = v;
        }
        if let Some(v) = self.nmodes.or(file.nmodes) {
            spectral.n_modes = v;
        }
        if let Some(v) = self.tol.or(file.tol) {
            spectral.picard_tol = v;
        }
        spectral.validate()?;

        let mut evolution = EvolutionConfig::default();
        if let Some(v) = self.dt.or(file.dt) {
            evolution.dt = v;
        }
        if let Some(v) = self.tfinal.or(file.tfinal) {
            evolution.t_final = v;
            // Keep the fit window's proportions when the horizon moves.
            evolution.fit_window = (0.25 * v, v);
        }
        evolution.validate()?;

        Ok(Params {
            spectral,
            evolution,
            alpha: self.alpha.or(file.alpha),
            lambda: self.lambda.or(file.lambda).unwrap_or(0.0),
            seed: self.seed.or(file.seed).unwrap_or(17),
            out: self.out.clone(),
            nmodes_explicit: self.nmodes.or(file.nmodes).is_some(),
        })
    }
}

impl Params {
    pub fn require_alpha(&self) -> Result<f64> {
        self.alpha
            .ok_or_else(|| VortexError::config("alpha", "required by this subcommand"))
    }
}

/// Parses a comma-separated list of floats, as taken by the sweep and
/// check flags.
pub fn parse_list(name: &'static str, text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        out.push(part.parse::<f64>().map_err(|e| {
            VortexError::config(name, format!("cannot parse `{part}`: {e}"))
        })?);
    }
    if out.is_empty() {
        return Err(VortexError::config(name, "needs at least one value"));
    }
    Ok(out)
}
