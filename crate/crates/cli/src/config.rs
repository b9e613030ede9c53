use std::path::{Path, PathBuf};

use dunkl_core::curve::CurveKind;
use dunkl_core::groups::{generate_group, make_root_system, Family, ReflectionGroup, RootSystem};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    #[serde(flatten)]
    pub family: Family,
    /// Per root orbit, or per positive root.
    pub multiplicities: Vec<f64>,
}

impl GroupSpec {
    pub fn build(&self) -> Result<(RootSystem, ReflectionGroup), CliError> {
        let rs = make_root_system(self.family, &self.multiplicities).map_err(CliError::config)?;
        let g = generate_group(&rs).map_err(CliError::config)?;
        Ok((rs, g))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pair {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelParams {
    pub pairs: Vec<Pair>,
    #[serde(default = "default_series_tol")]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfPlane {
    pub x: Vec<f64>,
    pub thetas: Vec<f64>,
    #[serde(default = "default_halfplane_t")]
    pub t_final: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymParams {
    /// Every `y` is run against every curve.
    pub y: Vec<Vec<f64>>,
    pub curves: Vec<CurveKind>,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    #[serde(default = "default_checkpoints")]
    pub n_checkpoints: usize,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    /// Optional half-plane limits at the first `y`.
    #[serde(default)]
    pub half_plane: Option<HalfPlane>,
    /// Where to write the CSV checkpoint trace alongside a JSON report.
    #[serde(default)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatParams {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WienerParams {
    pub x: Vec<f64>,
    pub n_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// One experiment record. Only the section matching the command is read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub group: GroupSpec,
    #[serde(default)]
    pub kernel: Option<KernelParams>,
    #[serde(default)]
    pub asym: Option<AsymParams>,
    #[serde(default)]
    pub heat: Option<HeatParams>,
    #[serde(default)]
    pub wiener: Option<WienerParams>,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_series_tol() -> f64 {
    1e-14
}
fn default_t_final() -> f64 {
    1e4
}
fn default_halfplane_t() -> f64 {
    1e3
}
fn default_checkpoints() -> usize {
    12
}
fn default_rtol() -> f64 {
    1e-11
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

pub fn check_point(name: &str, v: &[f64], dim: usize) -> Result<(), CliError> {
    if v.len() != dim {
        return Err(CliError::Config(format!("{name} has {} entries, the group acts on R^{dim}", v.len())));
    }
    if v.iter().any(|a| !a.is_finite()) {
        return Err(CliError::Config(format!("{name} has non-finite entries")));
    }
    Ok(())
}

pub fn check_positive(name: &str, v: f64) -> Result<(), CliError> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(CliError::Config(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

pub fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    s.as_ref().ok_or_else(|| CliError::Config(format!("config has no \"{name}\" section")))
}
