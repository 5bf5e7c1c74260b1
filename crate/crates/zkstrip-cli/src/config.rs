//! JSON experiment configuration: every field is optional in the file
//! and filled from the pinned defaults; the fully resolved form is
//! echoed into the run manifest so a run can be reproduced exactly.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use zkstrip::experiments::{ExperimentConfig, InitialData};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub b: Option<f64>,
    pub l: Option<f64>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub k: Option<f64>,
    pub stride: Option<usize>,
    pub nonlinear: Option<bool>,
    /// Optional supplied `C_s^2` for the decay gates (estimated from a
    /// preliminary run when absent).
    pub cs2: Option<f64>,
    pub initial: Option<InitialFile>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialFile {
    pub family: Option<String>,
    pub amplitude: Option<f64>,
    pub center: Option<f64>,
    pub width: Option<f64>,
    pub mode: Option<usize>,
}

/// Fully resolved configuration; serialized into manifests and accepted
/// back as a config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub b: f64,
    pub l: f64,
    pub nx: usize,
    pub ny: usize,
    pub dt: f64,
    pub t_end: f64,
    pub k: f64,
    pub stride: usize,
    pub nonlinear: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cs2: Option<f64>,
    pub initial: ResolvedInitial,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolvedInitial {
    pub family: String,
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
    pub mode: usize,
}

impl ResolvedConfig {
    pub fn to_experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            b: self.b,
            l: self.l,
            nx: self.nx,
            ny: self.ny,
            dt: self.dt,
            t_end: self.t_end,
            k: self.k,
            stride: self.stride,
            nonlinear: self.nonlinear,
            initial: InitialData {
                amplitude: self.initial.amplitude,
                center: self.initial.center,
                width: self.initial.width,
                mode: self.initial.mode,
            },
        }
    }
}

/// Reads a config file and fills every missing field from the defaults.
pub fn load(path: &Path) -> Result<ResolvedConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let file: ConfigFile = serde_json::from_str(&text)
        .with_context(|| format!("cannot parse config {}", path.display()))?;
    resolve(file)
}

pub fn resolve(file: ConfigFile) -> Result<ResolvedConfig> {
    let defaults = ExperimentConfig::defaults();

    let init = file.initial.unwrap_or(InitialFile {
        family: None,
        amplitude: None,
        center: None,
        width: None,
        mode: None,
    });
    let family = init.family.unwrap_or_else(|| "gaussian_sine".to_string());
    if family != "gaussian_sine" {
        bail!("unknown initial-data family {family:?} (supported: gaussian_sine)");
    }
    let initial = ResolvedInitial {
        family,
        amplitude: init.amplitude.unwrap_or(defaults.initial.amplitude),
        center: init.center.unwrap_or(defaults.initial.center),
        width: init.width.unwrap_or(defaults.initial.width),
        mode: init.mode.unwrap_or(defaults.initial.mode),
    };

    let b = file.b.unwrap_or(defaults.b);
    let l = file.l.unwrap_or(10.0 * b);
    let nx = file.nx.unwrap_or(defaults.nx);
    let ny = file.ny.unwrap_or(defaults.ny);
    let k = file.k.unwrap_or(defaults.k);

    let grid = zkstrip::StripGrid::new(b, l, nx, ny)
        .map_err(|e| anyhow::anyhow!("invalid grid parameters: {e}"))?;
    let dt = match file.dt {
        Some(v) => v,
        None => ExperimentConfig::default_dt(&grid, initial.amplitude.abs()),
    };
    let rate = k * std::f64::consts::PI * std::f64::consts::PI / (2.0 * b * b);
    let t_end = match file.t_end {
        Some(v) => v,
        None if rate > 0.0 => 10.0 / rate,
        None => bail!("t_end missing and no default applies (k <= 0)"),
    };

    let resolved = ResolvedConfig {
        b,
        l,
        nx,
        ny,
        dt,
        t_end,
        k,
        stride: file.stride.unwrap_or(defaults.stride),
        nonlinear: file.nonlinear.unwrap_or(true),
        cs2: file.cs2,
        initial,
    };
    // surface invalid numbers (dt <= 0, bad mode index, ...) as config errors
    let exp = resolved.to_experiment();
    exp.build_initial()
        .map_err(|e| anyhow::anyhow!("invalid configuration: {e}"))?;
    if !(exp.dt > 0.0) || !exp.dt.is_finite() {
        bail!("invalid configuration: dt must be positive");
    }
    if !(exp.t_end > 0.0) || !exp.t_end.is_finite() {
        bail!("invalid configuration: t_end must be positive");
    }
    if !(exp.k > 0.0) || !exp.k.is_finite() {
        bail!("invalid configuration: k must be positive");
    }
    if exp.stride == 0 {
        bail!("invalid configuration: stride must be at least 1");
    }
    Ok(resolved)
}
