//! Flat `key = value` scenario configuration.
//!
//! Files hold one assignment per line; `#` starts a comment. Command-line
//! `--set key=value` overrides are applied after the file, in order, so the
//! last assignment of a key wins.

use std::path::PathBuf;

use serde::Serialize;

use crate::design::{FabricationConstants, InverseLength, Length};
use crate::model::ChainId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Simulate,
    Spectrum,
    Rwa,
    Design,
    Sweep,
    Report,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "simulate" => Mode::Simulate,
            "spectrum" => Mode::Spectrum,
            "rwa" => Mode::Rwa,
            "design" => Mode::Design,
            "sweep" => Mode::Sweep,
            "report" => Mode::Report,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Truncation {
    Auto,
    Explicit(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub mode: Mode,
    pub name: String,
    pub g_over_omega: f64,
    pub omega0_over_omega: f64,
    pub chain: ChainId,
    pub initial_site: usize,
    pub horizon_periods: f64,
    pub samples: usize,
    pub truncation: Truncation,
    pub tail_tol: f64,
    pub eigen_count: usize,
    pub sweep_g_over_omega: Vec<f64>,
    pub sweep_omega0_over_omega: Vec<f64>,
    pub fab: FabricationConstants,
    pub bend_radius: Length,
    pub pitch: Length,
    pub design_sites: usize,
    pub target_omega: Option<InverseLength>,
    pub strict_design: bool,
    pub out_dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            mode: Mode::Simulate,
            name: "custom".into(),
            g_over_omega: 2.0,
            omega0_over_omega: 0.0,
            chain: ChainId::F,
            initial_site: 0,
            horizon_periods: crate::propagate::DEFAULT_HORIZON_PERIODS,
            samples: 401,
            truncation: Truncation::Auto,
            tail_tol: crate::propagate::DEFAULT_TAIL_TOL,
            eigen_count: 10,
            sweep_g_over_omega: vec![0.5, 1.0, 2.0],
            sweep_omega0_over_omega: vec![0.0, 0.3, 1.0],
            fab: FabricationConstants::default(),
            bend_radius: Length::from_cm(60.0),
            pitch: Length::from_um(6.0),
            design_sites: 25,
            target_omega: None,
            strict_design: false,
            out_dir: PathBuf::from("out"),
            formats: vec![Format::Csv],
        }
    }
}

/// A config problem, located by file line or by override.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{location}: {message}")]
pub struct ConfigError {
    pub location: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(location: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { location: location.into(), message: message.into() }
    }
}

pub const PRESETS: [&str; 3] = ["fig2", "fig3", "design-example"];

/// Code-defined scenario presets.
pub fn preset(name: &str) -> Option<ScenarioConfig> {
    let base = ScenarioConfig { name: name.to_string(), ..ScenarioConfig::default() };
    match name {
        "fig2" => Some(ScenarioConfig {
            mode: Mode::Simulate,
            g_over_omega: 2.0,
            omega0_over_omega: 0.0,
            horizon_periods: 1.5,
            formats: vec![Format::Csv, Format::Svg],
            ..base
        }),
        "fig3" => Some(ScenarioConfig {
            mode: Mode::Simulate,
            g_over_omega: 2.0,
            omega0_over_omega: 0.3,
            horizon_periods: 2.5,
            formats: vec![Format::Csv, Format::Svg],
            ..base
        }),
        "design-example" => Some(ScenarioConfig {
            mode: Mode::Design,
            g_over_omega: 2.0,
            omega0_over_omega: 0.0,
            design_sites: 25,
            formats: vec![Format::Csv, Format::Json],
            ..base
        }),
        _ => None,
    }
}

fn parse_f64(v: &str) -> Result<f64, String> {
    v.parse::<f64>().map_err(|_| format!("expected a number, got `{v}`"))
}

fn parse_usize(v: &str) -> Result<usize, String> {
    v.parse::<usize>().map_err(|_| format!("expected a non-negative integer, got `{v}`"))
}

fn parse_list(v: &str) -> Result<Vec<f64>, String> {
    let items: Result<Vec<f64>, String> = v.split(',').map(|s| parse_f64(s.trim())).collect();
    let items = items?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(items)
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got `{v}`")),
    }
}

impl ScenarioConfig {
    /// Applies one assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        match key.trim() {
            "mode" => self.mode = Mode::parse(v).ok_or_else(|| format!("unknown mode `{v}`"))?,
            "name" => self.name = v.to_string(),
            "g_over_omega" => self.g_over_omega = parse_f64(v)?,
            "omega0_over_omega" => self.omega0_over_omega = parse_f64(v)?,
            "chain" => self.chain = v.parse().map_err(|e: crate::Error| e.to_string())?,
            "initial_site" => self.initial_site = parse_usize(v)?,
            "horizon_periods" => self.horizon_periods = parse_f64(v)?,
            "samples" => self.samples = parse_usize(v)?,
            "truncation" => {
                self.truncation = if v == "auto" { Truncation::Auto } else { Truncation::Explicit(parse_usize(v)?) }
            }
            "tail_tol" => self.tail_tol = parse_f64(v)?,
            "eigen_count" => self.eigen_count = parse_usize(v)?,
            "sweep_g_over_omega" => self.sweep_g_over_omega = parse_list(v)?,
            "sweep_omega0_over_omega" => self.sweep_omega0_over_omega = parse_list(v)?,
            "coupling_prefactor" => self.fab.coupling_prefactor = InverseLength::parse(v).map_err(|e| e.to_string())?,
            "coupling_decay" => self.fab.coupling_decay = InverseLength::parse(v).map_err(|e| e.to_string())?,
            "substrate_index" => self.fab.substrate_index = parse_f64(v)?,
            "wavelength" => self.fab.wavelength = Length::parse(v).map_err(|e| e.to_string())?,
            "bend_radius" => self.bend_radius = Length::parse(v).map_err(|e| e.to_string())?,
            "pitch" => self.pitch = Length::parse(v).map_err(|e| e.to_string())?,
            "design_sites" => self.design_sites = parse_usize(v)?,
            "target_omega" => {
                self.target_omega =
                    if v == "none" { None } else { Some(InverseLength::parse(v).map_err(|e| e.to_string())?) }
            }
            "strict_design" => self.strict_design = parse_bool(v)?,
            "out" => self.out_dir = PathBuf::from(v),
            "format" => self.formats = parse_formats(v)?,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    /// Applies every assignment of a config file.
    pub fn apply_text(&mut self, text: &str, source: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let loc = format!("{source}:{}", i + 1);
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::new(&loc, format!("expected `key = value`, got `{line}`")))?;
            self.set(k, v).map_err(|m| ConfigError::new(&loc, m))?;
        }
        Ok(())
    }

    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let loc = format!("--set {assignment}");
        let (k, v) = assignment.split_once('=').ok_or_else(|| ConfigError::new(&loc, "expected key=value"))?;
        self.set(k, v).map_err(|m| ConfigError::new(&loc, m))
    }

    /// Checks cross-field invariants.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |field: &str, msg: String| Err(ConfigError::new(field, msg));
        if !(self.g_over_omega.is_finite() && self.g_over_omega >= 0.0) {
            return bad("g_over_omega", format!("must be >= 0, got {}", self.g_over_omega));
        }
        if !(self.omega0_over_omega.is_finite() && self.omega0_over_omega >= 0.0) {
            return bad("omega0_over_omega", format!("must be >= 0, got {}", self.omega0_over_omega));
        }
        if !(self.horizon_periods.is_finite() && self.horizon_periods > 0.0) {
            return bad("horizon_periods", format!("must be > 0, got {}", self.horizon_periods));
        }
        if self.samples < 2 {
            return bad("samples", format!("must be >= 2, got {}", self.samples));
        }
        if let Truncation::Explicit(n) = self.truncation {
            if n < 2 {
                return bad("truncation", format!("must be >= 2, got {n}"));
            }
            if self.initial_site >= n {
                return bad("initial_site", format!("{} must be < truncation {n}", self.initial_site));
            }
        }
        if !(self.tail_tol > 0.0 && self.tail_tol < 1.0) {
            return bad("tail_tol", format!("must lie in (0, 1), got {}", self.tail_tol));
        }
        if self.design_sites < 2 {
            return bad("design_sites", format!("must be >= 2, got {}", self.design_sites));
        }
        if self.eigen_count == 0 {
            return bad("eigen_count", "must be >= 1".into());
        }
        if self.mode == Mode::Rwa && !self.initial_site.is_multiple_of(2) {
            return bad("initial_site", format!("rwa pairs start on an even site, got {}", self.initial_site));
        }
        if self.formats.is_empty() {
            return bad("format", "at least one format is required".into());
        }
        Ok(())
    }
}

pub fn parse_formats(v: &str) -> Result<Vec<Format>, String> {
    let mut out = Vec::new();
    for item in v.split(',') {
        let f = match item.trim() {
            "csv" => Format::Csv,
            "json" => Format::Json,
            "svg" => Format::Svg,
            other => return Err(format!("unknown format `{other}`")),
        };
        if !out.contains(&f) {
            out.push(f);
        }
    }
    Ok(out)
}
