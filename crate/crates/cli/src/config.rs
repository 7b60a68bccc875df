//! Run configuration: built-in defaults, then an optional TOML file, then
//! command-line flags.

use std::path::Path;

use anyhow::Context;
use clap::Args;
use serde::{Deserialize, Serialize};

use lanedrift::fine::{FitConfig, MeasurementRounding};
use lanedrift::preprocessing::SegmentRules;
use lanedrift::{CalibrationConfig, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Rounding {
    #[default]
    StateCenters,
    DoubleWidth,
}

impl From<Rounding> for MeasurementRounding {
    fn from(r: Rounding) -> Self {
        match r {
            Rounding::StateCenters => MeasurementRounding::StateCenters,
            Rounding::DoubleWidth => MeasurementRounding::DoubleWidth,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n_c: usize,
    pub dt: f64,
    pub smoothing_sigma: f64,
    pub smoothing_support: f64,
    pub cap_threshold: f64,
    pub v_min: f64,
    pub sample_rate: f64,
    pub snippet_duration: f64,
    pub knot_count: usize,
    pub window_length: usize,
    pub jump_threshold: f64,
    pub guard_steps: usize,
    pub rounding: Rounding,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = ModelParams::default();
        let rules = SegmentRules::default();
        let fit = FitConfig::default();
        Self {
            n_c: p.n_c,
            dt: p.dt,
            smoothing_sigma: p.smoothing_sigma,
            smoothing_support: p.smoothing_support,
            cap_threshold: p.cap_threshold,
            v_min: p.v_min,
            sample_rate: p.sample_rate,
            snippet_duration: p.snippet_duration,
            knot_count: fit.knot_count,
            window_length: fit.welch.window_length,
            jump_threshold: rules.jump_threshold,
            guard_steps: rules.guard_steps,
            rounding: Rounding::default(),
        }
    }
}

/// Flags that override the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Number of lateral states.
    #[arg(long)]
    pub n_c: Option<usize>,
    /// Step length, seconds.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Smoothing kernel standard deviation, seconds.
    #[arg(long)]
    pub smoothing_sigma: Option<f64>,
    /// Smoothing kernel half-support, seconds.
    #[arg(long)]
    pub smoothing_support: Option<f64>,
    /// Fine-movement cap.
    #[arg(long)]
    pub cap_threshold: Option<f64>,
    /// Minimum road-following velocity, km/h.
    #[arg(long)]
    pub v_min: Option<f64>,
    /// Resampling rate, Hz.
    #[arg(long)]
    pub sample_rate: Option<f64>,
    /// Evaluation snippet length, seconds.
    #[arg(long)]
    pub snippet_duration: Option<f64>,
    /// Knots of the piecewise-linear damping fit.
    #[arg(long)]
    pub knot_count: Option<usize>,
    /// Spectral window length, samples.
    #[arg(long)]
    pub window_length: Option<usize>,
    /// Offset jump that marks a lane change.
    #[arg(long)]
    pub jump_threshold: Option<f64>,
    /// Steps dropped on each side of a lane change.
    #[arg(long)]
    pub guard_steps: Option<usize>,
    /// Rounding used when extracting the fine movement.
    #[arg(long, value_enum)]
    pub rounding: Option<Rounding>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Defaults, then `file` if given, then `flags`.
    pub fn resolve(file: Option<&Path>, flags: &Overrides) -> anyhow::Result<Self> {
        let mut c = match file {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        macro_rules! apply {
            ($($f:ident),*) => { $( if let Some(v) = flags.$f { c.$f = v; } )* };
        }
        apply!(
            n_c,
            dt,
            smoothing_sigma,
            smoothing_support,
            cap_threshold,
            v_min,
            sample_rate,
            snippet_duration,
            knot_count,
            window_length,
            jump_threshold,
            guard_steps,
            rounding
        );
        Ok(c)
    }

    pub fn params(&self) -> ModelParams {
        ModelParams {
            n_c: self.n_c,
            dt: self.dt,
            smoothing_sigma: self.smoothing_sigma,
            smoothing_support: self.smoothing_support,
            cap_threshold: self.cap_threshold,
            v_min: self.v_min,
            sample_rate: self.sample_rate,
            snippet_duration: self.snippet_duration,
        }
    }

    /// Calibration settings; segment rules and fit settings come from the
    /// config, model parameters from `params`.
    pub fn calibration(&self, params: ModelParams) -> CalibrationConfig {
        let mut cfg = CalibrationConfig::new(params);
        cfg.rules.jump_threshold = self.jump_threshold;
        cfg.rules.guard_steps = self.guard_steps;
        cfg.fit.knot_count = self.knot_count;
        cfg.fit.welch.window_length = self.window_length;
        cfg.rounding = self.rounding.into();
        cfg
    }
}
