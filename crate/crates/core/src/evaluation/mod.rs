//! Validation protocol: real snippets against artificial counterparts with
//! the same initial offset and duration, compared metric by metric.
//!
//! Four modes isolate the parts of the model:
//!
//! | mode          | coarse part               | fine part                       |
//! |---------------|---------------------------|---------------------------------|
//! | `SHIFT_TEST`  | measured                  | measured, capped, shifted 5 s   |
//! | `COARSE_ONLY` | sampled from the chain   | measured, capped                |
//! | `FINE_ONLY`   | measured                  | generated noise                 |
//! | `FULL`        | sampled from the chain   | generated noise                 |

mod ks;
mod metrics;
mod report;

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use ks::{ks_critical_value, ks_distance};
pub use metrics::{compute_metrics, quantile_sorted, Metric, MetricVector};
pub use report::{
    summarize, EvaluationReport, MetricComparison, PopulationSummary, QUANTILE_LADDER,
};

use crate::coarse::CoarseModel;
use crate::error::{Error, Result};
use crate::fine::{cap_values, measured_coarse, FineModel, MeasurementRounding};
use crate::generator::{generate_coarse, generate_fine, generate_from_parts, TwoLevelModel};
use crate::model::{ModelParams, OffsetSeries};
use crate::preprocessing::Segment;
use crate::seed::derive_seed;

/// Circular shift applied to the fine part in the shift test, seconds.
pub const SHIFT_SECONDS: f64 = 5.0;

/// Significance level for the per-metric KS comparison.
pub const KS_ALPHA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EvaluationMode {
    ShiftTest,
    CoarseOnly,
    FineOnly,
    Full,
}

impl EvaluationMode {
    pub const ALL: [EvaluationMode; 4] = [
        EvaluationMode::ShiftTest,
        EvaluationMode::CoarseOnly,
        EvaluationMode::FineOnly,
        EvaluationMode::Full,
    ];

    /// Short name used on the command line.
    pub fn short_name(self) -> &'static str {
        match self {
            EvaluationMode::ShiftTest => "shift",
            EvaluationMode::CoarseOnly => "coarse",
            EvaluationMode::FineOnly => "fine",
            EvaluationMode::Full => "full",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EvaluationMode::ShiftTest => "SHIFT_TEST",
            EvaluationMode::CoarseOnly => "COARSE_ONLY",
            EvaluationMode::FineOnly => "FINE_ONLY",
            EvaluationMode::Full => "FULL",
        }
    }
}

impl fmt::Display for EvaluationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for EvaluationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| s.eq_ignore_ascii_case(m.short_name()) || s.eq_ignore_ascii_case(m.label()))
            .ok_or_else(|| {
                let valid: Vec<_> = Self::ALL.iter().map(|m| m.short_name()).collect();
                format!("unknown mode `{s}` (valid: {})", valid.join(", "))
            })
    }
}

/// The model parts an evaluation may need. Modes that need a missing part
/// fail with [`Error::NotCalibrated`].
#[derive(Debug, Clone, Copy)]
pub struct EvalModels<'a> {
    pub params: &'a ModelParams,
    pub coarse: Option<&'a CoarseModel>,
    pub fine: Option<&'a FineModel>,
    pub rounding: MeasurementRounding,
}

impl<'a> From<&'a TwoLevelModel> for EvalModels<'a> {
    fn from(m: &'a TwoLevelModel) -> Self {
        Self {
            params: &m.params,
            coarse: Some(&m.coarse),
            fine: Some(&m.fine),
            rounding: MeasurementRounding::default(),
        }
    }
}

impl<'a> EvalModels<'a> {
    fn coarse(&self) -> Result<&'a CoarseModel> {
        self.coarse.ok_or(Error::NotCalibrated {
            component: "coarse",
        })
    }

    fn fine(&self) -> Result<&'a FineModel> {
        self.fine.ok_or(Error::NotCalibrated { component: "fine" })
    }
}

/// Consecutive non-overlapping windows of `steps` samples; the remainder is
/// dropped.
pub fn snippet_windows(len: usize, steps: usize) -> impl Iterator<Item = Range<usize>> {
    (0..len / steps).map(move |k| k * steps..(k + 1) * steps)
}

/// Split segments into snippets of `duration` seconds.
pub fn split_snippets(segments: &[Segment], duration: f64) -> Vec<OffsetSeries> {
    segments
        .iter()
        .flat_map(|seg| {
            let steps = crate::model::steps_for_duration(duration, seg.series.dt);
            snippet_windows(seg.len(), steps)
                .map(|r| OffsetSeries::new(seg.series.dt, seg.series.values[r].to_vec()))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Rotate so that `out[i] = values[(i - shift) mod n]`.
pub fn circular_shift(values: &[f64], shift: usize) -> Vec<f64> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let s = shift % n;
    values[n - s..]
        .iter()
        .chain(&values[..n - s])
        .copied()
        .collect()
}

/// Build the artificial counterpart of every real snippet and compare.
pub fn run_mode(
    mode: EvaluationMode,
    segments: &[Segment],
    models: EvalModels<'_>,
    seed: u64,
) -> Result<EvaluationReport> {
    let p = models.params;
    let steps = p.steps_for(p.snippet_duration);
    let shift = p.steps_for(SHIFT_SECONDS);
    let coarse_model = match mode {
        EvaluationMode::CoarseOnly | EvaluationMode::Full => Some(models.coarse()?),
        _ => None,
    };
    let fine_model = match mode {
        EvaluationMode::FineOnly | EvaluationMode::Full => Some(models.fine()?),
        _ => None,
    };

    let mut real = Vec::new();
    let mut artificial = Vec::new();
    let mut real_initial = Vec::new();
    let mut artificial_initial = Vec::new();
    let mut index = 0u64;

    for seg in segments {
        let x = &seg.series.values;
        if x.len() < steps {
            continue;
        }
        let kappa = measured_coarse(x, p, models.rounding)?;
        let phi: Vec<f64> = x.iter().zip(&kappa).map(|(a, b)| a - b).collect();
        let phi_capped = cap_values(&phi, p.cap_threshold);
        let phi_shifted = match mode {
            EvaluationMode::ShiftTest => circular_shift(&phi_capped, shift),
            _ => Vec::new(),
        };

        for r in snippet_windows(x.len(), steps) {
            let snippet = &x[r.clone()];
            let x0 = snippet[0].clamp(-0.5, 0.5);
            let s = derive_seed(seed, index);
            index += 1;
            let art: Vec<f64> = match mode {
                EvaluationMode::ShiftTest => kappa[r.clone()]
                    .iter()
                    .zip(&phi_shifted[r.clone()])
                    .map(|(k, f)| k + f)
                    .collect(),
                EvaluationMode::CoarseOnly => generate_coarse(coarse_model.unwrap(), x0, steps, s)
                    .iter()
                    .zip(&phi_capped[r.clone()])
                    .map(|(k, f)| k + f)
                    .collect(),
                EvaluationMode::FineOnly => kappa[r.clone()]
                    .iter()
                    .zip(generate_fine(fine_model.unwrap(), steps, s))
                    .map(|(k, f)| k + f)
                    .collect(),
                EvaluationMode::Full => {
                    generate_from_parts(coarse_model.unwrap(), fine_model.unwrap(), x0, steps, s)
                }
            };
            real.push(compute_metrics(snippet)?);
            artificial.push(compute_metrics(&art)?);
            real_initial.push(snippet[0]);
            artificial_initial.push(art[0]);
        }
    }
    if real.is_empty() {
        return Err(Error::InsufficientData {
            what: "evaluation snippets",
            needed: 1,
            available: 0,
        });
    }
    Ok(EvaluationReport::new(
        mode,
        seed,
        steps,
        real,
        artificial,
        real_initial,
        artificial_initial,
    ))
}
