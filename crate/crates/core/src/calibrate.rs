//! End-to-end calibration: segments in, two-level model out.

use crate::coarse::{discretize, estimate_transitions, CoarseModel};
use crate::error::{Error, Result};
use crate::fine::{
    cap, extract_fine_with, fit_kernel, FitConfig, MeasurementRounding, SpectrumFit,
};
use crate::generator::{ModelMetadata, TwoLevelModel};
use crate::model::{DriveLogSample, ModelParams};
use crate::preprocessing::{extract_segments, resample, Segment, SegmentRules};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CalibrationConfig {
    pub params: ModelParams,
    pub rules: SegmentRules,
    pub fit: FitConfig,
    pub rounding: MeasurementRounding,
}

impl CalibrationConfig {
    pub fn new(params: ModelParams) -> Self {
        Self {
            params,
            rules: SegmentRules::from_params(&params),
            ..Default::default()
        }
    }
}

/// A calibrated model plus the numbers worth reporting about it.
#[derive(Debug, Clone)]
pub struct Calibration {
    pub model: TwoLevelModel,
    pub segment_count: usize,
    pub usable_minutes: f64,
    /// Outgoing transitions observed per state.
    pub visits: Vec<u64>,
    pub spectrum: SpectrumFit,
}

/// Resample each tour and cut it into road-following segments.
pub fn prepare_segments(
    tours: &[(String, Vec<DriveLogSample>)],
    config: &CalibrationConfig,
) -> Result<Vec<Segment>> {
    let mut segments = Vec::new();
    for (name, log) in tours {
        let track = resample(log, config.params.sample_rate)?;
        segments.extend(extract_segments(&track, &config.rules, name));
    }
    Ok(segments)
}

pub fn calibrate(
    segments: &[Segment],
    config: &CalibrationConfig,
    metadata: ModelMetadata,
) -> Result<Calibration> {
    let p = config.params;
    p.validate()?;
    if segments.is_empty() {
        return Err(Error::InsufficientData {
            what: "road-following segments",
            needed: 1,
            available: 0,
        });
    }
    let states: Vec<Vec<usize>> = segments
        .iter()
        .map(|s| {
            s.series
                .values
                .iter()
                .map(|&x| discretize(x, p.n_c))
                .collect()
        })
        .collect();
    let estimate = estimate_transitions(&states, p.n_c)?;
    let visits = estimate.visits();
    let coarse = CoarseModel::new(
        p.n_c,
        p.dt,
        estimate.transition,
        p.smoothing_sigma,
        p.smoothing_support,
    )?;

    let capped = segments
        .iter()
        .map(|s| {
            extract_fine_with(&s.series, &p, config.rounding).map(|phi| cap(&phi, p.cap_threshold))
        })
        .collect::<Result<Vec<_>>>()?;
    let (fine, spectrum) = fit_kernel(&capped, &p, &config.fit)?;

    let usable_steps: usize = segments.iter().map(|s| s.len()).sum();
    Ok(Calibration {
        model: TwoLevelModel::new(p, coarse, fine, metadata)?,
        segment_count: segments.len(),
        usable_minutes: usable_steps as f64 * p.dt / 60.0,
        visits,
        spectrum,
    })
}
