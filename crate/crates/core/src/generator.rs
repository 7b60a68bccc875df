//! Artificial lateral-offset profiles: smoothed Markov path plus shaped
//! noise.

use crate::coarse::{discretize, sample_smoothed_path, CoarseModel};
use crate::error::{invalid, Result};
use crate::fine::{generate_noise_with, FineModel};
use crate::model::{ModelParams, OffsetSeries};
use crate::seed;

/// Provenance recorded with a calibrated model.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModelMetadata {
    pub source_tour: String,
    /// Free-form timestamp; `None` keeps model files byte-reproducible.
    pub calibrated_at: Option<String>,
}

/// A calibrated coarse and fine model sharing one parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelModel {
    pub params: ModelParams,
    pub coarse: CoarseModel,
    pub fine: FineModel,
    pub metadata: ModelMetadata,
}

impl TwoLevelModel {
    pub fn new(
        params: ModelParams,
        coarse: CoarseModel,
        fine: FineModel,
        metadata: ModelMetadata,
    ) -> Result<Self> {
        params.validate()?;
        if coarse.n_c() != params.n_c {
            return Err(invalid("coarse.n_c", "must equal params.n_c"));
        }
        if coarse.dt().to_bits() != params.dt.to_bits() || fine.dt.to_bits() != params.dt.to_bits()
        {
            return Err(invalid("dt", "coarse, fine and params must share dt"));
        }
        Ok(Self {
            params,
            coarse,
            fine,
            metadata,
        })
    }

    /// Every generated value lies within `+-` this bound.
    pub fn output_bound(&self) -> f64 {
        let c = self.coarse.state_centers();
        c[c.len() - 1].max(-c[0]) + self.fine.output_bound()
    }
}

fn check_inputs(initial_offset: f64, duration: f64, dt: f64) -> Result<()> {
    if !(-0.5..=0.5).contains(&initial_offset) {
        return Err(invalid(
            "initial_offset",
            format!("{initial_offset} outside [-0.5, 0.5]"),
        ));
    }
    if !(duration >= dt) {
        return Err(invalid(
            "duration",
            format!("{duration} shorter than one step"),
        ));
    }
    Ok(())
}

/// Smoothed coarse path only, from the coarse stream of `seed`.
pub fn generate_coarse(
    coarse: &CoarseModel,
    initial_offset: f64,
    n_steps: usize,
    seed: u64,
) -> Vec<f64> {
    let start = discretize(initial_offset, coarse.n_c());
    sample_smoothed_path(coarse, start, n_steps, &mut seed::coarse_rng(seed))
}

/// Fine noise only, from the fine stream of `seed`.
pub fn generate_fine(fine: &FineModel, n_steps: usize, seed: u64) -> Vec<f64> {
    generate_noise_with(fine, n_steps, &mut seed::fine_rng(seed))
}

/// Profile of `n_steps` values from the parts of a model.
pub fn generate_from_parts(
    coarse: &CoarseModel,
    fine: &FineModel,
    initial_offset: f64,
    n_steps: usize,
    seed: u64,
) -> Vec<f64> {
    let mut x = generate_coarse(coarse, initial_offset, n_steps, seed);
    for (v, phi) in x.iter_mut().zip(generate_fine(fine, n_steps, seed)) {
        *v += phi;
    }
    x
}

/// Profile of `round(duration / dt)` steps starting in the state of
/// `initial_offset`.
///
/// ```
/// use lanedrift::synthetic::{make_model, KernelSpec, SyntheticSpec, TransitionFamily};
/// use lanedrift::generate_profile;
///
/// let spec = SyntheticSpec {
///     family: TransitionFamily::Identity,
///     kernel: KernelSpec::Zero,
///     ..SyntheticSpec::default()
/// };
/// let model = make_model(&spec).unwrap();
/// let x = generate_profile(&model, 0.12, 10.0, 7).unwrap();
/// assert_eq!(x.len(), 50);
/// assert!(x.values.iter().all(|v| (v - 0.125).abs() < 1e-15));
/// ```
pub fn generate_profile(
    model: &TwoLevelModel,
    initial_offset: f64,
    duration: f64,
    seed: u64,
) -> Result<OffsetSeries> {
    check_inputs(initial_offset, duration, model.params.dt)?;
    let n = model.params.steps_for(duration);
    Ok(OffsetSeries::new(
        model.params.dt,
        generate_from_parts(&model.coarse, &model.fine, initial_offset, n, seed),
    ))
}

/// Coarse-only profile, where the fine part is computed offline.
pub fn generate_coarse_profile(
    model: &TwoLevelModel,
    initial_offset: f64,
    duration: f64,
    seed: u64,
) -> Result<OffsetSeries> {
    check_inputs(initial_offset, duration, model.params.dt)?;
    let n = model.params.steps_for(duration);
    Ok(OffsetSeries::new(
        model.params.dt,
        generate_coarse(&model.coarse, initial_offset, n, seed),
    ))
}
