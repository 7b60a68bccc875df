//! Wall-clock timing of profile generation.

use std::hint::black_box;
use std::time::Instant;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::generator::{generate_coarse, generate_from_parts, TwoLevelModel};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub steps: usize,
    pub repetitions: usize,
    /// Seconds per repetition, full model.
    pub full_seconds: Vec<f64>,
    /// Seconds per repetition, coarse part only.
    pub coarse_seconds: Vec<f64>,
    pub full_best: f64,
    pub coarse_best: f64,
    /// Simulated time over wall time for the best full run.
    pub speedup: f64,
    /// `(full - coarse) / full` for the best runs: the share spent on noise.
    pub noise_fraction: f64,
}

fn time<F: FnMut() -> Vec<f64>>(mut f: F) -> f64 {
    let start = Instant::now();
    black_box(f());
    start.elapsed().as_secs_f64()
}

/// Time `steps`-value generation single-threaded, `repetitions` times each
/// for the full model and the coarse part alone. Runs alternate so drift in
/// machine load hits both equally.
pub fn run_bench(
    model: &TwoLevelModel,
    steps: usize,
    repetitions: usize,
    seed: u64,
) -> Result<BenchReport> {
    if steps == 0 {
        return Err(invalid("steps", "must be at least 1"));
    }
    if repetitions == 0 {
        return Err(invalid("repetitions", "must be at least 1"));
    }
    let mut full_seconds = Vec::with_capacity(repetitions);
    let mut coarse_seconds = Vec::with_capacity(repetitions);
    for rep in 0..repetitions as u64 {
        let s = seed.wrapping_add(rep);
        full_seconds.push(time(|| {
            generate_from_parts(&model.coarse, &model.fine, 0.0, steps, s)
        }));
        coarse_seconds.push(time(|| generate_coarse(&model.coarse, 0.0, steps, s)));
    }
    let best = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let full_best = best(&full_seconds);
    let coarse_best = best(&coarse_seconds);
    Ok(BenchReport {
        steps,
        repetitions,
        full_seconds,
        coarse_seconds,
        full_best,
        coarse_best,
        speedup: steps as f64 * model.params.dt / full_best.max(f64::MIN_POSITIVE),
        noise_fraction: (full_best - coarse_best) / full_best.max(f64::MIN_POSITIVE),
    })
}
