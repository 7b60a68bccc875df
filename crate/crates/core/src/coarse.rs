//! Coarse movement: a first-order Markov chain over `n_c` lateral states,
//! smoothed with a Gaussian kernel.
//!
//! The lane `[-0.5, 0.5]` is split into `n_c` bins of width `1 / n_c`.
//! State `j` covers `[-0.5 + j / n_c, -0.5 + (j + 1) / n_c)` (the last bin is
//! closed on the right) and is represented by its center. A sampled state
//! path is a step function; convolving it with the kernel removes the steps
//! so that the remainder of the motion can be treated as homogeneous noise.

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::model::OffsetSeries;
use crate::seed;

/// Tolerance on transition row sums.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

pub fn state_center(state: usize, n_c: usize) -> f64 {
    let n = n_c as f64;
    -0.5 + 1.0 / (2.0 * n) + state as f64 / n
}

pub fn state_centers(n_c: usize) -> Vec<f64> {
    (0..n_c).map(|j| state_center(j, n_c)).collect()
}

/// Bin index of `x`. Values outside the lane clamp to the boundary states.
///
/// ```
/// use lanedrift::coarse::discretize;
///
/// assert_eq!(discretize(-0.5, 20), 0);
/// assert_eq!(discretize(0.0, 20), 10);
/// assert_eq!(discretize(0.5, 20), 19);
/// ```
pub fn discretize(x: f64, n_c: usize) -> usize {
    let scaled = (x + 0.5) * n_c as f64;
    if !(scaled > 0.0) {
        return 0;
    }
    (scaled.floor() as usize).min(n_c - 1)
}

/// Symmetric, normalized smoothing weights sampled at `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingKernel {
    pub taps: Vec<f64>,
    pub dt: f64,
}

impl SmoothingKernel {
    pub fn half_width(&self) -> usize {
        self.taps.len() / 2
    }
}

/// Gaussian taps at offsets `m * dt`, `|m| <= round(support / dt)`,
/// normalized to sum 1.
pub fn gaussian_kernel(sigma: f64, support: f64, dt: f64) -> Result<SmoothingKernel> {
    if !(sigma > 0.0) {
        return Err(invalid("smoothing_sigma", "must be > 0"));
    }
    if !(dt > 0.0) {
        return Err(invalid("dt", "must be > 0"));
    }
    if !(support >= dt) {
        return Err(invalid("smoothing_support", "must be >= dt"));
    }
    let half = (support / dt).round() as i64;
    let mut taps: Vec<f64> = (-half..=half)
        .map(|m| {
            let t = m as f64 * dt;
            (-(t * t) / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = taps.iter().sum();
    for w in &mut taps {
        *w /= total;
    }
    Ok(SmoothingKernel { taps, dt })
}

/// Convolve with the kernel, truncating and renormalizing at the edges.
pub fn smooth(series: &OffsetSeries, kernel: &SmoothingKernel) -> OffsetSeries {
    OffsetSeries::new(series.dt, smooth_values(&series.values, kernel))
}

pub fn smooth_values(values: &[f64], kernel: &SmoothingKernel) -> Vec<f64> {
    let n = values.len();
    let half = kernel.half_width();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(half);
        let hi = (i + half + 1).min(n);
        let taps = &kernel.taps[lo + half - i..hi + half - i];
        let window = &values[lo..hi];
        let mut acc = 0.0;
        let mut weight = 0.0;
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for (&w, &x) in taps.iter().zip(window) {
            acc += w * x;
            weight += w;
            min = min.min(x);
            max = max.max(x);
        }
        // roundoff can push a convex combination one ulp outside the hull
        out.push((acc / weight).clamp(min, max));
    }
    out
}

/// Markov chain over lateral states plus its smoothing parameters.
#[derive(Debug, Clone)]
pub struct CoarseModel {
    n_c: usize,
    dt: f64,
    transition: Vec<f64>,
    state_centers: Vec<f64>,
    smoothing_sigma: f64,
    smoothing_support: f64,
    kernel: SmoothingKernel,
    cumulative: Vec<f64>,
}

impl PartialEq for CoarseModel {
    fn eq(&self, other: &Self) -> bool {
        self.n_c == other.n_c
            && self.dt.to_bits() == other.dt.to_bits()
            && self
                .transition
                .iter()
                .map(|p| p.to_bits())
                .eq(other.transition.iter().map(|p| p.to_bits()))
            && self.smoothing_sigma.to_bits() == other.smoothing_sigma.to_bits()
            && self.smoothing_support.to_bits() == other.smoothing_support.to_bits()
    }
}

impl CoarseModel {
    /// `transition` is row-major `n_c x n_c`.
    pub fn new(
        n_c: usize,
        dt: f64,
        transition: Vec<f64>,
        smoothing_sigma: f64,
        smoothing_support: f64,
    ) -> Result<Self> {
        if n_c < 2 {
            return Err(invalid("n_c", "must be >= 2"));
        }
        if transition.len() != n_c * n_c {
            return Err(invalid(
                "transition",
                format!("expected {} entries, got {}", n_c * n_c, transition.len()),
            ));
        }
        if let Some((row, reason)) = check_stochastic(&transition, n_c) {
            return Err(Error::InvalidParameter {
                name: "transition",
                reason: format!("row {row}: {reason}"),
            });
        }
        let kernel = gaussian_kernel(smoothing_sigma, smoothing_support, dt)?;
        let cumulative = transition
            .chunks(n_c)
            .flat_map(|row| {
                row.iter().scan(0.0, |acc, &p| {
                    *acc += p;
                    Some(*acc)
                })
            })
            .collect();
        Ok(Self {
            n_c,
            dt,
            transition,
            state_centers: state_centers(n_c),
            smoothing_sigma,
            smoothing_support,
            kernel,
            cumulative,
        })
    }

    pub fn n_c(&self) -> usize {
        self.n_c
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn transition(&self) -> &[f64] {
        &self.transition
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.transition[state * self.n_c..(state + 1) * self.n_c]
    }

    pub fn probability(&self, from: usize, to: usize) -> f64 {
        self.transition[from * self.n_c + to]
    }

    pub fn state_centers(&self) -> &[f64] {
        &self.state_centers
    }

    pub fn smoothing_sigma(&self) -> f64 {
        self.smoothing_sigma
    }

    pub fn smoothing_support(&self) -> f64 {
        self.smoothing_support
    }

    pub fn kernel(&self) -> &SmoothingKernel {
        &self.kernel
    }

    /// Draw the successor of `state`.
    pub fn step<R: Rng + ?Sized>(&self, state: usize, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let cum = &self.cumulative[state * self.n_c..(state + 1) * self.n_c];
        let j = cum.partition_point(|&c| c <= u);
        if j < self.n_c {
            return j;
        }
        // u landed in the roundoff gap above the last cumulative value
        self.row(state)
            .iter()
            .rposition(|&p| p > 0.0)
            .expect("stochastic row has a positive entry")
    }

    /// Stationary distribution by power iteration.
    pub fn stationary_distribution(&self, iterations: usize) -> Vec<f64> {
        let n = self.n_c;
        let mut pi = vec![1.0 / n as f64; n];
        let mut next = vec![0.0; n];
        for _ in 0..iterations {
            next.iter_mut().for_each(|v| *v = 0.0);
            for a in 0..n {
                for b in 0..n {
                    next[b] += pi[a] * self.transition[a * n + b];
                }
            }
            std::mem::swap(&mut pi, &mut next);
        }
        pi
    }
}

/// First row violating row-stochasticity, if any.
pub(crate) fn check_stochastic(transition: &[f64], n_c: usize) -> Option<(usize, String)> {
    for (row, probs) in transition.chunks(n_c).enumerate() {
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Some((row, format!("entry {p} outside [0, 1]")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Some((row, format!("sums to {sum}")));
        }
    }
    None
}

/// Raw counts and the maximum-likelihood matrix derived from them.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionEstimate {
    pub n_c: usize,
    /// Row-major transition counts.
    pub counts: Vec<u64>,
    /// Row-major probabilities; unvisited rows are self-transitions.
    pub transition: Vec<f64>,
}

impl TransitionEstimate {
    /// Number of outgoing transitions observed from each state.
    pub fn visits(&self) -> Vec<u64> {
        self.counts
            .chunks(self.n_c)
            .map(|r| r.iter().sum())
            .collect()
    }
}

/// Count transitions inside each sequence (never across sequences) and
/// normalize rows.
pub fn estimate_transitions<S: AsRef<[usize]>>(
    sequences: &[S],
    n_c: usize,
) -> Result<TransitionEstimate> {
    if n_c < 2 {
        return Err(invalid("n_c", "must be >= 2"));
    }
    let mut counts = vec![0u64; n_c * n_c];
    for seq in sequences {
        let seq = seq.as_ref();
        if let Some(&bad) = seq.iter().find(|&&s| s >= n_c) {
            return Err(invalid(
                "states",
                format!("state {bad} out of range for n_c = {n_c}"),
            ));
        }
        for w in seq.windows(2) {
            counts[w[0] * n_c + w[1]] += 1;
        }
    }
    if counts.iter().all(|&c| c == 0) {
        return Err(Error::Calibration("no state transitions in input".into()));
    }
    let mut transition = vec![0.0; n_c * n_c];
    for a in 0..n_c {
        let row = &counts[a * n_c..(a + 1) * n_c];
        let total: u64 = row.iter().sum();
        if total == 0 {
            transition[a * n_c + a] = 1.0;
        } else {
            for b in 0..n_c {
                transition[a * n_c + b] = row[b] as f64 / total as f64;
            }
        }
    }
    Ok(TransitionEstimate {
        n_c,
        counts,
        transition,
    })
}

/// Sample a state path of `n_steps` states beginning at `initial_state`.
pub fn sample_chain(
    model: &CoarseModel,
    initial_state: usize,
    n_steps: usize,
    seed: u64,
) -> Vec<usize> {
    sample_chain_with(
        model,
        initial_state,
        n_steps,
        &mut seed::rng_from_seed(seed),
    )
}

pub fn sample_chain_with<R: Rng + ?Sized>(
    model: &CoarseModel,
    initial_state: usize,
    n_steps: usize,
    rng: &mut R,
) -> Vec<usize> {
    assert!(initial_state < model.n_c, "initial state out of range");
    let mut states = Vec::with_capacity(n_steps);
    let mut s = initial_state;
    for i in 0..n_steps {
        if i > 0 {
            s = model.step(s, rng);
        }
        states.push(s);
    }
    states
}

/// Map state indices to their centers (the step-function profile).
pub fn states_to_offsets(states: &[usize], model: &CoarseModel) -> OffsetSeries {
    OffsetSeries::new(
        model.dt,
        states.iter().map(|&s| model.state_centers[s]).collect(),
    )
}

/// Full coarse path: sample, map to centers, smooth.
pub fn sample_smoothed_path<R: Rng + ?Sized>(
    model: &CoarseModel,
    initial_state: usize,
    n_steps: usize,
    rng: &mut R,
) -> Vec<f64> {
    let states = sample_chain_with(model, initial_state, n_steps, rng);
    let steps: Vec<f64> = states.iter().map(|&s| model.state_centers[s]).collect();
    smooth_values(&steps, &model.kernel)
}
