//! Shared domain types and the conversion from marking distances to the
//! relative lateral position.
//!
//! The relative lateral position is measured in lane widths: `0` is the lane
//! center, `-0.5` puts the vehicle center over the left marking and `+0.5`
//! over the right marking.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// One raw record of a recorded tour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveLogSample {
    /// Seconds since tour start.
    pub t: f64,
    /// Meters to the left lane marking. `NaN` marks a missing value.
    pub dist_left: f64,
    /// Meters to the right lane marking. `NaN` marks a missing value.
    pub dist_right: f64,
    /// Longitudinal velocity in km/h.
    pub v_lon: f64,
    pub lane_id: Option<i64>,
}

impl DriveLogSample {
    pub fn relative_offset(&self) -> Result<f64> {
        relative_offset(self.dist_left, self.dist_right)
    }

    /// A sample is valid when both marking distances describe a lane of
    /// positive width and the velocity is known.
    pub fn is_valid(&self) -> bool {
        self.v_lon.is_finite() && self.relative_offset().is_ok()
    }
}

/// Relative lateral position from the distances to the left and right
/// lane markings.
///
/// ```
/// use lanedrift::relative_offset;
///
/// assert_eq!(relative_offset(1.8, 1.8).unwrap(), 0.0);
/// assert_eq!(relative_offset(0.0, 3.6).unwrap(), -0.5);
/// assert_eq!(relative_offset(3.6, 0.0).unwrap(), 0.5);
/// assert!(relative_offset(-0.1, 3.6).is_err());
/// ```
pub fn relative_offset(dist_left: f64, dist_right: f64) -> Result<f64> {
    let width = dist_left + dist_right;
    // NaN fails every comparison, so missing values land here too.
    if !(dist_left >= 0.0 && dist_right >= 0.0 && width > 0.0 && width.is_finite()) {
        return Err(Error::InvalidSample {
            dist_left,
            dist_right,
        });
    }
    Ok((dist_left - dist_right) / (2.0 * width))
}

/// Uniformly sampled relative lateral positions; sample `i` sits at `i * dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetSeries {
    pub dt: f64,
    pub values: Vec<f64>,
}

impl OffsetSeries {
    pub fn new(dt: f64, values: Vec<f64>) -> Self {
        debug_assert!(dt > 0.0);
        Self { dt, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.values.len() as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| i as f64 * self.dt)
    }
}

/// Parameters of the two-level model. The defaults are the values used for
/// highway road-following data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Number of discrete lateral states.
    pub n_c: usize,
    /// Step length in seconds.
    pub dt: f64,
    /// Standard deviation of the Gaussian smoothing kernel, seconds.
    pub smoothing_sigma: f64,
    /// Half-width of the smoothing kernel support, seconds.
    pub smoothing_support: f64,
    /// Symmetric cap applied to the extracted fine movement.
    pub cap_threshold: f64,
    /// Minimum longitudinal velocity for road-following, km/h.
    pub v_min: f64,
    /// Model sample rate in Hz; `sample_rate * dt == 1`.
    pub sample_rate: f64,
    /// Evaluation snippet length, seconds.
    #[serde(default = "default_snippet_duration")]
    pub snippet_duration: f64,
}

fn default_snippet_duration() -> f64 {
    10.0
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            n_c: 20,
            dt: 0.2,
            smoothing_sigma: 0.6,
            smoothing_support: 1.0,
            cap_threshold: 0.03,
            v_min: 40.0,
            sample_rate: 5.0,
            snippet_duration: default_snippet_duration(),
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_c < 2 {
            return Err(invalid("n_c", format!("must be >= 2, got {}", self.n_c)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", format!("must be > 0, got {}", self.dt)));
        }
        if !(self.smoothing_sigma > 0.0) {
            return Err(invalid("smoothing_sigma", "must be > 0"));
        }
        if !(self.smoothing_support >= self.smoothing_sigma) {
            return Err(invalid("smoothing_support", "must be >= smoothing_sigma"));
        }
        if !(self.cap_threshold > 0.0) {
            return Err(invalid("cap_threshold", "must be > 0"));
        }
        if !self.v_min.is_finite() {
            return Err(invalid("v_min", "must be finite"));
        }
        if !((self.sample_rate * self.dt - 1.0).abs() < 1e-9) {
            return Err(invalid(
                "sample_rate",
                format!(
                    "sample_rate * dt must equal 1 (got {} * {})",
                    self.sample_rate, self.dt
                ),
            ));
        }
        if !(self.snippet_duration >= self.dt) {
            return Err(invalid("snippet_duration", "must be >= dt"));
        }
        Ok(())
    }

    /// Number of model steps covering `duration` seconds, rounded to the
    /// nearest step and never less than one.
    pub fn steps_for(&self, duration: f64) -> usize {
        steps_for_duration(duration, self.dt)
    }
}

pub fn steps_for_duration(duration: f64, dt: f64) -> usize {
    ((duration / dt).round() as usize).max(1)
}
