//! Fine movement: the residual after removing the smoothed coarse path,
//! modeled as uniform white noise shaped by a zero-phase kernel.
//!
//! Calibration extracts the residual from measurements, caps it, and fits
//! the kernel's damping function so that the averaged spectrum of filtered
//! noise matches the averaged spectrum of the capped residual.

use rand::Rng;

use crate::coarse::{discretize, gaussian_kernel, smooth_values, state_center};
use crate::error::{invalid, Error, Result};
use crate::model::{ModelParams, OffsetSeries};
use crate::seed;
use crate::spectrum::{
    average_magnitude, fit_piecewise_linear, kernel_from_damping, kernel_gain, knot_grid,
    uniform_noise_floor, PiecewiseLinear, WelchConfig,
};

/// Shaping kernel and driving-noise amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct FineModel {
    pub kernel_taps: Vec<f64>,
    pub dt: f64,
    /// Half-width `r` of the uniform driving noise on `[-r, r]`.
    pub noise_halfwidth: f64,
    pub cap_threshold: f64,
}

impl FineModel {
    pub fn new(
        kernel_taps: Vec<f64>,
        dt: f64,
        noise_halfwidth: f64,
        cap_threshold: f64,
    ) -> Result<Self> {
        if kernel_taps.is_empty() {
            return Err(invalid("kernel_taps", "must not be empty"));
        }
        if let Some(i) = kernel_taps.iter().position(|k| !k.is_finite()) {
            return Err(invalid("kernel_taps", format!("tap {i} is not finite")));
        }
        if !(dt > 0.0) {
            return Err(invalid("dt", "must be > 0"));
        }
        if !(noise_halfwidth > 0.0 && noise_halfwidth.is_finite()) {
            return Err(invalid("noise_halfwidth", "must be > 0"));
        }
        if !(cap_threshold > 0.0) {
            return Err(invalid("cap_threshold", "must be > 0"));
        }
        Ok(Self {
            kernel_taps,
            dt,
            noise_halfwidth,
            cap_threshold,
        })
    }

    /// Largest possible `|phi|`: `r * sum(|k|)`.
    pub fn output_bound(&self) -> f64 {
        self.noise_halfwidth * self.kernel_taps.iter().map(|k| k.abs()).sum::<f64>()
    }

    /// `|F{k}|` at `frequency` Hz.
    pub fn gain(&self, frequency: f64) -> f64 {
        kernel_gain(&self.kernel_taps, 1.0 / self.dt, frequency)
    }
}

/// How measured positions are rounded before smoothing when extracting the
/// fine residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeasurementRounding {
    /// Replace each value by the center of its state bin (width `1 / n_c`).
    #[default]
    StateCenters,
    /// Round to the nearest multiple of `2 / n_c`.
    DoubleWidth,
}

/// Smoothed rounded measurement, i.e. the measured coarse path.
pub fn measured_coarse(
    x_meas: &[f64],
    params: &ModelParams,
    rounding: MeasurementRounding,
) -> Result<Vec<f64>> {
    let kernel = gaussian_kernel(params.smoothing_sigma, params.smoothing_support, params.dt)?;
    let n_c = params.n_c;
    let rounded: Vec<f64> = match rounding {
        MeasurementRounding::StateCenters => x_meas
            .iter()
            .map(|&x| state_center(discretize(x, n_c), n_c))
            .collect(),
        MeasurementRounding::DoubleWidth => {
            let step = 2.0 / n_c as f64;
            x_meas
                .iter()
                .map(|&x| ((x.clamp(-0.5, 0.5) / step).round() * step).clamp(-0.5, 0.5))
                .collect()
        }
    };
    Ok(smooth_values(&rounded, &kernel))
}

/// Residual fine movement `x - smooth(round(x))`.
pub fn extract_fine(x_meas: &OffsetSeries, params: &ModelParams) -> Result<OffsetSeries> {
    extract_fine_with(x_meas, params, MeasurementRounding::default())
}

pub fn extract_fine_with(
    x_meas: &OffsetSeries,
    params: &ModelParams,
    rounding: MeasurementRounding,
) -> Result<OffsetSeries> {
    let coarse = measured_coarse(&x_meas.values, params, rounding)?;
    Ok(OffsetSeries::new(
        x_meas.dt,
        x_meas
            .values
            .iter()
            .zip(&coarse)
            .map(|(x, c)| x - c)
            .collect(),
    ))
}

/// Clip to `[-threshold, threshold]`.
pub fn cap(phi: &OffsetSeries, threshold: f64) -> OffsetSeries {
    OffsetSeries::new(phi.dt, cap_values(&phi.values, threshold))
}

pub fn cap_values(phi: &[f64], threshold: f64) -> Vec<f64> {
    phi.iter().map(|v| v.clamp(-threshold, threshold)).collect()
}

/// Settings for the spectral kernel fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub knot_count: usize,
    pub welch: WelchConfig,
    /// Kernel half-support in seconds.
    pub kernel_support: f64,
    /// Driving noise half-width; `None` uses the cap threshold.
    pub noise_halfwidth: Option<f64>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            knot_count: 6,
            welch: WelchConfig::default(),
            kernel_support: 2.0,
            noise_halfwidth: None,
        }
    }
}

/// Diagnostics of a kernel fit.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumFit {
    pub frequencies: Vec<f64>,
    pub measured_magnitude: Vec<f64>,
    pub noise_floor_c: f64,
    /// Fitted damping function `|F{k}|`.
    pub damping: PiecewiseLinear,
    /// RMS residual of the fit on the measured/c ratio.
    pub residual: f64,
    pub windows: usize,
}

impl SpectrumFit {
    pub fn knots(&self) -> &[(f64, f64)] {
        &self.damping.knots
    }
}

/// Fit the shaping kernel to capped fine-movement segments.
pub fn fit_kernel(
    phi_corr_segments: &[OffsetSeries],
    params: &ModelParams,
    config: &FitConfig,
) -> Result<(FineModel, SpectrumFit)> {
    let window = config.welch.window_length;
    let needed = 8 * window;
    let available: usize = phi_corr_segments.iter().map(|s| s.len()).sum();
    if available < needed {
        return Err(Error::InsufficientData {
            what: "fine-movement samples",
            needed,
            available,
        });
    }
    if config.knot_count < 2 {
        return Err(invalid("knot_count", "must be >= 2"));
    }
    let r = config.noise_halfwidth.unwrap_or(params.cap_threshold);
    let values: Vec<&[f64]> = phi_corr_segments
        .iter()
        .map(|s| s.values.as_slice())
        .collect();
    let spectrum = average_magnitude(&values, &config.welch, params.sample_rate)?;
    let c = uniform_noise_floor(r, &config.welch);

    // interior bins only; DC and Nyquist follow a different magnitude law
    let bins = spectrum.frequencies.len();
    let freqs = &spectrum.frequencies[1..bins - 1];
    let ratio: Vec<f64> = spectrum.magnitude[1..bins - 1]
        .iter()
        .map(|m| m / c)
        .collect();
    let grid = knot_grid(config.knot_count, params.sample_rate / 2.0);
    let (damping, residual) = fit_piecewise_linear(freqs, &ratio, &grid)?;

    let half = (config.kernel_support / params.dt).round() as usize;
    let taps = kernel_from_damping(&damping, params.sample_rate, half);
    let model = FineModel::new(taps, params.dt, r, params.cap_threshold)?;
    let fit = SpectrumFit {
        frequencies: spectrum.frequencies,
        measured_magnitude: spectrum.magnitude,
        noise_floor_c: c,
        damping,
        residual,
        windows: spectrum.windows,
    };
    Ok((model, fit))
}

/// Generate `n_steps` values of shaped noise.
pub fn generate_noise(model: &FineModel, n_steps: usize, seed: u64) -> OffsetSeries {
    OffsetSeries::new(
        model.dt,
        generate_noise_with(model, n_steps, &mut seed::rng_from_seed(seed)),
    )
}

/// Draws `n_steps + taps - 1` uniform values so every output sees a full
/// kernel, then takes the valid part of the convolution.
pub fn generate_noise_with<R: Rng + ?Sized>(
    model: &FineModel,
    n_steps: usize,
    rng: &mut R,
) -> Vec<f64> {
    let taps = &model.kernel_taps;
    let r = model.noise_halfwidth;
    let draws: Vec<f64> = (0..n_steps + taps.len() - 1)
        .map(|_| r * (2.0 * rng.gen::<f64>() - 1.0))
        .collect();
    draws
        .windows(taps.len())
        .map(|w| w.iter().zip(taps).map(|(x, k)| x * k).sum())
        .collect()
}
