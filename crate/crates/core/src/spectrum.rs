//! Window-averaged magnitude spectra and the piecewise-linear damping fit.
//!
//! Spectra are averaged over Hann-windowed blocks that never straddle a
//! segment boundary. The damping function is a set of knots on a uniform
//! grid over `[0, fs / 2]`, linearly interpolated in between.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{invalid, Error, Result};

/// Block configuration for spectral averaging.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchConfig {
    pub window_length: usize,
    /// Fractional overlap of consecutive blocks, in `[0, 1)`.
    pub overlap: f64,
}

impl Default for WelchConfig {
    fn default() -> Self {
        Self {
            window_length: 256,
            overlap: 0.5,
        }
    }
}

impl WelchConfig {
    pub fn hop(&self) -> usize {
        (((1.0 - self.overlap) * self.window_length as f64).round() as usize).max(1)
    }

    /// Periodic Hann window.
    pub fn window(&self) -> Vec<f64> {
        let n = self.window_length as f64;
        (0..self.window_length)
            .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n).cos())
            .collect()
    }

    pub fn bins(&self) -> usize {
        self.window_length / 2 + 1
    }

    fn validate(&self) -> Result<()> {
        if self.window_length < 4 || !self.window_length.is_multiple_of(2) {
            return Err(invalid("window_length", "must be even and >= 4"));
        }
        if !(0.0..1.0).contains(&self.overlap) {
            return Err(invalid("overlap", "must be in [0, 1)"));
        }
        Ok(())
    }
}

/// Mean magnitude spectrum over all blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedSpectrum {
    pub frequencies: Vec<f64>,
    pub magnitude: Vec<f64>,
    pub windows: usize,
}

/// Average `|FFT(w * block)|` over every full block of every segment.
pub fn average_magnitude<S: AsRef<[f64]>>(
    segments: &[S],
    config: &WelchConfig,
    sample_rate: f64,
) -> Result<AveragedSpectrum> {
    config.validate()?;
    let n = config.window_length;
    let hop = config.hop();
    let window = config.window();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    let mut acc = vec![0.0; config.bins()];
    let mut windows = 0usize;

    for seg in segments {
        let seg = seg.as_ref();
        let mut start = 0;
        while start + n <= seg.len() {
            for (b, (&x, &w)) in buf
                .iter_mut()
                .zip(seg[start..start + n].iter().zip(&window))
            {
                *b = Complex::new(x * w, 0.0);
            }
            fft.process(&mut buf);
            for (a, b) in acc.iter_mut().zip(&buf) {
                *a += b.norm();
            }
            windows += 1;
            start += hop;
        }
    }
    if windows == 0 {
        return Err(Error::InsufficientData {
            what: "spectral windows",
            needed: 1,
            available: 0,
        });
    }
    for a in &mut acc {
        *a /= windows as f64;
    }
    let frequencies = (0..config.bins())
        .map(|j| j as f64 * sample_rate / n as f64)
        .collect();
    Ok(AveragedSpectrum {
        frequencies,
        magnitude: acc,
        windows,
    })
}

/// Expected windowed magnitude of i.i.d. uniform noise on `[-r, r]` at an
/// interior frequency bin.
///
/// Each interior bin is a sum of many independent terms, so it is close to
/// a circular complex Gaussian with `E|X|^2 = (r^2 / 3) * sum(w^2)`; its
/// magnitude is Rayleigh with mean `sqrt(pi / 4 * E|X|^2)`. The DC and
/// Nyquist bins are real-valued and follow a different law, which is why
/// the fit ignores them.
pub fn uniform_noise_floor(halfwidth: f64, config: &WelchConfig) -> f64 {
    let energy: f64 = config.window().iter().map(|w| w * w).sum();
    let variance = halfwidth * halfwidth / 3.0;
    (PI / 4.0 * variance * energy).sqrt()
}

/// Piecewise-linear function sampled at its knots.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    pub knots: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn eval(&self, f: f64) -> f64 {
        let k = &self.knots;
        if f <= k[0].0 {
            return k[0].1;
        }
        for w in k.windows(2) {
            let ((f0, v0), (f1, v1)) = (w[0], w[1]);
            if f <= f1 {
                return v0 + (f - f0) / (f1 - f0) * (v1 - v0);
            }
        }
        k[k.len() - 1].1
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        self.knots.iter().map(|k| k.0)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.knots.iter().map(|k| k.1)
    }
}

/// Uniform knot grid over `[0, nyquist]`.
pub fn knot_grid(knot_count: usize, nyquist: f64) -> Vec<f64> {
    (0..knot_count)
        .map(|i| nyquist * i as f64 / (knot_count - 1) as f64)
        .collect()
}

fn hat(f: f64, grid: &[f64], i: usize) -> f64 {
    let c = grid[i];
    if i > 0 && f < c {
        let l = grid[i - 1];
        return if f <= l { 0.0 } else { (f - l) / (c - l) };
    }
    if i + 1 < grid.len() && f > c {
        let r = grid[i + 1];
        return if f >= r { 0.0 } else { (r - f) / (r - c) };
    }
    if f == c {
        1.0
    } else {
        0.0
    }
}

/// Least-squares fit of a piecewise-linear function with knots on `grid`
/// to `(frequencies, target)`, with knot values clipped at zero.
/// Returns the fit and its RMS residual.
pub fn fit_piecewise_linear(
    frequencies: &[f64],
    target: &[f64],
    grid: &[f64],
) -> Result<(PiecewiseLinear, f64)> {
    if grid.len() < 2 {
        return Err(invalid("knot_count", "must be >= 2"));
    }
    if frequencies.len() < grid.len() {
        return Err(Error::InsufficientData {
            what: "frequency bins for the damping fit",
            needed: grid.len(),
            available: frequencies.len(),
        });
    }
    let design = DMatrix::from_fn(frequencies.len(), grid.len(), |r, c| {
        hat(frequencies[r], grid, c)
    });
    let y = DVector::from_column_slice(target);
    let solution = design
        .clone()
        .svd(true, true)
        .solve(&y, 1e-12)
        .map_err(|e| Error::Calibration(format!("damping fit failed: {e}")))?;
    let knots: Vec<(f64, f64)> = grid
        .iter()
        .zip(solution.iter())
        .map(|(&f, &v)| (f, v.max(0.0)))
        .collect();
    let fitted = PiecewiseLinear { knots };
    let sq: f64 = frequencies
        .iter()
        .zip(target)
        .map(|(&f, &t)| (fitted.eval(f) - t).powi(2))
        .sum();
    Ok((fitted, (sq / frequencies.len() as f64).sqrt()))
}

const INVERSE_GRID: usize = 4096;

/// Zero-phase kernel whose frequency response approximates `damping`,
/// truncated to `half_width` taps on each side and Tukey-tapered to zero
/// one tap beyond the ends.
pub fn kernel_from_damping(
    damping: &PiecewiseLinear,
    sample_rate: f64,
    half_width: usize,
) -> Vec<f64> {
    let m = INVERSE_GRID;
    let spectrum: Vec<f64> = (0..m)
        .map(|j| damping.eval(j.min(m - j) as f64 * sample_rate / m as f64))
        .collect();
    let reach = (half_width + 1) as f64;
    let flat = 0.5 * reach;
    (-(half_width as i64)..=half_width as i64)
        .map(|tap| {
            let sum: f64 = spectrum
                .iter()
                .enumerate()
                .map(|(j, &d)| d * (2.0 * PI * (j as f64) * (tap as f64) / m as f64).cos())
                .sum();
            let a = (tap as f64).abs();
            let taper = if a <= flat {
                1.0
            } else {
                0.5 * (1.0 + (PI * (a - flat) / (reach - flat)).cos())
            };
            taper * sum / m as f64
        })
        .collect()
}

/// Magnitude of the frequency response of `taps` (sampled at
/// `1 / sample_rate`) at `frequency` Hz.
pub fn kernel_gain(taps: &[f64], sample_rate: f64, frequency: f64) -> f64 {
    let w = 2.0 * PI * frequency / sample_rate;
    let (re, im) = taps
        .iter()
        .enumerate()
        .fold((0.0, 0.0), |(re, im), (m, &k)| {
            let phase = w * m as f64;
            (re + k * phase.cos(), im - k * phase.sin())
        });
    re.hypot(im)
}
