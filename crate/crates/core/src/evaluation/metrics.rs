use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The ten per-snippet statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    pub x_max: f64,
    pub x_min: f64,
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub range: f64,
    /// Mean of consecutive differences, times 10.
    pub mean_diff_10: f64,
    /// Population standard deviation of consecutive differences, times 10.
    pub std_diff_10: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    XMax,
    XMin,
    Mean,
    Std,
    Median,
    Q25,
    Q75,
    Range,
    MeanDiff10,
    StdDiff10,
}

impl Metric {
    pub const ALL: [Metric; 10] = [
        Metric::XMax,
        Metric::XMin,
        Metric::Mean,
        Metric::Std,
        Metric::Median,
        Metric::Q25,
        Metric::Q75,
        Metric::Range,
        Metric::MeanDiff10,
        Metric::StdDiff10,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::XMax => "x_max",
            Metric::XMin => "x_min",
            Metric::Mean => "mean",
            Metric::Std => "std",
            Metric::Median => "median",
            Metric::Q25 => "q25",
            Metric::Q75 => "q75",
            Metric::Range => "range",
            Metric::MeanDiff10 => "mean_diff_10",
            Metric::StdDiff10 => "std_diff_10",
        }
    }

    pub fn of(self, m: &MetricVector) -> f64 {
        match self {
            Metric::XMax => m.x_max,
            Metric::XMin => m.x_min,
            Metric::Mean => m.mean,
            Metric::Std => m.std,
            Metric::Median => m.median,
            Metric::Q25 => m.q25,
            Metric::Q75 => m.q75,
            Metric::Range => m.range,
            Metric::MeanDiff10 => m.mean_diff_10,
            Metric::StdDiff10 => m.std_diff_10,
        }
    }
}

/// Quantile of sorted data by linear interpolation between order
/// statistics at position `(n - 1) * p`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// ```
/// use lanedrift::evaluation::compute_metrics;
///
/// let m = compute_metrics(&[0.0, 0.1, 0.2]).unwrap();
/// assert!((m.mean_diff_10 - 1.0).abs() < 1e-12);
/// assert!((m.range - 0.2).abs() < 1e-12);
/// ```
pub fn compute_metrics(snippet: &[f64]) -> Result<MetricVector> {
    if snippet.len() < 2 {
        return Err(Error::Metric(format!(
            "snippet needs at least 2 values, got {}",
            snippet.len()
        )));
    }
    let mut sorted = snippet.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (mean, std) = mean_std(snippet);
    let diffs: Vec<f64> = snippet.windows(2).map(|w| w[1] - w[0]).collect();
    let (dmean, dstd) = mean_std(&diffs);
    let x_min = sorted[0];
    let x_max = sorted[sorted.len() - 1];
    Ok(MetricVector {
        x_max,
        x_min,
        mean,
        std,
        median: quantile_sorted(&sorted, 0.5),
        q25: quantile_sorted(&sorted, 0.25),
        q75: quantile_sorted(&sorted, 0.75),
        range: (x_max - x_min).abs(),
        mean_diff_10: 10.0 * dmean,
        std_diff_10: 10.0 * dstd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp() {
        let m = compute_metrics(&[0.0, 0.1, 0.2]).unwrap();
        assert_eq!(m.x_max, 0.2);
        assert_eq!(m.x_min, 0.0);
        assert!((m.mean - 0.1).abs() < 1e-15);
        assert!((m.median - 0.1).abs() < 1e-15);
        assert!((m.range - 0.2).abs() < 1e-15);
        assert!((m.mean_diff_10 - 1.0).abs() < 1e-12);
        assert!((m.std - (0.02f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(m.std_diff_10.abs() < 1e-12);
    }

    #[test]
    fn constant() {
        let m = compute_metrics(&[0.1, 0.1, 0.1]).unwrap();
        assert!(m.std.abs() < 1e-15);
        assert_eq!((m.range, m.mean_diff_10, m.std_diff_10), (0.0, 0.0, 0.0));
    }

    #[test]
    fn falling_pair() {
        let m = compute_metrics(&[0.2, 0.0]).unwrap();
        assert!((m.mean_diff_10 + 2.0).abs() < 1e-12);
    }

    #[test]
    fn too_short() {
        assert!(matches!(compute_metrics(&[0.1]), Err(Error::Metric(_))));
        assert!(compute_metrics(&[]).is_err());
    }

    #[test]
    fn interpolated_quantiles() {
        let s = [0.0, 1.0, 2.0, 10.0];
        assert_eq!(quantile_sorted(&s, 0.25), 0.75);
        assert_eq!(quantile_sorted(&s, 0.5), 1.5);
        assert_eq!(quantile_sorted(&s, 1.0), 10.0);
        assert_eq!(quantile_sorted(&s, 0.0), 0.0);
    }
}
