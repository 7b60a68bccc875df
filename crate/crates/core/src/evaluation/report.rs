use serde::{Deserialize, Serialize};

use super::ks::{ks_critical_value, ks_distance};
use super::metrics::{quantile_sorted, Metric, MetricVector};
use super::{EvaluationMode, KS_ALPHA};
use crate::error::{Error, Result};

/// Quantile levels reported for each population: 0.05, 0.10, ..., 0.95.
pub const QUANTILE_LADDER: [f64; 19] = [
    0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80,
    0.85, 0.90, 0.95,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSummary {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
    pub std: f64,
    /// Values at [`QUANTILE_LADDER`].
    pub quantiles: Vec<f64>,
}

impl PopulationSummary {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Metric("empty population".into()));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        Ok(Self {
            min: sorted[0],
            mean,
            max: sorted[sorted.len() - 1],
            std,
            quantiles: QUANTILE_LADDER
                .iter()
                .map(|&p| quantile_sorted(&sorted, p))
                .collect(),
        })
    }
}

/// Real against artificial distribution of one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricComparison {
    pub metric: String,
    pub ks_distance: f64,
    pub critical_value: f64,
    /// `ks_distance > critical_value`: the two populations differ at [`KS_ALPHA`].
    pub rejected: bool,
    pub real: PopulationSummary,
    pub artificial: PopulationSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub mode: EvaluationMode,
    pub seed: u64,
    pub snippet_steps: usize,
    pub snippet_count: usize,
    pub metrics: Vec<MetricComparison>,
    pub real: Vec<MetricVector>,
    pub artificial: Vec<MetricVector>,
    pub real_initial: Vec<f64>,
    pub artificial_initial: Vec<f64>,
}

impl EvaluationReport {
    pub(crate) fn new(
        mode: EvaluationMode,
        seed: u64,
        snippet_steps: usize,
        real: Vec<MetricVector>,
        artificial: Vec<MetricVector>,
        real_initial: Vec<f64>,
        artificial_initial: Vec<f64>,
    ) -> Self {
        let n = real.len();
        let metrics = Metric::ALL
            .iter()
            .map(|&m| {
                let r: Vec<f64> = real.iter().map(|v| m.of(v)).collect();
                let a: Vec<f64> = artificial.iter().map(|v| m.of(v)).collect();
                let d = ks_distance(&r, &a);
                let crit = ks_critical_value(KS_ALPHA, r.len(), a.len());
                MetricComparison {
                    metric: m.name().to_string(),
                    ks_distance: d,
                    critical_value: crit,
                    rejected: d > crit,
                    // populations are non-empty: the caller checks n > 0
                    real: PopulationSummary::of(&r).expect("non-empty"),
                    artificial: PopulationSummary::of(&a).expect("non-empty"),
                }
            })
            .collect();
        Self {
            mode,
            seed,
            snippet_steps,
            snippet_count: n,
            metrics,
            real,
            artificial,
            real_initial,
            artificial_initial,
        }
    }

    pub fn comparison(&self, metric: Metric) -> Option<&MetricComparison> {
        self.metrics.iter().find(|c| c.metric == metric.name())
    }

    /// Metrics whose populations the KS test tells apart.
    pub fn rejected(&self) -> impl Iterator<Item = &MetricComparison> {
        self.metrics.iter().filter(|c| c.rejected)
    }
}

/// One CSV row per metric and population with min, mean, max, std and the
/// quantile ladder.
pub fn summarize(report: &EvaluationReport) -> Result<String> {
    if report.snippet_count == 0 || report.metrics.is_empty() {
        return Err(Error::Metric("report has no snippets".into()));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["metric", "population", "min", "mean", "max", "std"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(
        QUANTILE_LADDER
            .iter()
            .map(|p| format!("q{:02}", (p * 100.0).round() as u32)),
    );
    w.write_record(&header)?;
    for c in &report.metrics {
        for (label, s) in [("real", &c.real), ("artificial", &c.artificial)] {
            let mut rec = vec![
                c.metric.clone(),
                label.to_string(),
                s.min.to_string(),
                s.mean.to_string(),
                s.max.to_string(),
                s.std.to_string(),
            ];
            rec.extend(s.quantiles.iter().map(|q| q.to_string()));
            w.write_record(&rec)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::compute_metrics;

    fn report(values: &[Vec<f64>]) -> EvaluationReport {
        let m: Vec<_> = values.iter().map(|v| compute_metrics(v).unwrap()).collect();
        let init: Vec<f64> = values.iter().map(|v| v[0]).collect();
        EvaluationReport::new(EvaluationMode::Full, 0, 3, m.clone(), m, init.clone(), init)
    }

    #[test]
    fn summary_shape() {
        let r = report(&[vec![0.0, 0.1, 0.2], vec![0.1, 0.1, 0.0]]);
        let text = summarize(&r).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 21);
        assert!(lines[0].starts_with("metric,population,min,mean,max,std,q05,q10"));
        assert!(lines[0].ends_with("q90,q95"));
        assert!(lines[1].starts_with("x_max,real,"));
        assert!(lines[2].starts_with("x_max,artificial,"));
        assert!(lines.iter().all(|l| l.split(',').count() == 25));
    }

    #[test]
    fn identical_populations_are_not_rejected() {
        let r = report(&[vec![0.0, 0.1, 0.2], vec![0.1, 0.1, 0.0]]);
        assert_eq!(r.rejected().count(), 0);
        assert_eq!(r.comparison(Metric::Mean).unwrap().ks_distance, 0.0);
    }

    #[test]
    fn empty_report_has_no_summary() {
        let r = EvaluationReport {
            mode: EvaluationMode::Full,
            seed: 0,
            snippet_steps: 50,
            snippet_count: 0,
            metrics: Vec::new(),
            real: Vec::new(),
            artificial: Vec::new(),
            real_initial: Vec::new(),
            artificial_initial: Vec::new(),
        };
        assert!(summarize(&r).is_err());
        assert!(PopulationSummary::of(&[]).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let r = report(&[vec![0.0, 0.3, 0.2], vec![0.1, -0.1, 0.0]]);
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains("\"mode\":\"FULL\""));
        let back: EvaluationReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }
}
