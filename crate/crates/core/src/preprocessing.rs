//! From raw drive logs to clean road-following segments.
//!
//! Logs are first resampled onto the model grid by linear interpolation,
//! then cut wherever the vehicle is too slow, a sample is invalid, or a lane
//! change is detected.

use crate::error::{invalid, Error, Result};
use crate::model::{DriveLogSample, ModelParams, OffsetSeries};

/// A drive log on the uniform model grid, with the parallel tracks needed
/// for segment extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct ResampledTrack {
    pub start_t: f64,
    pub dt: f64,
    /// Relative lateral position; meaningless where `valid` is false.
    pub offsets: Vec<f64>,
    pub velocity: Vec<f64>,
    pub valid: Vec<bool>,
    pub lane_id: Vec<Option<i64>>,
}

impl ResampledTrack {
    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn series(&self) -> OffsetSeries {
        OffsetSeries::new(self.dt, self.offsets.clone())
    }

    /// Build a track directly from an on-grid series with constant velocity.
    /// Handy for synthetic data and tests.
    pub fn from_series(series: &OffsetSeries, v_lon: f64) -> Self {
        let n = series.len();
        Self {
            start_t: 0.0,
            dt: series.dt,
            offsets: series.values.clone(),
            velocity: vec![v_lon; n],
            valid: vec![true; n],
            lane_id: vec![None; n],
        }
    }
}

// Tolerance for treating a grid instant as coincident with a source sample.
const TIME_EPS: f64 = 1e-9;

/// Resample a log onto the grid `t0 + i / target_rate`.
///
/// Offsets and velocity are linearly interpolated between the two
/// bracketing source samples. A grid point is invalid if either bracket is
/// invalid, unless it coincides with a valid source sample.
pub fn resample(log: &[DriveLogSample], target_rate: f64) -> Result<ResampledTrack> {
    if !(target_rate > 0.0 && target_rate.is_finite()) {
        return Err(invalid("target_rate", "must be > 0"));
    }
    for (i, w) in log.windows(2).enumerate() {
        if !(w[1].t > w[0].t) {
            return Err(Error::NonMonotonicTime {
                index: i + 1,
                prev: w[0].t,
                next: w[1].t,
            });
        }
    }
    let offsets: Vec<Option<f64>> = log
        .iter()
        .map(|s| {
            if s.is_valid() {
                s.relative_offset().ok()
            } else {
                None
            }
        })
        .collect();
    let valid_count = offsets.iter().filter(|o| o.is_some()).count();
    if valid_count < 2 {
        return Err(Error::EmptySeries(format!(
            "need at least 2 valid samples, found {valid_count}"
        )));
    }

    let dt = 1.0 / target_rate;
    let t0 = log[0].t;
    let t_last = log[log.len() - 1].t;
    let n_grid = ((t_last - t0) * target_rate + TIME_EPS).floor() as usize + 1;

    let mut track = ResampledTrack {
        start_t: t0,
        dt,
        offsets: Vec::with_capacity(n_grid),
        velocity: Vec::with_capacity(n_grid),
        valid: Vec::with_capacity(n_grid),
        lane_id: Vec::with_capacity(n_grid),
    };

    let mut j = 0;
    for i in 0..n_grid {
        let t = t0 + i as f64 / target_rate;
        while j + 1 < log.len() && log[j + 1].t <= t + TIME_EPS {
            j += 1;
        }
        let left = &log[j];
        let exact = (t - left.t).abs() <= TIME_EPS || j + 1 == log.len();
        let (x, v, ok) = if exact {
            (offsets[j].unwrap_or(0.0), left.v_lon, offsets[j].is_some())
        } else {
            let right = &log[j + 1];
            let w = (t - left.t) / (right.t - left.t);
            let v = left.v_lon + w * (right.v_lon - left.v_lon);
            match (offsets[j], offsets[j + 1]) {
                (Some(a), Some(b)) => (a + w * (b - a), v, true),
                _ => (0.0, v, false),
            }
        };
        track.offsets.push(x);
        track.velocity.push(v);
        track.valid.push(ok);
        track.lane_id.push(left.lane_id);
    }
    Ok(track)
}

/// Cutting rules for segment extraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentRules {
    /// Minimum velocity, km/h.
    pub v_min: f64,
    /// Consecutive-step offset jump that signals a lane change.
    pub jump_threshold: f64,
    /// Steps dropped on each side of a detected lane change.
    pub guard_steps: usize,
}

impl Default for SegmentRules {
    fn default() -> Self {
        Self {
            v_min: 40.0,
            jump_threshold: 0.25,
            guard_steps: 10,
        }
    }
}

impl SegmentRules {
    pub fn from_params(params: &ModelParams) -> Self {
        Self {
            v_min: params.v_min,
            ..Self::default()
        }
    }
}

/// A contiguous road-following run.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start_t: f64,
    /// Index of the first step in the source track.
    pub start_index: usize,
    pub series: OffsetSeries,
    pub source_tour: String,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }
}

/// Cut a resampled track into maximal road-following runs of at least two
/// steps, in temporal order. Values are copied untouched.
pub fn extract_segments(
    track: &ResampledTrack,
    rules: &SegmentRules,
    source_tour: &str,
) -> Vec<Segment> {
    let n = track.len();
    let mut usable: Vec<bool> = (0..n)
        .map(|i| track.valid[i] && track.velocity[i] >= rules.v_min)
        .collect();
    // break_after[i]: no segment may continue from step i to step i + 1.
    let mut break_after = vec![false; n];

    for i in 0..n.saturating_sub(1) {
        if !(track.valid[i] && track.valid[i + 1]) {
            continue;
        }
        let jump = (track.offsets[i + 1] - track.offsets[i]).abs() > rules.jump_threshold;
        let lane_switch = track.lane_id[i] != track.lane_id[i + 1];
        if jump || lane_switch {
            break_after[i] = true;
            let lo = (i + 1).saturating_sub(rules.guard_steps);
            let hi = (i + 1 + rules.guard_steps).min(n);
            for u in usable[lo..hi].iter_mut() {
                *u = false;
            }
        }
    }

    let mut segments = Vec::new();
    let mut start: Option<usize> = None;
    for i in 0..n {
        if usable[i] && start.is_none() {
            start = Some(i);
        }
        let ends_here = usable[i] && (i + 1 == n || break_after[i] || !usable[i + 1]);
        if ends_here {
            let s = start.take().expect("run start");
            if i + 1 - s >= 2 {
                segments.push(Segment {
                    start_t: track.start_t + s as f64 * track.dt,
                    start_index: s,
                    series: OffsetSeries::new(track.dt, track.offsets[s..=i].to_vec()),
                    source_tour: source_tour.to_string(),
                });
            }
        }
    }
    segments
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(t: f64, x: f64, v: f64) -> DriveLogSample {
        // width 4 m
        DriveLogSample {
            t,
            dist_left: 4.0 * (0.5 + x),
            dist_right: 4.0 * (0.5 - x),
            v_lon: v,
            lane_id: None,
        }
    }

    fn track(offsets: Vec<f64>, velocity: Vec<f64>) -> ResampledTrack {
        let n = offsets.len();
        ResampledTrack {
            start_t: 0.0,
            dt: 0.2,
            offsets,
            velocity,
            valid: vec![true; n],
            lane_id: vec![None; n],
        }
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn resample_on_grid() {
        let log = [sample(0.0, 0.0, 100.0), sample(0.2, 0.1, 100.0)];
        let tr = resample(&log, 5.0).unwrap();
        assert!(close(&tr.offsets, &[0.0, 0.1]));
    }

    #[test]
    fn resample_drops_intermediate() {
        let log = [
            sample(0.0, 0.0, 100.0),
            sample(0.1, 0.04, 100.0),
            sample(0.2, 0.1, 100.0),
        ];
        let tr = resample(&log, 5.0).unwrap();
        assert!(close(&tr.offsets, &[0.0, 0.1]));
    }

    #[test]
    fn resample_interpolates() {
        // 0.3 * (0.2 / 0.3) = 0.2 at the grid point t = 0.2; t = 0.4 lies outside.
        let log = [sample(0.0, 0.0, 100.0), sample(0.3, 0.3, 100.0)];
        let tr = resample(&log, 5.0).unwrap();
        assert!(close(&tr.offsets, &[0.0, 0.2]));
    }

    #[test]
    fn resample_needs_two_valid_samples() {
        let mut bad = sample(0.2, 0.0, 100.0);
        bad.dist_left = -1.0;
        let log = [sample(0.0, 0.0, 100.0), bad];
        assert!(matches!(resample(&log, 5.0), Err(Error::EmptySeries(_))));
        assert!(matches!(resample(&[], 5.0), Err(Error::EmptySeries(_))));
    }

    #[test]
    fn resample_rejects_unsorted_time() {
        let log = [sample(0.2, 0.0, 100.0), sample(0.1, 0.0, 100.0)];
        assert!(matches!(
            resample(&log, 5.0),
            Err(Error::NonMonotonicTime { index: 1, .. })
        ));
    }

    #[test]
    fn invalid_sample_poisons_bracketed_points() {
        let mut log: Vec<_> = (0..5).map(|i| sample(i as f64 * 0.1, 0.0, 100.0)).collect();
        log[2].dist_right = f64::NAN; // t = 0.2, an exact grid hit
        let tr = resample(&log, 5.0).unwrap();
        assert_eq!(tr.valid, vec![true, false, true]);
    }

    #[test]
    fn nothing_to_cut() {
        let tr = track(vec![0.0; 60], vec![100.0; 60]);
        let segs = extract_segments(&tr, &SegmentRules::default(), "t");
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].len(), 60);
    }

    #[test]
    fn slow_stretch_splits() {
        let mut v = vec![100.0; 60];
        for x in &mut v[20..30] {
            *x = 30.0;
        }
        let segs = extract_segments(&track(vec![0.0; 60], v), &SegmentRules::default(), "t");
        assert_eq!(segs.len(), 2);
        assert_eq!((segs[0].start_index, segs[0].len()), (0, 20));
        assert_eq!((segs[1].start_index, segs[1].len()), (30, 30));
        assert!((segs[1].start_t - 6.0).abs() < 1e-12);
    }

    #[test]
    fn jump_splits_with_guard() {
        let mut x = vec![0.40; 60];
        for v in &mut x[30..] {
            *v = -0.45;
        }
        let tr = track(x, vec![100.0; 60]);
        let no_guard = SegmentRules {
            guard_steps: 0,
            ..Default::default()
        };
        let segs = extract_segments(&tr, &no_guard, "t");
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[0].len(), 30);
        assert_eq!(segs[1].start_index, 30);

        let segs = extract_segments(&tr, &SegmentRules::default(), "t");
        assert_eq!(segs.len(), 2);
        assert_eq!((segs[0].start_index, segs[0].len()), (0, 20));
        assert_eq!((segs[1].start_index, segs[1].len()), (40, 20));
    }

    #[test]
    fn lane_id_change_splits() {
        let mut tr = track(vec![0.0; 40], vec![100.0; 40]);
        for (i, l) in tr.lane_id.iter_mut().enumerate() {
            *l = Some(if i < 20 { 1 } else { 2 });
        }
        let rules = SegmentRules {
            guard_steps: 0,
            ..Default::default()
        };
        let segs = extract_segments(&tr, &rules, "t");
        assert_eq!(segs.len(), 2);
    }

    #[test]
    fn short_runs_are_dropped() {
        let mut tr = track(vec![0.0; 10], vec![100.0; 10]);
        tr.valid[1] = false;
        let segs = extract_segments(&tr, &SegmentRules::default(), "t");
        // step 0 alone is too short
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].start_index, 2);
    }

    proptest! {
        #[test]
        fn resample_is_idempotent_on_grid(xs in proptest::collection::vec(-0.45f64..0.45, 2..60)) {
            let log: Vec<_> = xs.iter().enumerate().map(|(i, &x)| sample(i as f64 * 0.2, x, 80.0)).collect();
            let tr = resample(&log, 5.0).unwrap();
            prop_assert_eq!(tr.len(), xs.len());
            let direct: Vec<f64> = log.iter().map(|s| s.relative_offset().unwrap()).collect();
            for (a, b) in tr.offsets.iter().zip(&direct) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn segments_respect_rules(
            xs in proptest::collection::vec(-0.5f64..0.5, 2..200),
            vs in proptest::collection::vec(20.0f64..120.0, 200),
        ) {
            let n = xs.len();
            let tr = track(xs.clone(), vs[..n].to_vec());
            let rules = SegmentRules::default();
            let segs = extract_segments(&tr, &rules, "t");
            let mut last_end = 0;
            for s in &segs {
                prop_assert!(s.len() >= 2);
                prop_assert!(s.start_index >= last_end);
                last_end = s.start_index + s.len();
                for (k, &v) in s.series.values.iter().enumerate() {
                    let i = s.start_index + k;
                    prop_assert_eq!(v, xs[i]);
                    prop_assert!(tr.velocity[i] >= rules.v_min);
                }
                for w in s.series.values.windows(2) {
                    prop_assert!((w[1] - w[0]).abs() <= rules.jump_threshold);
                }
            }
        }
    }
}
