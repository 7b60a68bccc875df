//! Ground-truth models and simulated drive logs for round-trip testing.

use crate::coarse::CoarseModel;
use crate::error::{Error, Result};
use crate::fine::FineModel;
use crate::generator::{generate_profile, ModelMetadata, TwoLevelModel};
use crate::model::{DriveLogSample, ModelParams};

/// Constant velocity of simulated tours, km/h.
pub const SIMULATED_VELOCITY: f64 = 120.0;

#[derive(Debug, Clone, PartialEq)]
pub enum TransitionFamily {
    Identity,
    Uniform,
    /// Stay with probability `p`, move to each neighbor with `(1 - p) / 2`;
    /// at the lane edges the blocked move is folded back into the open
    /// neighbor.
    Banded {
        p: f64,
    },
    /// Row-major `n_c x n_c`.
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    Zero,
    Identity,
    Taps(Vec<f64>),
}

/// Binomial kernel `[1, 4, 6, 4, 1] / 16`: unit gain at DC, decaying
/// smoothly to zero at Nyquist.
pub fn reference_taps() -> Vec<f64> {
    [1.0, 4.0, 6.0, 4.0, 1.0].iter().map(|v| v / 16.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n_c: usize,
    pub dt: f64,
    pub family: TransitionFamily,
    pub kernel: KernelSpec,
    pub tour_seconds: f64,
    pub lane_width: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    /// Banded `p = 0.9` chain over 20 states with the reference kernel and a
    /// 50 minute tour.
    fn default() -> Self {
        Self {
            n_c: 20,
            dt: 0.2,
            family: TransitionFamily::Banded { p: 0.9 },
            kernel: KernelSpec::Taps(reference_taps()),
            tour_seconds: 50.0 * 60.0,
            lane_width: 3.6,
            seed: 1,
        }
    }
}

pub fn banded_matrix(n_c: usize, p: f64) -> Vec<f64> {
    let mut t = vec![0.0; n_c * n_c];
    let side = (1.0 - p) / 2.0;
    for i in 0..n_c {
        t[i * n_c + i] = p;
        if i == 0 {
            t[1] = 1.0 - p;
        } else if i == n_c - 1 {
            t[i * n_c + i - 1] = 1.0 - p;
        } else {
            t[i * n_c + i - 1] = side;
            t[i * n_c + i + 1] = side;
        }
    }
    t
}

pub fn transition_matrix(family: &TransitionFamily, n_c: usize) -> Result<Vec<f64>> {
    let spec_err = |m: String| Error::InvalidParameter {
        name: "family",
        reason: m,
    };
    Ok(match family {
        TransitionFamily::Identity => {
            let mut t = vec![0.0; n_c * n_c];
            for i in 0..n_c {
                t[i * n_c + i] = 1.0;
            }
            t
        }
        TransitionFamily::Uniform => vec![1.0 / n_c as f64; n_c * n_c],
        TransitionFamily::Banded { p } => {
            if !(0.0..=1.0).contains(p) {
                return Err(spec_err(format!("stay probability {p} outside [0, 1]")));
            }
            banded_matrix(n_c, *p)
        }
        TransitionFamily::Explicit(t) => t.clone(),
    })
}

/// Model with default smoothing and capping, the requested chain and
/// kernel, and a driving-noise half-width equal to the cap threshold.
pub fn make_model(spec: &SyntheticSpec) -> Result<TwoLevelModel> {
    let params = ModelParams {
        n_c: spec.n_c,
        dt: spec.dt,
        sample_rate: 1.0 / spec.dt,
        ..ModelParams::default()
    };
    params.validate()?;
    let transition = transition_matrix(&spec.family, spec.n_c)?;
    let coarse = CoarseModel::new(
        spec.n_c,
        spec.dt,
        transition,
        params.smoothing_sigma,
        params.smoothing_support,
    )?;
    let taps = match &spec.kernel {
        KernelSpec::Zero => vec![0.0],
        KernelSpec::Identity => vec![1.0],
        KernelSpec::Taps(t) => t.clone(),
    };
    let fine = FineModel::new(taps, spec.dt, params.cap_threshold, params.cap_threshold)?;
    TwoLevelModel::new(
        params,
        coarse,
        fine,
        ModelMetadata {
            source_tour: format!("synthetic-{}", spec.seed),
            calibrated_at: None,
        },
    )
}

/// Simulate a tour starting at the lane center, emitted at the model rate.
pub fn simulate_drive_log(
    model: &TwoLevelModel,
    duration: f64,
    lane_width: f64,
    seed: u64,
) -> Result<Vec<DriveLogSample>> {
    if !(lane_width > 0.0) {
        return Err(Error::InvalidParameter {
            name: "lane_width",
            reason: "must be > 0".into(),
        });
    }
    let x = generate_profile(model, 0.0, duration, seed)?;
    Ok(offsets_to_log(&x.values, x.dt, lane_width))
}

/// Invert the relative-offset convention for a lane of `lane_width` meters.
pub fn offsets_to_log(offsets: &[f64], dt: f64, lane_width: f64) -> Vec<DriveLogSample> {
    offsets
        .iter()
        .enumerate()
        .map(|(i, &x)| DriveLogSample {
            t: i as f64 * dt,
            dist_left: lane_width * (0.5 + x),
            dist_right: lane_width * (0.5 - x),
            v_lon: SIMULATED_VELOCITY,
            lane_id: None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::relative_offset;
    use proptest::prelude::*;

    #[test]
    fn banded_rows() {
        let t = banded_matrix(3, 0.9);
        assert_eq!(&t[0..3], &[0.9, 0.09999999999999998, 0.0]);
        assert_eq!(&t[3..6], &[0.04999999999999999, 0.9, 0.04999999999999999]);
        for (a, b) in t[0..3].iter().zip([0.9, 0.1, 0.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn families() {
        let id = make_model(&SyntheticSpec {
            family: TransitionFamily::Identity,
            ..Default::default()
        })
        .unwrap();
        for i in 0..20 {
            assert_eq!(id.coarse.probability(i, i), 1.0);
        }
        let u = make_model(&SyntheticSpec {
            family: TransitionFamily::Uniform,
            ..Default::default()
        })
        .unwrap();
        assert!(u.coarse.transition().iter().all(|&p| p == 0.05));
    }

    #[test]
    fn explicit_matrix_is_validated() {
        let bad = SyntheticSpec {
            n_c: 2,
            family: TransitionFamily::Explicit(vec![0.5, 0.4, 0.0, 1.0]),
            ..Default::default()
        };
        assert!(make_model(&bad).is_err());
        let bad = SyntheticSpec {
            family: TransitionFamily::Banded { p: 1.5 },
            ..Default::default()
        };
        assert!(make_model(&bad).is_err());
    }

    #[test]
    fn inverse_convention() {
        let log = offsets_to_log(&[0.0, -0.5], 0.2, 3.6);
        assert_eq!((log[0].dist_left, log[0].dist_right), (1.8, 1.8));
        assert_eq!((log[1].dist_left, log[1].dist_right), (0.0, 3.6));
        assert_eq!(log[1].t, 0.2);
    }

    #[test]
    fn simulated_log_is_at_model_rate() {
        let m = make_model(&SyntheticSpec::default()).unwrap();
        let log = simulate_drive_log(&m, 60.0, 3.6, 2).unwrap();
        assert_eq!(log.len(), 300);
        assert!(log.iter().all(|s| s.v_lon == SIMULATED_VELOCITY));
        assert!(simulate_drive_log(&m, 60.0, 0.0, 2).is_err());
    }

    proptest! {
        #[test]
        fn offsets_round_trip(x in -0.5f64..=0.5, w in 2.0f64..5.0) {
            let s = offsets_to_log(&[x], 0.2, w)[0];
            prop_assert!((relative_offset(s.dist_left, s.dist_right).unwrap() - x).abs() < 1e-12);
        }
    }
}
