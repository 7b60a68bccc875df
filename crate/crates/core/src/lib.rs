//! Two-level stochastic model of a vehicle's lateral position within its
//! lane.
//!
//! The relative offset `x` (lane widths, `0` is the lane center, `+-0.5`
//! the markings) is split into a coarse part, a smoothed Markov chain over
//! `n_c` equal-width states, and a fine part, uniform white noise shaped by
//! a short convolution kernel. Both parts are calibrated from drive logs and
//! sampled independently from separate seeded streams.
//!
//! ```
//! use lanedrift::synthetic::{make_model, SyntheticSpec};
//! use lanedrift::generate_profile;
//!
//! let model = make_model(&SyntheticSpec::default()).unwrap();
//! let x = generate_profile(&model, 0.0, 3600.0, 42).unwrap();
//! assert_eq!(x.len(), 18_000);
//! assert!(x.values.iter().all(|v| v.abs() <= model.output_bound()));
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod calibrate;
pub mod coarse;
pub mod csvio;
pub mod error;
pub mod evaluation;
pub mod fine;
pub mod generator;
pub mod model;
pub mod persist;
pub mod preprocessing;
pub mod seed;
pub mod spectrum;
pub mod synthetic;

pub use calibrate::{calibrate, prepare_segments, Calibration, CalibrationConfig};
pub use error::{Error, LoadError, Result};
pub use generator::{generate_profile, ModelMetadata, TwoLevelModel};
pub use model::{relative_offset, DriveLogSample, ModelParams, OffsetSeries};
pub use persist::{load_model, save_model};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    struct Intro;
    #[doc = include_str!("../../../book/src/lateral-position.md")]
    struct LateralPosition;
    #[doc = include_str!("../../../book/src/coarse-model.md")]
    struct CoarseModel;
    #[doc = include_str!("../../../book/src/fine-model.md")]
    struct FineModel;
    #[doc = include_str!("../../../book/src/evaluation.md")]
    struct Evaluation;
    #[doc = include_str!("../../../book/src/command-line.md")]
    struct CommandLine;
}
