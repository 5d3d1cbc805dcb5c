//! Contact-state estimation for a 16-electrode capacitive tactile palm.
//!
//! The pipeline runs: wire-protocol ingestion ([`wire`]), baseline
//! calibration and weighted-centroid contact localization
//! ([`localization`]), and joint Gaussian-mixture force regression
//! ([`mixture`]). A parameterized board simulator ([`simulator`]) stands in
//! for hardware, [`dataset`] persists streams, datasets, models and
//! calibration profiles, and [`evaluation`] closes the loop for accuracy
//! studies.
//!
//! Everything seeded is deterministic: the same inputs, configuration and
//! seeds reproduce results bit for bit, independent of machine load.

pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod localization;
pub mod mixture;
pub mod simulator;
pub mod types;
pub mod wire;

pub use error::{Error, Result};
pub use geometry::{PalmGeometry, Point2};
pub use types::{
    CalibrationProfile, ContactEstimate, LabeledSample, TactileFrame, ADC_MAX, CHANNEL_COUNT,
    DEFAULT_SAMPLE_RATE, FORCE_DIMS,
};
