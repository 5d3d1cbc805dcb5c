//! Baseline calibration and contact localization.
//!
//! A contact pressed into the pad raises the readings of nearby electrodes
//! above their resting level. Localization turns one frame into a contact
//! position in two steps:
//!
//! 1. Gate: channel i is active when its deviation from baseline exceeds
//!    `tau` noise scales, |S_i - b_i| > tau * sigma_i.
//! 2. Weight: each active channel gets a saturating weight
//!    w_i = 1 - exp(-2 (S_i - b_i)^2 / sigma_i^2), the weights are
//!    normalized to sum to one, and the contact estimate is the weighted
//!    centroid of the active electrode positions.
//!
//! With the default gate every active channel already sits deep in the
//! saturated region of w, so the centroid is nearly unweighted; the weight
//! shape matters for channels close to the gate.

use crate::error::{Error, Result};
use crate::geometry::{PalmGeometry, Point2};
use crate::types::{CalibrationProfile, ContactEstimate, TactileFrame, CHANNEL_COUNT};

/// Gate width in units of per-channel noise scale.
pub const DEFAULT_ACTIVATION_THRESHOLD: f64 = 3.0;

/// Lower bound on the per-channel noise scale, in ADC counts.
pub const NOISE_SCALE_FLOOR: f64 = 1.0;

/// Minimum idle stretch accepted for calibration.
pub const MIN_CALIBRATION_FRAMES: usize = 50;

/// Estimates per-channel resting level and noise scale from an idle stretch.
/// The noise scale is the population standard deviation floored at one ADC
/// count, so quantized-to-constant channels keep a finite activation gate.
pub fn calibrate_baseline(frames: &[TactileFrame]) -> Result<CalibrationProfile> {
    if frames.len() < MIN_CALIBRATION_FRAMES {
        return Err(Error::InsufficientData {
            required: MIN_CALIBRATION_FRAMES,
            actual: frames.len(),
        });
    }
    let n = frames.len() as f64;
    let mut baselines = [0.0f64; CHANNEL_COUNT];
    for frame in frames {
        for (b, &v) in baselines.iter_mut().zip(&frame.channels) {
            *b += f64::from(v);
        }
    }
    for b in &mut baselines {
        *b /= n;
    }
    let mut noise_scales = [0.0f64; CHANNEL_COUNT];
    for frame in frames {
        for (acc, (&v, b)) in noise_scales.iter_mut().zip(frame.channels.iter().zip(&baselines)) {
            let d = f64::from(v) - b;
            *acc += d * d;
        }
    }
    for s in &mut noise_scales {
        *s = (*s / n).sqrt().max(NOISE_SCALE_FLOOR);
    }
    CalibrationProfile::new(baselines, noise_scales, frames.len())
}

/// Per-frame activation state: the gated channel set and the raw saturating
/// weight of every channel (gated or not).
#[derive(Debug, Clone, PartialEq)]
pub struct Activation {
    pub activated: Vec<usize>,
    pub weights: [f64; CHANNEL_COUNT],
}

pub fn compute_activation(
    frame: &TactileFrame,
    profile: &CalibrationProfile,
    threshold: f64,
) -> Activation {
    let mut activated = Vec::new();
    let mut weights = [0.0f64; CHANNEL_COUNT];
    for i in 0..CHANNEL_COUNT {
        let deviation = f64::from(frame.channels[i]) - profile.baselines[i];
        let scale = profile.noise_scales[i];
        weights[i] = 1.0 - (-2.0 * (deviation / scale).powi(2)).exp();
        if deviation.abs() > threshold * scale {
            activated.push(i);
        }
    }
    Activation { activated, weights }
}

pub fn detect_contact(frame: &TactileFrame, profile: &CalibrationProfile) -> bool {
    !compute_activation(frame, profile, DEFAULT_ACTIVATION_THRESHOLD)
        .activated
        .is_empty()
}

/// Weighted-centroid contact estimate with the default gate.
pub fn estimate_position(
    frame: &TactileFrame,
    profile: &CalibrationProfile,
    geometry: &PalmGeometry,
) -> ContactEstimate {
    estimate_position_with_threshold(frame, profile, geometry, DEFAULT_ACTIVATION_THRESHOLD)
}

pub fn estimate_position_with_threshold(
    frame: &TactileFrame,
    profile: &CalibrationProfile,
    geometry: &PalmGeometry,
    threshold: f64,
) -> ContactEstimate {
    let activation = compute_activation(frame, profile, threshold);
    if activation.activated.is_empty() {
        return ContactEstimate::no_contact();
    }
    let total: f64 = activation.activated.iter().map(|&i| activation.weights[i]).sum();
    // Every gated channel has weight >= 1 - exp(-2 tau^2) > 0 for tau > 0,
    // so the normalizer cannot vanish.
    let mut weights = Vec::with_capacity(activation.activated.len());
    let mut x = 0.0;
    let mut y = 0.0;
    for &i in &activation.activated {
        let alpha = activation.weights[i] / total;
        weights.push(alpha);
        x += alpha * geometry.sensing_positions[i].x;
        y += alpha * geometry.sensing_positions[i].y;
    }
    ContactEstimate {
        position: Some(Point2::new(x, y)),
        activated: activation.activated,
        weights,
        force: None,
    }
}
