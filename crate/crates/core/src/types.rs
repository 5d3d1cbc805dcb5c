//! Shared data types exchanged between the pipeline stages.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;

pub use crate::geometry::CHANNEL_COUNT;

/// Upper end of the 12-bit ADC range.
pub const ADC_MAX: u16 = 4095;

/// Force labels are (fx, fy, fz) in newtons.
pub const FORCE_DIMS: usize = 3;

/// Nominal acquisition rate of the sensing board in Hz.
pub const DEFAULT_SAMPLE_RATE: f64 = 200.0;

/// One acquisition cycle: a monotone sequence number (unwrapped, so it may
/// exceed the 16-bit wire counter), the derived timestamp in seconds, and
/// the 16 raw capacitance readings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TactileFrame {
    pub sequence: u64,
    pub timestamp: f64,
    pub channels: [u16; CHANNEL_COUNT],
}

impl TactileFrame {
    pub fn new(sequence: u64, timestamp: f64, channels: [u16; CHANNEL_COUNT]) -> Result<Self> {
        for (index, &value) in channels.iter().enumerate() {
            if value > ADC_MAX {
                return Err(Error::ChannelOutOfRange { index, value });
            }
        }
        Ok(Self {
            sequence,
            timestamp,
            channels,
        })
    }

    /// Frame stamped assuming the nominal 200 Hz acquisition rate.
    pub fn sampled(sequence: u64, channels: [u16; CHANNEL_COUNT]) -> Result<Self> {
        Self::new(sequence, sequence as f64 / DEFAULT_SAMPLE_RATE, channels)
    }

    pub fn channels_f64(&self) -> [f64; CHANNEL_COUNT] {
        self.channels.map(f64::from)
    }
}

/// Per-channel resting statistics estimated from an idle stretch of frames.
/// `noise_scales` is the per-channel standard deviation floored at one ADC
/// count so that downstream ratios stay finite on dead-quiet channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationProfile {
    pub baselines: [f64; CHANNEL_COUNT],
    pub noise_scales: [f64; CHANNEL_COUNT],
    pub sample_count: usize,
}

impl CalibrationProfile {
    pub fn new(
        baselines: [f64; CHANNEL_COUNT],
        noise_scales: [f64; CHANNEL_COUNT],
        sample_count: usize,
    ) -> Result<Self> {
        for &b in &baselines {
            if !b.is_finite() || b < 0.0 || b > ADC_MAX as f64 {
                return Err(Error::InvalidParameter(format!(
                    "baseline {b} outside the ADC range"
                )));
            }
        }
        for &s in &noise_scales {
            if !s.is_finite() || s < 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "noise scale {s} below the one-count floor"
                )));
            }
        }
        Ok(Self {
            baselines,
            noise_scales,
            sample_count,
        })
    }
}

/// One training or evaluation record: the 16 channel readings (as captured,
/// in ADC counts), the force label, and the commanded contact position when
/// the rig recorded one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub tactile: [f64; CHANNEL_COUNT],
    pub force: [f64; FORCE_DIMS],
    pub contact_position: Option<Point2>,
}

/// Output of the localization stage for a single frame. `position` is None
/// when no channel cleared the activation gate; `activated` and `weights`
/// run in lockstep and the weights sum to one whenever non-empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactEstimate {
    pub position: Option<Point2>,
    pub activated: Vec<usize>,
    pub weights: Vec<f64>,
    pub force: Option<[f64; FORCE_DIMS]>,
}

impl ContactEstimate {
    pub fn no_contact() -> Self {
        Self {
            position: None,
            activated: Vec::new(),
            weights: Vec::new(),
            force: None,
        }
    }

    pub fn contact_detected(&self) -> bool {
        self.position.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_rejects_out_of_range_channel() {
        let mut channels = [0u16; CHANNEL_COUNT];
        channels[5] = ADC_MAX + 1;
        assert!(matches!(
            TactileFrame::new(0, 0.0, channels),
            Err(Error::ChannelOutOfRange { index: 5, value }) if value == ADC_MAX + 1
        ));
    }

    #[test]
    fn frame_accepts_full_scale() {
        let channels = [ADC_MAX; CHANNEL_COUNT];
        assert!(TactileFrame::new(0, 0.0, channels).is_ok());
    }

    #[test]
    fn sampled_timestamp_follows_sequence() {
        let f = TactileFrame::sampled(400, [0; CHANNEL_COUNT]).unwrap();
        assert_eq!(f.timestamp, 2.0);
    }

    #[test]
    fn profile_rejects_sub_floor_noise() {
        let err = CalibrationProfile::new([300.0; CHANNEL_COUNT], [0.5; CHANNEL_COUNT], 100);
        assert!(err.is_err());
    }
}
