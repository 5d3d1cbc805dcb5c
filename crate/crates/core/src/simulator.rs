//! Parameterized sensing-board simulator.
//!
//! Channel readings follow a Gaussian footprint around the contact point:
//!
//! ```text
//! reading_i = clamp(round(baseline + gain * F * exp(-d_i^2 / (2 rho^2)) + noise), 0, 4095)
//! ```
//!
//! where `d_i` is the distance from the contact to electrode i, `F` the
//! normal force in newtons, `rho` the footprint radius, and `noise` white
//! Gaussian ADC noise. Pressing to a depth of `x` millimetres produces a
//! normal force of `force_per_mm * x`.
//!
//! All randomness comes from one seeded generator per simulator instance,
//! so identical (config, command sequence) pairs give identical streams.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PalmGeometry, Point2};
use crate::types::{LabeledSample, TactileFrame, ADC_MAX, CHANNEL_COUNT, FORCE_DIMS};

/// Largest commanded press depth in the acquisition protocol, millimetres.
pub const MAX_PRESS_DEPTH: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub geometry: PalmGeometry,
    /// Gaussian footprint radius rho, millimetres.
    pub footprint_radius: f64,
    /// Peak channel response per newton, ADC counts.
    pub gain: f64,
    /// Press stiffness: newtons of normal force per millimetre of depth.
    pub force_per_mm: f64,
    /// Resting channel level, ADC counts.
    pub baseline_level: f64,
    /// White noise standard deviation, ADC counts. Zero disables noise.
    pub noise_std: f64,
    /// Acquisition rate, Hz.
    pub sample_rate: f64,
    pub rng_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            geometry: PalmGeometry::standard(),
            footprint_radius: 6.0,
            gain: 800.0,
            force_per_mm: 2.0,
            baseline_level: 300.0,
            noise_std: 2.0,
            sample_rate: 200.0,
            rng_seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("footprint_radius", self.footprint_radius),
            ("gain", self.gain),
            ("force_per_mm", self.force_per_mm),
            ("sample_rate", self.sample_rate),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return Err(Error::InvalidParameter("noise_std must be >= 0".into()));
        }
        if !(self.baseline_level.is_finite()
            && (0.0..=f64::from(ADC_MAX)).contains(&self.baseline_level))
        {
            return Err(Error::InvalidParameter(
                "baseline_level must lie in the ADC range".into(),
            ));
        }
        Ok(())
    }
}

/// A contact applied during one frame: where, how hard, and any tangential
/// load to report in the force label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactCommand {
    pub position: Point2,
    pub normal_force: f64,
    pub tangential: [f64; 2],
}

impl ContactCommand {
    pub fn normal(position: Point2, normal_force: f64) -> Self {
        Self {
            position,
            normal_force,
            tangential: [0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone)]
pub struct PalmSimulator {
    config: SimConfig,
    rng: ChaCha8Rng,
    noise: Option<Normal<f64>>,
    sequence: u64,
}

impl PalmSimulator {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let noise = if config.noise_std > 0.0 {
            Some(Normal::new(0.0, config.noise_std).expect("validated std"))
        } else {
            None
        };
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(config.rng_seed),
            noise,
            config,
            sequence: 0,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn sequence(&self) -> u64 {
        self.sequence
    }

    /// Produces the next frame and its ground-truth force label.
    pub fn next_frame(&mut self, contact: Option<&ContactCommand>) -> Result<(TactileFrame, [f64; FORCE_DIMS])> {
        if let Some(c) = contact {
            if !self.config.geometry.contains(&c.position) {
                return Err(Error::PositionOutOfBoard {
                    x: c.position.x,
                    y: c.position.y,
                });
            }
            if !(c.normal_force.is_finite() && c.normal_force >= 0.0) {
                return Err(Error::InvalidParameter(
                    "normal force must be non-negative".into(),
                ));
            }
        }
        let rho2 = self.config.footprint_radius * self.config.footprint_radius;
        let mut channels = [0u16; CHANNEL_COUNT];
        for (i, slot) in channels.iter_mut().enumerate() {
            let mut level = self.config.baseline_level;
            if let Some(c) = contact {
                let d = self.config.geometry.sensing_positions[i].distance(&c.position);
                level += self.config.gain * c.normal_force * (-d * d / (2.0 * rho2)).exp();
            }
            if let Some(noise) = &self.noise {
                level += noise.sample(&mut self.rng);
            }
            *slot = level.round().clamp(0.0, f64::from(ADC_MAX)) as u16;
        }
        let frame = TactileFrame {
            sequence: self.sequence,
            timestamp: self.sequence as f64 / self.config.sample_rate,
            channels,
        };
        self.sequence += 1;
        let force = match contact {
            Some(c) => [c.tangential[0], c.tangential[1], c.normal_force],
            None => [0.0; FORCE_DIMS],
        };
        Ok((frame, force))
    }

    /// Convenience run of contact-free frames.
    pub fn idle_frames(&mut self, count: usize) -> Vec<TactileFrame> {
        (0..count)
            .map(|_| self.next_frame(None).expect("idle frame cannot fail").0)
            .collect()
    }

    /// Presses at one position following a depth trajectory in millimetres,
    /// one frame per entry. Zero depth produces a frame indistinguishable
    /// from idle.
    pub fn press(
        &mut self,
        position: Point2,
        depth_profile: &[f64],
    ) -> Result<Vec<(TactileFrame, [f64; FORCE_DIMS])>> {
        let mut out = Vec::with_capacity(depth_profile.len());
        for &depth in depth_profile {
            if !(depth.is_finite() && depth >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "press depth {depth} must be >= 0"
                )));
            }
            let command = ContactCommand::normal(position, self.config.force_per_mm * depth);
            out.push(self.next_frame(Some(&command))?);
        }
        Ok(out)
    }
}

/// Low-discrepancy coverage of the electrode grid: radical-inverse (Halton)
/// sequences in bases 2 and 3 with a random toroidal shift, mapped onto the
/// grid rectangle.
fn halton(index: u64, base: u64) -> f64 {
    let mut fraction = 1.0;
    let mut value = 0.0;
    let mut i = index;
    while i > 0 {
        fraction /= base as f64;
        value += fraction * (i % base) as f64;
        i /= base;
    }
    value
}

/// Runs the full data-collection protocol: `point_count` contact positions
/// spread over the electrode grid, each pressed `repeats` times with a
/// linear 0 -> 4 mm depth ramp sampled at the acquisition rate, keeping
/// every second frame so labels land at half rate. Yields
/// `point_count * repeats * samples_per_press` labeled samples.
pub fn run_calibration_protocol(
    config: &SimConfig,
    point_count: usize,
    repeats: usize,
    samples_per_press: usize,
) -> Result<Vec<LabeledSample>> {
    run_protocol_session(config, point_count, repeats, samples_per_press, config.rng_seed)
}

/// [`run_calibration_protocol`] with the contact-point placement seeded
/// separately from the channel noise. A test session passes the training
/// session's seed as `point_seed` to press the same points again with an
/// independent noise stream; the Halton sequence makes a shorter session
/// visit a prefix of a longer one's points.
pub fn run_protocol_session(
    config: &SimConfig,
    point_count: usize,
    repeats: usize,
    samples_per_press: usize,
    point_seed: u64,
) -> Result<Vec<LabeledSample>> {
    config.validate()?;
    if point_count == 0 {
        return Err(Error::InvalidParameter("point_count must be >= 1".into()));
    }
    let mut point_rng = ChaCha8Rng::seed_from_u64(point_seed);
    let shift_u = (point_rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let shift_v = (point_rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    // The noise sub-seed is the third draw of the master stream whether or
    // not the first two (the default point shift) were used.
    let mut master = ChaCha8Rng::seed_from_u64(config.rng_seed);
    master.next_u64();
    master.next_u64();
    let sim_config = SimConfig {
        rng_seed: master.next_u64(),
        ..config.clone()
    };
    let mut sim = PalmSimulator::new(sim_config)?;

    let grid_w = config.geometry.grid_width;
    let grid_h = config.geometry.grid_height;
    let mut samples = Vec::with_capacity(point_count * repeats * samples_per_press);
    let raw_len = 2 * samples_per_press;
    let ramp: Vec<f64> = (0..raw_len)
        .map(|j| {
            if raw_len <= 1 {
                MAX_PRESS_DEPTH
            } else {
                MAX_PRESS_DEPTH * j as f64 / (raw_len - 1) as f64
            }
        })
        .collect();

    for point_index in 0..point_count {
        let u = (halton(point_index as u64 + 1, 2) + shift_u).fract();
        let v = (halton(point_index as u64 + 1, 3) + shift_v).fract();
        let position = Point2::new((u - 0.5) * grid_w, (v - 0.5) * grid_h);
        for _ in 0..repeats {
            let pressed = sim.press(position, &ramp)?;
            // 2:1 decimation, keeping the odd indices so the final frame
            // (full depth, peak force) survives.
            for (frame, force) in pressed.into_iter().skip(1).step_by(2) {
                samples.push(LabeledSample {
                    tactile: frame.channels_f64(),
                    force,
                    contact_position: Some(position),
                });
            }
        }
    }
    Ok(samples)
}
