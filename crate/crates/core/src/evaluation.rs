//! Closed-loop accuracy harness: drive the simulator, calibrate from its
//! idle stream, localize simulated contacts, and score the estimates
//! against the commanded positions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::localization::{calibrate_baseline, estimate_position};
use crate::simulator::{ContactCommand, PalmSimulator, SimConfig};

/// Idle frames collected before scoring, enough for a steady baseline.
pub const CALIBRATION_FRAMES: usize = 200;

/// Half-extent of the inner test region: contacts are placed in the central
/// 20 x 20 mm of the board, one electrode pitch in from the grid border.
pub const INNER_REGION_HALF: f64 = 10.0;

/// Probe force for localization checks, newtons. Chosen empirically: the
/// footprint then lifts a small neighbourhood of electrodes past the
/// activation gate, which is where the weighted centroid is sharpest, while
/// staying far from saturating the pad.
pub const DEFAULT_PROBE_FORCE: f64 = 0.08;

/// Frames a probe press is held in [`point_accuracy`]. Estimates from the
/// hold are averaged, which irons out gate flicker of electrodes sitting
/// near the activation threshold under ADC noise.
pub const DEFAULT_CONTACT_HOLD_FRAMES: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct ContactTrial {
    pub commanded: Point2,
    pub estimated: Option<Point2>,
    pub error_mm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReport {
    pub trials: Vec<ContactTrial>,
    pub detected: usize,
    /// Mean and max position error over the detected contacts, millimetres.
    pub mean_error_mm: f64,
    pub max_error_mm: f64,
}

/// Scores localization on an explicit list of contact points. Each contact
/// is pressed for `frames_per_contact` frames; detected estimates are
/// averaged into one position per contact.
pub fn evaluate_contacts(
    config: &SimConfig,
    contacts: &[Point2],
    probe_force: f64,
    frames_per_contact: usize,
) -> Result<AccuracyReport> {
    if contacts.is_empty() {
        return Err(Error::InsufficientData {
            required: 1,
            actual: 0,
        });
    }
    if frames_per_contact == 0 {
        return Err(Error::InvalidParameter(
            "frames_per_contact must be >= 1".into(),
        ));
    }
    let mut sim = PalmSimulator::new(config.clone())?;
    let profile = calibrate_baseline(&sim.idle_frames(CALIBRATION_FRAMES))?;

    let mut trials = Vec::with_capacity(contacts.len());
    let mut detected = 0usize;
    let mut sum = 0.0;
    let mut max = 0.0f64;
    for &commanded in contacts {
        let command = ContactCommand::normal(commanded, probe_force);
        let mut hits = 0usize;
        let mut acc = Point2::new(0.0, 0.0);
        for _ in 0..frames_per_contact {
            let (frame, _) = sim.next_frame(Some(&command))?;
            if let Some(p) = estimate_position(&frame, &profile, &config.geometry).position {
                acc.x += p.x;
                acc.y += p.y;
                hits += 1;
            }
        }
        let estimated = (hits > 0).then(|| Point2::new(acc.x / hits as f64, acc.y / hits as f64));
        let error_mm = estimated.map(|p| p.distance(&commanded));
        if let Some(e) = error_mm {
            detected += 1;
            sum += e;
            max = max.max(e);
        }
        trials.push(ContactTrial {
            commanded,
            estimated,
            error_mm,
        });
    }
    let mean_error_mm = if detected > 0 { sum / detected as f64 } else { f64::NAN };
    let max_error_mm = if detected > 0 { max } else { f64::NAN };
    Ok(AccuracyReport {
        trials,
        detected,
        mean_error_mm,
        max_error_mm,
    })
}

/// Uniform random contact positions over a centred rectangle.
pub fn random_contacts(half_x: f64, half_y: f64, count: usize, seed: u64) -> Vec<Point2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            Point2::new(
                (rng.random::<f64>() - 0.5) * 2.0 * half_x,
                (rng.random::<f64>() - 0.5) * 2.0 * half_y,
            )
        })
        .collect()
}

/// Random-contact accuracy study over the inner test region, holding each
/// press for [`DEFAULT_CONTACT_HOLD_FRAMES`] frames.
pub fn point_accuracy(
    config: &SimConfig,
    count: usize,
    probe_force: f64,
    contact_seed: u64,
) -> Result<AccuracyReport> {
    let contacts = random_contacts(INNER_REGION_HALF, INNER_REGION_HALF, count, contact_seed);
    evaluate_contacts(config, &contacts, probe_force, DEFAULT_CONTACT_HOLD_FRAMES)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TracePoint {
    pub timestamp: f64,
    pub commanded: Point2,
    pub estimated: Option<Point2>,
    pub error_mm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineReport {
    pub points: Vec<TracePoint>,
    pub detected: usize,
    pub mean_error_mm: f64,
    pub max_error_mm: f64,
}

/// Drags a probe along a straight segment, one frame per step, and records
/// commanded versus estimated positions, the sliding-contact counterpart
/// of [`point_accuracy`].
pub fn line_trace(
    config: &SimConfig,
    from: Point2,
    to: Point2,
    steps: usize,
    probe_force: f64,
) -> Result<LineReport> {
    if steps < 2 {
        return Err(Error::InvalidParameter("a trace needs at least 2 steps".into()));
    }
    let mut sim = PalmSimulator::new(config.clone())?;
    let profile = calibrate_baseline(&sim.idle_frames(CALIBRATION_FRAMES))?;

    let mut points = Vec::with_capacity(steps);
    let mut detected = 0usize;
    let mut sum = 0.0;
    let mut max = 0.0f64;
    for s in 0..steps {
        let t = s as f64 / (steps - 1) as f64;
        let commanded = Point2::new(from.x + t * (to.x - from.x), from.y + t * (to.y - from.y));
        let (frame, _) = sim.next_frame(Some(&ContactCommand::normal(commanded, probe_force)))?;
        let estimated = estimate_position(&frame, &profile, &config.geometry).position;
        let error_mm = estimated.map(|p| p.distance(&commanded));
        if let Some(e) = error_mm {
            detected += 1;
            sum += e;
            max = max.max(e);
        }
        points.push(TracePoint {
            timestamp: frame.timestamp,
            commanded,
            estimated,
            error_mm,
        });
    }
    Ok(LineReport {
        points,
        detected,
        mean_error_mm: if detected > 0 { sum / detected as f64 } else { f64::NAN },
        max_error_mm: if detected > 0 { max } else { f64::NAN },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_contact_on_electrode_is_exact() {
        let config = SimConfig {
            noise_std: 0.0,
            ..SimConfig::default()
        };
        let contacts = vec![Point2::new(-5.0, 5.0), Point2::new(5.0, -5.0)];
        let report = evaluate_contacts(&config, &contacts, 0.01, 1).unwrap();
        assert_eq!(report.detected, 2);
        assert!(report.max_error_mm < 1e-9, "max {}", report.max_error_mm);
    }

    #[test]
    fn harness_is_deterministic() {
        let config = SimConfig::default();
        let a = point_accuracy(&config, 20, DEFAULT_PROBE_FORCE, 7).unwrap();
        let b = point_accuracy(&config, 20, DEFAULT_PROBE_FORCE, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_contacts_stay_in_region() {
        for p in random_contacts(10.0, 10.0, 500, 3) {
            assert!(p.x.abs() <= 10.0 && p.y.abs() <= 10.0);
        }
    }

    #[test]
    fn line_trace_reports_every_step() {
        let config = SimConfig::default();
        let report = line_trace(
            &config,
            Point2::new(-8.0, -8.0),
            Point2::new(8.0, 8.0),
            50,
            DEFAULT_PROBE_FORCE,
        )
        .unwrap();
        assert_eq!(report.points.len(), 50);
        assert_eq!(report.points[0].commanded, Point2::new(-8.0, -8.0));
        assert_eq!(report.points[49].commanded, Point2::new(8.0, 8.0));
        assert!(report.detected > 40, "detected {}", report.detected);
    }
}
