//! Persistence: labeled datasets as CSV, raw streams as recorded wire
//! bytes, and fitted models and calibration profiles as versioned JSON.
//!
//! CSV columns are `s01..s16,fx,fy,fz`, plus `px,py` when the dataset
//! carries contact positions (all rows must agree). Floats are written with
//! Rust's shortest round-trip formatting, so read(write(x)) reproduces every
//! value bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::mixture::{MixtureModel, Standardization};
use crate::types::{CalibrationProfile, LabeledSample, TactileFrame, CHANNEL_COUNT, FORCE_DIMS};
use crate::wire::{encode_frame, DecoderStats, StreamDecoder};

pub const MODEL_FORMAT: &str = "palmsense-gmm-v1";
pub const PROFILE_FORMAT: &str = "palmsense-profile-v1";

fn header(with_positions: bool) -> String {
    let mut cols: Vec<String> = (1..=CHANNEL_COUNT).map(|i| format!("s{i:02}")).collect();
    cols.extend(["fx", "fy", "fz"].map(String::from));
    if with_positions {
        cols.extend(["px", "py"].map(String::from));
    }
    cols.join(",")
}

pub fn write_dataset(samples: &[LabeledSample], path: &Path) -> Result<()> {
    let with_positions = match samples.first() {
        Some(first) => first.contact_position.is_some(),
        None => false,
    };
    for (i, s) in samples.iter().enumerate() {
        if s.contact_position.is_some() != with_positions {
            return Err(Error::InvalidParameter(format!(
                "sample {i} disagrees with the rest about carrying a position"
            )));
        }
        let finite = s.tactile.iter().chain(&s.force).all(|v| v.is_finite())
            && s.contact_position
                .is_none_or(|p| p.x.is_finite() && p.y.is_finite());
        if !finite {
            return Err(Error::InvalidParameter(format!(
                "sample {i} contains non-finite values"
            )));
        }
    }
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", header(with_positions))?;
    for s in samples {
        let mut fields: Vec<String> = s.tactile.iter().map(|v| v.to_string()).collect();
        fields.extend(s.force.iter().map(|v| v.to_string()));
        if let Some(p) = s.contact_position {
            fields.push(p.x.to_string());
            fields.push(p.y.to_string());
        }
        writeln!(out, "{}", fields.join(","))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<Vec<LabeledSample>> {
    let display = path.display().to_string();
    let fail = |line: usize, message: String| Error::Format {
        path: display.clone(),
        line,
        message,
    };
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let head = match lines.next() {
        Some(line) => line?,
        None => return Err(fail(1, "empty file".into())),
    };
    let head = head.trim_end_matches('\r');
    let with_positions = if head == header(true) {
        true
    } else if head == header(false) {
        false
    } else {
        return Err(fail(1, format!("unrecognized header {head:?}")));
    };
    let expected = CHANNEL_COUNT + FORCE_DIMS + if with_positions { 2 } else { 0 };

    let mut samples = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let mut values = [0.0f64; CHANNEL_COUNT + FORCE_DIMS + 2];
        let mut count = 0;
        for field in line.split(',') {
            if count >= expected {
                count += 1; // flag the overflow below
                continue;
            }
            values[count] = field.trim().parse::<f64>().map_err(|e| {
                fail(line_no, format!("field {}: {e} ({field:?})", count + 1))
            })?;
            count += 1;
        }
        if count != expected {
            return Err(fail(
                line_no,
                format!("expected {expected} fields, got {count}"),
            ));
        }
        let mut tactile = [0.0; CHANNEL_COUNT];
        tactile.copy_from_slice(&values[..CHANNEL_COUNT]);
        let mut force = [0.0; FORCE_DIMS];
        force.copy_from_slice(&values[CHANNEL_COUNT..CHANNEL_COUNT + FORCE_DIMS]);
        let contact_position = with_positions.then(|| {
            Point2::new(
                values[CHANNEL_COUNT + FORCE_DIMS],
                values[CHANNEL_COUNT + FORCE_DIMS + 1],
            )
        });
        samples.push(LabeledSample {
            tactile,
            force,
            contact_position,
        });
    }
    Ok(samples)
}

/// Writes frames as raw wire bytes, exactly as the board would emit them.
pub fn record_stream(frames: &[TactileFrame], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for frame in frames {
        out.write_all(&encode_frame(frame)?)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a recording back through the wire decoder at the nominal rate,
/// preserving its corruption statistics.
pub fn replay_stream(path: &Path) -> Result<(Vec<TactileFrame>, DecoderStats)> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    let mut decoder = StreamDecoder::default();
    let frames = decoder.push(&bytes);
    Ok((frames, decoder.stats()))
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    input_dim: usize,
    output_dim: usize,
    priors: Vec<f64>,
    means: Vec<Vec<f64>>,
    /// Row-major `dim * dim` entries per component.
    covariances: Vec<Vec<f64>>,
    standardization: StandardizationFile,
    geometry_hash: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct StandardizationFile {
    shift: Vec<f64>,
    scale: Vec<f64>,
}

pub fn save_model(model: &MixtureModel, geometry_hash: Option<&str>, path: &Path) -> Result<()> {
    let dim = model.dim();
    let file = ModelFile {
        format: MODEL_FORMAT.to_string(),
        input_dim: model.input_dim(),
        output_dim: model.output_dim(),
        priors: model.priors().to_vec(),
        means: model.means().iter().map(|m| m.as_slice().to_vec()).collect(),
        covariances: model
            .covariances()
            .iter()
            .map(|c| {
                let mut flat = Vec::with_capacity(dim * dim);
                for a in 0..dim {
                    for b in 0..dim {
                        flat.push(c[(a, b)]);
                    }
                }
                flat
            })
            .collect(),
        standardization: StandardizationFile {
            shift: model.transform().shift().to_vec(),
            scale: model.transform().scale().to_vec(),
        },
        geometry_hash: geometry_hash.map(String::from),
    };
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, &file)
        .map_err(|e| Error::InvalidParameter(format!("model serialization failed: {e}")))?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Loads a saved model, re-validating every representation invariant, so a
/// hand-edited file with a broken covariance or prior gets rejected here.
pub fn load_model(path: &Path) -> Result<(MixtureModel, Option<String>)> {
    let display = path.display().to_string();
    let reader = BufReader::new(File::open(path)?);
    let file: ModelFile = serde_json::from_reader(reader).map_err(|e| Error::Format {
        path: display,
        line: e.line(),
        message: e.to_string(),
    })?;
    if file.format != MODEL_FORMAT {
        return Err(Error::VersionMismatch {
            found: file.format,
            expected: MODEL_FORMAT.to_string(),
        });
    }
    let dim = file.input_dim + file.output_dim;
    let means = file
        .means
        .into_iter()
        .map(|m| {
            if m.len() != dim {
                Err(Error::LengthMismatch {
                    left: m.len(),
                    right: dim,
                })
            } else {
                Ok(DVector::from_column_slice(&m))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let covariances = file
        .covariances
        .into_iter()
        .map(|flat| {
            if flat.len() != dim * dim {
                Err(Error::LengthMismatch {
                    left: flat.len(),
                    right: dim * dim,
                })
            } else {
                Ok(DMatrix::from_row_slice(dim, dim, &flat))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let transform = Standardization::new(file.standardization.shift, file.standardization.scale)?;
    let model = MixtureModel::with_transform(
        file.priors,
        means,
        covariances,
        file.input_dim,
        file.output_dim,
        transform,
    )?;
    Ok((model, file.geometry_hash))
}

#[derive(Serialize, Deserialize)]
struct ProfileFile {
    format: String,
    baselines: Vec<f64>,
    noise_scales: Vec<f64>,
    sample_count: usize,
}

pub fn save_profile(profile: &CalibrationProfile, path: &Path) -> Result<()> {
    let file = ProfileFile {
        format: PROFILE_FORMAT.to_string(),
        baselines: profile.baselines.to_vec(),
        noise_scales: profile.noise_scales.to_vec(),
        sample_count: profile.sample_count,
    };
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, &file)
        .map_err(|e| Error::InvalidParameter(format!("profile serialization failed: {e}")))?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn load_profile(path: &Path) -> Result<CalibrationProfile> {
    let display = path.display().to_string();
    let reader = BufReader::new(File::open(path)?);
    let file: ProfileFile = serde_json::from_reader(reader).map_err(|e| Error::Format {
        path: display,
        line: e.line(),
        message: e.to_string(),
    })?;
    if file.format != PROFILE_FORMAT {
        return Err(Error::VersionMismatch {
            found: file.format,
            expected: PROFILE_FORMAT.to_string(),
        });
    }
    let baselines: [f64; CHANNEL_COUNT] = file
        .baselines
        .try_into()
        .map_err(|v: Vec<f64>| Error::LengthMismatch {
            left: v.len(),
            right: CHANNEL_COUNT,
        })?;
    let noise_scales: [f64; CHANNEL_COUNT] = file
        .noise_scales
        .try_into()
        .map_err(|v: Vec<f64>| Error::LengthMismatch {
            left: v.len(),
            right: CHANNEL_COUNT,
        })?;
    CalibrationProfile::new(baselines, noise_scales, file.sample_count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::{fit_em_joint, EmConfig};
    use crate::simulator::{run_calibration_protocol, PalmSimulator, SimConfig};
    use tempfile::tempdir;

    fn sample(seeded: u64, with_position: bool) -> LabeledSample {
        let mut tactile = [0.0; CHANNEL_COUNT];
        for (i, t) in tactile.iter_mut().enumerate() {
            *t = 300.0 + (seeded * 31 + i as u64 * 17 % 97) as f64 / 3.0;
        }
        LabeledSample {
            tactile,
            force: [0.1 * seeded as f64, -0.05, 1.0 + seeded as f64 / 7.0],
            contact_position: with_position.then(|| {
                Point2::new(-15.0 + (seeded % 30) as f64, 15.0 - (seeded % 30) as f64)
            }),
        }
    }

    #[test]
    fn dataset_round_trip_with_positions_is_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let samples: Vec<LabeledSample> = (0..25).map(|i| sample(i, true)).collect();
        write_dataset(&samples, &path).unwrap();
        let back = read_dataset(&path).unwrap();
        assert_eq!(back, samples);
    }

    #[test]
    fn dataset_round_trip_without_positions() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let samples: Vec<LabeledSample> = (0..10).map(|i| sample(i, false)).collect();
        write_dataset(&samples, &path).unwrap();
        assert_eq!(read_dataset(&path).unwrap(), samples);
    }

    #[test]
    fn rejects_mixed_position_presence() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let samples = vec![sample(0, true), sample(1, false)];
        assert!(write_dataset(&samples, &path).is_err());
    }

    #[test]
    fn read_reports_offending_line() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let mut text = header(false);
        text.push('\n');
        let good = vec!["1.5"; CHANNEL_COUNT + FORCE_DIMS].join(",");
        text.push_str(&good);
        text.push('\n');
        text.push_str("1,2,oops\n");
        std::fs::write(&path, text).unwrap();
        match read_dataset(&path) {
            Err(Error::Format { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("oops"), "{message}");
            }
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn read_rejects_wrong_field_count() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let mut text = header(false);
        text.push('\n');
        text.push_str("1,2,3\n");
        std::fs::write(&path, text).unwrap();
        assert!(matches!(
            read_dataset(&path),
            Err(Error::Format { line: 2, .. })
        ));
    }

    #[test]
    fn read_rejects_alien_header() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("data.csv");
        std::fs::write(&path, "a,b,c\n1,2,3\n").unwrap();
        assert!(matches!(
            read_dataset(&path),
            Err(Error::Format { line: 1, .. })
        ));
    }

    #[test]
    fn stream_record_replay_round_trips_with_stats() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("idle.stream");
        let mut sim = PalmSimulator::new(SimConfig::default()).unwrap();
        let frames = sim.idle_frames(100);
        record_stream(&frames, &path).unwrap();
        let (back, stats) = replay_stream(&path).unwrap();
        assert_eq!(back, frames);
        assert_eq!(stats.frames_decoded, 100);
        assert_eq!(stats.frames_corrupted, 0);
        assert_eq!(stats.bytes_skipped, 0);
    }

    #[test]
    fn replay_counts_injected_corruption() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("noisy.stream");
        let mut sim = PalmSimulator::new(SimConfig::default()).unwrap();
        let frames = sim.idle_frames(10);
        record_stream(&frames, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[38 * 4 + 9] ^= 0xFF; // corrupt frame 4
        std::fs::write(&path, &bytes).unwrap();
        let (back, stats) = replay_stream(&path).unwrap();
        assert_eq!(back.len(), 9);
        assert!(stats.frames_corrupted >= 1);
    }

    #[test]
    fn model_round_trip_preserves_parameters_and_hash() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.json");
        let config = SimConfig::default();
        let samples = run_calibration_protocol(&config, 4, 1, 40).unwrap();
        let data: Vec<Vec<f64>> = samples
            .iter()
            .map(|s| s.tactile.iter().chain(&s.force).copied().collect())
            .collect();
        let em = EmConfig {
            restarts: 1,
            max_iterations: 30,
            ..EmConfig::default()
        };
        let (model, _) = fit_em_joint(&data, 2, &em, CHANNEL_COUNT, FORCE_DIMS).unwrap();
        let hash = config.geometry.fingerprint();
        save_model(&model, Some(&hash), &path).unwrap();
        let (back, back_hash) = load_model(&path).unwrap();
        assert_eq!(back, model);
        assert_eq!(back_hash.as_deref(), Some(hash.as_str()));
    }

    #[test]
    fn load_model_rejects_unknown_format() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.json");
        std::fs::write(
            &path,
            r#"{"format":"palmsense-gmm-v999","input_dim":1,"output_dim":0,
                "priors":[1.0],"means":[[0.0]],"covariances":[[1.0]],
                "standardization":{"shift":[0.0],"scale":[1.0]},
                "geometry_hash":null}"#,
        )
        .unwrap();
        assert!(matches!(
            load_model(&path),
            Err(Error::VersionMismatch { .. })
        ));
    }

    #[test]
    fn load_model_rejects_broken_invariants() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.json");
        // Priors do not sum to one.
        std::fs::write(
            &path,
            r#"{"format":"palmsense-gmm-v1","input_dim":1,"output_dim":0,
                "priors":[0.7],"means":[[0.0]],"covariances":[[1.0]],
                "standardization":{"shift":[0.0],"scale":[1.0]},
                "geometry_hash":null}"#,
        )
        .unwrap();
        assert!(load_model(&path).is_err());
    }

    #[test]
    fn load_model_rejects_malformed_json_with_line() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.json");
        std::fs::write(&path, "{\n  \"format\": \"palmsense-gmm-v1\",\n  !!\n}").unwrap();
        assert!(matches!(
            load_model(&path),
            Err(Error::Format { line: 3, .. })
        ));
    }

    #[test]
    fn profile_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("profile.json");
        let profile = CalibrationProfile::new(
            [301.25; CHANNEL_COUNT],
            [2.125; CHANNEL_COUNT],
            200,
        )
        .unwrap();
        save_profile(&profile, &path).unwrap();
        assert_eq!(load_profile(&path).unwrap(), profile);
    }

    #[test]
    fn profile_load_rejects_bad_noise_scale() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("profile.json");
        let mut file = ProfileFile {
            format: PROFILE_FORMAT.into(),
            baselines: vec![300.0; CHANNEL_COUNT],
            noise_scales: vec![0.2; CHANNEL_COUNT],
            sample_count: 100,
        };
        file.noise_scales[3] = 0.2;
        std::fs::write(&path, serde_json::to_string(&file).unwrap()).unwrap();
        assert!(load_profile(&path).is_err());
    }
}
