use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use serde_json::json;

use palmsense::dataset::{load_profile, replay_stream};
use palmsense::geometry::PalmGeometry;
use palmsense::localization::{estimate_position_with_threshold, DEFAULT_ACTIVATION_THRESHOLD};

use crate::simflags::print_json;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Recording (binary stream) to replay.
    #[arg(long, value_name = "FILE")]
    stream: PathBuf,

    /// Calibration profile (JSON) captured on the same palm.
    #[arg(long, value_name = "FILE")]
    profile: PathBuf,

    /// Electrode layout (JSON). Defaults to the built-in 4x4 board.
    #[arg(long, value_name = "FILE")]
    geometry: Option<PathBuf>,

    /// Where to write per-frame estimates (CSV).
    #[arg(long, value_name = "FILE")]
    out: PathBuf,

    /// Activation gate in noise-scale units.
    #[arg(long, default_value_t = DEFAULT_ACTIVATION_THRESHOLD)]
    tau: f64,
}

fn load_geometry(path: &PathBuf) -> anyhow::Result<PalmGeometry> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let raw: PalmGeometry =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    // Round-trip through the constructor so file contents meet the same
    // invariants as built-in layouts.
    Ok(PalmGeometry::new(
        raw.board_width,
        raw.board_height,
        raw.grid_width,
        raw.grid_height,
        raw.sensing_positions,
    )?)
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let (frames, stats) =
        replay_stream(&args.stream).with_context(|| format!("reading {}", args.stream.display()))?;
    let profile = load_profile(&args.profile)
        .with_context(|| format!("reading {}", args.profile.display()))?;
    let geometry = match &args.geometry {
        Some(path) => load_geometry(path)?,
        None => PalmGeometry::standard(),
    };

    let mut contacts = 0usize;
    let mut text = String::from("sequence,timestamp,contact,px,py\n");
    for frame in &frames {
        let estimate = estimate_position_with_threshold(frame, &profile, &geometry, args.tau);
        match estimate.position {
            Some(p) => {
                contacts += 1;
                writeln!(text, "{},{},1,{},{}", frame.sequence, frame.timestamp, p.x, p.y)
                    .unwrap();
            }
            None => writeln!(text, "{},{},0,,", frame.sequence, frame.timestamp).unwrap(),
        }
    }
    fs::write(&args.out, text).with_context(|| format!("writing {}", args.out.display()))?;

    print_json(&json!({
        "frames": frames.len(),
        "frames_corrupted": stats.frames_corrupted,
        "bytes_skipped": stats.bytes_skipped,
        "contacts": contacts,
    }))
}
