use std::path::PathBuf;

use anyhow::Context;
use serde_json::json;

use palmsense::dataset::{replay_stream, save_profile};
use palmsense::localization::calibrate_baseline;

use crate::simflags::print_json;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Idle recording (binary stream) to calibrate from.
    #[arg(long, value_name = "FILE")]
    stream: PathBuf,

    /// Where to write the calibration profile (JSON).
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let (frames, stats) =
        replay_stream(&args.stream).with_context(|| format!("reading {}", args.stream.display()))?;
    let profile = calibrate_baseline(&frames)?;
    save_profile(&profile, &args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    let (lo, hi) = profile
        .noise_scales
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| {
            (lo.min(s), hi.max(s))
        });
    print_json(&json!({
        "frames": frames.len(),
        "frames_corrupted": stats.frames_corrupted,
        "bytes_skipped": stats.bytes_skipped,
        "noise_scale_min": lo,
        "noise_scale_max": hi,
    }))
}
