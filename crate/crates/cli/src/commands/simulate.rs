use std::path::PathBuf;

use anyhow::{bail, Context};
use serde_json::json;

use palmsense::dataset::{record_stream, write_dataset};
use palmsense::geometry::Point2;
use palmsense::simulator::{run_protocol_session, ContactCommand, PalmSimulator};

use crate::simflags::{parse_point, print_json, SimFlags};

#[derive(Debug, clap::Args)]
#[command(group = clap::ArgGroup::new("mode").required(true))]
pub struct Args {
    /// Run the full press protocol and write a labeled CSV dataset.
    #[arg(long, group = "mode")]
    protocol: bool,

    /// Record idle frames (no contact) as a raw binary stream.
    #[arg(long, group = "mode")]
    idle: bool,

    /// Drag a contact along a straight segment, one frame per step, and
    /// record the raw binary stream.
    #[arg(long, group = "mode")]
    line: bool,

    /// Output file: CSV for --protocol, binary stream otherwise.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,

    /// Contact points visited by --protocol.
    #[arg(long, default_value_t = 28)]
    points: usize,

    /// Presses per point in --protocol.
    #[arg(long, default_value_t = 5)]
    repeats: usize,

    /// Frames kept per press in --protocol.
    #[arg(long, default_value_t = 700)]
    samples_per_press: usize,

    /// Seed for --protocol contact-point placement, when it should differ
    /// from --seed. Pass a training run's seed to press the same points
    /// again under fresh noise.
    #[arg(long, value_name = "SEED")]
    point_seed: Option<u64>,

    /// Frame count for --idle and --line.
    #[arg(long, default_value_t = 200)]
    frames: usize,

    /// Normal force held during --line, newtons.
    #[arg(long, default_value_t = 2.0)]
    force: f64,

    /// Segment start for --line, "x,y" in mm.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true, default_value = "-12,-12")]
    from: Point2,

    /// Segment end for --line, "x,y" in mm.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true, default_value = "12,12")]
    to: Point2,

    #[command(flatten)]
    sim: SimFlags,
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let config = args.sim.resolve()?;
    let write_err = || format!("writing {}", args.out.display());

    if args.protocol {
        let point_seed = args.point_seed.unwrap_or(config.rng_seed);
        let samples = run_protocol_session(
            &config,
            args.points,
            args.repeats,
            args.samples_per_press,
            point_seed,
        )?;
        write_dataset(&samples, &args.out).with_context(write_err)?;
        return print_json(&json!({
            "mode": "protocol",
            "points": args.points,
            "repeats": args.repeats,
            "samples_per_press": args.samples_per_press,
            "samples": samples.len(),
        }));
    }

    if args.frames == 0 {
        bail!("--frames must be at least 1");
    }
    let mut sim = PalmSimulator::new(config)?;

    if args.idle {
        let frames = sim.idle_frames(args.frames);
        record_stream(&frames, &args.out).with_context(write_err)?;
        return print_json(&json!({ "mode": "idle", "frames": frames.len() }));
    }

    // Straight-line drag. The last step lands exactly on the end point.
    let mut frames = Vec::with_capacity(args.frames);
    let denom = (args.frames - 1).max(1) as f64;
    for i in 0..args.frames {
        let t = i as f64 / denom;
        let position = Point2::new(
            args.from.x + t * (args.to.x - args.from.x),
            args.from.y + t * (args.to.y - args.from.y),
        );
        let command = ContactCommand::normal(position, args.force);
        let (frame, _) = sim.next_frame(Some(&command))?;
        frames.push(frame);
    }
    record_stream(&frames, &args.out).with_context(write_err)?;
    print_json(&json!({
        "mode": "line",
        "frames": frames.len(),
        "from": [args.from.x, args.from.y],
        "to": [args.to.x, args.to.y],
        "force": args.force,
    }))
}
