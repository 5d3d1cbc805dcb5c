use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::ValueEnum;
use serde_json::json;

use palmsense::evaluation::{line_trace, point_accuracy, DEFAULT_PROBE_FORCE};
use palmsense::geometry::Point2;

use crate::simflags::{parse_point, print_json, SimFlags};

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
pub enum Mode {
    /// Press a batch of random points and score the position errors.
    Point,
    /// Drag a contact along a straight segment and record the trace.
    Line,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, value_enum)]
    mode: Mode,

    /// Contacts pressed in point mode.
    #[arg(long, default_value_t = 100)]
    contacts: usize,

    /// Seed for contact placement in point mode (the simulator noise seed
    /// is --seed).
    #[arg(long, default_value_t = 1)]
    contact_seed: u64,

    /// Probe normal force, newtons.
    #[arg(long, default_value_t = DEFAULT_PROBE_FORCE)]
    force: f64,

    /// Segment start for line mode, "x,y" in mm.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true, default_value = "-12,-12")]
    from: Point2,

    /// Segment end for line mode, "x,y" in mm.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true, default_value = "12,12")]
    to: Point2,

    /// Steps along the segment in line mode.
    #[arg(long, default_value_t = 50)]
    steps: usize,

    /// Optional per-contact (point mode) or per-step (line mode) CSV.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,

    #[command(flatten)]
    sim: SimFlags,
}

fn optional(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let config = args.sim.resolve()?;
    match args.mode {
        Mode::Point => {
            if args.contacts == 0 {
                bail!("--contacts must be at least 1");
            }
            let report = point_accuracy(&config, args.contacts, args.force, args.contact_seed)?;
            if let Some(path) = &args.out {
                let mut text =
                    String::from("commanded_x,commanded_y,detected,estimated_x,estimated_y,error_mm\n");
                for t in &report.trials {
                    writeln!(
                        text,
                        "{},{},{},{},{},{}",
                        t.commanded.x,
                        t.commanded.y,
                        u8::from(t.estimated.is_some()),
                        optional(t.estimated.map(|p| p.x)),
                        optional(t.estimated.map(|p| p.y)),
                        optional(t.error_mm),
                    )
                    .unwrap();
                }
                fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            }
            print_json(&json!({
                "mode": "point",
                "contacts": report.trials.len(),
                "detected": report.detected,
                "mean_error_mm": report.mean_error_mm,
                "max_error_mm": report.max_error_mm,
            }))
        }
        Mode::Line => {
            let report = line_trace(&config, args.from, args.to, args.steps, args.force)?;
            if let Some(path) = &args.out {
                let mut text = String::from(
                    "timestamp,commanded_x,commanded_y,detected,estimated_x,estimated_y,error_mm\n",
                );
                for p in &report.points {
                    writeln!(
                        text,
                        "{},{},{},{},{},{},{}",
                        p.timestamp,
                        p.commanded.x,
                        p.commanded.y,
                        u8::from(p.estimated.is_some()),
                        optional(p.estimated.map(|e| e.x)),
                        optional(p.estimated.map(|e| e.y)),
                        optional(p.error_mm),
                    )
                    .unwrap();
                }
                fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            }
            print_json(&json!({
                "mode": "line",
                "steps": report.points.len(),
                "detected": report.detected,
                "mean_error_mm": report.mean_error_mm,
                "max_error_mm": report.max_error_mm,
            }))
        }
    }
}
