//! Simulator parameter plumbing shared by the commands that run the
//! simulator. Precedence: explicit flags, then the `--config` TOML file,
//! then built-in defaults.

use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use serde::Deserialize;

use palmsense::geometry::Point2;
use palmsense::simulator::SimConfig;

#[derive(Debug, Default, Clone, Args)]
pub struct SimFlags {
    /// TOML file with simulator defaults. Recognized keys: seed,
    /// footprint_radius, gain, force_per_mm, baseline_level, noise_std,
    /// sample_rate. Explicit flags win over file values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Simulator RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Gaussian press footprint radius, mm.
    #[arg(long, value_name = "MM")]
    pub footprint_radius: Option<f64>,

    /// Peak channel response per newton, ADC counts.
    #[arg(long, value_name = "COUNTS")]
    pub gain: Option<f64>,

    /// Press stiffness, newtons per millimetre of depth.
    #[arg(long, value_name = "N_PER_MM")]
    pub force_per_mm: Option<f64>,

    /// Resting channel level, ADC counts.
    #[arg(long, value_name = "COUNTS")]
    pub baseline_level: Option<f64>,

    /// Channel noise standard deviation, ADC counts. Zero disables noise.
    #[arg(long, value_name = "COUNTS")]
    pub noise_std: Option<f64>,

    /// Acquisition rate, Hz.
    #[arg(long, value_name = "HZ")]
    pub sample_rate: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileDefaults {
    seed: Option<u64>,
    footprint_radius: Option<f64>,
    gain: Option<f64>,
    force_per_mm: Option<f64>,
    baseline_level: Option<f64>,
    noise_std: Option<f64>,
    sample_rate: Option<f64>,
}

impl SimFlags {
    pub fn resolve(&self) -> anyhow::Result<SimConfig> {
        let file: FileDefaults = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => FileDefaults::default(),
        };
        let mut cfg = SimConfig::default();
        let pick = |flag: Option<f64>, from_file: Option<f64>, built_in: f64| {
            flag.or(from_file).unwrap_or(built_in)
        };
        cfg.footprint_radius = pick(self.footprint_radius, file.footprint_radius, cfg.footprint_radius);
        cfg.gain = pick(self.gain, file.gain, cfg.gain);
        cfg.force_per_mm = pick(self.force_per_mm, file.force_per_mm, cfg.force_per_mm);
        cfg.baseline_level = pick(self.baseline_level, file.baseline_level, cfg.baseline_level);
        cfg.noise_std = pick(self.noise_std, file.noise_std, cfg.noise_std);
        cfg.sample_rate = pick(self.sample_rate, file.sample_rate, cfg.sample_rate);
        cfg.rng_seed = self.seed.or(file.seed).unwrap_or(cfg.rng_seed);
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses an "x,y" pair in millimetres.
pub fn parse_point(s: &str) -> Result<Point2, String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected x,y but got {s:?}"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|e| format!("bad coordinate {v:?}: {e}"))
    };
    Ok(Point2::new(parse(x)?, parse(y)?))
}

/// Prints a value as pretty JSON on stdout, the machine-readable side of
/// every command.
pub fn print_json(value: &serde_json::Value) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}
