use std::path::PathBuf;

use anyhow::Context;
use serde_json::json;

use palmsense::dataset::{read_dataset, save_model};
use palmsense::geometry::PalmGeometry;
use palmsense::mixture::{select_k_joint, EmConfig};
use palmsense::{CHANNEL_COUNT, FORCE_DIMS};

use crate::simflags::print_json;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Labeled training dataset (CSV).
    #[arg(long, value_name = "FILE")]
    dataset: PathBuf,

    /// Where to write the fitted model (JSON).
    #[arg(long, value_name = "FILE")]
    out: PathBuf,

    /// Smallest component count to try.
    #[arg(long, default_value_t = 1)]
    k_min: usize,

    /// Largest component count to try.
    #[arg(long, default_value_t = 10)]
    k_max: usize,

    /// Independent restarts per component count; best final likelihood wins.
    #[arg(long, default_value_t = 5)]
    restarts: usize,

    /// Iteration cap per restart.
    #[arg(long, default_value_t = 200)]
    max_iterations: usize,

    /// Relative log-likelihood change that counts as converged.
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,

    /// Diagonal added to every covariance update.
    #[arg(long, default_value_t = 1e-6)]
    regularization: f64,

    /// Seed for initialization.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let samples = read_dataset(&args.dataset)
        .with_context(|| format!("reading {}", args.dataset.display()))?;
    let rows: Vec<Vec<f64>> = samples
        .iter()
        .map(|s| {
            let mut row = Vec::with_capacity(CHANNEL_COUNT + FORCE_DIMS);
            row.extend_from_slice(&s.tactile);
            row.extend_from_slice(&s.force);
            row
        })
        .collect();

    let config = EmConfig {
        max_iterations: args.max_iterations,
        loglik_tolerance: args.tolerance,
        covariance_regularization: args.regularization,
        restarts: args.restarts,
        rng_seed: args.seed,
    };
    let (model, candidates) =
        select_k_joint(&rows, args.k_min..=args.k_max, &config, CHANNEL_COUNT, FORCE_DIMS)?;

    let fingerprint = PalmGeometry::standard().fingerprint();
    save_model(&model, Some(&fingerprint), &args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;

    let table: Vec<_> = candidates
        .iter()
        .map(|c| {
            json!({
                "k": c.k,
                "bic": c.report.bic,
                "mean_loglik": c.report.final_loglik,
                "iterations": c.report.iterations_used,
                "converged": c.report.converged,
            })
        })
        .collect();
    print_json(&json!({
        "samples": rows.len(),
        "candidates": table,
        "selected_k": model.component_count(),
    }))
}
