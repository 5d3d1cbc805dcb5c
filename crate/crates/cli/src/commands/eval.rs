use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context};
use serde_json::json;

use palmsense::dataset::{read_dataset, load_model};
use palmsense::mixture::{rmse, GmrPredictor};
use palmsense::{CHANNEL_COUNT, FORCE_DIMS};

use crate::simflags::print_json;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Fitted model (JSON).
    #[arg(long, value_name = "FILE")]
    model: PathBuf,

    /// Labeled evaluation dataset (CSV).
    #[arg(long, value_name = "FILE")]
    dataset: PathBuf,

    /// Optional CSV of per-sample truth and prediction.
    #[arg(long, value_name = "FILE")]
    per_sample: Option<PathBuf>,
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let (model, _geometry_hash) =
        load_model(&args.model).with_context(|| format!("reading {}", args.model.display()))?;
    if model.input_dim() != CHANNEL_COUNT || model.output_dim() != FORCE_DIMS {
        bail!(
            "model regresses {} inputs to {} outputs; datasets carry {} channels and {} force axes",
            model.input_dim(),
            model.output_dim(),
            CHANNEL_COUNT,
            FORCE_DIMS
        );
    }
    let samples = read_dataset(&args.dataset)
        .with_context(|| format!("reading {}", args.dataset.display()))?;
    if samples.is_empty() {
        bail!("dataset {} has no rows", args.dataset.display());
    }

    let predictor = GmrPredictor::new(&model)?;
    let mut predictions = Vec::with_capacity(samples.len());
    let mut truths = Vec::with_capacity(samples.len());
    for sample in &samples {
        predictions.push(predictor.predict(&sample.tactile)?.mean);
        truths.push(sample.force.to_vec());
    }
    let report = rmse(&predictions, &truths)?;

    if let Some(path) = &args.per_sample {
        let mut text = String::from("fx,fy,fz,pred_fx,pred_fy,pred_fz\n");
        for (truth, pred) in truths.iter().zip(&predictions) {
            let mut fields = truth.iter().chain(pred.iter());
            let first = fields.next().unwrap();
            write!(text, "{first}").unwrap();
            for v in fields {
                write!(text, ",{v}").unwrap();
            }
            text.push('\n');
        }
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }

    print_json(&json!({
        "samples": samples.len(),
        "rmse_per_axis": report.per_axis,
        "rmse_combined": report.combined,
    }))
}
