//! Regression error metrics.

use crate::error::{Error, Result};

/// Root-mean-square error per output axis plus the combined value
/// sqrt(mean ||error||^2), which equals the root of the sum of squared
/// per-axis figures.
#[derive(Debug, Clone, PartialEq)]
pub struct RmseReport {
    pub per_axis: Vec<f64>,
    pub combined: f64,
}

pub fn rmse(predictions: &[Vec<f64>], truths: &[Vec<f64>]) -> Result<RmseReport> {
    if predictions.len() != truths.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: truths.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::InsufficientData {
            required: 1,
            actual: 0,
        });
    }
    let dim = truths[0].len();
    let mut sums = vec![0.0f64; dim];
    for (p, t) in predictions.iter().zip(truths) {
        if p.len() != dim || t.len() != dim {
            return Err(Error::LengthMismatch {
                left: p.len(),
                right: t.len(),
            });
        }
        for j in 0..dim {
            let e = p[j] - t[j];
            sums[j] += e * e;
        }
    }
    let n = predictions.len() as f64;
    let per_axis: Vec<f64> = sums.iter().map(|s| (s / n).sqrt()).collect();
    let combined = (sums.iter().sum::<f64>() / n).sqrt();
    Ok(RmseReport { per_axis, combined })
}
