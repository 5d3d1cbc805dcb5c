//! Conditional regression through a fitted joint mixture.
//!
//! Conditioning each Gaussian component on the observed input block gives a
//! per-component linear regressor; the prediction blends them with weights
//! proportional to how well each component explains the input. For one
//! component this reduces to ordinary linear (ridge-free) regression with
//! the component's own covariance structure.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::mixture::model::{gaussian_log_density, MixtureModel, Standardization};

/// Regression output: predicted output vector and the diagonal of the
/// mixture's conditional covariance, both in data-space units.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

/// Prepared regressor. Construction factors each component's input block
/// once, so repeated predictions cost one small solve per component.
#[derive(Debug, Clone)]
pub struct GmrPredictor {
    input_dim: usize,
    output_dim: usize,
    transform: Standardization,
    log_priors: Vec<f64>,
    input_means: Vec<DVector<f64>>,
    output_means: Vec<DVector<f64>>,
    input_chols: Vec<Cholesky<f64, Dyn>>,
    /// Per-component regression gain: cov_OI * cov_II^-1.
    gains: Vec<DMatrix<f64>>,
    /// Per-component conditional covariance of the output block.
    conditional_covs: Vec<DMatrix<f64>>,
}

impl GmrPredictor {
    pub fn new(model: &MixtureModel) -> Result<Self> {
        let input_dim = model.input_dim();
        let output_dim = model.output_dim();
        if input_dim == 0 || output_dim == 0 {
            return Err(Error::InvalidParameter(format!(
                "regression needs non-empty input and output blocks, got {input_dim} and {output_dim}"
            )));
        }
        let k = model.component_count();
        let mut log_priors = Vec::with_capacity(k);
        let mut input_means = Vec::with_capacity(k);
        let mut output_means = Vec::with_capacity(k);
        let mut input_chols = Vec::with_capacity(k);
        let mut gains = Vec::with_capacity(k);
        let mut conditional_covs = Vec::with_capacity(k);
        for c in 0..k {
            let mean = &model.means()[c];
            let cov = &model.covariances()[c];
            let cov_ii = cov.view((0, 0), (input_dim, input_dim)).into_owned();
            let cov_io = cov.view((0, input_dim), (input_dim, output_dim)).into_owned();
            let cov_oo = cov
                .view((input_dim, input_dim), (output_dim, output_dim))
                .into_owned();
            let chol = Cholesky::new(cov_ii).ok_or(Error::SingularInputCovariance)?;
            // gain = cov_OI * cov_II^-1, via cov_II^-1 * cov_IO transposed.
            let gain = chol.solve(&cov_io).transpose();
            let conditional = &cov_oo - &gain * &cov_io;
            log_priors.push(model.priors()[c].ln());
            input_means.push(mean.rows(0, input_dim).into_owned());
            output_means.push(mean.rows(input_dim, output_dim).into_owned());
            input_chols.push(chol);
            gains.push(gain);
            conditional_covs.push(conditional);
        }
        Ok(Self {
            input_dim,
            output_dim,
            transform: model.transform().clone(),
            log_priors,
            input_means,
            output_means,
            input_chols,
            gains,
            conditional_covs,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn predict(&self, input: &[f64]) -> Result<Prediction> {
        if input.len() != self.input_dim {
            return Err(Error::LengthMismatch {
                left: input.len(),
                right: self.input_dim,
            });
        }
        if !input.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("input must be finite".into()));
        }
        let shift = &self.transform.shift()[..self.input_dim];
        let scale = &self.transform.scale()[..self.input_dim];
        let z = DVector::from_fn(self.input_dim, |j, _| (input[j] - shift[j]) / scale[j]);

        let k = self.log_priors.len();
        let mut log_blend = Vec::with_capacity(k);
        for c in 0..k {
            log_blend.push(
                self.log_priors[c] + gaussian_log_density(&z, &self.input_means[c], &self.input_chols[c]),
            );
        }
        let peak = log_blend.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let denom: f64 = log_blend.iter().map(|l| (l - peak).exp()).sum();

        let mut mean = DVector::<f64>::zeros(self.output_dim);
        let mut second_moment = DVector::<f64>::zeros(self.output_dim);
        for c in 0..k {
            let weight = (log_blend[c] - peak).exp() / denom;
            if weight == 0.0 {
                continue;
            }
            let local = &self.output_means[c] + &self.gains[c] * (&z - &self.input_means[c]);
            for j in 0..self.output_dim {
                mean[j] += weight * local[j];
                second_moment[j] += weight * (self.conditional_covs[c][(j, j)] + local[j] * local[j]);
            }
        }

        let out_shift = &self.transform.shift()[self.input_dim..];
        let out_scale = &self.transform.scale()[self.input_dim..];
        let mut mean_out = vec![0.0; self.output_dim];
        let mut var_out = vec![0.0; self.output_dim];
        for j in 0..self.output_dim {
            let var = (second_moment[j] - mean[j] * mean[j]).max(0.0);
            mean_out[j] = mean[j] * out_scale[j] + out_shift[j];
            var_out[j] = var * out_scale[j] * out_scale[j];
        }
        Ok(Prediction {
            mean: mean_out,
            variance: var_out,
        })
    }
}

/// One-shot convenience over [`GmrPredictor`].
pub fn gmr_predict(model: &MixtureModel, input: &[f64]) -> Result<Prediction> {
    GmrPredictor::new(model)?.predict(input)
}
