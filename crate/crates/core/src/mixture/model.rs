//! Gaussian mixture container and density evaluation.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Per-dimension affine map `z = (x - shift) / scale` applied to data before
/// fitting and evaluation. Mixture parameters live in the transformed space;
/// the container undoes the map wherever it reports data-space quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    shift: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardization {
    pub fn new(shift: Vec<f64>, scale: Vec<f64>) -> Result<Self> {
        if shift.len() != scale.len() {
            return Err(Error::LengthMismatch {
                left: shift.len(),
                right: scale.len(),
            });
        }
        if !shift.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite shift".into()));
        }
        if !scale.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(Error::InvalidParameter(
                "scales must be positive and finite".into(),
            ));
        }
        Ok(Self { shift, scale })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            shift: vec![0.0; dim],
            scale: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    pub fn to_internal(&self, x: &[f64], out: &mut [f64]) {
        for j in 0..self.shift.len() {
            out[j] = (x[j] - self.shift[j]) / self.scale[j];
        }
    }

    pub fn from_internal(&self, z: &[f64], out: &mut [f64]) {
        for j in 0..self.shift.len() {
            out[j] = z[j] * self.scale[j] + self.shift[j];
        }
    }

    /// log det of the data-to-internal Jacobian is `-log_scale_sum()`;
    /// data-space log-densities are internal ones minus this sum.
    pub fn log_scale_sum(&self) -> f64 {
        self.scale.iter().map(|s| s.ln()).sum()
    }
}

/// Full-covariance Gaussian mixture over joint vectors whose leading
/// `input_dim` dimensions are observed at prediction time and whose trailing
/// `output_dim` dimensions are regressed. Parameters are stored in the
/// standardized space defined by `transform`.
///
/// Construction validates the representation invariants: positive priors
/// summing to one, symmetric positive-definite covariances, and consistent
/// dimensions throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureModel {
    priors: Vec<f64>,
    means: Vec<DVector<f64>>,
    covariances: Vec<DMatrix<f64>>,
    input_dim: usize,
    output_dim: usize,
    transform: Standardization,
}

pub const PRIOR_SUM_TOLERANCE: f64 = 1e-9;
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

impl MixtureModel {
    pub fn new(
        priors: Vec<f64>,
        means: Vec<DVector<f64>>,
        covariances: Vec<DMatrix<f64>>,
        input_dim: usize,
        output_dim: usize,
    ) -> Result<Self> {
        let dim = input_dim + output_dim;
        Self::with_transform(
            priors,
            means,
            covariances,
            input_dim,
            output_dim,
            Standardization::identity(dim),
        )
    }

    pub fn with_transform(
        priors: Vec<f64>,
        means: Vec<DVector<f64>>,
        covariances: Vec<DMatrix<f64>>,
        input_dim: usize,
        output_dim: usize,
        transform: Standardization,
    ) -> Result<Self> {
        let k = priors.len();
        if k == 0 {
            return Err(Error::InvalidParameter("mixture needs a component".into()));
        }
        if means.len() != k || covariances.len() != k {
            return Err(Error::LengthMismatch {
                left: k,
                right: means.len().min(covariances.len()),
            });
        }
        let dim = input_dim + output_dim;
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if transform.dim() != dim {
            return Err(Error::LengthMismatch {
                left: transform.dim(),
                right: dim,
            });
        }
        let sum: f64 = priors.iter().sum();
        if !priors.iter().all(|p| p.is_finite() && *p > 0.0)
            || (sum - 1.0).abs() > PRIOR_SUM_TOLERANCE
        {
            return Err(Error::InvalidParameter(format!(
                "priors must be positive and sum to one (sum = {sum})"
            )));
        }
        for (idx, (mean, cov)) in means.iter().zip(&covariances).enumerate() {
            if mean.len() != dim {
                return Err(Error::LengthMismatch {
                    left: mean.len(),
                    right: dim,
                });
            }
            if cov.nrows() != dim || cov.ncols() != dim {
                return Err(Error::LengthMismatch {
                    left: cov.nrows().max(cov.ncols()),
                    right: dim,
                });
            }
            if !mean.iter().all(|v| v.is_finite()) || !cov.iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "component {idx} has non-finite parameters"
                )));
            }
            for a in 0..dim {
                for b in (a + 1)..dim {
                    let diff = (cov[(a, b)] - cov[(b, a)]).abs();
                    let mag = cov[(a, b)].abs().max(cov[(b, a)].abs()).max(1.0);
                    if diff > SYMMETRY_TOLERANCE * mag {
                        return Err(Error::InvalidParameter(format!(
                            "component {idx} covariance is asymmetric at ({a}, {b})"
                        )));
                    }
                }
            }
            if Cholesky::new(cov.clone()).is_none() {
                return Err(Error::InvalidParameter(format!(
                    "component {idx} covariance is not positive definite"
                )));
            }
        }
        Ok(Self {
            priors,
            means,
            covariances,
            input_dim,
            output_dim,
            transform,
        })
    }

    pub fn component_count(&self) -> usize {
        self.priors.len()
    }

    pub fn dim(&self) -> usize {
        self.input_dim + self.output_dim
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn means(&self) -> &[DVector<f64>] {
        &self.means
    }

    pub fn covariances(&self) -> &[DMatrix<f64>] {
        &self.covariances
    }

    pub fn transform(&self) -> &Standardization {
        &self.transform
    }

    /// Component mean mapped back to data-space units.
    pub fn mean_in_data_space(&self, component: usize) -> Vec<f64> {
        let z = &self.means[component];
        let mut out = vec![0.0; self.dim()];
        self.transform.from_internal(z.as_slice(), &mut out);
        out
    }

    /// Mixture log-density of a data-space point, including the Jacobian of
    /// the standardization, so that `density` integrates to one over data
    /// space.
    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: self.dim(),
            });
        }
        let mut z = vec![0.0; self.dim()];
        self.transform.to_internal(x, &mut z);
        let z = DVector::from_column_slice(&z);
        let mut terms = Vec::with_capacity(self.priors.len());
        for ((prior, mean), cov) in self.priors.iter().zip(&self.means).zip(&self.covariances) {
            let chol = Cholesky::new(cov.clone())
                .ok_or_else(|| Error::InvalidParameter("covariance lost definiteness".into()))?;
            terms.push(prior.ln() + gaussian_log_density(&z, mean, &chol));
        }
        let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
        Ok(max + sum.ln() - self.transform.log_scale_sum())
    }

    pub fn density(&self, x: &[f64]) -> Result<f64> {
        Ok(self.log_density(x)?.exp())
    }
}

pub(crate) fn gaussian_log_density(
    z: &DVector<f64>,
    mean: &DVector<f64>,
    chol: &Cholesky<f64, Dyn>,
) -> f64 {
    let dim = mean.len() as f64;
    let diff = z - mean;
    let solved = chol.l_dirty().solve_lower_triangular(&diff).expect(
        "Cholesky factor has positive diagonal",
    );
    let log_det: f64 = (0..mean.len()).map(|i| chol.l_dirty()[(i, i)].ln()).sum::<f64>() * 2.0;
    -0.5 * (dim * (2.0 * std::f64::consts::PI).ln() + log_det + solved.norm_squared())
}

/// Free-function form of [`MixtureModel::density`].
pub fn gmm_density(model: &MixtureModel, x: &[f64]) -> Result<f64> {
    model.density(x)
}

pub fn gmm_log_density(model: &MixtureModel, x: &[f64]) -> Result<f64> {
    model.log_density(x)
}
