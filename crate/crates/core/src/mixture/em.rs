//! Expectation-maximization fitting and information-criterion model sizing.
//!
//! The fit is deterministic for a given (data, config) pair: every random
//! choice flows from one seeded counter-based generator, and all per-sample
//! reductions run in a fixed order. Results do not depend on machine load.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mixture::model::{MixtureModel, Standardization};

#[derive(Debug, Clone, PartialEq)]
pub struct EmConfig {
    pub max_iterations: usize,
    /// Relative change of mean per-sample log-likelihood that counts as
    /// converged.
    pub loglik_tolerance: f64,
    /// Added to every covariance diagonal after each M-step, in standardized
    /// units. Keeps factorizations alive when a component tightens onto a
    /// low-dimensional sheet of the data.
    pub covariance_regularization: f64,
    pub restarts: usize,
    pub rng_seed: u64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            loglik_tolerance: 1e-6,
            covariance_regularization: 1e-6,
            restarts: 5,
            rng_seed: 0,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be >= 1".into()));
        }
        if !(self.loglik_tolerance.is_finite() && self.loglik_tolerance > 0.0) {
            return Err(Error::InvalidParameter("loglik_tolerance must be positive".into()));
        }
        if !(self.covariance_regularization.is_finite() && self.covariance_regularization > 0.0) {
            return Err(Error::InvalidParameter(
                "covariance_regularization must be positive".into(),
            ));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidParameter("restarts must be >= 1".into()));
        }
        Ok(())
    }
}

/// Diagnostics of one completed fit. Log-likelihoods are mean per-sample
/// values in data space (standardization Jacobian included), so they are
/// directly comparable across different transforms of the same data.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub final_loglik: f64,
    pub iterations_used: usize,
    pub bic: f64,
    pub converged: bool,
    /// One entry per E-step of the winning restart, non-decreasing. A trace
    /// restarts from scratch if a collapsed component had to be reseeded.
    pub loglik_trace: Vec<f64>,
}

/// One entry of the `select_k` sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct KCandidate {
    pub k: usize,
    pub report: FitReport,
}

/// Minimum samples per component required before a fit is attempted.
pub const MIN_SAMPLES_PER_COMPONENT: usize = 10;

/// A component whose total responsibility mass falls below this is
/// considered collapsed; it is reseeded once, then the restart fails.
pub const COLLAPSE_MASS: f64 = 1e-8;

/// Fits a K-component mixture as a plain density model: every dimension is
/// standardized and treated as an input. Use [`fit_em_joint`] when trailing
/// dimensions are regression targets.
pub fn fit_em(data: &[Vec<f64>], k: usize, config: &EmConfig) -> Result<(MixtureModel, FitReport)> {
    let dim = check_data(data, k)?;
    fit_em_joint(data, k, config, dim, 0)
}

/// Fits a mixture over joint (input, output) vectors. The leading
/// `input_dim` dimensions are shifted to zero mean and scaled by one shared
/// factor (their root-mean-square deviation); output dimensions pass through
/// untouched, so regressed values keep their physical units.
pub fn fit_em_joint(
    data: &[Vec<f64>],
    k: usize,
    config: &EmConfig,
    input_dim: usize,
    output_dim: usize,
) -> Result<(MixtureModel, FitReport)> {
    config.validate()?;
    let dim = check_data(data, k)?;
    if input_dim + output_dim != dim {
        return Err(Error::InvalidParameter(format!(
            "input_dim {input_dim} + output_dim {output_dim} must equal data dimension {dim}"
        )));
    }
    let n = data.len();
    let transform = derive_transform(data, input_dim, dim);
    let mut flat = vec![0.0f64; n * dim];
    for (i, row) in data.iter().enumerate() {
        transform.to_internal(row, &mut flat[i * dim..(i + 1) * dim]);
    }
    let jacobian = transform.log_scale_sum();

    let mut master = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let seeds: Vec<u64> = (0..config.restarts).map(|_| master.next_u64()).collect();

    let mut best: Option<(RawFit, FitReport)> = None;
    let mut last_err = None;
    for seed in seeds {
        match run_restart(&flat, n, dim, k, config, seed, jacobian) {
            Ok((raw, report)) => {
                if best.as_ref().is_none_or(|(_, b)| report.final_loglik > b.final_loglik) {
                    best = Some((raw, report));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let (raw, mut report) = match best {
        Some(found) => found,
        None => return Err(last_err.expect("restarts >= 1")),
    };

    let params = param_count(k, dim);
    report.bic = -2.0 * report.final_loglik * n as f64 + params * (n as f64).ln();

    let means = (0..k)
        .map(|c| DVector::from_column_slice(&raw.means[c * dim..(c + 1) * dim]))
        .collect();
    let model = MixtureModel::with_transform(
        raw.priors,
        means,
        raw.covariances,
        input_dim,
        output_dim,
        transform,
    )?;
    Ok((model, report))
}

/// Free parameters of a K-component full-covariance mixture in `dim`
/// dimensions: K - 1 prior weights, K means, K symmetric covariances.
pub fn param_count(k: usize, dim: usize) -> f64 {
    let d = dim as f64;
    let k = k as f64;
    (k - 1.0) + k * d + k * d * (d + 1.0) / 2.0
}

/// Fits every K in `k_range` and returns the model minimizing BIC together
/// with the full sweep, in ascending K order.
pub fn select_k(
    data: &[Vec<f64>],
    k_range: std::ops::RangeInclusive<usize>,
    config: &EmConfig,
) -> Result<(MixtureModel, Vec<KCandidate>)> {
    let dim = check_data(data, *k_range.start().max(&1))?;
    select_k_joint(data, k_range, config, dim, 0)
}

pub fn select_k_joint(
    data: &[Vec<f64>],
    k_range: std::ops::RangeInclusive<usize>,
    config: &EmConfig,
    input_dim: usize,
    output_dim: usize,
) -> Result<(MixtureModel, Vec<KCandidate>)> {
    if k_range.is_empty() || *k_range.start() == 0 {
        return Err(Error::InvalidParameter(format!(
            "component range {:?} must be a non-empty range of positive K",
            k_range
        )));
    }
    let mut best: Option<(MixtureModel, f64)> = None;
    let mut sweep = Vec::new();
    for k in k_range {
        let (model, report) = fit_em_joint(data, k, config, input_dim, output_dim)?;
        let bic = report.bic;
        sweep.push(KCandidate { k, report });
        if best.as_ref().is_none_or(|(_, b)| bic < *b) {
            best = Some((model, bic));
        }
    }
    Ok((best.expect("range checked non-empty").0, sweep))
}

fn check_data(data: &[Vec<f64>], k: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if data.len() < MIN_SAMPLES_PER_COMPONENT * k {
        return Err(Error::InsufficientData {
            required: MIN_SAMPLES_PER_COMPONENT * k,
            actual: data.len(),
        });
    }
    let dim = data[0].len();
    if dim == 0 {
        return Err(Error::InvalidParameter("samples must be non-empty".into()));
    }
    for row in data {
        if row.len() != dim {
            return Err(Error::LengthMismatch {
                left: row.len(),
                right: dim,
            });
        }
        if !row.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("samples must be finite".into()));
        }
    }
    Ok(dim)
}

fn derive_transform(data: &[Vec<f64>], input_dim: usize, dim: usize) -> Standardization {
    let n = data.len() as f64;
    let mut shift = vec![0.0; dim];
    for row in data {
        for (s, v) in shift.iter_mut().zip(row) {
            *s += v;
        }
    }
    for (j, s) in shift.iter_mut().enumerate() {
        *s /= n;
        if j >= input_dim {
            *s = 0.0;
        }
    }
    let mut scale = vec![1.0; dim];
    if input_dim > 0 {
        let mut total_var = 0.0;
        for row in data {
            for j in 0..input_dim {
                let d = row[j] - shift[j];
                total_var += d * d;
            }
        }
        let rms = (total_var / (n * input_dim as f64)).sqrt();
        let g = if rms > 1e-12 { rms } else { 1.0 };
        for s in scale.iter_mut().take(input_dim) {
            *s = g;
        }
    }
    Standardization::new(shift, scale).expect("derived transform is valid")
}

struct RawFit {
    priors: Vec<f64>,
    means: Vec<f64>, // k * dim, row per component
    covariances: Vec<DMatrix<f64>>,
}

/// Per-component quantities refreshed after every M-step.
struct Component {
    log_weight: f64,       // ln prior - 0.5 (d ln 2pi + ln det cov)
    mean: Vec<f64>,        // dim
    precision: Vec<f64>,   // dim * dim, row-major inverse covariance
}

fn refresh_component(
    prior: f64,
    mean: &[f64],
    cov: &DMatrix<f64>,
    dim: usize,
) -> Result<Component> {
    let chol = Cholesky::new(cov.clone()).ok_or(Error::InvalidParameter(
        "regularized covariance failed to factor".into(),
    ))?;
    let log_det: f64 = (0..dim).map(|i| chol.l_dirty()[(i, i)].ln()).sum::<f64>() * 2.0;
    let inv = chol.inverse();
    let mut precision = vec![0.0; dim * dim];
    for a in 0..dim {
        for b in 0..dim {
            precision[a * dim + b] = inv[(a, b)];
        }
    }
    Ok(Component {
        log_weight: prior.ln() - 0.5 * (dim as f64 * LN_TWO_PI + log_det),
        mean: mean.to_vec(),
        precision,
    })
}

const LN_TWO_PI: f64 = 1.8378770664093453;

struct Accumulators {
    mass: Vec<f64>,     // k
    moment1: Vec<f64>,  // k * dim, sums of r * (x - mean_prev)
    moment2: Vec<f64>,  // k * dim * dim, sums of r * (x - mean_prev) outer itself
    sample_ll: Vec<f64>,
}

impl Accumulators {
    fn new(n: usize, dim: usize, k: usize) -> Self {
        Self {
            mass: vec![0.0; k],
            moment1: vec![0.0; k * dim],
            moment2: vec![0.0; k * dim * dim],
            sample_ll: vec![0.0; n],
        }
    }

    fn reset(&mut self) {
        self.mass.fill(0.0);
        self.moment1.fill(0.0);
        self.moment2.fill(0.0);
    }
}

/// One fused E-step and sufficient-statistics pass. Returns the total
/// standardized log-likelihood. Centering the moments on the previous means
/// keeps the M-step numerically stable without a second sweep.
fn em_pass(
    flat: &[f64],
    n: usize,
    dim: usize,
    comps: &[Component],
    acc: &mut Accumulators,
    log_resp: &mut [f64],
    centered: &mut [f64],
) -> f64 {
    let k = comps.len();
    acc.reset();
    let mut total = 0.0;
    for i in 0..n {
        let x = &flat[i * dim..(i + 1) * dim];
        for (c, comp) in comps.iter().enumerate() {
            let y = &mut centered[c * dim..(c + 1) * dim];
            for j in 0..dim {
                y[j] = x[j] - comp.mean[j];
            }
            let mut quad = 0.0;
            for a in 0..dim {
                let row = &comp.precision[a * dim..(a + 1) * dim];
                let mut dot = 0.0;
                for b in 0..dim {
                    dot += row[b] * y[b];
                }
                quad += dot * y[a];
            }
            log_resp[c] = comp.log_weight - 0.5 * quad;
        }
        let peak = log_resp[..k].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut denom = 0.0;
        for value in &log_resp[..k] {
            denom += (value - peak).exp();
        }
        let lse = peak + denom.ln();
        total += lse;
        acc.sample_ll[i] = lse;
        for c in 0..k {
            let r = (log_resp[c] - lse).exp();
            if r == 0.0 {
                continue;
            }
            acc.mass[c] += r;
            let y = &centered[c * dim..(c + 1) * dim];
            let m1 = &mut acc.moment1[c * dim..(c + 1) * dim];
            for j in 0..dim {
                m1[j] += r * y[j];
            }
            let m2 = &mut acc.moment2[c * dim * dim..(c + 1) * dim * dim];
            for a in 0..dim {
                let ra = r * y[a];
                let row = &mut m2[a * dim..(a + 1) * dim];
                for (slot, &yb) in row.iter_mut().zip(y) {
                    *slot += ra * yb;
                }
            }
        }
    }
    total
}

fn run_restart(
    flat: &[f64],
    n: usize,
    dim: usize,
    k: usize,
    config: &EmConfig,
    seed: u64,
    jacobian: f64,
) -> Result<(RawFit, FitReport)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = config.covariance_regularization;

    // Shared diagonal spread of the standardized data, reused for initial
    // covariances and for reseeded components.
    let diag_var = dimension_variances(flat, n, dim);
    let fresh_cov = |_: &mut ChaCha8Rng| {
        DMatrix::from_fn(dim, dim, |a, b| {
            if a == b {
                diag_var[a].max(eps) + eps
            } else {
                0.0
            }
        })
    };

    let mut priors = vec![1.0 / k as f64; k];
    let mut means = kmeanspp_seeds(flat, n, dim, k, &mut rng);
    let mut covariances: Vec<DMatrix<f64>> = (0..k).map(|_| fresh_cov(&mut rng)).collect();

    let mut comps: Vec<Component> = (0..k)
        .map(|c| refresh_component(priors[c], &means[c * dim..(c + 1) * dim], &covariances[c], dim))
        .collect::<Result<_>>()?;

    let mut acc = Accumulators::new(n, dim, k);
    let mut log_resp = vec![0.0; k];
    let mut centered = vec![0.0; k * dim];

    let mut trace: Vec<f64> = Vec::new();
    let mut reseeded = vec![false; k];
    let mut iterations_used = 0;
    let mut converged = false;

    loop {
        let total = em_pass(flat, n, dim, &comps, &mut acc, &mut log_resp, &mut centered);
        let avg = total / n as f64 - jacobian;
        if let Some(&prev) = trace.last() {
            if (avg - prev).abs() <= config.loglik_tolerance * prev.abs().max(1.0) {
                trace.push(avg);
                converged = true;
                break;
            }
        }
        trace.push(avg);
        if iterations_used >= config.max_iterations {
            break;
        }

        let collapsed: Vec<usize> = (0..k).filter(|&c| acc.mass[c] < COLLAPSE_MASS).collect();
        if !collapsed.is_empty() {
            for &c in &collapsed {
                if reseeded[c] {
                    return Err(Error::DegenerateComponent { component: c });
                }
                reseeded[c] = true;
                // Drop the component onto the sample the mixture currently
                // explains worst and give it the global spread.
                let worst = acc
                    .sample_ll
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(i, _)| i)
                    .expect("n >= 1");
                means[c * dim..(c + 1) * dim]
                    .copy_from_slice(&flat[worst * dim..(worst + 1) * dim]);
                covariances[c] = fresh_cov(&mut rng);
                priors[c] = 1.0 / k as f64;
            }
            let prior_sum: f64 = priors.iter().sum();
            for p in &mut priors {
                *p /= prior_sum;
            }
            for c in 0..k {
                comps[c] =
                    refresh_component(priors[c], &means[c * dim..(c + 1) * dim], &covariances[c], dim)?;
            }
            // The objective jumped; start the monotone trace over.
            trace.clear();
            continue;
        }

        // M-step from the centered moments:
        //   mean'  = mean + m1 / mass
        //   cov'   = m2 / mass - (m1 / mass)(m1 / mass)^T + eps I
        for c in 0..k {
            let mass = acc.mass[c];
            priors[c] = mass / n as f64;
            let mean = &mut means[c * dim..(c + 1) * dim];
            let m1 = &acc.moment1[c * dim..(c + 1) * dim];
            let m2 = &acc.moment2[c * dim * dim..(c + 1) * dim * dim];
            let mut delta = vec![0.0; dim];
            for j in 0..dim {
                delta[j] = m1[j] / mass;
                mean[j] += delta[j];
            }
            let cov = &mut covariances[c];
            for a in 0..dim {
                for b in 0..dim {
                    cov[(a, b)] = m2[a * dim + b] / mass - delta[a] * delta[b];
                }
                cov[(a, a)] += eps;
            }
            comps[c] = refresh_component(priors[c], mean, cov, dim)?;
        }
        iterations_used += 1;
    }

    let final_loglik = *trace.last().expect("at least one E-step ran");
    Ok((
        RawFit {
            priors,
            means,
            covariances,
        },
        FitReport {
            final_loglik,
            iterations_used,
            bic: f64::NAN, // filled by the caller once n is known there
            converged,
            loglik_trace: trace,
        },
    ))
}

fn dimension_variances(flat: &[f64], n: usize, dim: usize) -> Vec<f64> {
    let mut mean = vec![0.0; dim];
    for i in 0..n {
        for j in 0..dim {
            mean[j] += flat[i * dim + j];
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut var = vec![0.0; dim];
    for i in 0..n {
        for j in 0..dim {
            let d = flat[i * dim + j] - mean[j];
            var[j] += d * d;
        }
    }
    for v in &mut var {
        *v /= n as f64;
    }
    var
}

/// k-means++ seeding: the first centre is uniform, each further centre is
/// drawn with probability proportional to squared distance from the nearest
/// centre chosen so far.
fn kmeanspp_seeds(flat: &[f64], n: usize, dim: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut seeds = vec![0.0; k * dim];
    let first = rng.random_range(0..n);
    seeds[..dim].copy_from_slice(&flat[first * dim..(first + 1) * dim]);

    let mut nearest_sq = vec![0.0f64; n];
    for i in 0..n {
        nearest_sq[i] = distance_sq(&flat[i * dim..(i + 1) * dim], &seeds[..dim]);
    }
    for c in 1..k {
        let total: f64 = nearest_sq.iter().sum();
        let chosen = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in nearest_sq.iter().enumerate() {
                if target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            // Every sample coincides with an existing seed.
            rng.random_range(0..n)
        };
        seeds[c * dim..(c + 1) * dim].copy_from_slice(&flat[chosen * dim..(chosen + 1) * dim]);
        for i in 0..n {
            let d = distance_sq(&flat[i * dim..(i + 1) * dim], &seeds[c * dim..(c + 1) * dim]);
            if d < nearest_sq[i] {
                nearest_sq[i] = d;
            }
        }
    }
    seeds
}

fn distance_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn two_cluster_data(n_per: usize, seed: u64) -> Vec<Vec<f64>> {
        use rand_distr::{Distribution, Normal};
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.5).unwrap();
        let mut data = Vec::new();
        for &centre in &[(-4.0, 0.0), (4.0, 1.0)] {
            for _ in 0..n_per {
                data.push(vec![
                    centre.0 + noise.sample(&mut rng),
                    centre.1 + noise.sample(&mut rng),
                ]);
            }
        }
        data
    }

    #[test]
    fn needs_ten_samples_per_component() {
        let data = vec![vec![0.0, 0.0]; 19];
        assert!(matches!(
            fit_em(&data, 2, &EmConfig::default()),
            Err(Error::InsufficientData { required: 20, actual: 19 })
        ));
    }

    #[test]
    fn single_component_recovers_sample_moments() {
        // With k = 1 the responsibilities are all one, so one M-step lands
        // exactly on the sample mean and population covariance (+ eps I).
        let data = vec![
            vec![1.0, 2.0],
            vec![3.0, 6.0],
            vec![5.0, 4.0],
            vec![7.0, 8.0],
            vec![2.0, 5.0],
            vec![4.0, 3.0],
            vec![6.0, 7.0],
            vec![8.0, 1.0],
            vec![0.0, 0.0],
            vec![9.0, 9.0],
        ];
        let n = data.len() as f64;
        let mean: Vec<f64> = (0..2)
            .map(|j| data.iter().map(|r| r[j]).sum::<f64>() / n)
            .collect();
        let mut cov = [[0.0f64; 2]; 2];
        for r in &data {
            for a in 0..2 {
                for b in 0..2 {
                    cov[a][b] += (r[a] - mean[a]) * (r[b] - mean[b]) / n;
                }
            }
        }
        let config = EmConfig { restarts: 1, ..EmConfig::default() };
        let (model, report) = fit_em(&data, 1, &config).unwrap();
        let fitted_mean = model.mean_in_data_space(0);
        assert_relative_eq!(fitted_mean[0], mean[0], epsilon = 1e-9);
        assert_relative_eq!(fitted_mean[1], mean[1], epsilon = 1e-9);

        // Undo the standardization on the fitted covariance: all dims share
        // one scale g, so cov_data = cov_internal * g^2.
        let g = model.transform().scale()[0];
        let fitted = model.covariances()[0].clone() * (g * g);
        for a in 0..2 {
            for b in 0..2 {
                let expected = cov[a][b] + if a == b { 1e-6 * g * g } else { 0.0 };
                assert_relative_eq!(fitted[(a, b)], expected, epsilon = 1e-7);
            }
        }
        assert!(report.converged);
        // Gaussian MLE mean log-likelihood: -0.5 (d ln 2pi + ln det S + d).
        let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
        let expected_ll = -0.5 * (2.0 * LN_TWO_PI + det.ln() + 2.0);
        assert_relative_eq!(report.final_loglik, expected_ll, epsilon = 1e-4);
    }

    #[test]
    fn trace_is_monotone_and_bic_matches_formula() {
        let data = two_cluster_data(100, 3);
        let (model, report) = fit_em(&data, 2, &EmConfig::default()).unwrap();
        for pair in report.loglik_trace.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-9, "trace decreased: {pair:?}");
        }
        let n = data.len() as f64;
        let expected_bic =
            -2.0 * report.final_loglik * n + param_count(2, 2) * n.ln();
        assert_relative_eq!(report.bic, expected_bic, max_relative = 1e-12);
        assert_eq!(model.component_count(), 2);
        assert_eq!(model.dim(), 2);
    }

    #[test]
    fn fit_is_deterministic_in_the_seed() {
        let data = two_cluster_data(60, 9);
        let config = EmConfig { rng_seed: 77, ..EmConfig::default() };
        let (a, ra) = fit_em(&data, 2, &config).unwrap();
        let (b, rb) = fit_em(&data, 2, &config).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
    }

    #[test]
    fn recovers_separated_cluster_means() {
        let data = two_cluster_data(150, 5);
        let (model, _) = fit_em(&data, 2, &EmConfig::default()).unwrap();
        let mut means: Vec<Vec<f64>> = (0..2).map(|c| model.mean_in_data_space(c)).collect();
        means.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert!((means[0][0] + 4.0).abs() < 0.2, "got {:?}", means);
        assert!((means[1][0] - 4.0).abs() < 0.2, "got {:?}", means);
        assert!((means[0][1] - 0.0).abs() < 0.2);
        assert!((means[1][1] - 1.0).abs() < 0.2);
    }

    #[test]
    fn mean_loglik_matches_density_evaluation() {
        // FitReport reports data-space likelihoods, so averaging the model's
        // own density over the training set must reproduce it.
        let data = two_cluster_data(50, 21);
        let (model, report) = fit_em(&data, 2, &EmConfig::default()).unwrap();
        let mean_ll: f64 = data
            .iter()
            .map(|row| model.log_density(row).unwrap())
            .sum::<f64>()
            / data.len() as f64;
        assert_relative_eq!(mean_ll, report.final_loglik, epsilon = 1e-9);
    }

    #[test]
    fn select_k_prefers_true_component_count() {
        let data = two_cluster_data(200, 13);
        let (model, sweep) = select_k(&data, 1..=4, &EmConfig::default()).unwrap();
        assert_eq!(model.component_count(), 2);
        assert_eq!(sweep.len(), 4);
        let best = sweep.iter().min_by(|a, b| a.report.bic.total_cmp(&b.report.bic)).unwrap();
        assert_eq!(best.k, 2);
    }

    #[test]
    fn select_k_rejects_zero_start() {
        let data = two_cluster_data(30, 1);
        assert!(select_k(&data, 0..=2, &EmConfig::default()).is_err());
    }

    #[test]
    fn rejects_non_finite_samples() {
        let mut data = two_cluster_data(30, 1);
        data[4][1] = f64::NAN;
        assert!(fit_em(&data, 1, &EmConfig::default()).is_err());
    }

    #[test]
    fn rejects_ragged_samples() {
        let mut data = two_cluster_data(30, 1);
        data[11] = vec![1.0];
        assert!(matches!(
            fit_em(&data, 1, &EmConfig::default()),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn joint_fit_leaves_output_units_alone() {
        let mut data = two_cluster_data(60, 17);
        for (i, row) in data.iter_mut().enumerate() {
            row.push(1000.0 + i as f64); // output dimension with a big offset
        }
        let (model, _) = fit_em_joint(&data, 1, &EmConfig::default(), 2, 1).unwrap();
        let t = model.transform();
        assert_eq!(t.shift()[2], 0.0);
        assert_eq!(t.scale()[2], 1.0);
        assert_eq!(t.scale()[0], t.scale()[1]);
        assert!(t.scale()[0] > 0.1);
        // two_cluster_data(60, ..) yields 120 rows, so the appended output
        // runs 1000..1119 with mean 1059.5; k = 1 recovers it exactly.
        let mean = model.mean_in_data_space(0);
        assert!((mean[2] - 1059.5).abs() < 1e-6, "got {}", mean[2]);
    }
}
