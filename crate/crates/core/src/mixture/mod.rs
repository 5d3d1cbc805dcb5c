//! Joint mixture modeling of tactile readings and contact force: EM
//! fitting, BIC-guided component-count selection, conditional regression,
//! and the error metrics used to judge it.

mod em;
mod gmr;
mod metrics;
mod model;

pub use em::{
    fit_em, fit_em_joint, param_count, select_k, select_k_joint, EmConfig, FitReport, KCandidate,
    COLLAPSE_MASS, MIN_SAMPLES_PER_COMPONENT,
};
pub use gmr::{gmr_predict, GmrPredictor, Prediction};
pub use metrics::{rmse, RmseReport};
pub use model::{gmm_density, gmm_log_density, MixtureModel, Standardization};
