//! Inference over reservation-wage data: cell summaries, rank-sum tests,
//! the κ regression, right-censored Tobit and sample-size planning.

mod kappa;
mod mwu;
mod ols;
mod power;
mod summary;
mod tobit;

use thiserror::Error;

pub use kappa::{
    kappa_observations, kappa_profile_oracle, kappa_profile_oracle_obs, nls_kappa, nls_kappa_obs, CellRole,
    CellWeighting, Estimate, KappaFit, KappaLabels, KappaObs, ProfileGrid, GRADIENT_TOLERANCE, MAX_ITERATIONS,
    STEP_TOLERANCE,
};
pub use mwu::{midranks, mwu_exact, mwu_test, MwuResult, EXACT_MAX_N};
pub use ols::{ols, OlsFit};
pub use power::power_two_sample;
pub use summary::{mean_sd, summarize_means, CellSummary};
pub use tobit::{tobit_design, tobit_log_likelihood, tobit_right, Coefficient, TobitDesign, TobitFit};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimError {
    #[error("empty sample")]
    EmptySample,
    #[error("exact enumeration supports at most {max} pooled observations, got {n}")]
    TooLarge { n: usize, max: usize },
    #[error("not identified: {0}")]
    Degenerate(String),
    #[error("did not converge after {iterations} iterations ({detail})")]
    NotConverged { iterations: usize, detail: String },
    #[error("every observation is censored")]
    AllCensored,
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}
