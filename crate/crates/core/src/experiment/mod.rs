//! The work/money price-list experiment: treatments, price lists,
//! simulated populations, and the dataset they produce.

mod csv_io;
mod population;
mod record;
mod treatment;

use thiserror::Error;

use crate::agent::AgentError;

pub use csv_io::{csv_header, read_csv, to_csv_string, write_csv};
pub use population::{
    simulate_dataset, simulate_dataset_with, simulate_subject, Composition, ConvexitySpec, CostScaleSpec,
    CovariateSpec, PopulationSpec, TreatmentCounts,
};
pub use record::{
    classify_consistency, ChoiceFlags, Consistency, Covariates, Dataset, Gender, Observation, Provenance,
    ScenarioResponse, SubjectRecord,
};
pub use treatment::{
    price_list, treatment_spec, PriceList, Scenario, Treatment, TreatmentSpec, CENSOR_CODE, PRICE_LIST_ROWS,
    WAGE_STEP,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid population spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Agent(#[from] AgentError),
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
