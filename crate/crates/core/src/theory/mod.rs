//! Numerical probes of when bracketing can be identified from choices:
//! additivity of the money metric, aggregate versus separate choice on menu
//! pairs, wealth and mixture properties of certainty equivalents, and WARP.

mod lotteries;
mod menus;
mod report;
mod suite;
mod warp;

use thiserror::Error;

use crate::prefs::PrefsError;

pub use lotteries::{cara_shift_invariance, mixture_linearity};
pub use menus::{
    additivity_pair_residual, additivity_residual, choice_trace, epsilon_menus, menu_additivity_residual,
    random_menu_pairs, unidentifiability_probe, ChoiceTrace, DecisionRule, Maximizer, Menu, MenuPair, MAX_MENU,
};
pub use report::{Family, Violation, ViolationReport};
pub use suite::{model_zoo, CARA_MIXTURE_GAP, verify_suite, CheckOutcome, Expectation, Suite, ZooEntry};
pub use warp::{maximizer_choices, random_menus, warp_scan};

/// Gap below which a proposition's equality is taken to hold.
pub const PROPOSITION_TOLERANCE: f64 = 1e-6;
/// Smallest gap counted as a meaningful departure.
pub const DEMONSTRATION_THRESHOLD: f64 = 1e-3;
/// Money-metric difference within which two options count as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TheoryError {
    #[error(transparent)]
    Prefs(#[from] PrefsError),
    #[error("menus need between 1 and {max} options, got {got}")]
    InvalidMenu { got: usize, max: usize },
    #[error("tied maximizers in {context}; choices must be single-valued")]
    TieDetected { context: String },
    #[error("choice {index} is not an option of its menu")]
    ChosenNotInMenu { index: usize },
}
