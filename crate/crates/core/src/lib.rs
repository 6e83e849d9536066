//! Choice-bracketing laboratory.
//!
//! Preference models over (tasks, money) bundles ([`prefs`]), bracketing
//! decision rules ([`agent`]), the price-list experiment and its simulated
//! populations ([`experiment`]), the inference pipeline for censored
//! reservation wages ([`estimators`]), and numerical probes of when
//! bracketing is identified at all ([`theory`]).

pub mod agent;
pub mod estimators;
pub mod experiment;
pub mod par;
pub mod prefs;
pub mod rng;
pub mod theory;

pub use agent::{Agent, BracketingMode};
pub use experiment::{Dataset, Scenario, Treatment};
pub use par::Execution;
pub use prefs::{Bundle, Lottery, UtilityModel};
