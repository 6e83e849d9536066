//! Run configuration: a TOML file of flat sections.
//!
//! ```toml
//! [run]
//! seed = 7
//! out = "sim.csv"
//!
//! [counts]
//! BROAD = 137
//! NARROW = 205
//!
//! [population]
//! narrow_share = 0.7
//! tremble = 0.02
//!
//! [estimate]
//! continuity = false
//! censor_limit = 4.25
//! ```
//!
//! Every `[population]` key is optional and falls back to the simulator's
//! defaults. `narrow_share` and `kappa` are mutually exclusive.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use bracketlab_core::experiment::{Composition, PopulationSpec, TreatmentCounts, CENSOR_CODE};
use bracketlab_core::Treatment;

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    run: RunSection,
    #[serde(default)]
    counts: BTreeMap<String, usize>,
    #[serde(default)]
    population: PopulationSection,
    #[serde(default)]
    estimate: EstimateSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    seed: Option<u64>,
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PopulationSection {
    cost_log_mean: Option<f64>,
    cost_log_sd: Option<f64>,
    tediousness_slope: Option<f64>,
    gamma_mean: Option<f64>,
    gamma_sd: Option<f64>,
    gamma_min: Option<f64>,
    gamma_max: Option<f64>,
    gamma_female_shift: Option<f64>,
    rho: Option<f64>,
    narrow_share: Option<f64>,
    kappa: Option<f64>,
    framing_shift: Option<f64>,
    tremble: Option<f64>,
    female_share: Option<f64>,
    age_min: Option<u32>,
    age_max: Option<u32>,
    matched_draws: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EstimateSection {
    continuity: Option<bool>,
    are: Option<bool>,
    censor_limit: Option<f64>,
    drop_inconsistent: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateOptions {
    pub continuity: bool,
    pub are: bool,
    pub censor_limit: f64,
    pub drop_inconsistent: bool,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            continuity: false,
            are: false,
            censor_limit: CENSOR_CODE,
            drop_inconsistent: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Population parameters; the seed is held separately in `seed`.
    pub population: PopulationSpec,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub estimate: EstimateOptions,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;

        let mut counts = TreatmentCounts::default();
        for (label, &n) in &raw.counts {
            let t = Treatment::from_label(label).ok_or_else(|| {
                CliError::Config(format!(
                    "unknown treatment `{label}` in [counts]; expected one of BROAD, NARROW, LOW, PARTIAL, BEFORE, AFTER"
                ))
            })?;
            counts.set(t, n);
        }

        let p = raw.population;
        let mut spec = PopulationSpec {
            counts,
            ..PopulationSpec::default()
        };
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut spec.cost_scale.log_mean, p.cost_log_mean);
        set(&mut spec.cost_scale.log_sd, p.cost_log_sd);
        set(&mut spec.cost_scale.tediousness_slope, p.tediousness_slope);
        set(&mut spec.convexity.mean, p.gamma_mean);
        set(&mut spec.convexity.sd, p.gamma_sd);
        set(&mut spec.convexity.min, p.gamma_min);
        set(&mut spec.convexity.max, p.gamma_max);
        set(&mut spec.convexity.female_shift, p.gamma_female_shift);
        set(&mut spec.framing_shift, p.framing_shift);
        set(&mut spec.tremble, p.tremble);
        set(&mut spec.covariates.female_share, p.female_share);
        spec.rho = p.rho;
        if let Some(v) = p.age_min {
            spec.covariates.age_min = v;
        }
        if let Some(v) = p.age_max {
            spec.covariates.age_max = v;
        }
        if let Some(v) = p.matched_draws {
            spec.matched_draws = v;
        }
        spec.composition = match (p.narrow_share, p.kappa) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "set at most one of `population.narrow_share` and `population.kappa`".into(),
                ))
            }
            (Some(w), None) => Composition::NarrowShare(w),
            (None, Some(k)) => Composition::Kappa(k),
            (None, None) => spec.composition,
        };

        let d = EstimateOptions::default();
        let e = raw.estimate;
        let estimate = EstimateOptions {
            continuity: e.continuity.unwrap_or(d.continuity),
            are: e.are.unwrap_or(d.are),
            censor_limit: e.censor_limit.unwrap_or(d.censor_limit),
            drop_inconsistent: e.drop_inconsistent.unwrap_or(d.drop_inconsistent),
        };

        Ok(Self {
            population: spec,
            seed: raw.run.seed,
            out: raw.run.out,
            estimate,
        })
    }

    /// The population spec ready to simulate; `seed_override` wins over `run.seed`.
    pub fn simulation_spec(&self, seed_override: Option<u64>) -> Result<PopulationSpec, CliError> {
        let seed = seed_override
            .or(self.seed)
            .ok_or_else(|| CliError::Config("missing required field `run.seed` (or pass --seed)".into()))?;
        let spec = PopulationSpec {
            seed,
            ..self.population.clone()
        };
        spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if spec.counts.total() == 0 {
            return Err(CliError::Config("[counts] must give at least one subject".into()));
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_defaults() {
        let c = RunConfig::parse(
            "[run]\nseed = 5\n[counts]\nBROAD = 3\nlow = 2\n[population]\nkappa = 0.4\ntremble = 0.1\n[estimate]\ncontinuity = true\n",
        )
        .unwrap();
        assert_eq!(c.seed, Some(5));
        assert_eq!(c.population.counts.get(Treatment::Low), 2);
        assert_eq!(c.population.composition, Composition::Kappa(0.4));
        assert_eq!(c.population.convexity, PopulationSpec::default().convexity);
        assert!(c.estimate.continuity);
        assert_eq!(c.estimate.censor_limit, 4.25);
        assert_eq!(c.simulation_spec(None).unwrap().seed, 5);
        assert_eq!(c.simulation_spec(Some(9)).unwrap().seed, 9);
    }

    #[test]
    fn missing_seed_names_the_field() {
        let c = RunConfig::parse("[counts]\nBROAD = 3\n").unwrap();
        let msg = c.simulation_spec(None).unwrap_err().to_string();
        assert!(msg.contains("run.seed"), "{msg}");
    }

    #[test]
    fn rejects_unknown_keys_and_labels() {
        assert!(RunConfig::parse("[population]\ngama = 2\n").is_err());
        assert!(RunConfig::parse("[counts]\nWIDE = 2\n").is_err());
        assert!(RunConfig::parse("[population]\nkappa = 1\nnarrow_share = 0.5\n").is_err());
    }
}
