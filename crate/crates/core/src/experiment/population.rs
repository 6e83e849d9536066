use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use statrs::distribution::{ContinuousCDF, Normal};

use super::record::{ChoiceFlags, Covariates, Dataset, Gender, Provenance, ScenarioResponse, SubjectRecord};
use super::treatment::{price_list, treatment_spec, Scenario, Treatment, PRICE_LIST_ROWS};
use super::SimError;
use crate::agent::{reservation_wage_exact, snap_to_list, Agent, BracketingMode};
use crate::par::{self, Execution};
use crate::prefs::UtilityModel;
use crate::rng::{stream, StreamDomain};

/// Subjects per treatment, indexed like [`Treatment::ALL`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TreatmentCounts(pub [usize; 6]);

impl TreatmentCounts {
    pub fn get(&self, t: Treatment) -> usize {
        self.0[t.index()]
    }

    pub fn set(&mut self, t: Treatment, n: usize) {
        self.0[t.index()] = n;
    }

    pub fn uniform(treatments: &[Treatment], n: usize) -> Self {
        let mut c = Self::default();
        for &t in treatments {
            c.set(t, n);
        }
        c
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

/// alpha = exp(log_mean + log_sd·z + tediousness_slope·(tediousness − 5.5)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostScaleSpec {
    pub log_mean: f64,
    pub log_sd: f64,
    pub tediousness_slope: f64,
}

/// Normal convexity truncated to [min, max]; women get `female_shift` added to the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexitySpec {
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    pub female_shift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Composition {
    /// Each subject is a pure Narrow agent with this probability, otherwise Broad.
    NarrowShare(f64),
    /// Every subject is a convex-kappa agent.
    Kappa(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovariateSpec {
    pub female_share: f64,
    pub age_min: u32,
    pub age_max: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSpec {
    pub counts: TreatmentCounts,
    pub cost_scale: CostScaleSpec,
    pub convexity: ConvexitySpec,
    /// CARA money utility when set, quasi-linear otherwise.
    pub rho: Option<f64>,
    pub composition: Composition,
    pub framing_shift: f64,
    /// Probability that any single price-list row is flipped.
    pub tremble: f64,
    pub covariates: CovariateSpec,
    /// Give the k-th subject of every treatment the same preferences and
    /// covariates, so treatment cells differ only through presentation.
    pub matched_draws: bool,
    pub seed: u64,
}

impl Default for PopulationSpec {
    fn default() -> Self {
        Self {
            counts: TreatmentCounts::default(),
            cost_scale: CostScaleSpec {
                log_mean: -5.8,
                log_sd: 0.55,
                tediousness_slope: 0.08,
            },
            convexity: ConvexitySpec {
                mean: 2.0,
                sd: 0.25,
                min: 1.0,
                max: 4.0,
                female_shift: 0.1,
            },
            rho: None,
            composition: Composition::NarrowShare(1.0),
            framing_shift: 0.0,
            tremble: 0.0,
            covariates: CovariateSpec {
                female_share: 0.42,
                age_min: 18,
                age_max: 70,
            },
            matched_draws: true,
            seed: 0,
        }
    }
}

impl PopulationSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidSpec(m));
        let prob = |name: &str, p: f64| -> Result<(), SimError> {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(SimError::InvalidSpec(format!("{name} must be in [0, 1], got {p}")))
            }
        };
        prob("tremble", self.tremble)?;
        prob("female_share", self.covariates.female_share)?;
        match self.composition {
            Composition::NarrowShare(w) => prob("narrow_share", w)?,
            Composition::Kappa(k) if !k.is_finite() => return bad("kappa must be finite".into()),
            Composition::Kappa(_) => {}
        }
        let c = &self.cost_scale;
        if !(c.log_mean.is_finite() && c.log_sd.is_finite() && c.log_sd >= 0.0 && c.tediousness_slope.is_finite()) {
            return bad("cost-scale parameters must be finite with log_sd >= 0".into());
        }
        let g = &self.convexity;
        if !(g.mean.is_finite() && g.sd.is_finite() && g.sd >= 0.0 && g.female_shift.is_finite()) {
            return bad("convexity parameters must be finite with sd >= 0".into());
        }
        if !(g.min >= 1.0 && g.max >= g.min && g.max.is_finite()) {
            return bad(format!("convexity bounds must satisfy 1 <= min <= max, got [{}, {}]", g.min, g.max));
        }
        if let Some(rho) = self.rho {
            if !(rho.is_finite() && rho != 0.0) {
                return bad(format!("rho must be finite and non-zero, got {rho}"));
            }
        }
        if !self.framing_shift.is_finite() {
            return bad("framing_shift must be finite".into());
        }
        if self.covariates.age_min > self.covariates.age_max {
            return bad("age_min must not exceed age_max".into());
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the spec.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("population spec serializes");
        let hash = Sha256::digest(json.as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Per-subject draws that define an agent and its covariates.
#[derive(Debug, Clone, Copy)]
struct SubjectDraws {
    covariates: Covariates,
    alpha: f64,
    gamma: f64,
    narrow: bool,
}

fn draw_subject(spec: &PopulationSpec, rng: &mut ChaCha8Rng) -> SubjectDraws {
    // Fixed draw order keeps streams aligned across treatments.
    let u_gender: f64 = rng.random();
    let age = rng.random_range(spec.covariates.age_min..=spec.covariates.age_max);
    let tediousness: u8 = rng.random_range(1..=10);
    let z_alpha: f64 = rng.sample(StandardNormal);
    let u_gamma: f64 = rng.random();
    let u_mode: f64 = rng.random();

    let gender = if u_gender < spec.covariates.female_share {
        Gender::Female
    } else {
        Gender::Male
    };
    let c = &spec.cost_scale;
    let alpha = (c.log_mean + c.log_sd * z_alpha + c.tediousness_slope * (tediousness as f64 - 5.5)).exp();
    let g = &spec.convexity;
    let mean = g.mean + if gender == Gender::Female { g.female_shift } else { 0.0 };
    let gamma = truncated_normal(mean, g.sd, g.min, g.max, u_gamma);
    let narrow = match spec.composition {
        Composition::NarrowShare(w) => u_mode < w,
        Composition::Kappa(_) => false,
    };
    SubjectDraws {
        covariates: Covariates {
            gender,
            age,
            tediousness,
        },
        alpha,
        gamma,
        narrow,
    }
}

/// Inverse-CDF draw from N(mean, sd²) restricted to [lo, hi].
fn truncated_normal(mean: f64, sd: f64, lo: f64, hi: f64, u: f64) -> f64 {
    if sd == 0.0 {
        return mean.clamp(lo, hi);
    }
    let n = Normal::standard();
    let a = n.cdf((lo - mean) / sd);
    let b = n.cdf((hi - mean) / sd);
    if b - a <= f64::EPSILON {
        return if mean < lo { lo } else { hi };
    }
    let p = (a + u * (b - a)).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
    (mean + sd * n.inverse_cdf(p)).clamp(lo, hi)
}

fn build_agent(spec: &PopulationSpec, d: &SubjectDraws) -> Agent {
    let model = match spec.rho {
        Some(rho) => UtilityModel::CaraMoneyPowerCost {
            rho,
            alpha: d.alpha,
            gamma: d.gamma,
        },
        None => UtilityModel::QuasiLinearPowerCost {
            alpha: d.alpha,
            gamma: d.gamma,
        },
    };
    let mode = match spec.composition {
        Composition::Kappa(kappa) => BracketingMode::ConvexKappa { kappa },
        Composition::NarrowShare(_) if d.narrow => BracketingMode::Narrow,
        Composition::NarrowShare(_) => BracketingMode::Broad,
    };
    Agent::new(model, mode).with_framing_shift(spec.framing_shift)
}

/// Runs one subject through both scenarios of a treatment.
///
/// Each row of the noiseless answer is flipped independently with
/// probability `tremble`; 16 uniforms are drawn per scenario regardless.
pub fn simulate_subject(
    rng: &mut ChaCha8Rng,
    subject_id: u32,
    agent: &Agent,
    treatment: Treatment,
    covariates: Covariates,
    tremble: f64,
) -> Result<SubjectRecord, SimError> {
    let list = price_list();
    let mut responses = [None, None];
    for s in Scenario::ALL {
        let r = reservation_wage_exact(agent, &treatment_spec(treatment, s))?;
        let (recorded, censored) = snap_to_list(r, &list);
        let mut flags: ChoiceFlags = [false; PRICE_LIST_ROWS];
        for (flag, &w) in flags.iter_mut().zip(list.wages()) {
            *flag = !censored && w >= recorded;
        }
        for flag in flags.iter_mut() {
            let u: f64 = rng.random();
            if u < tremble {
                *flag = !*flag;
            }
        }
        responses[s.index()] = Some(ScenarioResponse::from_flags(flags));
    }
    Ok(SubjectRecord {
        subject_id,
        treatment,
        responses,
        covariates,
    })
}

pub fn simulate_dataset(spec: &PopulationSpec) -> Result<Dataset, SimError> {
    simulate_dataset_with(spec, Execution::Parallel)
}

/// Subject ids run 1..=N in treatment order; output does not depend on `exec`.
pub fn simulate_dataset_with(spec: &PopulationSpec, exec: Execution) -> Result<Dataset, SimError> {
    spec.validate()?;
    let mut slots = Vec::with_capacity(spec.counts.total());
    for t in Treatment::ALL {
        for k in 0..spec.counts.get(t) {
            slots.push((t, k));
        }
    }
    let results = par::map_range(exec, slots.len(), |i| {
        let (t, k) = slots[i];
        let subject_id = (i + 1) as u32;
        let mut own = stream(spec.seed, StreamDomain::Subject, subject_id as u64);
        let draws = if spec.matched_draws {
            draw_subject(spec, &mut stream(spec.seed, StreamDomain::Matched, k as u64))
        } else {
            draw_subject(spec, &mut own)
        };
        let agent = build_agent(spec, &draws);
        simulate_subject(&mut own, subject_id, &agent, t, draws.covariates, spec.tremble)
    });
    let records = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(Dataset {
        records,
        provenance: Some(Provenance {
            seed: spec.seed,
            spec_digest: spec.digest(),
        }),
    })
}
