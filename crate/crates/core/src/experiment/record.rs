use serde::{Deserialize, Serialize};

use super::treatment::{price_list, Scenario, Treatment, CENSOR_CODE, PRICE_LIST_ROWS};

pub type ChoiceFlags = [bool; PRICE_LIST_ROWS];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gender {
    Female,
    Male,
}

impl Gender {
    pub fn code(self) -> &'static str {
        match self {
            Gender::Female => "F",
            Gender::Male => "M",
        }
    }

    pub fn from_code(s: &str) -> Option<Gender> {
        match s.trim() {
            "F" | "f" => Some(Gender::Female),
            "M" | "m" => Some(Gender::Male),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Covariates {
    pub gender: Gender,
    pub age: u32,
    /// Self-reported tediousness of the task, 1 to 10.
    pub tediousness: u8,
}

/// Result of reading a price list's accept/reject flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Consistency {
    pub consistent: bool,
    /// First accepted wage, or the censor code when nothing was accepted.
    /// `None` for inconsistent lists.
    pub switch_wage: Option<f64>,
}

pub fn classify_consistency(flags: &ChoiceFlags) -> Consistency {
    let first_accept = flags.iter().position(|&a| a);
    let consistent = match first_accept {
        None => true,
        Some(i) => flags[i..].iter().all(|&a| a),
    };
    let switch_wage = consistent.then(|| wage_at(first_accept));
    Consistency {
        consistent,
        switch_wage,
    }
}

fn wage_at(row: Option<usize>) -> f64 {
    match row {
        Some(i) => price_list().wages()[i],
        None => CENSOR_CODE,
    }
}

/// One scenario's price-list answers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioResponse {
    pub accepts: ChoiceFlags,
    pub res_wage: Option<f64>,
    pub censored: bool,
    pub consistent: bool,
}

impl ScenarioResponse {
    pub fn from_flags(accepts: ChoiceFlags) -> Self {
        let c = classify_consistency(&accepts);
        Self {
            accepts,
            res_wage: c.switch_wage,
            censored: c.consistent && accepts.iter().all(|&a| !a),
            consistent: c.consistent,
        }
    }

    /// Wage entering the analysis. Inconsistent lists are dropped when
    /// `drop_inconsistent` is set and read at their first acceptance otherwise.
    pub fn analysis_wage(&self, drop_inconsistent: bool) -> Option<f64> {
        if self.consistent {
            self.res_wage
        } else if drop_inconsistent {
            None
        } else {
            Some(wage_at(self.accepts.iter().position(|&a| a)))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectRecord {
    pub subject_id: u32,
    pub treatment: Treatment,
    /// Indexed by scenario; ingested data may lack a scenario.
    pub responses: [Option<ScenarioResponse>; 2],
    pub covariates: Covariates,
}

impl SubjectRecord {
    pub fn response(&self, scenario: Scenario) -> Option<&ScenarioResponse> {
        self.responses[scenario.index()].as_ref()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub spec_digest: String,
}

/// Observation of one subject in one scenario, ready for estimation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub subject_id: u32,
    pub treatment: Treatment,
    pub scenario: Scenario,
    pub wage: f64,
    pub censored: bool,
    pub covariates: Covariates,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub records: Vec<SubjectRecord>,
    pub provenance: Option<Provenance>,
}

impl Dataset {
    pub fn new(records: Vec<SubjectRecord>) -> Self {
        Self {
            records,
            provenance: None,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// All scenario observations in record order, S1 before S2 per subject.
    pub fn observations(&self, drop_inconsistent: bool) -> Vec<Observation> {
        let mut out = Vec::new();
        for r in &self.records {
            for s in Scenario::ALL {
                let Some(resp) = r.response(s) else { continue };
                if let Some(wage) = resp.analysis_wage(drop_inconsistent) {
                    out.push(Observation {
                        subject_id: r.subject_id,
                        treatment: r.treatment,
                        scenario: s,
                        wage,
                        censored: wage >= CENSOR_CODE,
                        covariates: r.covariates,
                    });
                }
            }
        }
        out
    }

    /// Wages of one treatment × scenario cell.
    pub fn wages(&self, treatment: Treatment, scenario: Scenario, drop_inconsistent: bool) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.treatment == treatment)
            .filter_map(|r| r.response(scenario))
            .filter_map(|resp| resp.analysis_wage(drop_inconsistent))
            .collect()
    }

    pub fn treatments_present(&self) -> Vec<Treatment> {
        Treatment::ALL
            .into_iter()
            .filter(|t| self.records.iter().any(|r| r.treatment == *t))
            .collect()
    }

    pub fn has_unique_ids(&self) -> bool {
        let mut ids: Vec<u32> = self.records.iter().map(|r| r.subject_id).collect();
        ids.sort_unstable();
        ids.windows(2).all(|w| w[0] != w[1])
    }
}
