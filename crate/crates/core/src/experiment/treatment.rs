use serde::{Deserialize, Serialize};

use crate::prefs::Bundle;

/// Number of rows on every price list.
pub const PRICE_LIST_ROWS: usize = 16;
/// Step between consecutive extra wages.
pub const WAGE_STEP: f64 = 0.25;
/// Recorded wage for subjects who never accept the extra work.
pub const CENSOR_CODE: f64 = 4.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Treatment {
    Broad,
    Narrow,
    Low,
    Partial,
    Before,
    After,
}

impl Treatment {
    pub const ALL: [Treatment; 6] = [
        Treatment::Broad,
        Treatment::Narrow,
        Treatment::Low,
        Treatment::Partial,
        Treatment::Before,
        Treatment::After,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Treatment::Broad => "BROAD",
            Treatment::Narrow => "NARROW",
            Treatment::Low => "LOW",
            Treatment::Partial => "PARTIAL",
            Treatment::Before => "BEFORE",
            Treatment::After => "AFTER",
        }
    }

    pub fn from_label(s: &str) -> Option<Treatment> {
        Treatment::ALL
            .into_iter()
            .find(|t| t.label().eq_ignore_ascii_case(s.trim()))
    }

    /// BEFORE and AFTER only relabel NARROW.
    pub fn is_framing_variant(self) -> bool {
        matches!(self, Treatment::Before | Treatment::After)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl std::fmt::Display for Treatment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scenario {
    S1,
    S2,
}

impl Scenario {
    pub const ALL: [Scenario; 2] = [Scenario::S1, Scenario::S2];

    pub fn number(self) -> u8 {
        match self {
            Scenario::S1 => 1,
            Scenario::S2 => 2,
        }
    }

    pub fn from_number(n: u8) -> Option<Scenario> {
        match n {
            1 => Some(Scenario::S1),
            2 => Some(Scenario::S2),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Presented choice and endowment for one treatment × scenario cell.
///
/// Option B pays `base_wage` plus the extra wage of the price-list row.
/// `base_wage` equals option A's money ($4, or $6 in BROAD where the
/// participation fee is folded into the options).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreatmentSpec {
    pub treatment: Treatment,
    pub scenario: Scenario,
    pub option_a: Bundle,
    pub option_b_tasks: u32,
    pub base_wage: f64,
    pub endowment: Bundle,
}

impl TreatmentSpec {
    pub fn option_b(&self, extra_wage: f64) -> Bundle {
        Bundle::new(self.option_b_tasks, self.base_wage + extra_wage)
    }

    /// Option A and option B (at `extra_wage`) with the endowment added.
    pub fn full_outcomes(&self, extra_wage: f64) -> (Bundle, Bundle) {
        (
            self.option_a + self.endowment,
            self.option_b(extra_wage) + self.endowment,
        )
    }
}

pub fn treatment_spec(treatment: Treatment, scenario: Scenario) -> TreatmentSpec {
    // Scenario 2 adds 15 tasks to both presented options.
    let shift = match scenario {
        Scenario::S1 => 0,
        Scenario::S2 => 15,
    };
    let (a_tasks, a_money, endowment) = match treatment {
        Treatment::Broad => (15, 6.0, Bundle::ZERO),
        Treatment::Narrow | Treatment::Before | Treatment::After => (0, 4.0, Bundle::new(15, 2.0)),
        Treatment::Low => (0, 4.0, Bundle::new(0, 2.0)),
        Treatment::Partial => (15, 4.0, Bundle::new(0, 2.0)),
    };
    TreatmentSpec {
        treatment,
        scenario,
        option_a: Bundle::new(a_tasks + shift, a_money),
        option_b_tasks: a_tasks + shift + 15,
        base_wage: a_money,
        endowment,
    }
}

/// The extra wages offered on a price list, in row order.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceList {
    extra_wages: [f64; PRICE_LIST_ROWS],
}

impl PriceList {
    pub fn wages(&self) -> &[f64; PRICE_LIST_ROWS] {
        &self.extra_wages
    }

    /// Wage on 1-based row `row`.
    pub fn row(&self, row: usize) -> Option<f64> {
        row.checked_sub(1).and_then(|i| self.extra_wages.get(i).copied())
    }

    pub fn len(&self) -> usize {
        PRICE_LIST_ROWS
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

pub fn price_list() -> PriceList {
    let mut extra_wages = [0.0; PRICE_LIST_ROWS];
    for (i, w) in extra_wages.iter_mut().enumerate() {
        *w = WAGE_STEP * (i + 1) as f64;
    }
    PriceList { extra_wages }
}
