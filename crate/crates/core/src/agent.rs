//! Decision rules that turn a preference model and a bracketing mode into
//! price-list choices.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::experiment::{PriceList, TreatmentSpec, CENSOR_CODE};
use crate::prefs::{bisect, utility, Bundle, UtilityModel, ROOT_TOLERANCE};

/// Initial bracket for the indifference search; it widens tenfold per step
/// up to `WAGE_SEARCH_LIMIT` when the switch lies outside.
pub const WAGE_SEARCH_RANGE: (f64, f64) = (-100.0, 100.0);
pub const WAGE_SEARCH_LIMIT: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    #[error("convex-kappa agents are defined only at the reservation-wage level")]
    ModeUnsupported,
    #[error("preference never switches for extra wages in [{lo}, {hi}]")]
    NoIndifference { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BracketingMode {
    Broad,
    Narrow,
    /// Work counted with the endowment's tasks, money without the endowment's money.
    Partial,
    /// Reservation wage (1 − kappa)·broad + kappa·narrow.
    ConvexKappa { kappa: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agent {
    pub model: UtilityModel,
    pub mode: BracketingMode,
    /// Added to the narrow-frame reservation wage in BEFORE and AFTER.
    pub framing_shift: f64,
}

impl Agent {
    pub fn new(model: UtilityModel, mode: BracketingMode) -> Self {
        Self {
            model,
            mode,
            framing_shift: 0.0,
        }
    }

    pub fn with_framing_shift(mut self, shift: f64) -> Self {
        self.framing_shift = shift;
        self
    }
}

/// Utility the agent attaches to `presented` given an endowment shown alongside it.
pub fn evaluate_option(agent: &Agent, presented: Bundle, endowment: Bundle) -> Result<f64, AgentError> {
    let seen = match agent.mode {
        BracketingMode::Broad => presented + endowment,
        BracketingMode::Narrow => presented,
        BracketingMode::Partial => Bundle::new(presented.tasks + endowment.tasks, presented.money),
        BracketingMode::ConvexKappa { .. } => return Err(AgentError::ModeUnsupported),
    };
    Ok(utility(&agent.model, seen))
}

/// Continuous extra wage at which option B becomes as good as option A.
pub fn reservation_wage_exact(agent: &Agent, spec: &TreatmentSpec) -> Result<f64, AgentError> {
    let shift = if spec.treatment.is_framing_variant() {
        agent.framing_shift
    } else {
        0.0
    };
    match agent.mode {
        BracketingMode::ConvexKappa { kappa } => {
            let broad = indifference_wage(&Agent { mode: BracketingMode::Broad, ..*agent }, spec)?;
            let narrow = indifference_wage(&Agent { mode: BracketingMode::Narrow, ..*agent }, spec)?;
            Ok((1.0 - kappa) * broad + kappa * (narrow + shift))
        }
        BracketingMode::Narrow => Ok(indifference_wage(agent, spec)? + shift),
        _ => indifference_wage(agent, spec),
    }
}

fn indifference_wage(agent: &Agent, spec: &TreatmentSpec) -> Result<f64, AgentError> {
    let u_a = evaluate_option(agent, spec.option_a, spec.endowment)?;
    let gap = |r: f64| {
        evaluate_option(agent, spec.option_b(r), spec.endowment)
            .map(|u| u - u_a)
            .unwrap_or(f64::NAN)
    };
    let (mut lo, mut hi) = WAGE_SEARCH_RANGE;
    while gap(lo) > 0.0 && lo > -WAGE_SEARCH_LIMIT {
        lo *= 10.0;
    }
    while gap(hi) < 0.0 && hi < WAGE_SEARCH_LIMIT {
        hi *= 10.0;
    }
    if !(gap(lo) <= 0.0 && gap(hi) >= 0.0) {
        return Err(AgentError::NoIndifference { lo, hi });
    }
    Ok(bisect(gap, lo, hi))
}

/// Recorded wage on `list` for a continuous reservation wage `r`.
///
/// The agent accepts at indifference, so the record is the smallest list wage
/// at or above `r` (within the root tolerance). Above the top row the record
/// is the censor code.
pub fn snap_to_list(r: f64, list: &PriceList) -> (f64, bool) {
    list.wages()
        .iter()
        .find(|&&w| w >= r - ROOT_TOLERANCE)
        .map(|&w| (w, false))
        .unwrap_or((CENSOR_CODE, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{price_list, treatment_spec, Scenario, Treatment};
    use approx::assert_abs_diff_eq;

    const QL: UtilityModel = UtilityModel::QuasiLinearPowerCost {
        alpha: 0.004,
        gamma: 2.0,
    };

    fn cost(e: f64) -> f64 {
        0.004 * e * e
    }

    #[test]
    fn evaluate_option_examples() {
        let presented = Bundle::new(15, 4.0);
        let endowment = Bundle::new(15, 2.0);
        let broad = Agent::new(QL, BracketingMode::Broad);
        let narrow = Agent::new(QL, BracketingMode::Narrow);
        assert_abs_diff_eq!(evaluate_option(&broad, presented, endowment).unwrap(), 2.4, epsilon = 1e-12);
        assert_abs_diff_eq!(evaluate_option(&narrow, presented, endowment).unwrap(), 3.1, epsilon = 1e-12);
        for mode in [BracketingMode::Broad, BracketingMode::Narrow, BracketingMode::Partial] {
            let a = Agent::new(QL, mode);
            assert_eq!(evaluate_option(&a, presented, Bundle::ZERO).unwrap(), utility(&QL, presented));
        }
        let k = Agent::new(QL, BracketingMode::ConvexKappa { kappa: 0.5 });
        assert_eq!(evaluate_option(&k, presented, endowment), Err(AgentError::ModeUnsupported));
    }

    #[test]
    fn partial_sees_endowment_tasks_only() {
        let a = Agent::new(QL, BracketingMode::Partial);
        let u = evaluate_option(&a, Bundle::new(15, 4.0), Bundle::new(15, 2.0)).unwrap();
        assert_abs_diff_eq!(u, 4.0 - cost(30.0), epsilon = 1e-12);
    }

    #[test]
    fn reservation_wage_examples() {
        let broad = Agent::new(QL, BracketingMode::Broad);
        let narrow = Agent::new(QL, BracketingMode::Narrow);
        let r = reservation_wage_exact(&broad, &treatment_spec(Treatment::Broad, Scenario::S1)).unwrap();
        assert_abs_diff_eq!(r, cost(30.0) - cost(15.0), epsilon = 1e-9);
        assert_abs_diff_eq!(r, 2.7, epsilon = 1e-9);
        let r = reservation_wage_exact(&narrow, &treatment_spec(Treatment::Narrow, Scenario::S1)).unwrap();
        assert_abs_diff_eq!(r, 0.9, epsilon = 1e-9);
    }

    #[test]
    fn quasi_linear_closed_forms_every_cell() {
        for t in Treatment::ALL {
            for s in Scenario::ALL {
                let spec = treatment_spec(t, s);
                let (ea, eb, e) = (
                    spec.option_a.tasks as f64,
                    spec.option_b_tasks as f64,
                    spec.endowment.tasks as f64,
                );
                let broad = reservation_wage_exact(&Agent::new(QL, BracketingMode::Broad), &spec).unwrap();
                let narrow = reservation_wage_exact(&Agent::new(QL, BracketingMode::Narrow), &spec).unwrap();
                assert_abs_diff_eq!(broad, cost(eb + e) - cost(ea + e), epsilon = 1e-9);
                assert_abs_diff_eq!(narrow, cost(eb) - cost(ea), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn convex_kappa_endpoints_and_affinity() {
        let spec = treatment_spec(Treatment::Narrow, Scenario::S2);
        let rw = |mode| reservation_wage_exact(&Agent::new(QL, mode), &spec).unwrap();
        let broad = rw(BracketingMode::Broad);
        let narrow = rw(BracketingMode::Narrow);
        assert_eq!(rw(BracketingMode::ConvexKappa { kappa: 0.0 }), broad);
        assert_eq!(rw(BracketingMode::ConvexKappa { kappa: 1.0 }), narrow);
        let r = |k| rw(BracketingMode::ConvexKappa { kappa: k });
        for (k1, k2) in [(0.0, 0.5), (0.5, 1.38), (-0.3, 2.0)] {
            let slope = (r(k2) - r(k1)) / (k2 - k1);
            assert_abs_diff_eq!(slope, narrow - broad, epsilon = 1e-9);
        }
    }

    #[test]
    fn framing_shift_applies_to_narrow_component_in_before_after_only() {
        let agent = Agent::new(QL, BracketingMode::Narrow).with_framing_shift(0.3);
        let narrow = reservation_wage_exact(&agent, &treatment_spec(Treatment::Narrow, Scenario::S1)).unwrap();
        let before = reservation_wage_exact(&agent, &treatment_spec(Treatment::Before, Scenario::S1)).unwrap();
        assert_abs_diff_eq!(before - narrow, 0.3, epsilon = 1e-12);
        let broad = Agent::new(QL, BracketingMode::Broad).with_framing_shift(0.3);
        let a = reservation_wage_exact(&broad, &treatment_spec(Treatment::After, Scenario::S1)).unwrap();
        let n = reservation_wage_exact(&broad, &treatment_spec(Treatment::Narrow, Scenario::S1)).unwrap();
        assert_eq!(a, n);
        let k = Agent::new(QL, BracketingMode::ConvexKappa { kappa: 0.5 }).with_framing_shift(0.3);
        let a = reservation_wage_exact(&k, &treatment_spec(Treatment::After, Scenario::S1)).unwrap();
        let n = reservation_wage_exact(&k, &treatment_spec(Treatment::Narrow, Scenario::S1)).unwrap();
        assert_abs_diff_eq!(a - n, 0.15, epsilon = 1e-12);
    }

    #[test]
    fn narrow_ignores_endowment_and_broad_sees_outcomes() {
        for gamma in [1.0, 1.5, 2.0, 2.5, 3.0] {
            let model = UtilityModel::QuasiLinearPowerCost { alpha: 0.003, gamma };
            let narrow = Agent::new(model, BracketingMode::Narrow);
            let broad = Agent::new(model, BracketingMode::Broad);
            for s in Scenario::ALL {
                let n = reservation_wage_exact(&narrow, &treatment_spec(Treatment::Narrow, s)).unwrap();
                let l = reservation_wage_exact(&narrow, &treatment_spec(Treatment::Low, s)).unwrap();
                assert_eq!(n, l);
                let b = reservation_wage_exact(&broad, &treatment_spec(Treatment::Broad, s)).unwrap();
                for t in [Treatment::Narrow, Treatment::Partial] {
                    let other = reservation_wage_exact(&broad, &treatment_spec(t, s)).unwrap();
                    assert_abs_diff_eq!(other, b, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn convexity_separates_broad_from_narrow() {
        for s in Scenario::ALL {
            let spec = treatment_spec(Treatment::Narrow, s);
            let convex = UtilityModel::QuasiLinearPowerCost { alpha: 0.004, gamma: 1.7 };
            let b = reservation_wage_exact(&Agent::new(convex, BracketingMode::Broad), &spec).unwrap();
            let n = reservation_wage_exact(&Agent::new(convex, BracketingMode::Narrow), &spec).unwrap();
            assert!(b > n);
            let linear = UtilityModel::QuasiLinearPowerCost { alpha: 0.004, gamma: 1.0 };
            let b = reservation_wage_exact(&Agent::new(linear, BracketingMode::Broad), &spec).unwrap();
            let n = reservation_wage_exact(&Agent::new(linear, BracketingMode::Narrow), &spec).unwrap();
            assert_abs_diff_eq!(b, n, epsilon = 1e-12);
        }
    }

    #[test]
    fn no_indifference_when_money_cannot_compensate() {
        // CARA utility is bounded in money, so a large effort cost is never offset.
        let model = UtilityModel::CaraMoneyPowerCost { rho: 2.0, alpha: 1.0, gamma: 1.0 };
        let agent = Agent::new(model, BracketingMode::Narrow);
        let err = reservation_wage_exact(&agent, &treatment_spec(Treatment::Narrow, Scenario::S1));
        assert!(matches!(err, Err(AgentError::NoIndifference { .. })));
    }

    #[test]
    fn switch_beyond_initial_bracket_is_found_and_censored() {
        let model = UtilityModel::QuasiLinearPowerCost { alpha: 0.05, gamma: 3.0 };
        let agent = Agent::new(model, BracketingMode::Broad);
        let spec = treatment_spec(Treatment::Broad, Scenario::S2);
        let r = reservation_wage_exact(&agent, &spec).unwrap();
        assert!(r > WAGE_SEARCH_RANGE.1, "{r}");
        assert_eq!(snap_to_list(r, &price_list()), (CENSOR_CODE, true));
    }

    #[test]
    fn snap_examples() {
        let list = price_list();
        assert_eq!(snap_to_list(2.7, &list), (2.75, false));
        assert_eq!(snap_to_list(4.5, &list), (4.25, true));
        assert_eq!(snap_to_list(0.25, &list), (0.25, false));
        assert_eq!(snap_to_list(-3.0, &list), (0.25, false));
        assert_eq!(snap_to_list(4.0, &list), (4.0, false));
        assert_eq!(snap_to_list(2.75 + 1e-12, &list), (2.75, false));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn snap_is_monotone(a in -1.0f64..6.0, b in -1.0f64..6.0) {
                let list = price_list();
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                prop_assert!(snap_to_list(lo, &list).0 <= snap_to_list(hi, &list).0);
            }

            #[test]
            fn snap_is_idempotent_on_grid(row in 1usize..=16) {
                let list = price_list();
                let w = list.row(row).unwrap();
                prop_assert_eq!(snap_to_list(w, &list), (w, false));
            }
        }
    }
}
