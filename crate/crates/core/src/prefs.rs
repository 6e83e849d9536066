//! Preferences over (tasks, money) bundles and finite lotteries, and the
//! money metric they induce.
//!
//! Every variant is evaluated in closed form. The money metric and the
//! certainty equivalent are always found numerically by a bracketing
//! bisection on the money coordinate, so the closed forms that exist for
//! some variants stay available as independent checks.

use std::ops::Add;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Root tolerance in dollars for money-coordinate solves.
pub const ROOT_TOLERANCE: f64 = 1e-9;

/// Maximum number of bracket doublings before a model is declared non-monotone.
pub const MAX_BRACKET_DOUBLINGS: usize = 200;

const PROBABILITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrefsError {
    #[error("invalid utility model: {0}")]
    InvalidModel(String),
    #[error("invalid lottery: {0}")]
    InvalidLottery(String),
    #[error("could not bracket a money root ({0}); the model is not increasing and continuous in money here")]
    NonMonotoneModel(String),
}

/// A (task count, money) outcome.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Bundle {
    pub tasks: u32,
    pub money: f64,
}

impl Bundle {
    pub const ZERO: Bundle = Bundle { tasks: 0, money: 0.0 };

    pub const fn new(tasks: u32, money: f64) -> Self {
        Self { tasks, money }
    }

    pub fn money(money: f64) -> Self {
        Self { tasks: 0, money }
    }

    /// The same bundle with `amount` added to its money.
    pub fn plus_money(self, amount: f64) -> Self {
        Self {
            tasks: self.tasks,
            money: self.money + amount,
        }
    }

    /// Equal task counts and money within `tol`.
    pub fn approx_eq(&self, other: &Bundle, tol: f64) -> bool {
        self.tasks == other.tasks && (self.money - other.money).abs() <= tol
    }

    /// Largest coordinate-wise distance to `other`.
    pub fn distance(&self, other: &Bundle) -> f64 {
        let dt = (self.tasks as f64 - other.tasks as f64).abs();
        dt.max((self.money - other.money).abs())
    }
}

impl Add for Bundle {
    type Output = Bundle;

    fn add(self, rhs: Bundle) -> Bundle {
        Bundle {
            tasks: self.tasks + rhs.tasks,
            money: self.money + rhs.money,
        }
    }
}

impl std::fmt::Display for Bundle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, ${:.4})", self.tasks, self.money)
    }
}

/// Finite-support lottery over bundles.
#[derive(Debug, Clone, PartialEq)]
pub struct Lottery {
    outcomes: Vec<(Bundle, f64)>,
}

impl Lottery {
    pub fn new(outcomes: Vec<(Bundle, f64)>) -> Result<Self, PrefsError> {
        if outcomes.is_empty() {
            return Err(PrefsError::InvalidLottery("no outcomes".into()));
        }
        let mut total = 0.0;
        for (b, p) in &outcomes {
            if !(0.0..=1.0).contains(p) {
                return Err(PrefsError::InvalidLottery(format!(
                    "probability {p} outside [0, 1]"
                )));
            }
            if !b.money.is_finite() {
                return Err(PrefsError::InvalidLottery("non-finite money".into()));
            }
            total += p;
        }
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(PrefsError::InvalidLottery(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self { outcomes })
    }

    pub fn degenerate(b: Bundle) -> Self {
        Self {
            outcomes: vec![(b, 1.0)],
        }
    }

    /// Money-only lottery from (amount, probability) pairs.
    pub fn money(outcomes: &[(f64, f64)]) -> Result<Self, PrefsError> {
        Self::new(
            outcomes
                .iter()
                .map(|&(x, p)| (Bundle::money(x), p))
                .collect(),
        )
    }

    pub fn outcomes(&self) -> &[(Bundle, f64)] {
        &self.outcomes
    }

    pub fn expected_money(&self) -> f64 {
        self.outcomes.iter().map(|(b, p)| p * b.money).sum()
    }

    /// With probability `p` this lottery, otherwise the zero bundle.
    pub fn mix_with_zero(&self, p: f64) -> Result<Self, PrefsError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(PrefsError::InvalidLottery(format!(
                "mixture weight {p} outside [0, 1]"
            )));
        }
        let mut outcomes: Vec<(Bundle, f64)> =
            self.outcomes.iter().map(|&(b, q)| (b, p * q)).collect();
        outcomes.push((Bundle::ZERO, 1.0 - p));
        Ok(Self { outcomes })
    }

    /// Distribution of the sum of this lottery and an independent `other`.
    pub fn independent_sum(&self, other: &Lottery) -> Self {
        let mut outcomes = Vec::with_capacity(self.outcomes.len() * other.outcomes.len());
        for &(a, p) in &self.outcomes {
            for &(b, q) in &other.outcomes {
                outcomes.push((a + b, p * q));
            }
        }
        Self { outcomes }
    }

    /// Every outcome with `w` added to its money.
    pub fn shifted(&self, w: f64) -> Self {
        Self {
            outcomes: self
                .outcomes
                .iter()
                .map(|&(b, p)| (b.plus_money(w), p))
                .collect(),
        }
    }
}

/// A preference specification over bundles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum UtilityModel {
    /// u(e, m) = m − alpha·e^gamma
    QuasiLinearPowerCost { alpha: f64, gamma: f64 },
    /// u(e, m) = (1 − exp(−rho·m))/rho − alpha·e^gamma
    CaraMoneyPowerCost { rho: f64, alpha: f64, gamma: f64 },
    /// u(e, m) = lambda_tasks·e + lambda_money·m
    LinearMetric { lambda_tasks: f64, lambda_money: f64 },
    /// u(m) = m^(1−eta)/(1−eta); tasks are ignored.
    CrraMoney { eta: f64 },
}

impl UtilityModel {
    pub fn validate(&self) -> Result<(), PrefsError> {
        let bad = |msg: String| Err(PrefsError::InvalidModel(msg));
        match *self {
            UtilityModel::QuasiLinearPowerCost { alpha, gamma } => {
                if !(alpha.is_finite() && alpha > 0.0) {
                    return bad(format!("alpha must be finite and > 0, got {alpha}"));
                }
                if !(gamma.is_finite() && gamma >= 1.0) {
                    return bad(format!("gamma must be finite and >= 1, got {gamma}"));
                }
            }
            UtilityModel::CaraMoneyPowerCost { rho, alpha, gamma } => {
                if !(rho.is_finite() && rho != 0.0) {
                    return bad(format!("rho must be finite and non-zero, got {rho}"));
                }
                if !(alpha.is_finite() && alpha >= 0.0) {
                    return bad(format!("alpha must be finite and >= 0, got {alpha}"));
                }
                if !(gamma.is_finite() && gamma >= 1.0) {
                    return bad(format!("gamma must be finite and >= 1, got {gamma}"));
                }
            }
            UtilityModel::LinearMetric {
                lambda_tasks,
                lambda_money,
            } => {
                if !lambda_tasks.is_finite() {
                    return bad("lambda_tasks must be finite".into());
                }
                if !(lambda_money.is_finite() && lambda_money > 0.0) {
                    return bad(format!("lambda_money must be > 0, got {lambda_money}"));
                }
            }
            UtilityModel::CrraMoney { eta } => {
                if !(eta.is_finite() && eta > 0.0 && eta != 1.0) {
                    return bad(format!("eta must be > 0 and != 1, got {eta}"));
                }
            }
        }
        Ok(())
    }

    /// Effort cost alpha·e^gamma for the power-cost variants, 0 otherwise.
    pub fn effort_cost(&self, tasks: u32) -> f64 {
        match *self {
            UtilityModel::QuasiLinearPowerCost { alpha, gamma }
            | UtilityModel::CaraMoneyPowerCost { alpha, gamma, .. } => power_cost(alpha, gamma, tasks),
            _ => 0.0,
        }
    }
}

pub(crate) fn power_cost(alpha: f64, gamma: f64, tasks: u32) -> f64 {
    if tasks == 0 {
        0.0
    } else {
        alpha * (tasks as f64).powf(gamma)
    }
}

pub fn utility(model: &UtilityModel, b: Bundle) -> f64 {
    match *model {
        UtilityModel::QuasiLinearPowerCost { alpha, gamma } => {
            b.money - power_cost(alpha, gamma, b.tasks)
        }
        UtilityModel::CaraMoneyPowerCost { rho, alpha, gamma } => {
            -(-rho * b.money).exp_m1() / rho - power_cost(alpha, gamma, b.tasks)
        }
        UtilityModel::LinearMetric {
            lambda_tasks,
            lambda_money,
        } => lambda_tasks * b.tasks as f64 + lambda_money * b.money,
        UtilityModel::CrraMoney { eta } => crra(eta, b.money),
    }
}

// Outside its domain CRRA utility is -inf so that root brackets stay ordered.
fn crra(eta: f64, m: f64) -> f64 {
    if m > 0.0 {
        m.powf(1.0 - eta) / (1.0 - eta)
    } else if m == 0.0 && eta < 1.0 {
        0.0
    } else {
        f64::NEG_INFINITY
    }
}

pub fn expected_utility(model: &UtilityModel, lottery: &Lottery) -> f64 {
    expectation(lottery, |b| utility(model, b))
}

fn expectation<F: Fn(Bundle) -> f64>(lottery: &Lottery, u: F) -> f64 {
    lottery
        .outcomes
        .iter()
        .map(|&(b, p)| if p == 0.0 { 0.0 } else { p * u(b) })
        .sum()
}

// Utility minus a model constant. Root solves run on this so that CARA
// utility keeps full relative precision where it saturates near 1/rho.
pub(crate) fn solver_utility(model: &UtilityModel, b: Bundle) -> f64 {
    match *model {
        UtilityModel::CaraMoneyPowerCost { rho, alpha, gamma } => {
            -(-rho * b.money).exp() / rho - power_cost(alpha, gamma, b.tasks)
        }
        _ => utility(model, b),
    }
}

/// Payment M such that (b with M taken away) is indifferent to the zero bundle.
pub fn money_metric(model: &UtilityModel, b: Bundle) -> Result<f64, PrefsError> {
    let target = solver_utility(model, Bundle::ZERO);
    // u(b.tasks, b.money − M) is decreasing in M; solve over the retained money.
    let kept = solve_increasing(
        |m| solver_utility(model, Bundle::new(b.tasks, m)),
        target,
        0.0,
        "money metric",
    )?;
    Ok(b.money - kept)
}

/// Sure money amount that, added to `wealth`, matches the expected utility of
/// the lottery shifted by `wealth`.
pub fn certainty_equivalent(
    model: &UtilityModel,
    lottery: &Lottery,
    wealth: f64,
) -> Result<f64, PrefsError> {
    let target = expectation(&lottery.shifted(wealth), |b| solver_utility(model, b));
    let level = solve_increasing(
        |m| solver_utility(model, Bundle::money(m)),
        target,
        wealth + lottery.expected_money(),
        "certainty equivalent",
    )?;
    Ok(level - wealth)
}

/// Solves f(x) = target for f increasing. The bracket starts at
/// `start ± 1` and doubles outward until it straddles the root.
pub(crate) fn solve_increasing<F>(
    f: F,
    target: f64,
    start: f64,
    context: &str,
) -> Result<f64, PrefsError>
where
    F: Fn(f64) -> f64,
{
    if !target.is_finite() {
        return Err(PrefsError::NonMonotoneModel(format!(
            "{context}: target utility is not finite"
        )));
    }
    let g = |x: f64| f(x) - target;
    let fail = || PrefsError::NonMonotoneModel(context.to_string());

    let mut step = 1.0;
    let mut lo = start - step;
    let mut glo = g(lo);
    let mut doublings = 0;
    while glo.is_nan() || glo > 0.0 {
        if doublings == MAX_BRACKET_DOUBLINGS || glo.is_nan() {
            return Err(fail());
        }
        step *= 2.0;
        lo = start - step;
        glo = g(lo);
        doublings += 1;
    }
    step = 1.0;
    let mut hi = start + step;
    let mut ghi = g(hi);
    doublings = 0;
    while ghi.is_nan() || ghi < 0.0 {
        if doublings == MAX_BRACKET_DOUBLINGS || ghi.is_nan() {
            return Err(fail());
        }
        step *= 2.0;
        hi = start + step;
        ghi = g(hi);
        doublings += 1;
    }
    Ok(bisect(g, lo, hi))
}

/// Bisection to full double precision on a bracket with g(lo) ≤ 0 ≤ g(hi).
pub(crate) fn bisect<G: Fn(f64) -> f64>(g: G, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..2100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
