//! The verification battery run by `bracketlab verify`.

use super::lotteries::{cara_shift_invariance, mixture_linearity};
use super::menus::{
    additivity_pair_residual, additivity_residual, epsilon_menus, menu_additivity_residual, random_menu_pairs,
    unidentifiability_probe, Maximizer, Menu,
};
use super::report::Family;
use super::warp::{maximizer_choices, random_menus, warp_scan};
use super::{TheoryError, DEMONSTRATION_THRESHOLD};
use crate::prefs::{Bundle, Lottery, UtilityModel};

const EXACT: f64 = 1e-9;
const BATTERY_SEED: u64 = 17;
const WARP_SEED: u64 = 23;
/// 0.5·(−ln h) + ln(0.5 + 0.5·h) with h = (1 + e⁻¹)/2.
pub const CARA_MIXTURE_GAP: f64 = 0.017_931_685_763_731;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Additivity,
    Unidentifiability,
    Cara,
    Mixture,
    Warp,
    All,
}

impl Suite {
    pub const EACH: [Suite; 5] = [
        Suite::Additivity,
        Suite::Unidentifiability,
        Suite::Cara,
        Suite::Mixture,
        Suite::Warp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Additivity => "additivity",
            Suite::Unidentifiability => "unidentifiability",
            Suite::Cara => "cara",
            Suite::Mixture => "mixture",
            Suite::Warp => "warp",
            Suite::All => "all",
        }
    }

    pub fn from_name(s: &str) -> Option<Suite> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
    }
}

/// Whether a check demonstrates that a property holds or that it fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expectation {
    Holds,
    Violated,
}

impl Expectation {
    pub fn label(self) -> &'static str {
        match self {
            Expectation::Holds => "expect-pass",
            Expectation::Violated => "expect-fail",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZooEntry {
    pub name: &'static str,
    pub model: UtilityModel,
    pub expect_additive: bool,
}

pub fn model_zoo() -> Vec<ZooEntry> {
    vec![
        ZooEntry {
            name: "linear",
            model: UtilityModel::LinearMetric {
                lambda_tasks: -0.05,
                lambda_money: 1.0,
            },
            expect_additive: true,
        },
        ZooEntry {
            name: "power gamma=1",
            model: UtilityModel::QuasiLinearPowerCost { alpha: 0.05, gamma: 1.0 },
            expect_additive: true,
        },
        ZooEntry {
            name: "power gamma=2",
            model: UtilityModel::QuasiLinearPowerCost { alpha: 0.004, gamma: 2.0 },
            expect_additive: false,
        },
        ZooEntry {
            name: "cara-money",
            model: UtilityModel::CaraMoneyPowerCost {
                rho: 0.5,
                alpha: 0.004,
                gamma: 1.0,
            },
            expect_additive: false,
        },
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub suite: Suite,
    pub name: String,
    pub expectation: Expectation,
    pub measured: f64,
    /// The condition `measured` must meet, e.g. "< 1e-9".
    pub criterion: String,
    pub passed: bool,
    /// Error text when the check could not be evaluated.
    pub error: Option<String>,
}

struct Check {
    suite: Suite,
    name: String,
    expectation: Expectation,
    criterion: String,
}

impl Check {
    fn new(suite: Suite, name: impl Into<String>, expectation: Expectation, criterion: impl Into<String>) -> Self {
        Self {
            suite,
            name: name.into(),
            expectation,
            criterion: criterion.into(),
        }
    }

    fn eval(self, result: Result<f64, TheoryError>, pass: impl Fn(f64) -> bool) -> CheckOutcome {
        let (measured, passed, error) = match result {
            Ok(v) => (v, pass(v), None),
            Err(e) => (f64::NAN, false, Some(e.to_string())),
        };
        CheckOutcome {
            suite: self.suite,
            name: self.name,
            expectation: self.expectation,
            measured,
            criterion: self.criterion,
            passed,
            error,
        }
    }
}

/// Runs one suite, or every suite for [`Suite::All`], over `zoo`.
pub fn verify_suite(suite: Suite, zoo: &[ZooEntry]) -> Vec<CheckOutcome> {
    match suite {
        Suite::All => Suite::EACH.iter().flat_map(|&s| verify_suite(s, zoo)).collect(),
        Suite::Additivity => additivity(zoo),
        Suite::Unidentifiability => unidentifiability(zoo),
        Suite::Cara => cara(zoo),
        Suite::Mixture => mixture(zoo),
        Suite::Warp => warp(zoo),
    }
}

fn expectation(additive: bool) -> Expectation {
    if additive {
        Expectation::Holds
    } else {
        Expectation::Violated
    }
}

fn grid5() -> Vec<Bundle> {
    let mut g = Vec::with_capacity(25);
    for t in [0, 5, 10, 15, 20] {
        for m in [0.0, 0.5, 1.0, 2.0, 4.0] {
            g.push(Bundle::new(t, m));
        }
    }
    g
}

fn coin(a: f64, b: f64) -> Lottery {
    Lottery::money(&[(a, 0.5), (b, 0.5)]).expect("valid coin flip")
}

fn additivity(zoo: &[ZooEntry]) -> Vec<CheckOutcome> {
    let s = Suite::Additivity;
    let grid = grid5();
    let mut out: Vec<CheckOutcome> = zoo
        .iter()
        .map(|z| {
            let residual = additivity_residual(&z.model, &grid);
            if z.expect_additive {
                Check::new(s, format!("{} residual on 5x5 grid", z.name), Expectation::Holds, "< 1e-9")
                    .eval(residual, |v| v < EXACT)
            } else {
                Check::new(s, format!("{} residual on 5x5 grid", z.name), Expectation::Violated, ">= 1e-3")
                    .eval(residual, |v| v >= DEMONSTRATION_THRESHOLD)
            }
        })
        .collect();
    let ql2 = UtilityModel::QuasiLinearPowerCost { alpha: 0.004, gamma: 2.0 };
    let a = Bundle::new(15, 0.0);
    out.push(
        Check::new(s, "power gamma=2 pair (15,0)+(15,0)", Expectation::Violated, "= 1.8")
            .eval(additivity_pair_residual(&ql2, a, a).map(f64::abs), |v| (v - 1.8).abs() < EXACT),
    );
    out
}

fn unidentifiability(zoo: &[ZooEntry]) -> Vec<CheckOutcome> {
    let s = Suite::Unidentifiability;
    let (a, b) = (Bundle::new(15, 0.0), Bundle::new(10, 0.0));
    let mut out: Vec<CheckOutcome> = zoo
        .iter()
        .map(|z| {
            let result = (|| {
                let mut battery = random_menu_pairs(BATTERY_SEED, 20, 4);
                let r = additivity_pair_residual(&z.model, a, b)?;
                if r.abs() > EXACT {
                    battery.push(epsilon_menus(&z.model, a, b, r.abs() / 2.0)?);
                }
                let report = unidentifiability_probe(&Maximizer::new(z.model), &battery)?;
                let residual = menu_additivity_residual(&z.model, &battery)?;
                // empty exactly when the battery sees no additivity gap
                let consistent = report.is_empty() == (residual < EXACT);
                Ok((report.len() as f64, consistent))
            })();
            let criterion = if z.expect_additive {
                "0 violations, residual < 1e-9"
            } else {
                "> 0 violations, residual >= 1e-9"
            };
            let consistent = matches!(result, Ok((_, true)));
            let additive = z.expect_additive;
            Check::new(s, format!("{} probe", z.name), expectation(additive), criterion)
                .eval(result.map(|r| r.0), move |n| consistent && ((n == 0.0) == additive))
        })
        .collect();
    let ql2 = UtilityModel::QuasiLinearPowerCost { alpha: 0.004, gamma: 2.0 };
    let aa = Bundle::new(15, 0.0);
    let result = epsilon_menus(&ql2, aa, aa, 0.5)
        .and_then(|pair| unidentifiability_probe(&Maximizer::new(ql2), &[pair]))
        .map(|r| r.count(Family::Overall) as f64);
    out.push(
        Check::new(s, "power gamma=2 epsilon menus, eps=0.5", Expectation::Violated, "O_S != O_A reported")
            .eval(result, |n| n >= 1.0),
    );
    out
}

fn cara(zoo: &[ZooEntry]) -> Vec<CheckOutcome> {
    let s = Suite::Cara;
    let mut out = Vec::new();
    for rho in [0.1, 0.5, 1.0, 2.0] {
        let model = UtilityModel::CaraMoneyPowerCost { rho, alpha: 0.0, gamma: 1.0 };
        out.push(
            Check::new(s, format!("CARA rho={rho} coin {{0,1}}, w in {{0,1,10}}"), Expectation::Holds, "< 1e-9")
                .eval(cara_shift_invariance(&model, &coin(0.0, 1.0), &[0.0, 1.0, 10.0]), |v| v < EXACT),
        );
    }
    for eta in [0.5, 2.0, 3.0] {
        let model = UtilityModel::CrraMoney { eta };
        out.push(
            Check::new(s, format!("CRRA eta={eta} coin {{1,2}}, w in {{1,10}}"), Expectation::Violated, "> 1e-3")
                .eval(cara_shift_invariance(&model, &coin(1.0, 2.0), &[1.0, 10.0]), |v| {
                    v > DEMONSTRATION_THRESHOLD
                }),
        );
    }
    let sure = Lottery::degenerate(Bundle::money(0.7));
    for z in zoo {
        out.push(
            Check::new(s, format!("{} sure $0.70", z.name), Expectation::Holds, "< 1e-9")
                .eval(cara_shift_invariance(&z.model, &sure, &[1.0, 3.0, 10.0]), |v| v < EXACT),
        );
    }
    out
}

fn mixture(zoo: &[ZooEntry]) -> Vec<CheckOutcome> {
    let s = Suite::Mixture;
    let neutral = UtilityModel::LinearMetric {
        lambda_tasks: 0.0,
        lambda_money: 1.0,
    };
    let grid: Vec<f64> = (1..=9).map(|i| f64::from(i) / 10.0).collect();
    let mut out = vec![
        Check::new(s, "risk-neutral coin {0,1}, p = 0.1..0.9", Expectation::Holds, "< 1e-9")
            .eval(mixture_linearity(&neutral, &coin(0.0, 1.0), &grid), |v| v < EXACT),
        Check::new(s, "CARA rho=1 coin {0,1}, p = 0.5", Expectation::Violated, "0.017932 +/- 1e-6")
            .eval(
                mixture_linearity(
                    &UtilityModel::CaraMoneyPowerCost {
                        rho: 1.0,
                        alpha: 0.0,
                        gamma: 1.0,
                    },
                    &coin(0.0, 1.0),
                    &[0.5],
                ),
                |v| (v - CARA_MIXTURE_GAP).abs() < 1e-6 && v > DEMONSTRATION_THRESHOLD,
            ),
    ];
    for z in zoo {
        out.push(
            Check::new(s, format!("{} p = 1", z.name), Expectation::Holds, "< 1e-12")
                .eval(mixture_linearity(&z.model, &coin(0.0, 1.0), &[1.0]), |v| v < 1e-12),
        );
    }
    out
}

fn warp(zoo: &[ZooEntry]) -> Vec<CheckOutcome> {
    let s = Suite::Warp;
    let menus = random_menus(WARP_SEED, 100);
    let mut out: Vec<CheckOutcome> = zoo
        .iter()
        .map(|z| {
            let result = maximizer_choices(&Maximizer::new(z.model), &menus)
                .and_then(|c| warp_scan(&c, EXACT))
                .map(|r| r.len() as f64);
            Check::new(s, format!("{} maximizer, 100 menus", z.name), Expectation::Holds, "0 violations")
                .eval(result, |n| n == 0.0)
        })
        .collect();
    let (x, y, w) = (Bundle::new(0, 1.0), Bundle::new(5, 2.0), Bundle::new(10, 0.5));
    let result = (|| {
        let choices = vec![(Menu::new(vec![x, y])?, x), (Menu::new(vec![x, y, w])?, y)];
        Ok(warp_scan(&choices, EXACT)?.len() as f64)
    })();
    out.push(
        Check::new(s, "{a,b}->a with {a,b,c}->b", Expectation::Violated, "1 violation").eval(result, |n| n == 1.0),
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_zoo_passes_everything() {
        let outcomes = verify_suite(Suite::All, &model_zoo());
        for o in &outcomes {
            assert!(o.passed, "{} / {}: {} ({:?})", o.suite.name(), o.name, o.measured, o.error);
        }
        assert!(outcomes.iter().any(|o| o.expectation == Expectation::Violated));
        for suite in Suite::EACH {
            assert!(outcomes.iter().any(|o| o.suite == suite));
        }
    }

    #[test]
    fn mislabelled_model_fails() {
        let mut zoo = model_zoo();
        zoo[2].expect_additive = true;
        let outcomes = verify_suite(Suite::Additivity, &zoo);
        assert!(outcomes.iter().any(|o| !o.passed));
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::EACH.into_iter().chain([Suite::All]) {
            assert_eq!(Suite::from_name(s.name()), Some(s));
        }
        assert_eq!(Suite::from_name("nope"), None);
    }
}
