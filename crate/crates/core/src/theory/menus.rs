//! Separate versus aggregate choice over pairs of menus.

use rand::Rng;

use super::report::{Family, ViolationReport};
use super::{TheoryError, PROPOSITION_TOLERANCE, TIE_TOLERANCE};
use crate::par::{self, Execution};
use crate::prefs::{money_metric, Bundle, UtilityModel};
use crate::rng::{stream, StreamDomain};

/// Largest menu accepted, so an aggregate menu has at most 256 options.
pub const MAX_MENU: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct Menu(Vec<Bundle>);

impl Menu {
    pub fn new(options: Vec<Bundle>) -> Result<Self, TheoryError> {
        if options.is_empty() || options.len() > MAX_MENU {
            return Err(TheoryError::InvalidMenu {
                got: options.len(),
                max: MAX_MENU,
            });
        }
        Ok(Self(options))
    }

    pub fn options(&self) -> &[Bundle] {
        &self.0
    }

    pub fn contains(&self, b: &Bundle, tol: f64) -> bool {
        self.0.iter().any(|o| o.approx_eq(b, tol))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MenuPair {
    pub menu_x: Menu,
    pub menu_y: Menu,
}

/// Picks one option from a list.
pub trait DecisionRule: Sync {
    fn choose(&self, options: &[Bundle], context: &str) -> Result<usize, TheoryError>;
}

/// Chooses the option with the highest money metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximizer {
    pub model: UtilityModel,
}

impl Maximizer {
    pub fn new(model: UtilityModel) -> Self {
        Self { model }
    }
}

impl DecisionRule for Maximizer {
    fn choose(&self, options: &[Bundle], context: &str) -> Result<usize, TheoryError> {
        let values = options
            .iter()
            .map(|&b| money_metric(&self.model, b))
            .collect::<Result<Vec<f64>, _>>()?;
        let best = (0..values.len())
            .max_by(|&a, &b| values[a].total_cmp(&values[b]))
            .ok_or(TheoryError::InvalidMenu { got: 0, max: MAX_MENU })?;
        let top = values[best];
        let ties = values
            .iter()
            .filter(|&&v| (v - top).abs() <= TIE_TOLERANCE * (1.0 + top.abs()))
            .count();
        if ties > 1 {
            return Err(TheoryError::TieDetected {
                context: context.to_string(),
            });
        }
        Ok(best)
    }
}

/// Choices on one menu pair: F and S from each menu alone, and the
/// decomposition and total of the choice from the aggregate menu X + Y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChoiceTrace {
    pub f_sep: Bundle,
    pub s_sep: Bundle,
    pub f_agg: Bundle,
    pub s_agg: Bundle,
    pub o_agg: Bundle,
}

impl ChoiceTrace {
    pub fn o_sep(&self) -> Bundle {
        self.f_sep + self.s_sep
    }
}

pub fn choice_trace<R: DecisionRule + ?Sized>(rule: &R, pair: &MenuPair, index: usize) -> Result<ChoiceTrace, TheoryError> {
    let xs = pair.menu_x.options();
    let ys = pair.menu_y.options();
    let f_sep = xs[rule.choose(xs, &format!("menu X of pair {index}"))?];
    let s_sep = ys[rule.choose(ys, &format!("menu Y of pair {index}"))?];
    let sums: Vec<Bundle> = xs.iter().flat_map(|&x| ys.iter().map(move |&y| x + y)).collect();
    let k = rule.choose(&sums, &format!("aggregate menu of pair {index}"))?;
    let (f_agg, s_agg) = (xs[k / ys.len()], ys[k % ys.len()]);
    Ok(ChoiceTrace {
        f_sep,
        s_sep,
        f_agg,
        s_agg,
        o_agg: sums[k],
    })
}

/// Every equality among F_A = C(X), S_A = C(Y), O_S = O_A, and F_A across
/// pairs sharing X, that fails on the battery.
pub fn unidentifiability_probe<R: DecisionRule + ?Sized>(
    rule: &R,
    pairs: &[MenuPair],
) -> Result<ViolationReport, TheoryError> {
    let traces = par::map_range(Execution::Parallel, pairs.len(), |i| choice_trace(rule, &pairs[i], i))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let tol = PROPOSITION_TOLERANCE;
    let mut report = ViolationReport::default();
    for (i, t) in traces.iter().enumerate() {
        report.push_if(Family::FirstChoice, vec![i], t.f_agg, t.f_sep, tol);
        report.push_if(Family::SecondChoice, vec![i], t.s_agg, t.s_sep, tol);
        report.push_if(Family::Overall, vec![i], t.o_sep(), t.o_agg, tol);
    }
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            if pairs[i].menu_x == pairs[j].menu_x {
                report.push_if(
                    Family::FirstChoiceAcrossPartners,
                    vec![i, j],
                    traces[i].f_agg,
                    traces[j].f_agg,
                    tol,
                );
            }
        }
    }
    Ok(report)
}

/// M(a + b) − M(a) − M(b).
pub fn additivity_pair_residual(model: &UtilityModel, a: Bundle, b: Bundle) -> Result<f64, TheoryError> {
    Ok(money_metric(model, a + b)? - money_metric(model, a)? - money_metric(model, b)?)
}

/// Largest |M(a + b) − M(a) − M(b)| over pairs drawn from `grid`.
pub fn additivity_residual(model: &UtilityModel, grid: &[Bundle]) -> Result<f64, TheoryError> {
    let metric = grid
        .iter()
        .map(|&b| money_metric(model, b))
        .collect::<Result<Vec<f64>, _>>()?;
    let mut worst: f64 = 0.0;
    for i in 0..grid.len() {
        for j in i..grid.len() {
            let joint = money_metric(model, grid[i] + grid[j])?;
            worst = worst.max((joint - metric[i] - metric[j]).abs());
        }
    }
    Ok(worst)
}

/// Largest additivity gap over the (x, y) combinations a battery offers.
pub fn menu_additivity_residual(model: &UtilityModel, pairs: &[MenuPair]) -> Result<f64, TheoryError> {
    let mut worst: f64 = 0.0;
    for p in pairs {
        for &x in p.menu_x.options() {
            for &y in p.menu_y.options() {
                worst = worst.max(additivity_pair_residual(model, x, y)?.abs());
            }
        }
    }
    Ok(worst)
}

/// Menus X = {0, A'} and Y = {0, B'} where A' and B' are A and B with money
/// adjusted to fix their money metrics.
///
/// When M(A + B) > M(A) + M(B) both are priced at −ε/2: each is refused
/// alone, yet the aggregate takes both once the residual exceeds ε. When
/// M(A + B) < M(A) + M(B) they are priced at ε and ε/2: each is taken alone,
/// yet the aggregate takes A' only once the residual is below −ε/2. The
/// unequal prices keep the aggregate maximizer unique when A = B.
pub fn epsilon_menus(model: &UtilityModel, a: Bundle, b: Bundle, eps: f64) -> Result<MenuPair, TheoryError> {
    let r = additivity_pair_residual(model, a, b)?;
    let (ta, tb) = if r >= 0.0 { (-eps / 2.0, -eps / 2.0) } else { (eps, eps / 2.0) };
    let priced = |bundle: Bundle, target: f64| -> Result<Bundle, TheoryError> {
        Ok(bundle.plus_money(target - money_metric(model, bundle)?))
    };
    Ok(MenuPair {
        menu_x: Menu::new(vec![Bundle::ZERO, priced(a, ta)?])?,
        menu_y: Menu::new(vec![Bundle::ZERO, priced(b, tb)?])?,
    })
}

/// Seeded battery of menu pairs with 2 to `max_size` options each, tasks in
/// 0..=20 and money in [0, 3).
pub fn random_menu_pairs(seed: u64, count: usize, max_size: usize) -> Vec<MenuPair> {
    let max_size = max_size.clamp(2, MAX_MENU);
    (0..count)
        .map(|i| {
            let mut rng = stream(seed, StreamDomain::Replication, i as u64);
            let menu = |rng: &mut rand_chacha::ChaCha8Rng| {
                let n = rng.random_range(2..=max_size);
                Menu((0..n)
                    .map(|_| Bundle::new(rng.random_range(0..=20), rng.random_range(0.0..3.0)))
                    .collect())
            };
            MenuPair {
                menu_x: menu(&mut rng),
                menu_y: menu(&mut rng),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const QL2: UtilityModel = UtilityModel::QuasiLinearPowerCost { alpha: 0.004, gamma: 2.0 };
    const QL1: UtilityModel = UtilityModel::QuasiLinearPowerCost { alpha: 0.004, gamma: 1.0 };
    const LINEAR: UtilityModel = UtilityModel::LinearMetric {
        lambda_tasks: -0.05,
        lambda_money: 1.0,
    };
    const A: Bundle = Bundle::new(15, 0.0);

    fn grid5() -> Vec<Bundle> {
        let mut g = Vec::new();
        for t in [0, 5, 10, 15, 20] {
            for m in [0.0, 0.5, 1.0, 2.0, 4.0] {
                g.push(Bundle::new(t, m));
            }
        }
        g
    }

    #[test]
    fn additivity_examples() {
        assert!(additivity_residual(&LINEAR, &grid5()).unwrap() < 1e-9);
        assert!(additivity_residual(&QL1, &grid5()).unwrap() < 1e-9);
        let r = additivity_pair_residual(&QL2, A, A).unwrap();
        assert!((r + 1.8).abs() < 1e-9, "{r}");
        assert!((additivity_residual(&QL2, &[A]).unwrap() - 1.8).abs() < 1e-9);
    }

    #[test]
    fn additive_model_never_violates() {
        let battery = random_menu_pairs(3, 60, 6);
        let report = unidentifiability_probe(&Maximizer::new(LINEAR), &battery).unwrap();
        assert!(report.is_empty(), "{}", report.to_text());
    }

    #[test]
    fn epsilon_menus_expose_convex_cost() {
        let pair = epsilon_menus(&QL2, A, A, 0.5).unwrap();
        let t = choice_trace(&Maximizer::new(QL2), &pair, 0).unwrap();
        // both accepted alone, only the richer one in the aggregate
        assert_eq!(t.f_sep.tasks, 15);
        assert_eq!(t.s_sep.tasks, 15);
        assert_eq!(t.o_agg.tasks, 15);
        let report = unidentifiability_probe(&Maximizer::new(QL2), &[pair]).unwrap();
        assert_eq!(report.count(Family::Overall), 1);
        assert_eq!(report.count(Family::SecondChoice), 1);
        assert_eq!(report.count(Family::FirstChoice), 0);
    }

    #[test]
    fn epsilon_menus_on_additive_model_agree() {
        let pair = epsilon_menus(&QL1, A, Bundle::new(10, 0.0), 0.5).unwrap();
        assert!(unidentifiability_probe(&Maximizer::new(QL1), &[pair]).unwrap().is_empty());
    }

    #[test]
    fn first_choice_compared_across_partners() {
        // X is shared, Y differs: for an additive rule F_A cannot move
        let x = Menu::new(vec![Bundle::ZERO, Bundle::new(10, 0.45)]).unwrap();
        let pairs = vec![
            MenuPair {
                menu_x: x.clone(),
                menu_y: Menu::new(vec![Bundle::money(0.1)]).unwrap(),
            },
            MenuPair {
                menu_x: x,
                menu_y: Menu::new(vec![Bundle::new(20, 0.7), Bundle::ZERO]).unwrap(),
            },
        ];
        assert!(unidentifiability_probe(&Maximizer::new(LINEAR), &pairs).unwrap().is_empty());
    }

    #[test]
    fn ties_are_rejected() {
        let m = Menu::new(vec![Bundle::ZERO, Bundle::ZERO]).unwrap();
        let pair = MenuPair {
            menu_x: m.clone(),
            menu_y: m,
        };
        assert!(matches!(
            unidentifiability_probe(&Maximizer::new(LINEAR), &[pair]),
            Err(TheoryError::TieDetected { .. })
        ));
    }

    #[test]
    fn menu_size_limits() {
        assert!(Menu::new(vec![]).is_err());
        assert!(Menu::new(vec![Bundle::ZERO; 17]).is_err());
        assert!(Menu::new(vec![Bundle::ZERO; 16]).is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn epsilon_construction_finds_violation(
                alpha in 0.001f64..0.01,
                gamma in 1.2f64..3.0,
                ta in 1u32..30,
                tb in 1u32..30,
                eps in 0.01f64..1.0,
            ) {
                let model = UtilityModel::QuasiLinearPowerCost { alpha, gamma };
                let (a, b) = (Bundle::new(ta, 0.0), Bundle::new(tb, 0.0));
                let r = additivity_pair_residual(&model, a, b).unwrap();
                prop_assume!(r.abs() > eps);
                let pair = epsilon_menus(&model, a, b, eps).unwrap();
                let report = unidentifiability_probe(&Maximizer::new(model), &[pair]).unwrap();
                prop_assert!(report.count(Family::Overall) == 1);
            }

            #[test]
            fn aggregate_total_is_sum_of_parts(seed in 0u64..1000) {
                for (i, p) in random_menu_pairs(seed, 4, 5).iter().enumerate() {
                    let t = choice_trace(&Maximizer::new(QL2), p, i).unwrap();
                    prop_assert_eq!(t.o_agg, t.f_agg + t.s_agg);
                }
            }

            #[test]
            fn additive_models_give_empty_reports(seed in 0u64..1000, slope in -0.2f64..0.0) {
                let model = UtilityModel::LinearMetric { lambda_tasks: slope, lambda_money: 1.0 };
                let battery = random_menu_pairs(seed, 8, 5);
                prop_assert!(menu_additivity_residual(&model, &battery).unwrap() < 1e-9);
                prop_assert!(unidentifiability_probe(&Maximizer::new(model), &battery).unwrap().is_empty());
            }
        }
    }
}
