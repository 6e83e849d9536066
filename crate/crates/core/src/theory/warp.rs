use rand::seq::index::sample;
use rand::Rng;

use super::menus::{DecisionRule, Menu};
use super::report::{Family, ViolationReport};
use super::TheoryError;
use crate::prefs::Bundle;
use crate::rng::{stream, StreamDomain};

/// Every pair of observations where x was chosen with y available and
/// y (≠ x) was chosen with x available.
pub fn warp_scan(choices: &[(Menu, Bundle)], tolerance: f64) -> Result<ViolationReport, TheoryError> {
    for (index, (menu, chosen)) in choices.iter().enumerate() {
        if !menu.contains(chosen, tolerance) {
            return Err(TheoryError::ChosenNotInMenu { index });
        }
    }
    let mut report = ViolationReport::default();
    for i in 0..choices.len() {
        for j in i + 1..choices.len() {
            let (mi, x) = &choices[i];
            let (mj, y) = &choices[j];
            if x.distance(y) > tolerance && mi.contains(y, tolerance) && mj.contains(x, tolerance) {
                report.push_if(Family::Warp, vec![i, j], *x, *y, tolerance);
            }
        }
    }
    Ok(report)
}

/// `count` menus of 2 to 6 options drawn without replacement from a seeded
/// pool of 12 bundles.
pub fn random_menus(seed: u64, count: usize) -> Vec<Menu> {
    let mut pool_rng = stream(seed, StreamDomain::Replication, 0);
    let pool: Vec<Bundle> = (0..12)
        .map(|_| Bundle::new(pool_rng.random_range(0..=30), pool_rng.random_range(0.0..5.0)))
        .collect();
    (0..count)
        .map(|i| {
            let mut rng = stream(seed, StreamDomain::Replication, i as u64 + 1);
            let n = rng.random_range(2..=6);
            Menu::new(sample(&mut rng, pool.len(), n).into_iter().map(|k| pool[k]).collect())
                .expect("menu size within limits")
        })
        .collect()
}

pub fn maximizer_choices<R: DecisionRule + ?Sized>(rule: &R, menus: &[Menu]) -> Result<Vec<(Menu, Bundle)>, TheoryError> {
    menus
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let k = rule.choose(m.options(), &format!("menu {i}"))?;
            Ok((m.clone(), m.options()[k]))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prefs::UtilityModel;
    use crate::theory::Maximizer;

    fn menu(options: &[Bundle]) -> Menu {
        Menu::new(options.to_vec()).unwrap()
    }

    const A: Bundle = Bundle::new(0, 1.0);
    const B: Bundle = Bundle::new(5, 2.0);
    const C: Bundle = Bundle::new(10, 0.5);

    #[test]
    fn textbook_violation() {
        let choices = vec![(menu(&[A, B]), A), (menu(&[A, B, C]), B)];
        let r = warp_scan(&choices, 1e-9).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.entries[0].menus, vec![0, 1]);
    }

    #[test]
    fn single_menu_and_consistent_data() {
        assert!(warp_scan(&[(menu(&[A, B]), A)], 1e-9).unwrap().is_empty());
        let choices = vec![(menu(&[A, B]), A), (menu(&[A, C]), A), (menu(&[B, C]), C)];
        assert!(warp_scan(&choices, 1e-9).unwrap().is_empty());
    }

    #[test]
    fn chosen_must_be_offered() {
        let choices = vec![(menu(&[A, B]), A), (menu(&[A, B]), C)];
        assert_eq!(warp_scan(&choices, 1e-9), Err(TheoryError::ChosenNotInMenu { index: 1 }));
    }

    #[test]
    fn maximizers_satisfy_warp() {
        let rule = Maximizer::new(UtilityModel::QuasiLinearPowerCost { alpha: 0.004, gamma: 2.0 });
        let menus = random_menus(5, 50);
        assert_eq!(menus.len(), 50);
        let choices = maximizer_choices(&rule, &menus).unwrap();
        assert!(warp_scan(&choices, 1e-9).unwrap().is_empty());
    }
}
