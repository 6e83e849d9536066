use bracketlab_core::estimators::{nls_kappa, summarize_means, tobit_design, tobit_right};
use bracketlab_core::experiment::{
    read_csv, simulate_dataset, to_csv_string, Composition, PopulationSpec, TreatmentCounts, CENSOR_CODE,
};
use bracketlab_core::{Scenario, Treatment};

fn calibrated(seed: u64, n: usize) -> PopulationSpec {
    let mut spec = PopulationSpec {
        counts: TreatmentCounts::uniform(&[Treatment::Broad, Treatment::Narrow, Treatment::Low, Treatment::Partial], n),
        composition: Composition::NarrowShare(0.7),
        tremble: 0.005,
        seed,
        ..PopulationSpec::default()
    };
    spec.cost_scale.log_mean = -5.7;
    spec.cost_scale.log_sd = 0.4;
    spec.convexity.sd = 0.15;
    spec
}

#[test]
fn calibrated_broad_cell_has_the_published_shape() {
    let d = simulate_dataset(&calibrated(3, 3000)).unwrap();
    let cells = summarize_means(&d, true);
    let broad = cells
        .iter()
        .find(|c| c.treatment == Treatment::Broad && c.scenario == Scenario::S1)
        .unwrap();
    // Published: mean 2.88, sd 1.24, 24% at the upper bound.
    assert!((broad.mean - 2.88).abs() < 0.2, "{broad:?}");
    assert!((broad.sd - 1.24).abs() < 0.15, "{broad:?}");
    assert!((broad.share_upper - 0.24).abs() < 0.06, "{broad:?}");
}

#[test]
fn simulate_then_recover_mixture_share() {
    let mut spec = calibrated(11, 800);
    spec.tremble = 0.0;
    let d = simulate_dataset(&spec).unwrap();
    let fit = nls_kappa(&d, Treatment::Broad, Treatment::Low, Treatment::Narrow).unwrap();
    assert!((fit.kappa.value - 0.7).abs() < 3.0 * fit.kappa.robust_se, "{:?}", fit.kappa);
}

#[test]
fn tobit_picks_up_tediousness_on_simulated_data() {
    let mut spec = calibrated(5, 600);
    spec.cost_scale.tediousness_slope = 0.25;
    let d = simulate_dataset(&spec).unwrap();
    let design = tobit_design(&d, Treatment::Narrow, true);
    let fit = tobit_right(&design.y, &design.x, CENSOR_CODE).unwrap();
    let t = design.names.iter().position(|&n| n == "Tediousness").unwrap();
    let c = &fit.coefficients[t];
    assert!(c.value > 2.0 * c.se, "{c:?}");
    let s2 = &fit.coefficients[design.names.iter().position(|&n| n == "Scenario 2").unwrap()];
    assert!(s2.value > 0.0, "{s2:?}");
}

#[test]
fn dataset_survives_the_csv_round_trip() {
    let d = simulate_dataset(&calibrated(9, 40)).unwrap();
    let text = to_csv_string(&d);
    let back = read_csv(text.as_bytes()).unwrap();
    assert_eq!(back.records, d.records);
    assert_eq!(to_csv_string(&back), text);
}
