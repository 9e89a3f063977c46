//! Cross-module checks: every estimator of the same quantity agrees with the
//! closed form and with each other.

use bayesbench_core::abc::{abc_model_choice, AbcReferenceTable, GenerativeModel, LocationAbcModel, MeanSummary};
use bayesbench_core::evidence::{bridge_bayes_factor, prior_mc_bayes_factor, BridgeOptions};
use bayesbench_core::laplace_normal::{
    exact_log_bayes_factor, hpd_region, laplace_posterior, log_unnormalized_posterior_laplace, normal_posterior,
    LocationModel, PriorSpec,
};
use bayesbench_core::mcmc::rwmh_run;
use bayesbench_core::numerics::RandomStream;

#[test]
fn three_evidence_routes_agree() {
    let prior = PriorSpec::new(2.0).unwrap();
    let mut rng = RandomStream::new(1, 0);
    let s = LocationModel::Laplace.simulate_sample(40, 0.3, &mut rng).unwrap();
    let exact = exact_log_bayes_factor(&s, &prior).unwrap();

    let mc = prior_mc_bayes_factor(&s, &prior, 200_000, &mut rng.substream(1)).unwrap();
    assert!((mc.log_bf - exact).abs() < 4.0 * mc.std_error, "{} ± {} vs {exact}", mc.log_bf, mc.std_error);

    let mix = laplace_posterior(&s, &prior).unwrap();
    let (bridge, state) = bridge_bayes_factor(
        &mix,
        normal_posterior(&s, &prior),
        &s,
        &prior,
        10_000,
        10_000,
        &mut rng.substream(2),
        &BridgeOptions::default(),
    )
    .unwrap();
    assert!((bridge.log_bf - exact).abs() < 0.05, "{} vs {exact}", bridge.log_bf);
    assert!(state.log_history().len() >= 2);
}

#[test]
fn rwmh_mass_inside_the_exact_hpd_region() {
    let prior = PriorSpec::default();
    let mut rng = RandomStream::new(2, 0);
    let s = LocationModel::Laplace.simulate_sample(60, -0.5, &mut rng).unwrap();
    let mix = laplace_posterior(&s, &prior).unwrap();
    let region = hpd_region(&mix, 0.9).unwrap();
    let trace = rwmh_run(|m| log_unnormalized_posterior_laplace(&s, &prior, m[0]), &[s.mean()], 0.3, 60_000, &mut rng)
        .unwrap();
    let kept: Vec<f64> = trace.column(0).into_iter().skip(2_000).collect();
    let inside = kept.iter().filter(|&&m| region.contains(m)).count() as f64 / kept.len() as f64;
    assert!((inside - 0.9).abs() < 0.03, "{inside}");
}

#[test]
fn model_choice_table_survives_a_csv_round_trip() {
    let prior = PriorSpec::default();
    let normal = LocationAbcModel { family: LocationModel::Normal, n: 20, prior };
    let laplace = LocationAbcModel { family: LocationModel::Laplace, n: 20, prior };
    let models: [(&dyn GenerativeModel, f64); 2] = [(&normal, 0.5), (&laplace, 0.5)];
    let obs = LocationModel::Normal.simulate(20, 0.0, &mut RandomStream::new(3, 0));
    let choice = abc_model_choice(&models, &obs, &MeanSummary, 5_000, 0.05, &RandomStream::new(3, 1)).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.csv");
    choice.table.write_csv(&path).unwrap();
    let back = AbcReferenceTable::read_csv(&path).unwrap();
    assert_eq!(back.len(), 5_000);
    assert_eq!(back.accepted_count(), choice.table.accepted_count());
    for i in (0..back.len()).step_by(97) {
        assert_eq!(back.model_index(i), choice.table.model_index(i));
        assert!((back.distance(i) - choice.table.distance(i)).abs() <= 1e-12 * choice.table.distance(i).max(1.0));
    }
    let (probs, _, _) = back.model_probabilities().unwrap();
    assert_eq!(probs, choice.probabilities);
    // the mean carries no information about the family
    assert!(probs[0] > 0.3 && probs[1] > 0.3, "{probs:?}");
}
