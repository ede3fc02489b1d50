use std::collections::BTreeMap;

use dcm_core::exact::{int, ratio, to_fixed};
use dcm_core::io::export::{parse_results_json, results_csv, results_json, sweep_ship_csv, ExportProvenance};
use dcm_core::io::fixtures;
use dcm_core::io::lists::map_fleet;
use dcm_core::risk::{classify_batch, Category, MissingDataPolicy};
use dcm_core::robustness::{compare_to_baseline, sweep, ScenarioGrid};
use dcm_core::Execution;

fn categories(outcome: &dcm_core::risk::BatchOutcome) -> BTreeMap<String, Category> {
    outcome.results.iter().map(|r| (r.ship.clone(), r.category)).collect()
}

#[test]
fn session_derives_exact_weights() {
    let session = fixtures::reference_session();
    let derived = session.derive().unwrap();
    assert_eq!(derived.z, ratio(17, 4));
    assert_eq!(derived.weights.alpha_w, ratio(13, 80));
    let raw = &derived.weights.raw;
    assert_eq!(raw["g1"], ratio(23, 10));
    assert_eq!(raw["g3"], int(1));
    assert_eq!(raw["g5"], ratio(55, 16));
    let shown: Vec<String> = ["g1", "g2", "g3", "g4", "g5", "g6", "g8"]
        .iter()
        .map(|c| to_fixed(&derived.weights.normalized[*c], 2))
        .collect();
    assert_eq!(shown, ["0.13", "0.25", "0.06", "0.08", "0.20", "0.11", "0.17"]);
}

#[test]
fn sample_fleet_sorts_into_two_seven_one() {
    let session = fixtures::reference_session();
    let model = session.model(&session.derive().unwrap()).unwrap();
    let fleet = fixtures::sample_performance_fleet();
    let outcome = classify_batch(&fleet, &model, &session.policy, Execution::Parallel).unwrap();
    assert!(outcome.is_complete());
    assert_eq!((outcome.counts.c1, outcome.counts.c2, outcome.counts.c3), (2, 7, 1));
    assert_eq!(categories(&outcome), fixtures::sample_baseline());
    let a6 = outcome.results.iter().find(|r| r.ship == "a6").unwrap();
    assert_eq!(to_fixed(&a6.total, 2), "38.73");
}

#[test]
fn raw_and_performance_fleets_agree() {
    let (mapped, _) = map_fleet(&fixtures::sample_raw_fleet(), &fixtures::sample_lists(), MissingDataPolicy::Strict).unwrap();
    assert_eq!(mapped, fixtures::sample_performance_fleet());
}

#[test]
fn hybrid_cutoff_promotes_a3_and_a5() {
    let session = fixtures::reference_session();
    let model = session.model(&session.derive().unwrap()).unwrap();
    let policy = session.policy.clone().with_lambda_12(Some(int(70)));
    let outcome = classify_batch(&fixtures::sample_performance_fleet(), &model, &policy, Execution::Sequential).unwrap();
    let c1: Vec<&str> = outcome
        .results
        .iter()
        .filter(|r| r.category == Category::C1)
        .map(|r| r.ship.as_str())
        .collect();
    assert_eq!(c1, ["a3", "a4", "a5", "a10"]);
    assert_eq!((outcome.counts.c1, outcome.counts.c2, outcome.counts.c3), (4, 5, 1));
}

#[test]
fn rounded_elicitation_matches_printed_totals() {
    let mut session = fixtures::reference_session();
    session.elicitation_rounding = Some(2);
    let derived = session.derive().unwrap();
    assert_eq!(derived.z, ratio(17, 4));
    let model = session.model(&derived).unwrap();
    let outcome = classify_batch(&fixtures::sample_performance_fleet(), &model, &session.policy, Execution::Parallel).unwrap();
    let totals: BTreeMap<&str, String> = outcome.results.iter().map(|r| (r.ship.as_str(), to_fixed(&r.total, 2))).collect();
    let expected = [
        ("a1", "65.75"),
        ("a2", "66.63"),
        ("a3", "74.09"),
        ("a4", "83.60"),
        ("a5", "74.24"),
        ("a6", "38.73"),
        ("a7", "59.59"),
        ("a8", "51.25"),
        ("a9", "62.53"),
        ("a10", "72.18"),
    ];
    for (ship, total) in expected {
        assert_eq!(totals[ship], total, "{ship}");
    }
}

#[test]
fn sweep_reproduces_a6_pattern_in_both_modes() {
    let session = fixtures::reference_session();
    let model = session.model(&session.derive().unwrap()).unwrap();
    let fleet = fixtures::sample_performance_fleet();
    let grid = ScenarioGrid::default_grid();
    let w = &session.weighting;
    let par = sweep(&fleet, &model, &w.ranking, &w.closeness, &grid, &session.policy, Execution::Parallel).unwrap();
    let seq = sweep(&fleet, &model, &w.ranking, &w.closeness, &grid, &session.policy, Execution::Sequential).unwrap();
    assert_eq!(par, seq);
    // First lambda at which a6 drops to C3, per z row.
    let first_c3: Vec<usize> = par
        .rows()
        .map(|row| row.iter().position(|c| c.category_of("a6") == Some(Category::C3)).unwrap())
        .collect();
    assert_eq!(first_c3, [6, 5, 4, 4, 3]);
    assert_eq!(to_fixed(&par.cell(0, 0).ships[5].total, 2), "40.27");
    assert_eq!(to_fixed(&par.cell(4, 0).ships[5].total, 2), "37.66");
    let comparison = compare_to_baseline(&par, &fixtures::sample_baseline()).unwrap();
    assert!(!comparison.is_stable());
    assert!(comparison.differences.iter().all(|d| d.ship == "a6"));
    let csv = sweep_ship_csv(&par, "a6", Some(Category::C3));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "z,35,36,37,38,39,40,41,42,43,44,45,baseline");
    assert_eq!(lines[1], "3.25,C2*,C2*,C2*,C2*,C2*,C2*,C3,C3,C3,C3,C3,C3");
    assert_eq!(lines[5], "5.25,C2*,C2*,C2*,C3,C3,C3,C3,C3,C3,C3,C3,C3");
}

#[test]
fn export_companion_reimports_exact_values() {
    let session = fixtures::reference_session();
    let model = session.model(&session.derive().unwrap()).unwrap();
    let outcome = classify_batch(&fixtures::sample_performance_fleet(), &model, &session.policy, Execution::Parallel).unwrap();
    let json = results_json(&outcome.results, &ExportProvenance::new(1));
    let back = parse_results_json(&json).unwrap();
    assert_eq!(back.results, outcome.results);
    let csv = results_csv(&outcome.results, &session.framework);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[1], "C1,a4,0.00,21.96,5.86,7.76,20.13,10.61,yes,17.28,yes,83.60");
    assert_eq!(lines[10], "C3,a6,0.00,0.88,2.20,7.76,0.00,10.61,yes,17.28,yes,38.73");
}
