//! Classification measures against brute-force recomputation.

#[path = "support/brute_measures.rs"]
mod brute_measures;

use brute_measures::TOL;
use metriscope_core::learner::{auprc, confidence_interval, random_baseline_f1, vd_s};

#[test]
fn measures_match_brute_force() {
    brute_measures::compare_random_sets(200, 7).unwrap();
}

#[test]
fn degenerate_scorer_misses_everything_under_budget() {
    let labels: Vec<u8> = (0..100).map(|i| u8::from(i % 5 == 0)).collect();
    let scores = vec![0.3; 100];
    assert_eq!(vd_s(&scores, &labels, 0.0005).unwrap(), 100.0);
    assert!((auprc(&scores, &labels).unwrap() - 20.0).abs() < TOL);
}

#[test]
fn perfect_ranking_has_full_area() {
    let labels = [1, 1, 0, 1, 0, 0];
    let scores = [0.9, 0.8, 0.1, 0.7, 0.2, 0.0];
    assert_eq!(auprc(&scores, &labels).unwrap(), 100.0);
    assert_eq!(vd_s(&scores, &labels, 0.0).unwrap(), 0.0);
}

#[test]
fn student_t_interval_matches_tables() {
    // t(0.95, 4) = 2.131847; sample sd of 1..5 is sqrt(2.5).
    let ci = confidence_interval(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.9).unwrap();
    assert!((ci - 2.131_847 * (2.5f64 / 5.0).sqrt()).abs() < 1e-5);
    // t(0.975, 9) = 2.262157.
    let v: Vec<f64> = (0..10).map(f64::from).collect();
    let sd = (v.iter().map(|x| (x - 4.5).powi(2)).sum::<f64>() / 9.0).sqrt();
    let ci = confidence_interval(&v, 0.95).unwrap();
    assert!((ci - 2.262_157 * sd / 10f64.sqrt()).abs() < 1e-5);
}

#[test]
fn random_baseline_is_half_recall_at_prevalence_precision() {
    for p in [0.01, 0.0442 / 2.0, 0.1, 0.5] {
        let (precision, recall) = (p, 0.5);
        let f1 = 100.0 * 2.0 * precision * recall / (precision + recall);
        assert!((random_baseline_f1(p) - f1).abs() < TOL);
    }
}
