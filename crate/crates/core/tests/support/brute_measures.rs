//! Brute-force recomputation of the classification measures.

use metriscope_core::learner::{auprc, classification_scores, tune_threshold, vd_s};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TOL: f64 = 1e-9;

/// Scores on a coarse grid so that ties are frequent.
pub fn random_case(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<u8>) {
    let n = rng.random_range(2..=1000);
    let grid = rng.random_range(2..50) as f64;
    let prevalence = rng.random_range(0.01..0.6);
    let mut labels: Vec<u8> = (0..n)
        .map(|_| u8::from(rng.random_bool(prevalence)))
        .collect();
    labels[0] = 1;
    let signal = rng.random_range(0.0..1.0);
    let scores = labels
        .iter()
        .map(|&l| {
            let s: f64 = rng.random_range(0.0..1.0) + signal * f64::from(l);
            (s / (1.0 + signal) * grid).round() / grid
        })
        .collect();
    (scores, labels)
}

pub struct Counts {
    tp: f64,
    fp: f64,
    tn: f64,
    fn_: f64,
}

pub fn counts(scores: &[f64], labels: &[u8], t: f64) -> Counts {
    let flagged = |i: usize| scores[i] >= t;
    let pos = |i: usize| labels[i] == 1;
    let n = scores.len();
    let c = |f: &dyn Fn(usize) -> bool| (0..n).filter(|&i| f(i)).count() as f64;
    Counts {
        tp: c(&|i| flagged(i) && pos(i)),
        fp: c(&|i| flagged(i) && !pos(i)),
        tn: c(&|i| !flagged(i) && !pos(i)),
        fn_: c(&|i| !flagged(i) && pos(i)),
    }
}

pub fn f1_from(c: &Counts) -> f64 {
    let precision = if c.tp + c.fp > 0.0 {
        c.tp / (c.tp + c.fp)
    } else {
        0.0
    };
    let recall = if c.tp + c.fn_ > 0.0 {
        c.tp / (c.tp + c.fn_)
    } else {
        0.0
    };
    if precision + recall == 0.0 {
        0.0
    } else {
        100.0 * 2.0 * precision * recall / (precision + recall)
    }
}

pub fn distinct_descending(scores: &[f64]) -> Vec<f64> {
    let mut t = scores.to_vec();
    t.sort_by(|a, b| b.total_cmp(a));
    t.dedup();
    t
}

/// Average precision: recall gained at each distinct threshold times the
/// precision there.
pub fn brute_auprc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut prev_recall = 0.0;
    let mut area = 0.0;
    for t in distinct_descending(scores) {
        let c = counts(scores, labels, t);
        let recall = c.tp / (c.tp + c.fn_);
        area += (recall - prev_recall) * c.tp / (c.tp + c.fp);
        prev_recall = recall;
    }
    100.0 * area
}

pub fn brute_vd_s(scores: &[f64], labels: &[u8], budget: f64) -> f64 {
    let mut thresholds = distinct_descending(scores);
    thresholds.push(f64::INFINITY);
    thresholds
        .into_iter()
        .filter_map(|t| {
            let c = counts(scores, labels, t);
            let fpr = if c.fp + c.tn > 0.0 {
                c.fp / (c.fp + c.tn)
            } else {
                0.0
            };
            (fpr <= budget).then(|| 100.0 * c.fn_ / (c.tp + c.fn_))
        })
        .fold(f64::INFINITY, f64::min)
}

fn check(ok: bool, what: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what)
    }
}

/// Compares every measure with its brute-force value on `sets` random
/// score/label sets.
pub fn compare_random_sets(sets: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..sets {
        let (scores, labels) = random_case(&mut rng);
        let t = scores[rng.random_range(0..scores.len())];
        let c = counts(&scores, &labels, t);
        let got = classification_scores(&scores, &labels, t).map_err(|e| e.to_string())?;

        check(
            (got.f1 - f1_from(&c)).abs() < TOL,
            format!("case {case} f1"),
        )?;

        let denom = (c.tp + c.fp) * (c.tp + c.fn_) * (c.tn + c.fp) * (c.tn + c.fn_);
        let mcc = if denom == 0.0 {
            0.0
        } else {
            100.0 * (c.tp * c.tn - c.fp * c.fn_) / denom.sqrt()
        };
        check((got.mcc - mcc).abs() < TOL, format!("case {case} mcc"))?;
        check(
            got.mcc_degenerate == (denom == 0.0),
            format!("case {case} degenerate flag"),
        )?;

        let tpr = c.tp / (c.tp + c.fn_);
        let bacc = if c.tn + c.fp > 0.0 {
            50.0 * (tpr + c.tn / (c.tn + c.fp))
        } else {
            100.0 * tpr
        };
        check((got.bacc - bacc).abs() < TOL, format!("case {case} bacc"))?;

        let ap = auprc(&scores, &labels).map_err(|e| e.to_string())?;
        check(
            (ap - brute_auprc(&scores, &labels)).abs() < TOL,
            format!("case {case} auprc"),
        )?;

        for budget in [0.0, 0.0005, 0.01, 0.1, 1.0] {
            let v = vd_s(&scores, &labels, budget).map_err(|e| e.to_string())?;
            check(
                (v - brute_vd_s(&scores, &labels, budget)).abs() < TOL,
                format!("case {case} vd-s"),
            )?;
        }

        let tuned = tune_threshold(&scores, &labels).map_err(|e| e.to_string())?;
        let tuned_f1 = f1_from(&counts(&scores, &labels, tuned));
        let best = distinct_descending(&scores)
            .into_iter()
            .chain([0.5])
            .map(|t| f1_from(&counts(&scores, &labels, t)))
            .fold(0.0, f64::max);
        check(
            (tuned_f1 - best).abs() < TOL,
            format!("case {case} threshold {tuned}"),
        )?;
    }
    Ok(())
}
