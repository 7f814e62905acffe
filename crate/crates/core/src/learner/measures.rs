//! Classification measures, all reported in percent.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl Confusion {
    /// Counts at `threshold`; a score at or above it predicts positive.
    pub fn at(scores: &[f64], labels: &[u8], threshold: f64) -> Result<Self> {
        check_lengths(scores, labels)?;
        let mut c = Confusion::default();
        for (&s, &l) in scores.iter().zip(labels) {
            match (s >= threshold, l == 1) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        Ok(c)
    }

    pub fn f1(&self) -> f64 {
        let d = 2 * self.tp + self.fp + self.fn_;
        if d == 0 {
            0.0
        } else {
            100.0 * (2 * self.tp) as f64 / d as f64
        }
    }

    /// MCC and whether the denominator vanished (in which case it is 0).
    pub fn mcc(&self) -> (f64, bool) {
        let (tp, fp, tn, fn_) = (
            self.tp as f64,
            self.fp as f64,
            self.tn as f64,
            self.fn_ as f64,
        );
        let d = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
        if d == 0.0 {
            (0.0, true)
        } else {
            (100.0 * (tp * tn - fp * fn_) / d, false)
        }
    }

    /// Mean of the class recalls; a class without samples is left out.
    pub fn balanced_accuracy(&self) -> f64 {
        let mut rates = Vec::new();
        if self.tp + self.fn_ > 0 {
            rates.push(self.tp as f64 / (self.tp + self.fn_) as f64);
        }
        if self.tn + self.fp > 0 {
            rates.push(self.tn as f64 / (self.tn + self.fp) as f64);
        }
        if rates.is_empty() {
            0.0
        } else {
            100.0 * rates.iter().sum::<f64>() / rates.len() as f64
        }
    }
}

fn check_lengths(scores: &[f64], labels: &[u8]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: scores.len(),
        });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub f1: f64,
    pub mcc: f64,
    pub bacc: f64,
    pub mcc_degenerate: bool,
}

pub fn classification_scores(scores: &[f64], labels: &[u8], threshold: f64) -> Result<ClassScores> {
    let c = Confusion::at(scores, labels, threshold)?;
    let (mcc, mcc_degenerate) = c.mcc();
    Ok(ClassScores {
        f1: c.f1(),
        mcc,
        bacc: c.balanced_accuracy(),
        mcc_degenerate,
    })
}

/// Indices sorted by descending score, grouped into runs of equal scores.
fn tie_groups(scores: &[f64]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in order {
        match groups.last_mut() {
            Some(g) if scores[g[0]] == scores[i] => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

/// Area under the precision-recall curve as average precision: the sum of
/// recall increments times precision, one step per distinct score.
pub fn auprc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    check_lengths(scores, labels)?;
    let positives = labels.iter().filter(|&&l| l == 1).count();
    if positives == 0 {
        return Err(Error::NoPositives);
    }
    let (mut tp, mut seen) = (0usize, 0usize);
    let mut area = 0.0;
    for g in tie_groups(scores) {
        let gained = g.iter().filter(|&&i| labels[i] == 1).count();
        tp += gained;
        seen += g.len();
        if gained > 0 {
            area += gained as f64 * (tp as f64 / seen as f64);
        }
    }
    Ok(100.0 * area / positives as f64)
}

/// Lowest false negative rate over thresholds whose false positive rate is
/// within `fpr_budget` (a fraction, 0.0005 for 0.05%), in percent.
pub fn vd_s(scores: &[f64], labels: &[u8], fpr_budget: f64) -> Result<f64> {
    check_lengths(scores, labels)?;
    let positives = labels.iter().filter(|&&l| l == 1).count();
    if positives == 0 {
        return Err(Error::NoPositives);
    }
    let negatives = labels.len() - positives;
    // Threshold above every score: nothing flagged.
    let mut best = 100.0;
    let (mut tp, mut fp) = (0usize, 0usize);
    for g in tie_groups(scores) {
        for &i in &g {
            if labels[i] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        let fpr = if negatives == 0 {
            0.0
        } else {
            fp as f64 / negatives as f64
        };
        if fpr <= fpr_budget {
            let fnr = 100.0 * (positives - tp) as f64 / positives as f64;
            best = f64::min(best, fnr);
        }
    }
    Ok(best)
}

/// Half-width of the two-sided Student-t interval for the mean.
pub fn confidence_interval(values: &[f64], level: f64) -> Result<f64> {
    let n = values.len();
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    if !(0.0 < level && level < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "confidence level {level} not in (0, 1)"
        )));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    if var == 0.0 {
        return Ok(0.0);
    }
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("valid degrees of freedom")
        .inverse_cdf(0.5 + level / 2.0);
    Ok(t * (var / n as f64).sqrt())
}

/// Expected F1 of a scorer flagging each sample with probability 1/2:
/// precision p, recall 1/2.
pub fn random_baseline_f1(prevalence: f64) -> f64 {
    100.0 * 2.0 * prevalence / (1.0 + 2.0 * prevalence)
}

/// Percentage points of F1 above the random baseline per million parameters.
pub fn parameter_efficiency(f1: f64, random_f1: f64, parameters: f64) -> f64 {
    (f1 - random_f1) / (parameters / 1e6)
}
