//! Metrics-only baseline: a seeded ensemble of class-weighted logistic
//! regressions over signed-log1p, standardized features.

mod measures;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::stratified_indices;
use crate::error::{Error, Result};

pub use measures::{
    auprc, classification_scores, confidence_interval, parameter_efficiency, random_baseline_f1,
    vd_s, ClassScores, Confusion,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub l2: f64,
    /// Weight of positive samples; `None` balances the classes.
    pub positive_class_weight: Option<f64>,
    pub seed: u64,
    pub ensemble: usize,
    /// FPR budget for VD-S, as a fraction.
    pub fpr_budget: f64,
    pub ci_level: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.05,
            epochs: 30,
            batch_size: 256,
            l2: 1e-4,
            positive_class_weight: None,
            seed: 0,
            ensemble: 5,
            fpr_budget: 0.0005,
            ci_level: 0.9,
        }
    }
}

impl TrainConfig {
    // Negated comparisons also reject NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("{what} must be positive")));
        if !(self.learning_rate > 0.0) {
            return bad("learning rate");
        }
        if self.epochs == 0 {
            return bad("epochs");
        }
        if self.batch_size == 0 {
            return bad("batch size");
        }
        if self.ensemble == 0 {
            return bad("ensemble size");
        }
        if !(self.l2 >= 0.0) {
            return Err(Error::InvalidArgument(
                "L2 penalty must be non-negative".into(),
            ));
        }
        if let Some(w) = self.positive_class_weight {
            if !(w > 0.0) {
                return bad("positive class weight");
            }
        }
        Ok(())
    }
}

fn signed_log1p(x: f64) -> f64 {
    x.signum() * x.abs().ln_1p()
}

/// Per-feature signed log1p followed by standardization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    pub shift: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Transform {
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let n = x.len().max(1) as f64;
        let mut shift = vec![0.0; d];
        let mut scale = vec![1.0; d];
        for j in 0..d {
            let col: Vec<f64> = x.iter().map(|r| signed_log1p(r[j])).collect();
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            shift[j] = mean;
            if var > 0.0 {
                scale[j] = var.sqrt();
            }
        }
        Transform { shift, scale }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.shift.iter().zip(&self.scale))
            .map(|(&v, (&m, &s))| (signed_log1p(v) - m) / s)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticUnit {
    pub weights: Vec<f64>,
    pub bias: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LogisticUnit {
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.margin(x))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineModel {
    pub feature_names: Vec<String>,
    pub transform: Transform,
    pub members: Vec<LogisticUnit>,
    pub threshold: f64,
    pub config: TrainConfig,
}

impl BaselineModel {
    pub fn dimension(&self) -> usize {
        self.transform.shift.len()
    }

    /// Learned parameters: member weights and biases, transform shift and
    /// scale, and the threshold.
    pub fn parameter_count(&self) -> usize {
        let d = self.dimension();
        self.members.len() * (d + 1) + 2 * d + 1
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Mean member probability in [0, 1].
pub fn predict_score(model: &BaselineModel, x: &[f64]) -> Result<f64> {
    if x.len() != model.dimension() {
        return Err(Error::DimensionMismatch {
            expected: model.dimension(),
            got: x.len(),
        });
    }
    let z = model.transform.apply(x);
    Ok(model.members.iter().map(|m| m.probability(&z)).sum::<f64>() / model.members.len() as f64)
}

pub fn predict_scores(model: &BaselineModel, x: &[Vec<f64>]) -> Result<Vec<f64>> {
    x.iter().map(|r| predict_score(model, r)).collect()
}

fn train_unit(
    z: &[Vec<f64>],
    y: &[u8],
    weights: &[f64],
    cfg: &TrainConfig,
    stream: u64,
) -> LogisticUnit {
    let d = z.first().map_or(0, Vec::len);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let mut w: Vec<f64> = (0..d).map(|_| rng.random_range(-0.01..0.01)).collect();
    let mut b = 0.0;
    let (beta1, beta2, eps) = (0.9f64, 0.999f64, 1e-8);
    let mut m = vec![0.0; d + 1];
    let mut v = vec![0.0; d + 1];
    let mut t = 0i32;
    let mut order: Vec<usize> = (0..z.len()).collect();
    let mut grad = vec![0.0; d + 1];
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut bw = 0.0;
            for &i in batch {
                let p = sigmoid(b + w.iter().zip(&z[i]).map(|(a, c)| a * c).sum::<f64>());
                let r = weights[i] * (p - f64::from(y[i]));
                for j in 0..d {
                    grad[j] += r * z[i][j];
                }
                grad[d] += r;
                bw += weights[i];
            }
            // Gradient of the weighted mean loss over the batch.
            let norm = if bw > 0.0 { bw } else { 1.0 };
            for j in 0..d {
                grad[j] = grad[j] / norm + cfg.l2 * w[j];
            }
            grad[d] /= norm;
            t += 1;
            let (c1, c2) = (1.0 - beta1.powi(t), 1.0 - beta2.powi(t));
            for j in 0..=d {
                m[j] = beta1 * m[j] + (1.0 - beta1) * grad[j];
                v[j] = beta2 * v[j] + (1.0 - beta2) * grad[j] * grad[j];
                let step = cfg.learning_rate * (m[j] / c1) / ((v[j] / c2).sqrt() + eps);
                if j < d {
                    w[j] -= step;
                } else {
                    b -= step;
                }
            }
        }
    }
    LogisticUnit {
        weights: w,
        bias: b,
    }
}

/// Threshold maximizing F1 on the given scores; 0.5 wins ties so tuning
/// never does worse than the default threshold.
pub fn tune_threshold(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let mut candidates: Vec<f64> = scores.to_vec();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let mut best: (f64, f64) = (Confusion::at(scores, labels, 0.5)?.f1(), 0.5);
    // Sweep thresholds from high to low with running counts.
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let positives = labels.iter().filter(|&&l| l == 1).count() as u64;
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut k = 0;
    for &t in candidates.iter().rev() {
        while k < order.len() && scores[order[k]] >= t {
            if labels[order[k]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        let c = Confusion {
            tp,
            fp,
            tn: 0,
            fn_: positives - tp,
        };
        let f1 = c.f1();
        if f1 > best.0 || (f1 == best.0 && (t - 0.5).abs() < (best.1 - 0.5).abs()) {
            best = (f1, t);
        }
    }
    Ok(best.1)
}

/// Fits the baseline. The threshold is tuned on `valid` when given, else on
/// the training data.
pub fn fit(
    x: &[Vec<f64>],
    y: &[u8],
    valid: Option<(&[Vec<f64>], &[u8])>,
    feature_names: &[String],
    cfg: &TrainConfig,
) -> Result<BaselineModel> {
    cfg.validate()?;
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let d = x.first().map_or(0, Vec::len);
    if let Some(bad) = x.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: bad.len(),
        });
    }
    let pos = y.iter().filter(|&&l| l == 1).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::SingleClass);
    }
    let transform = Transform::fit(x);
    let z: Vec<Vec<f64>> = x.iter().map(|r| transform.apply(r)).collect();
    let wpos = cfg
        .positive_class_weight
        .unwrap_or((y.len() - pos) as f64 / pos as f64);
    let weights: Vec<f64> = y.iter().map(|&l| if l == 1 { wpos } else { 1.0 }).collect();
    let members: Vec<LogisticUnit> = (0..cfg.ensemble as u64)
        .map(|e| train_unit(&z, y, &weights, cfg, e))
        .collect();
    let mut model = BaselineModel {
        feature_names: feature_names.to_vec(),
        transform,
        members,
        threshold: 0.5,
        config: cfg.clone(),
    };
    let (vx, vy) = valid.unwrap_or((x, y));
    let scores = predict_scores(&model, vx)?;
    model.threshold = tune_threshold(&scores, vy)?;
    Ok(model)
}

/// Measures of one evaluation, in percent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunScores {
    pub f1: f64,
    pub auprc: f64,
    pub mcc: f64,
    pub bacc: f64,
    pub vd_s: f64,
    pub threshold: f64,
    pub mcc_degenerate: bool,
}

pub fn evaluate(
    scores: &[f64],
    labels: &[u8],
    threshold: f64,
    fpr_budget: f64,
) -> Result<RunScores> {
    let c = classification_scores(scores, labels, threshold)?;
    Ok(RunScores {
        f1: c.f1,
        auprc: auprc(scores, labels)?,
        mcc: c.mcc,
        bacc: c.bacc,
        vd_s: vd_s(scores, labels, fpr_budget)?,
        threshold,
        mcc_degenerate: c.mcc_degenerate,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Half-width of the confidence interval; `None` for a single run.
    pub ci: Option<f64>,
    pub runs: Vec<f64>,
}

impl Summary {
    pub fn of(runs: Vec<f64>, level: f64) -> Self {
        let mean = runs.iter().sum::<f64>() / runs.len().max(1) as f64;
        let ci = confidence_interval(&runs, level).ok();
        Summary { mean, ci, runs }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub f1: Summary,
    pub auprc: Summary,
    pub mcc: Summary,
    pub bacc: Summary,
    pub vd_s: Summary,
    pub thresholds: Vec<f64>,
    pub runs: usize,
    pub ci_level: f64,
    pub ci_undefined: bool,
    pub test_prevalence: f64,
    pub random_f1: f64,
    pub parameter_count: usize,
    pub parameter_efficiency: f64,
}

impl EvalReport {
    pub fn from_runs(runs: &[RunScores], labels: &[u8], params: usize, level: f64) -> Self {
        let col = |f: fn(&RunScores) -> f64| Summary::of(runs.iter().map(f).collect(), level);
        let prevalence =
            labels.iter().filter(|&&l| l == 1).count() as f64 / labels.len().max(1) as f64;
        let random_f1 = random_baseline_f1(prevalence);
        let f1 = col(|r| r.f1);
        EvalReport {
            parameter_efficiency: parameter_efficiency(f1.mean, random_f1, params as f64),
            f1,
            auprc: col(|r| r.auprc),
            mcc: col(|r| r.mcc),
            bacc: col(|r| r.bacc),
            vd_s: col(|r| r.vd_s),
            thresholds: runs.iter().map(|r| r.threshold).collect(),
            runs: runs.len(),
            ci_level: level,
            ci_undefined: runs.len() < 2,
            test_prevalence: prevalence,
            random_f1,
            parameter_count: params,
        }
    }
}

/// Labeled feature matrix.
#[derive(Clone, Copy, Debug)]
pub struct Dataset<'a> {
    pub x: &'a [Vec<f64>],
    pub y: &'a [u8],
}

/// `k` seeded fit/evaluate runs against a fixed test split. Run `r` uses
/// seed `config.seed + r`; with `resplit`, train and validation are pooled
/// and re-split per run with the same stratification and validation share.
pub fn run_repeated(
    train: Dataset<'_>,
    valid: Dataset<'_>,
    test: Dataset<'_>,
    feature_names: &[String],
    config: &TrainConfig,
    k: usize,
    resplit: bool,
) -> Result<(EvalReport, Vec<BaselineModel>)> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "at least one run is required".into(),
        ));
    }
    let results: Vec<Result<(RunScores, BaselineModel)>> = (0..k as u64)
        .into_par_iter()
        .map(|r| {
            let cfg = TrainConfig {
                seed: config.seed.wrapping_add(r),
                ..config.clone()
            };
            let (tx, ty, vx, vy);
            if resplit && !valid.x.is_empty() {
                let pool_x: Vec<Vec<f64>> = train.x.iter().chain(valid.x).cloned().collect();
                let pool_y: Vec<u8> = train.y.iter().chain(valid.y).copied().collect();
                let chosen = stratified_indices(&pool_y, valid.x.len(), cfg.seed)?;
                let mut is_valid = vec![false; pool_y.len()];
                chosen.iter().for_each(|&i| is_valid[i] = true);
                let pick = |want: bool| {
                    let idx: Vec<usize> =
                        (0..pool_y.len()).filter(|&i| is_valid[i] == want).collect();
                    (
                        idx.iter().map(|&i| pool_x[i].clone()).collect::<Vec<_>>(),
                        idx.iter().map(|&i| pool_y[i]).collect::<Vec<_>>(),
                    )
                };
                (tx, ty) = pick(false);
                (vx, vy) = pick(true);
            } else {
                (tx, ty) = (train.x.to_vec(), train.y.to_vec());
                (vx, vy) = (valid.x.to_vec(), valid.y.to_vec());
            }
            let v = if vx.is_empty() {
                None
            } else {
                Some((vx.as_slice(), vy.as_slice()))
            };
            let model = fit(&tx, &ty, v, feature_names, &cfg)?;
            let scores = predict_scores(&model, test.x)?;
            let s = evaluate(&scores, test.y, model.threshold, cfg.fpr_budget)?;
            Ok((s, model))
        })
        .collect();
    let mut runs = Vec::with_capacity(k);
    let mut models = Vec::with_capacity(k);
    for r in results {
        let (s, m) = r?;
        runs.push(s);
        models.push(m);
    }
    let params = models[0].parameter_count();
    Ok((
        EvalReport::from_runs(&runs, test.y, params, config.ci_level),
        models,
    ))
}

fn cell(s: &Summary) -> String {
    match s.ci {
        Some(ci) => format!("{:.2} ± {:.2}", s.mean, ci),
        None => format!("{:.2}", s.mean),
    }
}

/// Plain-text table with one row per predictor.
pub fn render_table(rows: &[(&str, &EvalReport)]) -> String {
    let header = [
        "Predictor",
        "Efficiency",
        "F1",
        "AUPRC",
        "MCC",
        "BAcc",
        "VD-S",
    ];
    let mut table: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    for (name, r) in rows {
        table.push(vec![
            name.to_string(),
            format!("{:.3}", r.parameter_efficiency),
            cell(&r.f1),
            cell(&r.auprc),
            cell(&r.mcc),
            cell(&r.bacc),
            cell(&r.vd_s),
        ]);
    }
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            table
                .iter()
                .map(|r| r[c].chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for (i, row) in table.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (v, &w))| {
                let pad = w - v.chars().count();
                if c == 0 {
                    format!("{v}{}", " ".repeat(pad))
                } else {
                    format!("{}{v}", " ".repeat(pad))
                }
            })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
        if i == 0 {
            let total = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
            out.push_str(&"-".repeat(total));
            out.push('\n');
        }
    }
    out
}
