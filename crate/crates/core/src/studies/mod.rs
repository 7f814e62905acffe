//! Per-metric isolation and leave-one-out studies, linear probes,
//! cross-information gain, decision correlation, causal dependence and
//! mutual information.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::{run_repeated, Dataset, EvalReport, TrainConfig};

/// Pearson correlation; `None` when either input is constant or shorter
/// than two samples.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Ok(None);
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(None);
    }
    Ok(Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)))
}

/// Coefficient of determination of `predicted` for `actual`; `None` when
/// `actual` has zero variance.
pub fn r_squared(actual: &[f64], predicted: &[f64]) -> Result<Option<f64>> {
    if actual.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            expected: actual.len(),
            got: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Ok(None);
    }
    let mean = actual.iter().sum::<f64>() / actual.len() as f64;
    let total: f64 = actual.iter().map(|a| (a - mean).powi(2)).sum();
    if total == 0.0 {
        return Ok(None);
    }
    let residual: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p).powi(2))
        .sum();
    Ok(Some(1.0 - residual / total))
}

/// Feature rows with binary labels.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LabeledMatrix {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<u8>,
}

impl LabeledMatrix {
    pub fn view(&self) -> Dataset<'_> {
        Dataset {
            x: &self.x,
            y: &self.y,
        }
    }

    pub fn columns(&self, keep: &[usize]) -> LabeledMatrix {
        LabeledMatrix {
            x: self
                .x
                .iter()
                .map(|r| keep.iter().map(|&j| r[j]).collect())
                .collect(),
            y: self.y.clone(),
        }
    }

    /// Rows of `self` followed column-wise by the rows of `other`.
    pub fn concat(&self, other: &LabeledMatrix) -> Result<LabeledMatrix> {
        if self.y != other.y {
            return Err(Error::Misaligned("label columns differ".into()));
        }
        Ok(LabeledMatrix {
            x: self
                .x
                .iter()
                .zip(&other.x)
                .map(|(a, b)| a.iter().chain(b).copied().collect())
                .collect(),
            y: self.y.clone(),
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Splits {
    pub train: LabeledMatrix,
    pub valid: LabeledMatrix,
    pub test: LabeledMatrix,
}

impl Splits {
    pub fn columns(&self, keep: &[usize]) -> Splits {
        Splits {
            train: self.train.columns(keep),
            valid: self.valid.columns(keep),
            test: self.test.columns(keep),
        }
    }

    pub fn concat(&self, other: &Splits) -> Result<Splits> {
        Ok(Splits {
            train: self.train.concat(&other.train)?,
            valid: self.valid.concat(&other.valid)?,
            test: self.test.concat(&other.test)?,
        })
    }

    pub fn dimension(&self) -> usize {
        self.train.x.first().map_or(0, Vec::len)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub train: TrainConfig,
    pub runs: usize,
    pub resplit: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            train: TrainConfig::default(),
            runs: 1,
            resplit: false,
        }
    }
}

fn evaluate_subset(splits: &Splits, names: &[String], config: &StudyConfig) -> Result<EvalReport> {
    let (report, _) = run_repeated(
        splits.train.view(),
        splits.valid.view(),
        splits.test.view(),
        names,
        &config.train,
        config.runs,
        config.resplit,
    )?;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetEntry {
    pub id: String,
    pub f1: f64,
    /// F1 as a percentage of the all-feature F1; `None` when that is 0.
    pub relative_f1: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetStudyReport {
    pub study: String,
    pub full_f1: f64,
    pub random_f1: f64,
    pub entries: Vec<SubsetEntry>,
}

fn subset_study(
    study: &str,
    splits: &Splits,
    names: &[String],
    config: &StudyConfig,
    subset: impl Fn(usize) -> Vec<usize>,
) -> Result<SubsetStudyReport> {
    if names.len() != splits.dimension() {
        return Err(Error::DimensionMismatch {
            expected: splits.dimension(),
            got: names.len(),
        });
    }
    let full = evaluate_subset(splits, names, config)?;
    let mut entries = Vec::with_capacity(names.len());
    for (j, id) in names.iter().enumerate() {
        let keep = subset(j);
        let sub_names: Vec<String> = keep.iter().map(|&k| names[k].clone()).collect();
        let r = evaluate_subset(&splits.columns(&keep), &sub_names, config)?;
        entries.push(SubsetEntry {
            id: id.clone(),
            f1: r.f1.mean,
            relative_f1: (full.f1.mean > 0.0).then(|| 100.0 * r.f1.mean / full.f1.mean),
        });
    }
    Ok(SubsetStudyReport {
        study: study.to_string(),
        full_f1: full.f1.mean,
        random_f1: full.random_f1,
        entries,
    })
}

/// Retrains on each single feature.
pub fn isolation_study(
    splits: &Splits,
    names: &[String],
    config: &StudyConfig,
) -> Result<SubsetStudyReport> {
    subset_study("isolation", splits, names, config, |j| vec![j])
}

/// Retrains without each feature in turn.
pub fn leave_one_out_study(
    splits: &Splits,
    names: &[String],
    config: &StudyConfig,
) -> Result<SubsetStudyReport> {
    let d = names.len();
    subset_study("leave-one-out", splits, names, config, |j| {
        (0..d).filter(|&k| k != j).collect()
    })
}

pub fn render_subset_study(report: &SubsetStudyReport) -> String {
    let mut out = format!(
        "{} study (full F1 {:.2}, random F1 {:.2})\n{:<8}{:>10}{:>14}\n",
        report.study, report.full_f1, report.random_f1, "Metric", "F1", "Relative F1"
    );
    for e in &report.entries {
        let rel = e
            .relative_f1
            .map_or("n/a".to_string(), |v| format!("{v:.2}"));
        out.push_str(&format!("{:<8}{:>10.2}{:>14}\n", e.id, e.f1, rel));
    }
    out
}

fn to_matrix(rows: &[Vec<f64>], d: usize) -> Result<DMatrix<f64>> {
    if let Some(bad) = rows.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: bad.len(),
        });
    }
    Ok(DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]))
}

/// Samples of a probe: embeddings and the metric values to recover.
#[derive(Clone, Copy, Debug)]
pub struct ProbeData<'a> {
    pub embeddings: &'a [Vec<f64>],
    pub metrics: &'a [Vec<f64>],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeEntry {
    pub id: String,
    /// Held-out R²; `None` when the test target is constant.
    pub r_squared: Option<f64>,
    pub train_r_squared: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub source: String,
    pub ridge: f64,
    pub train_samples: usize,
    pub test_samples: usize,
    pub entries: Vec<ProbeEntry>,
}

impl ProbeReport {
    pub fn get(&self, id: &str) -> Option<&ProbeEntry> {
        self.entries.iter().find(|e| e.id == id)
    }
}

fn log_target(v: f64) -> f64 {
    v.max(0.0).ln_1p()
}

/// Ridge regression from embeddings to log(1+μ) per metric, with an
/// unpenalized intercept; λ is 1e-6 times the mean diagonal of the centered
/// Gram matrix.
pub fn linear_probe(
    train: ProbeData<'_>,
    test: ProbeData<'_>,
    metric_ids: &[String],
    source: &str,
) -> Result<ProbeReport> {
    let d = train.embeddings.first().map_or(0, Vec::len);
    if d == 0 {
        return Err(Error::InvalidArgument(
            "embedding dimension must be at least 1".into(),
        ));
    }
    let m = metric_ids.len();
    for (data, what) in [(&train, "train"), (&test, "test")] {
        if data.embeddings.len() != data.metrics.len() {
            return Err(Error::Misaligned(format!(
                "{what}: {} embeddings for {} metric rows",
                data.embeddings.len(),
                data.metrics.len()
            )));
        }
    }
    if train.embeddings.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: train.embeddings.len(),
        });
    }
    let x = to_matrix(train.embeddings, d)?;
    let y = to_matrix(train.metrics, m)?.map(log_target);
    let n = x.nrows() as f64;
    let x_mean = x.row_mean();
    let y_mean = y.row_mean();
    let xc = DMatrix::from_fn(x.nrows(), d, |i, j| x[(i, j)] - x_mean[j]);
    let yc = DMatrix::from_fn(y.nrows(), m, |i, j| y[(i, j)] - y_mean[j]);
    let mut gram = xc.transpose() * &xc;
    let lambda = 1e-6 * gram.trace() / d as f64;
    let ridge = if lambda > 0.0 { lambda } else { 1e-12 * n };
    for j in 0..d {
        gram[(j, j)] += ridge;
    }
    let chol = gram.cholesky().ok_or(Error::Singular)?;
    let w = chol.solve(&(xc.transpose() * &yc));
    let predict = |rows: &[Vec<f64>]| -> Result<DMatrix<f64>> {
        let e = to_matrix(rows, d)?;
        let mut p = DMatrix::from_fn(e.nrows(), d, |i, j| e[(i, j)] - x_mean[j]) * &w;
        for mut row in p.row_iter_mut() {
            row += &y_mean;
        }
        Ok(p)
    };
    let train_pred = predict(train.embeddings)?;
    let test_pred = predict(test.embeddings)?;
    let test_y = to_matrix(test.metrics, m)?.map(log_target);
    let col =
        |mat: &DMatrix<f64>, j: usize| -> Vec<f64> { mat.column(j).iter().copied().collect() };
    let mut entries = Vec::with_capacity(m);
    for (j, id) in metric_ids.iter().enumerate() {
        entries.push(ProbeEntry {
            id: id.clone(),
            r_squared: r_squared(&col(&test_y, j), &col(&test_pred, j))?,
            train_r_squared: r_squared(&col(&y, j), &col(&train_pred, j))?,
        });
    }
    Ok(ProbeReport {
        source: source.to_string(),
        ridge,
        train_samples: train.embeddings.len(),
        test_samples: test.embeddings.len(),
        entries,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossGainReport {
    pub embedding_only: EvalReport,
    pub combined: EvalReport,
    /// Mean F1 of embeddings plus features minus mean F1 of embeddings alone.
    pub delta_f1: f64,
}

/// Trains the baseline head on embeddings alone and on embeddings
/// concatenated with the metric features.
pub fn cross_information_gain(
    embeddings: &Splits,
    features: &Splits,
    feature_names: &[String],
    config: &StudyConfig,
) -> Result<CrossGainReport> {
    let emb_names: Vec<String> = (0..embeddings.dimension())
        .map(|i| format!("e{i}"))
        .collect();
    let combined = embeddings.concat(features)?;
    let combined_names: Vec<String> = emb_names.iter().chain(feature_names).cloned().collect();
    let embedding_only = evaluate_subset(embeddings, &emb_names, config)?;
    let combined = evaluate_subset(&combined, &combined_names, config)?;
    Ok(CrossGainReport {
        delta_f1: combined.f1.mean - embedding_only.f1.mean,
        embedding_only,
        combined,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEntry {
    pub id: String,
    /// `None` when the metric column or the scores are constant.
    pub r: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub source: String,
    pub samples: usize,
    pub entries: Vec<CorrelationEntry>,
}

/// Pearson r between each feature column and the raw prediction scores.
pub fn prediction_correlation(
    features: &[Vec<f64>],
    scores: &[f64],
    metric_ids: &[String],
    source: &str,
) -> Result<CorrelationReport> {
    if features.len() != scores.len() {
        return Err(Error::Misaligned(format!(
            "{} feature rows for {} scores",
            features.len(),
            scores.len()
        )));
    }
    let mut entries = Vec::with_capacity(metric_ids.len());
    for (j, id) in metric_ids.iter().enumerate() {
        let column: Vec<f64> = features.iter().map(|r| r[j]).collect();
        entries.push(CorrelationEntry {
            id: id.clone(),
            r: pearson(&column, scores)?,
        });
    }
    Ok(CorrelationReport {
        source: source.to_string(),
        samples: scores.len(),
        entries,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CausalConfig {
    /// Fraction of pairs held out for scoring; `None` scores in-sample.
    pub holdout: Option<f64>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CausalReport {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub r_squared: f64,
    pub pairs: usize,
    pub fitted_pairs: usize,
    pub holdout: Option<f64>,
}

struct LeastSquares {
    weights: Vec<f64>,
    intercept: f64,
}

/// Minimum-norm least squares with intercept. Columns are solved in a
/// canonical order so the fit does not depend on how they were permuted.
fn least_squares(rows: &[Vec<f64>], y: &[f64], d: usize) -> Result<LeastSquares> {
    let mut order: Vec<usize> = (0..d).collect();
    let key = |j: usize| -> Vec<u64> { rows.iter().map(|r| r[j].to_bits()).collect() };
    order.sort_by_cached_key(|&j| key(j));
    let a = DMatrix::from_fn(rows.len(), d + 1, |i, c| {
        if c == 0 {
            1.0
        } else {
            rows[i][order[c - 1]]
        }
    });
    let b = DVector::from_column_slice(y);
    let svd = a.svd(true, true);
    let eps = 1e-12 * svd.singular_values.max().max(1.0);
    let coef = svd.solve(&b, eps).map_err(|_| Error::Singular)?;
    let mut weights = vec![0.0; d];
    for (c, &j) in order.iter().enumerate() {
        weights[j] = coef[c + 1];
    }
    Ok(LeastSquares {
        weights,
        intercept: coef[0],
    })
}

/// Regresses prediction deltas on metric deltas and reports R².
pub fn causal_dependence(
    delta_mu: &[Vec<f64>],
    delta_y: &[f64],
    config: &CausalConfig,
) -> Result<CausalReport> {
    let n = delta_y.len();
    if delta_mu.len() != n {
        return Err(Error::Misaligned(format!(
            "{} metric delta rows for {n} prediction deltas",
            delta_mu.len()
        )));
    }
    let d = delta_mu.first().map_or(0, Vec::len);
    if let Some(bad) = delta_mu.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: bad.len(),
        });
    }
    let (fit_idx, score_idx): (Vec<usize>, Vec<usize>) = match config.holdout {
        None => ((0..n).collect(), (0..n).collect()),
        Some(h) => {
            if !(0.0 < h && h < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "holdout fraction {h} not in (0, 1)"
                )));
            }
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed));
            let cut = n - ((n as f64 * h).round() as usize).clamp(1, n.saturating_sub(1).max(1));
            let (a, b) = idx.split_at(cut);
            let (mut a, mut b) = (a.to_vec(), b.to_vec());
            a.sort_unstable();
            b.sort_unstable();
            (a, b)
        }
    };
    if fit_idx.len() < d + 1 {
        return Err(Error::TooFewSamples {
            needed: d + 1,
            got: fit_idx.len(),
        });
    }
    let fit_rows: Vec<Vec<f64>> = fit_idx.iter().map(|&i| delta_mu[i].clone()).collect();
    let fit_y: Vec<f64> = fit_idx.iter().map(|&i| delta_y[i]).collect();
    let ls = least_squares(&fit_rows, &fit_y, d)?;
    let score_y: Vec<f64> = score_idx.iter().map(|&i| delta_y[i]).collect();
    let predicted: Vec<f64> = score_idx
        .iter()
        .map(|&i| {
            ls.intercept
                + ls.weights
                    .iter()
                    .zip(&delta_mu[i])
                    .map(|(w, v)| w * v)
                    .sum::<f64>()
        })
        .collect();
    let r2 = r_squared(&score_y, &predicted)?.ok_or(Error::ZeroVariance("prediction deltas"))?;
    Ok(CausalReport {
        weights: ls.weights,
        intercept: ls.intercept,
        r_squared: r2,
        pairs: n,
        fitted_pairs: fit_idx.len(),
        holdout: config.holdout,
    })
}

/// Interior bin edges at the `k/bins` sample quantiles, deduplicated.
fn quantile_edges(values: &[f64], bins: usize) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut edges: Vec<f64> = (1..bins)
        .map(|k| sorted[(k * n).div_ceil(bins).max(1) - 1])
        .collect();
    edges.dedup();
    if edges.last() == sorted.last() {
        edges.pop();
    }
    edges
}

/// Plug-in mutual information in nats between equal-frequency bins of
/// `values` and the binary labels. A value falls in the first bin whose
/// upper edge it does not exceed.
pub fn mutual_information(values: &[f64], labels: &[u8], bins: usize) -> Result<f64> {
    if bins < 2 {
        return Err(Error::InvalidArgument(
            "at least two bins are required".into(),
        ));
    }
    if values.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: values.len(),
        });
    }
    let n = values.len();
    if n == 0 {
        return Ok(0.0);
    }
    let edges = quantile_edges(values, bins);
    let mut joint = vec![[0usize; 2]; edges.len() + 1];
    for (&v, &l) in values.iter().zip(labels) {
        let b = edges.partition_point(|&e| e < v);
        joint[b][usize::from(l == 1)] += 1;
    }
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let py = [(n - pos) as f64 / n as f64, pos as f64 / n as f64];
    let mut mi = 0.0;
    for row in &joint {
        let pb = (row[0] + row[1]) as f64 / n as f64;
        for c in 0..2 {
            if row[c] > 0 {
                let p = row[c] as f64 / n as f64;
                mi += p * (p / (pb * py[c])).ln();
            }
        }
    }
    Ok(mi.max(0.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InformationEntry {
    pub id: String,
    pub mi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InformationReport {
    pub bins: usize,
    pub entries: Vec<InformationEntry>,
}

/// Mutual information of every feature column with the labels, in
/// feature order.
pub fn information_report(
    features: &[Vec<f64>],
    labels: &[u8],
    metric_ids: &[String],
    bins: usize,
) -> Result<InformationReport> {
    let entries = metric_ids
        .iter()
        .enumerate()
        .map(|(j, id)| {
            let column: Vec<f64> = features.iter().map(|r| r[j]).collect();
            Ok(InformationEntry {
                id: id.clone(),
                mi: mutual_information(&column, labels, bins)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(InformationReport { bins, entries })
}

/// Metric ids by descending mutual information, ties by id.
pub fn information_order(report: &InformationReport) -> Vec<String> {
    let mut e: Vec<&InformationEntry> = report.entries.iter().collect();
    e.sort_by(|a, b| b.mi.total_cmp(&a.mi).then_with(|| a.id.cmp(&b.id)));
    e.into_iter().map(|e| e.id.clone()).collect()
}

/// Two tables sharing the metric order of `information`: probe R² per
/// source, and decision correlation per source.
pub fn render_root_cause(
    information: &InformationReport,
    probes: &[ProbeReport],
    correlations: &[CorrelationReport],
) -> String {
    let order = information_order(information);
    let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.3}"));
    let mut out = String::new();
    let mut panel =
        |title: &str, sources: Vec<&str>, value: &dyn Fn(usize, &str) -> Option<f64>| {
            out.push_str(title);
            out.push('\n');
            let mut header = format!("{:<14}", "Source");
            for id in &order {
                header.push_str(&format!("{id:>8}"));
            }
            out.push_str(header.trim_end());
            out.push('\n');
            for (s, name) in sources.iter().enumerate() {
                let mut line = format!("{name:<14}");
                for id in &order {
                    line.push_str(&format!("{:>8}", fmt(value(s, id))));
                }
                out.push_str(&line);
                out.push('\n');
            }
            out.push('\n');
        };
    let mi_row = |_: usize, id: &str| {
        information
            .entries
            .iter()
            .find(|e| e.id == id)
            .map(|e| e.mi)
    };
    panel("Mutual information (nats)", vec!["label"], &mi_row);
    panel(
        "Information access (probe R²)",
        probes.iter().map(|p| p.source.as_str()).collect(),
        &|s, id| probes[s].get(id).and_then(|e| e.r_squared),
    );
    panel(
        "Decision correlation (Pearson r)",
        correlations.iter().map(|c| c.source.as_str()).collect(),
        &|s, id| {
            correlations[s]
                .entries
                .iter()
                .find(|e| e.id == id)
                .and_then(|e| e.r)
        },
    );
    out
}
