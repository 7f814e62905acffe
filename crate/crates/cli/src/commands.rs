use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use metriscope_core::corpus::{
    align, compute_metric_deltas, load_embeddings, load_jsonl, load_predictions,
    load_revision_pairs, truncate_bytes, write_atomic, FeatureTable, FieldNames, Split,
};
use metriscope_core::learner::{
    evaluate, fit, predict_scores, render_table, run_repeated, BaselineModel, EvalReport,
    TrainConfig,
};
use metriscope_core::metrics::{pointer_attribute_oracle, Extractor, MetricCatalog, METRIC_IDS};
use metriscope_core::query::Query;
use metriscope_core::studies::{
    causal_dependence, cross_information_gain, information_report, isolation_study,
    leave_one_out_study, linear_probe, prediction_correlation, render_root_cause,
    render_subset_study, CausalConfig, CausalReport, CorrelationReport, CrossGainReport,
    InformationReport, LabeledMatrix, ProbeData, ProbeReport, Splits, StudyConfig,
    SubsetStudyReport,
};
use metriscope_core::syntax::{parse_function, NodeCategoryTable, SourceFunction};

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Syntactic code metrics for C/C++ functions and a metrics-only
/// vulnerability baseline.
///
/// Set METRISCOPE_THREADS to bound the worker pool.
#[derive(Debug, Parser)]
#[command(name = "metriscope", version)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the metric catalog.
    Catalog(OutArgs),
    /// Extract the 23 metrics from a JSONL corpus into a feature CSV.
    Extract(ExtractArgs),
    /// Count matches of a tree query per function.
    Query(QueryArgs),
    /// Train the baseline, optionally evaluating repeated runs on a test split.
    Train(TrainCmd),
    /// Evaluate a saved model on a feature file.
    Eval(EvalArgs),
    /// Retrain on each metric alone.
    StudyIsolation(StudyArgs),
    /// Retrain without each metric in turn.
    StudyLoo(StudyArgs),
    /// Probe embeddings for log(1 + metric) with linear regression.
    Probe(ProbeArgs),
    /// F1 gained by adding the metrics to embeddings.
    Xgain(XgainArgs),
    /// Pearson correlation of each metric with prediction scores.
    Correlate(CorrelateArgs),
    /// Regress prediction deltas on metric deltas over revision pairs.
    Causal(CausalArgs),
    /// Mutual information of each metric with the label.
    Mi(MiArgs),
    /// Render saved JSON reports as text tables.
    Report(ReportArgs),
}

#[derive(Debug, Args, Serialize)]
struct OutArgs {
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct FieldArgs {
    /// JSON field holding the function source.
    #[arg(long, default_value = "func")]
    code_field: String,
    /// JSON field holding the 0/1 label.
    #[arg(long, default_value = "target")]
    label_field: String,
    /// JSON field holding the sample id.
    #[arg(long, default_value = "idx")]
    id_field: String,
    /// Keep only the first N bytes of each function.
    #[arg(long, value_name = "N")]
    truncate: Option<usize>,
}

impl FieldArgs {
    fn names(&self) -> FieldNames {
        FieldNames {
            code: self.code_field.clone(),
            label: self.label_field.clone(),
            id: self.id_field.clone(),
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct ExtractArgs {
    /// JSONL corpus.
    #[arg(long = "in")]
    input: PathBuf,
    /// Feature CSV to write.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    fields: FieldArgs,
}

#[derive(Debug, Args, Serialize)]
struct QueryArgs {
    /// Query text, e.g. '(goto_stmt)'.
    #[arg(long)]
    pattern: String,
    /// JSONL corpus.
    #[arg(long = "in")]
    input: PathBuf,
    /// Write `id,matches` CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    fields: FieldArgs,
}

#[derive(Debug, Args, Serialize)]
struct LearnArgs {
    /// Base seed; run r uses seed + r.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of repeated runs.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    /// Re-split train and validation per run, keeping the test split fixed.
    #[arg(long)]
    resplit: bool,
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u64).range(1..))]
    epochs: u64,
    #[arg(long, default_value_t = 0.05)]
    learning_rate: f64,
    #[arg(long, default_value_t = 256, value_parser = clap::value_parser!(u64).range(1..))]
    batch_size: u64,
    #[arg(long, default_value_t = 1e-4)]
    l2: f64,
    /// Logistic members per model.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    ensemble: u64,
    /// Positive-class weight; balanced by class counts when omitted.
    #[arg(long)]
    positive_weight: Option<f64>,
    /// False positive rate budget for VD-S, in percent.
    #[arg(long, default_value_t = 0.05)]
    fpr_budget: f64,
    /// Confidence level of the reported intervals.
    #[arg(long, default_value_t = 0.9)]
    ci_level: f64,
}

impl LearnArgs {
    fn config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            epochs: self.epochs as usize,
            batch_size: self.batch_size as usize,
            l2: self.l2,
            positive_class_weight: self.positive_weight,
            seed: self.seed,
            ensemble: self.ensemble as usize,
            fpr_budget: self.fpr_budget / 100.0,
            ci_level: self.ci_level,
        }
    }

    fn study(&self) -> StudyConfig {
        StudyConfig {
            train: self.config(),
            runs: self.k as usize,
            resplit: self.resplit,
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct SplitArgs {
    /// Training features (feature CSV, or JSONL to extract on the fly).
    #[arg(long)]
    train: PathBuf,
    /// Validation features, used for threshold tuning.
    #[arg(long)]
    valid: PathBuf,
    /// Test features.
    #[arg(long)]
    test: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct TrainCmd {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    valid: Option<PathBuf>,
    /// With a test split, evaluates k runs and writes the report.
    #[arg(long)]
    test: Option<PathBuf>,
    /// Where to save the model of the first run.
    #[arg(long)]
    model_out: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    learn: LearnArgs,
    #[command(flatten)]
    fields: FieldArgs,
}

#[derive(Debug, Args, Serialize)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    fields: FieldArgs,
}

#[derive(Debug, Args, Serialize)]
struct StudyArgs {
    #[command(flatten)]
    splits: SplitArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    learn: LearnArgs,
    #[command(flatten)]
    fields: FieldArgs,
}

#[derive(Debug, Args, Serialize)]
struct ProbeArgs {
    /// Embedding CSV (`id,e1,...,ed`) covering the train and test ids.
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Name of the model that produced the embeddings.
    #[arg(long, default_value = "embeddings")]
    source: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    fields: FieldArgs,
}

#[derive(Debug, Args, Serialize)]
struct XgainArgs {
    #[arg(long)]
    embeddings: PathBuf,
    #[command(flatten)]
    splits: SplitArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    learn: LearnArgs,
    #[command(flatten)]
    fields: FieldArgs,
}

#[derive(Debug, Args, Serialize)]
struct CorrelateArgs {
    /// Prediction CSV (`id,score`).
    #[arg(long)]
    predictions: PathBuf,
    #[arg(long)]
    features: PathBuf,
    #[arg(long, default_value = "predictions")]
    source: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    fields: FieldArgs,
}

#[derive(Debug, Args, Serialize)]
struct CausalArgs {
    /// Revision-pair JSONL with code and predictions before and after.
    #[arg(long)]
    pairs: PathBuf,
    /// Score R² on this fraction of held-out pairs instead of in-sample.
    #[arg(long)]
    holdout: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct MiArgs {
    #[arg(long)]
    features: PathBuf,
    /// Equal-frequency bins per metric.
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u64).range(2..))]
    bins: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    fields: FieldArgs,
}

#[derive(Debug, Args, Serialize)]
struct ReportArgs {
    /// JSON reports written by the other subcommands.
    #[arg(required = true)]
    reports: Vec<PathBuf>,
}

#[derive(Serialize, Deserialize)]
struct Envelope<C, R> {
    kind: String,
    tool: String,
    version: String,
    catalog_hash: String,
    config: C,
    result: R,
}

fn catalog() -> MetricCatalog {
    MetricCatalog::default_catalog()
}

fn emit<C: Serialize, R: Serialize>(
    kind: &str,
    config: &C,
    result: &R,
    out: Option<&Path>,
    text: &str,
) -> Result<()> {
    let envelope = Envelope {
        kind: kind.to_string(),
        tool: "metriscope".to_string(),
        version: VERSION.to_string(),
        catalog_hash: catalog().manifest_hash(),
        config,
        result,
    };
    let mut json = serde_json::to_string_pretty(&envelope)?;
    json.push('\n');
    match out {
        Some(path) => {
            write_atomic(path, json.as_bytes())?;
            print!("{text}");
        }
        None => print!("{json}"),
    }
    Ok(())
}

fn metric_names() -> Vec<String> {
    METRIC_IDS.iter().map(|s| s.to_string()).collect()
}

/// Feature CSV, or a JSONL corpus extracted on the fly.
fn load_features(path: &Path, fields: &FieldArgs) -> Result<FeatureTable> {
    let table = if path.extension().is_some_and(|e| e == "jsonl") {
        let corpus = load_jsonl(path, Split::Train, &fields.names())?;
        FeatureTable::extract(&corpus, &Extractor::default_extractor(), fields.truncate)
    } else {
        FeatureTable::load(path)?
    };
    if table.is_empty() {
        bail!("{} holds no samples", path.display());
    }
    Ok(table)
}

fn labeled(table: &FeatureTable) -> LabeledMatrix {
    LabeledMatrix {
        x: table.matrix(),
        y: table.labels(),
    }
}

fn load_splits(args: &SplitArgs, fields: &FieldArgs) -> Result<(Splits, [FeatureTable; 3])> {
    let train = load_features(&args.train, fields)?;
    let valid = load_features(&args.valid, fields)?;
    let test = load_features(&args.test, fields)?;
    let splits = Splits {
        train: labeled(&train),
        valid: labeled(&valid),
        test: labeled(&test),
    };
    Ok((splits, [train, valid, test]))
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Catalog(a) => run_catalog(&a),
        Command::Extract(a) => run_extract(&a),
        Command::Query(a) => run_query(&a),
        Command::Train(a) => run_train(&a),
        Command::Eval(a) => run_eval(&a),
        Command::StudyIsolation(a) => run_subset(&a, "isolation"),
        Command::StudyLoo(a) => run_subset(&a, "leave-one-out"),
        Command::Probe(a) => run_probe(&a),
        Command::Xgain(a) => run_xgain(&a),
        Command::Correlate(a) => run_correlate(&a),
        Command::Causal(a) => run_causal(&a),
        Command::Mi(a) => run_mi(&a),
        Command::Report(a) => run_report(&a),
    }
}

#[derive(Serialize)]
struct CatalogResult<'a> {
    metrics: Vec<&'a metriscope_core::metrics::MetricSpec>,
    auxiliary: Vec<&'a metriscope_core::metrics::MetricSpec>,
}

fn run_catalog(a: &OutArgs) -> Result<()> {
    let c = catalog();
    let result = CatalogResult {
        metrics: c.exported().collect(),
        auxiliary: c.specs().iter().filter(|s| !s.exported).collect(),
    };
    let mut text = String::new();
    for s in &result.metrics {
        text.push_str(&format!(
            "{:<5} {:<5} {}\n",
            s.id,
            format!("{:?}", s.reduce).to_lowercase(),
            s.query_text
        ));
    }
    emit("catalog", a, &result, a.out.as_deref(), &text)
}

fn run_extract(a: &ExtractArgs) -> Result<()> {
    let corpus = load_jsonl(&a.input, Split::Train, &a.fields.names())?;
    let table = FeatureTable::extract(&corpus, &Extractor::default_extractor(), a.fields.truncate);
    write_atomic(&a.out, table.to_csv_string().as_bytes())?;
    let failed = table.rows.iter().filter(|r| r.parse_error).count();
    eprintln!(
        "extracted {} functions ({failed} failed to parse)",
        table.len()
    );
    Ok(())
}

fn run_query(a: &QueryArgs) -> Result<()> {
    let query = Query::parse(&a.pattern, &NodeCategoryTable::default()).context("invalid query")?;
    let corpus = load_jsonl(&a.input, Split::Train, &a.fields.names())?;
    let mut out = String::from("id,matches\n");
    let mut failed = 0;
    for s in &corpus.samples {
        let code = match a.fields.truncate {
            Some(n) => truncate_bytes(&s.code, n),
            None => &s.code,
        };
        let count = match parse_function(SourceFunction::new(&s.id, code)) {
            Ok(tree) => query.matches(&tree, &pointer_attribute_oracle(&tree)).len(),
            Err(_) => {
                failed += 1;
                0
            }
        };
        out.push_str(&format!("{},{count}\n", s.id));
    }
    if failed > 0 {
        eprintln!("{failed} functions failed to parse and count 0");
    }
    match &a.out {
        Some(p) => write_atomic(p, out.as_bytes())?,
        None => std::io::stdout().write_all(out.as_bytes())?,
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct EvalResult {
    report: EvalReport,
}

fn run_train(a: &TrainCmd) -> Result<()> {
    let names = metric_names();
    let cfg = a.learn.config();
    let train = labeled(&load_features(&a.train, &a.fields)?);
    let valid = match &a.valid {
        Some(p) => labeled(&load_features(p, &a.fields)?),
        None => LabeledMatrix::default(),
    };
    let Some(test_path) = &a.test else {
        let v = (!valid.x.is_empty()).then_some((valid.x.as_slice(), valid.y.as_slice()));
        let model = fit(&train.x, &train.y, v, &names, &cfg)?;
        write_atomic(&a.model_out, model.to_json().as_bytes())?;
        eprintln!("saved model with {} parameters", model.parameter_count());
        return Ok(());
    };
    let test = labeled(&load_features(test_path, &a.fields)?);
    let (report, models) = run_repeated(
        train.view(),
        valid.view(),
        test.view(),
        &names,
        &cfg,
        a.learn.k as usize,
        a.learn.resplit,
    )?;
    write_atomic(&a.model_out, models[0].to_json().as_bytes())?;
    let text = render_table(&[("metrics baseline", &report)]);
    emit("eval", a, &EvalResult { report }, a.out.as_deref(), &text)
}

fn run_eval(a: &EvalArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.model)
        .with_context(|| format!("reading {}", a.model.display()))?;
    let model = BaselineModel::from_json(&text)
        .with_context(|| format!("parsing {}", a.model.display()))?;
    let data = labeled(&load_features(&a.features, &a.fields)?);
    let scores = predict_scores(&model, &data.x)?;
    let run = evaluate(&scores, &data.y, model.threshold, model.config.fpr_budget)?;
    let report = EvalReport::from_runs(
        &[run],
        &data.y,
        model.parameter_count(),
        model.config.ci_level,
    );
    let text = render_table(&[("metrics baseline", &report)]);
    emit("eval", a, &EvalResult { report }, a.out.as_deref(), &text)
}

fn run_subset(a: &StudyArgs, study: &str) -> Result<()> {
    let (splits, _) = load_splits(&a.splits, &a.fields)?;
    let names = metric_names();
    let cfg = a.learn.study();
    let report = if study == "isolation" {
        isolation_study(&splits, &names, &cfg)?
    } else {
        leave_one_out_study(&splits, &names, &cfg)?
    };
    let text = render_subset_study(&report);
    emit(study, a, &report, a.out.as_deref(), &text)
}

fn embedding_rows(path: &Path, ids: &[String]) -> Result<Vec<Vec<f64>>> {
    let emb = load_embeddings(path)?;
    align(ids, &emb).with_context(|| format!("aligning {}", path.display()))
}

fn run_probe(a: &ProbeArgs) -> Result<()> {
    let train = load_features(&a.train, &a.fields)?;
    let test = load_features(&a.test, &a.fields)?;
    let emb = load_embeddings(&a.embeddings)?;
    let train_e = align(&train.ids(), &emb).context("aligning training embeddings")?;
    let test_e = align(&test.ids(), &emb).context("aligning test embeddings")?;
    let (train_m, test_m) = (train.matrix(), test.matrix());
    let report = linear_probe(
        ProbeData {
            embeddings: &train_e,
            metrics: &train_m,
        },
        ProbeData {
            embeddings: &test_e,
            metrics: &test_m,
        },
        &metric_names(),
        &a.source,
    )?;
    let mut text = format!("{:<6}{:>10}\n", "Metric", "R²");
    for e in &report.entries {
        let v = e.r_squared.map_or("n/a".to_string(), |v| format!("{v:.3}"));
        text.push_str(&format!("{:<6}{v:>10}\n", e.id));
    }
    emit("probe", a, &report, a.out.as_deref(), &text)
}

fn run_xgain(a: &XgainArgs) -> Result<()> {
    let (features, tables) = load_splits(&a.splits, &a.fields)?;
    let mut parts = Vec::with_capacity(3);
    for (t, m) in tables
        .iter()
        .zip([&features.train, &features.valid, &features.test])
    {
        parts.push(LabeledMatrix {
            x: embedding_rows(&a.embeddings, &t.ids())?,
            y: m.y.clone(),
        });
    }
    let test = parts.pop().expect("three splits");
    let valid = parts.pop().expect("three splits");
    let train = parts.pop().expect("three splits");
    let embeddings = Splits { train, valid, test };
    let report = cross_information_gain(&embeddings, &features, &metric_names(), &a.learn.study())?;
    let mut text = render_table(&[
        ("embeddings", &report.embedding_only),
        ("embeddings + metrics", &report.combined),
    ]);
    text.push_str(&format!("ΔF1 = {:.3}\n", report.delta_f1));
    emit("xgain", a, &report, a.out.as_deref(), &text)
}

fn run_correlate(a: &CorrelateArgs) -> Result<()> {
    let table = load_features(&a.features, &a.fields)?;
    let preds = load_predictions(&a.predictions)?;
    let scores = align(&table.ids(), &preds).context("aligning predictions")?;
    let report = prediction_correlation(&table.matrix(), &scores, &metric_names(), &a.source)?;
    let mut text = format!("{:<6}{:>10}\n", "Metric", "r");
    for e in &report.entries {
        let v = e.r.map_or("n/a".to_string(), |v| format!("{v:.3}"));
        text.push_str(&format!("{:<6}{v:>10}\n", e.id));
    }
    emit("correlation", a, &report, a.out.as_deref(), &text)
}

fn run_causal(a: &CausalArgs) -> Result<()> {
    let pairs = load_revision_pairs(&a.pairs)?;
    let deltas = compute_metric_deltas(&pairs, &Extractor::default_extractor())?;
    let (x, y) = deltas.regression_rows();
    let skipped = pairs.len() - y.len();
    if skipped > 0 {
        eprintln!("{skipped} pairs skipped (parse failure or missing prediction)");
    }
    let report = causal_dependence(
        &x,
        &y,
        &CausalConfig {
            holdout: a.holdout,
            seed: a.seed,
        },
    )?;
    let text = format!(
        "causal R² = {:.4} over {} pairs\n",
        report.r_squared, report.pairs
    );
    emit("causal", a, &report, a.out.as_deref(), &text)
}

fn run_mi(a: &MiArgs) -> Result<()> {
    let table = load_features(&a.features, &a.fields)?;
    let report = information_report(
        &table.matrix(),
        &table.labels(),
        &metric_names(),
        a.bins as usize,
    )?;
    let text = render_root_cause(&report, &[], &[]);
    emit("mi", a, &report, a.out.as_deref(), &text)
}

fn result_of<T: for<'de> Deserialize<'de>>(v: &Value, path: &Path) -> Result<T> {
    serde_json::from_value(v["result"].clone())
        .with_context(|| format!("unexpected result in {}", path.display()))
}

fn run_report(a: &ReportArgs) -> Result<()> {
    let mut evals: Vec<(String, EvalReport)> = Vec::new();
    let mut info: Option<InformationReport> = None;
    let mut probes: Vec<ProbeReport> = Vec::new();
    let mut correlations: Vec<CorrelationReport> = Vec::new();
    let mut sections: Vec<String> = Vec::new();
    for path in &a.reports {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let v: Value =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let stem = path
            .file_stem()
            .map_or(String::new(), |s| s.to_string_lossy().into_owned());
        match v["kind"].as_str() {
            Some("eval") => evals.push((stem, result_of::<EvalResult>(&v, path)?.report)),
            Some("isolation") | Some("leave-one-out") => sections.push(render_subset_study(
                &result_of::<SubsetStudyReport>(&v, path)?,
            )),
            Some("xgain") => {
                let r: CrossGainReport = result_of(&v, path)?;
                evals.push((format!("{stem} (embeddings)"), r.embedding_only));
                evals.push((format!("{stem} (combined)"), r.combined));
            }
            Some("causal") => {
                let r: CausalReport = result_of(&v, path)?;
                sections.push(format!(
                    "{stem}: causal R² = {:.4} over {} pairs\n",
                    r.r_squared, r.pairs
                ));
            }
            Some("mi") => info = Some(result_of(&v, path)?),
            Some("probe") => probes.push(result_of(&v, path)?),
            Some("correlation") => correlations.push(result_of(&v, path)?),
            Some(other) => bail!("{}: cannot render report kind `{other}`", path.display()),
            None => bail!("{}: not a metriscope report", path.display()),
        }
    }
    let mut out = String::new();
    if !evals.is_empty() {
        let rows: Vec<(&str, &EvalReport)> = evals.iter().map(|(n, r)| (n.as_str(), r)).collect();
        out.push_str(&render_table(&rows));
        out.push('\n');
    }
    for s in sections {
        out.push_str(&s);
        out.push('\n');
    }
    if !probes.is_empty() || !correlations.is_empty() || info.is_some() {
        let Some(info) = info else {
            bail!("probe and correlation tables are ordered by mutual information; pass an `mi` report too");
        };
        out.push_str(&render_root_cause(&info, &probes, &correlations));
    }
    print!("{out}");
    Ok(())
}
