//! Labeled datasets, feature tables and revision pairs.

use std::cmp::Ordering;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::metrics::{Extractor, FeatureVector, METRIC_IDS, NUM_METRICS};
use crate::syntax::{parse_function, SourceFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "valid" | "validation" | "dev" => Ok(Split::Valid),
            "test" => Ok(Split::Test),
            _ => Err(Error::InvalidArgument(format!("unknown split `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub id: String,
    pub code: String,
    pub label: u8,
    pub split: Split,
    pub project: Option<String>,
    pub commit: Option<String>,
    /// Fields not interpreted by the loader, kept verbatim.
    pub metadata: Map<String, Value>,
    /// 1-based line in the source file.
    pub line: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LabeledCorpus {
    pub samples: Vec<LabeledSample>,
}

impl LabeledCorpus {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.samples.iter().map(|s| s.label).collect()
    }

    pub fn positives(&self) -> usize {
        self.samples.iter().filter(|s| s.label == 1).count()
    }
}

/// JSON field names of a sample file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldNames {
    pub code: String,
    pub label: String,
    pub id: String,
}

impl Default for FieldNames {
    fn default() -> Self {
        FieldNames {
            code: "func".into(),
            label: "target".into(),
            id: "idx".into(),
        }
    }
}

fn input_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Input {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn value_as_id(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// Reads one JSON object per line. Fails on the first bad line.
pub fn read_jsonl<R: Read>(
    reader: R,
    path: &Path,
    split: Split,
    fields: &FieldNames,
) -> Result<LabeledCorpus> {
    let mut samples = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| input_error(path, lineno, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut obj: Map<String, Value> = match serde_json::from_str(&line) {
            Ok(Value::Object(o)) => o,
            Ok(_) => return Err(input_error(path, lineno, "expected a JSON object")),
            Err(e) => return Err(input_error(path, lineno, format!("malformed JSON: {e}"))),
        };
        let code = match obj.remove(&fields.code) {
            Some(Value::String(s)) => s,
            Some(_) => {
                return Err(input_error(
                    path,
                    lineno,
                    format!("field `{}` is not a string", fields.code),
                ))
            }
            None => {
                return Err(input_error(
                    path,
                    lineno,
                    format!("missing field `{}`", fields.code),
                ))
            }
        };
        let label = match obj.remove(&fields.label) {
            Some(Value::Bool(b)) => u8::from(b),
            Some(Value::Number(n)) if n.as_u64() == Some(0) || n.as_u64() == Some(1) => {
                n.as_u64().unwrap() as u8
            }
            Some(v) => {
                return Err(input_error(
                    path,
                    lineno,
                    format!("field `{}` must be 0 or 1, got {v}", fields.label),
                ))
            }
            None => {
                return Err(input_error(
                    path,
                    lineno,
                    format!("missing field `{}`", fields.label),
                ))
            }
        };
        let id = match obj.get(&fields.id) {
            Some(v) => value_as_id(v).ok_or_else(|| {
                input_error(
                    path,
                    lineno,
                    format!("field `{}` is not a string or number", fields.id),
                )
            })?,
            None => lineno.to_string(),
        };
        let text = |k: &str| obj.get(k).and_then(|v| v.as_str()).map(str::to_string);
        let project = text("project");
        let commit = text("commit_id").or_else(|| text("commit"));
        samples.push(LabeledSample {
            id,
            code,
            label,
            split,
            project,
            commit,
            metadata: obj,
            line: lineno,
        });
    }
    Ok(LabeledCorpus { samples })
}

pub fn load_jsonl(
    path: impl AsRef<Path>,
    split: Split,
    fields: &FieldNames,
) -> Result<LabeledCorpus> {
    let path = path.as_ref();
    read_jsonl(open(path)?, path, split, fields)
}

/// Total order on sample ids: numeric ids first by value, then the rest
/// lexically.
pub fn compare_ids(a: &str, b: &str) -> Ordering {
    match (a.parse::<i128>(), b.parse::<i128>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub id: String,
    pub values: [f64; NUM_METRICS],
    pub label: u8,
    pub parse_error: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub rows: Vec<FeatureRow>,
}

/// Cuts `code` to at most `bytes` bytes at a character boundary.
pub fn truncate_bytes(code: &str, bytes: usize) -> &str {
    if code.len() <= bytes {
        return code;
    }
    let mut end = bytes;
    while !code.is_char_boundary(end) {
        end -= 1;
    }
    &code[..end]
}

/// Features of one function; unparsable or empty input yields zeros with
/// the parse-error flag set.
pub fn features_for_code(extractor: &Extractor, id: &str, code: &str) -> FeatureVector {
    match parse_function(SourceFunction::new(id, code)) {
        Ok(tree) => extractor.extract(&tree),
        Err(_) => FeatureVector {
            values: [0.0; NUM_METRICS],
            parse_error: true,
        },
    }
}

impl FeatureTable {
    /// Extracts features for every sample (in parallel), rows sorted by id.
    pub fn extract(corpus: &LabeledCorpus, extractor: &Extractor, truncate: Option<usize>) -> Self {
        let mut rows: Vec<(usize, FeatureRow)> = corpus
            .samples
            .par_iter()
            .enumerate()
            .map(|(i, s)| {
                let code = match truncate {
                    Some(n) => truncate_bytes(&s.code, n),
                    None => &s.code,
                };
                let fv = features_for_code(extractor, &s.id, code);
                (
                    i,
                    FeatureRow {
                        id: s.id.clone(),
                        values: fv.values,
                        label: s.label,
                        parse_error: fv.parse_error,
                    },
                )
            })
            .collect();
        rows.sort_by(|(i, a), (j, b)| compare_ids(&a.id, &b.id).then(i.cmp(j)));
        FeatureTable {
            rows: rows.into_iter().map(|(_, r)| r).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn matrix(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.values.to_vec()).collect()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.rows.iter().map(|r| r.label).collect()
    }

    pub fn ids(&self) -> Vec<String> {
        self.rows.iter().map(|r| r.id.clone()).collect()
    }

    pub fn column(&self, metric: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.values[metric]).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["id"];
        header.extend(METRIC_IDS);
        header.extend(["label", "parse_error"]);
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = Vec::with_capacity(NUM_METRICS + 3);
            rec.push(r.id.clone());
            rec.extend(r.values.iter().map(|v| v.to_string()));
            rec.push(r.label.to_string());
            rec.push(u8::from(r.parse_error).to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<feature csv>", e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn read_csv<R: Read>(reader: R, path: &Path) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_reader(reader);
        let mut records = r.records();
        let header = match records.next() {
            Some(h) => h?,
            None => return Err(input_error(path, 1, "empty feature file")),
        };
        let mut expected = vec!["id"];
        expected.extend(METRIC_IDS);
        expected.extend(["label", "parse_error"]);
        if header.iter().collect::<Vec<_>>() != expected {
            return Err(input_error(
                path,
                1,
                "unexpected header; expected id,S1..T3,label,parse_error",
            ));
        }
        let mut rows = Vec::new();
        for (i, rec) in records.enumerate() {
            let line = i + 2;
            let rec = rec?;
            if rec.len() != NUM_METRICS + 3 {
                return Err(input_error(
                    path,
                    line,
                    format!("expected {} columns, got {}", NUM_METRICS + 3, rec.len()),
                ));
            }
            let mut values = [0.0; NUM_METRICS];
            for (k, v) in values.iter_mut().enumerate() {
                *v = rec[k + 1].parse().map_err(|_| {
                    input_error(path, line, format!("bad value for {}", METRIC_IDS[k]))
                })?;
            }
            let flag = |s: &str, what: &str| match s {
                "0" => Ok(false),
                "1" => Ok(true),
                _ => Err(input_error(path, line, format!("{what} must be 0 or 1"))),
            };
            rows.push(FeatureRow {
                id: rec[0].to_string(),
                values,
                label: u8::from(flag(&rec[NUM_METRICS + 1], "label")?),
                parse_error: flag(&rec[NUM_METRICS + 2], "parse_error")?,
            });
        }
        Ok(FeatureTable { rows })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::read_csv(open(path)?, path)
    }

    /// Rows at the given indices, in that order.
    pub fn select(&self, indices: &[usize]) -> FeatureTable {
        FeatureTable {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }
}

/// Indices of a stratified sample of size `n`, in ascending order.
/// Per-class quotas use largest remainders, so each class count is within
/// one of its exact proportional share.
pub fn stratified_indices(labels: &[u8], n: usize, seed: u64) -> Result<Vec<usize>> {
    let total = labels.len();
    if n > total {
        return Err(Error::InvalidArgument(format!(
            "sample size {n} exceeds corpus size {total}"
        )));
    }
    let mut classes: Vec<(u8, Vec<usize>)> = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        match classes.iter_mut().find(|(c, _)| *c == l) {
            Some((_, v)) => v.push(i),
            None => classes.push((l, vec![i])),
        }
    }
    classes.sort_by_key(|(c, _)| *c);
    if total == 0 {
        return Ok(Vec::new());
    }
    let mut quotas: Vec<usize> = Vec::new();
    let mut remainders: Vec<(u128, usize)> = Vec::new();
    for (k, (_, members)) in classes.iter().enumerate() {
        let exact = members.len() as u128 * n as u128;
        quotas.push((exact / total as u128) as usize);
        remainders.push((exact % total as u128, k));
    }
    let mut missing = n - quotas.iter().sum::<usize>();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, k) in &remainders {
        if missing == 0 {
            break;
        }
        quotas[k] += 1;
        missing -= 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for ((_, members), q) in classes.iter().zip(quotas) {
        let mut m = members.clone();
        m.shuffle(&mut rng);
        out.extend_from_slice(&m[..q]);
    }
    out.sort_unstable();
    Ok(out)
}

pub fn stratified_subsample(corpus: &LabeledCorpus, n: usize, seed: u64) -> Result<LabeledCorpus> {
    let idx = stratified_indices(&corpus.labels(), n, seed)?;
    Ok(LabeledCorpus {
        samples: idx.into_iter().map(|i| corpus.samples[i].clone()).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RevisionPair {
    pub id: String,
    pub code_before: String,
    pub code_after: String,
    #[serde(default)]
    pub prediction_before: Option<f64>,
    #[serde(default)]
    pub prediction_after: Option<f64>,
}

pub fn read_revision_pairs<R: Read>(reader: R, path: &Path) -> Result<Vec<RevisionPair>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| input_error(path, lineno, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut v: Value = serde_json::from_str(&line)
            .map_err(|e| input_error(path, lineno, format!("malformed JSON: {e}")))?;
        if let Some(id) = v.get("id").and_then(value_as_id) {
            v["id"] = Value::String(id);
        } else if v.get("id").is_none() {
            v["id"] = Value::String(lineno.to_string());
        }
        let pair: RevisionPair =
            serde_json::from_value(v).map_err(|e| input_error(path, lineno, e.to_string()))?;
        for p in [pair.prediction_before, pair.prediction_after]
            .into_iter()
            .flatten()
        {
            if !(0.0..=1.0).contains(&p) {
                return Err(input_error(
                    path,
                    lineno,
                    format!("prediction {p} outside [0, 1]"),
                ));
            }
        }
        out.push(pair);
    }
    Ok(out)
}

pub fn load_revision_pairs(path: impl AsRef<Path>) -> Result<Vec<RevisionPair>> {
    let path = path.as_ref();
    read_revision_pairs(open(path)?, path)
}

/// Metric and prediction differences over revision pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricDeltas {
    pub ids: Vec<String>,
    /// after - before, one row per pair.
    pub delta_mu: Vec<[f64; NUM_METRICS]>,
    /// prediction_after - prediction_before when both are present.
    pub delta_y: Vec<Option<f64>>,
    /// Either version failed to parse.
    pub flagged: Vec<bool>,
}

impl MetricDeltas {
    /// Rows usable for regression: unflagged with a prediction delta.
    pub fn regression_rows(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..self.ids.len() {
            if let (false, Some(dy)) = (self.flagged[i], self.delta_y[i]) {
                x.push(self.delta_mu[i].to_vec());
                y.push(dy);
            }
        }
        (x, y)
    }
}

pub fn compute_metric_deltas(
    pairs: &[RevisionPair],
    extractor: &Extractor,
) -> Result<MetricDeltas> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("no revision pairs".into()));
    }
    let rows: Vec<([f64; NUM_METRICS], bool)> = pairs
        .par_iter()
        .map(|p| {
            let before = features_for_code(extractor, &p.id, &p.code_before);
            let after = features_for_code(extractor, &p.id, &p.code_after);
            let d: [f64; NUM_METRICS] = std::array::from_fn(|k| after.values[k] - before.values[k]);
            (d, before.parse_error || after.parse_error)
        })
        .collect();
    let deltas = MetricDeltas {
        ids: pairs.iter().map(|p| p.id.clone()).collect(),
        delta_mu: rows.iter().map(|r| r.0).collect(),
        delta_y: pairs
            .iter()
            .map(|p| match (p.prediction_before, p.prediction_after) {
                (Some(b), Some(a)) => Some(a - b),
                _ => None,
            })
            .collect(),
        flagged: rows.iter().map(|r| r.1).collect(),
    };
    if deltas.flagged.iter().all(|&f| f) {
        return Err(Error::InvalidArgument(
            "no revision pair parses cleanly".into(),
        ));
    }
    Ok(deltas)
}

/// Reads `id,v1,...,vd` rows. A first row whose second column is not a
/// number is taken as a header.
pub fn read_id_vectors<R: Read>(reader: R, path: &Path) -> Result<Vec<(String, Vec<f64>)>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut out: Vec<(String, Vec<f64>)> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 1;
        let rec = rec?;
        if rec.len() < 2 {
            return Err(input_error(
                path,
                line,
                "expected an id and at least one value",
            ));
        }
        let parsed: std::result::Result<Vec<f64>, _> = rec
            .iter()
            .skip(1)
            .map(|s| s.trim().parse::<f64>())
            .collect();
        match parsed {
            Ok(values) => {
                if let Some((_, first)) = out.first() {
                    if first.len() != values.len() {
                        return Err(input_error(
                            path,
                            line,
                            format!("expected {} values, got {}", first.len(), values.len()),
                        ));
                    }
                }
                out.push((rec[0].to_string(), values));
            }
            Err(_) if line == 1 => continue,
            Err(_) => return Err(input_error(path, line, "non-numeric value")),
        }
    }
    Ok(out)
}

/// Prediction file: `id,score` with scores in [0, 1].
pub fn load_predictions(path: impl AsRef<Path>) -> Result<Vec<(String, f64)>> {
    let path = path.as_ref();
    let rows = read_id_vectors(open(path)?, path)?;
    let mut out = Vec::with_capacity(rows.len());
    for (i, (id, v)) in rows.into_iter().enumerate() {
        if v.len() != 1 || !(0.0..=1.0).contains(&v[0]) {
            return Err(input_error(path, i + 1, "expected one score in [0, 1]"));
        }
        out.push((id, v[0]));
    }
    Ok(out)
}

/// Embedding file: `id,e1,...,ed`.
pub fn load_embeddings(path: impl AsRef<Path>) -> Result<Vec<(String, Vec<f64>)>> {
    let path = path.as_ref();
    read_id_vectors(open(path)?, path)
}

/// Reorders `values` to follow `ids`; every id must be present exactly once.
pub fn align<T: Clone>(ids: &[String], values: &[(String, T)]) -> Result<Vec<T>> {
    let mut index = std::collections::HashMap::with_capacity(values.len());
    for (id, v) in values {
        if index.insert(id.as_str(), v).is_some() {
            return Err(Error::Misaligned(format!("duplicate id {id}")));
        }
    }
    let mut missing = Vec::new();
    let mut out = Vec::with_capacity(ids.len());
    for id in ids {
        match index.get(id.as_str()) {
            Some(v) => out.push((*v).clone()),
            None => missing.push(id.as_str()),
        }
    }
    if !missing.is_empty() {
        let shown: Vec<&str> = missing.iter().take(5).copied().collect();
        return Err(Error::Misaligned(format!(
            "{} ids have no entry (first: {})",
            missing.len(),
            shown.join(", ")
        )));
    }
    Ok(out)
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(lines: &str) -> Result<LabeledCorpus> {
        read_jsonl(
            lines.as_bytes(),
            Path::new("mem.jsonl"),
            Split::Train,
            &FieldNames::default(),
        )
    }

    #[test]
    fn loads_minimal_line() {
        let c = corpus(r#"{"func":"void f(){}","target":0}"#).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.samples[0].label, 0);
        assert_eq!(c.samples[0].id, "1");
    }

    #[test]
    fn keeps_unknown_fields() {
        let c =
            corpus(r#"{"func":"x","target":1,"idx":7,"project":"p","cwe":["CWE-787"]}"#).unwrap();
        let s = &c.samples[0];
        assert_eq!((s.id.as_str(), s.label), ("7", 1));
        assert_eq!(s.project.as_deref(), Some("p"));
        assert!(s.metadata.contains_key("cwe"));
        assert!(s.metadata.contains_key("project"));
    }

    #[test]
    fn malformed_line_fails_with_line_number() {
        let mut text = String::new();
        for i in 0..10 {
            if i == 6 {
                text.push_str("{not json\n");
            } else {
                text.push_str(&format!(
                    "{{\"func\":\"void f(){{}}\",\"target\":0,\"idx\":{i}}}\n"
                ));
            }
        }
        match corpus(&text) {
            Err(Error::Input { line, .. }) => assert_eq!(line, 7),
            other => panic!("expected input error, got {other:?}"),
        }
    }

    #[test]
    fn missing_field_is_named() {
        let err = corpus(r#"{"func":"x"}"#).unwrap_err().to_string();
        assert!(err.contains("target"), "{err}");
        let err = corpus(r#"{"target":0}"#).unwrap_err().to_string();
        assert!(err.contains("func"), "{err}");
    }

    #[test]
    fn field_overrides() {
        let fields = FieldNames {
            code: "code".into(),
            label: "y".into(),
            id: "name".into(),
        };
        let c = read_jsonl(
            r#"{"code":"void f(){}","y":true,"name":"a"}"#.as_bytes(),
            Path::new("m"),
            Split::Test,
            &fields,
        )
        .unwrap();
        assert_eq!((c.samples[0].id.as_str(), c.samples[0].label), ("a", 1));
    }

    #[test]
    fn id_order() {
        let mut ids = vec!["b", "10", "9", "a", "-1"];
        ids.sort_by(|a, b| compare_ids(a, b));
        assert_eq!(ids, ["-1", "9", "10", "a", "b"]);
    }

    #[test]
    fn stratification_is_exact() {
        let labels: Vec<u8> = (0..100).map(|i| u8::from(i % 10 == 0)).collect();
        let idx = stratified_indices(&labels, 50, 3).unwrap();
        assert_eq!(idx.len(), 50);
        assert_eq!(idx.iter().filter(|&&i| labels[i] == 1).count(), 5);
        assert_eq!(idx, stratified_indices(&labels, 50, 3).unwrap());
        assert!(stratified_indices(&labels, 101, 3).is_err());
    }

    #[test]
    fn truncation_respects_char_boundaries() {
        assert_eq!(truncate_bytes("aé", 2), "a");
        assert_eq!(truncate_bytes("abc", 10), "abc");
    }

    #[test]
    fn id_vectors_with_and_without_header() {
        let with = read_id_vectors("id,score\na,0.5\nb,1\n".as_bytes(), Path::new("p")).unwrap();
        let without = read_id_vectors("a,0.5\nb,1\n".as_bytes(), Path::new("p")).unwrap();
        assert_eq!(with, without);
        assert!(read_id_vectors("a,1,2\nb,1\n".as_bytes(), Path::new("p")).is_err());
    }

    #[test]
    fn alignment() {
        let ids = vec!["b".to_string(), "a".to_string()];
        let vals = vec![("a".to_string(), 1), ("b".to_string(), 2)];
        assert_eq!(align(&ids, &vals).unwrap(), [2, 1]);
        assert!(align(&["c".to_string()], &vals).is_err());
    }
}
