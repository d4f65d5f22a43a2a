//! Records, datasets and the two line-delimited record schemas.
//!
//! The native schema is one JSON object per line with the keys `id`,
//! `premise`, `hypothesis`, `label`, an optional `model_probs` triple and an
//! optional `source` tag. The SNLI schema uses `sentence1`, `sentence2`,
//! `gold_label` and `pairID`; pairs whose gold label is `-` carry no
//! annotator consensus and are skipped.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Tolerance on the sum of a probability triple.
pub const PROB_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Entailment,
    Neutral,
    Contradiction,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Entailment, Label::Neutral, Label::Contradiction];

    pub fn index(self) -> usize {
        match self {
            Label::Entailment => 0,
            Label::Neutral => 1,
            Label::Contradiction => 2,
        }
    }

    pub fn from_index(index: usize) -> Option<Label> {
        Label::ALL.get(index).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Entailment => "entailment",
            Label::Neutral => "neutral",
            Label::Contradiction => "contradiction",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "entailment" => Ok(Label::Entailment),
            "neutral" => Ok(Label::Neutral),
            "contradiction" => Ok(Label::Contradiction),
            _ => Err(format!("unknown label {s:?}")),
        }
    }
}

/// Where an instance came from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    #[default]
    Original,
    Generated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub id: String,
    pub premise: String,
    pub hypothesis: String,
    pub label: Label,
    /// External model probabilities in label-index order.
    pub model_probs: Option<[f64; 3]>,
    pub source: Source,
}

impl Instance {
    pub fn new(
        id: impl Into<String>,
        premise: impl Into<String>,
        hypothesis: impl Into<String>,
        label: Label,
    ) -> Self {
        Instance {
            id: id.into(),
            premise: premise.into(),
            hypothesis: hypothesis.into(),
            label,
            model_probs: None,
            source: Source::Original,
        }
    }

    pub fn with_probs(mut self, probs: [f64; 3]) -> Self {
        self.model_probs = Some(probs);
        self
    }

    pub fn with_source(mut self, source: Source) -> Self {
        self.source = source;
        self
    }
}

/// An ordered collection of instances with unique ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub name: String,
    instances: Vec<Instance>,
}

impl Dataset {
    pub fn empty(name: impl Into<String>) -> Self {
        Dataset {
            name: name.into(),
            instances: Vec::new(),
        }
    }

    /// Builds a dataset, rejecting duplicate ids.
    pub fn new(name: impl Into<String>, instances: Vec<Instance>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(instances.len());
        for (i, inst) in instances.iter().enumerate() {
            if !seen.insert(inst.id.as_str()) {
                return Err(Error::DuplicateId {
                    id: inst.id.clone(),
                    line: i + 1,
                });
            }
        }
        Ok(Dataset {
            name: name.into(),
            instances,
        })
    }

    pub(crate) fn from_unique(name: impl Into<String>, instances: Vec<Instance>) -> Self {
        Dataset {
            name: name.into(),
            instances,
        }
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn into_instances(self) -> Vec<Instance> {
        self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Instance> {
        self.instances.iter()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.instances.iter().map(|i| i.id.as_str())
    }
}

impl<'a> IntoIterator for &'a Dataset {
    type Item = &'a Instance;
    type IntoIter = std::slice::Iter<'a, Instance>;

    fn into_iter(self) -> Self::IntoIter {
        self.instances.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Schema {
    #[default]
    Native,
    Snli,
}

/// Counts gathered while reading a dataset.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReadStats {
    pub records: usize,
    pub skipped: usize,
}

fn field_str<'a>(obj: &'a serde_json::Map<String, Value>, key: &str, line: usize) -> Result<&'a str> {
    match obj.get(key) {
        Some(Value::String(s)) => Ok(s),
        Some(_) => Err(Error::parse(line, format!("field {key:?} is not a string"))),
        None => Err(Error::parse(line, format!("missing field {key:?}"))),
    }
}

fn optional_id(obj: &serde_json::Map<String, Value>, key: &str, line: usize) -> Result<Option<String>> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(Value::Number(n)) => Ok(Some(n.to_string())),
        Some(_) => Err(Error::parse(line, format!("field {key:?} must be a string"))),
    }
}

fn parse_probs(value: &Value, line: usize) -> Result<[f64; 3]> {
    let arr = value
        .as_array()
        .filter(|a| a.len() == 3)
        .ok_or_else(|| Error::parse(line, "model_probs must be an array of three numbers"))?;
    let mut probs = [0.0; 3];
    for (slot, v) in probs.iter_mut().zip(arr) {
        *slot = v
            .as_f64()
            .ok_or_else(|| Error::parse(line, "model_probs must be an array of three numbers"))?;
    }
    validate_probs(&probs).map_err(|m| Error::parse(line, m))?;
    Ok(probs)
}

pub(crate) fn validate_probs(probs: &[f64; 3]) -> std::result::Result<(), String> {
    if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(format!("model_probs {probs:?} outside [0, 1]"));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
        return Err(format!("model_probs sum to {sum}, expected 1"));
    }
    Ok(())
}

/// Parses one record. `Ok(None)` is the skip marker for SNLI pairs without a
/// gold label. Missing ids become `<dataset>:<line>`.
pub fn parse_instance(
    line_text: &str,
    schema: Schema,
    dataset_name: &str,
    line: usize,
) -> Result<Option<Instance>> {
    let value: Value =
        serde_json::from_str(line_text).map_err(|e| Error::parse(line, e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::parse(line, "record is not an object"))?;

    let (premise_key, hypothesis_key, label_key, id_key) = match schema {
        Schema::Native => ("premise", "hypothesis", "label", "id"),
        Schema::Snli => ("sentence1", "sentence2", "gold_label", "pairID"),
    };

    let label_text = field_str(obj, label_key, line)?;
    if schema == Schema::Snli && label_text == "-" {
        return Ok(None);
    }
    let label: Label = label_text.parse().map_err(|m| Error::parse(line, m))?;
    let premise = field_str(obj, premise_key, line)?.to_owned();
    let hypothesis = field_str(obj, hypothesis_key, line)?.to_owned();
    let id = optional_id(obj, id_key, line)?.unwrap_or_else(|| format!("{dataset_name}:{line}"));

    let (model_probs, source) = match schema {
        Schema::Native => {
            let probs = match obj.get("model_probs") {
                None | Some(Value::Null) => None,
                Some(v) => Some(parse_probs(v, line)?),
            };
            let source = match obj.get("source") {
                None | Some(Value::Null) => Source::Original,
                Some(v) => serde_json::from_value(v.clone())
                    .map_err(|_| Error::parse(line, format!("unknown source {v}")))?,
            };
            (probs, source)
        }
        Schema::Snli => (None, Source::Original),
    };

    Ok(Some(Instance {
        id,
        premise,
        hypothesis,
        label,
        model_probs,
        source,
    }))
}

/// Dataset name used for id synthesis: the file stem.
pub fn dataset_name_for(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_owned())
}

pub fn read_dataset_with_stats(path: &Path, schema: Schema) -> Result<(Dataset, ReadStats)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = dataset_name_for(path);
    let mut stats = ReadStats::default();
    let mut instances = Vec::new();
    let mut seen = HashSet::new();

    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let text = line.map_err(|e| Error::io(path, e))?;
        if text.trim().is_empty() {
            continue;
        }
        stats.records += 1;
        match parse_instance(&text, schema, &name, line_no)? {
            Some(inst) => {
                if !seen.insert(inst.id.clone()) {
                    return Err(Error::DuplicateId {
                        id: inst.id,
                        line: line_no,
                    });
                }
                instances.push(inst);
            }
            None => stats.skipped += 1,
        }
    }
    Ok((Dataset::from_unique(name, instances), stats))
}

/// Reads a dataset in file order. Skipped records are reported through `log`.
pub fn read_dataset(path: &Path, schema: Schema) -> Result<Dataset> {
    let (dataset, stats) = read_dataset_with_stats(path, schema)?;
    if stats.skipped > 0 {
        log::warn!("{}: skipped: {}", path.display(), stats.skipped);
    }
    Ok(dataset)
}

#[derive(Serialize)]
struct NativeRecord<'a> {
    id: &'a str,
    premise: &'a str,
    hypothesis: &'a str,
    label: Label,
    #[serde(skip_serializing_if = "Option::is_none")]
    model_probs: Option<&'a [f64; 3]>,
    source: Source,
}

/// Serializes one instance as a native-schema line (no trailing newline).
pub fn to_native_line(inst: &Instance) -> String {
    let record = NativeRecord {
        id: &inst.id,
        premise: &inst.premise,
        hypothesis: &inst.hypothesis,
        label: inst.label,
        model_probs: inst.model_probs.as_ref(),
        source: inst.source,
    };
    // Shortest round-trip float formatting keeps every bit of the probabilities.
    serde_json::to_string(&record).expect("record serialization is infallible")
}

pub fn write_instances<'a, W: Write>(
    out: &mut W,
    instances: impl IntoIterator<Item = &'a Instance>,
) -> std::io::Result<()> {
    for inst in instances {
        out.write_all(to_native_line(inst).as_bytes())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_dataset(dataset: &Dataset, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_instances(&mut out, dataset)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, schema: Schema) -> Result<Option<Instance>> {
        parse_instance(text, schema, "toy", 7)
    }

    #[test]
    fn label_index_round_trip() {
        for i in 0..3 {
            assert_eq!(Label::from_index(i).unwrap().index(), i);
        }
        assert_eq!(Label::from_index(3), None);
        assert_eq!(Label::Entailment.index(), 0);
        assert_eq!(Label::Neutral.index(), 1);
        assert_eq!(Label::Contradiction.index(), 2);
    }

    #[test]
    fn native_record() {
        let inst = parse(
            r#"{"premise":"A man runs.","hypothesis":"A man moves.","label":"entailment"}"#,
            Schema::Native,
        )
        .unwrap()
        .unwrap();
        assert_eq!(inst.label, Label::Entailment);
        assert_eq!(inst.label.index(), 0);
        assert_eq!(inst.premise, "A man runs.");
        assert_eq!(inst.id, "toy:7");
        assert_eq!(inst.source, Source::Original);
    }

    #[test]
    fn labels_are_case_insensitive() {
        let inst = parse(r#"{"premise":"p","hypothesis":"h","label":"NEUTRAL"}"#, Schema::Native)
            .unwrap()
            .unwrap();
        assert_eq!(inst.label, Label::Neutral);
    }

    #[test]
    fn snli_without_consensus_is_skipped() {
        let r = parse(r#"{"sentence1":"p","sentence2":"h","gold_label":"-"}"#, Schema::Snli).unwrap();
        assert!(r.is_none());
    }

    #[test]
    fn snli_record_uses_pair_id() {
        let inst = parse(
            r#"{"sentence1":"p","sentence2":"h","gold_label":"contradiction","pairID":"abc"}"#,
            Schema::Snli,
        )
        .unwrap()
        .unwrap();
        assert_eq!(inst.id, "abc");
        assert_eq!(inst.label, Label::Contradiction);
    }

    #[test]
    fn unknown_label_is_positioned_error() {
        let err = parse(r#"{"premise":"p","hypothesis":"h","label":"maybe"}"#, Schema::Native)
            .unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 7);
                assert!(message.contains("maybe"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_structure() {
        assert!(matches!(parse("[1,2]", Schema::Native), Err(Error::Parse { .. })));
        assert!(matches!(parse("{", Schema::Native), Err(Error::Parse { .. })));
        assert!(matches!(
            parse(r#"{"premise":"p","label":"neutral"}"#, Schema::Native),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse(r#"{"premise":3,"hypothesis":"h","label":"neutral"}"#, Schema::Native),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn malformed_probs() {
        for probs in ["[0.5,0.5]", "[0.5,0.6,0.1]", "[1.2,-0.1,-0.1]", r#"["a",0,1]"#] {
            let text = format!(
                r#"{{"premise":"p","hypothesis":"h","label":"neutral","model_probs":{probs}}}"#
            );
            assert!(matches!(parse(&text, Schema::Native), Err(Error::Parse { .. })), "{probs}");
        }
        let ok = parse(
            r#"{"premise":"p","hypothesis":"h","label":"neutral","model_probs":[0.2,0.3,0.5]}"#,
            Schema::Native,
        )
        .unwrap()
        .unwrap();
        assert_eq!(ok.model_probs, Some([0.2, 0.3, 0.5]));
    }

    #[test]
    fn empty_texts_are_accepted() {
        let inst = parse(r#"{"premise":"","hypothesis":"","label":"neutral"}"#, Schema::Native)
            .unwrap()
            .unwrap();
        assert!(inst.premise.is_empty() && inst.hypothesis.is_empty());
    }

    #[test]
    fn native_line_field_order() {
        let inst = Instance::new("x", "p", "h", Label::Neutral).with_probs([0.1, 0.2, 0.7]);
        assert_eq!(
            to_native_line(&inst),
            r#"{"id":"x","premise":"p","hypothesis":"h","label":"neutral","model_probs":[0.1,0.2,0.7],"source":"original"}"#
        );
    }

    #[test]
    fn duplicate_ids_rejected() {
        let a = Instance::new("a", "p", "h", Label::Neutral);
        assert!(matches!(
            Dataset::new("d", vec![a.clone(), a]),
            Err(Error::DuplicateId { .. })
        ));
    }
}
