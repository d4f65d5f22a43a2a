//! Task-independent features of a premise/hypothesis pair.
//!
//! Every feature is a namespaced string identifier:
//!
//! | family               | example                                   |
//! |----------------------|-------------------------------------------|
//! | hypothesis n-grams   | `sleeping@hypothesis`, `is sleeping@hypothesis` |
//! | premise n-grams      | `dog@premise`                             |
//! | hypothesis length    | `hypo-len<5`, `hypo-len∈[5,9)`            |
//! | length ratio         | `len-ratio∈[0.5,0.75)`                    |
//! | lexical overlap      | `lex-overlap>0.8`, `full-lex-overlap`     |
//! | hypothesis-only pred | `hypo-only-pred=2`                        |
//! | dummy                | `null`                                    |
//!
//! N-gram features always end in `@hypothesis` or `@premise`; no other
//! family produces those suffixes, so the namespaces cannot collide.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

use crate::data::{Instance, Label};
use crate::error::{Error, Result};

pub const HYPOTHESIS_SUFFIX: &str = "@hypothesis";
pub const PREMISE_SUFFIX: &str = "@premise";
pub const NULL_FEATURE: &str = "null";
pub const FULL_OVERLAP_FEATURE: &str = "full-lex-overlap";
const HYPO_LEN_PREFIX: &str = "hypo-len";
const RATIO_PREFIX: &str = "len-ratio";
const OVERLAP_PREFIX: &str = "lex-overlap>";
const HYPO_PRED_PREFIX: &str = "hypo-only-pred=";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureId(Arc<str>);

impl FeatureId {
    pub fn new(name: impl Into<String>) -> Self {
        FeatureId(Arc::from(name.into()))
    }

    pub fn null() -> Self {
        FeatureId(Arc::from(NULL_FEATURE))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn kind(&self) -> FeatureKind<'_> {
        if let Some(gram) = self.0.strip_suffix(HYPOTHESIS_SUFFIX) {
            FeatureKind::Ngram(Side::Hypothesis, gram)
        } else if let Some(gram) = self.0.strip_suffix(PREMISE_SUFFIX) {
            FeatureKind::Ngram(Side::Premise, gram)
        } else {
            FeatureKind::Other
        }
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for FeatureId {
    fn from(s: &str) -> Self {
        FeatureId(Arc::from(s))
    }
}

impl std::borrow::Borrow<str> for FeatureId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Hypothesis,
    Premise,
}

/// Coarse family of a feature, as needed for token masking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind<'a> {
    /// A unigram or bigram; the payload is the space-joined tokens.
    Ngram(Side, &'a str),
    /// Length, ratio, overlap, prediction and dummy features.
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub length_bucket_edges: Vec<u32>,
    pub ratio_bucket_edges: Vec<f64>,
    pub overlap_thresholds: Vec<f64>,
    pub use_hypo_pred: bool,
    /// Emit `@premise` n-grams alongside the hypothesis ones.
    pub premise_ngrams: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            length_bucket_edges: vec![5, 9, 13, 20],
            ratio_bucket_edges: vec![0.5, 0.75, 1.0, 1.5],
            overlap_thresholds: vec![0.2, 0.4, 0.6, 0.8, 0.9],
            use_hypo_pred: false,
            premise_ngrams: true,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.length_bucket_edges.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config("length_bucket_edges must be strictly ascending".into()));
        }
        let ratios = &self.ratio_bucket_edges;
        if ratios.iter().any(|r| !r.is_finite() || *r <= 0.0) || !ratios.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config(
                "ratio_bucket_edges must be positive, finite and strictly ascending".into(),
            ));
        }
        let ts = &self.overlap_thresholds;
        if ts.iter().any(|t| !(*t > 0.0 && *t < 1.0)) || !ts.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config(
                "overlap_thresholds must lie in (0, 1) and be strictly ascending".into(),
            ));
        }
        Ok(())
    }
}

/// Source of the hypothesis-only prediction feature.
pub trait HypoPredictor: Sync {
    fn predict_label(&self, hypothesis: &str) -> Label;
}

/// A deduplicated, sorted set of features. Always contains `null`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FeatureVector(Vec<FeatureId>);

impl FeatureVector {
    pub fn from_features(mut features: Vec<FeatureId>) -> Self {
        features.sort_unstable();
        features.dedup();
        FeatureVector(features)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0
            .binary_search_by(|f| f.as_str().cmp(name))
            .is_ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, FeatureId> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[FeatureId] {
        &self.0
    }
}

impl<'a> IntoIterator for &'a FeatureVector {
    type Item = &'a FeatureId;
    type IntoIter = std::slice::Iter<'a, FeatureId>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

fn is_punctuation(c: char) -> bool {
    c.general_category_group() == GeneralCategoryGroup::Punctuation
}

/// Whitespace split, lowercase, strip surrounding punctuation, drop empties.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|piece| {
            let stripped = piece.trim_matches(is_punctuation);
            (!stripped.is_empty()).then(|| stripped.to_lowercase())
        })
        .collect()
}

fn push_ngrams(tokens: &[String], suffix: &str, out: &mut Vec<FeatureId>) {
    // One scratch buffer and one allocation per feature; `format!` dominated
    // extraction time here.
    let mut name = String::new();
    let mut emit = |parts: &[&str]| {
        name.clear();
        for p in parts {
            name.push_str(p);
        }
        name.push_str(suffix);
        out.push(FeatureId(Arc::from(name.as_str())));
    };
    for tok in tokens {
        emit(&[tok]);
    }
    for pair in tokens.windows(2) {
        emit(&[&pair[0], " ", &pair[1]]);
    }
}

fn ngrams_of(hyp: &[String], prem: &[String], premise_ngrams: bool, out: &mut Vec<FeatureId>) {
    push_ngrams(hyp, HYPOTHESIS_SUFFIX, out);
    if premise_ngrams {
        push_ngrams(prem, PREMISE_SUFFIX, out);
    }
}

/// Unigrams and adjacent bigrams of each side, kept in separate namespaces.
pub fn ngram_features(instance: &Instance) -> HashSet<FeatureId> {
    let mut out = Vec::new();
    ngrams_of(
        &tokenize(&instance.hypothesis),
        &tokenize(&instance.premise),
        true,
        &mut out,
    );
    out.into_iter().collect()
}

pub fn hypo_len_feature(hyp_len: usize, edges: &[u32]) -> FeatureId {
    let len = hyp_len as u64;
    let name = match edges.iter().position(|&e| len < e as u64) {
        Some(0) => format!("{HYPO_LEN_PREFIX}<{}", edges[0]),
        Some(i) => format!("{HYPO_LEN_PREFIX}∈[{},{})", edges[i - 1], edges[i]),
        None => format!("{HYPO_LEN_PREFIX}∈[{},∞)", edges.last().copied().unwrap_or(0)),
    };
    FeatureId::new(name)
}

/// Ratio bucket; `None` (empty premise) falls into the overflow bucket.
pub fn ratio_feature(ratio: Option<f64>, edges: &[f64]) -> FeatureId {
    let bucket = ratio.and_then(|r| edges.iter().position(|&e| r < e));
    let name = match bucket {
        Some(0) => format!("{RATIO_PREFIX}∈[0,{})", edges[0]),
        Some(i) => format!("{RATIO_PREFIX}∈[{},{})", edges[i - 1], edges[i]),
        None => format!("{RATIO_PREFIX}∈[{},∞)", edges.last().copied().unwrap_or(0.0)),
    };
    FeatureId::new(name)
}

fn length_of(hyp: &[String], prem: &[String], config: &FeatureConfig, out: &mut Vec<FeatureId>) {
    out.push(hypo_len_feature(hyp.len(), &config.length_bucket_edges));
    let ratio = (!prem.is_empty()).then(|| hyp.len() as f64 / prem.len() as f64);
    out.push(ratio_feature(ratio, &config.ratio_bucket_edges));
}

pub fn length_features(instance: &Instance, config: &FeatureConfig) -> HashSet<FeatureId> {
    let mut out = Vec::new();
    length_of(
        &tokenize(&instance.hypothesis),
        &tokenize(&instance.premise),
        config,
        &mut out,
    );
    out.into_iter().collect()
}

/// Fraction of hypothesis token positions whose token occurs in the premise.
pub fn lexical_overlap(hyp: &[String], prem: &[String]) -> f64 {
    if hyp.is_empty() {
        return 0.0;
    }
    let premise: HashSet<&str> = prem.iter().map(String::as_str).collect();
    let shared = hyp.iter().filter(|t| premise.contains(t.as_str())).count();
    shared as f64 / hyp.len() as f64
}

fn overlap_of(hyp: &[String], prem: &[String], config: &FeatureConfig, out: &mut Vec<FeatureId>) {
    let overlap = lexical_overlap(hyp, prem);
    for t in config.overlap_thresholds.iter().filter(|&&t| overlap > t) {
        out.push(FeatureId::new(format!("{OVERLAP_PREFIX}{t}")));
    }
    if !hyp.is_empty() && overlap == 1.0 {
        out.push(FeatureId(Arc::from(FULL_OVERLAP_FEATURE)));
    }
}

pub fn overlap_features(instance: &Instance, config: &FeatureConfig) -> HashSet<FeatureId> {
    let mut out = Vec::new();
    overlap_of(
        &tokenize(&instance.hypothesis),
        &tokenize(&instance.premise),
        config,
        &mut out,
    );
    out.into_iter().collect()
}

pub fn hypo_pred_feature(label: Label) -> FeatureId {
    FeatureId::new(format!("{HYPO_PRED_PREFIX}{}", label.index()))
}

/// Index of the largest probability; ties go to the lowest index.
pub(crate) fn argmax3(probs: &[f64; 3]) -> usize {
    let mut best = 0;
    for i in 1..3 {
        if probs[i] > probs[best] {
            best = i;
        }
    }
    best
}

/// Full feature set of one instance.
///
/// With `use_hypo_pred`, the prediction comes from `predictor` when given,
/// otherwise from the argmax of the instance's precomputed `model_probs`.
pub fn extract_features(
    instance: &Instance,
    config: &FeatureConfig,
    predictor: Option<&dyn HypoPredictor>,
) -> Result<FeatureVector> {
    let hyp = tokenize(&instance.hypothesis);
    let prem = tokenize(&instance.premise);
    let mut out = Vec::with_capacity(2 * (hyp.len() + prem.len()) + config.overlap_thresholds.len() + 5);

    ngrams_of(&hyp, &prem, config.premise_ngrams, &mut out);
    length_of(&hyp, &prem, config, &mut out);
    overlap_of(&hyp, &prem, config, &mut out);

    if config.use_hypo_pred {
        let label = match (predictor, &instance.model_probs) {
            (Some(p), _) => p.predict_label(&instance.hypothesis),
            (None, Some(probs)) => Label::from_index(argmax3(probs)).expect("index below 3"),
            (None, None) => return Err(Error::MissingPrediction(instance.id.clone())),
        };
        out.push(hypo_pred_feature(label));
    }
    out.push(FeatureId::null());
    Ok(FeatureVector::from_features(out))
}
