//! Bag-of-words hypothesis-only classifier and confidence filtering.
//!
//! `BowModel` is a multinomial naive Bayes model over hypothesis tokens with
//! additive smoothing and one shared out-of-vocabulary bucket. It stands in
//! for a neural hypothesis-only model: it supplies the `hypo-only-pred=<i>`
//! feature and, optionally, the probabilities used by the confidence filter.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::features::{argmax3, tokenize, HypoPredictor};

pub const MODEL_FORMAT: &str = "zdebias-bow";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct BowModel {
    vocab: HashMap<String, usize>,
    /// Token strings by index; the OOV bucket has index `tokens.len()`.
    tokens: Vec<String>,
    log_priors: [f64; 3],
    log_likelihoods: Vec<[f64; 3]>,
    smoothing: f64,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    smoothing: f64,
    log_priors: [f64; 3],
    vocab: Vec<String>,
    /// One row per vocab entry plus the trailing OOV row.
    log_likelihoods: Vec<[f64; 3]>,
}

impl BowModel {
    pub fn train(dataset: &Dataset, smoothing: f64) -> Result<BowModel> {
        if dataset.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if !(smoothing > 0.0 && smoothing.is_finite()) {
            return Err(Error::Config(format!("smoothing must be positive, got {smoothing}")));
        }

        let mut label_docs = [0u64; 3];
        let mut token_counts: HashMap<String, [u64; 3]> = HashMap::new();
        for inst in dataset {
            let l = inst.label.index();
            label_docs[l] += 1;
            for tok in tokenize(&inst.hypothesis) {
                token_counts.entry(tok).or_default()[l] += 1;
            }
        }

        let mut tokens: Vec<String> = token_counts.keys().cloned().collect();
        tokens.sort_unstable();
        let vocab: HashMap<String, usize> =
            tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();

        let n_docs = dataset.len() as f64;
        let log_priors =
            label_docs.map(|c| ((c as f64 + smoothing) / (n_docs + 3.0 * smoothing)).ln());

        let mut label_tokens = [0u64; 3];
        for c in token_counts.values() {
            for l in 0..3 {
                label_tokens[l] += c[l];
            }
        }
        let buckets = (tokens.len() + 1) as f64;
        let denom = label_tokens.map(|t| t as f64 + smoothing * buckets);
        let row = |c: [u64; 3]| -> [f64; 3] {
            [0, 1, 2].map(|l| ((c[l] as f64 + smoothing) / denom[l]).ln())
        };
        let mut log_likelihoods: Vec<[f64; 3]> = tokens.iter().map(|t| row(token_counts[t])).collect();
        log_likelihoods.push(row([0; 3]));

        Ok(BowModel {
            vocab,
            tokens,
            log_priors,
            log_likelihoods,
            smoothing,
        })
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn log_priors(&self) -> [f64; 3] {
        self.log_priors
    }

    pub fn vocab_size(&self) -> usize {
        self.tokens.len()
    }

    /// Smoothed log-likelihood of `token`; unknown tokens use the OOV bucket.
    pub fn log_likelihood(&self, token: &str, label: Label) -> f64 {
        let i = self.vocab.get(token).copied().unwrap_or(self.tokens.len());
        self.log_likelihoods[i][label.index()]
    }

    /// Posterior over the three labels given the hypothesis alone.
    pub fn predict_proba(&self, hypothesis: &str) -> [f64; 3] {
        let mut scores = self.log_priors;
        for tok in tokenize(hypothesis) {
            let i = self.vocab.get(&tok).copied().unwrap_or(self.tokens.len());
            for l in 0..3 {
                scores[l] += self.log_likelihoods[i][l];
            }
        }
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exp = scores.map(|s| (s - max).exp());
        let sum: f64 = exp.iter().sum();
        exp.map(|e| e / sum)
    }

    /// Most probable label; ties go to the lowest label index.
    pub fn argmax_label(&self, hypothesis: &str) -> Label {
        Label::from_index(argmax3(&self.predict_proba(hypothesis))).expect("index below 3")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = ModelFile {
            format: MODEL_FORMAT.to_owned(),
            version: MODEL_VERSION,
            smoothing: self.smoothing,
            log_priors: self.log_priors,
            vocab: self.tokens.clone(),
            log_likelihoods: self.log_likelihoods.clone(),
        };
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(f);
        serde_json::to_writer(&mut out, &file)
            .map_err(std::io::Error::from)
            .and_then(|_| out.write_all(b"\n"))
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<BowModel> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        let file: ModelFile = serde_json::from_reader(BufReader::new(f))
            .map_err(|e| Error::parse(e.line(), e.to_string()))?;
        if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
            return Err(Error::parse(
                1,
                format!("unsupported model format {} v{}", file.format, file.version),
            ));
        }
        if file.log_likelihoods.len() != file.vocab.len() + 1 {
            return Err(Error::parse(1, "likelihood rows do not match vocabulary"));
        }
        let vocab = file
            .vocab
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(BowModel {
            vocab,
            tokens: file.vocab,
            log_priors: file.log_priors,
            log_likelihoods: file.log_likelihoods,
            smoothing: file.smoothing,
        })
    }
}

impl HypoPredictor for BowModel {
    fn predict_label(&self, hypothesis: &str) -> Label {
        self.argmax_label(hypothesis)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
pub enum ProbSource {
    /// The `model_probs` carried by each instance.
    #[default]
    #[value(name = "instance")]
    #[serde(rename = "instance")]
    InstanceModelProbs,
    /// The built-in bag-of-words model.
    #[value(name = "bow")]
    #[serde(rename = "bow")]
    BuiltinBow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfidenceConfig {
    pub tau: f64,
    pub prob_source: ProbSource,
}

impl Default for ConfidenceConfig {
    fn default() -> Self {
        ConfidenceConfig {
            tau: 0.95,
            prob_source: ProbSource::InstanceModelProbs,
        }
    }
}

impl ConfidenceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::Config(format!("tau must lie in (0, 1), got {}", self.tau)));
        }
        Ok(())
    }
}

/// Keeps instances whose gold label gets probability strictly above `tau`.
pub fn confidence_filter(
    dataset: &Dataset,
    config: &ConfidenceConfig,
    model: Option<&BowModel>,
) -> Result<(Dataset, Dataset)> {
    config.validate()?;
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for inst in dataset {
        let probs = match config.prob_source {
            ProbSource::InstanceModelProbs => inst
                .model_probs
                .ok_or_else(|| Error::MissingProbabilities(inst.id.clone()))?,
            ProbSource::BuiltinBow => model
                .ok_or_else(|| Error::MissingProbabilities(inst.id.clone()))?
                .predict_proba(&inst.hypothesis),
        };
        if probs[inst.label.index()] > config.tau {
            kept.push(inst.clone());
        } else {
            dropped.push(inst.clone());
        }
    }
    Ok((
        Dataset::from_unique(dataset.name.clone(), kept),
        Dataset::from_unique(format!("{}-dropped", dataset.name), dropped),
    ))
}
