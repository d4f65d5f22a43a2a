//! Token masks for unlikelihood training on rejected instances.
//!
//! A mask bit is 0 on tokens that contribute to a biased feature of the
//! instance's label and 1 elsewhere. An n-gram trigger zeroes every
//! occurrence of that n-gram on its own side; any other trigger (length,
//! ratio, overlap, prediction, `null`) zeroes the whole hypothesis.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Instance};
use crate::error::{Error, Result};
use crate::features::{extract_features, tokenize, FeatureConfig, FeatureId, FeatureKind, HypoPredictor, Side};
use crate::zfilter::Rejection;
use crate::zstats::BiasedFeatureSets;

pub const MASK_FORMAT: &str = "zdebias-ulmask";
pub const MASK_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskedInstance {
    pub id: String,
    pub premise_tokens: Vec<String>,
    pub hypothesis_tokens: Vec<String>,
    /// 1 = likelihood token, 0 = unlikelihood token.
    pub premise_mask: Vec<u8>,
    pub hypothesis_mask: Vec<u8>,
    pub triggering_features: Vec<FeatureId>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
}

fn zero_matches(tokens: &[String], gram: &[&str], mask: &mut [u8]) {
    if gram.is_empty() || gram.len() > tokens.len() {
        return;
    }
    for start in 0..=tokens.len() - gram.len() {
        if tokens[start..start + gram.len()].iter().zip(gram).all(|(t, g)| t == g) {
            mask[start..start + gram.len()].fill(0);
        }
    }
}

/// Computes masks against a fixed set of biased features.
pub struct Masker<'a> {
    biased: &'a BiasedFeatureSets,
    feature_config: &'a FeatureConfig,
    predictor: Option<&'a dyn HypoPredictor>,
    mask_premise: bool,
}

impl<'a> Masker<'a> {
    pub fn new(biased: &'a BiasedFeatureSets, feature_config: &'a FeatureConfig) -> Self {
        Masker {
            biased,
            feature_config,
            predictor: None,
            mask_premise: true,
        }
    }

    pub fn with_predictor(mut self, predictor: Option<&'a dyn HypoPredictor>) -> Self {
        self.predictor = predictor;
        self
    }

    /// Whether `@premise` triggers zero premise tokens (default on).
    pub fn mask_premise(mut self, on: bool) -> Self {
        self.mask_premise = on;
        self
    }

    pub fn compute(&self, instance: &Instance) -> Result<MaskedInstance> {
        let features = extract_features(instance, self.feature_config, self.predictor)?;
        let triggering_features: Vec<FeatureId> = self
            .biased
            .triggers(instance.label, &features)
            .cloned()
            .collect();
        if triggering_features.is_empty() {
            return Err(Error::NotRejected(instance.id.clone()));
        }
        Ok(mask_from_triggers(instance, triggering_features, self.mask_premise))
    }
}

/// Applies the masking rules for an already known set of triggers.
pub fn mask_from_triggers(instance: &Instance, triggering_features: Vec<FeatureId>, mask_premise: bool) -> MaskedInstance {
    let hypothesis_tokens = tokenize(&instance.hypothesis);
    let premise_tokens = tokenize(&instance.premise);
    let mut hypothesis_mask = vec![1u8; hypothesis_tokens.len()];
    let mut premise_mask = vec![1u8; premise_tokens.len()];

    for feature in &triggering_features {
        match feature.kind() {
            FeatureKind::Ngram(side, gram) => {
                let gram: Vec<&str> = gram.split(' ').collect();
                match side {
                    Side::Hypothesis => zero_matches(&hypothesis_tokens, &gram, &mut hypothesis_mask),
                    Side::Premise if mask_premise => zero_matches(&premise_tokens, &gram, &mut premise_mask),
                    Side::Premise => {}
                }
            }
            FeatureKind::Other => hypothesis_mask.fill(0),
        }
    }

    MaskedInstance {
        id: instance.id.clone(),
        premise_tokens,
        hypothesis_tokens,
        premise_mask,
        hypothesis_mask,
        triggering_features,
    }
}

/// Mask of one rejected instance; errors if nothing in `B(label)` matches.
pub fn compute_mask(
    instance: &Instance,
    biased: &BiasedFeatureSets,
    feature_config: &FeatureConfig,
    predictor: Option<&dyn HypoPredictor>,
) -> Result<MaskedInstance> {
    Masker::new(biased, feature_config)
        .with_predictor(predictor)
        .compute(instance)
}

pub fn compute_masks(rejected: &Dataset, masker: &Masker<'_>) -> Result<Vec<MaskedInstance>> {
    let results: Vec<Result<MaskedInstance>> =
        rejected.instances().par_iter().map(|i| masker.compute(i)).collect();
    collect_reported(results)
}

/// Masks each rejected instance by the triggers recorded when it was rejected.
pub fn masks_from_rejections(
    rejected: &Dataset,
    rejections: &[Rejection],
    mask_premise: bool,
) -> Result<Vec<MaskedInstance>> {
    let by_id: HashMap<&str, &Rejection> = rejections.iter().map(|r| (r.id.as_str(), r)).collect();
    let results: Vec<Result<MaskedInstance>> = rejected
        .instances()
        .par_iter()
        .map(|inst| match by_id.get(inst.id.as_str()) {
            Some(r) if !r.triggers.is_empty() => Ok(mask_from_triggers(inst, r.triggers.clone(), mask_premise)),
            _ => Err(Error::NotRejected(inst.id.clone())),
        })
        .collect();
    collect_reported(results)
}

/// Logs every failed record with its position and returns the first error.
fn collect_reported(results: Vec<Result<MaskedInstance>>) -> Result<Vec<MaskedInstance>> {
    let mut masks = Vec::with_capacity(results.len());
    let mut first_err = None;
    for (line, r) in results.into_iter().enumerate() {
        match r {
            Ok(m) => masks.push(m),
            Err(e) => {
                log::error!("record {}: {e}", line + 1);
                first_err.get_or_insert(e);
            }
        }
    }
    match first_err {
        Some(e) => Err(e),
        None => Ok(masks),
    }
}

/// Header line then one record per mask; no masks means an empty file.
pub fn write_masks<W: Write>(out: &mut W, masks: &[MaskedInstance]) -> std::io::Result<()> {
    if masks.is_empty() {
        return Ok(());
    }
    let header = Header {
        format: MASK_FORMAT.to_owned(),
        version: MASK_VERSION,
    };
    serde_json::to_writer(&mut *out, &header)?;
    out.write_all(b"\n")?;
    for m in masks {
        serde_json::to_writer(&mut *out, m)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Writes the header line followed by one record per rejected instance.
pub fn emit_mask_file(rejected: &Dataset, masker: &Masker<'_>, path: &Path) -> Result<()> {
    write_mask_file(&compute_masks(rejected, masker)?, path)
}

pub fn write_mask_file(masks: &[MaskedInstance], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_masks(&mut out, masks)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_mask_file(path: &Path) -> Result<Vec<MaskedInstance>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header: Header = match lines.next() {
        Some(line) => {
            let line = line.map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&line).map_err(|e| Error::parse(1, e.to_string()))?
        }
        None => return Ok(Vec::new()),
    };
    if header.format != MASK_FORMAT || header.version != MASK_VERSION {
        return Err(Error::parse(
            1,
            format!("unsupported mask format {} v{}", header.format, header.version),
        ));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let m: MaskedInstance =
            serde_json::from_str(&line).map_err(|e| Error::parse(i + 2, e.to_string()))?;
        if m.premise_mask.len() != m.premise_tokens.len()
            || m.hypothesis_mask.len() != m.hypothesis_tokens.len()
        {
            return Err(Error::parse(i + 2, "mask length differs from token count"));
        }
        out.push(m);
    }
    Ok(out)
}
