//! Batch z-filtering and the dataset construction modes built on it.
//!
//! The filter grows an accepted set `Z` batch by batch. Before each batch
//! the biased-feature sets `B(l)` are recomputed from the counts of `Z`; an
//! instance is accepted iff none of its features is in `B(label)`. Only
//! accepted instances are counted, so the table never sees a rejection.
//!
//! Without a seed the table starts empty, every `B(l)` is empty and the first
//! batch is accepted wholesale.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Instance, Label};
use crate::error::{Error, Result};
use crate::features::{extract_features, FeatureConfig, FeatureId, FeatureVector, HypoPredictor};
use crate::zstats::{biased_features, BiasedFeatureSets, CountTable, ZConfig};

/// How the count table follows `Z` between batches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableMode {
    /// Accepted instances are added to a running table.
    #[default]
    Incremental,
    /// The table is rebuilt from all of `Z` at every batch boundary.
    Recompute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub batch_size: usize,
    /// Compute `B(l)` once from the seed and never update it.
    pub freeze_seed_bias: bool,
    pub table_mode: TableMode,
    #[serde(skip)]
    pub zconfig: ZConfig,
    #[serde(skip)]
    pub feature_config: FeatureConfig,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            batch_size: 10_000,
            freeze_seed_bias: false,
            table_mode: TableMode::Incremental,
            zconfig: ZConfig::default(),
            feature_config: FeatureConfig::default(),
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        self.zconfig.validate()?;
        self.feature_config.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchTrace {
    pub batch: usize,
    pub accepted: usize,
    pub rejected: usize,
    /// `|B(l)|` per label as used for this batch.
    pub biased_sizes: [usize; 3],
}

/// Certificate for one rejection: the members of `B(label)` the instance
/// contained when its batch was filtered.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub id: String,
    pub batch: usize,
    pub triggers: Vec<FeatureId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    /// `Z`: the seed (if any) followed by accepted input instances.
    pub accepted: Dataset,
    pub rejected: Dataset,
    /// One certificate per rejected instance, in the same order.
    pub rejections: Vec<Rejection>,
    /// `B(l)` of the final accepted set.
    pub final_biased: BiasedFeatureSets,
    pub trace: Vec<BatchTrace>,
}

impl FilterOutcome {
    pub fn rejection_rate(&self) -> f64 {
        let seen: usize = self.trace.iter().map(|t| t.accepted + t.rejected).sum();
        if seen == 0 {
            0.0
        } else {
            self.rejected.len() as f64 / seen as f64
        }
    }
}

pub(crate) fn extract_all(
    instances: &[Instance],
    config: &FeatureConfig,
    predictor: Option<&dyn HypoPredictor>,
) -> Result<Vec<FeatureVector>> {
    instances
        .par_iter()
        .map(|inst| extract_features(inst, config, predictor))
        .collect()
}

fn check_disjoint(a: &Dataset, b: &Dataset) -> Result<()> {
    let ids: HashSet<&str> = a.ids().collect();
    match b.ids().find(|id| ids.contains(id)) {
        Some(id) => Err(Error::IdCollision(id.to_owned())),
        None => Ok(()),
    }
}

fn rebuild(accepted: &[(FeatureVector, Label)]) -> CountTable {
    let mut table = CountTable::new();
    for (fv, label) in accepted {
        table.accumulate(fv, *label);
    }
    table
}

/// Runs z-filtering over `input`, optionally seeded.
///
/// Seed instances are counted but never filtered.
pub fn z_filter(
    input: &Dataset,
    seed: Option<&Dataset>,
    config: &FilterConfig,
    predictor: Option<&dyn HypoPredictor>,
) -> Result<FilterOutcome> {
    config.validate()?;
    let fcfg = &config.feature_config;
    let zcfg = &config.zconfig;

    let mut accepted: Vec<Instance> = Vec::new();
    let mut rejected: Vec<Instance> = Vec::new();
    let mut rejections: Vec<Rejection> = Vec::new();
    let mut table = CountTable::new();
    // Feature vectors of Z, only kept for the recompute reference mode.
    let mut z_features: Vec<(FeatureVector, Label)> = Vec::new();
    let recompute = config.table_mode == TableMode::Recompute;

    if let Some(seed) = seed {
        check_disjoint(seed, input)?;
        let fvs = extract_all(seed.instances(), fcfg, predictor)?;
        for (fv, inst) in fvs.into_iter().zip(seed) {
            if recompute {
                z_features.push((fv, inst.label));
            } else {
                table.accumulate(&fv, inst.label);
            }
        }
        accepted.extend(seed.iter().cloned());
    }

    let frozen = config.freeze_seed_bias.then(|| {
        if recompute {
            biased_features(&rebuild(&z_features), zcfg)
        } else {
            biased_features(&table, zcfg)
        }
    });

    let mut trace = Vec::new();
    for (batch, chunk) in input.instances().chunks(config.batch_size).enumerate() {
        let biased = match &frozen {
            Some(b) => b.clone(),
            None if recompute => {
                table = rebuild(&z_features);
                biased_features(&table, zcfg)
            }
            None => biased_features(&table, zcfg),
        };

        let fvs = extract_all(chunk, fcfg, predictor)?;
        let mut record = BatchTrace {
            batch,
            accepted: 0,
            rejected: 0,
            biased_sizes: biased.sizes(),
        };
        for (fv, inst) in fvs.into_iter().zip(chunk) {
            let triggers: Vec<FeatureId> = biased.triggers(inst.label, &fv).cloned().collect();
            if !triggers.is_empty() {
                record.rejected += 1;
                rejections.push(Rejection {
                    id: inst.id.clone(),
                    batch,
                    triggers,
                });
                rejected.push(inst.clone());
            } else {
                record.accepted += 1;
                if recompute {
                    z_features.push((fv, inst.label));
                } else {
                    table.accumulate(&fv, inst.label);
                }
                accepted.push(inst.clone());
            }
        }
        trace.push(record);
    }

    if recompute {
        table = rebuild(&z_features);
    }
    let final_biased = biased_features(&table, zcfg);

    Ok(FilterOutcome {
        accepted: Dataset::from_unique(input.name.clone(), accepted),
        rejected: Dataset::from_unique(format!("{}-rejected", input.name), rejected),
        rejections,
        final_biased,
        trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ConstructMode {
    /// Keep the original and add generated instances that pass conditional
    /// filtering seeded with it.
    #[value(name = "zaug")]
    ZAug,
    /// Filter both datasets independently and concatenate.
    #[value(name = "parz")]
    ParZ,
    /// Filter the original, then filter the generated data seeded with the result.
    #[value(name = "seqz")]
    SeqZ,
    /// Plain concatenation, no filtering.
    #[value(name = "plain")]
    #[serde(rename = "plain")]
    MergePlain,
}

/// Combines an original dataset `d0` with generated data `dg`.
///
/// The output lists the `d0` part first, then the `dg` part, each in input order.
pub fn construct(
    mode: ConstructMode,
    d0: &Dataset,
    dg: &Dataset,
    config: &FilterConfig,
    predictor: Option<&dyn HypoPredictor>,
) -> Result<Dataset> {
    check_disjoint(d0, dg)?;
    let name = format!("{}+{}", d0.name, dg.name);
    let instances = match mode {
        ConstructMode::MergePlain => d0.iter().chain(dg).cloned().collect(),
        ConstructMode::ZAug => z_filter(dg, Some(d0), config, predictor)?
            .accepted
            .into_instances(),
        ConstructMode::ParZ => {
            let mut out = z_filter(d0, None, config, predictor)?.accepted.into_instances();
            out.extend(z_filter(dg, None, config, predictor)?.accepted.into_instances());
            out
        }
        ConstructMode::SeqZ => {
            let z0 = z_filter(d0, None, config, predictor)?.accepted;
            z_filter(dg, Some(&z0), config, predictor)?
                .accepted
                .into_instances()
        }
    };
    Ok(Dataset::from_unique(name, instances))
}
