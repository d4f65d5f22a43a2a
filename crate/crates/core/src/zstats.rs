//! Per-feature label counts, z-statistics and biased-feature selection.
//!
//! For a feature seen in `n` instances, `count_l` of which carry label `l`,
//!
//! ```text
//! z(x, l) = (count_l / n - p0) / sqrt(p0 (1 - p0) / n)
//! ```
//!
//! measures how far the empirical label distribution of the feature sits from
//! the uniform prior `p0`.

use std::cmp::Ordering;

use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::features::{extract_features, FeatureConfig, FeatureId, FeatureVector, HypoPredictor};

/// Label counts per feature, the sufficient statistic for every z-score.
///
/// Feature names are interned; the interning order is an implementation
/// detail and never leaks into reports.
#[derive(Debug, Clone, Default)]
pub struct CountTable {
    index: FxHashMap<FeatureId, u32>,
    names: Vec<FeatureId>,
    counts: Vec<[u64; 3]>,
    total: u64,
}

impl CountTable {
    pub fn new() -> Self {
        Self::default()
    }

    fn slot(&mut self, feature: &FeatureId) -> usize {
        if let Some(&i) = self.index.get(feature) {
            return i as usize;
        }
        let i = self.names.len();
        self.index.insert(feature.clone(), i as u32);
        self.names.push(feature.clone());
        self.counts.push([0; 3]);
        i
    }

    /// Counts one instance: every feature of `features` gets one more `label`.
    pub fn accumulate(&mut self, features: &FeatureVector, label: Label) {
        let l = label.index();
        for f in features {
            let i = self.slot(f);
            self.counts[i][l] += 1;
        }
        self.total += 1;
    }

    /// Adds every count of `other` into `self`.
    pub fn merge(&mut self, other: &CountTable) {
        for (name, c) in other.names.iter().zip(&other.counts) {
            let i = self.slot(name);
            for l in 0..3 {
                self.counts[i][l] += c[l];
            }
        }
        self.total += other.total;
    }

    pub fn counts(&self, feature: &str) -> Option<[u64; 3]> {
        self.index.get(feature).map(|&i| self.counts[i as usize])
    }

    /// Number of instances accumulated.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn num_features(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Features and their counts in unspecified order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, [u64; 3])> {
        self.names.iter().map(FeatureId::as_str).zip(self.counts.iter().copied())
    }

    /// Shard-and-merge counting over a slice of labelled feature vectors.
    pub fn from_par_slice(items: &[(FeatureVector, Label)]) -> CountTable {
        items
            .par_chunks(SHARD_SIZE)
            .map(|shard| {
                let mut t = CountTable::new();
                for (fv, label) in shard {
                    t.accumulate(fv, *label);
                }
                t
            })
            .reduce(CountTable::new, merged)
    }

    /// Slots in byte order of their names.
    fn slots_by_name(&self) -> Vec<u32> {
        // The zero-padded 8-byte prefix orders like the name itself, so most
        // comparisons never reach the strings.
        let prefix = |name: &str| {
            let mut b = [0u8; 8];
            let n = name.len().min(8);
            b[..n].copy_from_slice(&name.as_bytes()[..n]);
            u64::from_be_bytes(b)
        };
        let mut named: Vec<(u64, &str, u32)> =
            self.names.iter().zip(0..).map(|(f, slot)| (prefix(f.as_str()), f.as_str(), slot)).collect();
        named.par_sort_unstable();
        named.into_iter().map(|(_, _, slot)| slot).collect()
    }
}

/// Instances per counting shard; shards are counted in parallel and merged.
const SHARD_SIZE: usize = 4096;

fn merged(a: CountTable, b: CountTable) -> CountTable {
    let (mut big, small) = if a.names.len() >= b.names.len() { (a, b) } else { (b, a) };
    big.merge(&small);
    big
}

/// Extracts features of every instance and counts them, in parallel shards.
pub fn count_dataset(
    dataset: &Dataset,
    config: &FeatureConfig,
    predictor: Option<&dyn HypoPredictor>,
) -> Result<CountTable> {
    dataset
        .instances()
        .par_chunks(SHARD_SIZE)
        .map(|shard| {
            let mut t = CountTable::new();
            for inst in shard {
                t.accumulate(&extract_features(inst, config, predictor)?, inst.label);
            }
            Ok(t)
        })
        .try_reduce(CountTable::new, |a, b| Ok(merged(a, b)))
}

impl PartialEq for CountTable {
    fn eq(&self, other: &Self) -> bool {
        self.total == other.total
            && self.names.len() == other.names.len()
            && self.iter().all(|(f, c)| other.counts(f) == Some(c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZConfig {
    /// Uniform label probability.
    pub p0: f64,
    /// Biased features kept per label.
    pub k: usize,
    /// Minimum support for a feature to be scored.
    pub min_count: u64,
}

impl Default for ZConfig {
    fn default() -> Self {
        ZConfig {
            p0: 1.0 / 3.0,
            k: 20,
            min_count: 1,
        }
    }
}

impl ZConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p0 > 0.0 && self.p0 < 1.0) {
            return Err(Error::Config(format!("p0 must lie in (0, 1), got {}", self.p0)));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        Ok(())
    }
}

/// Standardised z-statistic of `count_l` successes in `n` trials against `p0`.
pub fn z_score(count_l: u64, n: u64, p0: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::EmptySupport);
    }
    Ok(z_unchecked(count_l, n, p0))
}

#[inline]
fn z_unchecked(count_l: u64, n: u64, p0: f64) -> f64 {
    let n = n as f64;
    (count_l as f64 / n - p0) / (p0 * (1.0 - p0) / n).sqrt()
}

/// One `(feature, label)` cell of the z-statistic table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZRow {
    pub feature: FeatureId,
    pub label: Label,
    pub n: u64,
    pub p_hat: f64,
    pub z: f64,
}

impl ZRow {
    fn new(feature: &FeatureId, label: Label, counts: [u64; 3], p0: f64) -> ZRow {
        let n: u64 = counts.iter().sum();
        let c = counts[label.index()];
        ZRow {
            feature: feature.clone(),
            label,
            n,
            p_hat: c as f64 / n as f64,
            z: z_unchecked(c, n, p0),
        }
    }
}

/// z descending, then support descending, then feature name ascending.
pub fn rank_order(a_z: f64, a_n: u64, a_name: &str, b_z: f64, b_n: u64, b_name: &str) -> Ordering {
    b_z.total_cmp(&a_z)
        .then_with(|| b_n.cmp(&a_n))
        .then_with(|| a_name.cmp(b_name))
}

#[cfg(test)]
fn row_order(a: &ZRow, b: &ZRow) -> Ordering {
    rank_order(a.z, a.n, a.feature.as_str(), b.z, b.n, b.feature.as_str())
        .then_with(|| a.label.cmp(&b.label))
}

/// All scored `(feature, label)` rows in rank order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ZReport {
    pub rows: Vec<ZRow>,
}

impl ZReport {
    pub fn for_label(&self, label: Label) -> impl Iterator<Item = &ZRow> {
        self.rows.iter().filter(move |r| r.label == label)
    }

    pub fn get(&self, feature: &str, label: Label) -> Option<&ZRow> {
        self.rows
            .iter()
            .find(|r| r.label == label && r.feature.as_str() == feature)
    }
}

/// Maps a float to an integer with the same order as `f64::total_cmp`.
fn total_order_bits(z: f64) -> u64 {
    let bits = z.to_bits();
    if bits >> 63 == 1 { !bits } else { bits | 1 << 63 }
}

/// Dense ranks of the distinct `(count, n)` pairs by z descending, then n
/// descending. z depends on nothing else, and real tables have few pairs.
fn score_ranks(pairs: impl Iterator<Item = (u64, u64)>, p0: f64) -> FxHashMap<(u64, u64), u64> {
    let mut distinct: Vec<(u64, u64, u64, u64)> = pairs
        .collect::<FxHashSet<_>>()
        .into_iter()
        .map(|(c, n)| (!total_order_bits(z_unchecked(c, n, p0)), !n, c, n))
        .collect();
    distinct.sort_unstable();
    let mut ranks = FxHashMap::default();
    let mut rank = 0;
    for (i, &(z, n_desc, c, n)) in distinct.iter().enumerate() {
        if i > 0 && (z, n_desc) != (distinct[i - 1].0, distinct[i - 1].1) {
            rank += 1;
        }
        ranks.insert((c, n), rank);
    }
    ranks
}

pub fn full_report(table: &CountTable, config: &ZConfig) -> ZReport {
    let min = config.min_count.max(1);
    let order = table.slots_by_name();
    let scored = |slot: u32| {
        let c = table.counts[slot as usize];
        let n = c.iter().sum::<u64>();
        (n >= min).then_some((c, n))
    };
    let ranks = score_ranks(
        order.iter().filter_map(|&slot| scored(slot)).flat_map(|(c, n)| c.map(|c_l| (c_l, n))),
        config.p0,
    );
    // (score rank, name rank, label) sorts in the same order as `row_order`,
    // and the name rank leads back to the slot.
    let mut keys: Vec<u128> = order
        .iter()
        .enumerate()
        .filter_map(|(rank, &slot)| scored(slot).map(|sc| (rank, sc)))
        .flat_map(|(rank, (c, n))| {
            Label::ALL.map(|l| (ranks[&(c[l.index()], n)] as u128) << 64 | ((rank as u128) << 2 | l.index() as u128))
        })
        .collect();
    keys.par_sort_unstable();
    let rows = keys
        .into_par_iter()
        .map(|key| {
            let packed = key as u64;
            let slot = order[(packed >> 2) as usize] as usize;
            let label = Label::from_index((packed & 3) as usize).expect("index below 3");
            ZRow::new(&table.names[slot], label, table.counts[slot], config.p0)
        })
        .collect();
    ZReport { rows }
}

/// The `k` most over-represented features for each label, in rank order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BiasedFeatureSets {
    sets: [Vec<ZRow>; 3],
}

impl BiasedFeatureSets {
    pub fn from_rows(rows: [Vec<ZRow>; 3]) -> Self {
        BiasedFeatureSets { sets: rows }
    }

    pub fn rows(&self, label: Label) -> &[ZRow] {
        &self.sets[label.index()]
    }

    pub fn features(&self, label: Label) -> impl Iterator<Item = &FeatureId> {
        self.sets[label.index()].iter().map(|r| &r.feature)
    }

    pub fn contains(&self, label: Label, feature: &str) -> bool {
        self.sets[label.index()]
            .iter()
            .any(|r| r.feature.as_str() == feature)
    }

    /// Members of `B(label)` present in `features`, in rank order.
    pub fn triggers<'a>(&'a self, label: Label, features: &'a FeatureVector) -> impl Iterator<Item = &'a FeatureId> {
        self.features(label).filter(move |b| features.contains(b.as_str()))
    }

    pub fn intersects(&self, label: Label, features: &FeatureVector) -> bool {
        self.triggers(label, features).next().is_some()
    }

    pub fn sizes(&self) -> [usize; 3] {
        [self.sets[0].len(), self.sets[1].len(), self.sets[2].len()]
    }

    pub fn is_empty(&self) -> bool {
        self.sets.iter().all(Vec::is_empty)
    }
}

pub fn biased_features(table: &CountTable, config: &ZConfig) -> BiasedFeatureSets {
    let min = config.min_count.max(1);
    let sets = Label::ALL.map(|label| {
        let l = label.index();
        let mut cands: Vec<(f64, u64, u32)> = table
            .counts
            .iter()
            .enumerate()
            .filter_map(|(i, c)| {
                let n = c[0] + c[1] + c[2];
                if n < min {
                    return None;
                }
                let z = z_unchecked(c[l], n, config.p0);
                (z > 0.0).then_some((z, n, i as u32))
            })
            .collect();
        let name = |i: u32| table.names[i as usize].as_str();
        let cmp = |a: &(f64, u64, u32), b: &(f64, u64, u32)| {
            rank_order(a.0, a.1, name(a.2), b.0, b.1, name(b.2))
        };
        if cands.len() > config.k {
            cands.select_nth_unstable_by(config.k - 1, cmp);
            cands.truncate(config.k);
        }
        cands.sort_unstable_by(cmp);
        cands
            .into_iter()
            .map(|(_, _, i)| ZRow::new(&table.names[i as usize], label, table.counts[i as usize], config.p0))
            .collect()
    });
    BiasedFeatureSets { sets }
}
