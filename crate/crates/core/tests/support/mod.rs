//! Reference implementations shared by the integration tests.
//!
//! Everything here is written straight from the definitions, with ordered
//! maps and no incremental state, so it can be compared against the engine.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zdebias::{extract_features, Dataset, FeatureConfig, Instance, Label};

pub const P0: f64 = 1.0 / 3.0;

/// z against a uniform prior over three labels, evaluated in the textbook
/// operation order so that exact ties compare equal in both implementations.
pub fn textbook_z(c: u64, n: u64) -> f64 {
    let n = n as f64;
    (c as f64 / n - P0) / (P0 * (1.0 - P0) / n).sqrt()
}

/// z from the integer identity z = (3c - n) / sqrt(2n), with the numerator
/// squared exactly in 128-bit arithmetic before a single rounding.
pub fn exact_z(c: u64, n: u64) -> f64 {
    let num = 3 * c as i128 - n as i128;
    let sq = (num * num) as f64 / (2 * n as i128) as f64;
    sq.sqrt().copysign(num as f64)
}

pub struct Item {
    pub id: String,
    pub label: usize,
    pub features: BTreeSet<String>,
}

pub fn items(dataset: &Dataset, cfg: &FeatureConfig) -> Vec<Item> {
    dataset
        .iter()
        .map(|inst| Item {
            id: inst.id.clone(),
            label: inst.label.index(),
            features: extract_features(inst, cfg, None)
                .unwrap()
                .iter()
                .map(|f| f.as_str().to_owned())
                .collect(),
        })
        .collect()
}

/// Top-`k` positive-z features per label over the given instances.
pub fn reference_biased(z: &[&Item], k: usize, min_count: u64) -> [BTreeSet<String>; 3] {
    let mut counts: BTreeMap<&str, [u64; 3]> = BTreeMap::new();
    for item in z {
        for f in &item.features {
            counts.entry(f.as_str()).or_default()[item.label] += 1;
        }
    }
    std::array::from_fn(|l| {
        let mut scored: Vec<(f64, u64, &str)> = Vec::new();
        for (name, c) in &counts {
            let n = c[0] + c[1] + c[2];
            if n < min_count.max(1) {
                continue;
            }
            let zl = textbook_z(c[l], n);
            if zl > 0.0 {
                scored.push((zl, n, name));
            }
        }
        scored.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .unwrap()
                .then(b.1.cmp(&a.1))
                .then(a.2.cmp(b.2))
        });
        scored.into_iter().take(k).map(|(_, _, f)| f.to_owned()).collect()
    })
}

pub struct ReferenceOutcome {
    pub accepted: Vec<String>,
    pub rejected: Vec<String>,
    /// B(l) used for each batch.
    pub batch_sets: Vec<[BTreeSet<String>; 3]>,
}

/// Straight-line z-filtering: rebuild everything from Z before each batch.
pub fn reference_filter(input: &[Item], seed: &[Item], k: usize, min_count: u64, batch_size: usize) -> ReferenceOutcome {
    let mut z: Vec<&Item> = seed.iter().collect();
    let mut accepted: Vec<String> = seed.iter().map(|i| i.id.clone()).collect();
    let mut rejected = Vec::new();
    let mut batch_sets = Vec::new();
    let mut start = 0;
    while start < input.len() {
        let end = (start + batch_size).min(input.len());
        let b = reference_biased(&z, k, min_count);
        for item in &input[start..end] {
            if item.features.is_disjoint(&b[item.label]) {
                accepted.push(item.id.clone());
                z.push(item);
            } else {
                rejected.push(item.id.clone());
            }
        }
        batch_sets.push(b);
        start = end;
    }
    ReferenceOutcome {
        accepted,
        rejected,
        batch_sets,
    }
}

/// A corpus of 1 to `max_size` instances where each token leans towards one label.
pub fn toy_corpus(rng: &mut ChaCha8Rng, prefix: &str, max_size: usize, vocab: usize) -> Dataset {
    let size = rng.random_range(1..=max_size);
    let word = |rng: &mut ChaCha8Rng| rng.random_range(0..vocab);
    let instances = (0..size)
        .map(|i| {
            let hyp: Vec<usize> = (0..rng.random_range(1..=5)).map(|_| word(rng)).collect();
            let prem: Vec<usize> = (0..rng.random_range(0..=5)).map(|_| word(rng)).collect();
            let label = if rng.random_bool(0.6) {
                hyp[0] % 3
            } else {
                rng.random_range(0..3)
            };
            let text = |ws: &[usize]| ws.iter().map(|w| format!("t{w}")).collect::<Vec<_>>().join(" ");
            Instance::new(
                format!("{prefix}{i}"),
                text(&prem),
                text(&hyp),
                Label::from_index(label).unwrap(),
            )
        })
        .collect();
    Dataset::new(prefix, instances).unwrap()
}

/// One member of the randomized toy family used by the filter tests.
pub struct ToyCase {
    pub input: Dataset,
    pub seed: Option<Dataset>,
    pub k: usize,
    pub batch_size: usize,
}

pub fn toy_family(count: usize) -> Vec<ToyCase> {
    (0..count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
            let vocab = rng.random_range(3..=30);
            let seeded = i % 3 == 2;
            let input = toy_corpus(&mut rng, "x", if seeded { 160 } else { 200 }, vocab);
            let seed = seeded.then(|| toy_corpus(&mut rng, "s", 40, vocab));
            let batch_size = match i % 3 {
                0 => 1,
                1 => 7,
                _ => input.len(),
            };
            ToyCase {
                input,
                seed,
                k: 1 + i % 3,
                batch_size,
            }
        })
        .collect()
}
