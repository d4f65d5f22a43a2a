//! Synthetic datasets with planted feature-label correlations.
//!
//! Background instances are token soup over the vocabulary `w0 .. w{V-1}`
//! with uniformly drawn labels. Each [`BiasSpec`] adds `occurrences`
//! instances carrying its marker token, exactly `round(p * n)` of them with
//! the target label and the rest split evenly over the other two labels.
//! Because the label counts are constructed rather than sampled, the marker's
//! z-statistic is known in closed form ([`expected_z`]).

use std::collections::HashSet;
use std::fmt::{self, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Instance, Label, Source};
use crate::error::{Error, Result};
use crate::features::tokenize;

const PREMISE_LEN: (usize, usize) = (6, 12);
const HYPOTHESIS_LEN: (usize, usize) = (3, 8);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    Hypothesis,
    Premise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiasSpec {
    pub marker: String,
    pub placement: Placement,
    pub target_label: Label,
    /// Number of instances containing the marker.
    pub occurrences: usize,
    /// Fraction of those instances labelled `target_label`.
    pub target_fraction: f64,
    #[serde(default)]
    pub rng_seed: u64,
}

impl BiasSpec {
    pub fn new(marker: impl Into<String>, target_label: Label, occurrences: usize, target_fraction: f64) -> Self {
        BiasSpec {
            marker: marker.into(),
            placement: Placement::Hypothesis,
            target_label,
            occurrences,
            target_fraction,
            rng_seed: 0,
        }
    }

    pub fn in_premise(mut self) -> Self {
        self.placement = Placement::Premise;
        self
    }

    pub fn seeded(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    /// Number of marker instances that carry the target label.
    pub fn target_count(&self) -> usize {
        (self.target_fraction * self.occurrences as f64).round() as usize
    }

    /// Name of the marker's unigram feature.
    pub fn feature_name(&self) -> String {
        match self.placement {
            Placement::Hypothesis => format!("{}@hypothesis", self.marker),
            Placement::Premise => format!("{}@premise", self.marker),
        }
    }
}

/// A complete generation request, as read from a spec file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub background_count: usize,
    pub vocab_size: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, rename = "bias")]
    pub biases: Vec<BiasSpec>,
}

impl SynthSpec {
    pub fn generate(&self) -> Result<Dataset> {
        generate(&self.biases, self.background_count, self.vocab_size, self.seed)
    }
}

fn in_vocabulary(token: &str, vocab_size: usize) -> bool {
    token
        .strip_prefix('w')
        .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()) && (d.len() == 1 || !d.starts_with('0')))
        .and_then(|d| d.parse::<usize>().ok())
        .is_some_and(|i| i < vocab_size)
}

fn validate(specs: &[BiasSpec], vocab_size: usize) -> Result<()> {
    if vocab_size == 0 {
        return Err(Error::Config("vocab_size must be at least 1".into()));
    }
    let mut seen = HashSet::new();
    for spec in specs {
        if spec.occurrences == 0 {
            return Err(Error::Config(format!("marker {:?}: occurrences must be positive", spec.marker)));
        }
        if !(0.0..=1.0).contains(&spec.target_fraction) {
            return Err(Error::Config(format!(
                "marker {:?}: target_fraction must lie in [0, 1]",
                spec.marker
            )));
        }
        if tokenize(&spec.marker) != [spec.marker.as_str()] {
            return Err(Error::Config(format!(
                "marker {:?} is not a single lowercase token",
                spec.marker
            )));
        }
        if in_vocabulary(&spec.marker, vocab_size) || !seen.insert(spec.marker.as_str()) {
            return Err(Error::MarkerCollision(spec.marker.clone()));
        }
    }
    Ok(())
}

fn soup<R: Rng>(rng: &mut R, len: (usize, usize), vocab_size: usize) -> Vec<usize> {
    let n = rng.random_range(len.0..=len.1);
    (0..n).map(|_| rng.random_range(0..vocab_size)).collect()
}

/// Space-separated `w<id>` words, with `marker` spliced in before word `at`.
fn render(words: &[usize], marker: Option<(usize, &str)>) -> String {
    let mut out = String::with_capacity(8 * (words.len() + 1));
    let mut put = |piece: fmt::Arguments| {
        if !out.is_empty() {
            out.push(' ');
        }
        out.write_fmt(piece).expect("writing to a String cannot fail");
    };
    for (i, w) in words.iter().enumerate() {
        if let Some((_, m)) = marker.filter(|&(at, _)| at == i) {
            put(format_args!("{m}"));
        }
        put(format_args!("w{w}"));
    }
    if let Some((_, m)) = marker.filter(|&(at, _)| at == words.len()) {
        put(format_args!("{m}"));
    }
    out
}

fn marker_labels(spec: &BiasSpec) -> Vec<Label> {
    let target = spec.target_count();
    let others: Vec<Label> = Label::ALL.into_iter().filter(|&l| l != spec.target_label).collect();
    let mut labels = vec![spec.target_label; target];
    labels.extend((0..spec.occurrences - target).map(|i| others[i % 2]));
    labels
}

/// Builds the dataset; identical arguments give identical output.
pub fn generate(specs: &[BiasSpec], background_count: usize, vocab_size: usize, rng_seed: u64) -> Result<Dataset> {
    validate(specs, vocab_size)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut instances = Vec::with_capacity(background_count + specs.iter().map(|s| s.occurrences).sum::<usize>());

    for i in 0..background_count {
        let premise = render(&soup(&mut rng, PREMISE_LEN, vocab_size), None);
        let hypothesis = render(&soup(&mut rng, HYPOTHESIS_LEN, vocab_size), None);
        let label = Label::ALL[rng.random_range(0..3)];
        instances.push(Instance::new(format!("bg-{i}"), premise, hypothesis, label).with_source(Source::Generated));
    }

    for spec in specs {
        let mut spec_rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
        for (j, label) in marker_labels(spec).into_iter().enumerate() {
            let premise = soup(&mut spec_rng, PREMISE_LEN, vocab_size);
            let hypothesis = soup(&mut spec_rng, HYPOTHESIS_LEN, vocab_size);
            let side = match spec.placement {
                Placement::Hypothesis => &hypothesis,
                Placement::Premise => &premise,
            };
            let at = spec_rng.random_range(0..=side.len());
            let marker = Some((at, spec.marker.as_str()));
            let (premise, hypothesis) = match spec.placement {
                Placement::Hypothesis => (render(&premise, None), render(&hypothesis, marker)),
                Placement::Premise => (render(&premise, marker), render(&hypothesis, None)),
            };
            instances.push(
                Instance::new(format!("{}-{j}", spec.marker), premise, hypothesis, label)
                    .with_source(Source::Generated),
            );
        }
    }

    instances.shuffle(&mut rng);
    Ok(Dataset::from_unique(format!("synth-{rng_seed}"), instances))
}

/// z-statistic of the marker feature for its target label, from the
/// constructed label counts.
pub fn expected_z(spec: &BiasSpec) -> f64 {
    let n = spec.occurrences as f64;
    let p = spec.target_count() as f64 / n;
    let p0 = 1.0 / 3.0;
    (p - p0) / (p0 * (1.0 - p0) / n).sqrt()
}
