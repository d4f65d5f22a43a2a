//! Measure and remove spurious feature-label correlations in
//! premise/hypothesis classification datasets.
//!
//! The pipeline is: extract task-independent [`features`] per instance,
//! count them per label in a [`zstats::CountTable`], score every
//! feature-label pair with a z-statistic, and run batch [`zfilter`] to
//! grow a subset in which no feature leans towards a label. Around that
//! sit a bag-of-words hypothesis-only classifier ([`hypoclf`]), token masks
//! for unlikelihood training ([`ulmask`]) and a planted-bias generator
//! ([`synth`]) used to check the statistics end to end.

pub mod config;
pub mod data;
pub mod error;
pub mod export;
pub mod features;
pub mod hypoclf;
pub mod manifest;
pub mod synth;
pub mod ulmask;
pub mod zfilter;
pub mod zstats;

pub mod cli;

pub use data::{read_dataset, write_dataset, Dataset, Instance, Label, Schema, Source};
pub use error::{Error, Result};
pub use features::{extract_features, tokenize, FeatureConfig, FeatureId, FeatureVector, HypoPredictor};
pub use hypoclf::{confidence_filter, BowModel, ConfidenceConfig, ProbSource};
pub use synth::{expected_z, BiasSpec, SynthSpec};
pub use ulmask::{compute_mask, MaskedInstance, Masker};
pub use zfilter::{construct, z_filter, ConstructMode, FilterConfig, FilterOutcome, Rejection, TableMode};
pub use zstats::{biased_features, full_report, z_score, BiasedFeatureSets, CountTable, ZConfig, ZReport};
