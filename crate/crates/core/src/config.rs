//! One configuration schema for every command.
//!
//! ```toml
//! [features]
//! length_bucket_edges = [5, 9, 13, 20]
//! ratio_bucket_edges = [0.5, 0.75, 1.0, 1.5]
//! overlap_thresholds = [0.2, 0.4, 0.6, 0.8, 0.9]
//! use_hypo_pred = false
//! premise_ngrams = true
//!
//! [zstats]
//! k = 20
//! min_count = 1
//!
//! [filter]
//! batch_size = 10000
//! freeze_seed_bias = false
//!
//! [confidence]
//! tau = 0.95
//! prob_source = "instance"
//!
//! [mask]
//! mask_premise = true
//!
//! [hypo]
//! smoothing = 1.0
//! ```
//!
//! Command-line flags override the file; the file overrides the defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureConfig;
use crate::hypoclf::ConfidenceConfig;
use crate::zfilter::FilterConfig;
use crate::zstats::ZConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaskConfig {
    pub mask_premise: bool,
}

impl Default for MaskConfig {
    fn default() -> Self {
        MaskConfig { mask_premise: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HypoConfig {
    pub smoothing: f64,
}

impl Default for HypoConfig {
    fn default() -> Self {
        HypoConfig { smoothing: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolConfig {
    pub features: FeatureConfig,
    pub zstats: ZConfig,
    pub filter: FilterConfig,
    pub confidence: ConfidenceConfig,
    pub mask: MaskConfig,
    pub hypo: HypoConfig,
}

impl ToolConfig {
    pub fn load(path: &Path) -> Result<ToolConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: ToolConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok(config)
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<ToolConfig> {
        path.map_or_else(|| Ok(ToolConfig::default()), ToolConfig::load)
    }

    pub fn validate(&self) -> Result<()> {
        self.features.validate()?;
        self.zstats.validate()?;
        self.filter_config().validate()?;
        self.confidence.validate()?;
        if !(self.hypo.smoothing > 0.0 && self.hypo.smoothing.is_finite()) {
            return Err(Error::Config("hypo.smoothing must be positive".into()));
        }
        Ok(())
    }

    /// Filter settings with the shared feature and z-statistic sections folded in.
    pub fn filter_config(&self) -> FilterConfig {
        FilterConfig {
            zconfig: self.zstats,
            feature_config: self.features.clone(),
            ..self.filter.clone()
        }
    }
}
