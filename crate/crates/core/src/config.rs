//! Run configuration: one TOML file with a section per pipeline stage.
//!
//! ```toml
//! seed = 7
//!
//! [data]
//! manifest = "out/manifest.txt"   # or leave out and give [data.synth]
//!
//! [data.synth]
//! n_real = 200
//! n_fake = 1000
//! dim = 8
//! separation = 3.0
//!
//! [model]
//! head_hidden = 256
//! backbone = { kind = "toy_mlp", input_shape = [1, 1, 8], embed_dim = 16 }
//!
//! [train]
//! learning_rate = 1e-3
//!
//! [eval]
//! threshold = 0.5
//! ```
//!
//! The top-level `seed` drives every stochastic component and overrides any
//! seed set inside a section.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::SynthConfig;
use crate::error::{Error, Result};
use crate::model::{BackboneSpec, DEFAULT_HEAD_HIDDEN};
use crate::train::TrainConfig;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub eval: EvalSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub manifest: Option<PathBuf>,
    pub synth: Option<SynthConfig>,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            manifest: None,
            synth: Some(SynthConfig::default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub backbone: BackboneSpec,
    #[serde(default = "default_head_hidden")]
    pub head_hidden: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_id: Option<String>,
}

fn default_head_hidden() -> usize {
    DEFAULT_HEAD_HIDDEN
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            backbone: BackboneSpec::toy_mlp(SynthConfig::default().dim, 16, 0),
            head_hidden: DEFAULT_HEAD_HIDDEN,
            model_id: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub threshold: f64,
    pub report: Option<PathBuf>,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            threshold: 0.5,
            report: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config {
            key: e
                .span()
                .map(|s| format!("offset {}", s.start))
                .unwrap_or_else(|| "<root>".into()),
            msg: e.message().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config { key, msg } => Error::Config {
                key: format!("{}: {key}", path.display()),
                msg,
            },
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialization cannot fail")
    }

    /// Seed for the head initializer.
    pub fn head_seed(&self) -> u64 {
        self.seed.wrapping_add(1)
    }

    /// Push the top-level seed into every section.
    pub fn resolve_seeds(&mut self) {
        if let Some(s) = &mut self.data.synth {
            s.seed = self.seed;
        }
        self.model.backbone.seed = self.seed;
        self.train.seed = self.seed.wrapping_add(2);
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if !(0.0..=1.0).contains(&self.eval.threshold) {
            return Err(Error::Config {
                key: "eval.threshold".into(),
                msg: format!("{} outside [0, 1]", self.eval.threshold),
            });
        }
        if self.model.head_hidden == 0 {
            return Err(Error::Config {
                key: "model.head_hidden".into(),
                msg: "must be >= 1".into(),
            });
        }
        if self.model.backbone.embed_dim == 0 {
            return Err(Error::Config {
                key: "model.backbone.embed_dim".into(),
                msg: "must be >= 1".into(),
            });
        }
        if self.data.manifest.is_none() && self.data.synth.is_none() {
            return Err(Error::Config {
                key: "data".into(),
                msg: "set data.manifest or data.synth".into(),
            });
        }
        Ok(())
    }
}
