//! Self-describing JSON checkpoints.
//!
//! Floats are written with the shortest representation that parses back
//! to the same bits, so a save/load cycle is lossless.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{backbone, BackboneKind, BackboneRegistry, BackboneSpec, ClassifierModel, Param};
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format_version: u32,
    pub model_id: String,
    pub backbone: BackboneSpec,
    pub head_hidden: usize,
    pub params: Vec<Param>,
}

impl Checkpoint {
    pub fn from_model(model: &ClassifierModel) -> Self {
        Self {
            format_version: CHECKPOINT_FORMAT_VERSION,
            model_id: model.model_id.clone(),
            backbone: model.spec.clone(),
            head_hidden: model.head_hidden,
            params: model.params.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Checkpoint(e.to_string()))
    }

    /// Rebuild the model, checking every array against the spec.
    pub fn into_model(self, registry: &BackboneRegistry) -> Result<ClassifierModel> {
        if self.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported format_version {} (expected {CHECKPOINT_FORMAT_VERSION})",
                self.format_version
            )));
        }
        let mut model = super::build_model_with(registry, &self.backbone, self.head_hidden, 0)
            .map_err(|e| Error::Checkpoint(format!("spec: {e}")))?;
        if model.params.len() != self.params.len() {
            return Err(Error::Checkpoint(format!(
                "expected {} parameter arrays, found {}",
                model.params.len(),
                self.params.len()
            )));
        }
        for (want, got) in model.params.iter_mut().zip(self.params) {
            if want.name != got.name || want.shape != got.shape {
                return Err(Error::Checkpoint(format!(
                    "parameter mismatch: expected {} {:?}, found {} {:?}",
                    want.name, want.shape, got.name, got.shape
                )));
            }
            if got.data.len() != want.data.len() {
                return Err(Error::Checkpoint(format!(
                    "{}: {} values for shape {:?}",
                    got.name,
                    got.data.len(),
                    got.shape
                )));
            }
            if got.data.iter().any(|v| !v.is_finite()) {
                return Err(Error::Checkpoint(format!("{}: non-finite value", got.name)));
            }
            want.data = got.data;
        }
        debug_assert!(
            self.backbone.kind == BackboneKind::External
                || backbone::toy_param_shapes(&self.backbone).len() + 4 == model.params.len()
        );
        model.model_id = self.model_id;
        Ok(model)
    }
}

pub fn save_checkpoint(model: &ClassifierModel, path: &Path) -> Result<()> {
    std::fs::write(path, Checkpoint::from_model(model).to_json()).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path, registry: &BackboneRegistry) -> Result<ClassifierModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Checkpoint::from_json(&text)?.into_model(registry)
}
