//! Dataset manifests, class-imbalance weights, image preprocessing and
//! synthetic data generation.

mod manifest;
mod preprocess;
mod synth;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use manifest::{load_manifest, parse_manifest, write_manifest, ClassCounts, DatasetManifest};
pub use preprocess::{preprocess, preprocess_pixels, ImageTensor, Normalization};
pub use synth::{synth_dataset, SynthConfig};

/// Ground-truth class. Fake is the positive class throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Real = 0,
    Fake = 1,
}

impl Label {
    pub fn is_fake(self) -> bool {
        self == Label::Fake
    }

    /// `0.0` for real, `1.0` for fake.
    pub fn target(self) -> f64 {
        match self {
            Label::Real => 0.0,
            Label::Fake => 1.0,
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Real => Label::Fake,
            Label::Fake => Label::Real,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Real => "real",
            Label::Fake => "fake",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "real" | "0" => Ok(Label::Real),
            "fake" | "1" => Ok(Label::Fake),
            other => Err(format!("unknown label token: {other}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split token: {other}")),
        }
    }
}

/// Where a sample's pixels come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    /// Raster image on disk, relative paths resolve against the manifest directory.
    Path(std::path::PathBuf),
    /// Pre-extracted numeric features, used for synthetic data.
    Inline(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub sample_id: String,
    pub source: Source,
    pub label: Label,
    pub split: Split,
}

/// Multiplier on real-class (minority) loss terms: `n_fake / n_real`.
pub fn class_weight(n_real: usize, n_fake: usize) -> Result<f64> {
    if n_real == 0 || n_fake == 0 {
        return Err(Error::ClassWeight { n_real, n_fake });
    }
    Ok(n_fake as f64 / n_real as f64)
}

/// A model-ready sample: flattened HWC input plus its label.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub sample_id: String,
    pub input: Vec<f64>,
    pub label: Label,
}

/// Load every record of `split` as a model input of `input_shape` (H, W, C).
///
/// Inline sources must already have `H*W*C` values. Image sources are
/// decoded and preprocessed to `(H, W)` with three channels.
pub fn materialize(
    manifest: &DatasetManifest,
    split: Split,
    input_shape: [usize; 3],
    norm: &Normalization,
) -> Result<Vec<Example>> {
    let [h, w, c] = input_shape;
    let want = h * w * c;
    manifest
        .split(split)
        .map(|rec| {
            let input = match &rec.source {
                Source::Inline(v) => {
                    if v.len() != want {
                        return Err(Error::Shape(format!(
                            "{}: inline source has {} values, model expects {want}",
                            rec.sample_id,
                            v.len()
                        )));
                    }
                    v.clone()
                }
                Source::Path(p) => {
                    if c != 3 {
                        return Err(Error::Shape(format!(
                            "{}: image sources produce 3 channels, model expects {c}",
                            rec.sample_id
                        )));
                    }
                    let path = manifest.resolve(p);
                    let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
                    preprocess(&bytes, (h, w), norm)?.into_data()
                }
            };
            Ok(Example {
                sample_id: rec.sample_id.clone(),
                input,
                label: rec.label,
            })
        })
        .collect()
}
