//! Real-vs-fake image classification toolkit.
//!
//! The crate covers the full pipeline for a binary deepfake detector built
//! from a feature-extracting backbone and a small sigmoid head:
//!
//! - [`data`]: manifests, class weights, image preprocessing, synthetic data
//! - [`model`]: backbones, the two-layer classification head, checkpoints, profiling
//! - [`train`]: weighted binary cross-entropy, analytic gradients, Adam, the fit loop
//! - [`ensemble`]: mean-of-sigmoids score fusion and thresholding
//! - [`metrics`]: ROC, AUC, EER, per-class F1 and evaluation reports
//! - [`pipeline`]: the command implementations behind the `dfdetect` binary
//!
//! Labels follow one convention everywhere: fake is the positive class (`1`).

pub mod config;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod train;

pub use error::{Error, Result};
