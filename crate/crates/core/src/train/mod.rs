//! Weighted binary cross-entropy training with Adam.

mod adam;
mod fit;
mod loss;

pub use adam::{adam_step, AdamState};
pub use fit::{fit, EpochStats, FitResult};
pub use loss::{loss_gradient, weighted_bce, LossGradient, SCORE_EPS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Loss multiplier for real samples. `None` derives `n_fake / n_real`
    /// from the training data.
    pub real_class_weight: Option<f64>,
    pub seed: u64,
    /// Epochs without a validation AUC improvement before stopping; 0 disables.
    pub early_stop_patience: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-6,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            batch_size: 32,
            max_epochs: 30,
            real_class_weight: None,
            seed: 0,
            early_stop_patience: 5,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: &str| {
            Err(Error::Config {
                key: format!("train.{key}"),
                msg: msg.to_string(),
            })
        };
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return bad("learning_rate", "must be > 0");
        }
        if !(0.0..1.0).contains(&self.adam_beta1) {
            return bad("adam_beta1", "must lie in [0, 1)");
        }
        if !(0.0..1.0).contains(&self.adam_beta2) {
            return bad("adam_beta2", "must lie in [0, 1)");
        }
        if !self.adam_eps.is_finite() || self.adam_eps <= 0.0 {
            return bad("adam_eps", "must be > 0");
        }
        if self.batch_size == 0 {
            return bad("batch_size", "must be >= 1");
        }
        if let Some(w) = self.real_class_weight {
            if !w.is_finite() || w <= 0.0 {
                return bad("real_class_weight", "must be a positive number");
            }
        }
        Ok(())
    }
}
