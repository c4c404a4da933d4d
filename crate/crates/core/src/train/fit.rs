use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{adam_step, loss_gradient, AdamState, TrainConfig};
use crate::data::{class_weight, Example, Label};
use crate::error::{Error, Result};
use crate::metrics::{auc, eer, roc_curve};
use crate::model::ClassifierModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Sample-weighted mean of the per-batch losses seen during the epoch.
    pub train_loss: f64,
    pub val_auc: f64,
    pub val_eer: f64,
    /// Excluded from serialized stats so reruns compare byte-for-byte.
    #[serde(skip)]
    pub wall_ms: f64,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    /// Parameters from the epoch with the highest validation AUC, or the
    /// initial parameters when no epoch ran.
    pub best: ClassifierModel,
    pub best_epoch: Option<usize>,
    pub last: ClassifierModel,
    pub stats: Vec<EpochStats>,
    pub real_class_weight: f64,
}

fn class_counts(examples: &[Example]) -> (usize, usize) {
    let fake = examples.iter().filter(|e| e.label.is_fake()).count();
    (examples.len() - fake, fake)
}

fn require_both(name: &str, examples: &[Example]) -> Result<()> {
    if examples.is_empty() {
        return Err(Error::EmptySplit(name.to_string()));
    }
    let (real, fake) = class_counts(examples);
    if real == 0 || fake == 0 {
        return Err(Error::SingleClass(format!(
            "{name} split has n_real={real}, n_fake={fake}"
        )));
    }
    Ok(())
}

/// Validation AUC and EER of `model`.
pub(crate) fn validate(model: &ClassifierModel, val: &[Example]) -> Result<(f64, f64)> {
    let scores = model.forward(&val.iter().map(|e| e.input.as_slice()).collect::<Vec<_>>())?;
    let labels: Vec<Label> = val.iter().map(|e| e.label).collect();
    let curve = roc_curve(&scores, &labels)?;
    Ok((auc(&curve), eer(&curve)))
}

/// Train with minibatch Adam, keeping the parameters with the best
/// validation AUC.
pub fn fit(
    model: &ClassifierModel,
    train: &[Example],
    val: &[Example],
    cfg: &TrainConfig,
) -> Result<FitResult> {
    cfg.validate()?;
    require_both("train", train)?;
    require_both("val", val)?;
    let w_real = match cfg.real_class_weight {
        Some(w) => w,
        None => {
            let (real, fake) = class_counts(train);
            class_weight(real, fake)?
        }
    };

    let mut current = model.clone();
    let mut best = model.clone();
    let mut best_auc = f64::NEG_INFINITY;
    let mut best_epoch = None;
    let mut since_best = 0;
    let mut stats = Vec::new();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = AdamState::new(current.params());
    let mut order: Vec<usize> = (0..train.len()).collect();

    for epoch in 0..cfg.max_epochs {
        let start = Instant::now();
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let inputs: Vec<&[f64]> = chunk.iter().map(|&i| train[i].input.as_slice()).collect();
            let labels: Vec<Label> = chunk.iter().map(|&i| train[i].label).collect();
            let lg = loss_gradient(&current, &inputs, &labels, w_real)?;
            loss_sum += lg.loss * chunk.len() as f64;
            adam_step(current.params_mut(), &lg.grads, &mut state, cfg)?;
        }
        let (val_auc, val_eer) = validate(&current, val)?;
        stats.push(EpochStats {
            epoch,
            train_loss: loss_sum / train.len() as f64,
            val_auc,
            val_eer,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });

        if val_auc > best_auc {
            best_auc = val_auc;
            best = current.clone();
            best_epoch = Some(epoch);
            since_best = 0;
        } else {
            since_best += 1;
            if cfg.early_stop_patience > 0 && since_best >= cfg.early_stop_patience {
                break;
            }
        }
    }

    Ok(FitResult {
        best,
        best_epoch,
        last: current,
        stats,
        real_class_weight: w_real,
    })
}
