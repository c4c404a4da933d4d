//! Two-Gaussian synthetic datasets.
//!
//! Real samples are drawn from `N(-(s/2) u, I)` and fake samples from
//! `N(+(s/2) u, I)`, where `u = (1, ..., 1) / sqrt(dim)` and `s` is the
//! requested separation. The Bayes-optimal score is the projection onto `u`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{DatasetManifest, Label, SampleRecord, Source, Split};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_real: usize,
    pub n_fake: usize,
    pub dim: usize,
    pub separation: f64,
    /// Fraction of each class assigned to the training split.
    pub train_frac: f64,
    /// Fraction of each class assigned to the validation split; the rest is test.
    pub val_frac: f64,
    /// Fraction of train+val records whose label is flipped after generation.
    /// Test labels are never flipped.
    pub label_noise: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_real: 200,
            n_fake: 1000,
            dim: 8,
            separation: 3.0,
            train_frac: 0.6,
            val_frac: 0.2,
            label_noise: 0.0,
        }
    }
}

impl SynthConfig {
    /// Generating direction `u`.
    pub fn direction(&self) -> Vec<f64> {
        vec![1.0 / (self.dim as f64).sqrt(); self.dim]
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        if self.dim == 0 {
            return bad("synth dim must be >= 1");
        }
        if !self.separation.is_finite() || self.separation < 0.0 {
            return bad("synth separation must be finite and >= 0");
        }
        let frac_ok = |f: f64| (0.0..=1.0).contains(&f);
        if !frac_ok(self.train_frac)
            || !frac_ok(self.val_frac)
            || self.train_frac + self.val_frac > 1.0
        {
            return bad("synth split fractions must lie in [0,1] and sum to <= 1");
        }
        if !frac_ok(self.label_noise) {
            return bad("synth label_noise must lie in [0,1]");
        }
        Ok(())
    }
}

pub fn synth_dataset(cfg: &SynthConfig) -> Result<DatasetManifest> {
    cfg.validate()?;
    let n = cfg.n_real + cfg.n_fake;
    if n == 0 {
        return Err(Error::EmptyManifest);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut labels: Vec<Label> = std::iter::repeat_n(Label::Real, cfg.n_real)
        .chain(std::iter::repeat_n(Label::Fake, cfg.n_fake))
        .collect();
    labels.shuffle(&mut rng);

    // Stratified split assignment: each class is split by the same fractions.
    let mut splits = vec![Split::Test; n];
    for class in [Label::Real, Label::Fake] {
        let mut idx: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        let total = idx.len();
        let n_train = ((total as f64) * cfg.train_frac).round() as usize;
        let n_val = (((total as f64) * cfg.val_frac).round() as usize).min(total - n_train.min(total));
        for (k, &i) in idx.iter().enumerate() {
            splits[i] = if k < n_train {
                Split::Train
            } else if k < n_train + n_val {
                Split::Val
            } else {
                Split::Test
            };
        }
    }

    let u = cfg.direction();
    let half = cfg.separation / 2.0;
    let mut features = Vec::with_capacity(n);
    for &label in &labels {
        let sign = if label.is_fake() { 1.0 } else { -1.0 };
        let x: Vec<f64> = u
            .iter()
            .map(|&ui| {
                let z: f64 = rng.sample(StandardNormal);
                z + sign * half * ui
            })
            .collect();
        features.push(x);
    }

    let mut observed = labels.clone();
    if cfg.label_noise > 0.0 {
        let mut pool: Vec<usize> = (0..n).filter(|&i| splits[i] != Split::Test).collect();
        pool.shuffle(&mut rng);
        let n_flip = ((pool.len() as f64) * cfg.label_noise).round() as usize;
        for &i in &pool[..n_flip] {
            observed[i] = observed[i].flipped();
        }
    }

    let records = features
        .into_iter()
        .enumerate()
        .map(|(i, x)| SampleRecord {
            sample_id: format!("synth-{i}"),
            source: Source::Inline(x),
            label: observed[i],
            split: splits[i],
        })
        .collect();
    DatasetManifest::new(records)
}
