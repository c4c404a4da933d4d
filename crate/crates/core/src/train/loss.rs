use crate::data::Label;
use crate::error::{Error, Result};
use crate::model::ClassifierModel;

/// Scores are clamped to `[SCORE_EPS, 1 - SCORE_EPS]` before taking logs.
pub const SCORE_EPS: f64 = 1e-7;

fn check_lengths(n_scores: usize, n_labels: usize) -> Result<()> {
    if n_scores != n_labels {
        return Err(Error::InvalidArgument(format!(
            "{n_scores} inputs vs {n_labels} labels"
        )));
    }
    if n_scores == 0 {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    Ok(())
}

fn sample_loss(p: f64, y: Label, w_real: f64) -> f64 {
    let p = p.clamp(SCORE_EPS, 1.0 - SCORE_EPS);
    match y {
        Label::Fake => -p.ln(),
        Label::Real => -w_real * (1.0 - p).ln(),
    }
}

/// `-(1/N) Σ [ y log p + w_real (1 - y) log(1 - p) ]`, fake = 1.
pub fn weighted_bce(scores: &[f64], labels: &[Label], w_real: f64) -> Result<f64> {
    check_lengths(scores.len(), labels.len())?;
    let total: f64 = scores
        .iter()
        .zip(labels)
        .map(|(&p, &y)| sample_loss(p, y, w_real))
        .sum();
    Ok(total / scores.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossGradient {
    pub loss: f64,
    /// Aligned with `model.params()`; frozen arrays stay zero.
    pub grads: Vec<Vec<f64>>,
}

/// Loss and its exact gradient with respect to every parameter array.
pub fn loss_gradient<X: AsRef<[f64]>>(
    model: &ClassifierModel,
    batch: &[X],
    labels: &[Label],
    w_real: f64,
) -> Result<LossGradient> {
    check_lengths(batch.len(), labels.len())?;
    let n = batch.len() as f64;
    let mut grads = model.zero_grads();
    let mut total = 0.0;
    for (x, &y) in batch.iter().zip(labels) {
        let x = x.as_ref();
        let trace = model.trace(x)?;
        let p = trace.score;
        total += sample_loss(p, y, w_real);
        // d/dz of the per-sample loss through the sigmoid; zero where clamped.
        let dz = if p <= SCORE_EPS || p >= 1.0 - SCORE_EPS {
            0.0
        } else {
            match y {
                Label::Fake => p - 1.0,
                Label::Real => w_real * p,
            }
        };
        if dz != 0.0 {
            model.backward(x, &trace, dz / n, &mut grads);
        }
    }
    Ok(LossGradient {
        loss: total / n,
        grads,
    })
}
