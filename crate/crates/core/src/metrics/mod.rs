//! ROC, AUC, EER, per-class F1 and Table-style evaluation reports.
//!
//! Fake is the positive class. A sample is predicted fake when its score is
//! at or above the threshold.

mod report;
mod roc;

use serde::Serialize;

pub use report::{render_report, render_table_row, TableRow};
pub use roc::{auc, auc_ratio, eer, roc_curve, AucRatio, RocCurve, RocPoint};

use crate::data::Label;
use crate::error::{Error, Result};

/// Confusion counts with fake as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn from_predictions(pred: &[Label], truth: &[Label]) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(Error::InvalidArgument(format!(
                "{} predictions vs {} labels",
                pred.len(),
                truth.len()
            )));
        }
        if pred.is_empty() {
            return Err(Error::InvalidArgument("no predictions".into()));
        }
        let mut c = Confusion::default();
        for (p, t) in pred.iter().zip(truth) {
            match (p, t) {
                (Label::Fake, Label::Fake) => c.tp += 1,
                (Label::Fake, Label::Real) => c.fp += 1,
                (Label::Real, Label::Real) => c.tn += 1,
                (Label::Real, Label::Fake) => c.fn_ += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }

    /// `2TP / (2TP + FP + FN)` with fake as positive; `None` when the
    /// class never occurs in truth or predictions.
    pub fn f1_fake(&self) -> Option<f64> {
        f1(self.tp, self.fp, self.fn_)
    }

    /// Same with real as the positive class.
    pub fn f1_real(&self) -> Option<f64> {
        f1(self.tn, self.fn_, self.fp)
    }
}

fn f1(tp: usize, fp: usize, fn_: usize) -> Option<f64> {
    let den = 2 * tp + fp + fn_;
    (den > 0).then(|| (2 * tp) as f64 / den as f64)
}

/// `(f1_real, f1_fake)`; an undefined F1 is reported as 0.
pub fn f1_per_class(pred: &[Label], truth: &[Label]) -> Result<(f64, f64)> {
    let c = Confusion::from_predictions(pred, truth)?;
    Ok((c.f1_real().unwrap_or(0.0), c.f1_fake().unwrap_or(0.0)))
}

/// Hard labels: fake iff `score >= threshold`.
pub fn predict_labels(scores: &[f64], threshold: f64) -> Vec<Label> {
    scores
        .iter()
        .map(|&s| if s >= threshold { Label::Fake } else { Label::Real })
        .collect()
}

/// Full metric suite for one score set. Rates are fractions in `[0, 1]`;
/// rendering converts to percent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub member_ids: Vec<String>,
    pub f1_real: f64,
    pub f1_fake: f64,
    pub accuracy: f64,
    pub eer: f64,
    pub auc: f64,
    pub threshold: f64,
    pub confusion: Confusion,
    pub n_real: usize,
    pub n_fake: usize,
    pub warnings: Vec<String>,
}

pub fn evaluate(scores: &[f64], labels: &[Label], threshold: f64) -> Result<EvalReport> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidArgument(format!("threshold {threshold} outside [0, 1]")));
    }
    let curve = roc_curve(scores, labels)?;
    let pred = predict_labels(scores, threshold);
    let confusion = Confusion::from_predictions(&pred, labels)?;

    let mut warnings = Vec::new();
    let f1_real = confusion.f1_real().unwrap_or_else(|| {
        warnings.push("f1_real undefined (empty support), reported as 0".to_string());
        0.0
    });
    let f1_fake = confusion.f1_fake().unwrap_or_else(|| {
        warnings.push("f1_fake undefined (empty support), reported as 0".to_string());
        0.0
    });
    if confusion.tp + confusion.fp == 0 {
        warnings.push("no sample predicted fake".to_string());
    }
    if confusion.tn + confusion.fn_ == 0 {
        warnings.push("no sample predicted real".to_string());
    }

    Ok(EvalReport {
        member_ids: Vec::new(),
        f1_real,
        f1_fake,
        accuracy: confusion.accuracy(),
        eer: eer(&curve),
        auc: auc(&curve),
        threshold,
        confusion,
        n_real: curve.n_real(),
        n_fake: curve.n_fake(),
        warnings,
    })
}
