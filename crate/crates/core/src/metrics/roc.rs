use serde::Serialize;

use crate::data::Label;
use crate::error::{Error, Result};

/// One operating point. `fp`/`tp` are the raw counts behind the rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Decision threshold (`score >= threshold` is fake). `+inf` for the origin.
    pub threshold: f64,
    pub fp: usize,
    pub tp: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocCurve {
    points: Vec<RocPoint>,
    n_real: usize,
    n_fake: usize,
}

/// AUC as an exact fraction `num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AucRatio {
    pub num: u128,
    pub den: u128,
}

impl AucRatio {
    pub fn value(self) -> f64 {
        // both sides are exact in f64 for any realistic dataset size
        self.num as f64 / self.den as f64
    }
}

impl RocCurve {
    pub fn points(&self) -> &[RocPoint] {
        &self.points
    }

    pub fn n_real(&self) -> usize {
        self.n_real
    }

    pub fn n_fake(&self) -> usize {
        self.n_fake
    }
}

pub(crate) fn check_both_classes(labels: &[Label]) -> Result<(usize, usize)> {
    let n_fake = labels.iter().filter(|l| l.is_fake()).count();
    let n_real = labels.len() - n_fake;
    if n_fake == 0 || n_real == 0 {
        return Err(Error::SingleClass(format!(
            "ROC undefined with n_real={n_real}, n_fake={n_fake}"
        )));
    }
    Ok((n_real, n_fake))
}

/// Sweep thresholds over the distinct scores, highest first. Tied scores
/// collapse to one point.
pub fn roc_curve(scores: &[f64], labels: &[Label]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} scores vs {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if let Some(s) = scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::NonFinite(format!("score {s}")));
    }
    let (n_real, n_fake) = check_both_classes(labels)?;

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = Vec::with_capacity(order.len() + 1);
    points.push(RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
        fp: 0,
        tp: 0,
    });
    let (mut fp, mut tp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let t = scores[order[i]];
        while i < order.len() && scores[order[i]] == t {
            if labels[order[i]].is_fake() {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            fpr: fp as f64 / n_real as f64,
            tpr: tp as f64 / n_fake as f64,
            threshold: t,
            fp,
            tp,
        });
    }
    Ok(RocCurve {
        points,
        n_real,
        n_fake,
    })
}

/// Trapezoidal area as an exact fraction. Equal to the Mann-Whitney
/// statistic with half credit for ties.
pub fn auc_ratio(curve: &RocCurve) -> AucRatio {
    let num: u128 = curve
        .points
        .windows(2)
        .map(|w| (w[1].fp - w[0].fp) as u128 * (w[1].tp + w[0].tp) as u128)
        .sum();
    AucRatio {
        num,
        den: 2 * curve.n_real as u128 * curve.n_fake as u128,
    }
}

pub fn auc(curve: &RocCurve) -> f64 {
    auc_ratio(curve).value()
}

/// Equal error rate: where `fpr == 1 - tpr`, linearly interpolated on the
/// segment where `fpr - fnr` changes sign.
pub fn eer(curve: &RocCurve) -> f64 {
    let gap = |p: &RocPoint| p.fpr - (1.0 - p.tpr);
    let pts = &curve.points;
    for i in 1..pts.len() {
        let d1 = gap(&pts[i]);
        if d1 == 0.0 {
            return pts[i].fpr;
        }
        if d1 > 0.0 {
            let (a, b) = (&pts[i - 1], &pts[i]);
            let d0 = gap(a);
            let t = -d0 / (d1 - d0);
            return a.fpr + t * (b.fpr - a.fpr);
        }
    }
    // The last point is always (1, 1), where the gap is +1.
    unreachable!("ROC curve does not end at (1, 1)")
}
