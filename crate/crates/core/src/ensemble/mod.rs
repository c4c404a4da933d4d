//! Mean-of-sigmoids score fusion.
//!
//! The fused score of a sample is the arithmetic mean of its member scores,
//! computed exactly and rounded once. That makes fusion independent of
//! member order and keeps every fused score between the smallest and
//! largest member score, with no rounding drift.

mod score_file;

use std::collections::BTreeSet;

use indexmap::IndexMap;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

pub use score_file::{read_score_file, write_score_file, ScoreFileMeta};

use crate::data::Label;
use crate::error::{Error, Result};

/// Per-sample probability-of-fake from one model, in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSet {
    model_id: String,
    scores: IndexMap<String, f64>,
}

fn check_score(id: &str, s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::ScoreRange(format!("{id}: {s}")));
    }
    Ok(())
}

impl ScoreSet {
    pub fn new(model_id: impl Into<String>, scores: impl IntoIterator<Item = (String, f64)>) -> Result<Self> {
        let model_id = model_id.into();
        let mut map = IndexMap::new();
        for (id, s) in scores {
            check_score(&id, s)?;
            if map.insert(id.clone(), s).is_some() {
                return Err(Error::DuplicateSample(id));
            }
        }
        Ok(Self { model_id, scores: map })
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn scores(&self) -> &IndexMap<String, f64> {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn get(&self, sample_id: &str) -> Option<f64> {
        self.scores.get(sample_id).copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusedScores {
    pub member_ids: Vec<String>,
    /// Ordered like the first member.
    pub scores: IndexMap<String, f64>,
}

impl FusedScores {
    pub fn into_score_set(self, model_id: impl Into<String>) -> ScoreSet {
        ScoreSet {
            model_id: model_id.into(),
            scores: self.scores,
        }
    }
}

/// Correctly rounded arithmetic mean.
pub fn exact_mean(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "mean of nothing");
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        return first;
    }
    let sum: BigRational = values
        .iter()
        .map(|&v| BigRational::from_float(v).expect("finite score"))
        .sum();
    (sum / BigInt::from(values.len()))
        .to_f64()
        .expect("mean of finite values is finite")
}

pub fn fuse(members: &[ScoreSet]) -> Result<FusedScores> {
    let first = members
        .first()
        .ok_or_else(|| Error::InvalidArgument("fuse needs at least one member".into()))?;

    let mut mismatch = BTreeSet::new();
    for m in &members[1..] {
        mismatch.extend(m.scores.keys().filter(|k| !first.scores.contains_key(*k)).cloned());
        mismatch.extend(first.scores.keys().filter(|k| !m.scores.contains_key(*k)).cloned());
    }
    if !mismatch.is_empty() {
        let listed: Vec<String> = mismatch.into_iter().collect();
        return Err(Error::Coverage(format!("{{{}}}", listed.join(", "))));
    }
    for m in members {
        for (id, &s) in &m.scores {
            check_score(id, s)?;
        }
    }

    let mut buf = Vec::with_capacity(members.len());
    let scores = first
        .scores
        .keys()
        .map(|id| {
            buf.clear();
            buf.extend(members.iter().map(|m| m.scores[id]));
            (id.clone(), exact_mean(&buf))
        })
        .collect();
    Ok(FusedScores {
        member_ids: members.iter().map(|m| m.model_id.clone()).collect(),
        scores,
    })
}

/// Fake iff `score >= threshold`.
pub fn classify(scores: &IndexMap<String, f64>, threshold: f64) -> Result<IndexMap<String, Label>> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidArgument(format!("threshold {threshold} outside [0, 1]")));
    }
    Ok(scores
        .iter()
        .map(|(id, &s)| {
            let label = if s >= threshold { Label::Fake } else { Label::Real };
            (id.clone(), label)
        })
        .collect())
}
