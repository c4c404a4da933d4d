//! Parameter count, latency and on-disk size of a model.

use std::time::Instant;

use serde::Serialize;

use super::{count_params, Checkpoint, ClassifierModel, CountMode};
use crate::error::Result;

const BYTES_PER_MB: f64 = 1024.0 * 1024.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRecord {
    pub model_id: String,
    pub param_count: usize,
    /// Mean per-sample forward latency in milliseconds.
    pub inference_ms: f64,
    /// Serialized checkpoint size in MiB.
    pub size_mb: f64,
    /// Individual timed repetitions, milliseconds.
    #[serde(skip)]
    pub rep_ms: Vec<f64>,
}

/// Time `reps` single-sample forwards after `warmup` untimed ones.
pub fn profile(model: &ClassifierModel, input: &[f64], warmup: usize, reps: usize) -> Result<ProfileRecord> {
    let reps = reps.max(1);
    for _ in 0..warmup {
        std::hint::black_box(model.score(input)?);
    }
    let mut rep_ms = Vec::with_capacity(reps);
    for _ in 0..reps {
        let start = Instant::now();
        std::hint::black_box(model.score(std::hint::black_box(input))?);
        rep_ms.push(start.elapsed().as_secs_f64() * 1e3);
    }
    let inference_ms = rep_ms.iter().sum::<f64>() / reps as f64;
    let size_bytes = Checkpoint::from_model(model).to_json().len();
    Ok(ProfileRecord {
        model_id: model.model_id().to_string(),
        param_count: count_params(model, CountMode::All) + model.external_param_count(),
        inference_ms,
        size_mb: size_bytes as f64 / BYTES_PER_MB,
        rep_ms,
    })
}

/// `name & params(M) & ms & MB`, one decimal for params and latency, whole MB.
pub fn render_profile_row(name: &str, rec: &ProfileRecord) -> String {
    format!(
        "{name} & {:.1} & {:.1} & {:.0}",
        rec.param_count as f64 / 1e6,
        rec.inference_ms,
        rec.size_mb
    )
}
