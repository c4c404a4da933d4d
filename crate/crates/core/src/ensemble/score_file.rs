//! Score files: `sample_id,score` CSV with optional `# key=value` metadata
//! lines before the header.
//!
//! ```text
//! # model_id=toy-a
//! sample_id,score
//! synth-3,0.8123
//! ```
//!
//! Fused files carry `# member_ids=a;b;c` instead. Scores are written in the
//! shortest form that parses back to the same `f64`.

use std::fmt::Write as _;
use std::path::Path;

use super::ScoreSet;
use crate::error::{Error, Result};

const HEADER: &str = "sample_id,score";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreFileMeta {
    pub model_id: Option<String>,
    pub member_ids: Vec<String>,
}

pub fn write_score_file(path: &Path, set: &ScoreSet, member_ids: &[String]) -> Result<()> {
    let mut out = String::new();
    if member_ids.is_empty() {
        let _ = writeln!(out, "# model_id={}", set.model_id());
    } else {
        let _ = writeln!(out, "# member_ids={}", member_ids.join(";"));
    }
    let _ = writeln!(out, "{HEADER}");
    for (id, s) in set.scores() {
        let _ = writeln!(out, "{id},{s}");
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Read a score file. Without a `model_id` line the id is the file stem.
pub fn read_score_file(path: &Path) -> Result<(ScoreSet, ScoreFileMeta)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };

    let mut meta = ScoreFileMeta::default();
    let mut seen_header = false;
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((k, v)) = comment.trim().split_once('=') {
                match k.trim() {
                    "model_id" => meta.model_id = Some(v.trim().to_string()),
                    "member_ids" => {
                        meta.member_ids = v.split(';').map(|s| s.trim().to_string()).collect()
                    }
                    _ => {}
                }
            }
            continue;
        }
        if !seen_header {
            if line != HEADER {
                return Err(err(idx + 1, format!("expected header {HEADER:?}, got {line:?}")));
            }
            seen_header = true;
            continue;
        }
        let (id, score) = line
            .split_once(',')
            .ok_or_else(|| err(idx + 1, format!("expected sample_id,score: {line:?}")))?;
        let score: f64 = score
            .trim()
            .parse()
            .map_err(|e| err(idx + 1, format!("bad score {score:?}: {e}")))?;
        rows.push((id.trim().to_string(), score));
    }
    if !seen_header {
        return Err(err(1, "missing header".into()));
    }
    let model_id = meta.model_id.clone().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    let set = ScoreSet::new(model_id, rows).map_err(|e| match e {
        Error::ScoreRange(m) | Error::DuplicateSample(m) => err(0, format!("{}: {m}", path.display())),
        other => other,
    })?;
    Ok((set, meta))
}
