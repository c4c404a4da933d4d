//! Line-delimited manifest files.
//!
//! One record per line as `key=value` fields separated by tabs (any
//! whitespace when the line has no tab):
//!
//! Shown space separated below; files written by this crate use tabs.
//!
//! ```text
//! # comment
//! sample_id=img-001 path=faces/img-001.png label=real split=train
//! sample_id=synth-0 inline=3ff0000000000000,bfe0000000000000 label=fake split=val
//! ```
//!
//! `inline` values are the IEEE-754 bit patterns of each `f64`, as 16
//! lowercase hex digits, comma separated. This keeps synthetic features
//! bit-exact through a write/load cycle.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Label, SampleRecord, Source, Split};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub real: usize,
    pub fake: usize,
}

impl ClassCounts {
    pub fn total(&self) -> usize {
        self.real + self.fake
    }

    pub fn add(&mut self, label: Label) {
        match label {
            Label::Real => self.real += 1,
            Label::Fake => self.fake += 1,
        }
    }
}

/// Validated, immutable collection of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    records: Vec<SampleRecord>,
    counts: BTreeMap<Split, ClassCounts>,
    base_dir: Option<PathBuf>,
}

fn tally(records: &[SampleRecord]) -> BTreeMap<Split, ClassCounts> {
    let mut counts: BTreeMap<Split, ClassCounts> = BTreeMap::new();
    for r in records {
        counts.entry(r.split).or_default().add(r.label);
    }
    counts
}

impl DatasetManifest {
    pub fn new(records: Vec<SampleRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyManifest);
        }
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if !seen.insert(r.sample_id.as_str()) {
                return Err(Error::DuplicateSample(r.sample_id.clone()));
            }
        }
        let counts = tally(&records);
        Ok(Self {
            records,
            counts,
            base_dir: None,
        })
    }

    /// Build a manifest and check that externally supplied counts agree
    /// with the records.
    pub fn with_counts(
        records: Vec<SampleRecord>,
        counts: BTreeMap<Split, ClassCounts>,
    ) -> Result<Self> {
        let m = Self::new(records)?;
        if m.counts != counts {
            return Err(Error::InvalidArgument(format!(
                "declared counts {counts:?} do not match records {:?}",
                m.counts
            )));
        }
        Ok(m)
    }

    pub fn with_base_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.base_dir = Some(dir.into());
        self
    }

    pub fn records(&self) -> &[SampleRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn counts(&self) -> &BTreeMap<Split, ClassCounts> {
        &self.counts
    }

    pub fn split_counts(&self, split: Split) -> ClassCounts {
        self.counts.get(&split).copied().unwrap_or_default()
    }

    /// Records of one split, in manifest order.
    pub fn split(&self, split: Split) -> impl Iterator<Item = &SampleRecord> {
        self.records.iter().filter(move |r| r.split == split)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }

    /// Class weight for the real class computed on the training split.
    pub fn train_class_weight(&self) -> Result<f64> {
        let c = self.split_counts(Split::Train);
        super::class_weight(c.real, c.fake)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            write_record(&mut out, r);
        }
        out
    }
}

fn write_record(out: &mut String, r: &SampleRecord) {
    let _ = write!(out, "sample_id={}\t", r.sample_id);
    match &r.source {
        Source::Path(p) => {
            let _ = write!(out, "path={}\t", p.display());
        }
        Source::Inline(values) => {
            out.push_str("inline=");
            for (i, v) in values.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{:016x}", v.to_bits());
            }
            out.push('\t');
        }
    }
    let _ = writeln!(out, "label={}\tsplit={}", r.label, r.split);
}

pub fn write_manifest(manifest: &DatasetManifest, path: &Path) -> Result<()> {
    std::fs::write(path, manifest.to_text()).map_err(|e| Error::io(path, e))
}

pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let m = parse_manifest(&text, path)?;
    Ok(match path.parent() {
        Some(dir) => m.with_base_dir(dir),
        None => m,
    })
}

/// Parse manifest text. `origin` is only used in error messages.
pub fn parse_manifest(text: &str, origin: &Path) -> Result<DatasetManifest> {
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let rec = parse_line(line).map_err(|msg| Error::Parse {
            path: origin.to_path_buf(),
            line: idx + 1,
            msg,
        })?;
        records.push(rec);
    }
    DatasetManifest::new(records)
}

fn parse_line(line: &str) -> std::result::Result<SampleRecord, String> {
    let fields: Vec<&str> = if line.contains('\t') {
        line.split('\t').filter(|f| !f.is_empty()).collect()
    } else {
        line.split_whitespace().collect()
    };

    let mut sample_id = None;
    let mut source = None;
    let mut label = None;
    let mut split = None;
    for field in fields {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| format!("field without '=': {field:?}"))?;
        let value = value.trim();
        match key.trim() {
            "sample_id" => {
                if value.is_empty() {
                    return Err("empty sample_id".into());
                }
                sample_id = Some(value.to_string());
            }
            "path" => {
                if source.is_some() {
                    return Err("both path and inline given".into());
                }
                source = Some(Source::Path(PathBuf::from(value)));
            }
            "inline" => {
                if source.is_some() {
                    return Err("both path and inline given".into());
                }
                source = Some(Source::Inline(decode_inline(value)?));
            }
            "label" => label = Some(value.parse::<Label>()?),
            "split" => split = Some(value.parse::<Split>()?),
            other => return Err(format!("unknown field: {other}")),
        }
    }
    Ok(SampleRecord {
        sample_id: sample_id.ok_or("missing sample_id")?,
        source: source.ok_or("missing path or inline")?,
        label: label.ok_or("missing label")?,
        split: split.ok_or("missing split")?,
    })
}

fn decode_inline(value: &str) -> std::result::Result<Vec<f64>, String> {
    if value.is_empty() {
        return Err("empty inline array".into());
    }
    value
        .split(',')
        .map(|word| {
            if word.len() != 16 {
                return Err(format!("inline word must be 16 hex digits: {word:?}"));
            }
            u64::from_str_radix(word, 16)
                .map(f64::from_bits)
                .map_err(|e| format!("bad inline word {word:?}: {e}"))
        })
        .collect()
}
