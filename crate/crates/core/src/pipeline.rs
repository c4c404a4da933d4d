//! Implementations of the `dfdetect` subcommands.
//!
//! Each command reads its inputs from disk, writes its outputs to disk and
//! returns a short human-readable summary. All outputs except latency
//! measurements are byte-identical across reruns with the same seed.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::data::{
    load_manifest, materialize, synth_dataset, write_manifest, ClassCounts, DatasetManifest, Label, Split,
};
use crate::ensemble::{fuse, read_score_file, write_score_file, ScoreSet};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, render_report, EvalReport};
use crate::model::{
    build_model, count_params, load_checkpoint, profile, render_profile_row, save_checkpoint, BackboneRegistry,
    ClassifierModel, CountMode, ProfileRecord,
};
use crate::train::{fit, FitResult};

pub const MANIFEST_FILE: &str = "manifest.txt";
pub const BEST_CHECKPOINT: &str = "best.ckpt.json";
pub const FINAL_CHECKPOINT: &str = "final.ckpt.json";
pub const STATS_FILE: &str = "stats.jsonl";
pub const TIMING_FILE: &str = "timing.jsonl";
pub const CONFIG_SNAPSHOT: &str = "config.toml";

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub manifest_path: PathBuf,
    pub counts: Vec<(Split, ClassCounts)>,
    pub class_weight: f64,
}

/// Generate the synthetic dataset described by `cfg.data.synth`.
pub fn cmd_synth(cfg: &RunConfig, out_dir: &Path) -> Result<SynthOutput> {
    let synth = cfg.data.synth.as_ref().ok_or_else(|| Error::Config {
        key: "data.synth".into(),
        msg: "missing".into(),
    })?;
    let manifest = synth_dataset(synth)?;
    create_dir(out_dir)?;
    let manifest_path = out_dir.join(MANIFEST_FILE);
    write_manifest(&manifest, &manifest_path)?;
    let total = manifest.counts().values().fold(ClassCounts::default(), |a, c| ClassCounts {
        real: a.real + c.real,
        fake: a.fake + c.fake,
    });
    Ok(SynthOutput {
        manifest_path,
        counts: manifest.counts().iter().map(|(s, c)| (*s, *c)).collect(),
        class_weight: crate::data::class_weight(total.real, total.fake)?,
    })
}

impl SynthOutput {
    pub fn summary(&self) -> String {
        let mut s = format!("manifest: {}\n", self.manifest_path.display());
        for (split, c) in &self.counts {
            let _ = writeln!(s, "{split}: real={} fake={}", c.real, c.fake);
        }
        let _ = writeln!(s, "class_weight: {}", self.class_weight);
        s
    }
}

fn load_data(cfg: &RunConfig) -> Result<DatasetManifest> {
    match (&cfg.data.manifest, &cfg.data.synth) {
        (Some(path), _) => load_manifest(path),
        (None, Some(synth)) => synth_dataset(synth),
        (None, None) => Err(Error::Config {
            key: "data".into(),
            msg: "set data.manifest or data.synth".into(),
        }),
    }
}

/// Refuse to write into a non-empty run directory unless `overwrite`.
fn prepare_run_dir(dir: &Path, overwrite: bool) -> Result<()> {
    if dir.exists() {
        let non_empty = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .next()
            .is_some();
        if non_empty && !overwrite {
            return Err(Error::RunDirExists(dir.to_path_buf()));
        }
    }
    create_dir(dir)
}

#[derive(Debug)]
pub struct TrainOutput {
    pub run_dir: PathBuf,
    pub fit: FitResult,
}

impl TrainOutput {
    pub fn best_val_auc(&self) -> Option<f64> {
        self.fit.best_epoch.map(|e| self.fit.stats[e].val_auc)
    }

    pub fn summary(&self) -> String {
        let mut s = format!("run_dir: {}\n", self.run_dir.display());
        let _ = writeln!(s, "epochs: {}", self.fit.stats.len());
        let _ = writeln!(s, "real_class_weight: {}", self.fit.real_class_weight);
        match self.fit.best_epoch {
            Some(e) => {
                let _ = writeln!(s, "best_epoch: {e}");
                let _ = writeln!(s, "best_val_auc: {}", self.fit.stats[e].val_auc);
            }
            None => s.push_str("best_epoch: none\n"),
        }
        s
    }
}

pub fn cmd_train(cfg: &RunConfig, registry: &BackboneRegistry, run_dir: &Path, overwrite: bool) -> Result<TrainOutput> {
    cfg.validate()?;
    let manifest = load_data(cfg)?;
    let spec = &cfg.model.backbone;
    let mut model = build_model_for(cfg, registry)?;
    if let Some(id) = &cfg.model.model_id {
        model.set_model_id(id.clone());
    }
    let norm = spec.normalization();
    let train = materialize(&manifest, Split::Train, spec.input_shape, &norm)?;
    let val = materialize(&manifest, Split::Val, spec.input_shape, &norm)?;
    let result = fit(&model, &train, &val, &cfg.train)?;

    prepare_run_dir(run_dir, overwrite)?;
    write(&run_dir.join(CONFIG_SNAPSHOT), &cfg.to_toml())?;
    let mut stats = String::new();
    let mut timing = String::new();
    for s in &result.stats {
        stats.push_str(&serde_json::to_string(s).expect("stats serialize"));
        stats.push('\n');
        let _ = writeln!(timing, "{{\"epoch\":{},\"wall_ms\":{}}}", s.epoch, s.wall_ms);
    }
    write(&run_dir.join(STATS_FILE), &stats)?;
    write(&run_dir.join(TIMING_FILE), &timing)?;
    save_checkpoint(&result.best, &run_dir.join(BEST_CHECKPOINT))?;
    save_checkpoint(&result.last, &run_dir.join(FINAL_CHECKPOINT))?;
    Ok(TrainOutput {
        run_dir: run_dir.to_path_buf(),
        fit: result,
    })
}

fn build_model_for(cfg: &RunConfig, registry: &BackboneRegistry) -> Result<ClassifierModel> {
    crate::model::build_model_with(registry, &cfg.model.backbone, cfg.model.head_hidden, cfg.head_seed())
}

/// Score one split of a manifest and write a score file in manifest order.
pub fn cmd_predict(
    checkpoint: &Path,
    registry: &BackboneRegistry,
    manifest: &Path,
    split: Split,
    out: &Path,
) -> Result<ScoreSet> {
    let model = load_checkpoint(checkpoint, registry)?;
    let manifest = load_manifest(manifest)?;
    let spec = model.spec();
    let examples = materialize(&manifest, split, spec.input_shape, &spec.normalization())?;
    if examples.is_empty() {
        return Err(Error::EmptySplit(split.to_string()));
    }
    let inputs: Vec<&[f64]> = examples.iter().map(|e| e.input.as_slice()).collect();
    let scores = model.forward(&inputs)?;
    let set = ScoreSet::new(
        model.model_id(),
        examples.iter().map(|e| e.sample_id.clone()).zip(scores),
    )?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    write_score_file(out, &set, &[])?;
    Ok(set)
}

/// Average score files. Member ids come from each file's metadata.
pub fn cmd_fuse(files: &[PathBuf], out: &Path) -> Result<ScoreSet> {
    if files.is_empty() {
        return Err(Error::InvalidArgument("fuse needs at least one score file".into()));
    }
    let members = files
        .iter()
        .map(|f| read_score_file(f).map(|(set, _)| set))
        .collect::<Result<Vec<_>>>()?;
    let fused = fuse(&members).map_err(|e| match e {
        Error::Coverage(diff) => {
            let offenders = offending_files(files, &members);
            Error::Coverage(format!("{diff} in {offenders}"))
        }
        other => other,
    })?;
    let member_ids = fused.member_ids.clone();
    let set = fused.into_score_set("fused");
    write_score_file(out, &set, &member_ids)?;
    Ok(set)
}

fn offending_files(files: &[PathBuf], members: &[ScoreSet]) -> String {
    let reference: HashSet<&String> = members[0].scores().keys().collect();
    let mut names: Vec<String> = Vec::new();
    for (f, m) in files.iter().zip(members) {
        let keys: HashSet<&String> = m.scores().keys().collect();
        if keys != reference {
            names.push(f.display().to_string());
        }
    }
    if !names.is_empty() {
        names.insert(0, files[0].display().to_string());
    }
    names.join(", ")
}

/// Evaluate a score file against the labels of one manifest split.
pub fn cmd_eval(scores: &Path, manifest: &Path, split: Split, threshold: f64, out: Option<&Path>) -> Result<EvalReport> {
    let (set, meta) = read_score_file(scores)?;
    let manifest = load_manifest(manifest)?;
    let records: Vec<_> = manifest.split(split).collect();
    if records.is_empty() {
        return Err(Error::EmptySplit(split.to_string()));
    }

    let split_ids: HashSet<&str> = records.iter().map(|r| r.sample_id.as_str()).collect();
    let mut mismatch: Vec<&str> = set
        .scores()
        .keys()
        .map(String::as_str)
        .filter(|id| !split_ids.contains(id))
        .chain(records.iter().map(|r| r.sample_id.as_str()).filter(|id| set.get(id).is_none()))
        .collect();
    if !mismatch.is_empty() {
        mismatch.sort_unstable();
        return Err(Error::Coverage(format!(
            "{{{}}} between {} and {split} split",
            mismatch.join(", "),
            scores.display()
        )));
    }

    let values: Vec<f64> = records.iter().map(|r| set.get(&r.sample_id).expect("checked")).collect();
    let labels: Vec<Label> = records.iter().map(|r| r.label).collect();
    let mut report = evaluate(&values, &labels, threshold)?;
    report.member_ids = if meta.member_ids.is_empty() {
        vec![set.model_id().to_string()]
    } else {
        meta.member_ids
    };
    if let Some(out) = out {
        if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
            create_dir(dir)?;
        }
        write(out, &render_report(&report))?;
    }
    Ok(report)
}

#[derive(Debug)]
pub struct ProfileOutput {
    pub record: ProfileRecord,
    pub trainable_params: usize,
    pub table_row: String,
}

impl ProfileOutput {
    pub fn summary(&self) -> String {
        let r = &self.record;
        let mut s = String::new();
        let _ = writeln!(s, "model_id: {}", r.model_id);
        let _ = writeln!(s, "param_count: {}", r.param_count);
        let _ = writeln!(s, "trainable_param_count: {}", self.trainable_params);
        let _ = writeln!(s, "inference_ms: {:.4}", r.inference_ms);
        let _ = writeln!(s, "size_mb: {:.6}", r.size_mb);
        let _ = writeln!(s, "table_row: {}", self.table_row);
        s
    }
}

/// Profile a checkpoint on a constant input of the model's shape.
pub fn cmd_profile(
    checkpoint: &Path,
    registry: &BackboneRegistry,
    name: Option<&str>,
    warmup: usize,
    reps: usize,
) -> Result<ProfileOutput> {
    let model = load_checkpoint(checkpoint, registry)?;
    let input = vec![0.5; model.input_len()];
    let record = profile(&model, &input, warmup, reps)?;
    let table_row = render_profile_row(name.unwrap_or(model.model_id()), &record);
    Ok(ProfileOutput {
        trainable_params: count_params(&model, CountMode::TrainableOnly),
        record,
        table_row,
    })
}

/// Build a fresh (untrained) model from a config, used by tests and `train`.
pub fn initial_model(cfg: &RunConfig) -> Result<ClassifierModel> {
    build_model(&cfg.model.backbone, cfg.model.head_hidden, cfg.head_seed())
}
