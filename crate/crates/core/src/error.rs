use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("empty manifest")]
    EmptyManifest,

    #[error("duplicate sample_id: {0}")]
    DuplicateSample(String),

    #[error("{0} split empty")]
    EmptySplit(String),

    #[error("single-class data: {0}")]
    SingleClass(String),

    #[error("class weight undefined: n_real={n_real}, n_fake={n_fake}")]
    ClassWeight { n_real: usize, n_fake: usize },

    #[error("image: {0}")]
    Image(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unregistered external backbone: {0}")]
    UnknownBackbone(String),

    #[error("sample sets differ: {0}")]
    Coverage(String),

    #[error("score out of range: {0}")]
    ScoreRange(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("config: {key}: {msg}")]
    Config { key: String, msg: String },

    #[error("run directory not empty: {0} (pass --overwrite)")]
    RunDirExists(PathBuf),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable reason code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::EmptyManifest => "empty_manifest",
            Error::DuplicateSample(_) => "duplicate_sample",
            Error::EmptySplit(_) => "empty_split",
            Error::SingleClass(_) => "single_class",
            Error::ClassWeight { .. } => "class_weight",
            Error::Image(_) => "image",
            Error::Shape(_) => "shape",
            Error::NonFinite(_) => "non_finite",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::UnknownBackbone(_) => "unknown_backbone",
            Error::Coverage(_) => "coverage",
            Error::ScoreRange(_) => "score_range",
            Error::Checkpoint(_) => "checkpoint",
            Error::Config { .. } => "config",
            Error::RunDirExists(_) => "run_dir_exists",
        }
    }

    /// Process exit code: 1 usage/config, 2 data, 3 runtime.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::InvalidArgument(_) | Error::RunDirExists(_) => 1,
            Error::Parse { .. }
            | Error::EmptyManifest
            | Error::DuplicateSample(_)
            | Error::EmptySplit(_)
            | Error::SingleClass(_)
            | Error::ClassWeight { .. }
            | Error::Image(_)
            | Error::Coverage(_)
            | Error::ScoreRange(_)
            | Error::NonFinite(_) => 2,
            Error::Io { .. }
            | Error::Shape(_)
            | Error::UnknownBackbone(_)
            | Error::Checkpoint(_) => 3,
        }
    }
}
