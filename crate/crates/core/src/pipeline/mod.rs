//! Resumable per-video analysis and report generation.
//!
//! [`analyze`] fans the corpus out over a worker pool and persists one JSON
//! record per video into a [`ResultStore`]; [`report`] turns a store into
//! CSV and JSON tables.

use std::fmt::Display;
use std::path::{Path, PathBuf};

use thiserror::Error;

mod analyze;
mod config;
mod report;
mod store;
mod validate;

pub use analyze::{analyze, load_corpus, AnalyzeOptions, FailedVideo, RunSummary};
pub use config::{
    interpolate_env, AudioConfig, BiasConfig, CategoryConfig, EntityConfig, NetworkConfig, PipelineConfig,
    RemoteToxicityConfig, ToxicityConfig, VisualConfig,
};
pub use report::{report, ReportSummary};
pub use store::{write_atomic, ResultStore, RunEntry, StoredVideo, VideoMetrics, VideoStatus};
pub use validate::{validate, validate_file, ValidationReport};

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("corpus: {0}")]
    Corpus(String),
    #[error("corpus {0} contains no videos")]
    CorpusEmpty(PathBuf),
    #[error("result store: {0}")]
    Store(String),
    #[error("result store {0} holds no video records")]
    EmptyStore(PathBuf),
}

impl PipelineError {
    pub fn io(path: &Path, err: impl Display) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            message: err.to_string(),
        }
    }

    /// True for errors caused by the configuration or the corpus as a whole.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Self::Config(_) | Self::Corpus(_) | Self::CorpusEmpty(_))
    }
}
