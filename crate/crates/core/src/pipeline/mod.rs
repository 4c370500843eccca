//! Stage orchestration. Every stage reads and writes documented files in the
//! output directory, so any stage can be rerun on its own.

pub mod config;
pub mod stages;
pub mod synth;
pub mod timeline;

use std::path::PathBuf;

pub use config::RunConfig;
pub use stages::{run_pipeline, Ctx, Stage};
pub use synth::{generate_fixture, Archetype, ArchetypeSpec, SynthSpec};
pub use timeline::{emit_timeline, TimelineRow};

/// Error class, mapped to the process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Internal,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Internal => 4,
        }
    }
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("{stage}: {message}")]
pub struct PipelineError {
    pub stage: &'static str,
    pub kind: ErrorKind,
    pub message: String,
}

impl PipelineError {
    pub fn new(stage: &'static str, kind: ErrorKind, message: impl Into<String>) -> Self {
        PipelineError { stage, kind, message: message.into() }
    }
}

/// Output locations written by [`generate_fixture`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureFiles {
    pub archive: PathBuf,
    pub ground_truth: PathBuf,
    pub labels: PathBuf,
    pub annotations: PathBuf,
    pub config: PathBuf,
}
