//! End-to-end study orchestration: JSON config, stage functions shared by
//! the monolithic `run` and the standalone stage commands, and the output
//! tree they write.

mod config;
mod files;
mod plots;
mod run;
mod stages;

pub use config::{
    EvaluationConfig, InputSource, LabelConfig, LabelSource, OutputOptions, PipelineConfig, RecordingsInput,
};
pub use files::{parse_trial_stem, tree_digest, trial_stem};
pub use plots::tsne_svg;
pub use run::{cmd_run, RunSummary};
pub use stages::{
    cmd_stage, stage_embed, stage_evaluate, stage_features, stage_persist, stage_plot, stage_preprocess, stage_synth,
    stage_tsne, StageName,
};

use std::fmt;

use thiserror::Error;

/// Pipeline step an error is attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Synth,
    Load,
    Preprocess,
    Embed,
    Persist,
    Features,
    Evaluate,
    Tsne,
    Plot,
    Manifest,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Synth => "synth",
            Stage::Load => "load",
            Stage::Preprocess => "preprocess",
            Stage::Embed => "embed",
            Stage::Persist => "persist",
            Stage::Features => "features",
            Stage::Evaluate => "evaluate",
            Stage::Tsne => "tsne",
            Stage::Plot => "plot",
            Stage::Manifest => "manifest",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Invalid configuration or parameters. Exit code 2.
    Config,
    /// Missing, unreadable or malformed input files. Exit code 3.
    Input,
    /// A numeric routine could not produce a result. Exit code 4.
    Numeric,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Input => 3,
            ErrorKind::Numeric => 4,
        }
    }
}

#[derive(Debug, Error)]
#[error("{stage}: {message}")]
pub struct PipelineError {
    pub stage: Stage,
    pub kind: ErrorKind,
    pub message: String,
}

impl PipelineError {
    pub fn new(stage: Stage, kind: ErrorKind, message: impl Into<String>) -> Self {
        PipelineError { stage, kind, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        PipelineError::new(Stage::Config, ErrorKind::Config, message)
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }
}

pub type Result<T> = std::result::Result<T, PipelineError>;

/// Maps module errors onto exit-code categories.
pub(crate) trait Classify: fmt::Display {
    fn kind(&self) -> ErrorKind;
}

impl Classify for crate::signal_io::SignalError {
    fn kind(&self) -> ErrorKind {
        use crate::signal_io::SignalError as E;
        match self {
            E::InvalidSpec(_) | E::BadSampleRate(_) => ErrorKind::Config,
            _ => ErrorKind::Input,
        }
    }
}

impl Classify for crate::preprocessing::FilterError {
    fn kind(&self) -> ErrorKind {
        use crate::preprocessing::FilterError as E;
        match self {
            E::Nyquist { .. } | E::InvalidSpec(_) | E::BadWindow(_) => ErrorKind::Config,
            E::TooShort { .. } | E::ShorterThanWindow { .. } => ErrorKind::Input,
        }
    }
}

impl Classify for crate::pointcloud::EmbedError {
    fn kind(&self) -> ErrorKind {
        use crate::pointcloud::EmbedError as E;
        match self {
            E::DimensionOutOfRange { .. } | E::InvalidParams(_) => ErrorKind::Config,
            E::Ragged => ErrorKind::Input,
            E::NonFinite { .. } | E::TooFewPoints(_) | E::InvalidDistances(_) => ErrorKind::Numeric,
        }
    }
}

impl Classify for crate::homology::HomologyError {
    fn kind(&self) -> ErrorKind {
        use crate::homology::HomologyError as E;
        match self {
            E::BadThreshold(_) | E::DimensionOutOfRange(_) => ErrorKind::Config,
            E::Parse(_) => ErrorKind::Input,
            E::NoPositiveDistance | E::MissingFace { .. } | E::FaceOrder { .. } => ErrorKind::Numeric,
        }
    }
}

impl Classify for crate::learning::LearnError {
    fn kind(&self) -> ErrorKind {
        use crate::learning::LearnError as E;
        match self {
            E::InvalidParam(_) | E::TooFewGroups { .. } => ErrorKind::Config,
            E::LengthMismatch(..) | E::Empty => ErrorKind::Input,
            _ => ErrorKind::Numeric,
        }
    }
}

impl Classify for std::io::Error {
    fn kind(&self) -> ErrorKind {
        ErrorKind::Input
    }
}

pub(crate) trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T>;
}

impl<T, E: Classify> AtStage<T> for std::result::Result<T, E> {
    fn at(self, stage: Stage) -> Result<T> {
        self.map_err(|e| PipelineError::new(stage, e.kind(), e.to_string()))
    }
}
