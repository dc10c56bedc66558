//! EEG recording data model, CSV ingestion and the synthetic cohort generator.

mod csv_io;
mod forms;
mod synth;

pub use csv_io::{load_recording, read_recording, write_recording, write_recording_to, RecordingMeta};
pub use forms::{read_forms_csv, synth_forms, write_forms_csv, FormsSpec, SubjectForms};
pub use synth::{cohort_labels, synth_cohort, synth_subject, CohortSpec, SubjectRecordings};

use std::collections::HashSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("recording file is empty")]
    Empty,
    #[error("row {row}: expected {expected} values, found {found}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("row {row}, column {column}: `{value}` is not a number")]
    NonNumeric { row: usize, column: usize, value: String },
    #[error("non-finite sample in channel {channel} at index {index}")]
    NonFinite { channel: usize, index: usize },
    #[error("duplicate channel name `{0}`")]
    DuplicateChannel(String),
    #[error("a recording needs at least 2 channels, got {0}")]
    TooFewChannels(usize),
    #[error("{names} channel names for {rows} data rows")]
    ChannelCountMismatch { names: usize, rows: usize },
    #[error("channel {channel} has {found} samples, expected {expected}")]
    UnequalChannels { channel: usize, expected: usize, found: usize },
    #[error("sample rate must be positive and finite, got {0}")]
    BadSampleRate(f64),
    #[error("invalid cohort spec: {0}")]
    InvalidSpec(String),
    #[error("malformed forms file: {0}")]
    BadForms(String),
    #[error("unknown segment `{0}` (expected pre-task, task or post-task)")]
    UnknownSegment(String),
    #[error("unknown label `{0}` (expected stress or normal)")]
    UnknownLabel(String),
}

pub type Result<T> = std::result::Result<T, SignalError>;

/// One of the three stages of the listening paradigm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Segment {
    PreTask,
    Task,
    PostTask,
}

impl Segment {
    pub const ALL: [Segment; 3] = [Segment::PreTask, Segment::Task, Segment::PostTask];

    pub fn as_str(self) -> &'static str {
        match self {
            Segment::PreTask => "pre-task",
            Segment::Task => "task",
            Segment::PostTask => "post-task",
        }
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Segment {
    type Err = SignalError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pre-task" | "pretask" | "pre" => Ok(Segment::PreTask),
            "task" => Ok(Segment::Task),
            "post-task" | "posttask" | "post" => Ok(Segment::PostTask),
            _ => Err(SignalError::UnknownSegment(s.to_string())),
        }
    }
}

/// Subject class. `Stress` is the positive class for F1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Stress,
    Normal,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Stress => "stress",
            Label::Normal => "normal",
        }
    }

    pub fn is_stress(self) -> bool {
        self == Label::Stress
    }

    pub fn from_bool(stress: bool) -> Self {
        if stress {
            Label::Stress
        } else {
            Label::Normal
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = SignalError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "stress" | "1" => Ok(Label::Stress),
            "normal" | "0" => Ok(Label::Normal),
            _ => Err(SignalError::UnknownLabel(s.to_string())),
        }
    }
}

/// One subject-segment of raw EEG, stored channels × samples in microvolts.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub subject_id: String,
    pub segment: Segment,
    pub channel_names: Vec<String>,
    pub sample_rate_hz: f64,
    /// One row per channel, all of equal length.
    pub data: Vec<Vec<f64>>,
}

impl Recording {
    /// Builds a recording after checking shape, naming and finiteness.
    pub fn new(
        subject_id: impl Into<String>,
        segment: Segment,
        channel_names: Vec<String>,
        sample_rate_hz: f64,
        data: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let rec = Recording { subject_id: subject_id.into(), segment, channel_names, sample_rate_hz, data };
        rec.validate()?;
        Ok(rec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(SignalError::BadSampleRate(self.sample_rate_hz));
        }
        if self.data.len() < 2 {
            return Err(SignalError::TooFewChannels(self.data.len()));
        }
        if self.channel_names.len() != self.data.len() {
            return Err(SignalError::ChannelCountMismatch { names: self.channel_names.len(), rows: self.data.len() });
        }
        let mut seen = HashSet::new();
        for name in &self.channel_names {
            if !seen.insert(name.as_str()) {
                return Err(SignalError::DuplicateChannel(name.clone()));
            }
        }
        let n = self.data[0].len();
        if n == 0 {
            return Err(SignalError::Empty);
        }
        for (channel, row) in self.data.iter().enumerate() {
            if row.len() != n {
                return Err(SignalError::UnequalChannels { channel, expected: n, found: row.len() });
            }
            if let Some(index) = row.iter().position(|v| !v.is_finite()) {
                return Err(SignalError::NonFinite { channel, index });
            }
        }
        Ok(())
    }

    pub fn n_channels(&self) -> usize {
        self.data.len()
    }

    pub fn n_samples(&self) -> usize {
        self.data.first().map_or(0, Vec::len)
    }

    pub fn duration_s(&self) -> f64 {
        self.n_samples() as f64 / self.sample_rate_hz
    }

    /// Same metadata, new channel data. Shape is the caller's responsibility.
    pub(crate) fn with_data(&self, data: Vec<Vec<f64>>) -> Recording {
        Recording {
            subject_id: self.subject_id.clone(),
            segment: self.segment,
            channel_names: self.channel_names.clone(),
            sample_rate_hz: self.sample_rate_hz,
            data,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("C{i}")).collect()
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(
            Recording::new("s", Segment::Task, names(1), 500.0, vec![vec![1.0]]),
            Err(SignalError::TooFewChannels(1))
        ));
        assert!(matches!(
            Recording::new("s", Segment::Task, names(2), 500.0, vec![vec![1.0], vec![1.0, 2.0]]),
            Err(SignalError::UnequalChannels { channel: 1, .. })
        ));
        assert!(matches!(
            Recording::new("s", Segment::Task, vec!["A".into(), "A".into()], 500.0, vec![vec![1.0]; 2]),
            Err(SignalError::DuplicateChannel(_))
        ));
        assert!(matches!(
            Recording::new("s", Segment::Task, names(2), 500.0, vec![vec![1.0, f64::NAN]; 2]),
            Err(SignalError::NonFinite { channel: 0, index: 1 })
        ));
        assert!(matches!(
            Recording::new("s", Segment::Task, names(2), 0.0, vec![vec![1.0]; 2]),
            Err(SignalError::BadSampleRate(_))
        ));
    }

    #[test]
    fn segment_and_label_parse() {
        for seg in Segment::ALL {
            assert_eq!(seg.as_str().parse::<Segment>().unwrap(), seg);
        }
        assert_eq!("Stress".parse::<Label>().unwrap(), Label::Stress);
        assert!("calm".parse::<Label>().is_err());
    }
}
