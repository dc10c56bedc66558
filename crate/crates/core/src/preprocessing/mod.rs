//! Band-pass plus power-line notch filtering, and segmentation into
//! fixed-length trials.

pub mod design;
pub mod filter;
pub mod spectrum;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signal_io::{Label, Recording, Segment};
use design::Sos;

#[derive(Debug, Error, PartialEq)]
pub enum FilterError {
    #[error("{what} = {value} Hz is not below the Nyquist frequency {nyquist} Hz")]
    Nyquist { what: &'static str, value: f64, nyquist: f64 },
    #[error("invalid filter spec: {0}")]
    InvalidSpec(String),
    #[error("{n} samples is too short for filter warm-up (need more than {min})")]
    TooShort { n: usize, min: usize },
    #[error("recording of {duration_s} s is shorter than one {window_s} s window")]
    ShorterThanWindow { duration_s: f64, window_s: f64 },
    #[error("window length must be positive, got {0}")]
    BadWindow(f64),
}

pub type Result<T> = std::result::Result<T, FilterError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterSpec {
    pub f_low_hz: f64,
    pub f_high_hz: f64,
    pub notch_hz: f64,
    pub notch_q: f64,
    /// Prototype order of the band-pass; must be even.
    pub order: usize,
    /// Run each filter forward and backward.
    pub zero_phase: bool,
}

impl Default for FilterSpec {
    fn default() -> Self {
        FilterSpec { f_low_hz: 0.5, f_high_hz: 60.0, notch_hz: 50.0, notch_q: 30.0, order: 4, zero_phase: true }
    }
}

impl FilterSpec {
    pub fn validate(&self, sample_rate_hz: f64) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.f_low_hz) || !positive(self.f_high_hz) || !positive(self.notch_hz) {
            return Err(FilterError::InvalidSpec("cutoff frequencies must be positive".into()));
        }
        if self.f_low_hz >= self.f_high_hz {
            return Err(FilterError::InvalidSpec(format!(
                "f_low ({}) must be below f_high ({})",
                self.f_low_hz, self.f_high_hz
            )));
        }
        if !positive(self.notch_q) {
            return Err(FilterError::InvalidSpec(format!("notch Q must be positive, got {}", self.notch_q)));
        }
        if self.order == 0 || self.order % 2 != 0 {
            return Err(FilterError::InvalidSpec(format!("order must be a positive even integer, got {}", self.order)));
        }
        let nyquist = sample_rate_hz / 2.0;
        for (what, value) in [("f_high", self.f_high_hz), ("notch", self.notch_hz)] {
            if value >= nyquist {
                return Err(FilterError::Nyquist { what, value, nyquist });
            }
        }
        Ok(())
    }

    pub fn bandpass_sos(&self, fs: f64) -> Sos {
        design::butter_bandpass(self.order, self.f_low_hz, self.f_high_hz, fs)
    }

    pub fn notch_sos(&self, fs: f64) -> Sos {
        design::iir_notch(self.notch_hz, self.notch_q, fs)
    }
}

fn apply(x: &Recording, sos: &Sos, zero_phase: bool) -> Result<Recording> {
    let n = x.n_samples();
    let padlen = filter::default_padlen(sos);
    let min = if zero_phase { padlen } else { 3 * sos.sections.len() };
    if n <= min {
        return Err(FilterError::TooShort { n, min });
    }
    let data = x
        .data
        .par_iter()
        .map(|row| if zero_phase { filter::sosfiltfilt(sos, row, padlen) } else { filter::sosfilt(sos, row) })
        .collect();
    Ok(x.with_data(data))
}

/// Butterworth band-pass on every channel.
pub fn bandpass(x: &Recording, spec: &FilterSpec) -> Result<Recording> {
    spec.validate(x.sample_rate_hz)?;
    apply(x, &spec.bandpass_sos(x.sample_rate_hz), spec.zero_phase)
}

/// Second-order notch at `spec.notch_hz` on every channel.
pub fn notch(x: &Recording, spec: &FilterSpec) -> Result<Recording> {
    spec.validate(x.sample_rate_hz)?;
    apply(x, &spec.notch_sos(x.sample_rate_hz), spec.zero_phase)
}

/// Band-pass first, then notch.
pub fn preprocess(x: &Recording, spec: &FilterSpec) -> Result<Recording> {
    notch(&bandpass(x, spec)?, spec)
}

/// A fixed-length window of a preprocessed recording.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub subject_id: String,
    pub segment: Segment,
    pub trial_index: usize,
    pub sample_rate_hz: f64,
    pub channel_names: Vec<String>,
    /// channels × samples
    pub data: Vec<Vec<f64>>,
    pub label: Option<Label>,
}

impl Trial {
    pub fn n_channels(&self) -> usize {
        self.data.len()
    }

    pub fn n_samples(&self) -> usize {
        self.data.first().map_or(0, Vec::len)
    }
}

/// Cuts `x` into `floor(n / t)` consecutive non-overlapping windows of
/// `t = round(window_s · fs)` samples; the remainder is dropped.
pub fn segment_trials(x: &Recording, window_s: f64) -> Result<Vec<Trial>> {
    if !(window_s.is_finite() && window_s > 0.0) {
        return Err(FilterError::BadWindow(window_s));
    }
    let t = (window_s * x.sample_rate_hz).round() as usize;
    if t == 0 {
        return Err(FilterError::BadWindow(window_s));
    }
    let k = x.n_samples() / t;
    if k == 0 {
        return Err(FilterError::ShorterThanWindow { duration_s: x.duration_s(), window_s });
    }
    Ok((0..k)
        .map(|i| Trial {
            subject_id: x.subject_id.clone(),
            segment: x.segment,
            trial_index: i,
            sample_rate_hz: x.sample_rate_hz,
            channel_names: x.channel_names.clone(),
            data: x.data.iter().map(|row| row[i * t..(i + 1) * t].to_vec()).collect(),
            label: None,
        })
        .collect())
}
