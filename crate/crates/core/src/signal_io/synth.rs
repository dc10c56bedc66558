//! Synthetic cohort generator.
//!
//! Each channel is a mix of three shared band-limited sources (theta, alpha,
//! beta) plus independent 1/f^α background noise and an optional 50 Hz
//! power-line tone. The per-subject mixing matrix is `1 + dispersion · G`
//! with `G` standard normal, so after removing the across-channel mean the
//! channel point cloud spreads out in proportion to `dispersion`. Stress
//! subjects use the larger dispersion.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Label, Recording, Result, Segment, SignalError};
use crate::preprocessing::spectrum::shaped_noise;
use crate::seed;

/// Brain Products actiCHamp 32-channel 10-20 montage.
const MONTAGE_32: [&str; 32] = [
    "Fp1", "Fp2", "F7", "F3", "Fz", "F4", "F8", "FC5", "FC1", "FC2", "FC6", "T7", "C3", "Cz", "C4", "T8", "TP9", "CP5",
    "CP1", "CP2", "CP6", "TP10", "P7", "P3", "Pz", "P4", "P8", "PO9", "O1", "Oz", "O2", "PO10",
];

/// (low Hz, high Hz) of the shared sources.
const SOURCE_BANDS: [(f64, f64); 3] = [(4.0, 8.0), (8.0, 13.0), (13.0, 30.0)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CohortSpec {
    pub n_subjects: usize,
    pub n_stress: usize,
    pub segment_duration_s: f64,
    pub sample_rate_hz: f64,
    pub n_channels: usize,
    pub dispersion_normal: f64,
    pub dispersion_stress: f64,
    /// Amplitude of the injected 50 Hz tone, µV.
    pub pli_amplitude: f64,
    /// Spectral slope α of the background noise.
    pub noise_exponent: f64,
    /// Standard deviation of the background noise, µV.
    pub noise_amplitude: f64,
    /// Standard deviations of the theta, alpha and beta sources, µV.
    pub source_amplitudes: [f64; 3],
    /// Relative per-segment perturbation of the mixing matrix.
    pub segment_jitter: f64,
    pub rng_seed: u64,
}

impl Default for CohortSpec {
    fn default() -> Self {
        CohortSpec {
            n_subjects: 20,
            n_stress: 10,
            segment_duration_s: 180.0,
            sample_rate_hz: 500.0,
            n_channels: 32,
            dispersion_normal: 0.25,
            dispersion_stress: 0.75,
            pli_amplitude: 5.0,
            noise_exponent: 1.0,
            noise_amplitude: 4.0,
            source_amplitudes: [6.0, 10.0, 5.0],
            segment_jitter: 0.2,
            rng_seed: 7,
        }
    }
}

impl CohortSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SignalError::InvalidSpec(msg));
        if self.n_subjects == 0 {
            return bad("n_subjects must be positive".into());
        }
        if self.n_stress > self.n_subjects {
            return bad(format!("n_stress {} exceeds n_subjects {}", self.n_stress, self.n_subjects));
        }
        if self.n_channels < 2 {
            return bad(format!("n_channels must be at least 2, got {}", self.n_channels));
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return bad(format!("sample_rate_hz must be positive, got {}", self.sample_rate_hz));
        }
        if !(self.segment_duration_s.is_finite() && self.segment_duration_s > 0.0) || self.n_samples() == 0 {
            return bad(format!("segment_duration_s must be positive, got {}", self.segment_duration_s));
        }
        if !(self.dispersion_normal.is_finite() && self.dispersion_normal > 0.0) {
            return bad(format!("dispersion_normal must be positive, got {}", self.dispersion_normal));
        }
        if !(self.dispersion_stress.is_finite() && self.dispersion_stress > self.dispersion_normal) {
            return bad(format!(
                "dispersion_stress ({}) must exceed dispersion_normal ({})",
                self.dispersion_stress, self.dispersion_normal
            ));
        }
        let amps =
            [self.pli_amplitude, self.noise_amplitude, self.segment_jitter].into_iter().chain(self.source_amplitudes);
        for a in amps {
            if !(a.is_finite() && a >= 0.0) {
                return bad(format!("amplitudes and jitter must be finite and nonnegative, got {a}"));
            }
        }
        if !self.noise_exponent.is_finite() {
            return bad("noise_exponent must be finite".into());
        }
        let nyquist = self.sample_rate_hz / 2.0;
        if SOURCE_BANDS[2].1 >= nyquist || (self.pli_amplitude > 0.0 && 50.0 >= nyquist) {
            return bad(format!("sample rate {} Hz too low for the generated bands", self.sample_rate_hz));
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        (self.segment_duration_s * self.sample_rate_hz).round() as usize
    }

    pub fn subject_id(&self, index: usize) -> String {
        let width = self.n_subjects.to_string().len().max(2);
        format!("S{:0width$}", index + 1)
    }

    pub fn channel_names(&self) -> Vec<String> {
        if self.n_channels <= MONTAGE_32.len() {
            MONTAGE_32[..self.n_channels].iter().map(|s| s.to_string()).collect()
        } else {
            (1..=self.n_channels).map(|i| format!("Ch{i}")).collect()
        }
    }
}

/// The three segment recordings of one subject with its ground-truth label.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectRecordings {
    pub subject_id: String,
    pub label: Label,
    pub recordings: [Recording; 3],
}

/// Ground-truth labels: a seeded shuffle picks which subjects are stressed.
pub fn cohort_labels(spec: &CohortSpec) -> Result<Vec<Label>> {
    spec.validate()?;
    let mut order: Vec<usize> = (0..spec.n_subjects).collect();
    order.shuffle(&mut seed::rng(seed::derive(spec.rng_seed, "labels")));
    let mut labels = vec![Label::Normal; spec.n_subjects];
    for &i in &order[..spec.n_stress] {
        labels[i] = Label::Stress;
    }
    Ok(labels)
}

pub fn synth_cohort(spec: &CohortSpec) -> Result<Vec<SubjectRecordings>> {
    let labels = cohort_labels(spec)?;
    labels.iter().enumerate().map(|(i, &label)| synth_subject_with_label(spec, i, label)).collect()
}

/// Generates a single subject; identical to the matching entry of [`synth_cohort`].
pub fn synth_subject(spec: &CohortSpec, index: usize) -> Result<SubjectRecordings> {
    let labels = cohort_labels(spec)?;
    let label =
        *labels.get(index).ok_or_else(|| SignalError::InvalidSpec(format!("subject index {index} out of range")))?;
    synth_subject_with_label(spec, index, label)
}

fn synth_subject_with_label(spec: &CohortSpec, index: usize, label: Label) -> Result<SubjectRecordings> {
    let subject_id = spec.subject_id(index);
    let subject_seed = seed::derive(seed::derive(spec.rng_seed, "synth"), &subject_id);
    let dispersion = match label {
        Label::Stress => spec.dispersion_stress,
        Label::Normal => spec.dispersion_normal,
    };
    let k = SOURCE_BANDS.len();
    let mut rng = seed::rng(seed::derive(subject_seed, "mixing"));
    let base: Vec<Vec<f64>> =
        (0..spec.n_channels).map(|_| (0..k).map(|_| rng.sample(StandardNormal)).collect()).collect();

    let mut recs = Vec::with_capacity(3);
    for segment in Segment::ALL {
        let mut rng = seed::rng(seed::derive(subject_seed, segment.as_str()));
        let mixing: Vec<Vec<f64>> = base
            .iter()
            .map(|row| {
                row.iter()
                    .map(|g| {
                        let jitter: f64 = rng.sample(StandardNormal);
                        1.0 + dispersion * (g + spec.segment_jitter * jitter)
                    })
                    .collect()
            })
            .collect();
        recs.push(synth_recording(spec, &subject_id, segment, &mixing, &mut rng)?);
    }
    let recordings: [Recording; 3] = recs.try_into().expect("three segments");
    Ok(SubjectRecordings { subject_id, label, recordings })
}

fn synth_recording<R: Rng>(
    spec: &CohortSpec,
    subject_id: &str,
    segment: Segment,
    mixing: &[Vec<f64>],
    rng: &mut R,
) -> Result<Recording> {
    let n = spec.n_samples();
    let fs = spec.sample_rate_hz;
    let sources: Vec<Vec<f64>> = SOURCE_BANDS
        .iter()
        .map(|&(lo, hi)| shaped_noise(n, fs, rng, |f| if f >= lo && f <= hi { 1.0 } else { 0.0 }))
        .collect();
    let slope = spec.noise_exponent / 2.0;
    let pli_phase = rng.random::<f64>() * 2.0 * PI;

    let mut data = Vec::with_capacity(spec.n_channels);
    for weights in mixing {
        let noise = shaped_noise(n, fs, rng, |f| f.powf(-slope));
        let mut row: Vec<f64> = (0..n)
            .map(|t| {
                let mixed: f64 =
                    weights.iter().zip(&spec.source_amplitudes).zip(&sources).map(|((w, a), s)| w * a * s[t]).sum();
                let pli = spec.pli_amplitude * (2.0 * PI * 50.0 * t as f64 / fs + pli_phase).sin();
                mixed + spec.noise_amplitude * noise[t] + pli
            })
            .collect();
        let mean = row.iter().sum::<f64>() / n as f64;
        row.iter_mut().for_each(|v| *v -= mean);
        data.push(row);
    }
    Recording::new(subject_id, segment, spec.channel_names(), fs, data)
}
