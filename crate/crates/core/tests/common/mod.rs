//! Oracles and fixtures shared by the integration test targets.
#![allow(dead_code)]

use std::f64::consts::PI;

use eegtda::learning::{FeatureVector, Provenance, StudyDataset};
use eegtda::preprocessing::{FilterSpec, Trial};
use eegtda::seed;
use eegtda::signal_io::{Label, Recording, Segment};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn trial(data: Vec<Vec<f64>>) -> Trial {
    Trial {
        subject_id: "S01".into(),
        segment: Segment::Task,
        trial_index: 0,
        sample_rate_hz: 500.0,
        channel_names: (0..data.len()).map(|i| format!("C{i}")).collect(),
        data,
        label: None,
    }
}

pub fn gaussian_rows(m: usize, p: usize, seed_value: u64) -> Vec<Vec<f64>> {
    let mut rng = seed::rng(seed_value);
    (0..m).map(|_| (0..p).map(|_| rng.sample(StandardNormal)).collect()).collect()
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// eigenvalues and the matrix whose columns are the eigenvectors.
pub fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let diag: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-30 * diag {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

/// Scores from the eigendecomposition of the channel Gram matrix of the
/// centred data: column k is `sqrt(λ_k) v_k`.
pub fn gram_scores(data: &[Vec<f64>], d: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let (c, t) = (data.len(), data[0].len());
    let mut x = data.to_vec();
    for j in 0..t {
        let mean = (0..c).map(|i| data[i][j]).sum::<f64>() / c as f64;
        for row in x.iter_mut() {
            row[j] -= mean;
        }
    }
    let gram: Vec<Vec<f64>> =
        (0..c).map(|i| (0..c).map(|k| x[i].iter().zip(&x[k]).map(|(a, b)| a * b).sum()).collect()).collect();
    let (vals, vecs) = jacobi_eigen(gram);
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    let scores = (0..c).map(|i| order[..d].iter().map(|&k| vals[k].max(0.0).sqrt() * vecs[i][k]).collect()).collect();
    let variances = order[..d].iter().map(|&k| vals[k] / (c as f64 - 1.0)).collect();
    (scores, variances)
}

pub const FS: f64 = 500.0;

pub fn recording(rows: Vec<Vec<f64>>) -> Recording {
    let names = (0..rows.len()).map(|i| format!("c{i}")).collect();
    Recording::new("S01", Segment::Task, names, FS, rows).unwrap()
}

pub fn sine(freq: f64, seconds: f64, phase: f64) -> Vec<f64> {
    let n = (seconds * FS) as usize;
    (0..n).map(|i| (2.0 * PI * freq * i as f64 / FS + phase).sin()).collect()
}

/// Amplitude of the `freq` component over the central `periods` whole
/// periods of `x`, by projection onto sine and cosine.
pub fn amplitude(x: &[f64], freq: f64, periods: usize) -> f64 {
    let len = (periods as f64 * FS / freq).round() as usize;
    let start = (x.len() - len) / 2;
    let (mut s, mut c) = (0.0, 0.0);
    for (k, v) in x[start..start + len].iter().enumerate() {
        let w = 2.0 * PI * freq * (start + k) as f64 / FS;
        s += v * w.sin();
        c += v * w.cos();
    }
    2.0 * (s * s + c * c).sqrt() / len as f64
}

pub fn probe(
    op: fn(&Recording, &FilterSpec) -> eegtda::preprocessing::Result<Recording>,
    freq: f64,
    seconds: f64,
    periods: usize,
) -> f64 {
    let rec = recording(vec![sine(freq, seconds, 0.0), sine(freq, seconds, 1.0)]);
    let out = op(&rec, &FilterSpec::default()).unwrap();
    assert_eq!(out.n_samples(), rec.n_samples());
    amplitude(&out.data[0], freq, periods).max(amplitude(&out.data[1], freq, periods))
}

pub fn truth(n: usize) -> Vec<(String, Label)> {
    (0..n).map(|i| (format!("S{:02}", i + 1), Label::from_bool(i % 2 == 0))).collect()
}

/// `n_subjects × trials` rows of 18 Gaussian features; stress subjects get
/// `shift` added to the first three.
pub fn dataset(n_subjects: usize, trials: usize, shift: f64, seed_value: u64) -> StudyDataset {
    let mut rng = seed::rng(seed_value);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (subject, label) in truth(n_subjects) {
        for t in 0..trials {
            let mut values = [0.0; 18];
            for (k, v) in values.iter_mut().enumerate() {
                *v = rng.sample::<f64, _>(StandardNormal) + if label.is_stress() && k < 3 { shift } else { 0.0 };
            }
            rows.push(FeatureVector {
                provenance: Provenance { subject_id: subject.clone(), segment: Segment::Task, trial_index: t },
                values,
            });
            labels.push(label);
        }
    }
    StudyDataset::new(rows, labels).unwrap()
}
