//! Stratified k-fold cross-validation, the 80/20 holdout and the report.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::Confusion;
use super::models::{train_predict, ModelKind, ModelParams};
use super::{LearnError, Result, StudyDataset};
use crate::seed;
use crate::signal_io::{Label, Segment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grouping {
    /// All trials of a subject share a fold.
    #[default]
    #[serde(rename = "subject")]
    BySubject,
    #[serde(rename = "trial")]
    ByTrial,
}

impl FromStr for Grouping {
    type Err = LearnError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "subject" => Ok(Grouping::BySubject),
            "trial" => Ok(Grouping::ByTrial),
            _ => Err(LearnError::InvalidParam(format!("unknown grouping `{s}`"))),
        }
    }
}

impl fmt::Display for Grouping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Grouping::BySubject => "subject",
            Grouping::ByTrial => "trial",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    #[default]
    Cv5,
    Holdout,
}

impl FromStr for Protocol {
    type Err = LearnError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cv5" => Ok(Protocol::Cv5),
            "holdout" => Ok(Protocol::Holdout),
            _ => Err(LearnError::InvalidParam(format!("unknown protocol `{s}`"))),
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Cv5 => "cv5",
            Protocol::Holdout => "holdout",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvConfig {
    pub k: usize,
    pub grouping: Grouping,
    pub seed: u64,
    /// Share of units held out by the holdout protocol.
    pub test_fraction: f64,
    pub params: ModelParams,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig { k: 5, grouping: Grouping::BySubject, seed: 7, test_fraction: 0.2, params: ModelParams::default() }
    }
}

/// Outcome of one model on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub model: ModelKind,
    pub fold_accuracies: Vec<f64>,
    pub accuracy_mean: f64,
    /// Population standard deviation of the fold accuracies.
    pub accuracy_sd: f64,
    pub f1: f64,
    pub kappa: f64,
    pub confusion: Confusion,
    /// Fold in which each row was tested; `None` for holdout training rows.
    pub test_fold: Vec<Option<usize>>,
}

fn unit_keys(ds: &StudyDataset, grouping: Grouping) -> Vec<String> {
    ds.rows
        .iter()
        .map(|r| match grouping {
            Grouping::BySubject => r.provenance.subject_id.clone(),
            Grouping::ByTrial => {
                format!("{}/{}/{}", r.provenance.subject_id, r.provenance.segment, r.provenance.trial_index)
            }
        })
        .collect()
}

/// Units (subjects or trials) in first-appearance order with their majority label.
fn units(ds: &StudyDataset, grouping: Grouping) -> (Vec<String>, Vec<bool>, Vec<usize>) {
    let keys = unit_keys(ds, grouping);
    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    let mut names = Vec::new();
    let mut votes: Vec<(usize, usize)> = Vec::new();
    let mut row_unit = Vec::with_capacity(keys.len());
    for (key, label) in keys.iter().zip(&ds.labels) {
        let u = *index.entry(key).or_insert_with(|| {
            names.push(key.clone());
            votes.push((0, 0));
            names.len() - 1
        });
        if label.is_stress() {
            votes[u].0 += 1;
        } else {
            votes[u].1 += 1;
        }
        row_unit.push(u);
    }
    let labels = votes.iter().map(|&(s, n)| s >= n).collect();
    (names, labels, row_unit)
}

/// Per-class seeded shuffle, then round-robin dealing with one running
/// counter so fold sizes differ by at most one unit.
fn stratified_folds(unit_labels: &[bool], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = seed::rng(seed);
    let mut fold = vec![0; unit_labels.len()];
    let mut next = 0;
    for class in [true, false] {
        let mut members: Vec<usize> = (0..unit_labels.len()).filter(|&u| unit_labels[u] == class).collect();
        members.shuffle(&mut rng);
        for u in members {
            fold[u] = next % k;
            next += 1;
        }
    }
    fold
}

fn fold_seed(root: u64, model: ModelKind, fold: usize) -> u64 {
    seed::derive_index(seed::derive(seed::derive(root, "model"), model.as_str()), fold as u64)
}

fn population_sd(v: &[f64]) -> f64 {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
}

/// Runs the train/test splits `test_fold` describes (fold `f` tests rows
/// tagged `Some(f)`), in parallel and order-independently.
fn evaluate_splits(
    ds: &StudyDataset,
    model: ModelKind,
    cfg: &CvConfig,
    test_fold: Vec<Option<usize>>,
    n_folds: usize,
) -> Result<CvResult> {
    let x = ds.x();
    let y = ds.y();
    let per_fold = (0..n_folds)
        .into_par_iter()
        .map(|f| {
            let (mut xtr, mut ytr, mut xte, mut yte) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
            for ((row, &label), tf) in x.iter().zip(&y).zip(&test_fold) {
                if *tf == Some(f) {
                    xte.push(row.clone());
                    yte.push(Label::from_bool(label));
                } else {
                    xtr.push(row.clone());
                    ytr.push(label);
                }
            }
            if ytr.iter().all(|&v| v) || ytr.iter().all(|&v| !v) {
                return Err(LearnError::SingleClassFold { fold: f });
            }
            let pred = train_predict(model, &cfg.params, &xtr, &ytr, &xte, fold_seed(cfg.seed, model, f))?;
            Confusion::from_labels(&yte, &pred.labels)
        })
        .collect::<Result<Vec<Confusion>>>()?;
    let fold_accuracies: Vec<f64> = per_fold.iter().map(|c| (c.tp + c.tn) as f64 / c.total() as f64).collect();
    let mut pooled = Confusion::default();
    per_fold.iter().for_each(|c| pooled.merge(c));
    let m = pooled.metrics()?;
    Ok(CvResult {
        model,
        accuracy_mean: fold_accuracies.iter().sum::<f64>() / n_folds as f64,
        accuracy_sd: population_sd(&fold_accuracies),
        fold_accuracies,
        f1: m.f1,
        kappa: m.kappa,
        confusion: pooled,
        test_fold,
    })
}

/// Stratified k-fold CV. Every unit lands in exactly one fold, the scaler
/// is refitted on the training folds each time, F1 and kappa come from the
/// pooled confusion matrix.
pub fn kfold_cv(ds: &StudyDataset, model: ModelKind, cfg: &CvConfig) -> Result<CvResult> {
    if ds.is_empty() {
        return Err(LearnError::Empty);
    }
    if cfg.k < 2 {
        return Err(LearnError::InvalidParam(format!("k = {} (need at least 2)", cfg.k)));
    }
    let (names, unit_labels, row_unit) = units(ds, cfg.grouping);
    if cfg.k > names.len() {
        return Err(LearnError::TooFewGroups { k: cfg.k, groups: names.len() });
    }
    let folds = stratified_folds(&unit_labels, cfg.k, seed::derive(cfg.seed, "folds"));
    let test_fold = row_unit.iter().map(|&u| Some(folds[u])).collect();
    evaluate_splits(ds, model, cfg, test_fold, cfg.k)
}

/// Single stratified split holding out `test_fraction` of each class's
/// units (at least one per class).
pub fn holdout(ds: &StudyDataset, model: ModelKind, cfg: &CvConfig) -> Result<CvResult> {
    if ds.is_empty() {
        return Err(LearnError::Empty);
    }
    if !(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0) {
        return Err(LearnError::InvalidParam(format!("test_fraction = {}", cfg.test_fraction)));
    }
    let (names, unit_labels, row_unit) = units(ds, cfg.grouping);
    let mut rng = seed::rng(seed::derive(cfg.seed, "holdout"));
    let mut in_test = vec![false; names.len()];
    for class in [true, false] {
        let mut members: Vec<usize> = (0..names.len()).filter(|&u| unit_labels[u] == class).collect();
        if members.len() < 2 {
            return Err(LearnError::TooFewGroups { k: 2, groups: members.len() });
        }
        members.shuffle(&mut rng);
        let n_test = ((members.len() as f64 * cfg.test_fraction).round() as usize).clamp(1, members.len() - 1);
        members[..n_test].iter().for_each(|&u| in_test[u] = true);
    }
    let test_fold = row_unit.iter().map(|&u| in_test[u].then_some(0)).collect();
    evaluate_splits(ds, model, cfg, test_fold, 1)
}

/// One line of the model × segment table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub model: ModelKind,
    pub segment: Segment,
    pub accuracy_mean: f64,
    pub accuracy_sd: f64,
    pub f1: f64,
    pub kappa: f64,
    pub fold_accuracies: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub protocol: Protocol,
    pub grouping: Grouping,
    pub k: usize,
    pub seed: u64,
    pub entries: Vec<ReportEntry>,
    /// segment → unit → test fold (absent for holdout training units).
    pub folds: BTreeMap<String, BTreeMap<String, usize>>,
}

impl EvalReport {
    /// Evaluates every model on every segment present in `ds`, in
    /// segment-major order.
    pub fn evaluate(ds: &StudyDataset, models: &[ModelKind], protocol: Protocol, cfg: &CvConfig) -> Result<Self> {
        let mut entries = Vec::new();
        let mut folds = BTreeMap::new();
        for segment in Segment::ALL {
            let part = ds.segment(segment);
            if part.is_empty() {
                continue;
            }
            let keys = unit_keys(&part, cfg.grouping);
            for &model in models {
                let r = match protocol {
                    Protocol::Cv5 => kfold_cv(&part, model, cfg)?,
                    Protocol::Holdout => holdout(&part, model, cfg)?,
                };
                folds.entry(segment.to_string()).or_insert_with(|| {
                    keys.iter()
                        .zip(&r.test_fold)
                        .filter_map(|(k, f)| f.map(|f| (k.clone(), f)))
                        .collect::<BTreeMap<_, _>>()
                });
                entries.push(ReportEntry {
                    model,
                    segment,
                    accuracy_mean: r.accuracy_mean,
                    accuracy_sd: r.accuracy_sd,
                    f1: r.f1,
                    kappa: r.kappa,
                    fold_accuracies: r.fold_accuracies,
                });
            }
        }
        if entries.is_empty() {
            return Err(LearnError::Empty);
        }
        let k = if protocol == Protocol::Cv5 { cfg.k } else { 1 };
        Ok(EvalReport { protocol, grouping: cfg.grouping, k, seed: cfg.seed, entries, folds })
    }

    pub fn entry(&self, model: ModelKind, segment: Segment) -> Option<&ReportEntry> {
        self.entries.iter().find(|e| e.model == model && e.segment == segment)
    }

    /// Mean accuracy of `model` across segments.
    pub fn average_accuracy(&self, model: ModelKind) -> Option<f64> {
        let acc: Vec<f64> = self.entries.iter().filter(|e| e.model == model).map(|e| e.accuracy_mean).collect();
        (!acc.is_empty()).then(|| acc.iter().sum::<f64>() / acc.len() as f64)
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(
            w,
            "# eegtda-eval/1 protocol={} grouping={} k={} seed={}",
            self.protocol, self.grouping, self.k, self.seed
        )?;
        writeln!(w, "model,segment,accuracy_mean,accuracy_sd,f1,kappa")?;
        for e in &self.entries {
            writeln!(
                w,
                "{},{},{:.4},{:.4},{:.4},{:.4}",
                e.model, e.segment, e.accuracy_mean, e.accuracy_sd, e.f1, e.kappa
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::{FeatureVector, Provenance, N_FEATURES};

    /// `n_subjects` subjects × `trials` trials; feature 0 carries the label.
    fn dataset(n_subjects: usize, trials: usize, separation: f64) -> StudyDataset {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for s in 0..n_subjects {
            let stress = s % 2 == 0;
            for t in 0..trials {
                let mut values = [0.0; N_FEATURES];
                values[0] = if stress { separation } else { 0.0 } + (t as f64 * 0.37 + s as f64 * 0.11).sin() * 0.1;
                values[1] = ((s * 31 + t * 17) % 13) as f64;
                rows.push(FeatureVector {
                    provenance: Provenance { subject_id: format!("S{s:02}"), segment: Segment::Task, trial_index: t },
                    values,
                });
                labels.push(Label::from_bool(stress));
            }
        }
        StudyDataset::new(rows, labels).unwrap()
    }

    #[test]
    fn subject_folds_partition_units() {
        let ds = dataset(10, 4, 5.0);
        let r = kfold_cv(&ds, ModelKind::LR, &CvConfig::default()).unwrap();
        let mut by_subject: BTreeMap<&str, usize> = BTreeMap::new();
        for (row, f) in ds.rows.iter().zip(&r.test_fold) {
            let f = f.unwrap();
            assert!(f < 5);
            assert_eq!(*by_subject.entry(&row.provenance.subject_id).or_insert(f), f);
        }
        for fold in 0..5 {
            assert_eq!(by_subject.values().filter(|&&f| f == fold).count(), 2);
        }
    }

    #[test]
    fn ceiling_case() {
        let ds = dataset(10, 3, 10.0);
        for model in ModelKind::ALL {
            let r = kfold_cv(&ds, model, &CvConfig::default()).unwrap();
            assert_eq!((r.accuracy_mean, r.accuracy_sd, r.kappa, r.f1), (1.0, 0.0, 1.0, 1.0), "{model}");
        }
    }

    #[test]
    fn too_few_groups() {
        let ds = dataset(4, 3, 1.0);
        assert_eq!(
            kfold_cv(&ds, ModelKind::DT, &CvConfig::default()).unwrap_err(),
            LearnError::TooFewGroups { k: 5, groups: 4 }
        );
        let cfg = CvConfig { grouping: Grouping::ByTrial, ..Default::default() };
        assert!(kfold_cv(&ds, ModelKind::DT, &cfg).is_ok());
    }

    #[test]
    fn report_is_deterministic() {
        let ds = dataset(10, 3, 0.5);
        let cfg = CvConfig { seed: 11, ..Default::default() };
        let a = EvalReport::evaluate(&ds, &ModelKind::ALL, Protocol::Cv5, &cfg).unwrap();
        let b = EvalReport::evaluate(&ds, &ModelKind::ALL, Protocol::Cv5, &cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.entries.len(), 5);
        assert_eq!(a.folds["task"].len(), 10);
    }

    #[test]
    fn holdout_keeps_a_fifth() {
        let ds = dataset(20, 2, 10.0);
        let r = holdout(&ds, ModelKind::RF, &CvConfig::default()).unwrap();
        assert_eq!(r.test_fold.iter().filter(|f| f.is_some()).count(), 8);
        assert_eq!(r.accuracy_mean, 1.0);
        assert_eq!(r.fold_accuracies.len(), 1);
    }
}
