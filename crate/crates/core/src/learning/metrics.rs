//! Accuracy, F1 (positive class = Stress) and Cohen's kappa.

use serde::{Deserialize, Serialize};

use super::{LearnError, Result};
use crate::signal_io::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fn_: usize,
    pub fp: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn from_labels(y_true: &[Label], y_pred: &[Label]) -> Result<Self> {
        if y_true.len() != y_pred.len() {
            return Err(LearnError::LengthMismatch(y_true.len(), y_pred.len()));
        }
        let mut c = Confusion::default();
        for (t, p) in y_true.iter().zip(y_pred) {
            match (t.is_stress(), p.is_stress()) {
                (true, true) => c.tp += 1,
                (true, false) => c.fn_ += 1,
                (false, true) => c.fp += 1,
                (false, false) => c.tn += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fn_ + self.fp + self.tn
    }

    pub fn merge(&mut self, other: &Confusion) {
        self.tp += other.tp;
        self.fn_ += other.fn_;
        self.fp += other.fp;
        self.tn += other.tn;
    }

    pub fn metrics(&self) -> Result<Metrics> {
        let n = self.total();
        if n == 0 {
            return Err(LearnError::Empty);
        }
        let n = n as f64;
        let accuracy = (self.tp + self.tn) as f64 / n;
        // 2TP / (2TP + FP + FN); zero when there are no positives at all.
        let denom = 2 * self.tp + self.fp + self.fn_;
        let f1 = if denom == 0 { 0.0 } else { 2.0 * self.tp as f64 / denom as f64 };
        let true_pos = (self.tp + self.fn_) as f64 / n;
        let pred_pos = (self.tp + self.fp) as f64 / n;
        let p_e = true_pos * pred_pos + (1.0 - true_pos) * (1.0 - pred_pos);
        if p_e >= 1.0 {
            return Err(LearnError::KappaUndefined);
        }
        let kappa = (accuracy - p_e) / (1.0 - p_e);
        Ok(Metrics { accuracy, f1, kappa })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub f1: f64,
    pub kappa: f64,
}

pub fn metrics(y_true: &[Label], y_pred: &[Label]) -> Result<Metrics> {
    if y_true.is_empty() {
        return Err(LearnError::Empty);
    }
    Confusion::from_labels(y_true, y_pred)?.metrics()
}
