//! Baseline labels from the questionnaire scores.

use serde::{Deserialize, Serialize};

use super::{LearnError, Result};
use crate::signal_io::{Label, SubjectForms};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelRule {
    /// Weights of normalised Y1, Y2 and reverse-scored EQ in the stress index.
    pub weights: [f64; 3],
    /// Subjects at or above this quantile of the stress index are labelled Stress.
    pub threshold_quantile: f64,
}

impl Default for LabelRule {
    fn default() -> Self {
        LabelRule { weights: [1.0, 1.0, 1.0], threshold_quantile: 0.5 }
    }
}

/// Linear-interpolation quantile of `values`.
pub(crate) fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

fn normaliser(name: &'static str, values: impl Iterator<Item = f64> + Clone) -> Result<impl Fn(f64) -> f64> {
    let min = values.clone().fold(f64::INFINITY, f64::min);
    let max = values.fold(f64::NEG_INFINITY, f64::max);
    if !(max > min) {
        return Err(LearnError::ZeroRange(name));
    }
    Ok(move |v: f64| (v - min) / (max - min))
}

/// Per-subject labels from the weighted mean of min-max normalised Y1, Y2
/// and `1 − EQ`, averaged over the pre and post administrations. The cut is
/// the cohort quantile of that index; ties go to Stress.
pub fn label_from_forms(forms: &[SubjectForms], rule: &LabelRule) -> Result<Vec<(String, Label)>> {
    if forms.is_empty() {
        return Err(LearnError::Empty);
    }
    let wsum: f64 = rule.weights.iter().sum();
    if rule.weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || !(wsum > 0.0) {
        return Err(LearnError::InvalidParam(format!("label weights {:?}", rule.weights)));
    }
    let y1 = normaliser("Y1", forms.iter().flat_map(|f| [f.y1_pre, f.y1_post]))?;
    let y2 = normaliser("Y2", forms.iter().flat_map(|f| [f.y2_pre, f.y2_post]))?;
    let eq = normaliser("EQ", forms.iter().flat_map(|f| [f.eq_pre, f.eq_post]))?;
    let [w1, w2, w3] = rule.weights;
    let index: Vec<f64> = forms
        .iter()
        .map(|f| {
            let admin = |a: f64, b: f64, c: f64| (w1 * y1(a) + w2 * y2(b) + w3 * (1.0 - eq(c))) / wsum;
            0.5 * (admin(f.y1_pre, f.y2_pre, f.eq_pre) + admin(f.y1_post, f.y2_post, f.eq_post))
        })
        .collect();
    let cut = quantile(&index, rule.threshold_quantile);
    Ok(forms.iter().zip(&index).map(|(f, &s)| (f.subject_id.clone(), Label::from_bool(s >= cut))).collect())
}
