//! Questionnaire scores (state anxiety Y1, trait anxiety Y2, emotional
//! intelligence EQ) for the synthetic cohort. Scales are unit-normalised.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Label, Result, SignalError};
use crate::seed;

const FORMS_SCHEMA: &str = "# eegtda-forms/1";
const FORMS_HEADER: &str = "subject,y1_pre,y1_post,y2_pre,y2_post,eq_pre,eq_post";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectForms {
    pub subject_id: String,
    pub y1_pre: f64,
    pub y1_post: f64,
    pub y2_pre: f64,
    pub y2_post: f64,
    pub eq_pre: f64,
    pub eq_post: f64,
}

impl SubjectForms {
    pub fn y1(&self) -> f64 {
        0.5 * (self.y1_pre + self.y1_post)
    }

    pub fn y2(&self) -> f64 {
        0.5 * (self.y2_pre + self.y2_post)
    }

    pub fn eq(&self) -> f64 {
        0.5 * (self.eq_pre + self.eq_post)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FormsSpec {
    /// Standard deviation of each administered score around its class mean.
    pub noise_sd: f64,
    /// Class means as (normal, stress) for Y1, Y2 and EQ.
    pub y1_means: (f64, f64),
    pub y2_means: (f64, f64),
    pub eq_means: (f64, f64),
    pub rng_seed: u64,
}

impl Default for FormsSpec {
    fn default() -> Self {
        FormsSpec {
            noise_sd: 0.08,
            y1_means: (0.35, 0.65),
            y2_means: (0.40, 0.60),
            eq_means: (0.85, 0.70),
            rng_seed: 7,
        }
    }
}

/// Draws pre- and post-paradigm scores for each `(subject_id, label)`.
pub fn synth_forms(labels: &[(String, Label)], spec: &FormsSpec) -> Vec<SubjectForms> {
    let root = seed::derive(spec.rng_seed, "forms");
    labels
        .iter()
        .map(|(subject_id, label)| {
            let mut rng = seed::rng(seed::derive(root, subject_id));
            let pick = |(normal, stress): (f64, f64)| if label.is_stress() { stress } else { normal };
            let mut draw = |mean: f64| {
                let z: f64 = rng.sample(StandardNormal);
                (mean + spec.noise_sd * z).max(0.0)
            };
            let (y1, y2, eq) = (pick(spec.y1_means), pick(spec.y2_means), pick(spec.eq_means));
            SubjectForms {
                subject_id: subject_id.clone(),
                y1_pre: draw(y1),
                y1_post: draw(y1),
                y2_pre: draw(y2),
                y2_post: draw(y2),
                eq_pre: draw(eq),
                eq_post: draw(eq),
            }
        })
        .collect()
}

pub fn write_forms_csv<W: Write>(w: &mut W, forms: &[SubjectForms]) -> std::io::Result<()> {
    writeln!(w, "{FORMS_SCHEMA}")?;
    writeln!(w, "{FORMS_HEADER}")?;
    for f in forms {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            f.subject_id, f.y1_pre, f.y1_post, f.y2_pre, f.y2_post, f.eq_pre, f.eq_post
        )?;
    }
    Ok(())
}

pub fn read_forms_csv(text: &str) -> Result<Vec<SubjectForms>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    if lines.next().map(str::trim) != Some(FORMS_SCHEMA) {
        return Err(SignalError::BadForms(format!("forms file must start with `{FORMS_SCHEMA}`")));
    }
    if lines.next().map(str::trim) != Some(FORMS_HEADER) {
        return Err(SignalError::BadForms(format!("forms header must be `{FORMS_HEADER}`")));
    }
    lines
        .enumerate()
        .map(|(row, line)| {
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() != 7 {
                return Err(SignalError::Ragged { row, expected: 7, found: cells.len() });
            }
            let mut v = [0.0; 6];
            for (column, (slot, cell)) in v.iter_mut().zip(&cells[1..]).enumerate() {
                *slot = cell.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| SignalError::NonNumeric {
                    row,
                    column: column + 1,
                    value: cell.to_string(),
                })?;
            }
            Ok(SubjectForms {
                subject_id: cells[0].to_string(),
                y1_pre: v[0],
                y1_post: v[1],
                y2_pre: v[2],
                y2_post: v[3],
                eq_pre: v[4],
                eq_post: v[5],
            })
        })
        .collect()
}
