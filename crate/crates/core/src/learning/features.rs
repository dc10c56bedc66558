use std::io::Write;

use crate::homology::{lifetimes, persistent_entropy_with, FeatureConventions, PersistenceDiagram, MAX_HOMOLOGY_DIM};
use crate::signal_io::{Label, Segment};

use super::{LearnError, Result};

pub const FEATURES_PER_DIM: usize = 6;
pub const N_FEATURES: usize = FEATURES_PER_DIM * (MAX_HOMOLOGY_DIM + 1);

const SUMMARY_NAMES: [&str; FEATURES_PER_DIM] =
    ["pair_count", "mean_lifetime", "max_lifetime", "std_lifetime", "total_persistence", "entropy"];

/// `h0_pair_count, h0_mean_lifetime, ..., h2_entropy`.
pub fn feature_names() -> Vec<String> {
    (0..=MAX_HOMOLOGY_DIM).flat_map(|d| SUMMARY_NAMES.iter().map(move |s| format!("h{d}_{s}"))).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Provenance {
    pub subject_id: String,
    pub segment: Segment,
    pub trial_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub provenance: Provenance,
    pub values: [f64; N_FEATURES],
}

/// Six lifetime summaries per homology dimension. Lifetimes follow `conv`
/// (infinite bars cut at the threshold or dropped) and exclude zero-length
/// pairs; an empty dimension yields zeros.
pub fn assemble_features(pd: &PersistenceDiagram, provenance: Provenance, conv: &FeatureConventions) -> FeatureVector {
    let mut values = [0.0; N_FEATURES];
    for dim in 0..=MAX_HOMOLOGY_DIM {
        let ls = lifetimes(pd, dim, conv);
        let out = &mut values[dim * FEATURES_PER_DIM..(dim + 1) * FEATURES_PER_DIM];
        if ls.is_empty() {
            continue;
        }
        let n = ls.len() as f64;
        let total: f64 = ls.iter().sum();
        let mean = total / n;
        let var = ls.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / n;
        out[0] = n;
        out[1] = mean;
        out[2] = ls.iter().copied().fold(0.0, f64::max);
        out[3] = var.sqrt();
        out[4] = total;
        out[5] = persistent_entropy_with(pd, dim, conv).expect("dimension in range");
    }
    FeatureVector { provenance, values }
}

/// Feature rows with labels and subject groups, aligned by index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StudyDataset {
    pub rows: Vec<FeatureVector>,
    pub labels: Vec<Label>,
}

impl StudyDataset {
    pub fn new(rows: Vec<FeatureVector>, labels: Vec<Label>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(LearnError::LengthMismatch(rows.len(), labels.len()));
        }
        for (row, fv) in rows.iter().enumerate() {
            if let Some(column) = fv.values.iter().position(|v| !v.is_finite()) {
                return Err(LearnError::NonFinite { row, column });
            }
        }
        Ok(StudyDataset { rows, labels })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn x(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.values.to_vec()).collect()
    }

    pub fn y(&self) -> Vec<bool> {
        self.labels.iter().map(|l| l.is_stress()).collect()
    }

    pub fn groups(&self) -> Vec<&str> {
        self.rows.iter().map(|r| r.provenance.subject_id.as_str()).collect()
    }

    pub fn segment(&self, segment: Segment) -> StudyDataset {
        let (rows, labels) = self
            .rows
            .iter()
            .zip(&self.labels)
            .filter(|(r, _)| r.provenance.segment == segment)
            .map(|(r, l)| (r.clone(), *l))
            .unzip();
        StudyDataset { rows, labels }
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "# eegtda-features/1")?;
        writeln!(w, "subject,segment,trial,label,{}", feature_names().join(","))?;
        for (r, l) in self.rows.iter().zip(&self.labels) {
            let vals: Vec<String> = r.values.iter().map(f64::to_string).collect();
            writeln!(
                w,
                "{},{},{},{},{}",
                r.provenance.subject_id,
                r.provenance.segment,
                r.provenance.trial_index,
                l,
                vals.join(",")
            )?;
        }
        Ok(())
    }

    pub fn read_csv(text: &str) -> std::result::Result<StudyDataset, String> {
        let mut lines = text.lines();
        match lines.next() {
            Some(l) if l.starts_with("# eegtda-features/1") => {}
            other => return Err(format!("unexpected schema line {other:?}")),
        }
        let header = lines.next().ok_or("missing header")?;
        let expected = format!("subject,segment,trial,label,{}", feature_names().join(","));
        if header != expected {
            return Err(format!("unexpected feature header `{header}`"));
        }
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let bad = |what: &str| format!("row {}: {what}", i + 1);
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 4 + N_FEATURES {
                return Err(bad("wrong number of columns"));
            }
            let segment: Segment = cells[1].parse().map_err(|e| bad(&format!("{e}")))?;
            let trial_index: usize = cells[2].parse().map_err(|_| bad("bad trial index"))?;
            let label: Label = cells[3].parse().map_err(|e| bad(&format!("{e}")))?;
            let mut values = [0.0; N_FEATURES];
            for (v, c) in values.iter_mut().zip(&cells[4..]) {
                *v = c.parse().map_err(|_| bad("non-numeric feature"))?;
            }
            rows.push(FeatureVector {
                provenance: Provenance { subject_id: cells[0].to_string(), segment, trial_index },
                values,
            });
            labels.push(label);
        }
        StudyDataset::new(rows, labels).map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::{persistent_entropy, Pair};

    fn prov() -> Provenance {
        Provenance { subject_id: "S01".into(), segment: Segment::PreTask, trial_index: 0 }
    }

    #[test]
    fn empty_dimensions_are_zero() {
        let mut pd = PersistenceDiagram::empty(2.0, 4, 2);
        pd.pairs[0] = vec![
            Pair { birth: 0.0, death: 1.0 },
            Pair { birth: 0.0, death: 1.0 },
            Pair { birth: 0.0, death: 1.0 },
            Pair { birth: 0.0, death: f64::INFINITY },
        ];
        let fv = assemble_features(&pd, prov(), &FeatureConventions::default());
        assert_eq!(fv.values[0], 4.0);
        assert_eq!(fv.values[4], 5.0);
        assert_eq!(fv.values[1], 1.25);
        assert_eq!(fv.values[2], 2.0);
        assert_eq!(fv.values[5], persistent_entropy(&pd, 0).unwrap());
        assert!(fv.values[6..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn names_line_up() {
        let names = feature_names();
        assert_eq!(names.len(), N_FEATURES);
        assert_eq!(names[0], "h0_pair_count");
        assert_eq!(names[17], "h2_entropy");
    }

    #[test]
    fn csv_round_trip() {
        let mut pd = PersistenceDiagram::empty(2.0, 3, 2);
        pd.pairs[0] = vec![Pair { birth: 0.0, death: 0.3 }, Pair { birth: 0.0, death: 1.7 }];
        let ds = StudyDataset::new(
            vec![assemble_features(&pd, prov(), &FeatureConventions::default())],
            vec![Label::Stress],
        )
        .unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        assert_eq!(StudyDataset::read_csv(std::str::from_utf8(&buf).unwrap()).unwrap(), ds);
    }
}
