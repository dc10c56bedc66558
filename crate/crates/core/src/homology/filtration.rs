use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{HomologyError, Result, MAX_HOMOLOGY_DIM};
use crate::pointcloud::DistanceMatrix;

/// Largest filtration value admitted into the complex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(try_from = "String", into = "String")]
pub enum Threshold {
    /// The maximum pairwise distance: the full filtration.
    #[default]
    Auto,
    /// Twice the smallest positive pairwise distance.
    TwiceMinDistance,
    Value(f64),
}

impl Threshold {
    pub fn resolve(self, dm: &DistanceMatrix) -> Result<f64> {
        match self {
            Threshold::Auto => Ok(dm.max_distance()),
            Threshold::TwiceMinDistance => {
                dm.min_positive_distance().map(|eps| 2.0 * eps).ok_or(HomologyError::NoPositiveDistance)
            }
            Threshold::Value(v) if v.is_finite() && v > 0.0 => Ok(v),
            Threshold::Value(v) => Err(HomologyError::BadThreshold(v)),
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Auto => f.write_str("auto"),
            Threshold::TwiceMinDistance => f.write_str("2eps"),
            Threshold::Value(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for Threshold {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" | "full" => Ok(Threshold::Auto),
            "2eps" => Ok(Threshold::TwiceMinDistance),
            other => other
                .parse::<f64>()
                .map(Threshold::Value)
                .map_err(|_| format!("threshold must be `auto`, `2eps` or a number, got `{s}`")),
        }
    }
}

impl TryFrom<String> for Threshold {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<Threshold> for String {
    fn from(t: Threshold) -> String {
        t.to_string()
    }
}

/// A simplex with its sorted vertex tuple and filtration value.
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    pub vertices: Vec<u32>,
    pub value: f64,
}

impl Simplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

/// Filtration order: value, then dimension, then lexicographic vertices.
pub(crate) fn filtration_order(a: &Simplex, b: &Simplex) -> Ordering {
    a.value.total_cmp(&b.value).then(a.vertices.len().cmp(&b.vertices.len())).then_with(|| a.vertices.cmp(&b.vertices))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Filtration {
    pub simplices: Vec<Simplex>,
    pub threshold: f64,
    /// Highest homology dimension reported; simplices go one dimension higher.
    pub max_dim: usize,
    pub n_vertices: usize,
}

impl Filtration {
    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn count_by_dim(&self) -> Vec<usize> {
        let mut counts = vec![0; self.max_dim + 2];
        for s in &self.simplices {
            counts[s.dim()] += 1;
        }
        counts
    }
}

/// Clique filtration of `dm`: a simplex enters at the largest pairwise
/// distance among its vertices, provided that is within the threshold.
/// Simplices up to dimension `max_dim + 1` are listed so that classes in
/// dimension `max_dim` can die.
pub fn rips_filtration(dm: &DistanceMatrix, max_dim: usize, threshold: Threshold) -> Result<Filtration> {
    if max_dim > MAX_HOMOLOGY_DIM {
        return Err(HomologyError::DimensionOutOfRange(max_dim));
    }
    let thr = threshold.resolve(dm)?;
    let n = dm.len();
    let max_size = max_dim + 2;

    let neighbours: Vec<Vec<u32>> =
        (0..n).map(|i| ((i + 1)..n).filter(|&j| dm.get(i, j) <= thr).map(|j| j as u32).collect()).collect();

    let mut simplices = Vec::new();
    let mut stack = Vec::with_capacity(max_size);
    for v in 0..n as u32 {
        stack.push(v);
        extend_cliques(dm, &neighbours, &mut stack, 0.0, &neighbours[v as usize], max_size, &mut simplices);
        stack.pop();
    }
    simplices.sort_by(filtration_order);
    Ok(Filtration { simplices, threshold: thr, max_dim, n_vertices: n })
}

fn extend_cliques(
    dm: &DistanceMatrix,
    neighbours: &[Vec<u32>],
    stack: &mut Vec<u32>,
    value: f64,
    candidates: &[u32],
    max_size: usize,
    out: &mut Vec<Simplex>,
) {
    out.push(Simplex { vertices: stack.clone(), value });
    if stack.len() == max_size {
        return;
    }
    for (idx, &w) in candidates.iter().enumerate() {
        let new_value = stack.iter().fold(value, |acc, &u| acc.max(dm.get(u as usize, w as usize)));
        // Later candidates that are also neighbours of `w` keep the clique property.
        let next: Vec<u32> =
            candidates[idx + 1..].iter().copied().filter(|x| neighbours[w as usize].binary_search(x).is_ok()).collect();
        stack.push(w);
        extend_cliques(dm, neighbours, stack, new_value, &next, max_size, out);
        stack.pop();
    }
}
