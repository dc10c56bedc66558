use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{HomologyError, Result};

/// Highest homology dimension handled (H0, H1, H2).
pub const MAX_HOMOLOGY_DIM: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair {
    pub birth: f64,
    /// `f64::INFINITY` for classes that never die.
    pub death: f64,
}

impl Pair {
    pub fn is_zero_lifetime(&self) -> bool {
        self.birth == self.death
    }

    pub fn is_infinite(&self) -> bool {
        self.death.is_infinite()
    }
}

/// How infinite bars enter lifetime summaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InfiniteBars {
    /// Death replaced by the filtration threshold.
    #[default]
    Threshold,
    Exclude,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConventions {
    pub infinite_bars: InfiniteBars,
}

/// Birth–death pairs for H0, H1 and H2.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    /// Indexed by homology dimension; dimensions above `max_dim` stay empty.
    pub pairs: [Vec<Pair>; MAX_HOMOLOGY_DIM + 1],
    pub threshold: f64,
    pub n_points: usize,
    pub max_dim: usize,
}

pub type EntropyVector = [f64; MAX_HOMOLOGY_DIM + 1];

impl PersistenceDiagram {
    pub fn empty(threshold: f64, n_points: usize, max_dim: usize) -> Self {
        PersistenceDiagram { pairs: Default::default(), threshold, n_points, max_dim }
    }

    /// Sorts each dimension by (birth, death) so equal multisets compare equal.
    pub fn sort_pairs(&mut self) {
        for pairs in &mut self.pairs {
            pairs.sort_by(|a, b| a.birth.total_cmp(&b.birth).then(a.death.total_cmp(&b.death)));
        }
    }

    /// Every birth and death multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.threshold *= factor;
        for p in out.pairs.iter_mut().flatten() {
            p.birth *= factor;
            p.death *= factor;
        }
        out
    }

    pub fn entropy_vector(&self, conv: &FeatureConventions) -> EntropyVector {
        std::array::from_fn(|dim| entropy_of(&lifetimes(self, dim, conv)))
    }

    /// `dim,birth,death` rows after a schema line carrying threshold and size.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(
            w,
            "# eegtda-diagram/1 threshold={} points={} max_dim={}",
            self.threshold, self.n_points, self.max_dim
        )?;
        writeln!(w, "dim,birth,death")?;
        for (dim, pairs) in self.pairs.iter().enumerate() {
            for p in pairs {
                writeln!(w, "{dim},{},{}", p.birth, p.death)?;
            }
        }
        Ok(())
    }

    pub fn read_csv(text: &str) -> Result<PersistenceDiagram> {
        let parse_err = |msg: String| HomologyError::Parse(msg);
        let mut lines = text.lines();
        let schema = lines.next().ok_or_else(|| parse_err("empty file".into()))?;
        let meta = schema
            .strip_prefix("# eegtda-diagram/1")
            .ok_or_else(|| parse_err(format!("unexpected schema line `{schema}`")))?;
        let mut threshold = None;
        let mut n_points = None;
        let mut max_dim = None;
        for token in meta.split_whitespace() {
            match token.split_once('=') {
                Some(("threshold", v)) => threshold = v.parse::<f64>().ok(),
                Some(("points", v)) => n_points = v.parse::<usize>().ok(),
                Some(("max_dim", v)) => max_dim = v.parse::<usize>().ok(),
                _ => {}
            }
        }
        let (Some(threshold), Some(n_points), Some(max_dim)) = (threshold, n_points, max_dim) else {
            return Err(parse_err("schema line lacks threshold/points/max_dim".into()));
        };
        if max_dim > MAX_HOMOLOGY_DIM {
            return Err(HomologyError::DimensionOutOfRange(max_dim));
        }
        match lines.next() {
            Some("dim,birth,death") => {}
            other => return Err(parse_err(format!("expected header `dim,birth,death`, got {other:?}"))),
        }
        let mut pd = PersistenceDiagram::empty(threshold, n_points, max_dim);
        for (row, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || parse_err(format!("row {}: `{line}`", row + 1));
            if cells.len() != 3 {
                return Err(bad());
            }
            let dim: usize = cells[0].parse().map_err(|_| bad())?;
            let birth: f64 = cells[1].parse().map_err(|_| bad())?;
            let death: f64 = cells[2].parse().map_err(|_| bad())?;
            if dim > max_dim || !birth.is_finite() || death.is_nan() || death < birth {
                return Err(bad());
            }
            pd.pairs[dim].push(Pair { birth, death });
        }
        pd.sort_pairs();
        Ok(pd)
    }
}

/// Positive bar lengths of dimension `dim` under `conv`. Zero-length bars are dropped.
pub fn lifetimes(pd: &PersistenceDiagram, dim: usize, conv: &FeatureConventions) -> Vec<f64> {
    pd.pairs[dim]
        .iter()
        .filter_map(|p| {
            let death = match (p.is_infinite(), conv.infinite_bars) {
                (false, _) => p.death,
                (true, InfiniteBars::Threshold) => pd.threshold,
                (true, InfiniteBars::Exclude) => return None,
            };
            let l = death - p.birth;
            (l > 0.0).then_some(l)
        })
        .collect()
}

fn entropy_of(lifetimes: &[f64]) -> f64 {
    if lifetimes.len() <= 1 {
        return 0.0;
    }
    let total: f64 = lifetimes.iter().sum();
    -lifetimes
        .iter()
        .map(|&l| {
            let p = l / total;
            p * p.ln()
        })
        .sum::<f64>()
}

/// Shannon entropy (nats) of the normalised bar lengths in dimension `dim`,
/// infinite bars cut at the threshold.
pub fn persistent_entropy(pd: &PersistenceDiagram, dim: usize) -> Result<f64> {
    persistent_entropy_with(pd, dim, &FeatureConventions::default())
}

pub fn persistent_entropy_with(pd: &PersistenceDiagram, dim: usize, conv: &FeatureConventions) -> Result<f64> {
    if dim > MAX_HOMOLOGY_DIM {
        return Err(HomologyError::DimensionOutOfRange(dim));
    }
    Ok(entropy_of(&lifetimes(pd, dim, conv)))
}

/// Entropy of all bars of all dimensions pooled together.
pub fn total_persistent_entropy(pd: &PersistenceDiagram, conv: &FeatureConventions) -> f64 {
    let all: Vec<f64> = (0..=MAX_HOMOLOGY_DIM).flat_map(|d| lifetimes(pd, d, conv)).collect();
    entropy_of(&all)
}

/// Number of bars alive (`birth ≤ r < death`) at each grid value.
pub fn betti_curve(pd: &PersistenceDiagram, dim: usize, grid: &[f64]) -> Vec<usize> {
    grid.iter().map(|&r| pd.pairs[dim].iter().filter(|p| p.birth <= r && r < p.death).count()).collect()
}
