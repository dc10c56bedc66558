//! Channel point clouds: PCA embedding of a trial (one point per channel),
//! Euclidean distance matrices, and an exact t-SNE for visualising feature
//! vectors.

mod tsne;

pub use tsne::{joint_probabilities, kl_divergence, kl_gradient, tsne_embed, TsneParams, TsneResult};

use std::io::Write;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::preprocessing::Trial;

#[derive(Debug, Error, PartialEq)]
pub enum EmbedError {
    #[error("embedding dimension {d} out of range (1..={max})")]
    DimensionOutOfRange { d: usize, max: usize },
    #[error("non-finite value in input at row {row}")]
    NonFinite { row: usize },
    #[error("t-SNE needs at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error("input rows have inconsistent lengths")]
    Ragged,
    #[error("invalid distance matrix: {0}")]
    InvalidDistances(String),
    #[error("{0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, EmbedError>;

/// `c` points in `R^d`, one per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    /// c rows of d coordinates.
    pub points: Vec<Vec<f64>>,
    pub d: usize,
    pub channel_names: Vec<String>,
    /// Top-d squared singular values over (c − 1), descending.
    pub explained_variance: Vec<f64>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Writes `x,y,z,channel` rows (extra dimensions continue as `x4`, `x5`, ...).
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "# eegtda-pointcloud/1 d={}", self.d)?;
        let mut header: Vec<String> = (0..self.d)
            .map(|j| match j {
                0 => "x".to_string(),
                1 => "y".to_string(),
                2 => "z".to_string(),
                _ => format!("x{}", j + 1),
            })
            .collect();
        header.push("channel".into());
        writeln!(w, "{}", header.join(","))?;
        for (p, name) in self.points.iter().zip(&self.channel_names) {
            let coords: Vec<String> = p.iter().map(f64::to_string).collect();
            writeln!(w, "{},{}", coords.join(","), name)?;
        }
        Ok(())
    }

    /// Parses the format written by [`PointCloud::write_csv`]. Explained
    /// variance is not stored and comes back empty.
    pub fn read_csv(text: &str) -> Result<PointCloud> {
        let mut lines = text.lines().filter(|l| !l.trim_start().starts_with('#') && !l.trim().is_empty());
        let header = lines.next().ok_or(EmbedError::Ragged)?;
        let d = header.split(',').count().saturating_sub(1);
        if d == 0 {
            return Err(EmbedError::Ragged);
        }
        let mut points = Vec::new();
        let mut channel_names = Vec::new();
        for (row, line) in lines.enumerate() {
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() != d + 1 {
                return Err(EmbedError::Ragged);
            }
            let p = cells[..d]
                .iter()
                .map(|c| c.parse::<f64>().ok().filter(|v| v.is_finite()))
                .collect::<Option<Vec<f64>>>()
                .ok_or(EmbedError::NonFinite { row })?;
            points.push(p);
            channel_names.push(cells[d].to_string());
        }
        Ok(PointCloud { points, d, channel_names, explained_variance: Vec::new() })
    }
}

/// Symmetric `n × n` Euclidean distance matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    dist: Vec<f64>,
}

impl DistanceMatrix {
    /// Wraps a full row-major matrix after checking it is a valid metric table.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut dist = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(EmbedError::Ragged);
            }
            dist.extend_from_slice(row);
        }
        for i in 0..n {
            if dist[i * n + i] != 0.0 {
                return Err(EmbedError::InvalidDistances(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let v = dist[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(EmbedError::InvalidDistances(format!("entry ({i},{j}) = {v}")));
                }
                if v != dist[j * n + i] {
                    return Err(EmbedError::InvalidDistances(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        Ok(DistanceMatrix { n, dist })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    /// Every `d_ij` multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> DistanceMatrix {
        DistanceMatrix { n: self.n, dist: self.dist.iter().map(|v| v * factor).collect() }
    }

    pub fn max_distance(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest strictly positive off-diagonal distance.
    pub fn min_positive_distance(&self) -> Option<f64> {
        self.dist.iter().copied().filter(|&v| v > 0.0).min_by(f64::total_cmp)
    }
}

/// Euclidean distances between the points of `pc`, one evaluation per
/// unordered pair.
pub fn distance_matrix(pc: &PointCloud) -> DistanceMatrix {
    euclidean_distances(&pc.points)
}

pub fn euclidean_distances(points: &[Vec<f64>]) -> DistanceMatrix {
    let n = points.len();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    DistanceMatrix { n, dist }
}

/// One-sided Jacobi SVD: rotates pairs of columns of `a` (r × c) until all
/// are mutually orthogonal. Returns the column norms (singular values) and
/// the accumulated rotation `W`, with `a` overwritten by `a W = P Σ`.
///
/// Exact zero singular values are harmless here, unlike nalgebra's
/// bidiagonal SVD, which can return a wrong leading value with `U`/`V`
/// requested on rank-deficient input; channel centring always makes the
/// trial matrix rank deficient.
fn jacobi_svd(a: &mut DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let c = a.ncols();
    let mut w = DMatrix::identity(c, c);
    for _sweep in 0..80 {
        let mut rotated = false;
        for i in 0..c {
            for j in (i + 1)..c {
                let alpha = a.column(i).norm_squared();
                let beta = a.column(j).norm_squared();
                let gamma = a.column(i).dot(&a.column(j));
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for m in [&mut *a, &mut w] {
                    for r in 0..m.nrows() {
                        let (x, y) = (m[(r, i)], m[(r, j)]);
                        m[(r, i)] = cs * x - sn * y;
                        m[(r, j)] = sn * x + cs * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let singular = (0..c).map(|k| a.column(k).norm()).collect();
    (singular, w)
}

/// Projects the channels of `trial` onto the top-`d` principal components.
///
/// Each time sample is centred across channels, the resulting `c × t`
/// matrix is decomposed by SVD, and the scores `U_d Σ_d` become the point
/// coordinates. Each component's sign is chosen so that its
/// largest-magnitude loading (entry of the right singular vector) is positive.
///
/// The SVD is a Householder QR of the `t × c` transpose followed by a
/// Jacobi SVD of the small `R` factor.
pub fn pca_embed(trial: &Trial, d: usize) -> Result<PointCloud> {
    let c = trial.n_channels();
    let t = trial.n_samples();
    let max = c.min(t);
    if d == 0 || d > max {
        return Err(EmbedError::DimensionOutOfRange { d, max });
    }
    if trial.data.iter().any(|r| r.len() != t) {
        return Err(EmbedError::Ragged);
    }
    if let Some(row) = trial.data.iter().position(|r| r.iter().any(|v| !v.is_finite())) {
        return Err(EmbedError::NonFinite { row });
    }

    // t × c: row j holds time sample j across channels, centred.
    let mut centred = DMatrix::from_fn(t, c, |j, i| trial.data[i][j]);
    for j in 0..t {
        let mut row = centred.row_mut(j);
        let mean = row.sum() / c as f64;
        row.add_scalar_mut(-mean);
    }

    // centredᵀ = Q A, A W = P Σ  ⇒  centred (c × t) = W Σ (Q P)ᵀ.
    let (q, mut a) = if t > c {
        let qr = centred.qr();
        (Some(qr.q()), qr.r())
    } else {
        (None, centred)
    };
    let (singular, w) = jacobi_svd(&mut a);
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&x, &y| singular[y].total_cmp(&singular[x]));

    let mut points = vec![vec![0.0; d]; c];
    let mut explained_variance = Vec::with_capacity(d);
    for (k, &comp) in order.iter().take(d).enumerate() {
        let s = singular[comp];
        // Loading direction up to the positive factor 1/s.
        let loading = match &q {
            Some(q) => q * a.column(comp),
            None => a.column(comp).into_owned(),
        };
        let pivot = loading.iamax();
        let sign = if loading[pivot] < 0.0 { -1.0 } else { 1.0 };
        for (i, p) in points.iter_mut().enumerate() {
            p[k] = sign * w[(i, comp)] * s;
        }
        explained_variance.push(s * s / (c as f64 - 1.0));
    }

    Ok(PointCloud { points, d, channel_names: trial.channel_names.clone(), explained_variance })
}
