//! Exact t-SNE (no Barnes-Hut approximation).

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{EmbedError, Result};
use crate::seed;

const MIN_PROB: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TsneParams {
    /// `None` means `min(30, (m − 1) / 3)`. Larger values are clamped to `(m − 1) / 3`.
    pub perplexity: Option<f64>,
    pub iters: usize,
    pub learning_rate: f64,
    pub early_exaggeration: f64,
    /// Iterations with exaggerated affinities and momentum 0.5.
    pub exaggeration_iters: usize,
    pub initial_momentum: f64,
    pub final_momentum: f64,
    pub seed: u64,
}

impl Default for TsneParams {
    fn default() -> Self {
        TsneParams {
            perplexity: None,
            iters: 1000,
            learning_rate: 200.0,
            early_exaggeration: 12.0,
            exaggeration_iters: 250,
            initial_momentum: 0.5,
            final_momentum: 0.8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TsneResult {
    /// m rows of (x, y).
    pub embedding: Vec<[f64; 2]>,
    pub perplexity: f64,
    /// KL(P‖Q) right after the exaggeration phase ends.
    pub kl_after_exaggeration: f64,
    pub kl_final: f64,
}

fn squared_distances(x: &[Vec<f64>]) -> Vec<f64> {
    let m = x.len();
    let mut d = vec![0.0; m * m];
    for i in 0..m {
        for j in (i + 1)..m {
            let v: f64 = x[i].iter().zip(&x[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            d[i * m + j] = v;
            d[j * m + i] = v;
        }
    }
    d
}

/// Conditional row `p_{j|i}` for precision `beta`; returns the Shannon entropy (nats).
fn conditional_row(dist_row: &[f64], i: usize, beta: f64, out: &mut [f64]) -> f64 {
    // Shift by the smallest neighbour distance so the largest weight is 1.
    let min = dist_row.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &d)| d).fold(f64::INFINITY, f64::min);
    let mut sum = 0.0;
    for (j, (o, &d)) in out.iter_mut().zip(dist_row).enumerate() {
        *o = if j == i { 0.0 } else { (-(d - min) * beta).exp() };
        sum += *o;
    }
    let mut weighted = 0.0;
    for (j, o) in out.iter_mut().enumerate() {
        *o /= sum;
        if j != i {
            weighted += *o * (dist_row[j] - min);
        }
    }
    sum.ln() + beta * weighted
}

/// Symmetrised affinities `p_ij = (p_{j|i} + p_{i|j}) / 2m`, each Gaussian
/// bandwidth found by bisection so that the row entropy is `ln(perplexity)`
/// within `1e-5`.
pub fn joint_probabilities(x: &[Vec<f64>], perplexity: f64) -> Vec<f64> {
    let m = x.len();
    let dist = squared_distances(x);
    let target = perplexity.ln();
    let mut cond = vec![0.0; m * m];
    for i in 0..m {
        let row = &dist[i * m..(i + 1) * m];
        let out = &mut cond[i * m..(i + 1) * m];
        let (mut beta, mut lo, mut hi) = (1.0, 0.0, f64::INFINITY);
        for _ in 0..200 {
            let h = conditional_row(row, i, beta, out);
            let diff = h - target;
            if diff.abs() < 1e-5 {
                break;
            }
            if diff > 0.0 {
                lo = beta;
                beta = if hi.is_finite() { 0.5 * (beta + hi) } else { beta * 2.0 };
            } else {
                hi = beta;
                beta = 0.5 * (beta + lo);
            }
        }
    }
    let mut p = vec![0.0; m * m];
    let norm = 2.0 * m as f64;
    for i in 0..m {
        for j in 0..m {
            if i != j {
                p[i * m + j] = ((cond[i * m + j] + cond[j * m + i]) / norm).max(MIN_PROB);
            }
        }
    }
    p
}

/// Student-t kernel `1 / (1 + ‖y_i − y_j‖²)` for all pairs, and its off-diagonal sum.
fn student_kernel(y: &[[f64; 2]]) -> (Vec<f64>, f64) {
    let m = y.len();
    let mut num = vec![0.0; m * m];
    let mut sum = 0.0;
    for i in 0..m {
        for j in (i + 1)..m {
            let dx = y[i][0] - y[j][0];
            let dy = y[i][1] - y[j][1];
            let v = 1.0 / (1.0 + dx * dx + dy * dy);
            num[i * m + j] = v;
            num[j * m + i] = v;
            sum += 2.0 * v;
        }
    }
    (num, sum)
}

/// KL(P‖Q) for the embedding `y`.
pub fn kl_divergence(p: &[f64], y: &[[f64; 2]]) -> f64 {
    let m = y.len();
    let (num, sum) = student_kernel(y);
    let mut kl = 0.0;
    for i in 0..m {
        for j in 0..m {
            if i != j {
                let pij = p[i * m + j];
                let q = (num[i * m + j] / sum).max(MIN_PROB);
                kl += pij * (pij / q).ln();
            }
        }
    }
    kl
}

/// Gradient of KL(`exaggeration`·P ‖ Q) with respect to `y`:
/// `4 Σ_j (e·p_ij − q_ij)(y_i − y_j) / (1 + ‖y_i − y_j‖²)`.
pub fn kl_gradient(p: &[f64], y: &[[f64; 2]], exaggeration: f64) -> Vec<[f64; 2]> {
    let m = y.len();
    let (num, sum) = student_kernel(y);
    (0..m)
        .map(|i| {
            let mut g = [0.0; 2];
            for j in 0..m {
                if i == j {
                    continue;
                }
                let w = num[i * m + j];
                let coef = 4.0 * (exaggeration * p[i * m + j] - w / sum) * w;
                g[0] += coef * (y[i][0] - y[j][0]);
                g[1] += coef * (y[i][1] - y[j][1]);
            }
            g
        })
        .collect()
}

/// Embeds the rows of `features` in two dimensions.
pub fn tsne_embed(features: &[Vec<f64>], params: &TsneParams) -> Result<TsneResult> {
    let m = features.len();
    if m < 4 {
        return Err(EmbedError::TooFewPoints(m));
    }
    let p_dim = features[0].len();
    if features.iter().any(|r| r.len() != p_dim) {
        return Err(EmbedError::Ragged);
    }
    if let Some(row) = features.iter().position(|r| r.iter().any(|v| !v.is_finite())) {
        return Err(EmbedError::NonFinite { row });
    }
    let cap = (m as f64 - 1.0) / 3.0;
    let perplexity = params.perplexity.unwrap_or(30.0).min(cap);
    if !(perplexity > 0.0) || !(params.learning_rate > 0.0) {
        return Err(EmbedError::InvalidParams(format!(
            "perplexity {perplexity} and learning rate {} must be positive",
            params.learning_rate
        )));
    }

    let p = joint_probabilities(features, perplexity);
    let mut rng = seed::rng(params.seed);
    let mut y: Vec<[f64; 2]> = (0..m)
        .map(|_| [1e-4 * rng.sample::<f64, _>(StandardNormal), 1e-4 * rng.sample::<f64, _>(StandardNormal)])
        .collect();
    let mut velocity = vec![[0.0; 2]; m];
    let mut gains = vec![[1.0; 2]; m];
    let mut kl_after_exaggeration = f64::NAN;

    for it in 0..params.iters {
        if it == params.exaggeration_iters {
            kl_after_exaggeration = kl_divergence(&p, &y);
            // Gains tuned to the exaggerated objective overshoot on the real one.
            velocity = vec![[0.0; 2]; m];
            gains = vec![[1.0; 2]; m];
        }
        let (exaggeration, momentum) = if it < params.exaggeration_iters {
            (params.early_exaggeration, params.initial_momentum)
        } else {
            (1.0, params.final_momentum)
        };
        let grad = kl_gradient(&p, &y, exaggeration);
        for i in 0..m {
            for k in 0..2 {
                let g = grad[i][k];
                gains[i][k] =
                    if g * velocity[i][k] < 0.0 { gains[i][k] + 0.2 } else { f64::max(gains[i][k] * 0.8, 0.01) };
                velocity[i][k] = momentum * velocity[i][k] - params.learning_rate * gains[i][k] * g;
                y[i][k] += velocity[i][k];
            }
        }
        for k in 0..2 {
            let mean = y.iter().map(|r| r[k]).sum::<f64>() / m as f64;
            y.iter_mut().for_each(|r| r[k] -= mean);
        }
    }
    let kl_final = kl_divergence(&p, &y);
    if kl_after_exaggeration.is_nan() {
        kl_after_exaggeration = kl_final;
    }
    Ok(TsneResult { embedding: y, perplexity, kl_after_exaggeration, kl_final })
}
