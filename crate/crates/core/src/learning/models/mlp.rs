use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_positive, sigmoid};
use crate::learning::{LearnError, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpParams {
    pub hidden: usize,
    pub learning_rate: f64,
    /// Heavy-ball momentum on the full-batch gradient.
    pub momentum: f64,
    pub epochs: usize,
    /// L2 penalty on both weight matrices.
    pub l2: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams { hidden: 32, learning_rate: 0.1, momentum: 0.9, epochs: 500, l2: 1e-4 }
    }
}

/// One tanh hidden layer and a sigmoid output unit.
///
/// Parameters live in one flat vector: `W1` (hidden × p, row-major), `b1`,
/// `w2`, then the scalar `b2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub n_inputs: usize,
    pub hidden: usize,
    pub theta: Vec<f64>,
}

pub fn n_params(p: usize, hidden: usize) -> usize {
    hidden * p + 2 * hidden + 1
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn forward(theta: &[f64], p: usize, hidden: usize, row: &[f64], h: &mut [f64]) -> f64 {
    let (w1, rest) = theta.split_at(hidden * p);
    let (b1, rest) = rest.split_at(hidden);
    let (w2, b2) = rest.split_at(hidden);
    let mut z = b2[0];
    for j in 0..hidden {
        let a: f64 = w1[j * p..(j + 1) * p].iter().zip(row).map(|(w, v)| w * v).sum::<f64>() + b1[j];
        h[j] = a.tanh();
        z += w2[j] * h[j];
    }
    z
}

/// Mean cross-entropy plus `l2/2 · (|W1|² + |w2|²)` and its gradient.
pub fn loss_and_grad(theta: &[f64], p: usize, hidden: usize, x: &[Vec<f64>], y: &[bool], l2: f64) -> (f64, Vec<f64>) {
    let n = x.len() as f64;
    let mut grad = vec![0.0; theta.len()];
    let mut h = vec![0.0; hidden];
    let mut loss = 0.0;
    let w2_off = hidden * p + hidden;
    for (row, &t) in x.iter().zip(y) {
        let z = forward(theta, p, hidden, row, &mut h);
        let target = f64::from(u8::from(t));
        loss += (softplus(z) - target * z) / n;
        let dz = (sigmoid(z) - target) / n;
        for j in 0..hidden {
            grad[w2_off + j] += dz * h[j];
            let da = dz * theta[w2_off + j] * (1.0 - h[j] * h[j]);
            for (g, v) in grad[j * p..(j + 1) * p].iter_mut().zip(row) {
                *g += da * v;
            }
            grad[hidden * p + j] += da;
        }
        grad[w2_off + hidden] += dz;
    }
    let weights = (0..hidden * p).chain(w2_off..w2_off + hidden);
    for i in weights {
        loss += 0.5 * l2 * theta[i] * theta[i];
        grad[i] += l2 * theta[i];
    }
    (loss, grad)
}

impl Mlp {
    /// Glorot-uniform initialisation from `seed`, zero biases.
    pub fn init(p: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = seed::rng(seed);
        let mut theta = vec![0.0; n_params(p, hidden)];
        let r1 = (6.0 / (p + hidden) as f64).sqrt();
        theta[..hidden * p].iter_mut().for_each(|w| *w = rng.random_range(-r1..r1));
        let r2 = (6.0 / (hidden + 1) as f64).sqrt();
        let w2_off = hidden * p + hidden;
        theta[w2_off..w2_off + hidden].iter_mut().for_each(|w| *w = rng.random_range(-r2..r2));
        Mlp { n_inputs: p, hidden, theta }
    }

    pub fn fit(x: &[Vec<f64>], y: &[bool], params: &MlpParams, seed: u64) -> Result<Self> {
        check_positive("learning_rate", params.learning_rate)?;
        if params.hidden == 0 || !(0.0..1.0).contains(&params.momentum) || !(params.l2 >= 0.0) {
            return Err(LearnError::InvalidParam(format!("mlp parameters {params:?}")));
        }
        let mut m = Mlp::init(x[0].len(), params.hidden, seed);
        let mut velocity = vec![0.0; m.theta.len()];
        for _ in 0..params.epochs {
            let (_, g) = loss_and_grad(&m.theta, m.n_inputs, m.hidden, x, y, params.l2);
            for ((t, v), gi) in m.theta.iter_mut().zip(&mut velocity).zip(&g) {
                *v = params.momentum * *v - params.learning_rate * gi;
                *t += *v;
            }
        }
        Ok(m)
    }

    pub fn probability(&self, row: &[f64]) -> f64 {
        let mut h = vec![0.0; self.hidden];
        sigmoid(forward(&self.theta, self.n_inputs, self.hidden, row, &mut h))
    }
}
