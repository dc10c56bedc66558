use serde::{Deserialize, Serialize};

use super::{check_positive, dot, sigmoid};
use crate::learning::{LearnError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticParams {
    /// L2 penalty on the weights (not the intercept).
    pub l2: f64,
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams { l2: 1e-3, learning_rate: 0.5, epochs: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticRegression {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl LogisticRegression {
    /// Full-batch gradient descent on mean cross-entropy plus `l2/2 · |w|²`.
    pub fn fit(x: &[Vec<f64>], y: &[bool], params: &LogisticParams) -> Result<Self> {
        check_positive("learning_rate", params.learning_rate)?;
        if !(params.l2 >= 0.0 && params.l2.is_finite()) {
            return Err(LearnError::InvalidParam(format!("l2 = {}", params.l2)));
        }
        let n = x.len() as f64;
        let p = x[0].len();
        let mut w = vec![0.0; p];
        let mut b = 0.0;
        let mut gw = vec![0.0; p];
        for _ in 0..params.epochs {
            gw.iter_mut().zip(&w).for_each(|(g, wi)| *g = params.l2 * wi);
            let mut gb = 0.0;
            for (row, &t) in x.iter().zip(y) {
                let r = (sigmoid(dot(&w, row) + b) - f64::from(u8::from(t))) / n;
                gw.iter_mut().zip(row).for_each(|(g, v)| *g += r * v);
                gb += r;
            }
            w.iter_mut().zip(&gw).for_each(|(wi, g)| *wi -= params.learning_rate * g);
            b -= params.learning_rate * gb;
        }
        Ok(LogisticRegression { weights: w, intercept: b })
    }

    pub fn probability(&self, row: &[f64]) -> f64 {
        sigmoid(dot(&self.weights, row) + self.intercept)
    }
}
