use serde::{Deserialize, Serialize};

use super::{check_positive, dot};
use crate::learning::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmParams {
    /// Regularisation strength in `λ/2 · |w|² + mean hinge`.
    pub lambda: f64,
    pub iterations: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams { lambda: 1e-2, iterations: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvm {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

fn objective(w: &[f64], b: f64, x: &[Vec<f64>], s: &[f64], lambda: f64) -> f64 {
    let hinge: f64 = x.iter().zip(s).map(|(r, &t)| (1.0 - t * (dot(w, r) + b)).max(0.0)).sum();
    0.5 * lambda * dot(w, w) + hinge / x.len() as f64
}

impl LinearSvm {
    /// Full-batch subgradient descent with step `1/(λ t)`. Subgradient steps
    /// are not monotone, so the iterate with the lowest objective is kept.
    pub fn fit(x: &[Vec<f64>], y: &[bool], params: &SvmParams) -> Result<Self> {
        check_positive("lambda", params.lambda)?;
        let n = x.len() as f64;
        let p = x[0].len();
        let s: Vec<f64> = y.iter().map(|&t| if t { 1.0 } else { -1.0 }).collect();
        let mut w = vec![0.0; p];
        let mut b = 0.0;
        let mut best = (objective(&w, b, x, &s, params.lambda), w.clone(), b);
        let mut gw = vec![0.0; p];
        for t in 1..=params.iterations {
            gw.iter_mut().zip(&w).for_each(|(g, wi)| *g = params.lambda * wi);
            let mut gb = 0.0;
            for (row, &si) in x.iter().zip(&s) {
                if si * (dot(&w, row) + b) < 1.0 {
                    gw.iter_mut().zip(row).for_each(|(g, v)| *g -= si * v / n);
                    gb -= si / n;
                }
            }
            let eta = 1.0 / (params.lambda * t as f64);
            w.iter_mut().zip(&gw).for_each(|(wi, g)| *wi -= eta * g);
            b -= eta * gb;
            let obj = objective(&w, b, x, &s, params.lambda);
            if obj < best.0 {
                best = (obj, w.clone(), b);
            }
        }
        Ok(LinearSvm { weights: best.1, intercept: best.2 })
    }

    pub fn margin(&self, row: &[f64]) -> f64 {
        dot(&self.weights, row) + self.intercept
    }
}
