//! The five classifiers. Every model sees z-scored features fitted on the
//! training rows only and is deterministic given its seed.

pub mod forest;
pub mod logistic;
pub mod mlp;
pub mod svm;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{check_matrix, LearnError, Result, StandardScaler};
use crate::signal_io::Label;

pub use forest::{ForestParams, RandomForest};
pub use logistic::{LogisticParams, LogisticRegression};
pub use mlp::{Mlp, MlpParams};
pub use svm::{LinearSvm, SvmParams};
pub use tree::{DecisionTree, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    RF,
    DT,
    SVM,
    LR,
    MLP,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [ModelKind::RF, ModelKind::DT, ModelKind::SVM, ModelKind::LR, ModelKind::MLP];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::RF => "RF",
            ModelKind::DT => "DT",
            ModelKind::SVM => "SVM",
            ModelKind::LR => "LR",
            ModelKind::MLP => "MLP",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = LearnError;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| LearnError::InvalidParam(format!("unknown model `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    pub logistic: LogisticParams,
    pub svm: SvmParams,
    pub tree: TreeParams,
    pub forest: ForestParams,
    pub mlp: MlpParams,
}

#[derive(Debug, Clone)]
enum Inner {
    Forest(RandomForest),
    Tree(DecisionTree),
    Svm(LinearSvm),
    Logistic(LogisticRegression),
    Mlp(Mlp),
}

/// A trained model together with its training-set scaler.
#[derive(Debug, Clone)]
pub struct FittedModel {
    pub kind: ModelKind,
    pub scaler: StandardScaler,
    inner: Inner,
}

/// Hard labels plus the score they were thresholded from: a probability for
/// RF, DT, LR and MLP, a signed margin for SVM.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub labels: Vec<Label>,
    pub scores: Vec<f64>,
}

impl FittedModel {
    pub fn fit(kind: ModelKind, params: &ModelParams, x: &[Vec<f64>], y: &[bool], seed: u64) -> Result<Self> {
        check_matrix(x)?;
        if x.len() != y.len() {
            return Err(LearnError::LengthMismatch(x.len(), y.len()));
        }
        if y.iter().all(|&v| v) || y.iter().all(|&v| !v) {
            return Err(LearnError::SingleClass);
        }
        let scaler = StandardScaler::fit(x);
        let z = scaler.transform(x);
        let inner = match kind {
            ModelKind::RF => Inner::Forest(RandomForest::fit(&z, y, &params.forest, seed)?),
            ModelKind::DT => Inner::Tree(DecisionTree::fit(&z, y, &params.tree, seed)?),
            ModelKind::SVM => Inner::Svm(LinearSvm::fit(&z, y, &params.svm)?),
            ModelKind::LR => Inner::Logistic(LogisticRegression::fit(&z, y, &params.logistic)?),
            ModelKind::MLP => Inner::Mlp(Mlp::fit(&z, y, &params.mlp, seed)?),
        };
        Ok(FittedModel { kind, scaler, inner })
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Predictions> {
        if x.is_empty() {
            return Ok(Predictions { labels: Vec::new(), scores: Vec::new() });
        }
        let p = check_matrix(x)?;
        if p != self.scaler.mean.len() {
            return Err(LearnError::LengthMismatch(p, self.scaler.mean.len()));
        }
        let mut labels = Vec::with_capacity(x.len());
        let mut scores = Vec::with_capacity(x.len());
        for row in x {
            let z = self.scaler.transform_row(row);
            let (score, stress) = match &self.inner {
                Inner::Forest(m) => {
                    let s = m.probability(&z);
                    (s, s >= 0.5)
                }
                Inner::Tree(m) => {
                    let s = m.probability(&z);
                    (s, s >= 0.5)
                }
                Inner::Svm(m) => {
                    let s = m.margin(&z);
                    (s, s >= 0.0)
                }
                Inner::Logistic(m) => {
                    let s = m.probability(&z);
                    (s, s >= 0.5)
                }
                Inner::Mlp(m) => {
                    let s = m.probability(&z);
                    (s, s >= 0.5)
                }
            };
            labels.push(Label::from_bool(stress));
            scores.push(score);
        }
        Ok(Predictions { labels, scores })
    }
}

/// Fits `kind` on `(x_train, y_train)` and predicts `x_test`.
pub fn train_predict(
    kind: ModelKind,
    params: &ModelParams,
    x_train: &[Vec<f64>],
    y_train: &[bool],
    x_test: &[Vec<f64>],
    seed: u64,
) -> Result<Predictions> {
    FittedModel::fit(kind, params, x_train, y_train, seed)?.predict(x_test)
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(LearnError::InvalidParam(format!("{name} must be positive, got {v}")))
    }
}
