use serde::{Deserialize, Serialize};

use super::hyper::{ESTIMATORS, MAX_DEPTH};
use super::tree::{grow, Criterion, Presorted, Tree, TreeParams};
use super::{Classifier, Design, HyperParams};
use crate::error::{Error, Result};
use crate::gan::{sigmoid, softplus};
use crate::types::LabeledRecord;

pub const GBT_LEARNING_RATE: f64 = 0.1;

/// Additive logistic model: `score = sigmoid(base + lr * sum(tree(x)))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoosting {
    pub base: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
    dim: usize,
    /// Mean training log-loss after the prior and after each stage.
    pub loss_trace: Vec<f64>,
}

impl GradientBoosting {
    pub fn raw(&self, x: &[f64]) -> f64 {
        self.base + self.learning_rate * self.trees.iter().map(|t| t.predict(x)).sum::<f64>()
    }
}

impl Classifier for GradientBoosting {
    fn dim(&self) -> usize {
        self.dim
    }

    fn score(&self, x: &[f64]) -> f64 {
        sigmoid(self.raw(x))
    }
}

fn log_loss(f: &[f64], y: &[f64]) -> f64 {
    // -[y ln s(f) + (1-y) ln(1-s(f))] = softplus(f) - y f
    f.iter().zip(y).map(|(&f, &y)| softplus(f) - y * f).sum::<f64>() / f.len() as f64
}

/// Boosted regression trees on logistic loss, `estimators` stages (default
/// 20) of depth `max_depth` (default 5). Each tree is grown on the residuals
/// `y - p` by squared error; its leaves then take the Newton value
/// `sum(y - p) / sum(p (1 - p))` before shrinkage by the learning rate.
pub fn fit_gbt(train: &[LabeledRecord], hp: &HyperParams) -> Result<GradientBoosting> {
    let design = Design::two_class(train)?;
    let stages = hp.get_usize(ESTIMATORS, 20)?;
    let params = TreeParams { criterion: Criterion::Variance, max_depth: hp.get_usize(MAX_DEPTH, 5)?, max_features: None };
    let pre = Presorted::new(&design);
    let n = design.n;

    let p = design.y.iter().sum::<f64>() / n as f64;
    let base = (p / (1.0 - p)).ln();
    let mut f = vec![base; n];
    let w = vec![1.0; n];
    let mut residual = vec![0.0; n];
    let mut trees = Vec::with_capacity(stages);
    let mut loss_trace = vec![log_loss(&f, &design.y)];
    for stage in 0..stages {
        for i in 0..n {
            residual[i] = design.y[i] - sigmoid(f[i]);
        }
        let mut tree = grow(&pre, &residual, &w, params, None);
        // Newton step per leaf: sum of residuals over sum of p(1 - p).
        let mut num = vec![0.0; tree.nodes().len()];
        let mut den = vec![0.0; tree.nodes().len()];
        for (i, row) in design.rows().enumerate() {
            let id = tree.leaf_id(row);
            let p = sigmoid(f[i]);
            num[id] += residual[i];
            den[id] += p * (1.0 - p);
        }
        tree.set_leaf_values(|id| num[id] / den[id].max(1e-12));
        for (i, row) in design.rows().enumerate() {
            f[i] += GBT_LEARNING_RATE * tree.predict(row);
        }
        let loss = log_loss(&f, &design.y);
        if !loss.is_finite() {
            return Err(Error::TrainingDiverged { epoch: stage });
        }
        loss_trace.push(loss);
        trees.push(tree);
    }
    Ok(GradientBoosting { base, learning_rate: GBT_LEARNING_RATE, trees, dim: design.d, loss_trace })
}
