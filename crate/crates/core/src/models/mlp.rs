use ndarray::Array2;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::hyper::{MAX_ITER, SOLVER};
use super::{Classifier, Design, HyperParams};
use crate::error::{Error, Result};
use crate::gan::optim::{Optimizer, Sgd};
use crate::gan::{sigmoid, softplus, Activation, DenseNet};
use crate::rng::{seeded_rng, RngSeed};
use crate::types::LabeledRecord;

pub const MLP_HIDDEN_UNITS: usize = 32;
const LEARNING_RATE: f64 = 0.5;
const BATCH_SIZE: usize = 32;

/// One tanh hidden layer and a logistic output. The network emits the logit;
/// the score applies the sigmoid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub net: DenseNet,
}

impl Classifier for MlpModel {
    fn dim(&self) -> usize {
        self.net.input_dim()
    }

    fn score(&self, x: &[f64]) -> f64 {
        sigmoid(self.net.forward_row(x)[0])
    }
}

/// Mini-batch gradient descent on cross-entropy for `max_iter` epochs
/// (default 100). Only the `gd` solver exists.
pub fn fit_mlp(train: &[LabeledRecord], hp: &HyperParams, seed: RngSeed) -> Result<MlpModel> {
    match hp.get_str(SOLVER, "gd")? {
        "gd" => {}
        "l-bfgs" | "lbfgs" => return Err(Error::UnsupportedSolver("l-bfgs".into())),
        other => return Err(Error::Config(format!("unknown solver '{other}'; valid: gd"))),
    }
    let design = Design::two_class(train)?;
    let epochs = hp.get_usize(MAX_ITER, 100)?;
    let mut rng = seeded_rng(seed);
    let mut net = DenseNet::init(&[design.d, MLP_HIDDEN_UNITS, 1], Activation::Tanh, Activation::Linear, &mut rng);
    let mut opt = Sgd { learning_rate: LEARNING_RATE };
    let mut order: Vec<usize> = (0..design.n).collect();
    for epoch in 0..epochs {
        order.shuffle(&mut rng);
        let mut loss = 0.0;
        for chunk in order.chunks(BATCH_SIZE) {
            let mut x = Array2::zeros((chunk.len(), design.d));
            for (r, &i) in chunk.iter().enumerate() {
                x.row_mut(r).iter_mut().zip(design.row(i)).for_each(|(a, b)| *a = *b);
            }
            let cache = net.forward_cached(x);
            let logits = cache.output();
            let m = chunk.len() as f64;
            let mut grad = Array2::zeros((chunk.len(), 1));
            for (r, &i) in chunk.iter().enumerate() {
                let (z, y) = (logits[[r, 0]], design.y[i]);
                loss += softplus(z) - y * z;
                grad[[r, 0]] = (sigmoid(z) - y) / m;
            }
            let (grads, _) = net.backward(&cache, &grad);
            opt.step(&mut net, &grads);
        }
        if !loss.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
    }
    Ok(MlpModel { net })
}
