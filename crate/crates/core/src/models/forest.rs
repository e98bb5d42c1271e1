use rand::Rng;
use serde::{Deserialize, Serialize};

use super::hyper::ESTIMATORS;
use super::tree::{classification_params, grow, Presorted, Tree, TreeParams};
use super::{Classifier, Design, HyperParams};
use crate::error::Result;
use crate::rng::{seeded_rng, RngSeed};
use crate::types::LabeledRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForestOptions {
    /// Train each tree on n draws with replacement.
    pub bootstrap: bool,
    /// Examine `ceil(sqrt(d))` random features per split.
    pub feature_subsample: bool,
    /// Give every tree the master seed instead of `master ^ i`.
    pub shared_seed: bool,
}

impl Default for ForestOptions {
    fn default() -> Self {
        ForestOptions { bootstrap: true, feature_subsample: true, shared_seed: false }
    }
}

/// Averages the leaf scores of its trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<Tree>,
    dim: usize,
    /// Accuracy of out-of-bag votes over samples left out by at least one tree.
    pub oob_accuracy: Option<f64>,
}

impl Classifier for RandomForest {
    fn dim(&self) -> usize {
        self.dim
    }

    fn score(&self, x: &[f64]) -> f64 {
        if self.trees.is_empty() {
            return 0.5;
        }
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }
}

/// Random forest from `estimators` (default 20), `max_depth` (default 10) and
/// `criterion` (default gini).
pub fn fit_random_forest(train: &[LabeledRecord], hp: &HyperParams, seed: RngSeed) -> Result<RandomForest> {
    let n_trees = hp.get_usize(ESTIMATORS, 20)?;
    fit_random_forest_with(train, hp, n_trees, ForestOptions::default(), seed)
}

pub fn fit_random_forest_with(
    train: &[LabeledRecord],
    hp: &HyperParams,
    n_trees: usize,
    opts: ForestOptions,
    seed: RngSeed,
) -> Result<RandomForest> {
    let design = Design::two_class(train)?;
    let mut params: TreeParams = classification_params(hp, 10)?;
    if opts.feature_subsample {
        params.max_features = Some((design.d as f64).sqrt().ceil() as usize);
    }
    let pre = Presorted::new(&design);
    let n = design.n;

    let mut trees = Vec::with_capacity(n_trees);
    let mut oob_sum = vec![0.0; n];
    let mut oob_votes = vec![0u32; n];
    let mut weights = vec![0.0; n];
    for i in 0..n_trees {
        let mut rng = seeded_rng(if opts.shared_seed { seed } else { seed.derive(i as u64) });
        if opts.bootstrap {
            weights.iter_mut().for_each(|w| *w = 0.0);
            for _ in 0..n {
                weights[rng.random_range(0..n)] += 1.0;
            }
        } else {
            weights.iter_mut().for_each(|w| *w = 1.0);
        }
        let tree = grow(&pre, &design.y, &weights, params, Some(&mut rng));
        if opts.bootstrap {
            for (j, row) in design.rows().enumerate() {
                if weights[j] == 0.0 {
                    oob_sum[j] += tree.predict(row);
                    oob_votes[j] += 1;
                }
            }
        }
        trees.push(tree);
    }

    let oob_accuracy = opts.bootstrap.then(|| {
        let (mut hit, mut seen) = (0usize, 0usize);
        for j in 0..n {
            if oob_votes[j] > 0 {
                seen += 1;
                let predicted = oob_sum[j] / oob_votes[j] as f64 >= 0.5;
                hit += usize::from(predicted == (design.y[j] == 1.0));
            }
        }
        if seen == 0 {
            f64::NAN
        } else {
            hit as f64 / seen as f64
        }
    });
    Ok(RandomForest { trees, dim: design.d, oob_accuracy: oob_accuracy.filter(|a| a.is_finite()) })
}
