//! Classifier families.
//!
//! Every fitted model scores a record in `[0, 1]` and predicts the positive
//! class iff the score is at least 0.5.

mod forest;
mod gbt;
mod hyper;
mod knn;
mod linear;
mod mlp;
mod naive_bayes;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use forest::{fit_random_forest, fit_random_forest_with, ForestOptions, RandomForest};
pub use gbt::{fit_gbt, GradientBoosting, GBT_LEARNING_RATE};
pub use hyper::{default_grid, HyperParams, ParamValue};
pub use knn::{fit_knn, KnnModel};
pub use linear::{fit_linear_svm, fit_logistic_regression, LinearModel};
pub use mlp::{fit_mlp, MlpModel, MLP_HIDDEN_UNITS};
pub use naive_bayes::{fit_naive_bayes, GaussianNb};
pub use tree::{fit_decision_tree, Criterion, DecisionTree};

use crate::error::{Error, Result};
use crate::rng::RngSeed;
use crate::types::{Label, LabeledRecord, RecordBatch};

/// Anything that scores feature rows.
pub trait Classifier {
    fn dim(&self) -> usize;

    /// Probability-like score of the positive class.
    fn score(&self, x: &[f64]) -> f64;

    fn predict(&self, x: &[f64]) -> Label {
        Label::from_score(self.score(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Nb,
    Lr,
    Svm,
    Dt,
    Rf,
    Gbt,
    Knn,
    Mlp,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Nb,
        Family::Lr,
        Family::Svm,
        Family::Dt,
        Family::Rf,
        Family::Gbt,
        Family::Knn,
        Family::Mlp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Nb => "nb",
            Family::Lr => "lr",
            Family::Svm => "svm",
            Family::Dt => "dt",
            Family::Rf => "rf",
            Family::Gbt => "gbt",
            Family::Knn => "knn",
            Family::Mlp => "mlp",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Family::ALL.iter().map(|f| f.name()).collect();
                Error::Config(format!("unknown model '{s}'; valid names: {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    NaiveBayes(GaussianNb),
    Linear(LinearModel),
    Tree(DecisionTree),
    Forest(RandomForest),
    Boosting(GradientBoosting),
    Knn(KnnModel),
    Mlp(MlpModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub family: Family,
    pub kind: ModelKind,
}

impl TrainedModel {
    fn inner(&self) -> &dyn Classifier {
        match &self.kind {
            ModelKind::NaiveBayes(m) => m,
            ModelKind::Linear(m) => m,
            ModelKind::Tree(m) => m,
            ModelKind::Forest(m) => m,
            ModelKind::Boosting(m) => m,
            ModelKind::Knn(m) => m,
            ModelKind::Mlp(m) => m,
        }
    }

    /// Score with a dimension check.
    pub fn score_checked(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::dim(self.dim(), x.len()));
        }
        Ok(self.score(x))
    }
}

impl Classifier for TrainedModel {
    fn dim(&self) -> usize {
        self.inner().dim()
    }

    fn score(&self, x: &[f64]) -> f64 {
        self.inner().score(x)
    }
}

/// Fits any family. Families without randomness ignore `seed`.
pub fn fit(family: Family, train: &[LabeledRecord], hp: &HyperParams, seed: RngSeed) -> Result<TrainedModel> {
    let kind = match family {
        Family::Nb => ModelKind::NaiveBayes(fit_naive_bayes(train)?),
        Family::Lr => ModelKind::Linear(fit_logistic_regression(train, hp)?),
        Family::Svm => ModelKind::Linear(fit_linear_svm(train, hp)?),
        Family::Dt => ModelKind::Tree(fit_decision_tree(train, hp)?),
        Family::Rf => ModelKind::Forest(fit_random_forest(train, hp, seed)?),
        Family::Gbt => ModelKind::Boosting(fit_gbt(train, hp)?),
        Family::Knn => ModelKind::Knn(fit_knn(train, hp.get_usize(hyper::K, 5)?)?),
        Family::Mlp => ModelKind::Mlp(fit_mlp(train, hp, seed)?),
    };
    Ok(TrainedModel { family, kind })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Predictions {
    pub labels: Vec<Label>,
    pub scores: Vec<f64>,
}

/// Scores every record of a batch, preserving order.
pub fn predict_batch<C: Classifier + ?Sized>(model: &C, batch: &RecordBatch) -> Result<Predictions> {
    predict_records(model, &batch.records)
}

pub fn predict_records<C: Classifier + ?Sized>(model: &C, records: &[LabeledRecord]) -> Result<Predictions> {
    let mut out = Predictions {
        labels: Vec::with_capacity(records.len()),
        scores: Vec::with_capacity(records.len()),
    };
    for r in records {
        if r.dim() != model.dim() {
            return Err(Error::dim(model.dim(), r.dim()));
        }
        let s = model.score(r.values());
        out.scores.push(s);
        out.labels.push(Label::from_score(s));
    }
    Ok(out)
}

/// Row-major feature matrix with 0/1 targets.
pub(crate) struct Design {
    pub n: usize,
    pub d: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Design {
    pub fn new(records: &[LabeledRecord]) -> Result<Self> {
        let first = records.first().ok_or(Error::EmptyDataset)?;
        let d = first.dim();
        let mut x = Vec::with_capacity(records.len() * d);
        let mut y = Vec::with_capacity(records.len());
        for r in records {
            if r.dim() != d {
                return Err(Error::dim(d, r.dim()));
            }
            x.extend_from_slice(r.values());
            y.push(r.label.as_f64());
        }
        Ok(Design { n: records.len(), d, x, y })
    }

    /// Like [`Design::new`] but fails on single-class input.
    pub fn two_class(records: &[LabeledRecord]) -> Result<Self> {
        let design = Design::new(records)?;
        let pos = design.y.iter().filter(|&&v| v == 1.0).count();
        if pos == 0 || pos == design.n {
            return Err(Error::SingleClass);
        }
        Ok(design)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.x.chunks_exact(self.d)
    }
}
