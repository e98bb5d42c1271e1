use super::Classifier;
use crate::balance::NeighborIndex;
use crate::error::{Error, Result};
use crate::types::{Label, LabeledRecord};

/// Lazy k-nearest-neighbour vote over the stored training set.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    index: NeighborIndex,
    positive: Vec<bool>,
    pub k: usize,
}

impl Classifier for KnnModel {
    fn dim(&self) -> usize {
        self.index.dim()
    }

    /// Positive fraction among the `k` nearest records, distance ties going
    /// to the lower training index.
    fn score(&self, x: &[f64]) -> f64 {
        let nn = self.index.query(x, self.k, None);
        nn.iter().filter(|n| self.positive[n.index]).count() as f64 / self.k as f64
    }
}

pub fn fit_knn(train: &[LabeledRecord], k: usize) -> Result<KnnModel> {
    let first = train.first().ok_or(Error::EmptyDataset)?;
    if k == 0 || k > train.len() {
        return Err(Error::Config(format!("knn needs 1 <= k <= {} (training size), got {k}", train.len())));
    }
    if let Some(r) = train.iter().find(|r| r.dim() != first.dim()) {
        return Err(Error::dim(first.dim(), r.dim()));
    }
    Ok(KnnModel {
        index: NeighborIndex::from_records(train),
        positive: train.iter().map(|r| r.label == Label::Positive).collect(),
        k,
    })
}
