//! Shared domain types.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense, finite feature values of one record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidFeature("feature vector is empty".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidFeature(format!(
                "non-finite value {} at position {i}",
                values[i]
            )));
        }
        Ok(FeatureVector(values))
    }

    /// Caller guarantees the values are finite and nonempty.
    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        debug_assert!(!values.is_empty() && values.iter().all(|v| v.is_finite()));
        FeatureVector(values)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for FeatureVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        FeatureVector::new(values)
    }
}

impl From<FeatureVector> for Vec<f64> {
    fn from(v: FeatureVector) -> Self {
        v.0
    }
}

/// Binary class. Fraud is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn as_u8(self) -> u8 {
        match self {
            Label::Negative => 0,
            Label::Positive => 1,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.as_u8() as f64
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    pub fn from_score(score: f64) -> Label {
        if score >= 0.5 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn other(self) -> Label {
        match self {
            Label::Negative => Label::Positive,
            Label::Positive => Label::Negative,
        }
    }
}

impl From<Label> for u8 {
    fn from(l: Label) -> u8 {
        l.as_u8()
    }
}

impl TryFrom<u8> for Label {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Label::Negative),
            1 => Ok(Label::Positive),
            other => Err(Error::Schema(format!("label must be 0 or 1, got {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledRecord {
    pub features: FeatureVector,
    pub label: Label,
}

impl LabeledRecord {
    pub fn new(features: FeatureVector, label: Label) -> Self {
        LabeledRecord { features, label }
    }

    pub fn from_values(values: Vec<f64>, label: Label) -> Result<Self> {
        Ok(LabeledRecord::new(FeatureVector::new(values)?, label))
    }

    pub fn dim(&self) -> usize {
        self.features.dim()
    }

    pub fn values(&self) -> &[f64] {
        self.features.values()
    }
}

/// Records collected during one stream interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordBatch {
    pub records: Vec<LabeledRecord>,
    pub batch_index: u64,
    /// Arrival timestamp in milliseconds since the stream started.
    pub arrival_ms: u64,
}

impl RecordBatch {
    pub fn new(records: Vec<LabeledRecord>, batch_index: u64, arrival_ms: u64) -> Result<Self> {
        if let Some(first) = records.first() {
            let dim = first.dim();
            if let Some(bad) = records.iter().find(|r| r.dim() != dim) {
                return Err(Error::dim(dim, bad.dim()));
            }
        }
        Ok(RecordBatch {
            records,
            batch_index,
            arrival_ms,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.records.first().map(LabeledRecord::dim)
    }

    pub fn positives(&self) -> usize {
        self.records.iter().filter(|r| r.label.is_positive()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    #[serde(rename = "tp")]
    pub true_positives: u64,
    #[serde(rename = "fn")]
    pub false_negatives: u64,
    #[serde(rename = "tn")]
    pub true_negatives: u64,
    #[serde(rename = "fp")]
    pub false_positives: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.true_positives + self.false_negatives + self.true_negatives + self.false_positives
    }

    pub fn record(&mut self, truth: Label, predicted: Label) {
        match (truth, predicted) {
            (Label::Positive, Label::Positive) => self.true_positives += 1,
            (Label::Positive, Label::Negative) => self.false_negatives += 1,
            (Label::Negative, Label::Negative) => self.true_negatives += 1,
            (Label::Negative, Label::Positive) => self.false_positives += 1,
        }
    }
}

/// Sensitivity, specificity and their mean (reported as AUC), with the
/// underlying counts.
///
/// `degenerate` is set when one of the classes was absent, in which case the
/// corresponding rate is reported as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub sensitivity: f64,
    pub specificity: f64,
    pub auc: f64,
    pub confusion: ConfusionMatrix,
    pub degenerate: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_vector_rejects_non_finite() {
        assert!(FeatureVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(FeatureVector::new(vec![f64::INFINITY]).is_err());
        assert!(FeatureVector::new(vec![]).is_err());
        assert_eq!(FeatureVector::new(vec![1.0, 2.0]).unwrap().dim(), 2);
    }

    #[test]
    fn label_threshold() {
        assert_eq!(Label::from_score(0.5), Label::Positive);
        assert_eq!(Label::from_score(0.4999), Label::Negative);
        assert!(Label::try_from(2u8).is_err());
    }

    #[test]
    fn batch_rejects_mixed_dims() {
        let a = LabeledRecord::from_values(vec![0.0, 1.0], Label::Positive).unwrap();
        let b = LabeledRecord::from_values(vec![0.0], Label::Negative).unwrap();
        assert!(RecordBatch::new(vec![a, b], 0, 0).is_err());
    }

    #[test]
    fn confusion_counts_sum() {
        let mut cm = ConfusionMatrix::default();
        cm.record(Label::Positive, Label::Positive);
        cm.record(Label::Negative, Label::Positive);
        cm.record(Label::Negative, Label::Negative);
        assert_eq!(cm.total(), 3);
        let json = serde_json::to_string(&cm).unwrap();
        assert_eq!(json, r#"{"tp":1,"fn":0,"tn":1,"fp":1}"#);
    }
}
