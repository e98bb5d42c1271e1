use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{Classifier, Design};
use crate::error::Result;
use crate::gan::sigmoid;
use crate::types::LabeledRecord;

pub const VARIANCE_FLOOR: f64 = 1e-9;

/// Gaussian naive Bayes; index 0 is the negative class, 1 the positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
    pub priors: [f64; 2],
}

impl GaussianNb {
    fn log_joint(&self, class: usize, x: &[f64]) -> f64 {
        let mut l = self.priors[class].ln();
        for ((&xi, &m), &v) in x.iter().zip(&self.means[class]).zip(&self.variances[class]) {
            l -= 0.5 * (2.0 * PI * v).ln() + (xi - m) * (xi - m) / (2.0 * v);
        }
        l
    }
}

impl Classifier for GaussianNb {
    fn dim(&self) -> usize {
        self.means[0].len()
    }

    /// Posterior of the positive class.
    fn score(&self, x: &[f64]) -> f64 {
        sigmoid(self.log_joint(1, x) - self.log_joint(0, x))
    }
}

pub fn fit_naive_bayes(train: &[LabeledRecord]) -> Result<GaussianNb> {
    let design = Design::two_class(train)?;
    let d = design.d;
    let mut counts = [0usize; 2];
    let mut sums = [vec![0.0; d], vec![0.0; d]];
    for (row, &y) in design.rows().zip(&design.y) {
        let c = y as usize;
        counts[c] += 1;
        sums[c].iter_mut().zip(row).for_each(|(s, v)| *s += v);
    }
    let means = [0, 1].map(|c| sums[c].iter().map(|s| s / counts[c] as f64).collect::<Vec<_>>());
    let mut sq = [vec![0.0; d], vec![0.0; d]];
    for (row, &y) in design.rows().zip(&design.y) {
        let c = y as usize;
        for ((s, v), m) in sq[c].iter_mut().zip(row).zip(&means[c]) {
            *s += (v - m) * (v - m);
        }
    }
    let variances = [0, 1].map(|c| {
        sq[c].iter().map(|s| (s / counts[c] as f64).max(VARIANCE_FLOOR)).collect::<Vec<_>>()
    });
    let n = design.n as f64;
    Ok(GaussianNb { means, variances, priors: [counts[0] as f64 / n, counts[1] as f64 / n] })
}
