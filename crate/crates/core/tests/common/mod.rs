#![allow(dead_code)]

use fraudstream::{seeded_rng, Label, LabeledRecord, RngSeed};
use rand::Rng;

/// Uniform points in the unit cube; each record is positive with
/// probability `pos_frac`.
pub fn uniform_records(n: usize, d: usize, pos_frac: f64, seed: u64) -> Vec<LabeledRecord> {
    let mut rng = seeded_rng(RngSeed(seed));
    (0..n)
        .map(|_| {
            let v: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let label = if rng.random::<f64>() < pos_frac { Label::Positive } else { Label::Negative };
            LabeledRecord::from_values(v, label).unwrap()
        })
        .collect()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Brute-force `k` nearest rows of `pool` to `q`, skipping `skip`; ties go
/// to the lower index.
pub fn brute_knn(pool: &[&[f64]], q: &[f64], k: usize, skip: Option<usize>) -> Vec<usize> {
    let mut order: Vec<(f64, usize)> = pool
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip)
        .map(|(i, p)| (dist2(p, q), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    order.into_iter().take(k).map(|(_, i)| i).collect()
}

pub fn rows(records: &[LabeledRecord]) -> Vec<&[f64]> {
    records.iter().map(|r| r.values()).collect()
}
