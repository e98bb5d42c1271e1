//! Metrics, stratified cross-validation, grid search and significance tests.

use std::io::Write;

use log::{debug, warn};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::balance::{BalanceConfig, Balancer};
use crate::error::{Error, Result};
use crate::ingest::Normalizer;
use crate::models::{fit, Classifier, Family, HyperParams};
use crate::rng::{seeded_rng, RngSeed};
use crate::types::{ConfusionMatrix, EvalReport, Label, LabeledRecord};

/// Grid points whose mean AUC differs by less than this are tied.
pub const AUC_TIE_TOLERANCE: f64 = 1e-12;

pub fn confusion(truth: &[Label], predicted: &[Label]) -> Result<ConfusionMatrix> {
    if truth.len() != predicted.len() {
        return Err(Error::dim(truth.len(), predicted.len()));
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in truth.iter().zip(predicted) {
        cm.record(t, p);
    }
    Ok(cm)
}

/// Sensitivity, specificity and their mean. A rate whose class is absent is
/// reported as 0 and flags the report as degenerate.
pub fn eval_report(cm: &ConfusionMatrix) -> EvalReport {
    let rate = |hit: u64, miss: u64| {
        if hit + miss == 0 {
            None
        } else {
            Some(hit as f64 / (hit + miss) as f64)
        }
    };
    let sens = rate(cm.true_positives, cm.false_negatives);
    let spec = rate(cm.true_negatives, cm.false_positives);
    let degenerate = sens.is_none() || spec.is_none();
    if degenerate {
        debug!("degenerate evaluation: {cm:?}");
    }
    let (sensitivity, specificity) = (sens.unwrap_or(0.0), spec.unwrap_or(0.0));
    EvalReport { sensitivity, specificity, auc: balanced_auc(sensitivity, specificity), confusion: *cm, degenerate }
}

/// The mean of sensitivity and specificity.
pub fn balanced_auc(sensitivity: f64, specificity: f64) -> f64 {
    (sensitivity + specificity) / 2.0
}

pub fn evaluate<C: Classifier + ?Sized>(model: &C, test: &[LabeledRecord]) -> Result<EvalReport> {
    let mut cm = ConfusionMatrix::default();
    for r in test {
        if r.dim() != model.dim() {
            return Err(Error::dim(model.dim(), r.dim()));
        }
        cm.record(r.label, model.predict(r.values()));
    }
    Ok(eval_report(&cm))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    /// Held-out record indices per fold, ascending.
    pub folds: Vec<Vec<usize>>,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> &[usize] {
        &self.folds[fold]
    }

    /// Every index outside `fold`, ascending.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|&(f, _)| f != fold)
            .flat_map(|(_, v)| v.iter().copied())
            .collect();
        idx.sort_unstable();
        idx
    }
}

/// Shuffles each class with the seeded RNG and deals its records round-robin
/// over the folds. The dealing counter carries over from the negatives to the
/// positives so total fold sizes also differ by at most one.
pub fn stratified_kfold(records: &[LabeledRecord], k: usize, seed: RngSeed) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Config(format!("k-fold needs k >= 2, got {k}")));
    }
    let mut rng = seeded_rng(seed);
    let mut folds = vec![Vec::new(); k];
    let mut counter = 0usize;
    for label in [Label::Negative, Label::Positive] {
        let mut idx: Vec<usize> = (0..records.len()).filter(|&i| records[i].label == label).collect();
        if idx.len() < k {
            return Err(Error::Stratification(format!(
                "class {} has {} records, fewer than k = {k}",
                label.as_u8(),
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for i in idx {
            folds[counter % k].push(i);
            counter += 1;
        }
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(FoldPlan { k, folds })
}

/// Cross-validation settings shared by every candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct CvSpec {
    pub k: usize,
    pub seed: RngSeed,
    pub balancer: Balancer,
    pub balance: BalanceConfig,
}

impl CvSpec {
    pub fn new(k: usize, seed: RngSeed, balancer: Balancer) -> Self {
        CvSpec { k, seed, balancer, balance: BalanceConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub model: String,
    pub balancer: String,
    pub hyper_params: HyperParams,
    pub folds: Vec<EvalReport>,
    pub mean_auc: f64,
    pub mean_sensitivity: f64,
    pub mean_specificity: f64,
}

impl CvResult {
    pub fn from_folds(model: &str, balancer: &str, hyper_params: HyperParams, folds: Vec<EvalReport>) -> Self {
        let mean = |f: fn(&EvalReport) -> f64| folds.iter().map(f).sum::<f64>() / folds.len().max(1) as f64;
        CvResult {
            model: model.to_string(),
            balancer: balancer.to_string(),
            hyper_params,
            mean_auc: mean(|r| r.auc),
            mean_sensitivity: mean(|r| r.sensitivity),
            mean_specificity: mean(|r| r.specificity),
            folds,
        }
    }

    pub fn fold_aucs(&self) -> Vec<f64> {
        self.folds.iter().map(|r| r.auc).collect()
    }
}

/// Fits a classifier on (normalized, balanced) training records.
pub type FitFn<'a> = dyn Fn(&[LabeledRecord], RngSeed) -> Result<Box<dyn Classifier>> + 'a;

/// Runs every fitter on the same folds. Per fold the normalizer is fitted on
/// the training part only, the balancer touches only the training part, and
/// the held-out part is evaluated as is. Returns fold reports per fitter.
///
/// Balancer seeds are `seed.for_role(1, fold)`, model seeds
/// `seed.for_role(2, fold)`.
pub fn cross_validate_fitters(
    records: &[LabeledRecord],
    fitters: &[&FitFn<'_>],
    spec: &CvSpec,
) -> Result<Vec<Vec<EvalReport>>> {
    let plan = stratified_kfold(records, spec.k, spec.seed)?;
    let mut reports = vec![Vec::with_capacity(spec.k); fitters.len()];
    for fold in 0..spec.k {
        let wrap = |e: Error| Error::Fold { fold, source: Box::new(e) };
        let train: Vec<LabeledRecord> = plan.train_indices(fold).into_iter().map(|i| records[i].clone()).collect();
        let test: Vec<LabeledRecord> = plan.test_indices(fold).iter().map(|&i| records[i].clone()).collect();
        let norm = Normalizer::fit(&train).map_err(wrap)?;
        let train = norm.apply(&train).map_err(wrap)?;
        let test = norm.apply(&test).map_err(wrap)?;
        let cfg = spec.balance.clone().with_seed(spec.seed.for_role(1, fold as u64));
        let balanced = spec.balancer.apply(&train, &cfg).map_err(wrap)?;
        for (fitter, out) in fitters.iter().zip(reports.iter_mut()) {
            let model = fitter(&balanced, spec.seed.for_role(2, fold as u64)).map_err(wrap)?;
            out.push(evaluate(model.as_ref(), &test).map_err(wrap)?);
        }
    }
    Ok(reports)
}

fn family_fitter<'a>(family: Family, hp: &'a HyperParams) -> impl Fn(&[LabeledRecord], RngSeed) -> Result<Box<dyn Classifier>> + 'a {
    move |train, seed| Ok(Box::new(fit(family, train, hp, seed)?) as Box<dyn Classifier>)
}

pub fn cross_validate(records: &[LabeledRecord], family: Family, hp: &HyperParams, spec: &CvSpec) -> Result<CvResult> {
    let fitter = family_fitter(family, hp);
    let mut reports = cross_validate_fitters(records, &[&fitter], spec)?;
    Ok(CvResult::from_folds(family.name(), spec.balancer.name(), hp.clone(), reports.remove(0)))
}

/// Index of the winning candidate: highest mean AUC, ties going to the
/// simpler point (see [`HyperParams::simplicity_key`]) and then grid order.
pub fn select_best(candidates: &[CvResult]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, c) in candidates.iter().enumerate() {
        let better = match best {
            None => true,
            Some(b) => {
                let cur = &candidates[b];
                if c.mean_auc > cur.mean_auc + AUC_TIE_TOLERANCE {
                    true
                } else if c.mean_auc >= cur.mean_auc - AUC_TIE_TOLERANCE {
                    c.hyper_params.simplicity_key() < cur.hyper_params.simplicity_key()
                } else {
                    false
                }
            }
        };
        if better {
            best = Some(i);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub best: CvResult,
    pub candidates: Vec<CvResult>,
}

/// Cross-validates every grid point on shared folds and balanced data.
pub fn grid_search_detailed(
    records: &[LabeledRecord],
    family: Family,
    grid: &[HyperParams],
    spec: &CvSpec,
) -> Result<GridSearchResult> {
    if grid.is_empty() {
        return Err(Error::Config("grid search needs at least one grid point".into()));
    }
    let fitters: Vec<_> = grid.iter().map(|hp| family_fitter(family, hp)).collect();
    let refs: Vec<&FitFn<'_>> = fitters.iter().map(|f| f as &FitFn<'_>).collect();
    let reports = cross_validate_fitters(records, &refs, spec)?;
    let candidates: Vec<CvResult> = grid
        .iter()
        .zip(reports)
        .map(|(hp, folds)| CvResult::from_folds(family.name(), spec.balancer.name(), hp.clone(), folds))
        .collect();
    let best = candidates[select_best(&candidates).expect("grid is nonempty")].clone();
    debug!("{} / {}: best {} auc {:.4}", family, spec.balancer.name(), best.hyper_params, best.mean_auc);
    Ok(GridSearchResult { best, candidates })
}

pub fn grid_search(records: &[LabeledRecord], family: Family, grid: &[HyperParams], spec: &CvSpec) -> Result<CvResult> {
    Ok(grid_search_detailed(records, family, grid, spec)?.best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Degrees of freedom, for t-tests.
    pub df: Option<u64>,
    pub degenerate: bool,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sum_sq_dev(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum()
}

fn t_result(t: f64, df: u64) -> Result<TestResult> {
    let dist = StudentsT::new(0.0, 1.0, df as f64).map_err(|e| Error::DegenerateTest(e.to_string()))?;
    let p = (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0);
    Ok(TestResult { statistic: t, p_value: p, df: Some(df), degenerate: false })
}

fn zero_variance(mean_diff: f64) -> Result<TestResult> {
    if mean_diff == 0.0 {
        Ok(TestResult { statistic: 0.0, p_value: 1.0, df: None, degenerate: true })
    } else {
        Err(Error::DegenerateTest(format!(
            "zero variance with mean difference {mean_diff}; t is infinite"
        )))
    }
}

/// Pooled-variance two-sample t-test, two-tailed, `df = |a| + |b| - 2`.
pub fn two_sample_t_test(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::DegenerateTest("t-test needs at least two values per sample".into()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let df = (a.len() + b.len() - 2) as u64;
    let pooled = (sum_sq_dev(a) + sum_sq_dev(b)) / df as f64;
    let diff = mean(a) - mean(b);
    if pooled == 0.0 {
        return zero_variance(diff).map(|r| TestResult { df: Some(df), ..r });
    }
    t_result(diff / (pooled * (1.0 / na + 1.0 / nb)).sqrt(), df)
}

/// Paired t-test on `a[i] - b[i]`, two-tailed, `df = n - 1`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() != b.len() {
        return Err(Error::dim(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(Error::DegenerateTest("paired t-test needs at least two pairs".into()));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let df = (d.len() - 1) as u64;
    let var = sum_sq_dev(&d) / df as f64;
    if var == 0.0 {
        return zero_variance(mean(&d)).map(|r| TestResult { df: Some(df), ..r });
    }
    t_result(mean(&d) / (var / n).sqrt(), df)
}

/// Pairs beyond this size, or with tied magnitudes, use the normal approximation.
pub const WILCOXON_EXACT_MAX_N: usize = 50;

/// Average ranks (1-based) of `v`, plus the sizes of tie groups.
pub(crate) fn average_ranks(v: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && v[idx[j]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j + 1) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = r;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (ranks, ties)
}

/// `P(T <= w)` for the signed-rank statistic of `n` untied pairs under the null.
fn signed_rank_cdf(n: usize, w: f64) -> f64 {
    let max = n * (n + 1) / 2;
    let mut dist = vec![0.0; max + 1];
    dist[0] = 1.0;
    for r in 1..=n {
        for s in (r..=max).rev() {
            dist[s] = 0.5 * (dist[s] + dist[s - r]);
        }
        for s in dist.iter_mut().take(r) {
            *s *= 0.5;
        }
    }
    let limit = w.floor().max(-1.0);
    dist.iter().enumerate().filter(|&(s, _)| s as f64 <= limit).map(|(_, p)| p).sum::<f64>().min(1.0)
}

/// Wilcoxon signed-rank test on paired samples, two-tailed, `W = min(W+, W-)`.
///
/// Zero differences are dropped and tied magnitudes share their average rank.
/// With at most 50 nonzero pairs and no ties the p-value comes from the exact
/// null distribution; otherwise from the normal approximation with
/// tie-corrected variance and continuity correction 0.5.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() != b.len() {
        return Err(Error::dim(a.len(), b.len()));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|&v| v != 0.0).collect();
    if d.is_empty() {
        return Ok(TestResult { statistic: 0.0, p_value: 1.0, df: None, degenerate: true });
    }
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let (ranks, ties) = average_ranks(&abs);
    let w_plus: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let w_minus: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v < 0.0).map(|(_, r)| r).sum();
    let w = w_plus.min(w_minus);
    let n = d.len();

    let p = if n <= WILCOXON_EXACT_MAX_N && ties.is_empty() {
        2.0 * signed_rank_cdf(n, w)
    } else {
        let nf = n as f64;
        let mu = nf * (nf + 1.0) / 4.0;
        let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
        if var <= 0.0 {
            warn!("wilcoxon variance vanished; reporting p = 1");
            1.0
        } else {
            let z = (w - mu + 0.5).min(0.0) / var.sqrt();
            2.0 * Normal::standard().cdf(z)
        }
    };
    Ok(TestResult { statistic: w, p_value: p.clamp(0.0, 1.0), df: None, degenerate: false })
}

/// Writes one JSON object per line.
pub fn write_jsonl<T: Serialize, W: Write>(mut out: W, items: &[T]) -> Result<()> {
    for item in items {
        let line = serde_json::to_string(item).map_err(|e| Error::Serialization(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| Error::Serialization(e.to_string()))?;
    }
    Ok(())
}
