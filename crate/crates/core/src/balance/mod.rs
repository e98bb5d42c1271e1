//! Class rebalancing of training data.
//!
//! Interpolating oversamplers (SMOTE, ADASYN), the cleaning filters applied
//! after SMOTE (Tomek links, edited nearest neighbours), and the [`Balancer`]
//! switch that also covers the GAN oversamplers. Nothing here is applied to
//! held-out data; callers pass training records only.

mod neighbors;

use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use neighbors::{Neighbor, NeighborIndex};

use crate::error::{Error, Result};
use crate::gan::{generate_samples, train_gan, GanConfig, GanVariant};
use crate::rng::{seeded_rng, RngSeed, SeededRng};
use crate::types::{FeatureVector, Label, LabeledRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceConfig {
    /// Neighbourhood size for SMOTE and ADASYN.
    pub k_neighbors: usize,
    /// Desired minority/majority ratio after oversampling.
    pub target_ratio: f64,
    /// Neighbourhood size of the ENN cleaning stage.
    pub enn_k: usize,
    pub seed: RngSeed,
}

impl Default for BalanceConfig {
    fn default() -> Self {
        BalanceConfig {
            k_neighbors: 5,
            target_ratio: 1.0,
            enn_k: 3,
            seed: RngSeed(0),
        }
    }
}

impl BalanceConfig {
    pub fn with_seed(mut self, seed: RngSeed) -> Self {
        self.seed = seed;
        self
    }
}

/// Indices of the minority and majority classes. On equal counts the
/// positive class is treated as the minority.
pub(crate) struct ClassSplit {
    pub minority_label: Label,
    pub minority: Vec<usize>,
    pub majority: Vec<usize>,
}

pub(crate) fn class_split(records: &[LabeledRecord]) -> Result<ClassSplit> {
    let pos: Vec<usize> = (0..records.len()).filter(|&i| records[i].label.is_positive()).collect();
    let neg: Vec<usize> = (0..records.len()).filter(|&i| !records[i].label.is_positive()).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::SingleClass);
    }
    Ok(if pos.len() <= neg.len() {
        ClassSplit {
            minority_label: Label::Positive,
            minority: pos,
            majority: neg,
        }
    } else {
        ClassSplit {
            minority_label: Label::Negative,
            minority: neg,
            majority: pos,
        }
    })
}

/// Synthetic records needed so that `minority == round(ratio * majority)`.
fn synthetic_needed(split: &ClassSplit, cfg: &BalanceConfig) -> Result<usize> {
    if !(cfg.target_ratio > 0.0) || !cfg.target_ratio.is_finite() {
        return Err(Error::Config(format!("target_ratio must be positive, got {}", cfg.target_ratio)));
    }
    let target = (cfg.target_ratio * split.majority.len() as f64).round() as usize;
    Ok(target.saturating_sub(split.minority.len()))
}

fn check_k(split: &ClassSplit, k: usize) -> Result<()> {
    if k == 0 || split.minority.len() <= k {
        return Err(Error::Config(format!(
            "k_neighbors ({k}) must be positive and smaller than the minority class ({})",
            split.minority.len()
        )));
    }
    Ok(())
}

/// `x + u * (neighbor - x)`.
fn interpolate(x: &[f64], neighbor: &[f64], u: f64) -> Vec<f64> {
    x.iter().zip(neighbor).map(|(&a, &b)| a + u * (b - a)).collect()
}

/// Minority-only neighbour lists, computed on first use.
struct MinorityNeighbors<'a> {
    records: &'a [LabeledRecord],
    minority: &'a [usize],
    index: NeighborIndex,
    k: usize,
    cache: Vec<Option<Vec<usize>>>,
}

impl<'a> MinorityNeighbors<'a> {
    fn new(records: &'a [LabeledRecord], minority: &'a [usize], k: usize) -> Self {
        let index = NeighborIndex::new(minority.iter().map(|&i| records[i].values()));
        MinorityNeighbors {
            records,
            minority,
            index,
            k,
            cache: vec![None; minority.len()],
        }
    }

    /// Interpolates between minority sample `m` and a random one of its
    /// neighbours. Draws: neighbour slot, then `u`.
    fn synthesize(&mut self, m: usize, rng: &mut SeededRng) -> Vec<f64> {
        let k = self.k;
        let index = &self.index;
        let nn = self.cache[m].get_or_insert_with(|| index.neighbor_indices(m, k));
        let slot = rng.random_range(0..nn.len());
        let u: f64 = rng.random();
        let x = self.records[self.minority[m]].values();
        let y = self.records[self.minority[nn[slot]]].values();
        interpolate(x, y, u)
    }
}

fn with_synthetic(train: &[LabeledRecord], label: Label, synthetic: Vec<Vec<f64>>) -> Vec<LabeledRecord> {
    let mut out = Vec::with_capacity(train.len() + synthetic.len());
    out.extend_from_slice(train);
    out.extend(
        synthetic
            .into_iter()
            .map(|v| LabeledRecord::new(FeatureVector::from_vec_unchecked(v), label)),
    );
    out
}

/// SMOTE: appends interpolated minority records until the minority class
/// reaches `round(target_ratio * majority)`.
///
/// Each synthetic record draws, in order, a minority sample (uniform), one of
/// its `k` nearest minority neighbours (uniform) and `u ~ U[0, 1)`.
pub fn smote(train: &[LabeledRecord], cfg: &BalanceConfig) -> Result<Vec<LabeledRecord>> {
    let split = class_split(train)?;
    check_k(&split, cfg.k_neighbors)?;
    let needed = synthetic_needed(&split, cfg)?;
    let mut rng = seeded_rng(cfg.seed);
    let mut nn = MinorityNeighbors::new(train, &split.minority, cfg.k_neighbors);
    let m = split.minority.len();
    let synthetic = (0..needed)
        .map(|_| {
            let base = rng.random_range(0..m);
            nn.synthesize(base, &mut rng)
        })
        .collect();
    Ok(with_synthetic(train, split.minority_label, synthetic))
}

/// Cross-class pairs `(i, j)`, `i < j`, that are each other's nearest
/// neighbour over the whole set.
pub fn tomek_links(records: &[LabeledRecord]) -> Vec<(usize, usize)> {
    if records.len() < 2 {
        return Vec::new();
    }
    let index = NeighborIndex::from_records(records);
    let nearest: Vec<usize> = index.all_members(1).into_iter().map(|n| n[0].index).collect();
    (0..records.len())
        .filter_map(|i| {
            let j = nearest[i];
            (i < j && nearest[j] == i && records[i].label != records[j].label).then_some((i, j))
        })
        .collect()
}

fn without(records: Vec<LabeledRecord>, remove: &[bool]) -> Vec<LabeledRecord> {
    records
        .into_iter()
        .zip(remove)
        .filter_map(|(r, &drop)| (!drop).then_some(r))
        .collect()
}

/// SMOTE followed by removal of both members of every Tomek link.
pub fn smote_tomek(train: &[LabeledRecord], cfg: &BalanceConfig) -> Result<Vec<LabeledRecord>> {
    let over = smote(train, cfg)?;
    let mut remove = vec![false; over.len()];
    for (i, j) in tomek_links(&over) {
        remove[i] = true;
        remove[j] = true;
    }
    Ok(without(over, &remove))
}

/// Indices whose label disagrees with the strict majority of their `k`
/// nearest neighbours. A tied vote keeps the record.
pub fn enn_removals(records: &[LabeledRecord], k: usize) -> Result<Vec<usize>> {
    if k == 0 || k >= records.len() {
        return Err(Error::Config(format!(
            "ENN k ({k}) must be positive and smaller than the dataset ({})",
            records.len()
        )));
    }
    let neighbors = NeighborIndex::from_records(records).all_members(k);
    Ok((0..records.len())
        .filter(|&i| {
            let pos = neighbors[i]
                .iter()
                .filter(|n| records[n.index].label.is_positive())
                .count();
            let neg = k - pos;
            match records[i].label {
                Label::Positive => neg > pos,
                Label::Negative => pos > neg,
            }
        })
        .collect())
}

/// Edited nearest neighbours: one pass over the original set.
pub fn enn_filter(records: &[LabeledRecord], k: usize) -> Result<Vec<LabeledRecord>> {
    let mut remove = vec![false; records.len()];
    for i in enn_removals(records, k)? {
        remove[i] = true;
    }
    Ok(without(records.to_vec(), &remove))
}

/// SMOTE followed by ENN cleaning of the combined set.
pub fn smote_enn(train: &[LabeledRecord], cfg: &BalanceConfig) -> Result<Vec<LabeledRecord>> {
    let over = smote(train, cfg)?;
    enn_filter(&over, cfg.enn_k)
}

/// Number of synthetic records ADASYN assigns to each minority sample, in
/// minority order.
///
/// `r_i` is the share of majority records among the `k` nearest neighbours of
/// minority sample `i` (all classes); `w_i = r_i / sum(r)`. The total
/// `G = round(target_ratio * majority) - minority` is apportioned by largest
/// remainder, so every `g_i` is `floor(w_i G)` or `ceil(w_i G)` and the
/// counts sum to exactly `G`. If no minority sample has a majority
/// neighbour the weights fall back to uniform.
pub fn adasyn_allocation(train: &[LabeledRecord], cfg: &BalanceConfig) -> Result<Vec<usize>> {
    let split = class_split(train)?;
    check_k(&split, cfg.k_neighbors)?;
    let total = synthetic_needed(&split, cfg)?;
    let index = NeighborIndex::from_records(train);
    let k = cfg.k_neighbors;
    let ratios: Vec<f64> = split
        .minority
        .iter()
        .map(|&i| {
            let maj = index
                .query_member(i, k)
                .iter()
                .filter(|n| train[n.index].label != split.minority_label)
                .count();
            maj as f64 / k as f64
        })
        .collect();
    let sum: f64 = ratios.iter().sum();
    let weights: Vec<f64> = if sum > 0.0 {
        ratios.iter().map(|r| r / sum).collect()
    } else {
        warn!("ADASYN: no minority sample has majority neighbours; using uniform weights");
        vec![1.0 / ratios.len() as f64; ratios.len()]
    };
    Ok(apportion(&weights, total))
}

/// Largest-remainder apportionment of `total` by `weights` (summing to 1).
/// Remainder ties go to the lower index.
pub(crate) fn apportion(weights: &[f64], total: usize) -> Vec<usize> {
    let quotas: Vec<f64> = weights.iter().map(|w| w * total as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// ADASYN: like SMOTE, but the synthetic budget is spread over minority
/// samples in proportion to how many majority records surround them.
/// Samples are processed in minority order; each synthetic record draws a
/// neighbour slot and `u`.
pub fn adasyn(train: &[LabeledRecord], cfg: &BalanceConfig) -> Result<Vec<LabeledRecord>> {
    let allocation = adasyn_allocation(train, cfg)?;
    let split = class_split(train)?;
    let mut rng = seeded_rng(cfg.seed);
    let mut nn = MinorityNeighbors::new(train, &split.minority, cfg.k_neighbors);
    let mut synthetic = Vec::with_capacity(allocation.iter().sum());
    for (m, &g) in allocation.iter().enumerate() {
        for _ in 0..g {
            synthetic.push(nn.synthesize(m, &mut rng));
        }
    }
    Ok(with_synthetic(train, split.minority_label, synthetic))
}

/// GAN oversampling: trains a generator on the minority class and appends
/// generated records up to the target ratio.
pub fn gan_oversample(train: &[LabeledRecord], cfg: &BalanceConfig, gan: &GanConfig) -> Result<Vec<LabeledRecord>> {
    let split = class_split(train)?;
    let needed = synthetic_needed(&split, cfg)?;
    if needed == 0 {
        return Ok(train.to_vec());
    }
    let minority: Vec<FeatureVector> = split.minority.iter().map(|&i| train[i].features.clone()).collect();
    let gan_cfg = GanConfig {
        seed: cfg.seed,
        ..gan.clone()
    };
    let generator = train_gan(&minority, &gan_cfg)?;
    let samples = generate_samples(&generator, needed, cfg.seed.for_role(1, 0));
    Ok(with_synthetic(
        train,
        split.minority_label,
        samples.into_iter().map(FeatureVector::into_values).collect(),
    ))
}

pub const BALANCER_NAMES: [&str; 7] = ["none", "smote", "smote-tomek", "smote-enn", "adasyn", "vgan", "wgan"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Balancer {
    None,
    Smote,
    SmoteTomek,
    SmoteEnn,
    Adasyn,
    VGan(GanConfig),
    WGan(GanConfig),
}

impl Balancer {
    /// Resolves a CLI name. GAN variants take their settings from `gan`,
    /// with the variant forced to match the name.
    pub fn from_name(name: &str, gan: &GanConfig) -> Result<Balancer> {
        Ok(match name {
            "none" => Balancer::None,
            "smote" => Balancer::Smote,
            "smote-tomek" => Balancer::SmoteTomek,
            "smote-enn" => Balancer::SmoteEnn,
            "adasyn" => Balancer::Adasyn,
            "vgan" => Balancer::VGan(GanConfig {
                variant: GanVariant::Vanilla,
                ..gan.clone()
            }),
            "wgan" => Balancer::WGan(GanConfig {
                variant: GanVariant::Wasserstein,
                ..gan.clone()
            }),
            other => {
                return Err(Error::Config(format!(
                    "unknown balancer '{other}'; valid names: {}",
                    BALANCER_NAMES.join(", ")
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Balancer::None => "none",
            Balancer::Smote => "smote",
            Balancer::SmoteTomek => "smote-tomek",
            Balancer::SmoteEnn => "smote-enn",
            Balancer::Adasyn => "adasyn",
            Balancer::VGan(_) => "vgan",
            Balancer::WGan(_) => "wgan",
        }
    }

    pub fn apply(&self, train: &[LabeledRecord], cfg: &BalanceConfig) -> Result<Vec<LabeledRecord>> {
        match self {
            Balancer::None => Ok(train.to_vec()),
            Balancer::Smote => smote(train, cfg),
            Balancer::SmoteTomek => smote_tomek(train, cfg),
            Balancer::SmoteEnn => smote_enn(train, cfg),
            Balancer::Adasyn => adasyn(train, cfg),
            Balancer::VGan(g) | Balancer::WGan(g) => gan_oversample(train, cfg, g),
        }
    }
}
