//! Binary CART trees grown on presorted columns.
//!
//! Each feature's sample order is sorted once; nodes own a contiguous slice of
//! every per-feature order array and children are produced by a stable
//! partition, so no node ever re-sorts. Sample weights carry bootstrap
//! multiplicities, letting a forest reuse one presort for all its trees.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::hyper::{CRITERION, MAX_DEPTH};
use super::{Classifier, Design, HyperParams};
use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::types::LabeledRecord;

/// Impurity decreases closer than this count as ties.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Gini,
    Entropy,
    /// Squared error, for regression trees.
    Variance,
}

impl Criterion {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "gini" => Ok(Criterion::Gini),
            "entropy" => Ok(Criterion::Entropy),
            "variance" => Ok(Criterion::Variance),
            other => Err(Error::Config(format!("unknown criterion '{other}'; valid: gini, entropy"))),
        }
    }

    /// Impurity of a node with total weight `w`, weighted target sum `s1` and
    /// weighted squared target sum `s2`.
    #[inline]
    pub fn impurity(self, w: f64, s1: f64, s2: f64) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        match self {
            Criterion::Gini => {
                let p = (s1 / w).clamp(0.0, 1.0);
                2.0 * p * (1.0 - p)
            }
            Criterion::Entropy => {
                let p = (s1 / w).clamp(0.0, 1.0);
                let h = |q: f64| if q > 0.0 { -q * q.log2() } else { 0.0 };
                h(p) + h(1.0 - p)
            }
            Criterion::Variance => {
                let m = s1 / w;
                (s2 / w - m * m).max(0.0)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf { value: f64 },
    Split { feature: usize, threshold: f64, left: u32, right: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
    dim: usize,
}

impl Tree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Value of the leaf reached by `x`; goes left when `x[f] <= threshold`.
    #[inline]
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut id = 0usize;
        loop {
            match self.nodes[id] {
                Node::Leaf { value } => return value,
                Node::Split { feature, threshold, left, right } => {
                    id = if x[feature] <= threshold { left as usize } else { right as usize };
                }
            }
        }
    }

    /// Index of the leaf node reached by `x`.
    pub(crate) fn leaf_id(&self, x: &[f64]) -> usize {
        let mut id = 0usize;
        while let Node::Split { feature, threshold, left, right } = self.nodes[id] {
            id = if x[feature] <= threshold { left as usize } else { right as usize };
        }
        id
    }

    pub(crate) fn set_leaf_values(&mut self, value: impl Fn(usize) -> f64) {
        for (id, node) in self.nodes.iter_mut().enumerate() {
            if let Node::Leaf { value: v } = node {
                *v = value(id);
            }
        }
    }

    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes[0] {
            Node::Split { feature, threshold, .. } => Some((feature, threshold)),
            Node::Leaf { .. } => None,
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left as usize).max(walk(nodes, right as usize)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Column copies of a design matrix plus each column's ascending sample order.
pub(crate) struct Presorted {
    cols: Vec<Vec<f64>>,
    order: Vec<Vec<u32>>,
}

impl Presorted {
    pub fn new(design: &Design) -> Self {
        let cols: Vec<Vec<f64>> = (0..design.d)
            .map(|f| design.rows().map(|r| r[f]).collect())
            .collect();
        let order = cols
            .iter()
            .map(|col| {
                let mut idx: Vec<u32> = (0..design.n as u32).collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect();
        Presorted { cols, order }
    }

    pub fn n_features(&self) -> usize {
        self.cols.len()
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TreeParams {
    pub criterion: Criterion,
    pub max_depth: usize,
    /// Features examined per split; `None` means all.
    pub max_features: Option<usize>,
}

struct SplitChoice {
    feature: usize,
    n_left: usize,
    threshold: f64,
    decrease: f64,
}

struct Builder<'a> {
    pre: &'a Presorted,
    y: &'a [f64],
    w: &'a [f64],
    params: TreeParams,
    rng: Option<&'a mut SeededRng>,
    orders: Vec<Vec<u32>>,
    goes_left: Vec<bool>,
    scratch: Vec<u32>,
    nodes: Vec<Node>,
}

/// Grows a tree on the samples with positive weight.
pub(crate) fn grow(
    pre: &Presorted,
    y: &[f64],
    w: &[f64],
    params: TreeParams,
    rng: Option<&mut SeededRng>,
) -> Tree {
    let orders: Vec<Vec<u32>> = pre
        .order
        .iter()
        .map(|o| o.iter().copied().filter(|&i| w[i as usize] > 0.0).collect())
        .collect();
    let n_active = orders.first().map_or(0, Vec::len);
    let mut b = Builder {
        pre,
        y,
        w,
        params,
        rng,
        orders,
        goes_left: vec![false; y.len()],
        scratch: Vec::with_capacity(n_active),
        nodes: Vec::new(),
    };
    b.build(0, n_active, 0);
    Tree { nodes: b.nodes, dim: pre.n_features() }
}

impl Builder<'_> {
    fn build(&mut self, lo: usize, hi: usize, depth: usize) -> u32 {
        let (mut tw, mut t1, mut t2) = (0.0, 0.0, 0.0);
        for &i in &self.orders[0][lo..hi] {
            let (w, y) = (self.w[i as usize], self.y[i as usize]);
            tw += w;
            t1 += w * y;
            t2 += w * y * y;
        }
        let value = if tw > 0.0 { t1 / tw } else { 0.0 };
        let id = self.nodes.len() as u32;
        self.nodes.push(Node::Leaf { value });

        let impurity = self.params.criterion.impurity(tw, t1, t2);
        let pure = match self.params.criterion {
            Criterion::Variance => impurity <= 1e-13,
            _ => t1 <= 0.0 || t1 >= tw,
        };
        if depth >= self.params.max_depth || hi - lo < 2 || pure {
            return id;
        }
        let Some(split) = self.find_split(lo, hi, (tw, t1, t2), impurity) else {
            return id;
        };

        let mid = lo + split.n_left;
        for (k, &i) in self.orders[split.feature][lo..hi].iter().enumerate() {
            self.goes_left[i as usize] = k < split.n_left;
        }
        for g in 0..self.orders.len() {
            if g == split.feature {
                continue;
            }
            let seg = &mut self.orders[g][lo..hi];
            self.scratch.clear();
            let mut write = 0;
            for k in 0..seg.len() {
                let i = seg[k];
                if self.goes_left[i as usize] {
                    seg[write] = i;
                    write += 1;
                } else {
                    self.scratch.push(i);
                }
            }
            seg[write..].copy_from_slice(&self.scratch);
        }

        let left = self.build(lo, mid, depth + 1);
        let right = self.build(mid, hi, depth + 1);
        self.nodes[id as usize] = Node::Split { feature: split.feature, threshold: split.threshold, left, right };
        id
    }

    fn find_split(&mut self, lo: usize, hi: usize, totals: (f64, f64, f64), parent: f64) -> Option<SplitChoice> {
        let d = self.orders.len();
        let (first, rest) = match (self.params.max_features, self.rng.as_deref_mut()) {
            (Some(m), Some(rng)) if m < d => {
                let mut all: Vec<usize> = (0..d).collect();
                for j in 0..m {
                    let r = rng.random_range(j..d);
                    all.swap(j, r);
                }
                let mut rest = all.split_off(m);
                all.sort_unstable();
                rest.sort_unstable();
                (all, rest)
            }
            _ => ((0..d).collect(), Vec::new()),
        };
        // When none of the sampled features can split, fall back to the others.
        self.best_over(&first, lo, hi, totals, parent)
            .or_else(|| self.best_over(&rest, lo, hi, totals, parent))
    }

    fn best_over(
        &self,
        features: &[usize],
        lo: usize,
        hi: usize,
        (tw, t1, t2): (f64, f64, f64),
        parent: f64,
    ) -> Option<SplitChoice> {
        let crit = self.params.criterion;
        let mut best: Option<SplitChoice> = None;
        for &f in features {
            let ord = &self.orders[f][lo..hi];
            let col = &self.pre.cols[f];
            let (mut lw, mut l1, mut l2) = (0.0, 0.0, 0.0);
            for k in 0..ord.len() - 1 {
                let i = ord[k] as usize;
                let (w, y) = (self.w[i], self.y[i]);
                lw += w;
                l1 += w * y;
                l2 += w * y * y;
                let v = col[i];
                let vn = col[ord[k + 1] as usize];
                if vn <= v {
                    continue;
                }
                let rw = tw - lw;
                let decrease =
                    parent - (lw / tw) * crit.impurity(lw, l1, l2) - (rw / tw) * crit.impurity(rw, t1 - l1, t2 - l2);
                if best.as_ref().is_none_or(|b| decrease > b.decrease + TIE_TOLERANCE) {
                    let mut threshold = 0.5 * (v + vn);
                    if threshold >= vn {
                        threshold = v;
                    }
                    best = Some(SplitChoice { feature: f, n_left: k + 1, threshold, decrease });
                }
            }
        }
        best
    }
}

/// Classification tree; its score is the positive fraction of the leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub tree: Tree,
    pub criterion: Criterion,
}

impl Classifier for DecisionTree {
    fn dim(&self) -> usize {
        self.tree.dim
    }

    fn score(&self, x: &[f64]) -> f64 {
        self.tree.predict(x)
    }
}

pub(crate) fn classification_params(hp: &HyperParams, default_depth: usize) -> Result<TreeParams> {
    let criterion = Criterion::from_name(hp.get_str(CRITERION, "gini")?)?;
    if criterion == Criterion::Variance {
        return Err(Error::Config("classification trees take gini or entropy".into()));
    }
    Ok(TreeParams { criterion, max_depth: hp.get_usize(MAX_DEPTH, default_depth)?, max_features: None })
}

/// Fits a CART tree. `max_depth` defaults to 10 and `criterion` to gini.
pub fn fit_decision_tree(train: &[LabeledRecord], hp: &HyperParams) -> Result<DecisionTree> {
    let design = Design::two_class(train)?;
    let params = classification_params(hp, 10)?;
    let pre = Presorted::new(&design);
    let w = vec![1.0; design.n];
    Ok(DecisionTree { tree: grow(&pre, &design.y, &w, params, None), criterion: params.criterion })
}

#[cfg(test)]
mod tests {
    use super::super::testdata::*;
    use super::*;

    #[test]
    fn xor_needs_depth_two() {
        let data = xor();
        let hp = HyperParams::new().int(MAX_DEPTH, 2);
        let m = fit_decision_tree(&data, &hp).unwrap();
        assert_eq!(accuracy(&m, &data), 1.0);
        assert_eq!(m.tree.depth(), 2);
    }

    #[test]
    fn depth_zero_is_a_prior() {
        let data: Vec<_> = (0..10).map(|i| rec(&[i as f64], i < 3)).collect();
        let m = fit_decision_tree(&data, &HyperParams::new().int(MAX_DEPTH, 0)).unwrap();
        assert_eq!(m.tree.n_leaves(), 1);
        assert!((m.score(&[0.0]) - 0.3).abs() < 1e-12);
        assert_eq!(m.predict(&[0.0]), crate::types::Label::Negative);
    }

    #[test]
    fn perfect_split_found() {
        let data: Vec<_> = (0..10).map(|i| rec(&[(i % 3) as f64, i as f64], i >= 6)).collect();
        let m = fit_decision_tree(&data, &HyperParams::new()).unwrap();
        assert_eq!(m.tree.root_split(), Some((1, 5.5)));
        assert_eq!(m.tree.n_leaves(), 2);
    }

    #[test]
    fn entropy_and_gini_agree_on_clean_split() {
        let data = blobs(100, 2, 3.0, 0.5, 4);
        let g = fit_decision_tree(&data, &HyperParams::new().text(CRITERION, "gini")).unwrap();
        let e = fit_decision_tree(&data, &HyperParams::new().text(CRITERION, "entropy")).unwrap();
        assert_eq!(accuracy(&g, &data), 1.0);
        assert_eq!(accuracy(&e, &data), 1.0);
        assert!(fit_decision_tree(&data, &HyperParams::new().text(CRITERION, "mse")).is_err());
    }

    #[test]
    fn impurities() {
        assert_eq!(Criterion::Gini.impurity(4.0, 2.0, 2.0), 0.5);
        assert_eq!(Criterion::Entropy.impurity(4.0, 2.0, 2.0), 1.0);
        assert_eq!(Criterion::Entropy.impurity(4.0, 0.0, 0.0), 0.0);
        assert!((Criterion::Variance.impurity(2.0, 2.0, 10.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn zero_weight_samples_ignored() {
        let data: Vec<_> = (0..6).map(|i| rec(&[i as f64], i % 2 == 0)).collect();
        let design = Design::new(&data).unwrap();
        let pre = Presorted::new(&design);
        let w = [1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        let params = TreeParams { criterion: Criterion::Gini, max_depth: 5, max_features: None };
        let t = grow(&pre, &design.y, &w, params, None);
        assert_eq!(t.n_leaves(), 1);
        assert_eq!(t.predict(&[1.0]), 1.0);
    }
}
