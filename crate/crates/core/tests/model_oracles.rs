mod common;

use common::{brute_knn, rows, uniform_records};
use fraudstream::models::{fit_decision_tree, fit_knn, Classifier, Criterion, HyperParams};
use fraudstream::LabeledRecord;

/// Exhaustive best root split: lowest weighted child impurity over every
/// feature and every midpoint between consecutive distinct values.
fn brute_root_split(data: &[LabeledRecord], crit: Criterion) -> (usize, f64) {
    let n = data.len() as f64;
    let mut best: Option<(f64, usize, f64)> = None;
    for f in 0..data[0].dim() {
        let mut vals: Vec<f64> = data.iter().map(|r| r.values()[f]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let side = |left: bool| {
                let part: Vec<&LabeledRecord> = data.iter().filter(|r| (r.values()[f] <= t) == left).collect();
                let pos = part.iter().filter(|r| r.label.is_positive()).count() as f64;
                (part.len() as f64, pos)
            };
            let ((lw, lp), (rw, rp)) = (side(true), side(false));
            let cost = lw / n * crit.impurity(lw, lp, lp) + rw / n * crit.impurity(rw, rp, rp);
            if best.is_none_or(|(c, _, _)| cost < c - 1e-12) {
                best = Some((cost, f, t));
            }
        }
    }
    let (_, f, t) = best.unwrap();
    (f, t)
}

#[test]
fn tree_root_split_matches_exhaustive_search() {
    for seed in 0..8 {
        let data = uniform_records(60, 3, 0.35, 300 + seed);
        for (name, crit) in [("gini", Criterion::Gini), ("entropy", Criterion::Entropy)] {
            let hp = HyperParams::new().text("criterion", name).int("max_depth", 1);
            let dt = fit_decision_tree(&data, &hp).unwrap();
            let (f, t) = dt.tree.root_split().unwrap();
            let (bf, bt) = brute_root_split(&data, crit);
            assert_eq!(f, bf, "seed {seed} {name}");
            assert!((t - bt).abs() < 1e-12, "seed {seed} {name}: {t} vs {bt}");
        }
    }
}

#[test]
fn knn_scores_match_brute_force_vote() {
    let train = uniform_records(200, 4, 0.3, 41);
    let queries = uniform_records(100, 4, 0.3, 42);
    let pts = rows(&train);
    for k in [1, 3, 7, 15] {
        let model = fit_knn(&train, k).unwrap();
        for q in &queries {
            let nn = brute_knn(&pts, q.values(), k, None);
            let expected = nn.iter().filter(|&&i| train[i].label.is_positive()).count() as f64 / k as f64;
            assert_eq!(model.score(q.values()), expected);
        }
    }
}
