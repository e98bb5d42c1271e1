use fraudstream::eval::{paired_t_test, two_sample_t_test, wilcoxon_signed_rank};
use fraudstream::{seeded_rng, RngSeed};
use rand::Rng;

/// Exact two-sided signed-rank p-value by enumerating all sign patterns.
fn enumerate_p(d: &[f64]) -> (f64, f64) {
    let mut idx: Vec<usize> = (0..d.len()).collect();
    idx.sort_by(|&a, &b| d[a].abs().total_cmp(&d[b].abs()));
    let mut ranks = vec![0.0; d.len()];
    for (r, &i) in idx.iter().enumerate() {
        ranks[i] = r as f64 + 1.0;
    }
    let w_plus: f64 = (0..d.len()).filter(|&i| d[i] > 0.0).map(|i| ranks[i]).sum();
    let total: f64 = ranks.iter().sum();
    let w = w_plus.min(total - w_plus);
    let n = d.len();
    let mut at_most = 0u64;
    for mask in 0u64..(1 << n) {
        let s: f64 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if s <= w + 1e-9 {
            at_most += 1;
        }
    }
    (w, (2.0 * at_most as f64 / (1u64 << n) as f64).min(1.0))
}

#[test]
fn exact_wilcoxon_matches_enumeration() {
    let mut rng = seeded_rng(RngSeed(17));
    for n in 3..=14 {
        let a: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.1).collect();
        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let (w, p) = enumerate_p(&d);
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(r.statistic, w, "n {n}");
        assert!((r.p_value - p).abs() < 1e-12, "n {n}: {} vs {p}", r.p_value);
    }
}

#[test]
fn three_point_t_tests_match_hand_arithmetic() {
    // a = 1,2,3 (mean 2, var 1); b = 4,5,6 (mean 5, var 1); pooled sd 1,
    // t = -3 / sqrt(2/3) = -3.674235, df 4, two-sided p = 0.021312.
    let r = two_sample_t_test(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
    assert!((r.statistic + 3.674_234_614).abs() < 1e-6);
    assert_eq!(r.df, Some(4));
    assert!((r.p_value - 0.021_312).abs() < 1e-3);
    // Differences -1, -2, -4: mean -7/3, sd 1.527525, t = -2.645751, df 2,
    // p = 0.118083.
    let r = paired_t_test(&[1.0, 2.0, 3.0], &[2.0, 4.0, 7.0]).unwrap();
    assert!((r.statistic + 2.645_751).abs() < 1e-5);
    assert!((r.p_value - 0.118_083).abs() < 1e-3);
}

#[test]
fn identical_arrays_give_zero_and_one() {
    let a = [0.91, 0.93, 0.92, 0.95];
    let r = two_sample_t_test(&a, &a).unwrap();
    assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
}
