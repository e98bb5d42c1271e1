//! Acceptance suite. Runs every criterion in order and prints one
//! PASS/FAIL line each; exits non-zero if any fails.
//!
//! Pass criterion numbers as arguments to run a subset:
//! `cargo test --test acceptance -- 2 5`.

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use fraudstream::balance::{
    adasyn_allocation, enn_removals, smote, tomek_links, BalanceConfig, Balancer, BALANCER_NAMES,
};
use fraudstream::eval::{
    cross_validate_fitters, eval_report, evaluate, two_sample_t_test, wilcoxon_signed_rank, CvSpec, FitFn,
};
use fraudstream::gan::{
    discriminator_probability, generate_samples, train_gan, train_gan_observed, Activation, DenseNet, GanConfig,
    GanVariant, TrainEvent,
};
use fraudstream::ingest::{stratified_split, Normalizer};
use fraudstream::models::{fit_decision_tree, fit_random_forest, Classifier, Family, HyperParams};
use fraudstream::stream::{run_on_batches, SlidingWindowSpec, StreamConfig};
use fraudstream::synthgen::{generate_batches, generate_dataset, GenSpec};
use fraudstream::{seeded_rng, ConfusionMatrix, FeatureVector, Label, LabeledRecord, RngSeed};
use ndarray::Array2;
use rand::Rng;

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn within_budget(start: Instant, budget: Duration, what: &str) -> Result<(), String> {
    let took = start.elapsed();
    if took > budget {
        return Err(format!("{what} took {took:.1?}, budget {budget:?}"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// 1. Balanced accuracy reproduces the published AUC tables.

const STATIC_BALANCERS: [&str; 7] = ["none", "smote", "smote-tomek", "smote-enn", "adasyn", "vgan", "wgan"];
const STATIC_MODELS: [&str; 7] = ["nb", "lr", "svm", "dt", "rf", "gbt", "mlp"];

const STATIC_AUC: [[f64; 7]; 7] = [
    [0.721, 0.775, 0.775, 0.777, 0.692, 0.897, 0.798],
    [0.709, 0.803, 0.803, 0.805, 0.690, 0.893, 0.869],
    [0.807, 0.806, 0.805, 0.807, 0.694, 0.890, 0.853],
    [0.755, 0.823, 0.823, 0.824, 0.775, 0.953, 0.904],
    [0.759, 0.837, 0.837, 0.838, 0.791, 0.975, 0.920],
    [0.759, 0.837, 0.837, 0.838, 0.791, 0.975, 0.920],
    [0.757, 0.837, 0.831, 0.831, 0.721, 0.977, 0.904],
];
const STATIC_SENSITIVITY: [[f64; 7]; 7] = [
    [0.546, 0.779, 0.778, 0.780, 0.699, 0.871, 0.674],
    [0.540, 0.782, 0.781, 0.783, 0.660, 0.787, 0.745],
    [0.736, 0.775, 0.774, 0.775, 0.632, 0.781, 0.707],
    [0.607, 0.789, 0.787, 0.789, 0.738, 0.930, 0.824],
    [0.618, 0.773, 0.773, 0.776, 0.769, 0.961, 0.850],
    [0.618, 0.773, 0.773, 0.776, 0.769, 0.961, 0.850],
    [0.613, 0.781, 0.781, 0.781, 0.675, 0.969, 0.825],
];
const STATIC_SPECIFICITY: [[f64; 7]; 7] = [
    [0.895, 0.772, 0.773, 0.774, 0.685, 0.924, 0.922],
    [0.878, 0.825, 0.825, 0.826, 0.720, 0.999, 0.992],
    [0.877, 0.837, 0.836, 0.838, 0.757, 1.0, 0.999],
    [0.902, 0.857, 0.859, 0.859, 0.813, 0.975, 0.991],
    [0.901, 0.901, 0.902, 0.901, 0.812, 0.989, 0.991],
    [0.901, 0.901, 0.902, 0.901, 0.812, 0.989, 0.991],
    [0.902, 0.882, 0.882, 0.882, 0.767, 0.986, 0.982],
];

const STREAM_BALANCERS: [&str; 6] = ["smote", "smote-tomek", "smote-enn", "adasyn", "vgan", "wgan"];
const STREAM_MODELS: [&str; 4] = ["lr", "knn", "dt", "rf"];

const STREAM_AUC: [[f64; 6]; 4] = [
    [0.811, 0.811, 0.811, 0.691, 0.842, 0.875],
    [0.854, 0.855, 0.855, 0.774, 0.870, 0.896],
    [0.889, 0.889, 0.889, 0.810, 0.908, 0.909],
    [0.896, 0.898, 0.898, 0.821, 0.910, 0.911],
];
const STREAM_SENSITIVITY: [[f64; 6]; 4] = [
    [0.806, 0.806, 0.806, 0.667, 0.848, 0.914],
    [0.860, 0.861, 0.861, 0.746, 0.828, 0.859],
    [0.895, 0.895, 0.895, 0.779, 0.865, 0.867],
    [0.899, 0.895, 0.895, 0.793, 0.871, 0.873],
];
const STREAM_SPECIFICITY: [[f64; 6]; 4] = [
    [0.815, 0.816, 0.816, 0.715, 0.836, 0.836],
    [0.849, 0.850, 0.850, 0.801, 0.913, 0.933],
    [0.882, 0.882, 0.882, 0.842, 0.950, 0.952],
    [0.893, 0.892, 0.892, 0.810, 0.948, 0.949],
];

/// A confusion matrix with exactly the given rates (denominators of 1000).
fn confusion_for(sensitivity: f64, specificity: f64) -> ConfusionMatrix {
    let tp = (sensitivity * 1000.0).round() as u64;
    let tn = (specificity * 1000.0).round() as u64;
    ConfusionMatrix { true_positives: tp, false_negatives: 1000 - tp, true_negatives: tn, false_positives: 1000 - tn }
}

fn published_cells_consistent() -> Result<String, String> {
    const TOL: f64 = 0.0005 + 1e-9;
    let mut mismatches = Vec::new();
    let mut cells = 0;
    let mut check = |table: &str, model: &str, balancer: &str, auc: f64, sens: f64, spec: f64| {
        cells += 1;
        let report = eval_report(&confusion_for(sens, spec));
        if (report.auc - auc).abs() > TOL {
            mismatches.push(format!("{table} {model}/{balancer}: ({sens} + {spec}) / 2 = {:.4} vs {auc}", report.auc));
        }
    };
    for (i, model) in STATIC_MODELS.iter().enumerate() {
        for (j, bal) in STATIC_BALANCERS.iter().enumerate() {
            check("static", model, bal, STATIC_AUC[i][j], STATIC_SENSITIVITY[i][j], STATIC_SPECIFICITY[i][j]);
        }
    }
    for (i, model) in STREAM_MODELS.iter().enumerate() {
        for (j, bal) in STREAM_BALANCERS.iter().enumerate() {
            check("stream", model, bal, STREAM_AUC[i][j], STREAM_SENSITIVITY[i][j], STREAM_SPECIFICITY[i][j]);
        }
    }
    ensure!(cells == 73, "expected 73 cells, encoded {cells}");
    ensure!(
        mismatches.is_empty(),
        "{} of {cells} cells off by more than 0.0005: {}",
        mismatches.len(),
        mismatches.join("; ")
    );
    Ok(format!("{cells} cells within 0.0005"))
}

// ---------------------------------------------------------------------------
// 2. t-test: identical arrays and a hand-computed three-point case.

fn t_test_reproduction() -> Result<String, String> {
    let aucs = [0.975, 0.974, 0.976, 0.975, 0.973, 0.977, 0.975, 0.974, 0.976, 0.975];
    let r = two_sample_t_test(&aucs, &aucs).map_err(|e| e.to_string())?;
    ensure!(r.statistic == 0.0 && r.p_value == 1.0, "identical arrays gave t {} p {}", r.statistic, r.p_value);
    ensure!(r.df == Some(18), "df {:?}", r.df);
    // Means 2 and 5, unit variances: t = -3 / sqrt(2/3), df 4, p = 0.021312.
    let r = two_sample_t_test(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).map_err(|e| e.to_string())?;
    ensure!((r.statistic + 3.674_234_614).abs() < 1e-6, "t {}", r.statistic);
    ensure!((r.p_value - 0.021_312).abs() < 1e-3, "p {}", r.p_value);
    Ok(format!("identical: t 0 p 1; n=3: t {:.4} p {:.5}", r.statistic, r.p_value))
}

// ---------------------------------------------------------------------------
// 3. 1000 batches, ws 2, sl 1 give 999 causal windows.

fn thousand_batch_stream() -> Result<String, String> {
    let spec = GenSpec { n_records: 1_000_000, seed: RngSeed(3), ..GenSpec::default() };
    let batches = generate_batches(&spec, 1000).map_err(|e| e.to_string())?;
    ensure!(batches.len() == 1000, "{} batches", batches.len());
    let start = Instant::now();
    let config = StreamConfig {
        window: SlidingWindowSpec::new(2, 1).map_err(|e| e.to_string())?,
        measure_latency: false,
        ..StreamConfig::new(Family::Dt, HyperParams::new())
    };
    let out = run_on_batches(batches, config).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    ensure!(out.results.len() == 999, "{} windows", out.results.len());
    for (w, r) in out.results.iter().enumerate() {
        ensure!(r.window_id == w, "window {w} has id {}", r.window_id);
        ensure!(r.train_batch_indices == vec![w as u64], "window {w} trains on {:?}", r.train_batch_indices);
        ensure!(r.test_batch_index == w as u64 + 1, "window {w} tests on {}", r.test_batch_index);
        ensure!(r.train_batch_indices.iter().all(|&t| t < r.test_batch_index), "window {w} is not causal");
    }
    within_budget(start, Duration::from_secs(60), "streaming 1000 batches")?;
    Ok(format!("999 causal windows in {took:.1?}"))
}

// ---------------------------------------------------------------------------
// 4. Balancer oracles.

fn uniform_records(n: usize, d: usize, pos_frac: f64, seed: u64) -> Vec<LabeledRecord> {
    let mut rng = seeded_rng(RngSeed(seed));
    (0..n)
        .map(|_| {
            let v: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let label = if rng.random::<f64>() < pos_frac { Label::Positive } else { Label::Negative };
            LabeledRecord::from_values(v, label).unwrap()
        })
        .collect()
}

/// Brute-force `k` nearest rows; ties go to the lower index.
fn brute_knn(pool: &[&[f64]], q: &[f64], k: usize, skip: Option<usize>) -> Vec<usize> {
    let mut order: Vec<(f64, usize)> = pool
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip)
        .map(|(i, p)| (p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum(), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    order.into_iter().take(k).map(|(_, i)| i).collect()
}

fn balancer_oracles() -> Result<String, String> {
    let start = Instant::now();

    let train = uniform_records(1000, 3, 0.1, 5);
    let cfg = BalanceConfig::default().with_seed(RngSeed(9));
    let out = smote(&train, &cfg).map_err(|e| e.to_string())?;
    let minority: Vec<&[f64]> = train.iter().filter(|r| r.label == Label::Positive).map(|r| r.values()).collect();
    let nn: Vec<Vec<usize>> =
        (0..minority.len()).map(|i| brute_knn(&minority, minority[i], cfg.k_neighbors, Some(i))).collect();
    let synthetic = &out[train.len()..];
    for (n, s) in synthetic.iter().enumerate() {
        let on_segment = (0..minority.len()).any(|i| {
            nn[i].iter().any(|&j| {
                let (x, y) = (minority[i], minority[j]);
                let span: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - a).collect();
                let len2: f64 = span.iter().map(|v| v * v).sum();
                let u = s.values().iter().zip(x).zip(&span).map(|((p, a), d)| (p - a) * d).sum::<f64>() / len2;
                let residual =
                    s.values().iter().zip(x).zip(&span).map(|((p, a), d)| (p - a - u * d).powi(2)).sum::<f64>().sqrt();
                residual < 1e-9 && (0.0..=1.0).contains(&u)
            })
        });
        ensure!(on_segment, "synthetic record {n} lies on no minority-neighbour segment");
    }

    for seed in 0..10 {
        let data = uniform_records(50, 2, 0.4, 100 + seed);
        let pts: Vec<&[f64]> = data.iter().map(|r| r.values()).collect();
        let nearest: Vec<usize> = (0..50).map(|i| brute_knn(&pts, pts[i], 1, Some(i))[0]).collect();
        let links: Vec<(usize, usize)> = (0..50)
            .filter(|&i| i < nearest[i] && nearest[nearest[i]] == i && data[i].label != data[nearest[i]].label)
            .map(|i| (i, nearest[i]))
            .collect();
        ensure!(tomek_links(&data) == links, "Tomek links differ on dataset {seed}");

        let k = 3;
        let removals: Vec<usize> = (0..50)
            .filter(|&i| {
                let pos = brute_knn(&pts, pts[i], k, Some(i)).iter().filter(|&&j| data[j].label.is_positive()).count();
                if data[i].label.is_positive() { k - pos > pos } else { pos > k - pos }
            })
            .collect();
        ensure!(enn_removals(&data, k).map_err(|e| e.to_string())? == removals, "ENN removals differ on dataset {seed}");

        let data = uniform_records(50, 2, 0.3, 200 + seed);
        let pts: Vec<&[f64]> = data.iter().map(|r| r.values()).collect();
        let cfg = BalanceConfig::default();
        let minority: Vec<usize> = (0..50).filter(|&i| data[i].label.is_positive()).collect();
        let g_total = (50 - minority.len()) - minority.len();
        let r: Vec<f64> = minority
            .iter()
            .map(|&i| {
                let nn = brute_knn(&pts, pts[i], cfg.k_neighbors, Some(i));
                nn.iter().filter(|&&j| !data[j].label.is_positive()).count() as f64 / cfg.k_neighbors as f64
            })
            .collect();
        let total: f64 = r.iter().sum();
        let got = adasyn_allocation(&data, &cfg).map_err(|e| e.to_string())?;
        ensure!(got.iter().sum::<usize>() == g_total, "ADASYN total {} vs {g_total}", got.iter().sum::<usize>());
        for (&g, &ri) in got.iter().zip(&r) {
            let quota = ri / total * g_total as f64;
            ensure!(g as f64 == quota.floor() || g as f64 == quota.ceil(), "ADASYN count {g} vs quota {quota}");
        }
    }
    within_budget(start, Duration::from_secs(5), "balancer oracles")?;
    Ok(format!("{} SMOTE points collinear; Tomek/ENN/ADASYN match on 10 datasets", synthetic.len()))
}

// ---------------------------------------------------------------------------
// 5. Analytic gradients against central finite differences.

fn gradient_error(seed: u64) -> f64 {
    let mut rng = seeded_rng(RngSeed(seed));
    let acts = [Activation::LeakyRelu, Activation::Tanh, Activation::Sigmoid];
    let dims: Vec<usize> = (0..4).map(|_| rng.random_range(1..6)).collect();
    let hidden = acts[rng.random_range(0..3)];
    let net = DenseNet::init(&dims, hidden, Activation::Sigmoid, &mut rng);
    let batch = rng.random_range(1..5);
    let x = Array2::from_shape_fn((batch, dims[0]), |_| rng.random_range(-1.0..1.0));
    let r = Array2::from_shape_fn((batch, dims[3]), |_| rng.random_range(-1.0..1.0));
    let loss = |n: &DenseNet| (n.forward_batch(&x) * &r).sum();
    let (grads, _) = net.backward(&net.forward_cached(x.clone()), &r);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for (n, a) in grads.flatten().into_iter().enumerate() {
        let shifted = |delta: f64| {
            let mut copy = net.clone();
            let mut i = 0;
            copy.for_each_param_mut(|p| {
                if i == n {
                    *p += delta;
                }
                i += 1;
            });
            loss(&copy)
        };
        let numeric = (shifted(h) - shifted(-h)) / (2.0 * h);
        worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6));
    }
    worst
}

fn gradient_check() -> Result<String, String> {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let err = gradient_error(1000 + seed);
        ensure!(err < 1e-4, "net {seed}: relative error {err:e}");
        worst = worst.max(err);
    }
    within_budget(start, Duration::from_secs(10), "gradient check")?;
    Ok(format!("20 nets, worst relative error {worst:.2e}"))
}

// ---------------------------------------------------------------------------
// 6. Ordinal findings on synthetic data.

const SEEDS: [u64; 3] = [1, 2, 3];
const GAN_EPOCHS: usize = 2000;

fn synthetic(seed: u64) -> GenSpec {
    GenSpec { n_records: 100_000, separation: 1.5, seed: RngSeed(seed), ..GenSpec::default() }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// (i): holdout sensitivity of RF under every balancer, averaged over seeds.
fn balancer_sensitivities() -> Result<Vec<(String, f64)>, String> {
    let gan = GanConfig { epochs: GAN_EPOCHS, ..GanConfig::vanilla() };
    let mut sens = vec![Vec::new(); BALANCER_NAMES.len()];
    for &seed in &SEEDS {
        let data = generate_dataset(&synthetic(seed)).map_err(|e| e.to_string())?;
        let (train, test) = stratified_split(&data.records, 0.8, RngSeed(seed)).map_err(|e| e.to_string())?;
        let norm = Normalizer::fit(&train).map_err(|e| e.to_string())?;
        let train = norm.apply(&train).map_err(|e| e.to_string())?;
        let test = norm.apply(&test).map_err(|e| e.to_string())?;
        for (b, name) in BALANCER_NAMES.iter().enumerate() {
            let balancer = Balancer::from_name(name, &gan).map_err(|e| e.to_string())?;
            let cfg = BalanceConfig::default().with_seed(RngSeed(seed).for_role(1, 0));
            let balanced = balancer.apply(&train, &cfg).map_err(|e| e.to_string())?;
            let rf = fit_random_forest(&balanced, &HyperParams::new(), RngSeed(seed).for_role(2, 0))
                .map_err(|e| e.to_string())?;
            let report = evaluate(&rf, &test).map_err(|e| e.to_string())?;
            sens[b].push(report.sensitivity);
        }
    }
    Ok(BALANCER_NAMES.iter().zip(sens).map(|(n, s)| (n.to_string(), mean(&s))).collect())
}

/// (ii) static: mean 10-fold AUC of RF and DT on shared folds.
fn static_rf_dt() -> Result<(f64, f64), String> {
    let rf = |train: &[LabeledRecord], seed: RngSeed| {
        Ok(Box::new(fit_random_forest(train, &HyperParams::new(), seed)?) as Box<dyn Classifier>)
    };
    let dt = |train: &[LabeledRecord], _: RngSeed| {
        Ok(Box::new(fit_decision_tree(train, &HyperParams::new())?) as Box<dyn Classifier>)
    };
    let fitters: [&FitFn<'_>; 2] = [&rf, &dt];
    let (mut rf_auc, mut dt_auc) = (Vec::new(), Vec::new());
    for &seed in &SEEDS {
        let data = generate_dataset(&synthetic(seed)).map_err(|e| e.to_string())?;
        let spec = CvSpec::new(10, RngSeed(seed), Balancer::None);
        let reports = cross_validate_fitters(&data.records, &fitters, &spec).map_err(|e| e.to_string())?;
        rf_auc.extend(reports[0].iter().map(|r| r.auc));
        dt_auc.extend(reports[1].iter().map(|r| r.auc));
    }
    Ok((mean(&rf_auc), mean(&dt_auc)))
}

/// (ii) stream and (iii): per-window AUCs of RF and DT, pooled over seeds.
fn stream_rf_dt() -> Result<(Vec<f64>, Vec<f64>), String> {
    let (mut rf, mut dt) = (Vec::new(), Vec::new());
    for &seed in &SEEDS {
        let batches = generate_batches(&synthetic(seed), 1000).map_err(|e| e.to_string())?;
        for (family, out) in [(Family::Rf, &mut rf), (Family::Dt, &mut dt)] {
            let config = StreamConfig {
                measure_latency: false,
                seed: RngSeed(seed),
                ..StreamConfig::new(family, HyperParams::new())
            };
            let outcome = run_on_batches(batches.clone(), config).map_err(|e| e.to_string())?;
            for r in &outcome.results {
                let report = r.report.as_ref().ok_or_else(|| format!("window {} skipped", r.window_id))?;
                out.push(report.auc);
            }
        }
    }
    Ok((rf, dt))
}

fn ordinal_findings() -> Result<String, String> {
    let start = Instant::now();
    let sens = balancer_sensitivities()?;
    let baseline = sens[0].1;
    let sens_line = sens.iter().map(|(n, s)| format!("{n} {s:.3}")).collect::<Vec<_>>().join(", ");
    for (name, s) in &sens[1..] {
        ensure!(*s > baseline, "{name} sensitivity {s:.4} does not beat imbalanced {baseline:.4} ({sens_line})");
    }

    let (rf_static, dt_static) = static_rf_dt()?;
    ensure!(rf_static >= dt_static, "static: RF AUC {rf_static:.4} < DT AUC {dt_static:.4}");

    let (rf_windows, dt_windows) = stream_rf_dt()?;
    ensure!(rf_windows.len() >= 200, "only {} windows", rf_windows.len());
    let (rf_stream, dt_stream) = (mean(&rf_windows), mean(&dt_windows));
    ensure!(rf_stream >= dt_stream, "stream: RF AUC {rf_stream:.4} < DT AUC {dt_stream:.4}");
    let w = wilcoxon_signed_rank(&rf_windows, &dt_windows).map_err(|e| e.to_string())?;
    let gap = rf_stream - dt_stream;
    if gap > 0.02 {
        ensure!(w.p_value < 0.05, "gap {gap:.4} but Wilcoxon p {:.3e}", w.p_value);
    }
    within_budget(start, Duration::from_secs(15 * 60), "ordinal findings")?;
    Ok(format!(
        "sensitivity [{sens_line}]; static AUC RF {rf_static:.3} DT {dt_static:.3}; stream AUC RF {rf_stream:.3} \
         DT {dt_stream:.3} over {} windows, gap {gap:.3}, Wilcoxon p {:.2e}",
        rf_windows.len(),
        w.p_value
    ))
}

// ---------------------------------------------------------------------------
// 7. Byte-identical end-to-end runs.

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_fraudstream")).args(args).output().map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    Ok(())
}

fn end_to_end_run(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let s = |p: &Path| p.to_str().unwrap().to_string();
    let data = dir.join("data.csv");
    let batches = dir.join("batches");
    run_cli(&["gen", "--records", "4000", "--seed", "11", "--out", &s(&data), "--batches-dir", &s(&batches), "--batch-size", "250"])?;
    run_cli(&[
        "static", "--input", &s(&data), "--seed", "11", "--models", "lr,dt,rf,knn", "--balancer", "none,smote,adasyn",
        "--folds", "3", "--out", &s(&dir.join("static.jsonl")),
    ])?;
    run_cli(&[
        "stream", "--batches-dir", &s(&batches), "--seed", "11", "--models", "lr,knn,dt,rf", "--balancer", "smote",
        "--no-timing", "--idle-timeout-ms", "2000", "--out", &s(&dir.join("stream.jsonl")),
    ])?;
    let mut files = Vec::new();
    for name in ["static.jsonl", "stream.jsonl", "stream.summary.json", "auc_rf.csv", "auc_dt.csv"] {
        let bytes = std::fs::read(dir.join(name)).map_err(|e| format!("{name}: {e}"))?;
        files.push((name.to_string(), bytes));
    }
    Ok(files)
}

fn determinism() -> Result<String, String> {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = end_to_end_run(a.path())?;
    let second = end_to_end_run(b.path())?;
    for ((name, x), (_, y)) in first.iter().zip(&second) {
        ensure!(!x.is_empty(), "{name} is empty");
        ensure!(x == y, "{name} differs between runs");
    }
    Ok(format!("{} result files byte-identical", first.len()))
}

// ---------------------------------------------------------------------------
// 8. GAN invariants and point-mass generation.

fn gan_invariants() -> Result<String, String> {
    let start = Instant::now();
    let data: Vec<FeatureVector> =
        (0..64).map(|i| FeatureVector::new(vec![i as f64 / 64.0, 0.25]).unwrap()).collect();

    let cfg = GanConfig { epochs: 50, seed: RngSeed(5), ..GanConfig::wasserstein() };
    let mut violations = 0;
    let mut steps = 0;
    train_gan_observed(&data, &cfg, |ev| {
        if let TrainEvent::DiscriminatorUpdated { net, .. } = ev {
            steps += 1;
            violations += net.params_flat().iter().filter(|p| p.abs() > cfg.wgan_clip).count();
        }
    })
    .map_err(|e| e.to_string())?;
    ensure!(steps == 50 * cfg.critic_steps, "{steps} critic steps observed");
    ensure!(violations == 0, "{violations} critic parameters outside the clip range");

    let cfg = GanConfig { epochs: 200, seed: RngSeed(6), variant: GanVariant::Vanilla, ..GanConfig::vanilla() };
    let probe = Array2::from_shape_fn((101, 2), |(i, j)| if j == 0 { i as f64 / 10.0 - 5.0 } else { 0.5 });
    let mut outside = 0;
    train_gan_observed(&data, &cfg, |ev| {
        if let TrainEvent::DiscriminatorUpdated { net, .. } = ev {
            outside += discriminator_probability(net, &probe).iter().filter(|&&p| !(p > 0.0 && p < 1.0)).count();
        }
    })
    .map_err(|e| e.to_string())?;
    ensure!(outside == 0, "{outside} discriminator outputs outside (0, 1)");

    let point: Vec<FeatureVector> = (0..64).map(|_| FeatureVector::new(vec![0.7]).unwrap()).collect();
    let cfg = GanConfig { epochs: GAN_EPOCHS, seed: RngSeed(1), ..GanConfig::vanilla() };
    let gen = train_gan(&point, &cfg).map_err(|e| e.to_string())?;
    let s: Vec<f64> = generate_samples(&gen, 1000, RngSeed(2)).iter().map(|v| v.values()[0]).collect();
    let m = mean(&s);
    let sd = (s.iter().map(|v| (v - m).powi(2)).sum::<f64>() / s.len() as f64).sqrt();
    ensure!((m - 0.7).abs() < 0.1, "point-mass mean {m:.4}");
    ensure!(sd < 0.2, "point-mass std {sd:.4}");
    within_budget(start, Duration::from_secs(120), "GAN checks")?;
    Ok(format!("clip held over {steps} critic steps; point mass mean {m:.3} std {sd:.3}"))
}

// ---------------------------------------------------------------------------

/// Criteria that no implementation can meet because the published tables
/// contradict their own definition. They still run and print FAIL; the exit
/// status ignores them so the rest of the workspace tests keep running.
const KNOWN_UNATTAINABLE: [usize; 1] = [1];

fn main() {
    let criteria: [(&str, Check); 8] = [
        ("balanced accuracy reproduces published AUC cells", published_cells_consistent),
        ("t-test degenerate and hand-computed cases", t_test_reproduction),
        ("1000 batches give 999 causal windows", thousand_batch_stream),
        ("balancers match brute-force oracles", balancer_oracles),
        ("analytic gradients match finite differences", gradient_check),
        ("ordinal findings on synthetic data", ordinal_findings),
        ("end-to-end runs are byte-identical", determinism),
        ("GAN invariants and point-mass generation", gan_invariants),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    panic::set_hook(Box::new(|_| {}));
    let (mut failed, mut known) = (0, 0);
    for (n, (name, check)) in criteria.iter().enumerate().map(|(i, c)| (i + 1, c)) {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS criterion {n}: {name} ({took:.1?}) {detail}"),
            Err(why) => {
                if KNOWN_UNATTAINABLE.contains(&n) {
                    known += 1;
                } else {
                    failed += 1;
                }
                println!("FAIL criterion {n}: {name} ({took:.1?}) {why}");
            }
        }
    }
    if known > 0 {
        println!("{known} known-unattainable criterion(s) failed; see README");
    }
    if failed > 0 {
        println!("{failed} acceptance criterion(s) failed");
        std::process::exit(1);
    }
}
