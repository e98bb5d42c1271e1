//! Significance test between two result sets (static fold AUCs or stream
//! window AUCs).

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use fraudstream::eval::{paired_t_test, two_sample_t_test, wilcoxon_signed_rank, TestResult};
use fraudstream::Error;
use serde::Serialize;
use serde_json::Value;

use crate::args::{CompareArgs, TestKind};
use crate::common::{usage, write_file, CliError};

/// AUC samples from one side; stream samples carry their window ids.
#[derive(Debug, Clone, PartialEq)]
enum Sample {
    Folds(Vec<f64>),
    Windows(BTreeMap<u64, f64>),
}

#[derive(Debug, Serialize)]
struct CompareRecord {
    test: &'static str,
    paired: bool,
    n_a: usize,
    n_b: usize,
    mean_a: f64,
    mean_b: f64,
    statistic: f64,
    df: Option<u64>,
    p_value: f64,
    alpha: f64,
    reject_null: bool,
    degenerate: bool,
}

fn read_lines(path: &Path) -> Result<Vec<Value>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Run(Error::io(path, e)))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| usage(format!("{}:{}: not a JSON object: {e}", path.display(), i + 1)))
        })
        .collect()
}

fn field_matches(line: &Value, key: &str, want: Option<&str>) -> bool {
    want.is_none_or(|w| line.get(key).and_then(Value::as_str) == Some(w))
}

fn extract(path: &Path, model: Option<&str>, balancer: Option<&str>) -> Result<Sample, CliError> {
    let lines: Vec<Value> = read_lines(path)?
        .into_iter()
        .filter(|l| field_matches(l, "model", model) && field_matches(l, "balancer", balancer))
        .collect();
    let Some(first) = lines.first() else {
        return Err(usage(format!("{}: no result lines match the selection", path.display())));
    };
    if first.get("folds").is_some() {
        if lines.len() != 1 {
            return Err(usage(format!(
                "{}: {} static results match; narrow the selection with --model-*/--balancer-*",
                path.display(),
                lines.len()
            )));
        }
        let folds = first["folds"].as_array().ok_or_else(|| usage("'folds' is not an array"))?;
        let aucs = folds
            .iter()
            .map(|f| f.get("auc").and_then(Value::as_f64).ok_or_else(|| usage("fold without numeric 'auc'")))
            .collect::<Result<_, _>>()?;
        return Ok(Sample::Folds(aucs));
    }
    let models: Vec<&str> = lines.iter().filter_map(|l| l.get("model").and_then(Value::as_str)).collect();
    if models.iter().any(|m| *m != models[0]) {
        return Err(usage(format!("{}: several models match; pick one with --model-*", path.display())));
    }
    let mut windows = BTreeMap::new();
    for l in &lines {
        let id = l.get("window_id").and_then(Value::as_u64).ok_or_else(|| usage("line without 'window_id'"))?;
        if let Some(auc) = l.get("auc").and_then(Value::as_f64) {
            windows.insert(id, auc);
        }
    }
    Ok(Sample::Windows(windows))
}

/// Aligns two samples. Stream samples are paired by window id, keeping only
/// windows evaluated on both sides.
fn align(a: Sample, b: Sample) -> (Vec<f64>, Vec<f64>) {
    match (a, b) {
        (Sample::Windows(a), Sample::Windows(b)) => a.iter().filter_map(|(id, &x)| b.get(id).map(|&y| (x, y))).unzip(),
        (Sample::Windows(a), Sample::Folds(b)) => (a.into_values().collect(), b),
        (Sample::Folds(a), Sample::Windows(b)) => (a, b.into_values().collect()),
        (Sample::Folds(a), Sample::Folds(b)) => (a, b),
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len().max(1) as f64
}

pub fn run(args: &CompareArgs) -> Result<(), CliError> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(usage(format!("--alpha must lie in (0, 1), got {}", args.alpha)));
    }
    let b_path = args.b.as_deref().unwrap_or(&args.a);
    let a = extract(&args.a, args.model_a.as_deref(), args.balancer_a.as_deref())?;
    let b = extract(b_path, args.model_b.as_deref(), args.balancer_b.as_deref())?;
    let (a, b) = align(a, b);
    let paired = args.paired || args.test == TestKind::Wilcoxon;
    if paired && a.len() != b.len() {
        return Err(usage(format!("paired test needs equal sample sizes, got {} and {}", a.len(), b.len())));
    }
    let (name, result): (&str, TestResult) = match (args.test, args.paired) {
        (TestKind::Wilcoxon, _) => ("wilcoxon", wilcoxon_signed_rank(&a, &b)?),
        (TestKind::Ttest, true) => ("paired-ttest", paired_t_test(&a, &b)?),
        (TestKind::Ttest, false) => ("ttest", two_sample_t_test(&a, &b)?),
    };
    let reject = result.p_value < args.alpha;
    let df = result.df.map_or_else(|| "-".to_string(), |d| d.to_string());
    println!("test       {name} (n_a = {}, n_b = {})", a.len(), b.len());
    println!("mean auc   {:.4} vs {:.4}", mean(&a), mean(&b));
    println!("statistic  {:.6}", result.statistic);
    println!("df         {df}");
    println!("p-value    {:.6}", result.p_value);
    println!("{} at alpha = {}", if reject { "reject H0" } else { "accept H0" }, args.alpha);
    if result.degenerate {
        eprintln!("warning: degenerate samples (zero variance or all differences zero)");
    }
    if let Some(out) = &args.out {
        let record = CompareRecord {
            test: name,
            paired,
            n_a: a.len(),
            n_b: b.len(),
            mean_a: mean(&a),
            mean_b: mean(&b),
            statistic: result.statistic,
            df: result.df,
            p_value: result.p_value,
            alpha: args.alpha,
            reject_null: reject,
            degenerate: result.degenerate,
        };
        let json = serde_json::to_string_pretty(&record).expect("record serializes");
        write_file(out, json.as_bytes())?;
    }
    Ok(())
}
