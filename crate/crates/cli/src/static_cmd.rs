//! Static pipeline: holdout split, grid-searched cross-validation on the
//! training side, then a refit of the winner evaluated on the holdout.

use fraudstream::balance::Balancer;
use fraudstream::eval::{evaluate, grid_search_detailed, write_jsonl, CvResult, CvSpec};
use fraudstream::ingest::{load_dataset, stratified_split, Normalizer};
use fraudstream::models::{fit, Family};
use fraudstream::{EvalReport, LabeledRecord, Result, RngSeed};
use std::io::Write;

use log::info;
use serde::Serialize;

use crate::args::StaticArgs;
use crate::common::{balance_config, create_parent, gan_config, grid_for, parse_balancers, parse_models, parse_param, render_table, usage, CliError};

/// One output line: the cross-validation result of the selected grid point
/// plus its holdout evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct StaticRecord {
    #[serde(flatten)]
    pub cv: CvResult,
    pub grid_size: usize,
    pub holdout: EvalReport,
}

fn holdout_eval(
    train: &[LabeledRecord],
    test: &[LabeledRecord],
    family: Family,
    best: &CvResult,
    balancer: &Balancer,
    args: &StaticArgs,
    seed: RngSeed,
) -> Result<EvalReport> {
    let norm = Normalizer::fit(train)?;
    let train = norm.apply(train)?;
    let test = norm.apply(test)?;
    let cfg = balance_config(&args.balance).with_seed(seed.for_role(4, 0));
    let balanced = balancer.apply(&train, &cfg)?;
    let model = fit(family, &balanced, &best.hyper_params, seed.for_role(5, 0))?;
    evaluate(&model, &test)
}

pub fn run(args: &StaticArgs) -> Result<(), CliError> {
    if args.folds < 2 {
        return Err(usage("--folds must be at least 2"));
    }
    let models = parse_models(&args.models)?;
    let gan = gan_config(&args.balance);
    let balancers = parse_balancers(&args.balancer, &gan)?;
    let overrides = args.params.iter().map(|p| parse_param(p)).collect::<Result<Vec<_>, _>>()?;
    let seed = RngSeed(args.shared.seed);

    let dataset = load_dataset(&args.input, &args.label, args.null_threshold)?;
    info!("loaded {} records, {} features", dataset.len(), dataset.dim());
    let (train, test) = stratified_split(&dataset.records, args.train_fraction, seed.for_role(3, 0))?;

    let mut lines = Vec::new();
    for balancer in &balancers {
        let spec = CvSpec { k: args.folds, seed, balancer: balancer.clone(), balance: balance_config(&args.balance) };
        for &family in &models {
            let grid = grid_for(family, &overrides);
            let result = grid_search_detailed(&train, family, &grid, &spec)?;
            let holdout = holdout_eval(&train, &test, family, &result.best, balancer, args, seed)?;
            info!("{family} / {}: cv auc {:.4}, holdout auc {:.4}", balancer.name(), result.best.mean_auc, holdout.auc);
            lines.push(StaticRecord { cv: result.best, grid_size: grid.len(), holdout });
        }
    }

    create_parent(&args.out)?;
    let file = std::fs::File::create(&args.out).map_err(|e| CliError::Run(fraudstream::Error::io(&args.out, e)))?;
    let mut out = std::io::BufWriter::new(file);
    write_jsonl(&mut out, &lines)?;
    out.flush().map_err(|e| CliError::Run(fraudstream::Error::io(&args.out, e)))?;

    let rows: Vec<String> = models.iter().map(|m| m.name().to_string()).collect();
    let cols: Vec<String> = balancers.iter().map(|b| b.name().to_string()).collect();
    let n_rows = rows.len();
    let lines = &lines;
    let cell = |metric: fn(&CvResult) -> f64| move |i: usize, j: usize| Some(metric(&lines[j * n_rows + i].cv));
    print!("{}", render_table("cross-validated AUC", &rows, &cols, cell(|c| c.mean_auc)));
    print!("{}", render_table("cross-validated sensitivity", &rows, &cols, cell(|c| c.mean_sensitivity)));
    print!("{}", render_table("cross-validated specificity", &rows, &cols, cell(|c| c.mean_specificity)));
    eprintln!("wrote {} results to {}", lines.len(), args.out.display());
    Ok(())
}
