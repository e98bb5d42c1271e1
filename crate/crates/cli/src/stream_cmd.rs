//! Streaming pipeline over a watched directory or inline synthetic batches.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use fraudstream::models::{Family, HyperParams};
use fraudstream::stream::{
    directory_source, queue_stream_source, run_on_batches, summarize_stream, BatchSource, SlidingWindowSpec,
    StreamConfig, StreamOutcome, StreamSummary, StreamingContext, WindowRecord, WindowResult,
};
use fraudstream::synthgen::generate_batches;
use fraudstream::{Error, RecordBatch, RngSeed};
use log::{info, warn};
use serde::Serialize;

use crate::args::StreamArgs;
use crate::common::{balance_config, gan_config, gen_spec, parse_balancers, parse_models, parse_param, usage, write_file, CliError};

#[derive(Debug, Serialize)]
struct WindowLine<'a> {
    model: &'a str,
    #[serde(flatten)]
    record: WindowRecord,
}

fn hyper_params(args: &StreamArgs) -> Result<HyperParams, CliError> {
    let mut hp = HyperParams::new();
    for p in &args.params {
        let (key, mut values) = parse_param(p)?;
        if values.len() != 1 {
            return Err(usage(format!("stream --param takes a single value, got '{p}'")));
        }
        hp = hp.with(&key, values.remove(0));
    }
    Ok(hp)
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map_or_else(|| "stream_results".into(), |s| s.to_string_lossy().to_string());
    out.with_file_name(format!("{stem}.summary.json"))
}

fn write_plot(dir: &Path, model: &str, results: &[WindowResult]) -> Result<(), CliError> {
    let mut body = String::from("window_id,auc\n");
    for r in results {
        match &r.report {
            Some(rep) => writeln!(body, "{},{}", r.window_id, rep.auc),
            None => writeln!(body, "{},", r.window_id),
        }
        .expect("writing to a String");
    }
    write_file(&dir.join(format!("auc_{model}.csv")), body.as_bytes())
}

pub fn run(args: &StreamArgs) -> Result<(), CliError> {
    let models = parse_models(&args.models)?;
    let gan = gan_config(&args.balance);
    let mut balancers = parse_balancers(&args.balancer, &gan)?;
    if balancers.len() != 1 {
        return Err(usage("stream takes exactly one balancer"));
    }
    let balancer = balancers.remove(0);
    let window = SlidingWindowSpec::new(args.ws, args.sl)?;
    let hp = hyper_params(args)?;
    let seed = RngSeed(args.shared.seed);
    let config_for = |family: Family| StreamConfig {
        window,
        family,
        hyper_params: hp.clone(),
        balancer: balancer.clone(),
        balance: balance_config(&args.balance),
        normalize: true,
        measure_latency: !args.no_timing,
        seed,
    };

    let source: Box<dyn BatchSource> = match (&args.batches_dir, args.gen_inline) {
        (Some(dir), false) => Box::new(directory_source(dir, &args.label, args.poll_ms, args.idle_timeout_ms)?),
        (None, true) => {
            let batches = generate_batches(&gen_spec(&args.synth, args.shared.seed), args.batch_size)?;
            Box::new(queue_stream_source(batches, args.interval_ms)?)
        }
        _ => return Err(usage("stream needs exactly one of --batches-dir or --gen-inline")),
    };

    // The first model consumes the live source; the rest replay the batches it
    // collected, so every model sees the same stream.
    crate::common::create_parent(&args.out)?;
    let file = File::create(&args.out).map_err(|e| CliError::Run(Error::io(&args.out, e)))?;
    let mut out = BufWriter::new(file);
    let mut sink_error: Option<std::io::Error> = None;
    let mut outcomes: Vec<(Family, StreamOutcome)> = Vec::new();
    let mut write_line = |family: Family, r: &WindowResult, out: &mut BufWriter<File>| {
        let line = WindowLine { model: family.name(), record: r.to_json_record() };
        let json = serde_json::to_string(&line).expect("window lines serialize");
        if let Err(e) = writeln!(out, "{json}") {
            sink_error.get_or_insert(e);
        }
    };

    let first = models[0];
    let mut ctx = StreamingContext::new(source, config_for(first));
    ctx.start()?;
    let outcome = ctx.run_with(|r| write_line(first, r, &mut out));
    ctx.stop();
    let outcome = outcome?;
    let batches: Vec<RecordBatch> = outcome.table.batches().to_vec();
    info!("{first}: {} batches, {} windows", batches.len(), outcome.results.len());
    outcomes.push((first, outcome));
    for &family in &models[1..] {
        let outcome = run_on_batches(batches.clone(), config_for(family))?;
        for r in &outcome.results {
            write_line(family, r, &mut out);
        }
        outcomes.push((family, outcome));
    }
    if let Some(e) = sink_error {
        return Err(CliError::Run(Error::io(&args.out, e)));
    }
    out.flush().map_err(|e| CliError::Run(Error::io(&args.out, e)))?;

    if outcomes[0].1.results.is_empty() {
        warn!("{} batches do not fill a window of size {}; no windows evaluated", batches.len(), args.ws);
        return Ok(());
    }

    let plot_dir = args
        .plot_dir
        .clone()
        .unwrap_or_else(|| args.out.parent().map(Path::to_path_buf).unwrap_or_default());
    let mut summaries: BTreeMap<&str, Option<StreamSummary>> = BTreeMap::new();
    for (family, outcome) in &outcomes {
        write_plot(&plot_dir, family.name(), &outcome.results)?;
        let summary = match summarize_stream(&outcome.results) {
            Ok(s) => {
                println!(
                    "{:<6} windows {:>5}  evaluated {:>5}  auc {:.3}  sens {:.3}  spec {:.3}  p50 {:.1} ms  p95 {:.1} ms",
                    family.name(),
                    s.windows,
                    s.evaluated,
                    s.mean_auc,
                    s.mean_sensitivity,
                    s.mean_specificity,
                    s.latency_p50_ms,
                    s.latency_p95_ms
                );
                Some(s)
            }
            Err(Error::EmptyResult) => {
                eprintln!("warning: {family}: every window was skipped");
                None
            }
            Err(e) => return Err(e.into()),
        };
        summaries.insert(family.name(), summary);
    }
    let json = serde_json::to_string_pretty(&summaries).expect("summaries serialize");
    write_file(&summary_path(&args.out), json.as_bytes())?;
    Ok(())
}
