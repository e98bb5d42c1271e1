//! Micro-batch stream engine: sources, the append-only batch table and the
//! sliding-window train/test executor.
//!
//! A producer thread pulls batches from a [`BatchSource`] and hands them to
//! the executor over a bounded channel of capacity `window_size + 2`. The
//! executor appends every batch to an [`UnboundedTable`]; whenever a full
//! window is available it fits a fresh model on the first `window_size - 1`
//! batches and evaluates it on the last one, then slides by `slide` batches.

use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::sync::mpsc::sync_channel;
use std::thread;
use std::time::{Duration, Instant};

use log::{debug, info, warn};
use serde::{Deserialize, Serialize};

use crate::balance::{BalanceConfig, Balancer};
use crate::error::{Error, Result};
use crate::eval::evaluate;
use crate::ingest::{parse_csv, table_records, LabelAliases, Normalizer};
use crate::models::{fit, Family, HyperParams};
use crate::rng::RngSeed;
use crate::types::{EvalReport, LabeledRecord, RecordBatch};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlidingWindowSpec {
    pub window_size: usize,
    pub slide: usize,
}

impl Default for SlidingWindowSpec {
    fn default() -> Self {
        SlidingWindowSpec { window_size: 2, slide: 1 }
    }
}

impl SlidingWindowSpec {
    pub fn new(window_size: usize, slide: usize) -> Result<Self> {
        if window_size < 2 {
            return Err(Error::Config(format!(
                "window size must be at least 2 (one training and one test batch), got {window_size}"
            )));
        }
        if slide < 1 {
            return Err(Error::Config("sliding interval must be at least 1".into()));
        }
        Ok(SlidingWindowSpec { window_size, slide })
    }

    /// Number of complete windows over `n_batches` batches.
    pub fn window_count(&self, n_batches: usize) -> usize {
        if n_batches < self.window_size {
            0
        } else {
            (n_batches - self.window_size) / self.slide + 1
        }
    }

    /// Table position of the first batch of window `w`.
    pub fn window_start(&self, w: usize) -> usize {
        w * self.slide
    }
}

/// Append-only log of arrived batches.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UnboundedTable {
    batches: Vec<RecordBatch>,
    dim: Option<usize>,
}

impl UnboundedTable {
    pub fn new() -> Self {
        UnboundedTable::default()
    }

    /// Rejects batches whose index does not exceed the last one, or whose
    /// records disagree with the feature dimension seen so far.
    pub fn append(&mut self, batch: RecordBatch) -> Result<()> {
        if let Some(last) = self.batches.last() {
            if batch.batch_index <= last.batch_index {
                return Err(Error::State(format!(
                    "batch index {} does not follow {}",
                    batch.batch_index, last.batch_index
                )));
            }
        }
        if let Some(d) = batch.dim() {
            match self.dim {
                Some(expected) if expected != d => return Err(Error::dim(expected, d)),
                _ => self.dim = Some(d),
            }
        }
        self.batches.push(batch);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.batches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.batches.is_empty()
    }

    pub fn batches(&self) -> &[RecordBatch] {
        &self.batches
    }

    pub fn get(&self, position: usize) -> Option<&RecordBatch> {
        self.batches.get(position)
    }
}

/// Blocking supplier of batches; `Ok(None)` marks the end of the stream.
pub trait BatchSource: Send {
    fn next_batch(&mut self) -> Result<Option<RecordBatch>>;
}

/// Replays prepared batches, one per `interval`.
#[derive(Debug)]
pub struct QueueSource {
    queue: VecDeque<RecordBatch>,
    interval: Duration,
    emitted: usize,
}

/// Builds a replay source. An interval of 0 emits as fast as the consumer reads.
pub fn queue_stream_source(batches: Vec<RecordBatch>, interval_ms: u64) -> Result<QueueSource> {
    if batches.is_empty() {
        return Err(Error::Config("queue stream needs at least one batch".into()));
    }
    for w in batches.windows(2) {
        if w[1].batch_index <= w[0].batch_index {
            return Err(Error::State(format!(
                "batch indices must increase, got {} after {}",
                w[1].batch_index, w[0].batch_index
            )));
        }
    }
    Ok(QueueSource { queue: batches.into(), interval: Duration::from_millis(interval_ms), emitted: 0 })
}

impl BatchSource for QueueSource {
    fn next_batch(&mut self) -> Result<Option<RecordBatch>> {
        let Some(batch) = self.queue.pop_front() else {
            return Ok(None);
        };
        if self.emitted > 0 && !self.interval.is_zero() {
            thread::sleep(self.interval);
        }
        self.emitted += 1;
        Ok(Some(batch))
    }
}

/// Name of the n-th (1-based) batch file.
pub fn batch_file_name(n: u64) -> String {
    format!("batch_{n:06}.csv")
}

/// File whose presence ends a directory stream.
pub const END_MARKER: &str = "END";

/// Watches a directory for `batch_000001.csv`, `batch_000002.csv`, ... and
/// emits them in order. Batch file n gets batch index n - 1. The stream ends
/// when the next file is missing and either an `END` file exists or nothing
/// has arrived for `idle_timeout`. Writers should create each file
/// atomically (write elsewhere, then rename into place).
#[derive(Debug)]
pub struct DirectorySource {
    dir: PathBuf,
    label_column: String,
    next: u64,
    poll: Duration,
    idle_timeout: Duration,
    last_arrival: Instant,
    epoch: Instant,
}

pub fn directory_source(
    dir: impl AsRef<Path>,
    label_column: &str,
    poll_ms: u64,
    idle_timeout_ms: u64,
) -> Result<DirectorySource> {
    let dir = dir.as_ref().to_path_buf();
    if !dir.is_dir() {
        return Err(Error::Config(format!("{} is not a directory", dir.display())));
    }
    let now = Instant::now();
    Ok(DirectorySource {
        dir,
        label_column: label_column.to_string(),
        next: 1,
        poll: Duration::from_millis(poll_ms.max(1)),
        idle_timeout: Duration::from_millis(idle_timeout_ms),
        last_arrival: now,
        epoch: now,
    })
}

/// Reads one numeric batch file with a header row.
pub fn read_batch_csv(path: &Path, label_column: &str, batch_index: u64, arrival_ms: u64) -> Result<RecordBatch> {
    let table = parse_csv(path, label_column)?;
    let (records, _) = table_records(&table, &LabelAliases::default())?;
    RecordBatch::new(records, batch_index, arrival_ms)
}

impl BatchSource for DirectorySource {
    fn next_batch(&mut self) -> Result<Option<RecordBatch>> {
        loop {
            let path = self.dir.join(batch_file_name(self.next));
            if path.is_file() {
                let arrival = self.epoch.elapsed().as_millis() as u64;
                let batch = read_batch_csv(&path, &self.label_column, self.next - 1, arrival)?;
                debug!("read {}", path.display());
                self.next += 1;
                self.last_arrival = Instant::now();
                return Ok(Some(batch));
            }
            if self.dir.join(END_MARKER).exists() || self.last_arrival.elapsed() >= self.idle_timeout {
                return Ok(None);
            }
            thread::sleep(self.poll);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamConfig {
    pub window: SlidingWindowSpec,
    pub family: Family,
    pub hyper_params: HyperParams,
    /// Applied to each window's training batches only.
    pub balancer: Balancer,
    pub balance: BalanceConfig,
    /// Min-max scale each window with bounds fitted on its training batches.
    pub normalize: bool,
    /// Record wall-clock latency; when off every latency is 0.
    pub measure_latency: bool,
    pub seed: RngSeed,
}

impl StreamConfig {
    pub fn new(family: Family, hyper_params: HyperParams) -> Self {
        StreamConfig {
            window: SlidingWindowSpec::default(),
            family,
            hyper_params,
            balancer: Balancer::None,
            balance: BalanceConfig::default(),
            normalize: true,
            measure_latency: true,
            seed: RngSeed(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowResult {
    pub window_id: usize,
    pub train_batch_indices: Vec<u64>,
    pub test_batch_index: u64,
    /// `None` when the window was skipped.
    pub report: Option<EvalReport>,
    pub latency_ms: f64,
    pub skip_reason: Option<String>,
}

impl WindowResult {
    pub fn skipped(&self) -> bool {
        self.report.is_none()
    }

    pub fn to_json_record(&self) -> WindowRecord {
        let r = self.report.as_ref();
        WindowRecord {
            window_id: self.window_id,
            auc: r.map(|r| r.auc),
            sensitivity: r.map(|r| r.sensitivity),
            specificity: r.map(|r| r.specificity),
            tp: r.map(|r| r.confusion.true_positives),
            fn_: r.map(|r| r.confusion.false_negatives),
            tn: r.map(|r| r.confusion.true_negatives),
            fp: r.map(|r| r.confusion.false_positives),
            latency_ms: self.latency_ms,
            skipped: self.skipped(),
        }
    }
}

/// Flat per-window output line; metrics are null for skipped windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRecord {
    pub window_id: usize,
    pub auc: Option<f64>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub tp: Option<u64>,
    #[serde(rename = "fn")]
    pub fn_: Option<u64>,
    pub tn: Option<u64>,
    pub fp: Option<u64>,
    pub latency_ms: f64,
    pub skipped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContextState {
    Created,
    Started,
    Stopped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamOutcome {
    pub results: Vec<WindowResult>,
    pub table: UnboundedTable,
}

pub struct StreamingContext {
    state: ContextState,
    source: Option<Box<dyn BatchSource>>,
    config: StreamConfig,
}

impl StreamingContext {
    pub fn new(source: Box<dyn BatchSource>, config: StreamConfig) -> Self {
        StreamingContext { state: ContextState::Created, source: Some(source), config }
    }

    pub fn state(&self) -> ContextState {
        self.state
    }

    pub fn config(&self) -> &StreamConfig {
        &self.config
    }

    pub fn start(&mut self) -> Result<()> {
        match self.state {
            ContextState::Created => {
                self.state = ContextState::Started;
                Ok(())
            }
            other => Err(Error::State(format!("cannot start a context that is {other:?}"))),
        }
    }

    /// Terminal; a stopped context cannot be restarted.
    pub fn stop(&mut self) {
        self.state = ContextState::Stopped;
        self.source = None;
    }

    /// Consumes the source and runs every window; see [`StreamingContext::run_with`].
    pub fn run(&mut self) -> Result<StreamOutcome> {
        self.run_with(|_| {})
    }

    /// Runs the pipeline, passing each window result to `sink` as soon as it
    /// is available. Results arrive in window order.
    pub fn run_with(&mut self, mut sink: impl FnMut(&WindowResult)) -> Result<StreamOutcome> {
        if self.state != ContextState::Started {
            return Err(Error::State(format!("pipeline needs a started context, found {:?}", self.state)));
        }
        let mut source = self
            .source
            .take()
            .ok_or_else(|| Error::State("the source has already been consumed".into()))?;
        let cfg = self.config.clone();
        let (tx, rx) = sync_channel::<RecordBatch>(cfg.window.window_size + 2);
        let producer = thread::spawn(move || -> Result<usize> {
            let mut sent = 0;
            while let Some(batch) = source.next_batch()? {
                if tx.send(batch).is_err() {
                    break;
                }
                sent += 1;
            }
            Ok(sent)
        });

        let mut table = UnboundedTable::new();
        let mut results = Vec::new();
        let mut consumer_error = None;
        for batch in rx.iter() {
            if let Err(e) = table.append(batch) {
                consumer_error = Some(e);
                break;
            }
            while table.len() >= cfg.window.window_start(results.len()) + cfg.window.window_size {
                match run_window(&table, results.len(), &cfg) {
                    Ok(r) => {
                        sink(&r);
                        results.push(r);
                    }
                    Err(e) => {
                        consumer_error = Some(e);
                        break;
                    }
                }
            }
            if consumer_error.is_some() {
                break;
            }
        }
        // Dropping the receiver unblocks a producer stuck on a full channel.
        drop(rx);
        let produced = producer.join().map_err(|_| Error::State("source thread panicked".into()))?;
        if let Some(e) = consumer_error {
            return Err(e);
        }
        let produced = produced?;
        info!("stream ended after {produced} batches and {} windows", results.len());
        Ok(StreamOutcome { results, table })
    }
}

/// Starts the context if needed, runs it and stops it.
pub fn run_streaming_pipeline(ctx: &mut StreamingContext) -> Result<StreamOutcome> {
    if ctx.state() == ContextState::Created {
        ctx.start()?;
    }
    let out = ctx.run();
    ctx.stop();
    out
}

/// Replays `batches` through a fresh context as fast as possible.
pub fn run_on_batches(batches: Vec<RecordBatch>, config: StreamConfig) -> Result<StreamOutcome> {
    let source = queue_stream_source(batches, 0)?;
    let mut ctx = StreamingContext::new(Box::new(source), config);
    run_streaming_pipeline(&mut ctx)
}

fn run_window(table: &UnboundedTable, window_id: usize, cfg: &StreamConfig) -> Result<WindowResult> {
    let start = cfg.window.window_start(window_id);
    let ws = cfg.window.window_size;
    let batches = &table.batches()[start..start + ws];
    let (train_batches, test_batch) = batches.split_at(ws - 1);
    let test_batch = &test_batch[0];
    let train_batch_indices: Vec<u64> = train_batches.iter().map(|b| b.batch_index).collect();
    let timer = Instant::now();

    let skipped = |reason: String| WindowResult {
        window_id,
        train_batch_indices: train_batch_indices.clone(),
        test_batch_index: test_batch.batch_index,
        report: None,
        latency_ms: 0.0,
        skip_reason: Some(reason),
    };

    let mut train: Vec<LabeledRecord> = train_batches.iter().flat_map(|b| b.records.iter().cloned()).collect();
    let pos = train.iter().filter(|r| r.label.is_positive()).count();
    if pos == 0 || pos == train.len() {
        let e = Error::SingleClassWindow { window_id };
        warn!("{e}; window skipped");
        return Ok(skipped(e.to_string()));
    }
    let mut test = test_batch.records.clone();
    if cfg.normalize {
        let norm = Normalizer::fit(&train)?;
        train = norm.apply(&train)?;
        test = norm.apply(&test)?;
    }
    let wrap = |e: Error| Error::Window { window_id, source: Box::new(e) };
    let balance = cfg.balance.clone().with_seed(cfg.seed.for_role(1, window_id as u64));
    let train = cfg.balancer.apply(&train, &balance).map_err(wrap)?;
    let model = match fit(cfg.family, &train, &cfg.hyper_params, cfg.seed.for_role(2, window_id as u64)) {
        Ok(m) => m,
        Err(Error::SingleClass) => {
            let e = Error::SingleClassWindow { window_id };
            warn!("{e} after balancing; window skipped");
            return Ok(skipped(e.to_string()));
        }
        Err(e) => return Err(wrap(e)),
    };
    let report = evaluate(&model, &test).map_err(wrap)?;
    let latency_ms = if cfg.measure_latency { timer.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
    Ok(WindowResult {
        window_id,
        train_batch_indices,
        test_batch_index: test_batch.batch_index,
        report: Some(report),
        latency_ms,
        skip_reason: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamSummary {
    pub windows: usize,
    pub evaluated: usize,
    pub skipped_window_ids: Vec<usize>,
    pub mean_auc: f64,
    pub mean_sensitivity: f64,
    pub mean_specificity: f64,
    pub latency_p50_ms: f64,
    pub latency_p95_ms: f64,
    /// Per-window AUC in window order, `None` for skipped windows.
    pub auc_series: Vec<Option<f64>>,
}

/// Nearest-rank percentile of an ascending slice.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// Means over evaluated windows, latency percentiles and the AUC series.
pub fn summarize_stream(results: &[WindowResult]) -> Result<StreamSummary> {
    let reports: Vec<&EvalReport> = results.iter().filter_map(|r| r.report.as_ref()).collect();
    if reports.is_empty() {
        return Err(Error::EmptyResult);
    }
    let n = reports.len() as f64;
    let mut latencies: Vec<f64> = results.iter().filter(|r| !r.skipped()).map(|r| r.latency_ms).collect();
    latencies.sort_by(f64::total_cmp);
    Ok(StreamSummary {
        windows: results.len(),
        evaluated: reports.len(),
        skipped_window_ids: results.iter().filter(|r| r.skipped()).map(|r| r.window_id).collect(),
        mean_auc: reports.iter().map(|r| r.auc).sum::<f64>() / n,
        mean_sensitivity: reports.iter().map(|r| r.sensitivity).sum::<f64>() / n,
        mean_specificity: reports.iter().map(|r| r.specificity).sum::<f64>() / n,
        latency_p50_ms: percentile(&latencies, 0.5),
        latency_p95_ms: percentile(&latencies, 0.95),
        auc_series: results.iter().map(|r| r.report.as_ref().map(|r| r.auc)).collect(),
    })
}
