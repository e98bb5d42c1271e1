//! Fraud-detection analytics engine.
//!
//! The crate covers two workflows over labelled transaction records:
//!
//! * a static pipeline: CSV ingestion and cleansing, class rebalancing,
//!   stratified k-fold cross-validation with grid search, and significance
//!   tests over the per-fold metrics;
//! * a streaming pipeline: micro-batches arrive from a queue or a watched
//!   directory, and a sliding window trains on the first `ws - 1` batches and
//!   evaluates on the last one.
//!
//! Every randomized step takes an explicit [`RngSeed`], so identical inputs and
//! seeds give bit-identical outputs.

pub mod balance;
pub mod distance;
pub mod error;
pub mod eval;
pub mod gan;
pub mod ingest;
pub mod models;
pub mod rng;
pub mod stream;
pub mod synthgen;
pub mod types;

pub use distance::euclidean_distance;
pub use error::{Error, Result};
pub use rng::{seeded_rng, RngSeed, SeededRng};
pub use types::{ConfusionMatrix, EvalReport, FeatureVector, Label, LabeledRecord, RecordBatch};
