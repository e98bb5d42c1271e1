//! Seeded synthetic transactions with a tunable class separation.
//!
//! Every feature starts as unit-variance Gaussian noise. Positive records are
//! shifted by `separation` on the first `informative_features` features. The
//! remaining features follow a two-component mixture (means -1 and +1, equal
//! weight) shared by both classes, so they carry no class signal. Records are
//! generated class by class, shuffled globally, then min-max scaled to [0, 1].

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{CleanDataset, ColumnKind, ColumnSummary, DatasetSchema, Normalizer};
use crate::rng::{seeded_rng, RngSeed};
use crate::stream::batch_file_name;
use crate::types::{Label, LabeledRecord, RecordBatch};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n_records: usize,
    pub n_features: usize,
    pub fraud_fraction: f64,
    /// Shift of the positive class mean, in noise standard deviations.
    pub separation: f64,
    pub informative_features: usize,
    pub min_positives_per_batch: usize,
    pub seed: RngSeed,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            n_records: 100_000,
            n_features: 10,
            fraud_fraction: 0.122,
            separation: 1.5,
            informative_features: 2,
            min_positives_per_batch: 2,
            seed: RngSeed(0),
        }
    }
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.fraud_fraction > 0.0 && self.fraud_fraction < 0.5) {
            return Err(Error::Config(format!("fraud fraction must lie in (0, 0.5), got {}", self.fraud_fraction)));
        }
        if !(self.separation >= 0.0 && self.separation.is_finite()) {
            return Err(Error::Config(format!("separation must be finite and >= 0, got {}", self.separation)));
        }
        if self.n_features == 0 || self.informative_features > self.n_features {
            return Err(Error::Config("need n_features >= 1 and informative_features <= n_features".into()));
        }
        let pos = self.positives();
        if pos == 0 || pos == self.n_records {
            return Err(Error::Config(format!("{} records at fraction {} leave one class empty", self.n_records, self.fraud_fraction)));
        }
        Ok(())
    }

    pub fn positives(&self) -> usize {
        (self.fraud_fraction * self.n_records as f64).round() as usize
    }

    pub fn feature_names(&self) -> Vec<String> {
        (0..self.n_features).map(|j| format!("f{j}")).collect()
    }
}

/// Raw, unscaled records in class order (positives first).
fn raw_records(spec: &GenSpec, rng: &mut impl Rng) -> Vec<(Vec<f64>, Label)> {
    let n_pos = spec.positives();
    (0..spec.n_records)
        .map(|i| {
            let label = if i < n_pos { Label::Positive } else { Label::Negative };
            let component = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let values = (0..spec.n_features)
                .map(|j| {
                    let noise: f64 = rng.sample(StandardNormal);
                    if j < spec.informative_features {
                        noise + if label.is_positive() { spec.separation } else { 0.0 }
                    } else {
                        noise + component
                    }
                })
                .collect();
            (values, label)
        })
        .collect()
}

/// Exactly `round(fraud_fraction * n_records)` positives, shuffled and scaled.
pub fn generate_dataset(spec: &GenSpec) -> Result<CleanDataset> {
    spec.validate()?;
    let mut rng = seeded_rng(spec.seed);
    let mut raw = raw_records(spec, &mut rng);
    raw.shuffle(&mut rng);
    let records: Vec<LabeledRecord> = raw
        .into_iter()
        .map(|(v, l)| LabeledRecord::from_values(v, l))
        .collect::<Result<_>>()?;
    let norm = Normalizer::fit(&records)?;
    let records = norm.apply(&records)?;

    let names = spec.feature_names();
    let mut columns: Vec<ColumnSummary> = names
        .iter()
        .enumerate()
        .map(|(j, name)| ColumnSummary {
            name: name.clone(),
            kind: ColumnKind::Numeric,
            null_fraction: 0.0,
            distinct_count: records.iter().map(|r| r.values()[j].to_bits()).collect::<HashSet<_>>().len(),
        })
        .collect();
    columns.push(ColumnSummary { name: "label".into(), kind: ColumnKind::Numeric, null_fraction: 0.0, distinct_count: 2 });
    let schema = DatasetSchema { columns, encodings: Default::default(), normalizer: Some(norm) };
    CleanDataset::new(records, names, schema)
}

/// Cuts the shuffled dataset into consecutive batches (the last may be
/// short), then swaps positives into batches below the minimum. Swaps take
/// the last positive of the batch with the largest surplus (lowest index on
/// ties) and the first negative of the deficient batch, so the multiset of
/// records is unchanged.
pub fn generate_batches(spec: &GenSpec, batch_size: usize) -> Result<Vec<RecordBatch>> {
    if batch_size == 0 {
        return Err(Error::Config("batch size must be positive".into()));
    }
    let dataset = generate_dataset(spec)?;
    let mut chunks: Vec<Vec<LabeledRecord>> = dataset.records.chunks(batch_size).map(<[_]>::to_vec).collect();
    repair_batches(&mut chunks, spec.min_positives_per_batch)?;
    chunks
        .into_iter()
        .enumerate()
        .map(|(b, records)| RecordBatch::new(records, b as u64, b as u64))
        .collect()
}

pub(crate) fn repair_batches(chunks: &mut [Vec<LabeledRecord>], min_pos: usize) -> Result<()> {
    let count = |c: &[LabeledRecord]| c.iter().filter(|r| r.label.is_positive()).count();
    let total: usize = chunks.iter().map(|c| count(c)).sum();
    if total < chunks.len() * min_pos {
        return Err(Error::Config(format!(
            "{total} positives cannot give {} batches at least {min_pos} each",
            chunks.len()
        )));
    }
    if let Some(small) = chunks.iter().position(|c| c.len() < min_pos) {
        return Err(Error::Config(format!("batch {small} holds fewer than {min_pos} records")));
    }
    let mut counts: Vec<usize> = chunks.iter().map(|c| count(c)).collect();
    for b in 0..chunks.len() {
        while counts[b] < min_pos {
            let donor = (0..chunks.len())
                .filter(|&d| counts[d] > min_pos)
                .max_by(|&x, &y| counts[x].cmp(&counts[y]).then(y.cmp(&x)))
                .expect("total positives cover every batch");
            let give = chunks[donor].iter().rposition(|r| r.label.is_positive()).expect("donor has positives");
            let take = chunks[b].iter().position(|r| !r.label.is_positive()).expect("deficient batch has negatives");
            let negative = chunks[b][take].clone();
            chunks[b][take] = std::mem::replace(&mut chunks[donor][give], negative);
            counts[donor] -= 1;
            counts[b] += 1;
        }
    }
    Ok(())
}

/// Writes `names..., label` rows; floats use the shortest exact representation.
pub fn write_records_csv<W: Write>(mut out: W, names: &[String], records: &[LabeledRecord]) -> Result<()> {
    let ser = |e: std::io::Error| Error::Serialization(e.to_string());
    let mut line = String::new();
    line.push_str(&names.join(","));
    line.push_str(",label\n");
    out.write_all(line.as_bytes()).map_err(ser)?;
    for r in records {
        line.clear();
        for v in r.values() {
            line.push_str(&v.to_string());
            line.push(',');
        }
        line.push_str(&r.label.as_u8().to_string());
        line.push('\n');
        out.write_all(line.as_bytes()).map_err(ser)?;
    }
    Ok(())
}

pub fn write_dataset_csv(path: impl AsRef<Path>, dataset: &CleanDataset) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    write_records_csv(&mut out, &dataset.feature_names, &dataset.records)?;
    out.flush().map_err(|e| Error::io(path, e))
}

/// Writes `batch_000001.csv`, ... into `dir`, each via a temporary file and
/// a rename so directory watchers never see partial files.
pub fn write_batch_files(dir: impl AsRef<Path>, names: &[String], batches: &[RecordBatch]) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (i, b) in batches.iter().enumerate() {
        let tmp = dir.join(format!(".{}.tmp", batch_file_name(i as u64 + 1)));
        let mut body = Vec::new();
        write_records_csv(&mut body, names, &b.records)?;
        fs::write(&tmp, body).map_err(|e| Error::io(&tmp, e))?;
        let dest = dir.join(batch_file_name(i as u64 + 1));
        fs::rename(&tmp, &dest).map_err(|e| Error::io(&dest, e))?;
    }
    Ok(())
}
