//! CSV loading, cleansing, categorical encoding, min-max normalization and
//! stratified splitting.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::hash::{Hash, Hasher};
use std::path::Path;

use log::warn;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{seeded_rng, RngSeed};
use crate::types::{FeatureVector, Label, LabeledRecord};

pub const DEFAULT_NULL_DROP_THRESHOLD: f64 = 0.90;

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Text(String),
    Null,
}

impl Cell {
    fn parse(raw: &str) -> Cell {
        let s = raw.trim();
        if s.is_empty() {
            return Cell::Null;
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Cell::Num(v),
            _ => Cell::Text(s.to_string()),
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Cell::Null)
    }

    fn as_text(&self) -> Option<String> {
        match self {
            Cell::Num(v) => Some(v.to_string()),
            Cell::Text(s) => Some(s.clone()),
            Cell::Null => None,
        }
    }
}

// Exact equality; -0.0 and 0.0 compare equal as numbers do.
impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Cell::Num(a), Cell::Num(b)) => a == b,
            (Cell::Text(a), Cell::Text(b)) => a == b,
            (Cell::Null, Cell::Null) => true,
            _ => false,
        }
    }
}

impl Eq for Cell {}

impl Hash for Cell {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Cell::Num(v) => {
                0u8.hash(state);
                let v = if *v == 0.0 { 0.0f64 } else { *v };
                v.to_bits().hash(state);
            }
            Cell::Text(s) => {
                1u8.hash(state);
                s.hash(state);
            }
            Cell::Null => 2u8.hash(state),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub column_names: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub label_column: String,
    /// Categorical columns replaced by integer codes: code `i` stands for
    /// `encodings[column][i]`.
    pub encodings: BTreeMap<String, Vec<String>>,
}

impl RawTable {
    pub fn new(column_names: Vec<String>, rows: Vec<Vec<Cell>>, label_column: &str) -> Result<Self> {
        if !column_names.iter().any(|c| c == label_column) {
            return Err(Error::Schema(format!("label column '{label_column}' not found")));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != column_names.len() {
                return Err(Error::Parse {
                    row: i + 1,
                    message: format!("expected {} cells, found {}", column_names.len(), row.len()),
                });
            }
        }
        Ok(RawTable {
            column_names,
            rows,
            label_column: label_column.to_string(),
            encodings: BTreeMap::new(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    fn label_index(&self) -> usize {
        self.column_names
            .iter()
            .position(|c| *c == self.label_column)
            .expect("label column present by construction")
    }

    fn column(&self, j: usize) -> impl Iterator<Item = &Cell> {
        self.rows.iter().map(move |r| &r[j])
    }

    fn null_fraction(&self, j: usize) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.column(j).filter(|c| c.is_null()).count() as f64 / self.rows.len() as f64
    }

    fn distinct_count(&self, j: usize) -> usize {
        self.column(j).filter(|c| !c.is_null()).collect::<HashSet<_>>().len()
    }

    fn retain_columns(&mut self, keep: &[bool]) {
        let mut names = Vec::new();
        for (name, &k) in self.column_names.iter().zip(keep) {
            if k {
                names.push(name.clone());
            } else {
                self.encodings.remove(name);
            }
        }
        self.column_names = names;
        for row in &mut self.rows {
            let mut it = keep.iter();
            row.retain(|_| *it.next().unwrap());
        }
    }
}

/// Reads a comma-delimited UTF-8 file with a header row.
///
/// Cells that parse as finite numbers become [`Cell::Num`], empty cells
/// become [`Cell::Null`], everything else is text. Ragged rows are reported
/// with their 1-based data row number.
pub fn parse_csv(path: impl AsRef<Path>, label_column: &str) -> Result<RawTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, 0, e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if !headers.iter().any(|h| h == label_column) {
        return Err(Error::Schema(format!(
            "label column '{label_column}' not found in {}",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, i + 1, e))?;
        if rec.len() != headers.len() {
            return Err(Error::Parse {
                row: i + 1,
                message: format!("expected {} cells, found {}", headers.len(), rec.len()),
            });
        }
        rows.push(rec.iter().map(Cell::parse).collect());
    }
    RawTable::new(headers, rows, label_column)
}

fn csv_error(path: &Path, row: usize, e: csv::Error) -> Error {
    if e.is_io_error() {
        if let csv::ErrorKind::Io(io) = e.into_kind() {
            return Error::io(path, io);
        }
        unreachable!()
    }
    Error::Parse {
        row,
        message: e.to_string(),
    }
}

/// Cleansing pass, in this order:
///
/// 1. drop columns whose null fraction exceeds `null_drop_threshold`;
/// 2. drop exact duplicate rows, keeping the first occurrence;
/// 3. drop columns with at most one distinct non-null value;
/// 4. drop rows that still contain a null.
///
/// The pass repeats until nothing changes, since step 4 can leave a column
/// constant. The label column is never dropped. A table left without rows or
/// without feature columns is an [`Error::EmptyDataset`].
pub fn cleanse(table: &RawTable, null_drop_threshold: f64) -> Result<RawTable> {
    if table.rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut t = table.clone();
    loop {
        let before = (t.n_rows(), t.n_cols());
        cleanse_pass(&mut t, null_drop_threshold);
        if t.rows.is_empty() || t.n_cols() < 2 {
            return Err(Error::EmptyDataset);
        }
        if (t.n_rows(), t.n_cols()) == before {
            return Ok(t);
        }
    }
}

fn cleanse_pass(t: &mut RawTable, threshold: f64) {
    let label = t.label_index();
    let keep: Vec<bool> = (0..t.n_cols())
        .map(|j| j == label || t.null_fraction(j) <= threshold)
        .collect();
    t.retain_columns(&keep);

    let mut seen = HashSet::with_capacity(t.rows.len());
    t.rows.retain(|row| seen.insert(row.clone()));

    let label = t.label_index();
    let keep: Vec<bool> = (0..t.n_cols())
        .map(|j| j == label || t.distinct_count(j) > 1)
        .collect();
    t.retain_columns(&keep);

    t.rows.retain(|row| row.iter().all(|c| !c.is_null()));
}

/// Replaces every categorical column (any text cell) by integer codes ordered
/// by descending frequency, ties broken lexically.
pub fn encode_categoricals(table: &RawTable) -> RawTable {
    let mut t = table.clone();
    let label = t.label_index();
    for j in 0..t.n_cols() {
        if j == label || !t.column(j).any(|c| matches!(c, Cell::Text(_))) {
            continue;
        }
        let mut counts: HashMap<String, usize> = HashMap::new();
        for cell in t.column(j) {
            if let Some(s) = cell.as_text() {
                *counts.entry(s).or_default() += 1;
            }
        }
        let mut levels: Vec<(String, usize)> = counts.into_iter().collect();
        levels.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let code: HashMap<&str, usize> = levels
            .iter()
            .enumerate()
            .map(|(i, (s, _))| (s.as_str(), i))
            .collect();
        let codes: Vec<Cell> = t
            .column(j)
            .map(|c| match c.as_text() {
                Some(s) => Cell::Num(code[s.as_str()] as f64),
                None => Cell::Null,
            })
            .collect();
        for (row, c) in t.rows.iter_mut().zip(codes) {
            row[j] = c;
        }
        let name = t.column_names[j].clone();
        t.encodings
            .insert(name, levels.into_iter().map(|(s, _)| s).collect());
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub name: String,
    pub kind: ColumnKind,
    pub null_fraction: f64,
    pub distinct_count: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub columns: Vec<ColumnSummary>,
    pub encodings: BTreeMap<String, Vec<String>>,
    pub normalizer: Option<Normalizer>,
}

/// Per-column statistical summary of a table.
pub fn summarize(table: &RawTable) -> DatasetSchema {
    let columns = (0..table.n_cols())
        .map(|j| {
            let name = table.column_names[j].clone();
            let categorical = table.encodings.contains_key(&name)
                || table.column(j).any(|c| matches!(c, Cell::Text(_)));
            ColumnSummary {
                kind: if categorical {
                    ColumnKind::Categorical
                } else {
                    ColumnKind::Numeric
                },
                null_fraction: table.null_fraction(j),
                distinct_count: table.distinct_count(j),
                name,
            }
        })
        .collect();
    DatasetSchema {
        columns,
        encodings: table.encodings.clone(),
        normalizer: None,
    }
}

/// Accepted spellings of the two label values (case-insensitive).
#[derive(Debug, Clone)]
pub struct LabelAliases {
    pub positive: Vec<String>,
    pub negative: Vec<String>,
}

impl Default for LabelAliases {
    fn default() -> Self {
        LabelAliases {
            positive: vec!["1".into(), "true".into()],
            negative: vec!["0".into(), "false".into()],
        }
    }
}

impl LabelAliases {
    fn parse(&self, cell: &Cell) -> Option<Label> {
        match cell {
            Cell::Num(v) if *v == 1.0 => Some(Label::Positive),
            Cell::Num(v) if *v == 0.0 => Some(Label::Negative),
            Cell::Text(s) => {
                let s = s.to_ascii_lowercase();
                if self.positive.iter().any(|a| a.eq_ignore_ascii_case(&s)) {
                    Some(Label::Positive)
                } else if self.negative.iter().any(|a| a.eq_ignore_ascii_case(&s)) {
                    Some(Label::Negative)
                } else {
                    None
                }
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CleanDataset {
    pub records: Vec<LabeledRecord>,
    pub feature_names: Vec<String>,
    pub schema: DatasetSchema,
    pub positive_fraction: f64,
}

impl CleanDataset {
    pub fn new(records: Vec<LabeledRecord>, feature_names: Vec<String>, schema: DatasetSchema) -> Result<Self> {
        let positive_fraction = positive_fraction(&records)?;
        Ok(CleanDataset {
            records,
            feature_names,
            schema,
            positive_fraction,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }
}

fn positive_fraction(records: &[LabeledRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let pos = records.iter().filter(|r| r.label.is_positive()).count();
    if pos == 0 || pos == records.len() {
        return Err(Error::SingleClass);
    }
    Ok(pos as f64 / records.len() as f64)
}

/// Converts a cleansed, encoded table into labelled records.
pub fn to_dataset(table: &RawTable, aliases: &LabelAliases) -> Result<CleanDataset> {
    let (records, names) = table_records(table, aliases)?;
    CleanDataset::new(records, names, summarize(table))
}

/// Records and feature names of an all-numeric table, in row order. Unlike
/// [`to_dataset`] this accepts empty and single-class tables.
pub fn table_records(table: &RawTable, aliases: &LabelAliases) -> Result<(Vec<LabeledRecord>, Vec<String>)> {
    let label = table.label_index();
    let feature_cols: Vec<usize> = (0..table.n_cols()).filter(|&j| j != label).collect();
    if feature_cols.is_empty() {
        return Err(Error::Schema("no feature columns left after cleansing".into()));
    }
    let mut records = Vec::with_capacity(table.n_rows());
    for (i, row) in table.rows.iter().enumerate() {
        let lab = aliases.parse(&row[label]).ok_or_else(|| Error::Parse {
            row: i + 1,
            message: format!("label value {:?} is not a recognised 0/1 value", row[label]),
        })?;
        let values = feature_cols
            .iter()
            .map(|&j| match &row[j] {
                Cell::Num(v) => Ok(*v),
                other => Err(Error::Parse {
                    row: i + 1,
                    message: format!(
                        "column '{}' holds non-numeric cell {other:?}; encode categoricals first",
                        table.column_names[j]
                    ),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        records.push(LabeledRecord::new(FeatureVector::new(values)?, lab));
    }
    let names = feature_cols
        .iter()
        .map(|&j| table.column_names[j].clone())
        .collect();
    Ok((records, names))
}

/// parse → cleanse → encode → records.
pub fn load_dataset(path: impl AsRef<Path>, label_column: &str, null_drop_threshold: f64) -> Result<CleanDataset> {
    let raw = parse_csv(path, label_column)?;
    let clean = cleanse(&raw, null_drop_threshold)?;
    let encoded = encode_categoricals(&clean);
    to_dataset(&encoded, &LabelAliases::default())
}

/// Min-max scaling fitted on a training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl Normalizer {
    pub fn fit(train: &[LabeledRecord]) -> Result<Self> {
        let first = train.first().ok_or(Error::EmptyDataset)?;
        let d = first.dim();
        let mut mins = vec![f64::INFINITY; d];
        let mut maxs = vec![f64::NEG_INFINITY; d];
        for r in train {
            if r.dim() != d {
                return Err(Error::dim(d, r.dim()));
            }
            for (j, &v) in r.values().iter().enumerate() {
                mins[j] = mins[j].min(v);
                maxs[j] = maxs[j].max(v);
            }
        }
        for j in 0..d {
            if maxs[j] == mins[j] {
                warn!("feature {j} is constant on the training split; it will map to 0.0");
            }
        }
        Ok(Normalizer { mins, maxs })
    }

    pub fn dim(&self) -> usize {
        self.mins.len()
    }

    /// Scales into `[0, 1]`, clamping values outside the fitted range.
    pub fn transform(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .zip(self.mins.iter().zip(&self.maxs))
            .map(|(&v, (&lo, &hi))| {
                if hi > lo {
                    ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn apply(&self, records: &[LabeledRecord]) -> Result<Vec<LabeledRecord>> {
        records
            .iter()
            .map(|r| {
                if r.dim() != self.dim() {
                    return Err(Error::dim(self.dim(), r.dim()));
                }
                Ok(LabeledRecord::new(
                    FeatureVector::from_vec_unchecked(self.transform(r.values())),
                    r.label,
                ))
            })
            .collect()
    }
}

pub fn fit_normalizer(schema: &mut DatasetSchema, train: &[LabeledRecord]) -> Result<()> {
    schema.normalizer = Some(Normalizer::fit(train)?);
    Ok(())
}

pub fn apply_normalizer(schema: &DatasetSchema, records: &[LabeledRecord]) -> Result<Vec<LabeledRecord>> {
    let norm = schema
        .normalizer
        .as_ref()
        .ok_or_else(|| Error::Config("normalizer has not been fitted".into()))?;
    norm.apply(records)
}

/// Per-class stratified split. Each class contributes
/// `round(train_fraction * count)` records to the training side, clamped so
/// that both sides keep at least one record of every class. Records keep
/// their original relative order within each side.
pub fn stratified_split(
    records: &[LabeledRecord],
    train_fraction: f64,
    seed: RngSeed,
) -> Result<(Vec<LabeledRecord>, Vec<LabeledRecord>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Config(format!(
            "train_fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let mut rng = seeded_rng(seed);
    let mut in_train = vec![false; records.len()];
    for class in [Label::Negative, Label::Positive] {
        let mut idx: Vec<usize> = (0..records.len())
            .filter(|&i| records[i].label == class)
            .collect();
        if idx.len() < 2 {
            return Err(Error::Stratification(format!(
                "class {} has {} record(s); at least 2 are required",
                class.as_u8(),
                idx.len()
            )));
        }
        let n_train = ((train_fraction * idx.len() as f64).round() as usize).clamp(1, idx.len() - 1);
        idx.shuffle(&mut rng);
        for &i in &idx[..n_train] {
            in_train[i] = true;
        }
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (r, t) in records.iter().zip(in_train) {
        if t {
            train.push(r.clone());
        } else {
            test.push(r.clone());
        }
    }
    Ok((train, test))
}
