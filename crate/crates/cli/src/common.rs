use std::fmt;
use std::fs;
use std::path::Path;

use fraudstream::balance::{BalanceConfig, Balancer, BALANCER_NAMES};
use fraudstream::gan::GanConfig;
use fraudstream::models::{default_grid, Family, HyperParams, ParamValue};
use fraudstream::synthgen::GenSpec;
use fraudstream::{Error, RngSeed};

use crate::args::{BalanceArgs, SynthArgs};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, names or config; exit status 2.
    Usage(String),
    Run(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Run(Error::Config(_) | Error::UnsupportedSolver(_)) => 2,
            CliError::Run(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Run(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn split_list(s: &str) -> Vec<&str> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).collect()
}

pub fn parse_models(s: &str) -> Result<Vec<Family>, CliError> {
    let models: Vec<Family> = split_list(s).into_iter().map(str::parse).collect::<Result<_, Error>>()?;
    if models.is_empty() {
        return Err(usage("no models selected"));
    }
    Ok(models)
}

pub fn gan_config(args: &BalanceArgs) -> GanConfig {
    GanConfig { epochs: args.gan_epochs, batch_size: args.gan_batch, ..GanConfig::vanilla() }
}

pub fn parse_balancers(s: &str, gan: &GanConfig) -> Result<Vec<Balancer>, CliError> {
    let names = if s.trim() == "all" { BALANCER_NAMES.to_vec() } else { split_list(s) };
    if names.is_empty() {
        return Err(usage(format!("no balancer selected; valid names: {}", BALANCER_NAMES.join(", "))));
    }
    Ok(names.into_iter().map(|n| Balancer::from_name(n, gan)).collect::<Result<_, Error>>()?)
}

pub fn balance_config(args: &BalanceArgs) -> BalanceConfig {
    BalanceConfig {
        k_neighbors: args.k_neighbors,
        enn_k: args.enn_k,
        target_ratio: args.target_ratio,
        ..BalanceConfig::default()
    }
}

pub fn gen_spec(args: &SynthArgs, seed: u64) -> GenSpec {
    GenSpec {
        n_records: args.records,
        n_features: args.features,
        fraud_fraction: args.fraction,
        separation: args.separation,
        informative_features: args.informative,
        min_positives_per_batch: args.min_positives,
        seed: RngSeed(seed),
    }
}

/// Parses `key=v1,v2,...`.
pub fn parse_param(s: &str) -> Result<(String, Vec<ParamValue>), CliError> {
    let (key, values) = s.split_once('=').ok_or_else(|| usage(format!("--param expects KEY=VALUES, got '{s}'")))?;
    let values: Vec<ParamValue> = split_list(values).into_iter().map(ParamValue::parse).collect();
    if key.trim().is_empty() || values.is_empty() {
        return Err(usage(format!("--param expects KEY=VALUES, got '{s}'")));
    }
    Ok((key.trim().to_string(), values))
}

/// The family's grid with each overridden axis replaced by the given values.
pub fn grid_for(family: Family, overrides: &[(String, Vec<ParamValue>)]) -> Vec<HyperParams> {
    let mut grid = default_grid(family);
    for (key, values) in overrides {
        if grid.iter().any(|hp| hp.get(key).is_some()) {
            let mut next = Vec::new();
            for hp in &grid {
                for v in values {
                    let candidate = hp.clone().with(key, v.clone());
                    if !next.contains(&candidate) {
                        next.push(candidate);
                    }
                }
            }
            grid = next;
        }
    }
    grid
}

pub fn create_parent(path: &Path) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::Run(Error::io(parent, e)))?;
    }
    Ok(())
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    create_parent(path)?;
    fs::write(path, bytes).map_err(|e| CliError::Run(Error::io(path, e)))
}

/// Rows = models, columns = balancers, three decimals.
pub fn render_table(title: &str, rows: &[String], cols: &[String], cell: impl Fn(usize, usize) -> Option<f64>) -> String {
    let width = cols.iter().map(|c| c.len()).max().unwrap_or(0).max(6) + 2;
    let mut out = format!("{title}\n{:<8}", "model");
    for c in cols {
        out.push_str(&format!("{c:>width$}"));
    }
    out.push('\n');
    for (i, r) in rows.iter().enumerate() {
        out.push_str(&format!("{r:<8}"));
        for j in 0..cols.len() {
            let v = cell(i, j).map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
            out.push_str(&format!("{v:>width$}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_replace_axes() {
        let o = vec![parse_param("max_depth=5,10").unwrap(), parse_param("estimators=20").unwrap()];
        assert_eq!(grid_for(Family::Rf, &o).len(), 2);
        assert_eq!(grid_for(Family::Lr, &o).len(), 21);
        assert!(parse_param("nokey").is_err());
    }

    #[test]
    fn unknown_names_exit_two() {
        let e = parse_balancers("smote,magic", &GanConfig::vanilla()).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("smote-tomek"));
        assert_eq!(parse_models("rf,xgb").unwrap_err().exit_code(), 2);
        assert_eq!(parse_balancers("all", &GanConfig::vanilla()).unwrap().len(), 7);
    }

    #[test]
    fn table_layout() {
        let t = render_table("AUC", &["rf".into()], &["none".into(), "smote".into()], |_, j| Some(0.5 + j as f64 * 0.1234));
        assert!(t.contains("0.500") && t.contains("0.623"), "{t}");
    }
}
