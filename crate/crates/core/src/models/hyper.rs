use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::Family;
use crate::error::{Error, Result};

pub const REGULARIZATION: &str = "regularization";
pub const MAX_ITER: &str = "max_iter";
pub const CRITERION: &str = "criterion";
pub const MAX_DEPTH: &str = "max_depth";
pub const ESTIMATORS: &str = "estimators";
pub const SOLVER: &str = "solver";
pub const K: &str = "k";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Float(f64),
    Text(String),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Float(v) => write!(f, "{v}"),
            ParamValue::Text(s) => f.write_str(s),
        }
    }
}

impl ParamValue {
    /// Integers, then floats, then text.
    pub fn parse(s: &str) -> ParamValue {
        let s = s.trim();
        if let Ok(v) = s.parse::<i64>() {
            ParamValue::Int(v)
        } else if let Ok(v) = s.parse::<f64>() {
            ParamValue::Float(v)
        } else {
            ParamValue::Text(s.to_string())
        }
    }
}

/// Family-specific settings keyed by name.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HyperParams(BTreeMap<String, ParamValue>);

impl HyperParams {
    pub fn new() -> Self {
        HyperParams::default()
    }

    pub fn with(mut self, key: &str, value: ParamValue) -> Self {
        self.0.insert(key.to_string(), value);
        self
    }

    pub fn int(self, key: &str, v: i64) -> Self {
        self.with(key, ParamValue::Int(v))
    }

    pub fn float(self, key: &str, v: f64) -> Self {
        self.with(key, ParamValue::Float(v))
    }

    pub fn text(self, key: &str, v: &str) -> Self {
        self.with(key, ParamValue::Text(v.to_string()))
    }

    pub fn get(&self, key: &str) -> Option<&ParamValue> {
        self.0.get(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &ParamValue)> {
        self.0.iter()
    }

    pub fn get_usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.0.get(key) {
            None => Ok(default),
            Some(ParamValue::Int(v)) if *v >= 0 => Ok(*v as usize),
            Some(other) => Err(Error::Config(format!("'{key}' must be a non-negative integer, got {other}"))),
        }
    }

    pub fn get_f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.0.get(key) {
            None => Ok(default),
            Some(ParamValue::Int(v)) => Ok(*v as f64),
            Some(ParamValue::Float(v)) => Ok(*v),
            Some(other) => Err(Error::Config(format!("'{key}' must be numeric, got {other}"))),
        }
    }

    pub fn get_str<'a>(&'a self, key: &str, default: &'a str) -> Result<&'a str> {
        match self.0.get(key) {
            None => Ok(default),
            Some(ParamValue::Text(s)) => Ok(s),
            Some(other) => Err(Error::Config(format!("'{key}' must be text, got {other}"))),
        }
    }

    /// Ordering key where smaller means simpler: fewer estimators, shallower
    /// trees, fewer iterations, then stronger regularization.
    pub fn simplicity_key(&self) -> (f64, f64, f64, f64) {
        let get = |k: &str| self.get_f64(k, 0.0).unwrap_or(0.0);
        (get(ESTIMATORS), get(MAX_DEPTH), get(MAX_ITER), -get(REGULARIZATION))
    }
}

impl fmt::Display for HyperParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        f.write_str(&parts.join(","))
    }
}

fn product(axes: &[(&str, Vec<ParamValue>)]) -> Vec<HyperParams> {
    let mut grid = vec![HyperParams::new()];
    for (key, values) in axes {
        grid = grid
            .into_iter()
            .flat_map(|hp| values.iter().map(move |v| hp.clone().with(key, v.clone())))
            .collect();
    }
    grid
}

fn ints(v: &[i64]) -> Vec<ParamValue> {
    v.iter().map(|&x| ParamValue::Int(x)).collect()
}

fn floats(v: &[f64]) -> Vec<ParamValue> {
    v.iter().map(|&x| ParamValue::Float(x)).collect()
}

fn texts(v: &[&str]) -> Vec<ParamValue> {
    v.iter().map(|s| ParamValue::Text(s.to_string())).collect()
}

/// Hyperparameter grid searched for each family.
///
/// The MLP grid holds only the `gd` solver; `l-bfgs` is not implemented.
pub fn default_grid(family: Family) -> Vec<HyperParams> {
    match family {
        Family::Nb => vec![HyperParams::new()],
        Family::Lr => product(&[
            (REGULARIZATION, floats(&[0.1, 0.01, 0.001])),
            (MAX_ITER, ints(&[10, 20, 30, 40, 50, 100, 500])),
        ]),
        Family::Svm => product(&[
            (REGULARIZATION, floats(&[0.1, 0.01])),
            (MAX_ITER, ints(&[30, 40, 50, 100])),
        ]),
        Family::Dt => product(&[(CRITERION, texts(&["gini", "entropy"])), (MAX_DEPTH, ints(&[5, 10, 15, 20]))]),
        Family::Rf | Family::Gbt => product(&[
            (MAX_DEPTH, ints(&[5, 10, 15, 20])),
            (ESTIMATORS, ints(&[10, 20, 30, 40, 50])),
        ]),
        Family::Mlp => product(&[(SOLVER, texts(&["gd"])), (MAX_ITER, ints(&[50, 100, 200, 300]))]),
        Family::Knn => vec![HyperParams::new().int(K, 5)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        let sizes: Vec<usize> = Family::ALL.iter().map(|&f| default_grid(f).len()).collect();
        assert_eq!(sizes, vec![1, 21, 8, 8, 20, 20, 1, 4]);
    }

    #[test]
    fn typed_access() {
        let hp = HyperParams::new().int(MAX_DEPTH, 5).float(REGULARIZATION, 0.1).text(CRITERION, "gini");
        assert_eq!(hp.get_usize(MAX_DEPTH, 0).unwrap(), 5);
        assert_eq!(hp.get_f64(MAX_DEPTH, 0.0).unwrap(), 5.0);
        assert_eq!(hp.get_str(CRITERION, "x").unwrap(), "gini");
        assert!(hp.get_usize(CRITERION, 0).is_err());
        assert_eq!(hp.get_usize(ESTIMATORS, 7).unwrap(), 7);
        assert_eq!(hp.to_string(), "criterion=gini,max_depth=5,regularization=0.1");
        assert_eq!(ParamValue::parse("0.01"), ParamValue::Float(0.01));
        assert_eq!(ParamValue::parse("10"), ParamValue::Int(10));
    }
}
