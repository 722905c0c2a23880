//! Exhaustive (or sampled) search over feature subsets and parameter grids.
//!
//! A [`SearchSpec`] defines an ordered stream of configurations: feature
//! subsets in lexicographic order of pool indices, and for each subset every
//! grid assignment in odometer order (the last declared parameter varies
//! fastest). A configuration's ordinal is its position in that stream and is
//! the final tie-breaker when ranking.

mod enumerate;
mod leaderboard;
mod params;
mod run;

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::features::FeatureError;
use crate::models::ModelError;

pub use enumerate::{count_subsets, enumerate_configs, unrank_subset, ConfigPoint, ConfigStream};
pub use leaderboard::{parse_leaderboard_csv, Leaderboard, LEADERBOARD_HEADER};
pub use run::{baseline_accuracy, evaluate_config, run_search, BaselineReport, ConfigFailure, Confusion, EvalResult};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SearchError {
    #[error("bad arguments: {0}")]
    BadArgs(String),
    #[error("bad search spec: {0}")]
    BadSpec(String),
    #[error("test set is empty")]
    EmptyTestSet,
    #[error("bad matrix: {0}")]
    BadMatrix(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("config #{ordinal}: {source}")]
    Config { ordinal: u64, source: ModelError },
    #[error("leaderboard line {line}: {detail}")]
    Csv { line: usize, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    #[serde(alias = "rf", alias = "random_forest")]
    Forest,
    #[serde(alias = "xgb", alias = "xgboost")]
    Boost,
    Svm,
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Estimator::Forest => "forest",
            Estimator::Boost => "boost",
            Estimator::Svm => "svm",
        })
    }
}

/// One grid value. Floats print in round-trip form with a decimal point so
/// that [`ParamValue::parse`] restores the same variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

impl ParamValue {
    pub fn parse(s: &str) -> Self {
        match s {
            "true" => return ParamValue::Bool(true),
            "false" => return ParamValue::Bool(false),
            _ => {}
        }
        if let Ok(i) = s.parse() {
            return ParamValue::Int(i);
        }
        match s.parse() {
            Ok(f) => ParamValue::Float(f),
            Err(_) => ParamValue::Text(s.to_string()),
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Bool(b) => write!(f, "{b}"),
            ParamValue::Int(i) => write!(f, "{i}"),
            ParamValue::Float(x) => write!(f, "{x:?}"),
            ParamValue::Text(s) => f.write_str(s),
        }
    }
}

/// A named parameter with the values it ranges over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxis {
    pub param: String,
    pub values: Vec<ParamValue>,
}

impl GridAxis {
    pub fn new(param: &str, values: Vec<ParamValue>) -> Self {
        Self { param: param.to_string(), values }
    }
}

/// A full parameter assignment in declared axis order.
pub type Assignment = Vec<(String, ParamValue)>;

pub fn format_assignment(a: &[(String, ParamValue)]) -> String {
    a.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

pub fn parse_assignment(s: &str) -> Result<Assignment, String> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';')
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.to_string(), ParamValue::parse(v)))
                .ok_or_else(|| format!("{kv:?} is not name=value"))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSpec {
    pub estimator: Estimator,
    pub feature_pool: Vec<String>,
    pub subset_size: usize,
    #[serde(default)]
    pub param_grid: Vec<GridAxis>,
    #[serde(default)]
    pub sample_limit: Option<u64>,
    /// Seeds both ordinal sampling and every fitted model.
    #[serde(default)]
    pub seed: u64,
}

impl SearchSpec {
    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: String| Err(SearchError::BadSpec(m));
        if self.subset_size == 0 || self.subset_size > self.feature_pool.len() {
            return bad(format!("subset_size {} not in 1..={}", self.subset_size, self.feature_pool.len()));
        }
        for (i, k) in self.feature_pool.iter().enumerate() {
            if self.feature_pool[..i].contains(k) {
                return bad(format!("feature {k} appears twice in the pool"));
            }
        }
        for (i, axis) in self.param_grid.iter().enumerate() {
            if axis.values.is_empty() {
                return bad(format!("parameter {} has no values", axis.param));
            }
            if self.param_grid[..i].iter().any(|a| a.param == axis.param) {
                return bad(format!("parameter {} declared twice", axis.param));
            }
            for v in &axis.values {
                params::check_param(self.estimator, &axis.param, v)?;
            }
        }
        if self.sample_limit == Some(0) {
            return bad("sample_limit must be positive".into());
        }
        self.total_configs()?;
        Ok(())
    }

    /// Product of axis lengths; an empty grid has one (default) assignment.
    pub fn grid_size(&self) -> u128 {
        self.param_grid.iter().map(|a| a.values.len() as u128).product()
    }

    /// Length of the unsampled stream.
    pub fn total_configs(&self) -> Result<u128, SearchError> {
        let subsets = count_subsets(self.feature_pool.len() as u64, self.subset_size as u64)?;
        subsets
            .checked_mul(self.grid_size())
            .ok_or_else(|| SearchError::BadSpec("configuration count overflows".into()))
    }

    /// Number of configurations actually emitted.
    pub fn emitted_configs(&self) -> Result<u128, SearchError> {
        let total = self.total_configs()?;
        Ok(self.sample_limit.map_or(total, |l| total.min(l as u128)))
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("spec serialises");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("f{i:02}")).collect()
    }

    #[test]
    fn param_values_round_trip_through_text() {
        for v in [
            ParamValue::Bool(true),
            ParamValue::Int(-3),
            ParamValue::Float(1.0),
            ParamValue::Float(1e-5),
            ParamValue::Float(0.05),
            ParamValue::Text("rbf".into()),
        ] {
            assert_eq!(ParamValue::parse(&v.to_string()), v);
        }
        let a = vec![("gamma".to_string(), ParamValue::Text("auto".into())), ("c".to_string(), ParamValue::Float(0.5))];
        assert_eq!(format_assignment(&a), "gamma=auto;c=0.5");
        assert_eq!(parse_assignment(&format_assignment(&a)).unwrap(), a);
        assert_eq!(parse_assignment("").unwrap(), vec![]);
    }

    #[test]
    fn spec_validation() {
        let mut s = SearchSpec {
            estimator: Estimator::Forest,
            feature_pool: pool(5),
            subset_size: 6,
            param_grid: vec![],
            sample_limit: None,
            seed: 0,
        };
        assert!(matches!(s.validate(), Err(SearchError::BadSpec(_))));
        s.subset_size = 2;
        assert!(s.validate().is_ok());
        s.param_grid.push(GridAxis::new("n_estimators", vec![]));
        assert!(matches!(s.validate(), Err(SearchError::BadSpec(_))));
        s.param_grid[0].values.push(ParamValue::Int(10));
        assert!(s.validate().is_ok());
        s.param_grid.push(GridAxis::new("kernel", vec![ParamValue::Text("rbf".into())]));
        assert!(matches!(s.validate(), Err(SearchError::BadSpec(_))));
        s.param_grid.pop();
        s.feature_pool[1] = s.feature_pool[0].clone();
        assert!(matches!(s.validate(), Err(SearchError::BadSpec(_))));
    }

    #[test]
    fn spec_json_and_digest_are_stable() {
        let s = SearchSpec {
            estimator: Estimator::Svm,
            feature_pool: pool(4),
            subset_size: 2,
            param_grid: vec![
                GridAxis::new("gamma", vec![ParamValue::Text("auto".into()), ParamValue::Float(0.1)]),
                GridAxis::new("kernel", vec![ParamValue::Text("rbf".into())]),
            ],
            sample_limit: Some(3),
            seed: 9,
        };
        let back: SearchSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.digest(), s.digest());
        assert_eq!(s.digest().len(), 64);
        assert_eq!(s.total_configs().unwrap(), 12);
        assert_eq!(s.emitted_configs().unwrap(), 3);
    }
}
