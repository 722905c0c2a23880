//! From-scratch binary classifiers.
//!
//! Labels are `0`/`1` bytes throughout. Every learner is deterministic given
//! its parameters (including the seed), and every tie resolves to class 0
//! or to the lowest feature/threshold index.

mod boost;
mod forest;
mod kernel;
mod svm;
mod tree;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use boost::{fit_boost, BoostParams, BoostedTrees, EvalMetric, RoundMetrics};
pub use forest::{fit_forest, ForestParams, RandomForest};
pub use kernel::{kernel_eval, Gamma, KernelKind};
pub use svm::{fit_svm, SvmModel, SvmParams};
pub use tree::{fit_tree, DecisionTree, Node, TreeParams};

pub const MODEL_FORMAT: &str = "depscreen-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ModelError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("training labels contain a single class")]
    SingleClassTraining,
    #[error("label {0} is not 0 or 1")]
    BadLabel(u8),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("model file: {0}")]
    Format(String),
}

/// Problems that do not stop a fit but should be surfaced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelWarning {
    /// SMO hit its pass cap before `max_passes` quiet passes.
    NonConvergence { passes: usize },
}

/// Row-major dense matrix of model inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Result<Self, ModelError> {
        if data.len() != n_rows * n_cols {
            return Err(ModelError::DimensionMismatch { expected: n_rows * n_cols, found: data.len() });
        }
        Ok(Self { n_rows, n_cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, ModelError> {
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != n_cols {
                return Err(ModelError::DimensionMismatch { expected: n_cols, found: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { n_rows: rows.len(), n_cols, data })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_rows).map(move |i| self.row(i))
    }
}

fn check_training(x: &Matrix, y: &[u8]) -> Result<(), ModelError> {
    if x.n_rows() == 0 {
        return Err(ModelError::EmptyTrainingSet);
    }
    if y.len() != x.n_rows() {
        return Err(ModelError::DimensionMismatch { expected: x.n_rows(), found: y.len() });
    }
    if let Some(&bad) = y.iter().find(|&&l| l > 1) {
        return Err(ModelError::BadLabel(bad));
    }
    Ok(())
}

fn both_classes(y: &[u8]) -> bool {
    y.contains(&0) && y.contains(&1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    Tree,
    Forest,
    Boost,
    Svm,
}

/// An estimator together with its complete parameter assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelConfig {
    Tree(TreeParams),
    Forest(ForestParams),
    Boost(BoostParams),
    Svm(SvmParams),
}

impl ModelConfig {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelConfig::Tree(_) => ModelKind::Tree,
            ModelConfig::Forest(_) => ModelKind::Forest,
            ModelConfig::Boost(_) => ModelKind::Boost,
            ModelConfig::Svm(_) => ModelKind::Svm,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            ModelConfig::Tree(p) => p.seed,
            ModelConfig::Forest(p) => p.seed,
            ModelConfig::Boost(p) => p.seed,
            ModelConfig::Svm(p) => p.seed,
        }
    }

    /// Fits the configured estimator. `feature_keys` names the columns of `x`
    /// and is checked again at prediction time.
    pub fn fit(&self, x: &Matrix, y: &[u8], feature_keys: &[String]) -> Result<FittedModel, ModelError> {
        if feature_keys.len() != x.n_cols() {
            return Err(ModelError::DimensionMismatch { expected: x.n_cols(), found: feature_keys.len() });
        }
        let mut warnings = Vec::new();
        let learned = match self {
            ModelConfig::Tree(p) => Learned::Tree(fit_tree(x, y, p)?),
            ModelConfig::Forest(p) => Learned::Forest(fit_forest(x, y, p)?),
            ModelConfig::Boost(p) => Learned::Boost(fit_boost(x, y, p)?),
            ModelConfig::Svm(p) => {
                let m = fit_svm(x, y, p)?;
                if !m.converged() {
                    warnings.push(ModelWarning::NonConvergence { passes: m.passes() });
                }
                Learned::Svm(m)
            }
        };
        Ok(FittedModel { learned, seed: self.seed(), feature_keys: feature_keys.to_vec(), warnings })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Learned {
    Tree(DecisionTree),
    Forest(RandomForest),
    Boost(BoostedTrees),
    Svm(SvmModel),
}

/// A trained classifier with the metadata needed to apply it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub learned: Learned,
    pub seed: u64,
    pub feature_keys: Vec<String>,
    pub warnings: Vec<ModelWarning>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    model: FittedModel,
}

impl FittedModel {
    pub fn kind(&self) -> ModelKind {
        match self.learned {
            Learned::Tree(_) => ModelKind::Tree,
            Learned::Forest(_) => ModelKind::Forest,
            Learned::Boost(_) => ModelKind::Boost,
            Learned::Svm(_) => ModelKind::Svm,
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> u8 {
        match &self.learned {
            Learned::Tree(m) => m.predict_row(row),
            Learned::Forest(m) => m.predict_row(row),
            Learned::Boost(m) => m.predict_row(row),
            Learned::Svm(m) => m.predict_row(row),
        }
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<u8>, ModelError> {
        if x.n_cols() != self.feature_keys.len() {
            return Err(ModelError::DimensionMismatch { expected: self.feature_keys.len(), found: x.n_cols() });
        }
        Ok(x.rows().map(|r| self.predict_row(r)).collect())
    }

    /// Versioned JSON dump; floats are written in round-trip form.
    pub fn to_json(&self) -> String {
        let file = ModelFile { format: MODEL_FORMAT.into(), version: MODEL_FORMAT_VERSION, model: self.clone() };
        serde_json::to_string(&file).expect("model serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| ModelError::Format(e.to_string()))?;
        if file.format != MODEL_FORMAT || file.version != MODEL_FORMAT_VERSION {
            return Err(ModelError::Format(format!("unsupported format {} v{}", file.format, file.version)));
        }
        Ok(file.model)
    }
}

/// Applies `model` to every row of `x`.
pub fn predict(model: &FittedModel, x: &Matrix) -> Result<Vec<u8>, ModelError> {
    model.predict(x)
}
