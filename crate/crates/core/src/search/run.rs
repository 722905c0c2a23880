use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{enumerate_configs, Assignment, ConfigPoint, Leaderboard, SearchError, SearchSpec};
use crate::features::FeatureMatrix;
use crate::models::ModelConfig;

/// Fraction of `labels` equal to `constant`.
pub fn baseline_accuracy(labels: &[u8], constant: u8) -> Result<f64, SearchError> {
    if labels.is_empty() {
        return Err(SearchError::EmptyTestSet);
    }
    if constant > 1 {
        return Err(SearchError::BadArgs(format!("constant {constant} is not 0 or 1")));
    }
    Ok(labels.iter().filter(|&&l| l == constant).count() as f64 / labels.len() as f64)
}

/// Both constant-prediction baselines on one label set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub n: usize,
    pub zeros: usize,
    pub ones: usize,
    pub accuracy_zero: f64,
    pub accuracy_one: f64,
}

impl BaselineReport {
    pub fn new(labels: &[u8]) -> Result<Self, SearchError> {
        let ones = labels.iter().filter(|&&l| l == 1).count();
        Ok(Self {
            n: labels.len(),
            zeros: labels.len() - ones,
            ones,
            accuracy_zero: baseline_accuracy(labels, 0)?,
            accuracy_one: baseline_accuracy(labels, 1)?,
        })
    }

    pub fn best(&self) -> f64 {
        self.accuracy_zero.max(self.accuracy_one)
    }
}

/// Confusion counts with class 1 as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn from_predictions(truth: &[u8], predicted: &[u8]) -> Self {
        let mut c = Confusion::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            match (t, p) {
                (1, 1) => c.tp += 1,
                (0, 1) => c.fp += 1,
                (0, _) => c.tn += 1,
                _ => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// `(tp + tn) / total`, computed from the integer counts.
    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub ordinal: u64,
    pub feature_subset: Vec<String>,
    pub params: Assignment,
    pub accuracy: f64,
    pub confusion: Confusion,
}

/// A configuration that could not be fitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigFailure {
    pub ordinal: u64,
    pub error: String,
}

fn check_matrices(train: &FeatureMatrix, test: &FeatureMatrix) -> Result<(), SearchError> {
    if train.feature_keys() != test.feature_keys() {
        return Err(SearchError::BadMatrix("train and test have different feature columns".into()));
    }
    if test.n_rows() == 0 {
        return Err(SearchError::EmptyTestSet);
    }
    Ok(())
}

/// Fits `point` on `train` and scores it on `test`.
pub fn evaluate_config(
    spec: &SearchSpec,
    point: &ConfigPoint,
    train: &FeatureMatrix,
    test: &FeatureMatrix,
) -> Result<EvalResult, SearchError> {
    check_matrices(train, test)?;
    let tag = |source| SearchError::Config { ordinal: point.ordinal, source };
    let cfg = ModelConfig::from_assignment(spec.estimator, &point.params, spec.seed)?;
    let x_train = train.select(&point.feature_subset)?;
    let x_test = test.select(&point.feature_subset)?;
    let model = cfg.fit(&x_train, train.labels(), &point.feature_subset).map_err(tag)?;
    let predicted = model.predict(&x_test).map_err(tag)?;
    let confusion = Confusion::from_predictions(test.labels(), &predicted);
    Ok(EvalResult {
        ordinal: point.ordinal,
        feature_subset: point.feature_subset.clone(),
        params: point.params.clone(),
        accuracy: confusion.accuracy(),
        confusion,
    })
}

/// Evaluates every configuration of `spec` on `parallelism` threads.
///
/// Results are gathered in ordinal order before ranking, so the leaderboard
/// does not depend on scheduling. Per-configuration model errors are recorded
/// in [`Leaderboard::failures`]; only spec and matrix problems abort.
pub fn run_search(
    spec: &SearchSpec,
    train: &FeatureMatrix,
    test: &FeatureMatrix,
    parallelism: usize,
) -> Result<Leaderboard, SearchError> {
    if parallelism == 0 {
        return Err(SearchError::BadArgs("parallelism must be positive".into()));
    }
    check_matrices(train, test)?;
    for key in &spec.feature_pool {
        train.column_index(key)?;
    }
    let points: Vec<ConfigPoint> = enumerate_configs(spec)?.collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| SearchError::BadArgs(e.to_string()))?;
    let done = AtomicUsize::new(0);
    let step = (points.len() / 10).max(1);
    let outcomes: Vec<Result<EvalResult, SearchError>> = pool.install(|| {
        points
            .par_iter()
            .map(|p| {
                let r = evaluate_config(spec, p, train, test);
                let n = done.fetch_add(1, Ordering::Relaxed) + 1;
                if n.is_multiple_of(step) {
                    log::info!("{} search: {n}/{} configs evaluated", spec.estimator, points.len());
                }
                r
            })
            .collect()
    });
    let mut results = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for (p, outcome) in points.iter().zip(outcomes) {
        match outcome {
            Ok(r) => results.push(r),
            Err(e) => failures.push(ConfigFailure { ordinal: p.ordinal, error: e.to_string() }),
        }
    }
    if !failures.is_empty() {
        log::warn!("{} of {} configs failed", failures.len(), points.len());
    }
    Ok(Leaderboard::new(results, failures, spec.digest()))
}
