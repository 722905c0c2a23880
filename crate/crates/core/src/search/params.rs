use super::{Estimator, ParamValue, SearchError};
use crate::models::{BoostParams, EvalMetric, ForestParams, Gamma, KernelKind, ModelConfig, SvmParams};

fn bad(name: &str, v: &ParamValue, want: &str) -> SearchError {
    SearchError::BadSpec(format!("parameter {name}={v} must be {want}"))
}

fn as_usize(name: &str, v: &ParamValue) -> Result<usize, SearchError> {
    match v {
        ParamValue::Int(i) => usize::try_from(*i).map_err(|_| bad(name, v, "a non-negative integer")),
        _ => Err(bad(name, v, "a non-negative integer")),
    }
}

fn as_f64(name: &str, v: &ParamValue) -> Result<f64, SearchError> {
    match v {
        ParamValue::Int(i) => Ok(*i as f64),
        ParamValue::Float(x) if x.is_finite() => Ok(*x),
        _ => Err(bad(name, v, "a finite number")),
    }
}

fn as_bool(name: &str, v: &ParamValue) -> Result<bool, SearchError> {
    match v {
        ParamValue::Bool(b) => Ok(*b),
        _ => Err(bad(name, v, "true or false")),
    }
}

fn text_is(v: &ParamValue) -> Option<&str> {
    match v {
        ParamValue::Text(s) => Some(s.as_str()),
        _ => None,
    }
}

fn unknown(estimator: Estimator, name: &str) -> SearchError {
    SearchError::BadSpec(format!("unknown parameter {name} for {estimator}"))
}

fn set_forest(p: &mut ForestParams, name: &str, v: &ParamValue) -> Result<(), SearchError> {
    match name {
        "n_estimators" | "n_trees" => p.n_trees = as_usize(name, v)?,
        "max_depth" => p.max_depth = as_usize(name, v)?,
        "min_samples_split" => p.min_samples_split = as_usize(name, v)?,
        "max_features" | "features_per_split" => {
            p.features_per_split = match text_is(v) {
                Some("sqrt" | "auto") => None,
                _ => Some(as_usize(name, v)?),
            }
        }
        "bootstrap" => p.bootstrap = as_bool(name, v)?,
        _ => return Err(unknown(Estimator::Forest, name)),
    }
    Ok(())
}

fn set_boost(p: &mut BoostParams, name: &str, v: &ParamValue) -> Result<(), SearchError> {
    match name {
        "n_estimators" => p.n_estimators = as_usize(name, v)?,
        "learning_rate" | "eta" => p.learning_rate = as_f64(name, v)?,
        "max_depth" => p.max_depth = as_usize(name, v)?,
        "reg_lambda" | "lambda" | "leaf_regularization" => p.leaf_regularization = as_f64(name, v)?,
        "min_child_weight" => p.min_child_weight = as_f64(name, v)?,
        "eval_metric" => {
            p.eval_metric = match text_is(v) {
                Some("auc") => EvalMetric::Auc,
                Some("logloss") => EvalMetric::Logloss,
                _ => return Err(bad(name, v, "auc or logloss")),
            }
        }
        _ => return Err(unknown(Estimator::Boost, name)),
    }
    Ok(())
}

fn set_svm(p: &mut SvmParams, name: &str, v: &ParamValue) -> Result<(), SearchError> {
    match name {
        "kernel" => {
            p.kernel = match text_is(v) {
                Some("rbf") => KernelKind::Rbf,
                Some("linear") => KernelKind::Linear,
                _ => return Err(bad(name, v, "rbf or linear")),
            }
        }
        "gamma" => {
            p.gamma = match text_is(v) {
                Some("auto") => Gamma::Auto,
                _ => Gamma::Value(as_f64(name, v)?),
            }
        }
        "c" | "C" => p.c = as_f64(name, v)?,
        "tolerance" | "tol" => p.tolerance = as_f64(name, v)?,
        "max_passes" => p.max_passes = as_usize(name, v)?,
        "max_iterations" | "max_iter" => p.max_iterations = as_usize(name, v)?,
        _ => return Err(unknown(Estimator::Svm, name)),
    }
    Ok(())
}

/// Rejects names the estimator does not know and values of the wrong type.
pub(super) fn check_param(estimator: Estimator, name: &str, v: &ParamValue) -> Result<(), SearchError> {
    ModelConfig::from_assignment(estimator, &[(name.to_string(), v.clone())], 0).map(|_| ())
}

impl ModelConfig {
    /// Default parameters for `estimator`, overridden by `assignment`, with
    /// `seed` as the model seed.
    pub fn from_assignment(
        estimator: Estimator,
        assignment: &[(String, ParamValue)],
        seed: u64,
    ) -> Result<Self, SearchError> {
        match estimator {
            Estimator::Forest => {
                let mut p = ForestParams { seed, ..Default::default() };
                for (k, v) in assignment {
                    set_forest(&mut p, k, v)?;
                }
                Ok(ModelConfig::Forest(p))
            }
            Estimator::Boost => {
                let mut p = BoostParams { seed, ..Default::default() };
                for (k, v) in assignment {
                    set_boost(&mut p, k, v)?;
                }
                Ok(ModelConfig::Boost(p))
            }
            Estimator::Svm => {
                let mut p = SvmParams { seed, ..Default::default() };
                for (k, v) in assignment {
                    set_svm(&mut p, k, v)?;
                }
                Ok(ModelConfig::Svm(p))
            }
        }
    }
}
