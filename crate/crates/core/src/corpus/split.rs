use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Corpus;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SplitError {
    #[error("session {0:?} has no label")]
    UnlabeledSession(String),
    #[error("split ratio {0} is outside (0, 1)")]
    BadRatio(f64),
    #[error("split plan line {line}: {detail}")]
    BadPlanLine { line: usize, detail: String },
    #[error("session {0:?} appears in both train and test")]
    Overlap(String),
    #[error("split plan does not cover session {0:?}")]
    Uncovered(String),
    #[error("split plan names unknown session {0:?}")]
    UnknownSession(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitParams {
    pub ratio: f64,
    pub seed: u64,
}

/// Disjoint train/test partition of session ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train_ids: BTreeSet<String>,
    pub test_ids: BTreeSet<String>,
    pub ratio: f64,
    /// `None` for plans read from a file.
    pub seed: Option<u64>,
}

/// Number of training sessions for `n` sessions at `ratio`, rounded up.
/// Products within 1e-9 of an integer count as that integer, so 0.8 * 185
/// yields 148 rather than 149.
pub fn train_count(n: usize, ratio: f64) -> usize {
    let exact = ratio * n as f64;
    let nearest = exact.round();
    let count = if (exact - nearest).abs() < 1e-9 { nearest } else { exact.ceil() };
    (count as usize).min(n)
}

/// Seeded shuffle of the (sorted) session ids; the first `ceil(ratio * n)` train.
pub fn split_corpus(corpus: &Corpus, params: SplitParams) -> Result<SplitPlan, SplitError> {
    if !(params.ratio > 0.0 && params.ratio < 1.0) {
        return Err(SplitError::BadRatio(params.ratio));
    }
    if let Some(s) = corpus.sessions().iter().find(|s| s.label.is_none()) {
        return Err(SplitError::UnlabeledSession(s.session_id.clone()));
    }
    let mut ids: Vec<String> = corpus.sessions().iter().map(|s| s.session_id.clone()).collect();
    ids.sort();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    ids.shuffle(&mut rng);
    let n_train = train_count(ids.len(), params.ratio);
    let test_ids = ids.split_off(n_train).into_iter().collect();
    Ok(SplitPlan { train_ids: ids.into_iter().collect(), test_ids, ratio: params.ratio, seed: Some(params.seed) })
}

impl SplitPlan {
    pub fn from_sets(train_ids: BTreeSet<String>, test_ids: BTreeSet<String>) -> Result<Self, SplitError> {
        if let Some(id) = train_ids.intersection(&test_ids).next() {
            return Err(SplitError::Overlap(id.clone()));
        }
        let n = train_ids.len() + test_ids.len();
        let ratio = if n == 0 { 0.0 } else { train_ids.len() as f64 / n as f64 };
        Ok(Self { train_ids, test_ids, ratio, seed: None })
    }

    /// Parses `session_id<TAB>train|test` lines. Blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self, SplitError> {
        let mut train = BTreeSet::new();
        let mut test = BTreeSet::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let bad = |detail: &str| SplitError::BadPlanLine { line: i + 1, detail: detail.to_string() };
            let (id, side) = line.split_once('\t').ok_or_else(|| bad("expected session_id<TAB>side"))?;
            let id = id.trim().to_string();
            let fresh = match side.trim() {
                "train" => !test.contains(&id) && train.insert(id.clone()),
                "test" => !train.contains(&id) && test.insert(id.clone()),
                other => return Err(bad(&format!("unknown side {other:?}"))),
            };
            if !fresh {
                return Err(SplitError::Overlap(id));
            }
        }
        Self::from_sets(train, test)
    }

    pub fn to_text(&self) -> String {
        let mut rows: Vec<(&str, &str)> = self.train_ids.iter().map(|id| (id.as_str(), "train")).collect();
        rows.extend(self.test_ids.iter().map(|id| (id.as_str(), "test")));
        rows.sort();
        rows.iter().map(|(id, side)| format!("{id}\t{side}\n")).collect()
    }

    /// Checks that the plan partitions exactly the sessions of `corpus`.
    pub fn check_covers(&self, corpus: &Corpus) -> Result<(), SplitError> {
        let ids: BTreeSet<&str> = corpus.sessions().iter().map(|s| s.session_id.as_str()).collect();
        if let Some(id) = ids.iter().find(|id| !self.train_ids.contains(**id) && !self.test_ids.contains(**id)) {
            return Err(SplitError::Uncovered(id.to_string()));
        }
        if let Some(id) = self.train_ids.iter().chain(&self.test_ids).find(|id| !ids.contains(id.as_str())) {
            return Err(SplitError::UnknownSession(id.clone()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.train_ids.len() + self.test_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Label, Provenance, Session};
    use proptest::prelude::*;

    fn labelled(n: usize) -> Corpus {
        let sessions =
            (0..n).map(|i| Session::new(format!("s{i:03}"), vec![]).with_label(Label::NotDepressed)).collect();
        Corpus::new(sessions, Provenance::Synthetic).unwrap()
    }

    #[test]
    fn paper_sized_split() {
        let plan = split_corpus(&labelled(185), SplitParams { ratio: 0.8, seed: 42 }).unwrap();
        assert_eq!((plan.train_ids.len(), plan.test_ids.len()), (148, 37));
    }

    #[test]
    fn same_seed_same_plan() {
        let c = labelled(10);
        let p = SplitParams { ratio: 0.5, seed: 7 };
        assert_eq!(split_corpus(&c, p).unwrap(), split_corpus(&c, p).unwrap());
        let other = split_corpus(&c, SplitParams { ratio: 0.5, seed: 8 }).unwrap();
        assert_eq!(other.train_ids.len(), 5);
    }

    #[test]
    fn single_session_goes_to_train() {
        let plan = split_corpus(&labelled(1), SplitParams { ratio: 0.8, seed: 0 }).unwrap();
        assert_eq!((plan.train_ids.len(), plan.test_ids.len()), (1, 0));
    }

    #[test]
    fn unlabelled_sessions_are_refused() {
        let c = Corpus::new(vec![Session::new("u", vec![])], Provenance::Real).unwrap();
        assert_eq!(
            split_corpus(&c, SplitParams { ratio: 0.8, seed: 0 }),
            Err(SplitError::UnlabeledSession("u".into()))
        );
    }

    #[test]
    fn plan_file_round_trip_and_coverage() {
        let c = labelled(6);
        let plan = split_corpus(&c, SplitParams { ratio: 0.5, seed: 3 }).unwrap();
        let parsed = SplitPlan::parse(&plan.to_text()).unwrap();
        assert_eq!(parsed.train_ids, plan.train_ids);
        assert_eq!(parsed.test_ids, plan.test_ids);
        parsed.check_covers(&c).unwrap();
        assert_eq!(parsed.check_covers(&labelled(7)), Err(SplitError::Uncovered("s006".into())));
    }

    #[test]
    fn plan_file_errors() {
        assert!(matches!(SplitPlan::parse("a\ttrain\na\ttest\n"), Err(SplitError::Overlap(_))));
        assert!(matches!(SplitPlan::parse("a\tvalidation\n"), Err(SplitError::BadPlanLine { line: 1, .. })));
        assert!(matches!(SplitPlan::parse("a train\n"), Err(SplitError::BadPlanLine { .. })));
    }

    proptest! {
        #[test]
        fn split_partitions(n in 1usize..200, ratio in 0.01f64..0.99, seed in any::<u64>()) {
            let c = labelled(n);
            let plan = split_corpus(&c, SplitParams { ratio, seed }).unwrap();
            prop_assert_eq!(plan.train_ids.len() + plan.test_ids.len(), n);
            prop_assert!(plan.train_ids.is_disjoint(&plan.test_ids));
            prop_assert_eq!(plan.train_ids.len(), train_count(n, ratio));
        }
    }
}
