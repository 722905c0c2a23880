//! Per-session feature vectors and labelled feature matrices.
//!
//! A vector holds one answer-sentiment value per registered question,
//! keyed `q_<question key>`, followed by the eleven scalar features in
//! [`SCALAR_KEYS`] order. Missing data is encoded as 0.

mod matrix;
mod registry;
mod session;

use thiserror::Error;

pub use matrix::{build_matrix, FeatureMatrix};
pub use registry::{match_question, QuestionEntry, QuestionRegistry};
pub use session::{
    avg_characters, avg_response_time, avg_sentiment, avg_sw_frequency, avg_unique_frequency, collect_answer, fp_avg,
    pos_frequencies, question_sentiment_features, speech_speed, PosFrequencies,
};

use crate::corpus::Session;
use crate::textproc::{FirstPersonSet, PolarityLexicon, PosLexicon, StopwordSet};

pub const QUESTION_PREFIX: &str = "q_";

pub const SCALAR_KEYS: [&str; 11] = [
    "avg_sentiment",
    "avg_response_time",
    "speech_speed",
    "avg_unique_frequency",
    "avg_sw_frequency",
    "avg_characters",
    "avg_nouns",
    "avg_verbs",
    "adj_freq",
    "avg_adv",
    "fp_avg",
];

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FeatureError {
    #[error("unknown feature key {0:?}")]
    UnknownFeatureKey(String),
    #[error("session {0:?} has no label")]
    UnlabeledSession(String),
    #[error("feature rows disagree on key order (session {0:?})")]
    KeyMismatch(String),
    #[error("question registry: {0}")]
    Registry(String),
    #[error("feature CSV line {line}: {detail}")]
    Csv { line: usize, detail: String },
}

/// Feature values for one session in registry order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub session_id: String,
    keys: Vec<String>,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.keys.iter().position(|k| k == key).map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.keys.iter().map(String::as_str).zip(self.values.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// The four lexica consumed by feature extraction.
#[derive(Debug, Clone)]
pub struct Lexica {
    pub polarity: PolarityLexicon,
    pub pos: PosLexicon,
    pub stopwords: StopwordSet,
    pub first_person: FirstPersonSet,
}

impl Lexica {
    pub fn english() -> Self {
        Self {
            polarity: PolarityLexicon::english(),
            pos: PosLexicon::english(),
            stopwords: StopwordSet::english(),
            first_person: FirstPersonSet::english(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    registry: QuestionRegistry,
    lexica: Lexica,
    keys: Vec<String>,
}

impl FeatureExtractor {
    pub fn new(registry: QuestionRegistry, lexica: Lexica) -> Self {
        let keys: Vec<String> = registry
            .keys()
            .map(|k| format!("{QUESTION_PREFIX}{k}"))
            .chain(SCALAR_KEYS.iter().map(|k| k.to_string()))
            .collect();
        Self { registry, lexica, keys }
    }

    pub fn english() -> Self {
        Self::new(QuestionRegistry::default(), Lexica::english())
    }

    pub fn registry(&self) -> &QuestionRegistry {
        &self.registry
    }

    pub fn lexica(&self) -> &Lexica {
        &self.lexica
    }

    /// All feature keys in vector order.
    pub fn feature_keys(&self) -> &[String] {
        &self.keys
    }

    pub fn extract(&self, s: &Session) -> FeatureVector {
        extract_features(s, &self.registry, &self.lexica, &self.keys)
    }

    pub fn extract_all(&self, sessions: &[Session]) -> Vec<FeatureVector> {
        sessions.iter().map(|s| self.extract(s)).collect()
    }
}

fn extract_features(s: &Session, reg: &QuestionRegistry, lex: &Lexica, keys: &[String]) -> FeatureVector {
    let mut values = question_sentiment_features(s, reg, &lex.polarity);
    let pos = pos_frequencies(s, &lex.pos);
    values.extend([
        avg_sentiment(s, &lex.polarity),
        avg_response_time(s),
        speech_speed(s),
        avg_unique_frequency(s),
        avg_sw_frequency(s, &lex.stopwords),
        avg_characters(s),
        pos.nouns,
        pos.verbs,
        pos.adjectives,
        pos.adverbs,
        fp_avg(s, &lex.first_person),
    ]);
    debug_assert_eq!(values.len(), keys.len());
    debug_assert!(values.iter().all(|v| v.is_finite()));
    FeatureVector { session_id: s.session_id.clone(), keys: keys.to_vec(), values }
}
