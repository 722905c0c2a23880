//! Depression screening workbench for timed two-speaker interview transcripts.
//!
//! The pipeline runs in five stages, one module each:
//!
//! 1. [`corpus`] parses, cleans, validates, labels and splits transcripts, and
//!    can generate synthetic fixture corpora.
//! 2. [`textproc`] holds the linguistic primitives (tokenizer, polarity scorer,
//!    part-of-speech tagger, stop-word and first-person lexica).
//! 3. [`features`] turns a session into a 30-value feature vector and a set of
//!    sessions into a labelled matrix.
//! 4. [`models`] fits decision trees, random forests, gradient-boosted trees and
//!    kernel SVMs from scratch.
//! 5. [`search`] enumerates feature subsets against parameter grids, evaluates
//!    each pair on a held-out split and ranks the results.

pub mod corpus;
pub mod features;
pub mod models;
pub mod search;
pub mod textproc;

pub use corpus::{Corpus, Label, Session, Speaker, Utterance};
pub use features::{FeatureExtractor, FeatureMatrix, FeatureVector};
pub use models::{FittedModel, Matrix, ModelConfig};
pub use search::{EvalResult, Leaderboard, SearchSpec};
