//! Transcript corpora: parsing, cleaning, validation, labels and splits.

mod clean;
mod labels;
mod split;
mod synth;
mod transcript;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use clean::{clean_session, clean_utterance, CleaningPolicy, PolicyError};
pub use labels::{load_labels, LabelError, LabelTable};
pub use split::{split_corpus, SplitError, SplitParams, SplitPlan};
pub use synth::{generate_synthetic_corpus, SynthError, SynthSpec, SyntheticCorpus, QUESTION_PROMPTS};
pub use transcript::{parse_transcript, parse_transcript_lenient, write_transcript, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Speaker {
    Bot,
    Participant,
}

impl Speaker {
    /// Maps a transcript speaker cell, case-insensitively.
    pub fn from_label(raw: &str) -> Option<Self> {
        match raw.trim().to_ascii_lowercase().as_str() {
            "ellie" | "bot" => Some(Speaker::Bot),
            "participant" => Some(Speaker::Participant),
            _ => None,
        }
    }

    pub fn as_label(self) -> &'static str {
        match self {
            Speaker::Bot => "Ellie",
            Speaker::Participant => "Participant",
        }
    }
}

/// Binary depression label. `Depressed` is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    NotDepressed = 0,
    Depressed = 1,
}

impl Label {
    pub fn from_bit(bit: u8) -> Option<Self> {
        match bit {
            0 => Some(Label::NotDepressed),
            1 => Some(Label::Depressed),
            _ => None,
        }
    }

    pub fn bit(self) -> u8 {
        self as u8
    }
}

/// One timed speaker turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    pub start_time: f64,
    pub stop_time: f64,
    pub speaker: Speaker,
    pub text: String,
}

impl Utterance {
    pub fn new(start_time: f64, stop_time: f64, speaker: Speaker, text: impl Into<String>) -> Self {
        Self { start_time, stop_time, speaker, text: text.into() }
    }

    pub fn duration(&self) -> f64 {
        self.stop_time - self.start_time
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub utterances: Vec<Utterance>,
    pub label: Option<Label>,
}

impl Session {
    /// Builds a session, stable-sorting utterances by start time.
    pub fn new(session_id: impl Into<String>, mut utterances: Vec<Utterance>) -> Self {
        utterances.sort_by(|a, b| a.start_time.total_cmp(&b.start_time));
        Self { session_id: session_id.into(), utterances, label: None }
    }

    pub fn with_label(mut self, label: Label) -> Self {
        self.label = Some(label);
        self
    }

    pub fn participant_utterances(&self) -> impl Iterator<Item = &Utterance> {
        self.utterances.iter().filter(|u| u.speaker == Speaker::Participant)
    }

    pub fn count(&self, speaker: Speaker) -> usize {
        self.utterances.iter().filter(|u| u.speaker == speaker).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Real,
    Synthetic,
}

#[derive(Debug, Error, PartialEq)]
pub enum CorpusError {
    #[error("duplicate session id {0:?}")]
    DuplicateSession(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    sessions: Vec<Session>,
    pub provenance: Provenance,
}

impl Corpus {
    pub fn new(sessions: Vec<Session>, provenance: Provenance) -> Result<Self, CorpusError> {
        let mut seen = BTreeSet::new();
        for s in &sessions {
            if !seen.insert(s.session_id.as_str()) {
                return Err(CorpusError::DuplicateSession(s.session_id.clone()));
            }
        }
        Ok(Self { sessions, provenance })
    }

    pub fn sessions(&self) -> &[Session] {
        &self.sessions
    }

    pub fn into_sessions(self) -> Vec<Session> {
        self.sessions
    }

    pub fn len(&self) -> usize {
        self.sessions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sessions.is_empty()
    }

    pub fn get(&self, session_id: &str) -> Option<&Session> {
        self.sessions.iter().find(|s| s.session_id == session_id)
    }

    /// Attaches labels from `table`; sessions missing from the table stay unlabelled.
    pub fn apply_labels(&mut self, table: &LabelTable) {
        for s in &mut self.sessions {
            s.label = table.get(&s.session_id);
        }
    }

    /// Keeps only the sessions accepted by [`validate_session`].
    pub fn retain_valid(&mut self) -> Vec<(String, RejectReason)> {
        let mut rejected = Vec::new();
        self.sessions.retain(|s| match validate_session(s) {
            Validation::Accept => true,
            Validation::Reject(reason) => {
                rejected.push((s.session_id.clone(), reason));
                false
            }
        });
        rejected
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RejectReason {
    NoBotUtterances,
    NoParticipantUtterances,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectReason::NoBotUtterances => "NoBotUtterances",
            RejectReason::NoParticipantUtterances => "NoParticipantUtterances",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validation {
    Accept,
    Reject(RejectReason),
}

/// Accepts a session only if both speaker roles are present.
///
/// Run this after cleaning so that utterances emptied by cleaning no longer count.
pub fn validate_session(s: &Session) -> Validation {
    if s.count(Speaker::Bot) == 0 {
        Validation::Reject(RejectReason::NoBotUtterances)
    } else if s.count(Speaker::Participant) == 0 {
        Validation::Reject(RejectReason::NoParticipantUtterances)
    } else {
        Validation::Accept
    }
}
