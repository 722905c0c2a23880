use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Session;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PolicyError {
    #[error("marker delimiter pair ({0:?}, {0:?}) uses the same character twice")]
    SelfPaired(char),
    #[error("marker delimiter {0:?} appears in more than one pair")]
    SharedDelimiter(char),
}

/// Text normalisation applied to every utterance before feature extraction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningPolicy {
    lowercase: bool,
    punctuation: BTreeSet<char>,
    markers: Vec<(char, char)>,
}

pub const DEFAULT_PUNCTUATION: &str = ",.[]()?!;:\"";
pub const DEFAULT_MARKERS: [(char, char); 3] = [('<', '>'), ('[', ']'), ('(', ')')];

impl Default for CleaningPolicy {
    fn default() -> Self {
        Self { lowercase: true, punctuation: DEFAULT_PUNCTUATION.chars().collect(), markers: DEFAULT_MARKERS.to_vec() }
    }
}

impl CleaningPolicy {
    pub fn new(
        lowercase: bool,
        punctuation: impl IntoIterator<Item = char>,
        markers: Vec<(char, char)>,
    ) -> Result<Self, PolicyError> {
        let mut used = BTreeSet::new();
        for &(open, close) in &markers {
            if open == close {
                return Err(PolicyError::SelfPaired(open));
            }
            for c in [open, close] {
                if !used.insert(c) {
                    return Err(PolicyError::SharedDelimiter(c));
                }
            }
        }
        Ok(Self { lowercase, punctuation: punctuation.into_iter().collect(), markers })
    }

    pub fn lowercase(&self) -> bool {
        self.lowercase
    }

    pub fn punctuation(&self) -> &BTreeSet<char> {
        &self.punctuation
    }

    pub fn markers(&self) -> &[(char, char)] {
        &self.markers
    }
}

fn strip_markers(text: &str, markers: &[(char, char)]) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let span_end = markers
            .iter()
            .find(|(open, _)| *open == c)
            .and_then(|&(_, close)| chars[i + 1..].iter().position(|&x| x == close))
            .map(|offset| i + 1 + offset);
        match span_end {
            // The span is replaced by a space so neighbouring words stay apart.
            Some(end) => {
                out.push(' ');
                i = end + 1;
            }
            None => {
                out.push(c);
                i += 1;
            }
        }
    }
    out
}

/// Removes marker spans, then punctuation, then lowercases and collapses whitespace.
pub fn clean_utterance(text: &str, policy: &CleaningPolicy) -> String {
    let unmarked = strip_markers(text, &policy.markers);
    let stripped: String = unmarked.chars().filter(|c| !policy.punctuation.contains(c)).collect();
    let cased = if policy.lowercase { stripped.to_lowercase() } else { stripped };
    cased.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Cleans every utterance in place and drops those left empty.
pub fn clean_session(session: &mut Session, policy: &CleaningPolicy) {
    for u in &mut session.utterances {
        u.text = clean_utterance(&u.text, policy);
    }
    session.utterances.retain(|u| !u.text.is_empty());
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_policy_on_mixed_utterance() {
        let p = CleaningPolicy::default();
        assert_eq!(clean_utterance("I'm FINE, really. <laughter>", &p), "i'm fine really");
        assert_eq!(clean_utterance("", &p), "");
        assert_eq!(clean_utterance("[sync] okay", &p), "okay");
    }

    #[test]
    fn markers_do_not_glue_words() {
        let p = CleaningPolicy::default();
        assert_eq!(clean_utterance("yes<sigh>no", &p), "yes no");
        assert_eq!(clean_utterance("so (um) well", &p), "so well");
    }

    #[test]
    fn unclosed_marker_keeps_text() {
        let p = CleaningPolicy::default();
        assert_eq!(clean_utterance("a <b c", &p), "a <b c");
        assert_eq!(clean_utterance("a [b c", &p), "a b c");
    }

    #[test]
    fn policy_rejects_overlapping_delimiters() {
        assert_eq!(CleaningPolicy::new(true, [], vec![('<', '<')]), Err(PolicyError::SelfPaired('<')));
        assert_eq!(CleaningPolicy::new(true, [], vec![('<', '>'), ('[', '>')]), Err(PolicyError::SharedDelimiter('>')));
    }

    #[test]
    fn uppercase_kept_when_lowercasing_disabled() {
        let p = CleaningPolicy::new(false, ",".chars(), vec![]).unwrap();
        assert_eq!(clean_utterance("Hi, <there>", &p), "Hi <there>");
    }

    #[test]
    fn clean_session_drops_emptied_utterances() {
        use crate::corpus::{Speaker, Utterance};
        let mut s = Session::new(
            "s",
            vec![
                Utterance::new(0.0, 1.0, Speaker::Bot, "<sync>"),
                Utterance::new(1.0, 2.0, Speaker::Participant, "Yes."),
            ],
        );
        clean_session(&mut s, &CleaningPolicy::default());
        assert_eq!(s.utterances.len(), 1);
        assert_eq!(s.utterances[0].text, "yes");
    }

    proptest! {
        #[test]
        fn cleaning_is_idempotent(text in "[A-Za-zÀ-ÿ'<>\\[\\](),.?!;:\" \t\n-]{0,60}") {
            let p = CleaningPolicy::default();
            let once = clean_utterance(&text, &p);
            prop_assert_eq!(clean_utterance(&once, &p), once);
        }
    }
}
