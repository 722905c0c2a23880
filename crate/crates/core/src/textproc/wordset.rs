use std::collections::HashSet;

use super::{data_lines, LexiconError};

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords.txt");
const DEFAULT_FIRST_PERSON: &str = include_str!("../../data/first_person.txt");

fn parse_words(text: &str) -> HashSet<String> {
    data_lines(text).map(|(_, l)| l.trim().to_string()).collect()
}

fn require(words: &HashSet<String>, required: &[&str], what: &str) -> Result<(), LexiconError> {
    match required.iter().find(|w| !words.contains(**w)) {
        Some(w) => Err(LexiconError::Invariant(format!("{what} must contain {w:?}"))),
        None => Ok(()),
    }
}

/// Low-content tokens. Always includes the fillers `uh`, `um` and `mm`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopwordSet {
    words: HashSet<String>,
}

impl StopwordSet {
    pub const REQUIRED: [&'static str; 3] = ["uh", "um", "mm"];

    pub fn new(words: HashSet<String>) -> Result<Self, LexiconError> {
        require(&words, &Self::REQUIRED, "stop-word set")?;
        Ok(Self { words })
    }

    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        Self::new(parse_words(text))
    }

    pub fn english() -> Self {
        Self::parse(DEFAULT_STOPWORDS).expect("shipped stop words are valid")
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FirstPersonSet {
    words: HashSet<String>,
}

impl FirstPersonSet {
    pub const REQUIRED: [&'static str; 3] = ["i", "we", "us"];

    pub fn new(words: HashSet<String>) -> Result<Self, LexiconError> {
        require(&words, &Self::REQUIRED, "first-person set")?;
        Ok(Self { words })
    }

    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        Self::new(parse_words(text))
    }

    pub fn english() -> Self {
        Self::parse(DEFAULT_FIRST_PERSON).expect("shipped first-person words are valid")
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }
}

pub fn count_stopwords<S: AsRef<str>>(tokens: &[S], sw: &StopwordSet) -> usize {
    tokens.iter().filter(|t| sw.contains(t.as_ref())).count()
}
