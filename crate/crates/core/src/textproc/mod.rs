//! Linguistic primitives over cleaned text. Everything here is pure and the
//! lexica are immutable once loaded.

mod polarity;
mod pos;
mod wordset;

use thiserror::Error;

pub use polarity::{polarity, PolarityLexicon, DEFAULT_NEGATION_WINDOW, DEFAULT_NEGATORS, ENGLISH_POLARITY};
pub use pos::{pos_tag, PosLexicon, PosTag};
pub use wordset::{count_stopwords, FirstPersonSet, StopwordSet};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LexiconError {
    #[error("line {line}: {detail}")]
    BadLine { line: usize, detail: String },
    #[error("{0}")]
    Invariant(String),
}

/// Whitespace-delimited lowercase tokens. Never contains empty tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenList(Vec<String>);

impl TokenList {
    pub fn as_slice(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.0.iter()
    }

    pub fn extend(&mut self, other: TokenList) {
        self.0.extend(other.0);
    }
}

impl std::ops::Deref for TokenList {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

impl<'a> IntoIterator for &'a TokenList {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

pub fn tokenize(text: &str) -> TokenList {
    TokenList(text.split_whitespace().map(str::to_string).collect())
}

/// Yields `(line_number, content)` for non-blank, non-comment lines.
pub(crate) fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}
