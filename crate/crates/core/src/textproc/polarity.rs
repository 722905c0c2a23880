use std::collections::{HashMap, HashSet};

use super::{data_lines, LexiconError};

pub const DEFAULT_NEGATION_WINDOW: usize = 3;

pub const DEFAULT_NEGATORS: [&str; 30] = [
    "not",
    "no",
    "never",
    "none",
    "nobody",
    "nothing",
    "neither",
    "nor",
    "nowhere",
    "cannot",
    "can't",
    "don't",
    "doesn't",
    "didn't",
    "isn't",
    "wasn't",
    "aren't",
    "weren't",
    "won't",
    "wouldn't",
    "shouldn't",
    "couldn't",
    "haven't",
    "hasn't",
    "hadn't",
    "ain't",
    "dont",
    "cant",
    "wont",
    "without",
];

/// The shipped `token<TAB>score` polarity table.
pub const ENGLISH_POLARITY: &str = include_str!("../../data/polarity.tsv");

/// Word polarities in `[-1, 1]` plus the negators that flip them.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarityLexicon {
    entries: HashMap<String, f64>,
    negators: HashSet<String>,
    negation_window: usize,
}

impl PolarityLexicon {
    pub fn new(
        entries: HashMap<String, f64>,
        negators: HashSet<String>,
        negation_window: usize,
    ) -> Result<Self, LexiconError> {
        if let Some((word, score)) = entries.iter().find(|(_, s)| !(s.is_finite() && (-1.0..=1.0).contains(*s))) {
            return Err(LexiconError::Invariant(format!("polarity of {word:?} is {score}, outside [-1, 1]")));
        }
        if let Some(word) = negators.iter().find(|n| entries.contains_key(*n)) {
            return Err(LexiconError::Invariant(format!("{word:?} is both a negator and a scored entry")));
        }
        Ok(Self { entries, negators, negation_window })
    }

    /// Parses `token<TAB>score` lines; `#` starts a comment line.
    pub fn parse(text: &str, negators: HashSet<String>, negation_window: usize) -> Result<Self, LexiconError> {
        let mut entries = HashMap::new();
        for (line, content) in data_lines(text) {
            let bad = |detail: String| LexiconError::BadLine { line, detail };
            let (token, score) = content.split_once('\t').ok_or_else(|| bad("expected token<TAB>score".into()))?;
            let score: f64 = score.trim().parse().map_err(|_| bad(format!("bad score {score:?}")))?;
            entries.insert(token.trim().to_string(), score);
        }
        Self::new(entries, negators, negation_window)
    }

    pub fn default_negators() -> HashSet<String> {
        DEFAULT_NEGATORS.iter().map(|s| s.to_string()).collect()
    }

    /// The shipped lexicon with the default negators and window.
    pub fn english() -> Self {
        Self::parse(ENGLISH_POLARITY, Self::default_negators(), DEFAULT_NEGATION_WINDOW)
            .expect("shipped polarity lexicon is valid")
    }

    pub fn score(&self, token: &str) -> Option<f64> {
        self.entries.get(token).copied()
    }

    pub fn is_negator(&self, token: &str) -> bool {
        self.negators.contains(token)
    }

    pub fn negation_window(&self) -> usize {
        self.negation_window
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Mean polarity of the lexicon hits in `tokens`, clamped to `[-1, 1]`.
///
/// A hit is sign-flipped when an odd number of negators occur among the
/// `negation_window` tokens before it. No hits gives 0.
pub fn polarity<S: AsRef<str>>(tokens: &[S], lex: &PolarityLexicon) -> f64 {
    let mut sum = 0.0;
    let mut hits = 0usize;
    for (i, token) in tokens.iter().enumerate() {
        let Some(score) = lex.score(token.as_ref()) else { continue };
        let from = i.saturating_sub(lex.negation_window);
        let negators = tokens[from..i].iter().filter(|t| lex.is_negator(t.as_ref())).count();
        sum += if negators % 2 == 1 { -score } else { score };
        hits += 1;
    }
    if hits == 0 {
        0.0
    } else {
        (sum / hits as f64).clamp(-1.0, 1.0)
    }
}
