use std::collections::HashSet;

use super::FeatureError;
use crate::textproc::data_lines;

const DEFAULT_QUESTIONS: &str = include_str!("../../data/questions.tsv");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionEntry {
    pub key: String,
    pub patterns: Vec<String>,
}

/// Ordered interviewer questions whose answers become sentiment features.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionRegistry {
    entries: Vec<QuestionEntry>,
}

impl QuestionRegistry {
    pub fn new(entries: Vec<QuestionEntry>) -> Result<Self, FeatureError> {
        let mut seen = HashSet::new();
        for e in &entries {
            if e.key.is_empty() || e.key.chars().any(|c| c.is_whitespace() || c == ',') {
                return Err(FeatureError::Registry(format!("invalid question key {:?}", e.key)));
            }
            if !seen.insert(e.key.as_str()) {
                return Err(FeatureError::Registry(format!("duplicate question key {:?}", e.key)));
            }
            if e.patterns.is_empty() || e.patterns.iter().any(|p| p.is_empty()) {
                return Err(FeatureError::Registry(format!("question {:?} has an empty pattern list", e.key)));
            }
            if let Some(p) = e.patterns.iter().find(|p| p.to_lowercase() != **p) {
                return Err(FeatureError::Registry(format!("pattern {p:?} is not lowercase")));
            }
        }
        Ok(Self { entries })
    }

    /// Parses `key<TAB>pattern1|pattern2|...` lines.
    pub fn parse(text: &str) -> Result<Self, FeatureError> {
        let mut entries = Vec::new();
        for (line, content) in data_lines(text) {
            let (key, patterns) = content
                .split_once('\t')
                .ok_or_else(|| FeatureError::Registry(format!("line {line}: expected key<TAB>patterns")))?;
            entries.push(QuestionEntry {
                key: key.trim().to_string(),
                patterns: patterns.split('|').map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect(),
            });
        }
        Self::new(entries)
    }

    pub fn entries(&self) -> &[QuestionEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.key.as_str())
    }
}

impl Default for QuestionRegistry {
    /// The shipped 19-question registry.
    fn default() -> Self {
        Self::parse(DEFAULT_QUESTIONS).expect("shipped question registry is valid")
    }
}

/// First registry entry, in registry order, with a pattern contained in `bot_text`.
pub fn match_question<'r>(bot_text: &str, reg: &'r QuestionRegistry) -> Option<&'r str> {
    reg.entries.iter().find(|e| e.patterns.iter().any(|p| bot_text.contains(p.as_str()))).map(|e| e.key.as_str())
}
