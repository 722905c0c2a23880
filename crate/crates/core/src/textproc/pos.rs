use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{data_lines, LexiconError};

const DEFAULT_POS: &str = include_str!("../../data/pos.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PosTag {
    Noun,
    Verb,
    Adj,
    Adv,
    Other,
}

impl FromStr for PosTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "NOUN" => Ok(PosTag::Noun),
            "VERB" => Ok(PosTag::Verb),
            "ADJ" => Ok(PosTag::Adj),
            "ADV" => Ok(PosTag::Adv),
            "OTHER" => Ok(PosTag::Other),
            other => Err(format!("unknown tag {other:?}")),
        }
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PosTag::Noun => "NOUN",
            PosTag::Verb => "VERB",
            PosTag::Adj => "ADJ",
            PosTag::Adv => "ADV",
            PosTag::Other => "OTHER",
        })
    }
}

/// Word lookups backed by suffix rules; unknown words default to nouns.
#[derive(Debug, Clone, PartialEq)]
pub struct PosLexicon {
    word_tags: HashMap<String, PosTag>,
    suffix_rules: Vec<(String, PosTag)>,
}

impl PosLexicon {
    /// Suffix rules are re-ordered longest first; equal lengths keep their given order.
    pub fn new(word_tags: HashMap<String, PosTag>, mut suffix_rules: Vec<(String, PosTag)>) -> Self {
        suffix_rules.sort_by_key(|r| std::cmp::Reverse(r.0.chars().count()));
        Self { word_tags, suffix_rules }
    }

    /// Parses `token<TAB>tag` lines. Lines whose token starts with `-` are
    /// suffix rules (`-ly<TAB>ADV`).
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut words = HashMap::new();
        let mut rules = Vec::new();
        for (line, content) in data_lines(text) {
            let bad = |detail: String| LexiconError::BadLine { line, detail };
            let (token, tag) = content.split_once('\t').ok_or_else(|| bad("expected token<TAB>tag".into()))?;
            let tag: PosTag = tag.parse().map_err(bad)?;
            match token.trim().strip_prefix('-') {
                Some("") => return Err(bad("empty suffix".into())),
                Some(suffix) => rules.push((suffix.to_string(), tag)),
                None => {
                    words.insert(token.trim().to_string(), tag);
                }
            }
        }
        Ok(Self::new(words, rules))
    }

    pub fn english() -> Self {
        Self::parse(DEFAULT_POS).expect("shipped POS lexicon is valid")
    }

    pub fn suffix_rules(&self) -> &[(String, PosTag)] {
        &self.suffix_rules
    }

    pub fn tag(&self, token: &str) -> PosTag {
        if let Some(&tag) = self.word_tags.get(token) {
            return tag;
        }
        self.suffix_rules
            .iter()
            .find(|(suffix, _)| token.len() > suffix.len() && token.ends_with(suffix.as_str()))
            .map_or(PosTag::Noun, |&(_, tag)| tag)
    }
}

pub fn pos_tag<S: AsRef<str>>(tokens: &[S], lex: &PosLexicon) -> Vec<PosTag> {
    tokens.iter().map(|t| lex.tag(t.as_ref())).collect()
}
