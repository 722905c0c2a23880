//! Per-session feature functions. Sessions are expected to be cleaned and
//! validated; a "comment" is one participant utterance with at least one token.

use std::collections::HashSet;

use log::warn;

use super::registry::{match_question, QuestionRegistry};
use crate::corpus::{Session, Speaker};
use crate::textproc::{
    count_stopwords, polarity, pos_tag, tokenize, FirstPersonSet, PolarityLexicon, PosLexicon, PosTag, StopwordSet,
    TokenList,
};

fn comments(s: &Session) -> impl Iterator<Item = TokenList> + '_ {
    s.participant_utterances().map(|u| tokenize(&u.text)).filter(|t| !t.is_empty())
}

fn mean_or_zero(values: impl Iterator<Item = f64>, session: &Session, feature: &str) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        warn!("session {}: {feature} has no qualifying comments, using 0", session.session_id);
        0.0
    } else {
        sum / n as f64
    }
}

fn mean_ratio(s: &Session, feature: &str, numerator: impl Fn(&TokenList) -> usize) -> f64 {
    mean_or_zero(comments(s).map(|t| numerator(&t) as f64 / t.len() as f64), s, feature)
}

/// Participant text answering every occurrence of question `key`, joined by spaces.
pub fn collect_answer(s: &Session, key: &str, reg: &QuestionRegistry) -> String {
    let mut parts: Vec<&str> = Vec::new();
    let mut answering = false;
    for u in &s.utterances {
        match u.speaker {
            Speaker::Bot => answering = match_question(&u.text, reg) == Some(key),
            Speaker::Participant if answering => parts.push(&u.text),
            Speaker::Participant => {}
        }
    }
    parts.join(" ")
}

/// One polarity per registry question, in registry order; unasked questions score 0.
pub fn question_sentiment_features(s: &Session, reg: &QuestionRegistry, lex: &PolarityLexicon) -> Vec<f64> {
    reg.keys().map(|key| polarity(&tokenize(&collect_answer(s, key, reg)), lex)).collect()
}

/// Polarity of the concatenated participant token stream.
pub fn avg_sentiment(s: &Session, lex: &PolarityLexicon) -> f64 {
    let mut all = TokenList::default();
    for u in s.participant_utterances() {
        all.extend(tokenize(&u.text));
    }
    polarity(&all, lex)
}

/// Mean gap between a bot turn's end and the participant turn right after it.
/// Overlaps count as 0.
pub fn avg_response_time(s: &Session) -> f64 {
    let gaps = s
        .utterances
        .windows(2)
        .filter(|w| w[0].speaker == Speaker::Bot && w[1].speaker == Speaker::Participant)
        .map(|w| (w[1].start_time - w[0].stop_time).max(0.0));
    mean_or_zero(gaps, s, "avg_response_time")
}

/// Mean words per second over comments with positive duration.
pub fn speech_speed(s: &Session) -> f64 {
    let rates = s.participant_utterances().filter(|u| u.stop_time > u.start_time).filter_map(|u| {
        let words = tokenize(&u.text).len();
        (words > 0).then(|| words as f64 / u.duration())
    });
    mean_or_zero(rates, s, "speech_speed")
}

pub fn avg_unique_frequency(s: &Session) -> f64 {
    mean_ratio(s, "avg_unique_frequency", |t| t.iter().collect::<HashSet<_>>().len())
}

pub fn avg_sw_frequency(s: &Session, sw: &StopwordSet) -> f64 {
    mean_ratio(s, "avg_sw_frequency", |t| count_stopwords(t, sw))
}

/// Mean of (non-whitespace characters / tokens) per comment.
pub fn avg_characters(s: &Session) -> f64 {
    mean_ratio(s, "avg_characters", |t| t.iter().map(|w| w.chars().count()).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PosFrequencies {
    pub nouns: f64,
    pub verbs: f64,
    pub adjectives: f64,
    pub adverbs: f64,
}

pub fn pos_frequencies(s: &Session, lex: &PosLexicon) -> PosFrequencies {
    let mut sums = [0.0f64; 4];
    let mut n = 0usize;
    for tokens in comments(s) {
        let tags = pos_tag(&tokens, lex);
        let len = tags.len() as f64;
        for (slot, want) in sums.iter_mut().zip([PosTag::Noun, PosTag::Verb, PosTag::Adj, PosTag::Adv]) {
            *slot += tags.iter().filter(|&&t| t == want).count() as f64 / len;
        }
        n += 1;
    }
    if n == 0 {
        warn!("session {}: POS frequencies have no qualifying comments, using 0", s.session_id);
        return PosFrequencies::default();
    }
    let [nouns, verbs, adjectives, adverbs] = sums.map(|v| v / n as f64);
    PosFrequencies { nouns, verbs, adjectives, adverbs }
}

pub fn fp_avg(s: &Session, fp: &FirstPersonSet) -> f64 {
    mean_ratio(s, "fp_avg", |t| t.iter().filter(|w| fp.contains(w)).count())
}
