//! Seeded synthetic interview corpora.
//!
//! Sessions follow the interviewer script: a greeting, a subset of the
//! registered questions in canonical order, filler acknowledgements and
//! one to three participant turns per question. Positive sessions have
//! their response gaps, speech rate, sentiment balance and first-person
//! usage shifted by `signal_strength`; with strength 0 both classes are
//! drawn from the same distributions.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Corpus, Label, LabelTable, Provenance, Session, Speaker, Utterance};

/// Interviewer prompts, one per key of the default question registry.
pub const QUESTION_PROMPTS: [(&str, &str); 19] = [
    ("doing_today", "How are you doing today?"),
    ("where_from", "Where are you from originally?"),
    ("living_situation", "How do you like your living situation?"),
    ("dream_job", "What's your dream job?"),
    ("introvert", "Do you consider yourself an introvert?"),
    ("relax", "What do you do to relax?"),
    ("controlling_temper", "How are you at controlling your temper?"),
    ("last_argued", "When was the last time you argued with someone and what was it about?"),
    ("close_to_family", "How close are you to your family?"),
    ("regrets", "Do you have any regrets?"),
    ("memorable_experience", "What's one of your most memorable experiences?"),
    ("sleep_well", "What are you like when you don't sleep well?"),
    ("feel_down", "Have you been feeling down lately?"),
    ("diagnosed_depression", "Have you ever been diagnosed with depression?"),
    ("diagnosed_ptsd", "Have you been diagnosed with PTSD?"),
    ("last_happy", "Tell me about the last time you felt really happy."),
    ("proud_of", "What are you most proud of in your life?"),
    ("best_friend", "How would your best friend describe you?"),
    ("advice_to_self", "What advice would you give yourself ten or twenty years ago?"),
];

const GREETING: &str = "Hi, I'm Ellie. Thanks for coming in today.";
const ACKS: [&str; 6] = ["Mhm.", "Okay.", "I see.", "That's good.", "<laughter> Nice.", "I understand."];

const POSITIVE: [&str; 16] = [
    "good",
    "great",
    "happy",
    "fun",
    "love",
    "nice",
    "enjoy",
    "relaxed",
    "proud",
    "excited",
    "glad",
    "peaceful",
    "wonderful",
    "calm",
    "hopeful",
    "better",
];
const NEGATIVE: [&str; 16] = [
    "bad",
    "sad",
    "tired",
    "lonely",
    "stressed",
    "angry",
    "upset",
    "worried",
    "awful",
    "hate",
    "hurt",
    "depressed",
    "anxious",
    "terrible",
    "difficult",
    "nervous",
];
const FIRST_PERSON: [&str; 5] = ["i", "we", "my", "me", "us"];
const OTHER_SUBJECTS: [&str; 5] = ["they", "it", "people", "everybody", "he"];
const VERBS: [&str; 10] = ["work", "think", "go", "like", "spend", "talk", "try", "guess", "live", "remember"];
const NOUNS: [&str; 14] = [
    "family", "job", "home", "city", "friends", "music", "weekend", "army", "school", "kids", "time", "people",
    "brother", "movies",
];
const ADVERBS: [&str; 6] = ["really", "usually", "sometimes", "quite", "probably", "actually"];
const FILLERS: [&str; 4] = ["um", "uh", "mm", "you know"];
const MARKERS: [&str; 3] = ["<laughter>", "[sigh]", "<sync>"];

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SynthError {
    #[error("bad synthetic corpus spec: {0}")]
    BadSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_sessions: usize,
    pub positive_fraction: f64,
    pub signal_strength: f64,
    pub seed: u64,
    /// Sessions generated without interviewer turns, for exercising validation.
    #[serde(default)]
    pub botless_sessions: usize,
}

impl SynthSpec {
    pub fn new(n_sessions: usize, positive_fraction: f64, signal_strength: f64, seed: u64) -> Self {
        Self { n_sessions, positive_fraction, signal_strength, seed, botless_sessions: 0 }
    }

    fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::BadSpec(m));
        if self.n_sessions < 2 {
            return bad(format!("n_sessions must be at least 2, got {}", self.n_sessions));
        }
        if !(self.positive_fraction > 0.0 && self.positive_fraction < 1.0) {
            return bad(format!("positive_fraction must lie in (0, 1), got {}", self.positive_fraction));
        }
        if !(self.signal_strength.is_finite() && self.signal_strength >= 0.0) {
            return bad(format!("signal_strength must be finite and non-negative, got {}", self.signal_strength));
        }
        if self.botless_sessions > self.n_sessions {
            return bad(format!("{} bot-less sessions requested out of {}", self.botless_sessions, self.n_sessions));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    pub labels: LabelTable,
}

struct Voice {
    gap_shift: f64,
    rate_divisor: f64,
    p_positive_word: f64,
    p_first_person: f64,
}

impl Voice {
    fn new(shift: f64) -> Self {
        Self {
            gap_shift: 0.6 * shift,
            rate_divisor: 1.0 + 0.25 * shift,
            p_positive_word: 0.6 - 0.35 * (0.5 * shift).tanh(),
            p_first_person: 0.35 + 0.25 * (0.5 * shift).tanh(),
        }
    }
}

fn round_ms(t: f64) -> f64 {
    (t * 1000.0).round() / 1000.0
}

fn word_count(text: &str) -> usize {
    text.split_whitespace().filter(|w| w.chars().any(char::is_alphanumeric)).count()
}

fn sentence(rng: &mut ChaCha8Rng, voice: &Voice) -> String {
    let mut words: Vec<&str> = Vec::new();
    if rng.random_bool(0.3) {
        words.push(FILLERS.choose(rng).unwrap());
    }
    let subject = if rng.random_bool(voice.p_first_person) { &FIRST_PERSON[..2] } else { &OTHER_SUBJECTS[..] };
    words.push(subject.choose(rng).unwrap());
    if rng.random_bool(0.4) {
        words.push(ADVERBS.choose(rng).unwrap());
    }
    words.push(VERBS.choose(rng).unwrap());
    if rng.random_bool(voice.p_first_person) {
        words.push(FIRST_PERSON[2..].choose(rng).unwrap());
    } else {
        words.push("the");
    }
    words.push(NOUNS.choose(rng).unwrap());
    if rng.random_bool(0.75) {
        words.push(if rng.random_bool(0.5) { "and it was" } else { "it makes me feel" });
        let positive = rng.random_bool(voice.p_positive_word);
        if positive && rng.random_bool(0.15) {
            // negated negative word reads as mildly positive
            words.push("not");
            words.push(NEGATIVE.choose(rng).unwrap());
        } else if positive {
            words.push(POSITIVE.choose(rng).unwrap());
        } else {
            words.push(NEGATIVE.choose(rng).unwrap());
        }
    }
    let mut text = words.join(" ");
    if let Some(first) = text.get(..1) {
        text = first.to_uppercase() + &text[1..];
    }
    text
}

fn answer_text(rng: &mut ChaCha8Rng, voice: &Voice) -> String {
    let n = rng.random_range(1..=2);
    let mut parts: Vec<String> = (0..n).map(|_| sentence(rng, voice)).collect();
    if rng.random_bool(0.1) {
        parts.push(MARKERS.choose(rng).unwrap().to_string());
    }
    parts.join(", ") + "."
}

fn session(rng: &mut ChaCha8Rng, id: String, positive: bool, strength: f64, botless: bool) -> Session {
    let voice = Voice::new(if positive { strength } else { 0.0 });
    let mut clock = round_ms(rng.random_range(0.5..5.0));
    let mut utterances = Vec::new();

    let push_bot = |clock: &mut f64, text: &str, utterances: &mut Vec<Utterance>| {
        let stop = round_ms(*clock + word_count(text) as f64 / 2.8 + 0.2);
        utterances.push(Utterance::new(*clock, stop, Speaker::Bot, text));
        *clock = stop;
    };

    push_bot(&mut clock, GREETING, &mut utterances);
    for (_, prompt) in QUESTION_PROMPTS {
        if !rng.random_bool(0.85) {
            continue;
        }
        push_bot(&mut clock, prompt, &mut utterances);
        let turns = rng.random_range(1..=3);
        for turn in 0..turns {
            let gap = if turn == 0 {
                if rng.random_bool(0.05) {
                    -rng.random_range(0.05..0.4)
                } else {
                    rng.random_range(0.2..1.8) + voice.gap_shift
                }
            } else {
                rng.random_range(0.1..0.6)
            };
            let text = answer_text(rng, &voice);
            let rate = rng.random_range(2.0..3.6) / voice.rate_divisor;
            let start = round_ms((clock + gap).max(0.0));
            let stop = round_ms(start + word_count(&text) as f64 / rate);
            utterances.push(Utterance::new(start, stop, Speaker::Participant, text));
            clock = stop.max(clock);
        }
        clock = round_ms(clock + rng.random_range(0.2..1.0));
        if rng.random_bool(0.4) {
            push_bot(&mut clock, ACKS.choose(rng).unwrap(), &mut utterances);
            clock = round_ms(clock + rng.random_range(0.2..0.8));
        }
    }
    if botless {
        utterances.retain(|u| u.speaker != Speaker::Bot);
    }
    let label = if positive { Label::Depressed } else { Label::NotDepressed };
    Session::new(id, utterances).with_label(label)
}

const PLAN_STREAM: u64 = u64::MAX;

/// Generates a labelled corpus. Identical specs give identical corpora.
pub fn generate_synthetic_corpus(spec: &SynthSpec) -> Result<SyntheticCorpus, SynthError> {
    spec.validate()?;
    let n = spec.n_sessions;
    let n_pos = ((n as f64 * spec.positive_fraction).round() as usize).clamp(1, n - 1);

    // a stream of its own: stream 0 of the same seed drives `split_corpus`
    let mut plan_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    plan_rng.set_stream(PLAN_STREAM);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut plan_rng);
    let mut positive = vec![false; n];
    for &i in &order[..n_pos] {
        positive[i] = true;
    }
    order.shuffle(&mut plan_rng);
    let mut botless = vec![false; n];
    for &i in &order[..spec.botless_sessions] {
        botless[i] = true;
    }

    let mut labels = LabelTable::default();
    let sessions: Vec<Session> = (0..n)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(i as u64 + 1);
            let s = session(&mut rng, format!("{}", 300 + i), positive[i], spec.signal_strength, botless[i]);
            labels.insert(s.session_id.clone(), s.label.expect("generated sessions are labelled"));
            s
        })
        .collect();
    let corpus = Corpus::new(sessions, Provenance::Synthetic).expect("generated ids are unique");
    Ok(SyntheticCorpus { corpus, labels })
}
