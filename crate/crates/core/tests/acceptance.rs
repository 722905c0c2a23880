//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Run with `cargo test -p depscreen --test acceptance`.

use std::collections::{HashMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use depscreen::corpus::{
    clean_session, generate_synthetic_corpus, parse_transcript, split_corpus, write_transcript, CleaningPolicy,
    SplitParams, SplitPlan, SynthSpec, SyntheticCorpus,
};
use depscreen::features::{build_matrix, match_question, FeatureMatrix, Lexica, QuestionRegistry, SCALAR_KEYS};
use depscreen::models::{
    fit_boost, fit_svm, fit_tree, BoostParams, ForestParams, Gamma, KernelKind, Matrix, ModelConfig, SvmParams,
    TreeParams,
};
use depscreen::search::{
    baseline_accuracy, count_subsets, enumerate_configs, run_search, BaselineReport, Estimator, GridAxis, ParamValue,
};
use depscreen::textproc::{FirstPersonSet, PolarityLexicon, PosLexicon, StopwordSet};
use depscreen::{Corpus, FeatureExtractor, SearchSpec, Speaker};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------------------
// shared fixtures

/// The 11 scalar features followed by the first `n - 11` question features.
fn pool(n: usize) -> Vec<String> {
    let reg = QuestionRegistry::default();
    SCALAR_KEYS.iter().map(|k| k.to_string()).chain(reg.keys().map(|k| format!("q_{k}"))).take(n).collect()
}

fn ints(v: &[i64]) -> Vec<ParamValue> {
    v.iter().map(|&i| ParamValue::Int(i)).collect()
}

fn floats(v: &[f64]) -> Vec<ParamValue> {
    v.iter().map(|&f| ParamValue::Float(f)).collect()
}

fn texts(v: &[&str]) -> Vec<ParamValue> {
    v.iter().map(|s| ParamValue::Text(s.to_string())).collect()
}

fn spec(estimator: Estimator, n: usize, k: usize, grid: Vec<GridAxis>) -> SearchSpec {
    SearchSpec { estimator, feature_pool: pool(n), subset_size: k, param_grid: grid, sample_limit: None, seed: 0 }
}

/// Cleaned, labelled synthetic corpus with its full feature matrix.
fn synthetic_matrix(spec: &SynthSpec) -> (Corpus, FeatureMatrix) {
    let sc = generate_synthetic_corpus(spec).expect("valid synth spec");
    let policy = CleaningPolicy::default();
    let provenance = sc.corpus.provenance;
    let mut sessions = sc.corpus.into_sessions();
    for s in &mut sessions {
        clean_session(s, &policy);
    }
    let mut corpus = Corpus::new(sessions, provenance).expect("unique ids");
    corpus.apply_labels(&sc.labels);
    corpus.retain_valid();
    let fx = FeatureExtractor::english();
    let vectors = fx.extract_all(corpus.sessions());
    let m = build_matrix(&vectors, &sc.labels, fx.feature_keys()).expect("all sessions labelled");
    (corpus, m)
}

fn split(corpus: &Corpus, m: &FeatureMatrix, seed: u64) -> (SplitPlan, FeatureMatrix, FeatureMatrix) {
    let plan = split_corpus(corpus, SplitParams { ratio: 0.8, seed }).expect("labelled corpus splits");
    let train = m.restrict_rows(&plan.train_ids);
    let test = m.restrict_rows(&plan.test_ids);
    (plan, train, test)
}

// ---------------------------------------------------------------------------
// 1. enumeration counts

fn enumeration_counts() -> Outcome {
    let cases: Vec<(&str, SearchSpec, u128)> = vec![
        ("C(17,4)", spec(Estimator::Forest, 17, 4, vec![]), 2_380),
        (
            "C(17,4) x 3 settings",
            spec(Estimator::Forest, 17, 4, vec![GridAxis::new("n_estimators", ints(&[50, 100, 200]))]),
            7_140,
        ),
        (
            "C(17,4) x 10 SVM grid",
            spec(
                Estimator::Svm,
                17,
                4,
                vec![
                    GridAxis::new("kernel", texts(&["rbf", "linear"])),
                    GridAxis::new("gamma", floats(&[0.001, 0.01, 0.1, 1.0, 10.0])),
                ],
            ),
            23_800,
        ),
        ("C(19,5)", spec(Estimator::Svm, 19, 5, vec![]), 11_628),
        (
            "C(19,5) x 10",
            spec(
                Estimator::Svm,
                19,
                5,
                vec![
                    GridAxis::new("c", floats(&[0.1, 1.0, 10.0, 100.0, 1000.0])),
                    GridAxis::new("kernel", texts(&["rbf", "linear"])),
                ],
            ),
            116_280,
        ),
        ("C(20,10)", spec(Estimator::Boost, 20, 10, vec![]), 184_756),
        (
            "C(20,10) x 6",
            spec(
                Estimator::Boost,
                20,
                10,
                vec![
                    GridAxis::new("learning_rate", floats(&[0.01, 0.1, 0.3])),
                    GridAxis::new("max_depth", ints(&[3, 6])),
                ],
            ),
            1_108_536,
        ),
    ];
    let mut streamed = 0u128;
    for (name, s, expected) in &cases {
        s.validate().map_err(|e| format!("{name}: {e}"))?;
        let subsets = count_subsets(s.feature_pool.len() as u64, s.subset_size as u64).map_err(|e| e.to_string())?;
        let total = subsets * s.grid_size();
        ensure(total == *expected, || format!("{name}: counted {total}, expected {expected}"))?;
        ensure(s.total_configs().unwrap() == *expected, || format!("{name}: total_configs disagrees"))?;
        let stream = enumerate_configs(s).map_err(|e| e.to_string())?;
        ensure(stream.len() as u128 == *expected, || format!("{name}: stream length {}", stream.len()))?;
        if *expected <= 200_000 {
            // walk the stream and count, checking ordinals are dense
            let mut n = 0u128;
            for (i, p) in stream.enumerate() {
                ensure(p.ordinal == i as u64, || format!("{name}: ordinal {} at position {i}", p.ordinal))?;
                n += 1;
            }
            ensure(n == *expected, || format!("{name}: walked {n}"))?;
            streamed += n;
        }
    }
    // a 30,000-point sample of the largest space is exact and reproducible
    let mut big = cases.last().unwrap().1.clone();
    big.sample_limit = Some(30_000);
    big.seed = 17;
    let draw = |s: &SearchSpec| enumerate_configs(s).unwrap().map(|p| p.ordinal).collect::<Vec<u64>>();
    let a = draw(&big);
    ensure(a.len() == 30_000, || format!("sample has {} points", a.len()))?;
    ensure(a.windows(2).all(|w| w[0] < w[1]), || "sample ordinals not strictly increasing".into())?;
    ensure(*a.last().unwrap() < 1_108_536, || "sample ordinal out of range".into())?;
    ensure(draw(&big) == a, || "sample differs between draws".into())?;
    Ok(format!("7 counts exact, {streamed} configs streamed, 30000-point sample reproducible"))
}

// ---------------------------------------------------------------------------
// 2. accuracy quantization

fn quantization() -> Outcome {
    // published percentages and the counts they imply on a 37-session test set
    for (pct, k, prefix) in [(83.8, 31u32, 0.8378), (70.3, 26, 0.7027), (64.8, 24, 0.6486)] {
        let exact = f64::from(k) / 37.0;
        let within: Vec<u32> = (0..=37).filter(|&j| (f64::from(j) / 37.0 * 100.0 - pct).abs() < 0.1).collect();
        ensure(within == [k], || format!("{pct}% is matched by k in {within:?}, expected [{k}]"))?;
        let truncated = (exact * 1e4).floor() / 1e4;
        ensure(truncated == prefix, || format!("{k}/37 = {exact} does not start with {prefix}"))?;
    }

    let (corpus, m) = synthetic_matrix(&SynthSpec::new(189, 0.3, 2.0, 3));
    let (_, train, test) = split(&corpus, &m, 3);
    ensure(test.n_rows() == 37, || format!("test split has {} rows", test.n_rows()))?;
    let specs = [
        spec(Estimator::Forest, 6, 2, vec![GridAxis::new("n_estimators", ints(&[5, 25]))]),
        spec(Estimator::Boost, 6, 2, vec![GridAxis::new("n_estimators", ints(&[10]))]),
        spec(Estimator::Svm, 6, 2, vec![GridAxis::new("kernel", texts(&["rbf", "linear"]))]),
    ];
    let mut checked = 0;
    let mut seen = HashSet::new();
    for s in &specs {
        let lb = run_search(s, &train, &test, 1).map_err(|e| e.to_string())?;
        for r in lb.results() {
            let k = r.confusion.tp + r.confusion.tn;
            ensure(r.confusion.total() == 37, || format!("config {} scored {} rows", r.ordinal, r.confusion.total()))?;
            ensure(r.accuracy.to_bits() == (k as f64 / 37.0).to_bits(), || {
                format!("config {}: accuracy {} is not {k}/37", r.ordinal, r.accuracy)
            })?;
            seen.insert(k);
            checked += 1;
        }
    }
    let b = BaselineReport::new(test.labels()).map_err(|e| e.to_string())?;
    for (acc, count) in [(b.accuracy_zero, b.zeros), (b.accuracy_one, b.ones)] {
        ensure(acc.to_bits() == (count as f64 / 37.0).to_bits(), || format!("baseline {acc} is not {count}/37"))?;
    }
    Ok(format!("31/37, 26/37, 24/37 recovered; {checked} accuracies are k/37 ({} distinct k)", seen.len()))
}

// ---------------------------------------------------------------------------
// 3. feature oracle

const POLARITY: &[(&str, f64)] = &[
    ("good", 0.5),
    ("great", 0.75),
    ("happy", 0.8),
    ("fine", 0.25),
    ("love", 0.6),
    ("bad", -0.6),
    ("sad", -0.9),
    ("tired", -0.3),
    ("awful", -1.0),
];
const NEGATORS: &[&str] = &["not", "never", "don't"];
const WINDOW: usize = 3;
const POS_WORDS: &[(&str, &str)] = &[
    ("am", "VERB"),
    ("is", "VERB"),
    ("was", "VERB"),
    ("are", "VERB"),
    ("feel", "VERB"),
    ("love", "VERB"),
    ("go", "VERB"),
    ("get", "VERB"),
    ("give", "VERB"),
    ("think", "VERB"),
    ("happy", "ADJ"),
    ("sad", "ADJ"),
    ("good", "ADJ"),
    ("bad", "ADJ"),
    ("tired", "ADJ"),
    ("great", "ADJ"),
    ("small", "ADJ"),
    ("very", "ADV"),
    ("really", "ADV"),
    ("not", "ADV"),
    ("never", "ADV"),
    ("so", "ADV"),
    ("i", "OTHER"),
    ("we", "OTHER"),
    ("my", "OTHER"),
    ("the", "OTHER"),
    ("a", "OTHER"),
    ("and", "OTHER"),
    ("to", "OTHER"),
    ("with", "OTHER"),
    ("it", "OTHER"),
];
/// Suffix rules, longest first.
const POS_SUFFIXES: &[(&str, &str)] = &[("ing", "VERB"), ("ful", "ADJ"), ("ly", "ADV")];
const STOPWORDS: &[&str] = &["uh", "um", "mm", "the", "a", "i", "it", "and", "to", "my", "is", "am", "was"];
const FIRST_PERSON: &[&str] = &["i", "we", "us", "me", "my"];

/// `(bot?, start, stop, text, expected question key)`.
type Turn = (bool, f64, f64, &'static str, Option<&'static str>);

fn fixture_sessions() -> Vec<(&'static str, Vec<Turn>)> {
    const B: bool = true;
    const P: bool = false;
    vec![
        (
            "f01",
            vec![
                (B, 0.0, 2.0, "Hi, I'm Ellie. Thanks for coming in.", None),
                (B, 2.5, 4.0, "How are you doing today?", Some("doing_today")),
                (P, 4.5, 6.0, "i am good really", None),
                (B, 7.0, 8.5, "What's your dream job?", Some("dream_job")),
                (P, 9.2, 11.0, "um a pilot", None),
                (P, 11.5, 13.0, "i love flying", None),
                (B, 14.0, 15.0, "Mhm.", None),
                (P, 15.8, 17.0, "yes", None),
            ],
        ),
        (
            "f02",
            vec![
                (B, 0.0, 1.5, "Do you consider yourself an introvert?", Some("introvert")),
                (P, 1.0, 3.0, "not really i am not sad", None),
                (B, 4.0, 5.0, "Okay.", None),
                (B, 5.5, 7.0, "What's one of your most memorable experiences?", Some("memorable_experience")),
                (P, 7.5, 7.5, "my wedding was great", None),
                (B, 8.0, 9.0, "What's your dream job?", Some("dream_job")),
                (P, 9.4, 12.0, "never happy at work", None),
                (B, 12.5, 13.0, "What's your dream job?", Some("dream_job")),
                (P, 13.5, 15.0, "a teacher i guess", None),
            ],
        ),
        (
            "f03",
            vec![
                (P, 0.0, 1.0, "hello there", None),
                (B, 1.2, 2.0, "How close are you to your family?", Some("close_to_family")),
                (B, 2.1, 3.0, "I see.", None),
                (P, 3.5, 5.0, "we are very close and happy", None),
                (B, 6.0, 7.0, "Have you been feeling down lately?", Some("feel_down")),
                (P, 8.25, 10.0, "i don't feel bad really", None),
            ],
        ),
        (
            "f04",
            vec![
                (B, 0.0, 1.0, "What do you do to relax?", Some("relax")),
                (P, 1.75, 4.0, "um uh i go to the beach", None),
                (B, 5.0, 6.0, "How are you at controlling your temper?", Some("controlling_temper")),
                (P, 6.5, 8.0, "pretty good i think", None),
                (P, 8.5, 9.0, "mm", None),
            ],
        ),
        (
            "f05",
            vec![
                (B, 0.0, 2.0, "Have you ever been diagnosed with depression?", Some("diagnosed_depression")),
                (P, 2.6, 5.0, "yes i was so sad and tired", None),
                (
                    B,
                    6.0,
                    7.0,
                    "When was the last time you argued with someone and what was it about?",
                    Some("last_argued"),
                ),
                (P, 7.3, 9.1, "awful fight with my brother", None),
                (B, 10.0, 11.0, "Do you have any regrets?", Some("regrets")),
                (P, 11.4, 14.0, "not being a good son", None),
            ],
        ),
        (
            "f06",
            vec![
                (B, 0.0, 1.0, "Where are you from originally?", Some("where_from")),
                (P, 1.5, 6.5, "originally from a small coastal town called harmony", None),
                (B, 7.0, 8.0, "How do you like your living situation?", Some("living_situation")),
                (P, 8.2, 9.0, "it is fine", None),
            ],
        ),
        (
            "f07",
            vec![
                (B, 0.0, 1.0, "What are you like when you don't sleep well?", Some("sleep_well")),
                (P, 1.1, 3.0, "i get very tired and slowly grumpy", None),
                (B, 4.0, 5.0, "Tell me about the last time you felt really happy.", Some("last_happy")),
                (P, 5.5, 7.0, "last summer with my family we were happy", None),
                (B, 8.0, 9.0, "What are you most proud of in your life?", Some("proud_of")),
                (P, 9.0, 10.0, "my kids", None),
            ],
        ),
        (
            "f08",
            vec![
                (B, 0.0, 1.0, "How would your best friend describe you?", Some("best_friend")),
                (P, 1.3, 2.9, "caring and thoughtful", None),
                (B, 3.0, 4.0, "What advice would you give yourself ten or twenty years ago?", Some("advice_to_self")),
                (P, 4.9, 8.0, "never give up and never stop working", None),
                (B, 8.5, 9.0, "Have you been diagnosed with PTSD?", Some("diagnosed_ptsd")),
                (P, 9.5, 10.0, "no", None),
            ],
        ),
        (
            "f09",
            vec![
                (B, 0.0, 1.0, "Tell me about the weather.", None),
                (P, 1.5, 2.5, "it is awful and sad", None),
                (B, 3.0, 4.0, "Okay.", None),
                (P, 4.2, 5.0, "the the the good", None),
            ],
        ),
        (
            "f10",
            vec![
                (B, 0.0, 1.0, "How are you doing today?", Some("doing_today")),
                (P, 1.0, 2.0, "not not good", None),
                (B, 2.5, 3.5, "How are you doing today?", Some("doing_today")),
                (P, 3.0, 4.0, "great", None),
                (P, 4.5, 4.5, "ok", None),
            ],
        ),
    ]
}

fn fixture_lexica() -> Lexica {
    let negators: HashSet<String> = NEGATORS.iter().map(|s| s.to_string()).collect();
    let scores: HashMap<String, f64> = POLARITY.iter().map(|(w, s)| (w.to_string(), *s)).collect();
    let pos_text: String = POS_WORDS
        .iter()
        .map(|(w, t)| format!("{w}\t{t}\n"))
        .chain(POS_SUFFIXES.iter().map(|(s, t)| format!("-{s}\t{t}\n")))
        .collect();
    Lexica {
        polarity: PolarityLexicon::new(scores, negators, WINDOW).unwrap(),
        pos: PosLexicon::parse(&pos_text).unwrap(),
        stopwords: StopwordSet::new(STOPWORDS.iter().map(|s| s.to_string()).collect()).unwrap(),
        first_person: FirstPersonSet::new(FIRST_PERSON.iter().map(|s| s.to_string()).collect()).unwrap(),
    }
}

fn oracle_polarity(tokens: &[&str]) -> f64 {
    let mut hits = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        if let Some(&(_, s)) = POLARITY.iter().find(|(w, _)| w == t) {
            let lo = i.saturating_sub(WINDOW);
            let flips = (lo..i).filter(|&j| NEGATORS.contains(&tokens[j])).count();
            hits.push(if flips % 2 == 1 { -s } else { s });
        }
    }
    if hits.is_empty() {
        0.0
    } else {
        (hits.iter().sum::<f64>() / hits.len() as f64).clamp(-1.0, 1.0)
    }
}

fn oracle_tag(w: &str) -> &'static str {
    if let Some(&(_, t)) = POS_WORDS.iter().find(|(x, _)| *x == w) {
        return t;
    }
    for &(suffix, t) in POS_SUFFIXES {
        if w.len() > suffix.len() && w.ends_with(suffix) {
            return t;
        }
    }
    "NOUN"
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Hand computation of all 30 features from the annotated turns.
fn oracle_features(turns: &[Turn], question_keys: &[String]) -> HashMap<String, f64> {
    let mut out = HashMap::new();
    for key in question_keys {
        let mut words: Vec<&str> = Vec::new();
        let mut answering = false;
        for &(bot, _, _, text, q) in turns {
            if bot {
                answering = q == Some(key.as_str());
            } else if answering {
                words.extend(text.split_whitespace());
            }
        }
        out.insert(format!("q_{key}"), oracle_polarity(&words));
    }

    let comments: Vec<(f64, f64, Vec<&str>)> = turns
        .iter()
        .filter(|t| !t.0)
        .map(|&(_, a, b, text, _)| (a, b, text.split_whitespace().collect::<Vec<_>>()))
        .filter(|c| !c.2.is_empty())
        .collect();
    let all: Vec<&str> = comments.iter().flat_map(|c| c.2.iter().copied()).collect();
    out.insert("avg_sentiment".into(), oracle_polarity(&all));

    let gaps: Vec<f64> = turns
        .windows(2)
        .filter(|w| w[0].0 && !w[1].0)
        .map(|w| if w[1].1 > w[0].2 { w[1].1 - w[0].2 } else { 0.0 })
        .collect();
    out.insert("avg_response_time".into(), mean(&gaps));

    let rates: Vec<f64> = comments.iter().filter(|c| c.1 > c.0).map(|c| c.2.len() as f64 / (c.1 - c.0)).collect();
    out.insert("speech_speed".into(), mean(&rates));

    let per_comment = |f: &dyn Fn(&[&str]) -> usize| -> f64 {
        mean(&comments.iter().map(|c| f(&c.2) as f64 / c.2.len() as f64).collect::<Vec<_>>())
    };
    out.insert(
        "avg_unique_frequency".into(),
        per_comment(&|t| {
            let mut seen: Vec<&str> = Vec::new();
            for w in t {
                if !seen.contains(w) {
                    seen.push(w);
                }
            }
            seen.len()
        }),
    );
    out.insert("avg_sw_frequency".into(), per_comment(&|t| t.iter().filter(|w| STOPWORDS.contains(w)).count()));
    out.insert("avg_characters".into(), per_comment(&|t| t.iter().map(|w| w.chars().count()).sum()));
    for (key, tag) in [("avg_nouns", "NOUN"), ("avg_verbs", "VERB"), ("adj_freq", "ADJ"), ("avg_adv", "ADV")] {
        out.insert(key.into(), per_comment(&|t| t.iter().filter(|w| oracle_tag(w) == tag).count()));
    }
    out.insert("fp_avg".into(), per_comment(&|t| t.iter().filter(|w| FIRST_PERSON.contains(w)).count()));
    out
}

fn feature_oracle() -> Outcome {
    let registry = QuestionRegistry::default();
    let question_keys: Vec<String> = registry.keys().map(str::to_string).collect();
    let fx = FeatureExtractor::new(registry.clone(), fixture_lexica());
    ensure(fx.feature_keys().len() == 30, || format!("{} feature keys", fx.feature_keys().len()))?;
    let policy = CleaningPolicy::default();
    let mut compared = 0;
    let mut nonzero = 0;
    let mut worst = 0.0f64;
    for (id, turns) in fixture_sessions() {
        let mut tsv = String::from("start_time\tstop_time\tspeaker\tvalue\n");
        for &(bot, a, b, text, _) in &turns {
            tsv.push_str(&format!("{a}\t{b}\t{}\t{text}\n", if bot { "Ellie" } else { "Participant" }));
        }
        let mut s = parse_transcript(tsv.as_bytes(), id).map_err(|e| format!("{id}: {e}"))?;
        clean_session(&mut s, &policy);
        ensure(s.utterances.len() == turns.len(), || {
            format!("{id}: {} utterances after cleaning", s.utterances.len())
        })?;
        for (u, t) in s.utterances.iter().zip(&turns) {
            ensure((u.speaker == Speaker::Bot) == t.0, || format!("{id}: speaker order changed at {:?}", t.3))?;
            if t.0 {
                let got = match_question(&u.text, &registry);
                ensure(got == t.4, || format!("{id}: {:?} matched {got:?}, annotated {:?}", t.3, t.4))?;
            } else {
                ensure(u.text == t.3, || format!("{id}: participant text changed to {:?}", u.text))?;
            }
        }

        let oracle = oracle_features(&turns, &question_keys);
        let v = fx.extract(&s);
        ensure(oracle.len() == 30 && v.len() == 30, || {
            format!("{id}: oracle {} keys, vector {}", oracle.len(), v.len())
        })?;
        for (key, got) in v.iter() {
            let want = *oracle.get(key).ok_or_else(|| format!("{id}: oracle lacks {key}"))?;
            let err = (got - want).abs();
            worst = worst.max(err);
            ensure(err <= 1e-9, || format!("{id}: {key} = {got}, oracle {want}"))?;
            compared += 1;
            nonzero += usize::from(want != 0.0);
        }
    }
    Ok(format!("{compared} values ({nonzero} nonzero) over 10 sessions, max error {worst:.1e}"))
}

// ---------------------------------------------------------------------------
// 4. classifier sanity

fn gini_oracle_split(x: &Matrix, y: &[u8]) -> Option<(usize, f64)> {
    let gini = |ys: &[u8]| {
        if ys.is_empty() {
            return 0.0;
        }
        let p = ys.iter().filter(|&&v| v == 1).count() as f64 / ys.len() as f64;
        2.0 * p * (1.0 - p)
    };
    let mut best: Option<(f64, usize, f64)> = None;
    for f in 0..x.n_cols() {
        let mut vals: Vec<f64> = x.rows().map(|r| r[f]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let left: Vec<u8> = x.rows().zip(y).filter(|(r, _)| r[f] <= t).map(|(_, &l)| l).collect();
            let right: Vec<u8> = x.rows().zip(y).filter(|(r, _)| r[f] > t).map(|(_, &l)| l).collect();
            let score = left.len() as f64 * gini(&left) + right.len() as f64 * gini(&right);
            if best.is_none_or(|(b, _, _)| score < b - 1e-9) {
                best = Some((score, f, t));
            }
        }
    }
    best.map(|(_, f, t)| (f, t))
}

fn random_fixture(rng: &mut ChaCha8Rng, n: usize, d: usize, levels: u32) -> (Matrix, Vec<u8>) {
    let rows: Vec<Vec<f64>> =
        (0..n).map(|_| (0..d).map(|_| f64::from(rng.random_range(0..levels)) * 0.5).collect()).collect();
    let mut y: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
    y[0] = 0;
    y[n - 1] = 1;
    (Matrix::from_rows(&rows).unwrap(), y)
}

fn classifier_sanity() -> Outcome {
    let stump = TreeParams { max_depth: 1, ..Default::default() };
    let mut trees = 0;
    // every labelling of a tied one-dimensional layout up to 10 rows
    for n in 2..=10usize {
        let rows: Vec<[f64; 1]> = (0..n).map(|i| [(i / 2) as f64]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        for mask in 0u32..(1 << n) {
            let y: Vec<u8> = (0..n).map(|i| ((mask >> i) & 1) as u8).collect();
            if !(y.contains(&0) && y.contains(&1)) {
                continue;
            }
            let t = fit_tree(&x, &y, &stump).map_err(|e| e.to_string())?;
            let want = gini_oracle_split(&x, &y);
            ensure(t.root_split() == want, || format!("labels {y:?}: split {:?}, oracle {want:?}", t.root_split()))?;
            trees += 1;
        }
    }
    // seeded multi-feature fixtures with 2..=20 rows
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..3000 {
        let n = rng.random_range(2..=20);
        let d = rng.random_range(1..=4);
        let (x, y) = random_fixture(&mut rng, n, d, 6);
        let t = fit_tree(&x, &y, &stump).map_err(|e| e.to_string())?;
        let want = gini_oracle_split(&x, &y);
        ensure(t.root_split() == want, || format!("{n}x{d} fixture: split {:?}, oracle {want:?}", t.root_split()))?;
        trees += 1;
    }

    let mut rounds = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let (x, y) = random_fixture(&mut rng, 40, 3, 20);
        let m = fit_boost(&x, &y, &BoostParams { n_estimators: 50, seed, ..Default::default() })
            .map_err(|e| e.to_string())?;
        let h = m.history();
        // entry 0 is the prior, then one entry per round
        ensure(h.len() == 51, || format!("boost recorded {} entries", h.len()))?;
        for (i, w) in h.windows(2).enumerate() {
            ensure(w[1].logloss <= w[0].logloss, || {
                format!("seed {seed}: logloss rose at round {}: {} -> {}", i + 1, w[0].logloss, w[1].logloss)
            })?;
        }
        rounds += h.len() - 1;
    }

    let mut svms = 0;
    for seed in 0..30u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
        let n = rng.random_range(4..=30);
        let (x, y) = random_fixture(&mut rng, n, 2, 10);
        let c = [0.1, 1.0, 10.0][seed as usize % 3];
        let kernel = if seed % 2 == 0 { KernelKind::Rbf } else { KernelKind::Linear };
        let m = fit_svm(&x, &y, &SvmParams { kernel, c, seed, ..Default::default() }).map_err(|e| e.to_string())?;
        let a = m.alphas();
        ensure(a.len() == n, || format!("{} alphas for {n} rows", a.len()))?;
        ensure(a.iter().all(|&v| (0.0..=c).contains(&v)), || format!("seed {seed}: alpha outside [0, {c}]"))?;
        let balance: f64 = a.iter().zip(&y).map(|(v, &l)| if l == 1 { *v } else { -*v }).sum();
        ensure(balance.abs() <= 1e-6, || format!("seed {seed}: sum alpha*y = {balance}"))?;
        svms += 1;
    }

    let x = Matrix::from_rows(&[[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]]).unwrap();
    let y = [0u8, 0, 1, 1];
    let acc = |p: &SvmParams| -> Result<f64, String> {
        let m = fit_svm(&x, &y, p).map_err(|e| e.to_string())?;
        Ok(x.rows().zip(&y).filter(|(r, &l)| m.predict_row(r) == l).count() as f64 / 4.0)
    };
    let linear = acc(&SvmParams { kernel: KernelKind::Linear, ..Default::default() })?;
    ensure(linear <= 0.75, || format!("linear kernel reached {linear} on XOR"))?;
    let rbf = acc(&SvmParams { kernel: KernelKind::Rbf, gamma: Gamma::Value(1.0), ..Default::default() })?;
    ensure(rbf == 1.0, || format!("RBF kernel reached only {rbf} on XOR"))?;
    Ok(format!(
        "{trees} stumps match the oracle, {rounds} boosting rounds monotone, {svms} SVM fits feasible, XOR linear {linear} / RBF {rbf}"
    ))
}

// ---------------------------------------------------------------------------
// 5. end to end

fn end_to_end() -> Outcome {
    let (corpus, m) = synthetic_matrix(&SynthSpec::new(189, 0.3, 2.0, 0));
    ensure(corpus.len() == 189, || format!("{} sessions accepted", corpus.len()))?;
    let (_, train, test) = split(&corpus, &m, 0);
    ensure(train.n_rows() == 152 && test.n_rows() == 37, || format!("split {}/{}", train.n_rows(), test.n_rows()))?;
    let s = spec(Estimator::Forest, 17, 4, vec![GridAxis::new("n_estimators", ints(&[100]))]);
    let start = Instant::now();
    let serial = run_search(&s, &train, &test, 1).map_err(|e| e.to_string())?;
    let serial_time = start.elapsed();
    ensure(serial.results().len() == 2380, || format!("{} results", serial.results().len()))?;
    ensure(serial.failures().is_empty(), || format!("{} failed configs", serial.failures().len()))?;
    ensure(serial_time < Duration::from_secs(300), || format!("serial search took {serial_time:?}"))?;
    let parallel = run_search(&s, &train, &test, 4).map_err(|e| e.to_string())?;
    ensure(parallel.to_csv() == serial.to_csv(), || "leaderboards differ between parallelism 1 and 4".into())?;

    let b = BaselineReport::new(test.labels()).map_err(|e| e.to_string())?;
    let top = serial.best().unwrap();
    ensure(top.accuracy > b.accuracy_zero && top.accuracy > b.accuracy_one, || {
        format!("top-1 {} does not beat baselines {} / {}", top.accuracy, b.accuracy_zero, b.accuracy_one)
    })?;
    Ok(format!(
        "2380 configs in {:.1} s, top-1 {}/37 vs baselines {}/37 and {}/37, leaderboards identical at 1 and 4 threads",
        serial_time.as_secs_f64(),
        top.confusion.tp + top.confusion.tn,
        b.zeros,
        b.ones
    ))
}

// ---------------------------------------------------------------------------
// 6. determinism

fn determinism() -> Outcome {
    let synth = SynthSpec::new(60, 0.4, 1.5, 9);
    let a = generate_synthetic_corpus(&synth).map_err(|e| e.to_string())?;
    let b = generate_synthetic_corpus(&synth).map_err(|e| e.to_string())?;
    ensure(a == b, || "synthetic corpora differ".into())?;
    let bytes = |c: &SyntheticCorpus| -> String {
        c.corpus.sessions().iter().map(write_transcript).collect::<Vec<_>>().concat() + &c.labels.to_csv()
    };
    ensure(bytes(&a) == bytes(&b), || "synthetic transcripts differ".into())?;

    let (corpus, m) = synthetic_matrix(&synth);
    let (p1, train, test) = split(&corpus, &m, 5);
    let (p2, _, _) = split(&corpus, &m, 5);
    ensure(p1 == p2, || "split plans differ".into())?;
    ensure(p1.to_text() == p2.to_text(), || "split files differ".into())?;

    let keys = pool(6);
    let x = train.select(&keys).map_err(|e| e.to_string())?;
    let xt = test.select(&keys).map_err(|e| e.to_string())?;
    let configs = [
        ModelConfig::Tree(TreeParams { seed: 3, ..Default::default() }),
        ModelConfig::Forest(ForestParams { n_trees: 30, seed: 3, ..Default::default() }),
        ModelConfig::Boost(BoostParams { n_estimators: 30, seed: 3, ..Default::default() }),
        ModelConfig::Svm(SvmParams { seed: 3, ..Default::default() }),
    ];
    for cfg in &configs {
        let f1 = cfg.fit(&x, train.labels(), &keys).map_err(|e| e.to_string())?;
        let f2 = cfg.fit(&x, train.labels(), &keys).map_err(|e| e.to_string())?;
        ensure(f1.to_json() == f2.to_json(), || format!("{:?} fits differ", cfg.kind()))?;
        ensure(f1.predict(&xt).unwrap() == f2.predict(&xt).unwrap(), || {
            format!("{:?} predictions differ", cfg.kind())
        })?;
    }

    let searches = [
        spec(Estimator::Forest, 8, 3, vec![GridAxis::new("n_estimators", ints(&[10]))]),
        spec(Estimator::Boost, 8, 2, vec![GridAxis::new("n_estimators", ints(&[10, 20]))]),
        spec(Estimator::Svm, 8, 2, vec![GridAxis::new("gamma", floats(&[0.1, 1.0]))]),
    ];
    let mut configs_run = 0;
    for s in &searches {
        let l1 = run_search(s, &train, &test, 1).map_err(|e| e.to_string())?.to_csv();
        let l2 = run_search(s, &train, &test, 1).map_err(|e| e.to_string())?.to_csv();
        let l3 = run_search(s, &train, &test, 3).map_err(|e| e.to_string())?.to_csv();
        ensure(l1 == l2, || format!("{} search repeated differently", s.estimator))?;
        ensure(l1 == l3, || format!("{} search differs between 1 and 3 threads", s.estimator))?;
        configs_run += enumerate_configs(s).unwrap().len();
    }
    Ok(format!("synth, split, 4 model fits and {configs_run} search configs reproduce bit for bit"))
}

// ---------------------------------------------------------------------------
// 7. baseline contract

fn baseline_contract() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..2000 {
        let n = rng.random_range(1..=250);
        let p: f64 = rng.random();
        let labels: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(p))).collect();
        let mut counts = [0usize; 2];
        for &l in &labels {
            counts[usize::from(l)] += 1;
        }
        for c in [0u8, 1] {
            let got = baseline_accuracy(&labels, c).map_err(|e| e.to_string())?;
            let want = counts[usize::from(c)] as f64 / n as f64;
            ensure(got.to_bits() == want.to_bits(), || {
                format!("trial {trial}: constant {c} gave {got}, oracle {want}")
            })?;
        }
    }
    ensure(baseline_accuracy(&[], 0).is_err(), || "empty label set accepted".into())?;
    ensure(baseline_accuracy(&[0, 1], 2).is_err(), || "constant 2 accepted".into())?;
    Ok("2000 random label arrays match the counting oracle for both constants".into())
}

// ---------------------------------------------------------------------------

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("enumeration counts", Duration::from_secs(1), enumeration_counts),
        ("accuracy quantization", Duration::from_secs(1), quantization),
        ("feature oracle", Duration::from_secs(5), feature_oracle),
        ("classifier sanity", Duration::from_secs(30), classifier_sanity),
        ("end-to-end search", Duration::from_secs(300), end_to_end),
        ("determinism", Duration::from_secs(120), determinism),
        ("baseline contract", Duration::from_secs(1), baseline_contract),
    ];
    let mut failed = 0;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > budget => {
                Err(format!("took {:.2} s, budget {} s", elapsed.as_secs_f64(), budget.as_secs()))
            }
            other => other,
        };
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag}  {name:<22} {:>7.2} s  {detail}", elapsed.as_secs_f64());
    }
    println!("{} of 7 criteria passed", 7 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
