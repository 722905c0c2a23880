//! The five commands. Each one recomputes its upstream stages and rewrites
//! their outputs, so every command is idempotent on unchanged inputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use depscreen::corpus::{
    clean_session, generate_synthetic_corpus, load_labels, parse_transcript_lenient, split_corpus, validate_session,
    write_transcript, LabelTable, Provenance, SplitPlan, SynthSpec, Validation,
};
use depscreen::features::{build_matrix, FeatureMatrix, QuestionRegistry, QUESTION_PREFIX, SCALAR_KEYS};
use depscreen::search::{
    parse_leaderboard_csv, run_search, BaselineReport, Estimator, GridAxis, Leaderboard, ParamValue, SearchSpec,
};
use depscreen::{Corpus, Label, Session};

use crate::config::{RunConfig, SearchBlock, SplitConfig};
use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_FORMAT: &str = "depscreen-run";
pub const MANIFEST_VERSION: u32 = 1;

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_output(path: &Path, contents: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// Session id for a transcript file: the stem without a `_TRANSCRIPT` suffix.
pub fn session_id_for(path: &Path) -> Option<String> {
    let stem = path.file_stem()?.to_str()?;
    Some(stem.strip_suffix("_TRANSCRIPT").unwrap_or(stem).to_string())
}

fn transcript_files(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if path.is_file() && matches!(ext.as_deref(), Some("tsv" | "csv")) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Accepted,
    Rejected(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InventoryRow {
    pub session_id: String,
    pub file: String,
    pub status: Status,
    pub label: Option<Label>,
    pub bot_utterances: usize,
    pub participant_utterances: usize,
}

#[derive(Debug, Clone)]
pub struct Ingested {
    /// Accepted, cleaned sessions in id order, labelled where possible.
    pub corpus: Corpus,
    pub labels: LabelTable,
    pub inventory: Vec<InventoryRow>,
    pub corpus_digest: String,
    pub labels_digest: String,
}

impl Ingested {
    pub fn accepted(&self) -> usize {
        self.inventory.iter().filter(|r| r.status == Status::Accepted).count()
    }

    /// Accepted sessions that have a label, in id order.
    pub fn labelled_sessions(&self) -> Vec<Session> {
        self.corpus.sessions().iter().filter(|s| s.label.is_some()).cloned().collect()
    }

    pub fn summary(&self) -> String {
        let rejected: Vec<&str> = self
            .inventory
            .iter()
            .filter_map(|r| match &r.status {
                Status::Rejected(reason) => Some(reason.as_str()),
                Status::Accepted => None,
            })
            .collect();
        let mut reasons: BTreeMap<&str, usize> = BTreeMap::new();
        for r in &rejected {
            *reasons.entry(r).or_default() += 1;
        }
        let mut out = format!("{} accepted, {} rejected", self.accepted(), rejected.len());
        if !reasons.is_empty() {
            let parts: Vec<String> =
                reasons.iter().map(|(r, &n)| if n == 1 { r.to_string() } else { format!("{r} x{n}") }).collect();
            write!(out, " ({})", parts.join(", ")).unwrap();
        }
        let sessions = self.corpus.sessions();
        let count = |l: Option<Label>| sessions.iter().filter(|s| s.label == l).count();
        write!(
            out,
            "\naccepted by class: {} not depressed, {} depressed, {} unlabelled",
            count(Some(Label::NotDepressed)),
            count(Some(Label::Depressed)),
            count(None)
        )
        .unwrap();
        out
    }

    fn inventory_tsv(&self) -> String {
        let mut out = String::from("session_id\tfile\tstatus\treason\tlabel\tbot_utterances\tparticipant_utterances\n");
        for r in &self.inventory {
            let (status, reason) = match &r.status {
                Status::Accepted => ("accepted", ""),
                Status::Rejected(reason) => ("rejected", reason.as_str()),
            };
            let label = r.label.map_or(String::new(), |l| l.bit().to_string());
            writeln!(
                out,
                "{}\t{}\t{status}\t{reason}\t{label}\t{}\t{}",
                r.session_id, r.file, r.bot_utterances, r.participant_utterances
            )
            .unwrap();
        }
        out
    }
}

/// Parses, cleans, validates and labels the corpus, then writes the
/// inventory and summary under `ingest/`.
pub fn cmd_ingest(cfg: &RunConfig) -> Result<Ingested, CliError> {
    let labels_raw =
        fs::read(&cfg.labels_path).map_err(|e| CliError::Validation(format!("{}: {e}", cfg.labels_path.display())))?;
    let labels =
        load_labels(&labels_raw).map_err(|e| CliError::Validation(format!("{}: {e}", cfg.labels_path.display())))?;
    let policy = cfg.cleaning_policy()?;

    let mut inventory = Vec::new();
    let mut accepted = Vec::new();
    let mut digest_lines = String::new();
    let mut seen = BTreeMap::new();
    for path in transcript_files(&cfg.corpus_dir)? {
        let file = path.file_name().and_then(|f| f.to_str()).unwrap_or_default().to_string();
        let Some(id) = session_id_for(&path) else { continue };
        if let Some(other) = seen.insert(id.clone(), file.clone()) {
            return Err(CliError::Validation(format!("files {other} and {file} both hold session {id}")));
        }
        let raw = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
        writeln!(digest_lines, "{file}\t{}", sha256_hex(&raw)).unwrap();
        let label = labels.get(&id);
        let mut row = InventoryRow {
            session_id: id.clone(),
            file,
            status: Status::Accepted,
            label,
            bot_utterances: 0,
            participant_utterances: 0,
        };
        match parse_transcript_lenient(&raw, &id) {
            Err(e) => {
                log::warn!("{}: {e}", path.display());
                row.status = Status::Rejected(format!("ParseError: {e}"));
            }
            Ok((mut session, problems)) => {
                for p in problems {
                    log::warn!("{}: {p}; row skipped", path.display());
                }
                clean_session(&mut session, &policy);
                row.bot_utterances = session.count(depscreen::Speaker::Bot);
                row.participant_utterances = session.count(depscreen::Speaker::Participant);
                match validate_session(&session) {
                    Validation::Accept => {
                        session.label = label;
                        if label.is_none() {
                            log::warn!("session {id} has no label and is left out of extraction");
                        }
                        accepted.push(session);
                    }
                    Validation::Reject(reason) => row.status = Status::Rejected(reason.to_string()),
                }
            }
        }
        inventory.push(row);
    }
    accepted.sort_by(|a, b| a.session_id.cmp(&b.session_id));
    inventory.sort_by(|a, b| a.session_id.cmp(&b.session_id));
    let corpus = Corpus::new(accepted, Provenance::Real).map_err(|e| CliError::Validation(e.to_string()))?;
    let ingested = Ingested {
        corpus,
        labels,
        inventory,
        corpus_digest: sha256_hex(digest_lines.as_bytes()),
        labels_digest: sha256_hex(&labels_raw),
    };
    write_output(&cfg.output_dir.join("ingest/inventory.tsv"), &ingested.inventory_tsv())?;
    write_output(&cfg.output_dir.join("ingest/summary.txt"), &format!("{}\n", ingested.summary()))?;
    if ingested.accepted() == 0 {
        return Err(CliError::Validation(format!("no sessions accepted from {}", cfg.corpus_dir.display())));
    }
    Ok(ingested)
}

/// Ingest, then one feature row per labelled accepted session in id order,
/// written to `features.csv`.
pub fn cmd_extract(cfg: &RunConfig) -> Result<(Ingested, FeatureMatrix), CliError> {
    let ingested = cmd_ingest(cfg)?;
    let fx = cfg.feature_extractor()?;
    let sessions = ingested.labelled_sessions();
    if sessions.is_empty() {
        return Err(CliError::Validation("no accepted session has a label".into()));
    }
    let vectors = fx.extract_all(&sessions);
    let matrix = build_matrix(&vectors, &ingested.labels, fx.feature_keys()).context("building feature matrix")?;
    write_output(&cfg.output_dir.join("features.csv"), &matrix.to_csv())?;
    Ok((ingested, matrix))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub ratio: Option<f64>,
    pub seed: Option<u64>,
    pub plan_file: Option<PathBuf>,
    pub n_train: usize,
    pub n_test: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub name: String,
    pub spec: SearchSpec,
    pub spec_digest: String,
    pub total_configs: u64,
    pub evaluated: usize,
    pub failed: usize,
    pub best_accuracy: Option<f64>,
    pub leaderboard: String,
    pub leaderboard_sha256: String,
}

/// Everything needed to re-run a search and check its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub tool_version: String,
    pub config: RunConfig,
    pub config_digest: String,
    pub corpus_digest: String,
    pub labels_digest: String,
    pub transcripts: usize,
    pub accepted: usize,
    pub features_sha256: String,
    pub split: SplitRecord,
    pub baseline: BaselineReport,
    pub searches: Vec<SearchRecord>,
}

fn make_split(cfg: &RunConfig, corpus: &Corpus) -> Result<(SplitPlan, SplitRecord), CliError> {
    let plan = match (&cfg.split, cfg.split_params()) {
        (SplitConfig { plan: Some(path), .. }, _) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let plan = SplitPlan::parse(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
            plan.check_covers(corpus).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
            plan
        }
        (_, Some(params)) => split_corpus(corpus, params).context("splitting corpus")?,
        _ => return Err(CliError::Validation("split needs a ratio or a plan".into())),
    };
    let text = plan.to_text();
    let record = SplitRecord {
        ratio: cfg.split.ratio,
        seed: plan.seed,
        plan_file: cfg.split.plan.clone(),
        n_train: plan.train_ids.len(),
        n_test: plan.test_ids.len(),
        sha256: sha256_hex(text.as_bytes()),
    };
    write_output(&cfg.output_dir.join("split.tsv"), &text)?;
    Ok((plan, record))
}

fn leaderboard_path(name: &str) -> String {
    format!("leaderboards/{name}.csv")
}

fn failures_tsv(lb: &Leaderboard) -> String {
    let mut out = String::from("ordinal\terror\n");
    for f in lb.failures() {
        writeln!(out, "{}\t{}", f.ordinal, f.error.replace(['\t', '\n'], " ")).unwrap();
    }
    out
}

/// Extract, split, then run every search block and write the leaderboards,
/// `baseline.json` and the manifest.
pub fn cmd_search(cfg: &RunConfig) -> Result<Manifest, CliError> {
    let (ingested, matrix) = cmd_extract(cfg)?;
    let labelled =
        Corpus::new(ingested.labelled_sessions(), Provenance::Real).map_err(|e| CliError::Validation(e.to_string()))?;
    let (plan, split) = make_split(cfg, &labelled)?;
    let train = matrix.restrict_rows(&plan.train_ids);
    let test = matrix.restrict_rows(&plan.test_ids);
    let baseline = BaselineReport::new(test.labels()).context("computing baselines")?;
    write_output(&cfg.output_dir.join("baseline.json"), &serde_json::to_string_pretty(&baseline).context("baseline")?)?;

    let mut searches = Vec::new();
    for block in &cfg.search {
        let spec = cfg.search_spec(block, matrix.feature_keys());
        log::info!(
            "search {}: {} configs",
            block.name,
            spec.emitted_configs().map_err(|e| CliError::Validation(e.to_string()))?
        );
        let lb = run_search(&spec, &train, &test, cfg.parallelism).with_context(|| format!("search {}", block.name))?;
        let csv = lb.to_csv();
        let rel = leaderboard_path(&block.name);
        write_output(&cfg.output_dir.join(&rel), &csv)?;
        write_output(&cfg.output_dir.join(format!("leaderboards/{}.failures.tsv", block.name)), &failures_tsv(&lb))?;
        searches.push(SearchRecord {
            name: block.name.clone(),
            spec_digest: lb.spec_digest().to_string(),
            total_configs: spec.emitted_configs().map_err(|e| CliError::Validation(e.to_string()))? as u64,
            evaluated: lb.results().len(),
            failed: lb.failures().len(),
            best_accuracy: lb.best().map(|r| r.accuracy),
            leaderboard: rel,
            leaderboard_sha256: sha256_hex(csv.as_bytes()),
            spec,
        });
    }
    let config_json = serde_json::to_string(cfg).context("serialising config")?;
    let manifest = Manifest {
        format: MANIFEST_FORMAT.into(),
        version: MANIFEST_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        config_digest: sha256_hex(config_json.as_bytes()),
        corpus_digest: ingested.corpus_digest.clone(),
        labels_digest: ingested.labels_digest.clone(),
        transcripts: ingested.inventory.len(),
        accepted: ingested.accepted(),
        features_sha256: sha256_hex(matrix.to_csv().as_bytes()),
        split,
        baseline,
        searches,
    };
    write_output(&cfg.output_dir.join(MANIFEST_FILE), &serde_json::to_string_pretty(&manifest).context("manifest")?)?;
    Ok(manifest)
}

pub fn load_manifest(run_dir: &Path) -> Result<Manifest, CliError> {
    let path = run_dir.join(MANIFEST_FILE);
    if !path.is_file() {
        return Err(CliError::MissingManifest(path));
    }
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let m: Manifest = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if m.format != MANIFEST_FORMAT || m.version != MANIFEST_VERSION {
        return Err(CliError::Validation(format!(
            "{}: unsupported manifest {} v{}",
            path.display(),
            m.format,
            m.version
        )));
    }
    Ok(m)
}

/// Top-`k` table per search with a baseline comparison, also saved as
/// `report.txt` in the run directory.
pub fn cmd_report(run_dir: &Path, k: usize) -> Result<String, CliError> {
    let m = load_manifest(run_dir)?;
    let b = &m.baseline;
    let mut out = String::new();
    writeln!(out, "test set: {} sessions ({} not depressed, {} depressed)", b.n, b.zeros, b.ones).unwrap();
    writeln!(out, "baseline always 0: {}", b.accuracy_zero).unwrap();
    writeln!(out, "baseline always 1: {}", b.accuracy_one).unwrap();
    for s in &m.searches {
        let path = run_dir.join(&s.leaderboard);
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        if sha256_hex(text.as_bytes()) != s.leaderboard_sha256 {
            log::warn!("{} differs from the manifest digest", path.display());
        }
        let results = parse_leaderboard_csv(&text).with_context(|| format!("parsing {}", path.display()))?;
        let lb = Leaderboard::new(results, Vec::new(), s.spec_digest.clone());
        writeln!(out, "\n== {} ({}) ==", s.name, s.spec.estimator).unwrap();
        writeln!(out, "configs: {} evaluated, {} failed", s.evaluated, s.failed).unwrap();
        match lb.best() {
            Some(best) => {
                let correct = best.confusion.tp + best.confusion.tn;
                writeln!(out, "best accuracy: {} ({correct}/{})", best.accuracy, best.confusion.total()).unwrap();
                let margin = best.accuracy - b.best();
                writeln!(out, "versus best baseline: {margin:+}").unwrap();
            }
            None => writeln!(out, "best accuracy: none").unwrap(),
        }
        out.push_str(&lb.top_k_table(k));
    }
    write_output(&run_dir.join("report.txt"), &out)?;
    Ok(out)
}

/// Options for synthetic fixture generation.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    pub sessions: usize,
    pub positive_fraction: f64,
    pub signal: f64,
    pub botless: usize,
    pub seed: u64,
}

/// The 17-feature pool used by the generated run config: every scalar
/// feature plus the first six question sentiments.
pub fn default_pool() -> Vec<String> {
    let registry = QuestionRegistry::default();
    let questions = registry.keys().take(6).map(|k| format!("{QUESTION_PREFIX}{k}"));
    SCALAR_KEYS.iter().map(|k| k.to_string()).chain(questions).collect()
}

/// Writes `transcripts/`, `labels.csv` and a ready-to-run `run.toml` into `out`.
pub fn cmd_synth(out: &Path, opts: &SynthOptions) -> Result<String, CliError> {
    let spec = SynthSpec {
        n_sessions: opts.sessions,
        positive_fraction: opts.positive_fraction,
        signal_strength: opts.signal,
        seed: opts.seed,
        botless_sessions: opts.botless,
    };
    let sc = generate_synthetic_corpus(&spec).map_err(|e| CliError::Validation(e.to_string()))?;
    for s in sc.corpus.sessions() {
        write_output(&out.join(format!("transcripts/{}_TRANSCRIPT.csv", s.session_id)), &write_transcript(s))?;
    }
    write_output(&out.join("labels.csv"), &sc.labels.to_csv())?;
    let cfg = RunConfig {
        corpus_dir: "transcripts".into(),
        labels_path: "labels.csv".into(),
        output_dir: "run".into(),
        parallelism: 1,
        seed: opts.seed,
        question_registry: None,
        cleaning: Default::default(),
        lexica: Default::default(),
        split: SplitConfig { ratio: Some(0.8), seed: None, plan: None },
        search: vec![SearchBlock {
            name: "rf".into(),
            estimator: Estimator::Forest,
            feature_pool: Some(default_pool()),
            subset_size: 4,
            grid: vec![GridAxis::new("n_estimators", vec![ParamValue::Int(100)])],
            sample_limit: None,
            seed: None,
        }],
    };
    let toml = toml::to_string(&cfg).context("serialising run.toml")?;
    write_output(&out.join("run.toml"), &toml)?;
    Ok(format!("{} sessions ({} depressed) written to {}", sc.corpus.len(), sc.labels.positives(), out.display()))
}
