//! The TOML run configuration.
//!
//! Relative paths are resolved against the directory holding the config
//! file. Per-block seeds fall back to the global `seed`.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use depscreen::corpus::{CleaningPolicy, SplitParams};
use depscreen::features::{FeatureExtractor, Lexica, QuestionRegistry};
use depscreen::search::{Estimator, GridAxis, SearchSpec};
use depscreen::textproc::{
    FirstPersonSet, LexiconError, PolarityLexicon, PosLexicon, StopwordSet, DEFAULT_NEGATION_WINDOW,
};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub corpus_dir: PathBuf,
    pub labels_path: PathBuf,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question_registry: Option<PathBuf>,
    #[serde(default)]
    pub cleaning: CleaningConfig,
    #[serde(default)]
    pub lexica: LexicaConfig,
    pub split: SplitConfig,
    #[serde(default)]
    pub search: Vec<SearchBlock>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_parallelism() -> usize {
    1
}

/// Overrides of the default cleaning policy.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CleaningConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lowercase: Option<bool>,
    /// Every character of the string is stripped.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub punctuation: Option<String>,
    /// Two-character strings such as `"<>"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub markers: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexicaConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarity: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negators: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negation_window: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stopwords: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_person: Option<PathBuf>,
}

/// Either a seeded ratio split or a fixed plan file, never both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchBlock {
    /// Used for output file names.
    pub name: String,
    pub estimator: Estimator,
    /// Defaults to every extracted feature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_pool: Option<Vec<String>>,
    pub subset_size: usize,
    #[serde(default)]
    pub grid: Vec<GridAxis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_limit: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

impl RunConfig {
    /// Parses `path` and resolves its relative paths.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read_text(path)?;
        let mut cfg: RunConfig = toml::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.corpus_dir);
        fix(&mut self.labels_path);
        fix(&mut self.output_dir);
        for p in [
            &mut self.question_registry,
            &mut self.split.plan,
            &mut self.lexica.polarity,
            &mut self.lexica.pos,
            &mut self.lexica.stopwords,
            &mut self.lexica.first_person,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    /// Command-line overrides. A seed replaces the global seed and every
    /// per-block seed.
    pub fn apply_overrides(&mut self, out: Option<&Path>, parallelism: Option<usize>, seed: Option<u64>) {
        if let Some(out) = out {
            self.output_dir = out.to_path_buf();
        }
        if let Some(p) = parallelism {
            self.parallelism = p;
        }
        if let Some(s) = seed {
            self.seed = s;
            self.split.seed = None;
            for b in &mut self.search {
                b.seed = None;
            }
        }
    }

    /// Checks everything that can be checked without reading the corpus.
    pub fn validate(&self) -> Result<(), CliError> {
        if !self.corpus_dir.is_dir() {
            return Err(invalid(format!("corpus_dir {} is not a directory", self.corpus_dir.display())));
        }
        let mut files = vec![("labels_path", &self.labels_path)];
        let optional = [
            ("question_registry", &self.question_registry),
            ("split.plan", &self.split.plan),
            ("lexica.polarity", &self.lexica.polarity),
            ("lexica.pos", &self.lexica.pos),
            ("lexica.stopwords", &self.lexica.stopwords),
            ("lexica.first_person", &self.lexica.first_person),
        ];
        files.extend(optional.iter().filter_map(|(k, p)| p.as_ref().map(|p| (*k, p))));
        for (key, path) in files {
            if !path.is_file() {
                return Err(invalid(format!("{key} {} does not exist", path.display())));
            }
        }
        if self.parallelism == 0 {
            return Err(invalid("parallelism must be at least 1"));
        }
        match (&self.split.ratio, &self.split.plan) {
            (Some(r), None) if *r > 0.0 && *r < 1.0 => {}
            (Some(r), None) => return Err(invalid(format!("split.ratio {r} is outside (0, 1)"))),
            (None, Some(_)) if self.split.seed.is_none() => {}
            (None, Some(_)) => return Err(invalid("split.seed has no effect with split.plan")),
            _ => return Err(invalid("split needs exactly one of ratio or plan")),
        }
        if self.search.is_empty() {
            return Err(invalid("at least one [[search]] block is required"));
        }
        let mut names = HashSet::new();
        for b in &self.search {
            let safe = !b.name.is_empty() && b.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
            if !safe {
                return Err(invalid(format!("search name {:?} must be non-empty [A-Za-z0-9_-]", b.name)));
            }
            if !names.insert(&b.name) {
                return Err(invalid(format!("search name {} is used twice", b.name)));
            }
        }
        self.cleaning_policy()?;
        let keys = self.feature_extractor()?.feature_keys().to_vec();
        for b in &self.search {
            let spec = self.search_spec(b, &keys);
            if let Some(k) = spec.feature_pool.iter().find(|k| !keys.contains(k)) {
                return Err(invalid(format!("search {}: unknown feature {k}", b.name)));
            }
            spec.validate().map_err(|e| invalid(format!("search {}: {e}", b.name)))?;
        }
        Ok(())
    }

    pub fn cleaning_policy(&self) -> Result<CleaningPolicy, CliError> {
        let d = CleaningPolicy::default();
        let c = &self.cleaning;
        let punctuation: Vec<char> = match &c.punctuation {
            Some(p) => p.chars().collect(),
            None => d.punctuation().iter().copied().collect(),
        };
        let markers = match &c.markers {
            None => d.markers().to_vec(),
            Some(ms) => ms
                .iter()
                .map(|m| {
                    let cs: Vec<char> = m.chars().collect();
                    match cs[..] {
                        [open, close] => Ok((open, close)),
                        _ => Err(invalid(format!("marker {m:?} must be two characters"))),
                    }
                })
                .collect::<Result<_, _>>()?,
        };
        CleaningPolicy::new(c.lowercase.unwrap_or(d.lowercase()), punctuation, markers)
            .map_err(|e| invalid(format!("cleaning: {e}")))
    }

    pub fn feature_extractor(&self) -> Result<FeatureExtractor, CliError> {
        let registry = match &self.question_registry {
            Some(p) => QuestionRegistry::parse(&read_text(p)?).map_err(|e| invalid(format!("{}: {e}", p.display())))?,
            None => QuestionRegistry::default(),
        };
        let l = &self.lexica;
        fn ctx(p: &Path) -> impl Fn(LexiconError) -> CliError + '_ {
            move |e| invalid(format!("{}: {e}", p.display()))
        }
        let polarity = match (&l.polarity, &l.negators, l.negation_window) {
            (None, None, None) => PolarityLexicon::english(),
            (path, negators, window) => {
                let negators =
                    negators.as_ref().map_or_else(PolarityLexicon::default_negators, |n| n.iter().cloned().collect());
                let window = window.unwrap_or(DEFAULT_NEGATION_WINDOW);
                let (text, origin) = match path {
                    Some(p) => (read_text(p)?, p.clone()),
                    None => (depscreen::textproc::ENGLISH_POLARITY.to_string(), PathBuf::from("<built-in polarity>")),
                };
                PolarityLexicon::parse(&text, negators, window).map_err(ctx(&origin))?
            }
        };
        let pos = match &l.pos {
            Some(p) => PosLexicon::parse(&read_text(p)?).map_err(ctx(p))?,
            None => PosLexicon::english(),
        };
        let stopwords = match &l.stopwords {
            Some(p) => StopwordSet::parse(&read_text(p)?).map_err(ctx(p))?,
            None => StopwordSet::english(),
        };
        let first_person = match &l.first_person {
            Some(p) => FirstPersonSet::parse(&read_text(p)?).map_err(ctx(p))?,
            None => FirstPersonSet::english(),
        };
        Ok(FeatureExtractor::new(registry, Lexica { polarity, pos, stopwords, first_person }))
    }

    pub fn split_params(&self) -> Option<SplitParams> {
        self.split.ratio.map(|ratio| SplitParams { ratio, seed: self.split.seed.unwrap_or(self.seed) })
    }

    /// The search spec of block `b`; `all_keys` fills a missing pool.
    pub fn search_spec(&self, b: &SearchBlock, all_keys: &[String]) -> SearchSpec {
        SearchSpec {
            estimator: b.estimator,
            feature_pool: b.feature_pool.clone().unwrap_or_else(|| all_keys.to_vec()),
            subset_size: b.subset_size,
            param_grid: b.grid.clone(),
            sample_limit: b.sample_limit,
            seed: b.seed.unwrap_or(self.seed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
corpus_dir = "c"
labels_path = "labels.csv"
seed = 5

[split]
ratio = 0.8

[[search]]
name = "rf"
estimator = "forest"
subset_size = 2
feature_pool = ["fp_avg", "avg_nouns", "speech_speed"]

[[search.grid]]
param = "n_estimators"
values = [10, 20]
"#;

    fn workspace() -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir(dir.path().join("c")).unwrap();
        fs::write(dir.path().join("labels.csv"), "Participant_ID,PHQ8_Binary\n").unwrap();
        fs::write(dir.path().join("run.toml"), MINIMAL).unwrap();
        dir
    }

    #[test]
    fn paths_resolve_against_the_config_file() {
        let dir = workspace();
        let cfg = RunConfig::load(&dir.path().join("run.toml")).unwrap();
        assert_eq!(cfg.corpus_dir, dir.path().join("c"));
        assert_eq!(cfg.output_dir, dir.path().join("out"));
        cfg.validate().unwrap();
        assert_eq!(cfg.split_params().unwrap().seed, 5);
        let spec = cfg.search_spec(&cfg.search[0], &[]);
        assert_eq!((spec.seed, spec.grid_size()), (5, 2));
    }

    #[test]
    fn seed_override_replaces_block_seeds() {
        let dir = workspace();
        let mut cfg = RunConfig::load(&dir.path().join("run.toml")).unwrap();
        cfg.split.seed = Some(1);
        cfg.search[0].seed = Some(2);
        cfg.apply_overrides(None, Some(3), Some(99));
        assert_eq!(cfg.split_params().unwrap().seed, 99);
        assert_eq!(cfg.search_spec(&cfg.search[0], &[]).seed, 99);
        assert_eq!(cfg.parallelism, 3);
    }

    #[test]
    fn validation_catches_bad_configs() {
        let dir = workspace();
        let base = RunConfig::load(&dir.path().join("run.toml")).unwrap();

        let mut c = base.clone();
        c.labels_path = dir.path().join("missing.csv");
        assert!(matches!(c.validate(), Err(CliError::Validation(m)) if m.contains("labels_path")));

        let mut c = base.clone();
        c.search.clear();
        assert!(c.validate().is_err());

        let mut c = base.clone();
        c.search[0].feature_pool = Some(vec!["nope".into(), "fp_avg".into()]);
        assert!(c.validate().is_err());

        let mut c = base.clone();
        c.split.plan = Some(dir.path().join("labels.csv"));
        assert!(c.validate().is_err());

        let mut c = base.clone();
        c.cleaning.markers = Some(vec!["<".into()]);
        assert!(c.validate().is_err());

        let mut c = base;
        c.search.push(c.search[0].clone());
        assert!(c.validate().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = workspace();
        fs::write(dir.path().join("top.toml"), format!("bogus = 1\n{MINIMAL}")).unwrap();
        assert!(RunConfig::load(&dir.path().join("top.toml")).is_err());
        fs::write(dir.path().join("axis.toml"), format!("{MINIMAL}\nbogus = 1\n")).unwrap();
        assert!(RunConfig::load(&dir.path().join("axis.toml")).is_err());
    }
}
