use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::analysis::ModeCategoryDictionary;
use crate::corpus::{CorpusConfig, GroupingPolicy};
use crate::error::{Error, Result};
use crate::preprocess::NormalizationRules;
use crate::sentiment::{SeedWordSets, Thresholds};
use crate::topics::LdaConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Option<OutputFormat> {
        match s {
            "csv" => Some(OutputFormat::Csv),
            "json" => Some(OutputFormat::Json),
            _ => None,
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

/// Fully resolved pipeline settings: inputs and output, corpus handling,
/// normalization, topic model, sentiment training, and report options.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub inputs: Vec<PathBuf>,
    pub output: PathBuf,
    pub format: OutputFormat,
    /// Root seed; every stochastic stage derives its own stream from it.
    pub seed: u64,
    pub grouping: GroupingPolicy,
    pub corpus: CorpusConfig,
    pub rules: NormalizationRules,
    /// Path the stopword list was loaded from, if not the built-in default.
    pub stopwords_path: Option<PathBuf>,
    /// Minimum document frequency for vocabulary terms.
    pub min_df: usize,
    pub topics: LdaConfig,
    /// Terms listed per topic in summaries and used for passage search.
    pub top_words: usize,
    /// Context sentences kept on each side of a theme passage.
    pub passage_window: usize,
    pub seeds: SeedWordSets,
    /// Co-occurrence window (tokens) for lexicon induction.
    pub window: usize,
    /// Weak-label threshold on the sentence aggregate score.
    pub tau: f64,
    pub mix: f64,
    pub folds: usize,
    /// Explicit penalty grid; empty means derive one from the data.
    pub lambda_grid: Vec<f64>,
    pub thresholds: Thresholds,
    /// Optional hand-label TSV overriding and extending weak labels.
    pub labels_path: Option<PathBuf>,
    pub include_t4: bool,
    pub modes: ModeCategoryDictionary,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            inputs: Vec::new(),
            output: PathBuf::new(),
            format: OutputFormat::Csv,
            seed: 42,
            grouping: GroupingPolicy::PerUtterance,
            corpus: CorpusConfig::default(),
            rules: NormalizationRules::default(),
            stopwords_path: None,
            min_df: 1,
            topics: LdaConfig::default(),
            top_words: 10,
            passage_window: 1,
            seeds: SeedWordSets::default(),
            window: 10,
            tau: 0.2,
            mix: 0.5,
            folds: 10,
            lambda_grid: Vec::new(),
            thresholds: Thresholds::default(),
            labels_path: None,
            include_t4: false,
            modes: ModeCategoryDictionary::default(),
        }
    }
}

fn parse_value<T: FromStr>(key: &str, lineno: usize, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(key, format!("invalid value {value:?} at line {lineno}")))
}

fn parse_bool(key: &str, lineno: usize, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::config(
            key,
            format!("expected true or false, got {value:?} at line {lineno}"),
        )),
    }
}

fn split_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

fn word_set(value: &str) -> BTreeSet<String> {
    split_list(value).into_iter().collect()
}

/// Parse a key=value config file into a [`PipelineConfig`] with defaults
/// filled in, then range-check it and verify referenced files exist.
pub fn validate_config(path: &Path) -> Result<PipelineConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg = parse_config(&text)?;
    if let Some(sw) = cfg.stopwords_path.clone() {
        cfg.rules.load_stopwords(&sw)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parse config text. Unknown keys and malformed values fail with the key
/// and line number; file existence is checked separately by `validate`.
pub fn parse_config(text: &str) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::default();
    // Any modes.* key replaces the default dictionary with the listed rows,
    // in file order.
    let mut mode_rows: Vec<(String, Vec<String>)> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::config(
                format!("line {lineno}"),
                format!("expected key=value, got {line:?}"),
            ));
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "input" => cfg
                .inputs
                .extend(split_list(value).into_iter().map(PathBuf::from)),
            "output" => cfg.output = PathBuf::from(value),
            "format" => {
                cfg.format = OutputFormat::parse(value).ok_or_else(|| {
                    Error::config(
                        key,
                        format!("expected csv or json, got {value:?} at line {lineno}"),
                    )
                })?;
            }
            "seed" => cfg.seed = parse_value(key, lineno, value)?,
            "corpus.grouping" => {
                cfg.grouping = GroupingPolicy::parse(value).ok_or_else(|| {
                    Error::config(
                        key,
                        format!(
                            "expected per_utterance, per_speaker, or per_session_topic, \
                             got {value:?} at line {lineno}"
                        ),
                    )
                })?;
            }
            "corpus.moderator_prefix" => cfg.corpus.moderator_prefix = value.to_owned(),
            "corpus.abbreviations" => cfg.corpus.abbreviations = word_set(value),
            "normalize.stopwords" => cfg.stopwords_path = Some(PathBuf::from(value)),
            "normalize.exclusions" => cfg.rules.exclusions = word_set(value),
            "normalize.min_token_length" => {
                cfg.rules.min_token_length = parse_value(key, lineno, value)?;
            }
            "normalize.min_df" => cfg.min_df = parse_value(key, lineno, value)?,
            "topics.k" => cfg.topics.k = parse_value(key, lineno, value)?,
            "topics.alpha" => cfg.topics.alpha = parse_value(key, lineno, value)?,
            "topics.beta" => cfg.topics.beta = parse_value(key, lineno, value)?,
            "topics.iterations" => cfg.topics.iterations = parse_value(key, lineno, value)?,
            "topics.burn_in" => cfg.topics.burn_in = parse_value(key, lineno, value)?,
            "topics.top_words" => cfg.top_words = parse_value(key, lineno, value)?,
            "topics.passage_window" => cfg.passage_window = parse_value(key, lineno, value)?,
            "sentiment.seeds.positive" => cfg.seeds.positive = word_set(value),
            "sentiment.seeds.negative" => cfg.seeds.negative = word_set(value),
            "sentiment.window" => cfg.window = parse_value(key, lineno, value)?,
            "sentiment.tau" => cfg.tau = parse_value(key, lineno, value)?,
            "sentiment.mix" => cfg.mix = parse_value(key, lineno, value)?,
            "sentiment.folds" => cfg.folds = parse_value(key, lineno, value)?,
            "sentiment.lambda_grid" => {
                cfg.lambda_grid = split_list(value)
                    .iter()
                    .map(|v| parse_value(key, lineno, v))
                    .collect::<Result<_>>()?;
            }
            "sentiment.labels" => cfg.labels_path = Some(PathBuf::from(value)),
            "sentiment.thresholds.negative_below" => {
                cfg.thresholds.negative_below = parse_value(key, lineno, value)?;
            }
            "sentiment.thresholds.positive_above" => {
                cfg.thresholds.positive_above = parse_value(key, lineno, value)?;
            }
            "analysis.include_t4" => cfg.include_t4 = parse_bool(key, lineno, value)?,
            _ => {
                if let Some(mode) = key.strip_prefix("modes.") {
                    mode_rows.push((mode.to_owned(), split_list(value)));
                } else {
                    return Err(Error::config(
                        key,
                        format!("unknown key at line {lineno}"),
                    ));
                }
            }
        }
    }
    if !mode_rows.is_empty() {
        cfg.modes = ModeCategoryDictionary::new(mode_rows)?;
    }
    Ok(cfg)
}

impl PipelineConfig {
    /// Range-check every setting and verify referenced files exist.
    pub fn validate(&self) -> Result<()> {
        if self.inputs.is_empty() {
            return Err(Error::config("input", "at least one transcript path required"));
        }
        for p in &self.inputs {
            if !p.exists() {
                return Err(Error::config("input", format!("path {} not found", p.display())));
            }
        }
        if self.output.as_os_str().is_empty() {
            return Err(Error::config("output", "output directory required"));
        }
        if let Some(p) = &self.labels_path {
            if !p.is_file() {
                return Err(Error::config(
                    "sentiment.labels",
                    format!("file {} not found", p.display()),
                ));
            }
        }
        if let Some(p) = &self.stopwords_path {
            if !p.is_file() {
                return Err(Error::config(
                    "normalize.stopwords",
                    format!("file {} not found", p.display()),
                ));
            }
        }
        if self.rules.min_token_length < 1 {
            return Err(Error::config(
                "normalize.min_token_length",
                "must be at least 1",
            ));
        }
        if self.min_df < 1 {
            return Err(Error::config("normalize.min_df", "must be at least 1"));
        }
        self.rules.validate()?;
        self.topics.validate()?;
        if self.top_words < 1 {
            return Err(Error::config("topics.top_words", "must be at least 1"));
        }
        self.seeds.validate()?;
        if self.window < 1 {
            return Err(Error::config("sentiment.window", "must be at least 1"));
        }
        if self.tau.is_nan() || self.tau < 0.0 {
            return Err(Error::config("sentiment.tau", "must be nonnegative"));
        }
        if !(0.0..=1.0).contains(&self.mix) {
            return Err(Error::config("sentiment.mix", "must lie in [0, 1]"));
        }
        if self.folds < 2 {
            return Err(Error::config("sentiment.folds", "must be at least 2"));
        }
        if self.lambda_grid.iter().any(|&l| l.is_nan() || l < 0.0) {
            return Err(Error::config(
                "sentiment.lambda_grid",
                "penalties must be nonnegative",
            ));
        }
        self.thresholds.validate()?;
        self.modes.validate()?;
        Ok(())
    }

    /// Expand input paths: directories contribute their `*.txt` files in
    /// name order, plain files are taken as-is.
    pub fn input_files(&self) -> Result<Vec<PathBuf>> {
        let mut files = Vec::new();
        for input in &self.inputs {
            if input.is_dir() {
                let mut found = Vec::new();
                let entries = fs::read_dir(input).map_err(|e| Error::io(input, e))?;
                for entry in entries {
                    let entry = entry.map_err(|e| Error::io(input, e))?;
                    let path = entry.path();
                    if path.is_file() && path.extension().is_some_and(|e| e == "txt") {
                        found.push(path);
                    }
                }
                found.sort();
                files.extend(found);
            } else {
                files.push(input.clone());
            }
        }
        if files.is_empty() {
            return Err(Error::config("input", "no transcript files found"));
        }
        Ok(files)
    }

    /// Every effective setting as (key, canonical value) pairs, in a fixed
    /// order, for the run manifest.
    pub fn canonical_entries(&self) -> Vec<(String, String)> {
        let join = |it: &BTreeSet<String>| it.iter().cloned().collect::<Vec<_>>().join(",");
        let mut out: Vec<(String, String)> = vec![
            (
                "input".into(),
                self.inputs
                    .iter()
                    .map(|p| p.display().to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("output".into(), self.output.display().to_string()),
            ("format".into(), self.format.to_string()),
            ("seed".into(), self.seed.to_string()),
            (
                "corpus.grouping".into(),
                match self.grouping {
                    GroupingPolicy::PerUtterance => "per_utterance",
                    GroupingPolicy::PerSpeaker => "per_speaker",
                    GroupingPolicy::PerSessionTopic => "per_session_topic",
                }
                .to_owned(),
            ),
            (
                "corpus.moderator_prefix".into(),
                self.corpus.moderator_prefix.clone(),
            ),
            (
                "corpus.abbreviations".into(),
                join(&self.corpus.abbreviations),
            ),
            (
                "normalize.stopwords".into(),
                self.stopwords_path
                    .as_ref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_else(|| "<built-in>".to_owned()),
            ),
            ("normalize.exclusions".into(), join(&self.rules.exclusions)),
            (
                "normalize.min_token_length".into(),
                self.rules.min_token_length.to_string(),
            ),
            ("normalize.min_df".into(), self.min_df.to_string()),
            ("topics.k".into(), self.topics.k.to_string()),
            ("topics.alpha".into(), self.topics.alpha.to_string()),
            ("topics.beta".into(), self.topics.beta.to_string()),
            (
                "topics.iterations".into(),
                self.topics.iterations.to_string(),
            ),
            ("topics.burn_in".into(), self.topics.burn_in.to_string()),
            ("topics.top_words".into(), self.top_words.to_string()),
            (
                "topics.passage_window".into(),
                self.passage_window.to_string(),
            ),
            (
                "sentiment.seeds.positive".into(),
                join(&self.seeds.positive),
            ),
            (
                "sentiment.seeds.negative".into(),
                join(&self.seeds.negative),
            ),
            ("sentiment.window".into(), self.window.to_string()),
            ("sentiment.tau".into(), self.tau.to_string()),
            ("sentiment.mix".into(), self.mix.to_string()),
            ("sentiment.folds".into(), self.folds.to_string()),
            (
                "sentiment.lambda_grid".into(),
                self.lambda_grid
                    .iter()
                    .map(|l| l.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            (
                "sentiment.labels".into(),
                self.labels_path
                    .as_ref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_default(),
            ),
            (
                "sentiment.thresholds.negative_below".into(),
                self.thresholds.negative_below.to_string(),
            ),
            (
                "sentiment.thresholds.positive_above".into(),
                self.thresholds.positive_above.to_string(),
            ),
            ("analysis.include_t4".into(), self.include_t4.to_string()),
        ];
        for (mode, keywords) in self.modes.categories() {
            out.push((format!("modes.{mode}"), keywords.join(",")));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_survive_a_minimal_config() {
        let cfg = parse_config("input = a.txt\noutput = out\n").unwrap();
        assert_eq!(cfg.topics.k, 5);
        assert_eq!(cfg.folds, 10);
        assert_eq!(cfg.thresholds.negative_below, 0.35);
        assert_eq!(cfg.thresholds.positive_above, 0.65);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.format, OutputFormat::Csv);
    }

    #[test]
    fn unknown_key_names_key_and_line() {
        let err = parse_config("input = a.txt\nbogus.key = 1\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus.key"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn malformed_number_names_key_and_line() {
        let err = parse_config("topics.k = five\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("topics.k"), "{msg}");
        assert!(msg.contains("line 1"), "{msg}");
    }

    #[test]
    fn zero_topics_is_a_range_error_on_k() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("t.txt");
        std::fs::write(&input, "@session: S\n@community: C\nP1\thi there\n").unwrap();
        let cfg = parse_config(&format!(
            "input = {}\noutput = {}\ntopics.k = 0\n",
            input.display(),
            dir.path().join("out").display()
        ))
        .unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("topics.k"), "{err}");
    }

    #[test]
    fn missing_input_path_is_an_error() {
        let cfg = parse_config("input = /nonexistent/x.txt\noutput = out\n").unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("input"), "{err}");
    }

    #[test]
    fn comments_blanks_and_repeated_inputs() {
        let cfg = parse_config(
            "# comment\n\ninput = a.txt, b.txt\ninput = c.txt\noutput = out\nseed = 7\n",
        )
        .unwrap();
        assert_eq!(cfg.inputs.len(), 3);
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn mode_overrides_replace_the_default_dictionary() {
        let cfg = parse_config(
            "input = a.txt\noutput = out\nmodes.scooter = scooter, e-scooter\n",
        )
        .unwrap();
        let modes: Vec<&str> = cfg.modes.modes().collect();
        assert_eq!(modes, vec!["scooter"]);
        assert_eq!(
            cfg.modes.keywords("scooter").unwrap(),
            &["scooter".to_owned(), "e-scooter".to_owned()]
        );
    }

    #[test]
    fn lambda_grid_and_seed_lists_parse() {
        let cfg = parse_config(
            "input = a.txt\noutput = out\nsentiment.lambda_grid = 0.1, 0.01\n\
             sentiment.seeds.positive = nice, lovely\n",
        )
        .unwrap();
        assert_eq!(cfg.lambda_grid, vec![0.1, 0.01]);
        assert!(cfg.seeds.positive.contains("lovely"));
        assert_eq!(cfg.seeds.positive.len(), 2);
    }

    #[test]
    fn canonical_entries_cover_every_key() {
        let cfg = PipelineConfig::default();
        let entries = cfg.canonical_entries();
        let keys: Vec<&str> = entries.iter().map(|(k, _)| k.as_str()).collect();
        for expected in [
            "seed",
            "topics.k",
            "sentiment.tau",
            "analysis.include_t4",
            "modes.walking",
            "modes.shared_multimodal",
        ] {
            assert!(keys.contains(&expected), "missing {expected}");
        }
    }
}
