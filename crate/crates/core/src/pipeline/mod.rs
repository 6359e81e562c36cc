//! Batch pipeline driver: four stages (ingest, topics, sentiment, report)
//! that each persist their artifacts under the output directory, so a rerun
//! of a downstream stage from persisted upstream artifacts equals the
//! single-pass result byte for byte.

mod config;

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::{parse_config, validate_config, OutputFormat, PipelineConfig};

use crate::analysis::{
    figure_data, figure_json, mode_sentiment_table, mode_table_csv, speaker_positiveness,
    speakers_csv, topic_mean_positiveness, topic_mu_csv, FigureSeries, ModeSentimentRow,
    SpeakerReport, TopicSentimentReport,
};
use crate::corpus::{
    build_corpus, parse_transcript, sentence_records, strip_moderator, Corpus, DiscussionTopic,
    GroupingPolicy, SentenceRecord, SentenceRef, Transcript,
};
use crate::error::{Error, Result};
use crate::preprocess::{
    build_dtm, build_vocabulary, dtm_from_token_lists, extract_phrases, idf_vector, normalize,
    tokenize, vectorize_tokens, vocabulary_from_token_lists, CandidatePhrase,
};
use crate::rng::{derive_seed, streams};
use crate::sentiment::{
    apply_hand_labels, build_lexicon, mode_phrase_scores, parse_label_file, score_sentence,
    train_classifier, weak_label, write_label_file, ScoredSentence, SentimentClass,
    SentimentClassifier, SentimentLexicon,
};
use crate::serialize::push_json_string;
use crate::topics::{
    fit_lda, locate_theme_passages, top_words, Passage, TopicModel, TopicSummary,
};

/// Everything a full run produces, assembled in memory after the stages
/// have written their artifacts.
#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub communities: Vec<String>,
    pub topic_summaries: BTreeMap<String, Vec<TopicSummary>>,
    /// Theme passages per community, parallel to the topic summaries.
    pub passages: BTreeMap<String, Vec<Vec<Passage>>>,
    pub lexicon: SentimentLexicon,
    pub classifier: SentimentClassifier,
    pub reports: BTreeMap<String, CommunityReport>,
    pub manifest_json: String,
}

#[derive(Debug, Clone)]
pub struct CommunityReport {
    pub speakers: Vec<SpeakerReport>,
    pub topic_mu: Vec<TopicSentimentReport>,
    pub mode_table: Vec<ModeSentimentRow>,
    /// Per-topic plot data: community -> speaker -> per-utterance means.
    pub figures: Vec<(DiscussionTopic, FigureSeries)>,
}

/// Output-directory paths for every pipeline artifact.
pub struct Layout {
    root: PathBuf,
}

impl Layout {
    pub fn new(root: &Path) -> Layout {
        Layout {
            root: root.to_path_buf(),
        }
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }
    pub fn transcripts(&self) -> PathBuf {
        self.root.join("corpus").join("transcripts.json")
    }
    pub fn corpus_export(&self) -> PathBuf {
        self.root.join("corpus").join("corpus.jsonl")
    }
    pub fn sentences(&self) -> PathBuf {
        self.root.join("corpus").join("sentences.jsonl")
    }
    pub fn model(&self, community: &str) -> PathBuf {
        self.root.join("topics").join(community).join("model.json")
    }
    pub fn topics_txt(&self, community: &str) -> PathBuf {
        self.root.join("topics").join(community).join("topics.txt")
    }
    pub fn passages_txt(&self, community: &str) -> PathBuf {
        self.root.join("topics").join(community).join("passages.txt")
    }
    pub fn lexicon(&self) -> PathBuf {
        self.root.join("sentiment").join("lexicon.tsv")
    }
    pub fn labels(&self) -> PathBuf {
        self.root.join("sentiment").join("labels.tsv")
    }
    pub fn classifier(&self) -> PathBuf {
        self.root.join("sentiment").join("classifier.json")
    }
    pub fn scores(&self) -> PathBuf {
        self.root.join("sentiment").join("scores.jsonl")
    }
    pub fn report_dir(&self, community: &str) -> PathBuf {
        self.root.join("report").join(community)
    }
    pub fn speakers_csv(&self, community: &str) -> PathBuf {
        self.report_dir(community).join("speakers.csv")
    }
    pub fn topic_mu_csv(&self, community: &str) -> PathBuf {
        self.report_dir(community).join("topic_mu.csv")
    }
    pub fn mode_table_csv(&self, community: &str) -> PathBuf {
        self.report_dir(community).join("mode_table.csv")
    }
    pub fn figure(&self, community: &str, topic: DiscussionTopic) -> PathBuf {
        self.report_dir(community).join(format!("fig_{topic}.json"))
    }
    pub fn report_topics_txt(&self, community: &str) -> PathBuf {
        self.report_dir(community).join("topics.txt")
    }
    pub fn bundle(&self) -> PathBuf {
        self.root.join("bundle.json")
    }
}

/// Exclusive ownership of the output directory for the duration of a stage.
pub struct OutputLock {
    path: PathBuf,
}

impl OutputLock {
    pub fn acquire(output: &Path) -> Result<OutputLock> {
        fs::create_dir_all(output).map_err(|e| Error::io(output, e))?;
        let path = output.join(".lock");
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(OutputLock { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::data(format!(
                "output directory {} is locked by another run (delete {} if stale)",
                output.display(),
                path.display()
            ))),
            Err(e) => Err(Error::io(&path, e)),
        }
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Deletes the files a failed stage managed to write.
struct StageGuard {
    created: Vec<PathBuf>,
    armed: bool,
}

impl StageGuard {
    fn new() -> StageGuard {
        StageGuard {
            created: Vec::new(),
            armed: true,
        }
    }

    fn defuse(&mut self) {
        self.armed = false;
    }
}

impl Drop for StageGuard {
    fn drop(&mut self) {
        if self.armed {
            for path in &self.created {
                let _ = fs::remove_file(path);
            }
        }
    }
}

/// Write through a temp file and rename, so no partially written artifact is
/// ever visible under its final name.
fn write_artifact(guard: &mut StageGuard, path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, content).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    guard.created.push(path.to_path_buf());
    Ok(())
}

fn read_artifact(path: &Path, producer: &str) -> Result<String> {
    if !path.is_file() {
        return Err(Error::data(format!(
            "missing artifact {}; run the {producer} stage first",
            path.display()
        )));
    }
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Prefix the failing stage's name onto the error message, keeping the
/// error category (and exit code) intact.
fn stage_error(stage: &str, e: Error) -> Error {
    match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("[{stage}] {message}"),
        },
        Error::Format(m) => Error::Format(format!("[{stage}] {m}")),
        Error::Config { key, message } => Error::Config {
            key,
            message: format!("[{stage}] {message}"),
        },
        Error::Data(m) => Error::Data(format!("[{stage}] {m}")),
        Error::Io { path, source } => Error::Io { path, source },
        Error::Internal(m) => Error::Internal(format!("[{stage}] {m}")),
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// The run manifest: version, seed, every resolved config entry, and a
/// content hash per referenced input file.
fn manifest_json(cfg: &PipelineConfig) -> Result<String> {
    let mut buf = String::from("{\n");
    buf.push_str(&format!(
        "  \"version\": \"{}\",\n  \"seed\": {},\n  \"config\": {{\n",
        env!("CARGO_PKG_VERSION"),
        cfg.seed
    ));
    let entries = cfg.canonical_entries();
    for (i, (key, value)) in entries.iter().enumerate() {
        buf.push_str("    ");
        push_json_string(&mut buf, key);
        buf.push_str(": ");
        push_json_string(&mut buf, value);
        if i + 1 < entries.len() {
            buf.push(',');
        }
        buf.push('\n');
    }
    buf.push_str("  },\n  \"inputs\": [\n");
    let mut hashed: Vec<PathBuf> = cfg.input_files()?;
    if let Some(p) = &cfg.labels_path {
        hashed.push(p.clone());
    }
    if let Some(p) = &cfg.stopwords_path {
        hashed.push(p.clone());
    }
    for (i, path) in hashed.iter().enumerate() {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        buf.push_str("    {\"path\": ");
        push_json_string(&mut buf, &path.display().to_string());
        buf.push_str(&format!(", \"sha256\": \"{}\"}}", sha256_hex(&bytes)));
        if i + 1 < hashed.len() {
            buf.push(',');
        }
        buf.push('\n');
    }
    buf.push_str("  ]\n}\n");
    Ok(buf)
}

fn load_transcripts(layout: &Layout) -> Result<Vec<Transcript>> {
    let text = read_artifact(&layout.transcripts(), "ingest")?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("transcripts.json: {e}")))
}

fn load_records(layout: &Layout) -> Result<Vec<SentenceRecord>> {
    let text = read_artifact(&layout.sentences(), "ingest")?;
    text.lines()
        .map(|line| {
            serde_json::from_str(line).map_err(|e| Error::Format(format!("sentences.jsonl: {e}")))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ScoreRow {
    session_id: String,
    utterance_index: usize,
    sentence_index: usize,
    probability_of_positiveness: f64,
    class: SentimentClass,
}

fn load_scores(layout: &Layout) -> Result<Vec<ScoreRow>> {
    let text = read_artifact(&layout.scores(), "sentiment")?;
    text.lines()
        .map(|line| {
            serde_json::from_str(line).map_err(|e| Error::Format(format!("scores.jsonl: {e}")))
        })
        .collect()
}

fn communities_of(records: &[SentenceRecord]) -> Vec<String> {
    let set: BTreeSet<&str> = records.iter().map(|r| r.community.as_str()).collect();
    set.into_iter().map(str::to_owned).collect()
}

fn normalized_tokens(record: &SentenceRecord, cfg: &PipelineConfig) -> Vec<String> {
    normalize(&tokenize(&record.text), &cfg.rules)
}

/// Fill each document's token stream from its sentences.
fn tokenize_corpus(corpus: &mut Corpus, cfg: &PipelineConfig) {
    for doc in &mut corpus.documents {
        doc.tokens = doc
            .sentences
            .iter()
            .flat_map(|s| normalize(&tokenize(s), &cfg.rules))
            .collect();
    }
}

/// Parse, validate, and strip the input transcripts; persist the stripped
/// transcripts, the document export, and the per-sentence records.
pub fn stage_ingest(cfg: &PipelineConfig) -> Result<Vec<Transcript>> {
    let _lock = OutputLock::acquire(&cfg.output)?;
    let mut guard = StageGuard::new();
    let result = ingest_inner(cfg, &mut guard);
    if result.is_ok() {
        guard.defuse();
    }
    result.map_err(|e| stage_error("ingest", e))
}

fn ingest_inner(cfg: &PipelineConfig, guard: &mut StageGuard) -> Result<Vec<Transcript>> {
    let layout = Layout::new(&cfg.output);
    let files = cfg.input_files()?;
    let mut transcripts = Vec::new();
    let mut sessions = BTreeSet::new();
    for file in &files {
        let raw = fs::read_to_string(file).map_err(|e| Error::io(file, e))?;
        let parsed = parse_transcript(&raw, &cfg.corpus).map_err(|e| match e {
            Error::Parse { line, message } => Error::Parse {
                line,
                message: format!("{}: {message}", file.display()),
            },
            Error::Format(m) => Error::Format(format!("{}: {m}", file.display())),
            other => other,
        })?;
        if !sessions.insert(parsed.session_id.clone()) {
            return Err(Error::data(format!(
                "duplicate session id {:?} in {}",
                parsed.session_id,
                file.display()
            )));
        }
        transcripts.push(strip_moderator(&parsed));
    }
    if transcripts.iter().all(|t| t.utterances.is_empty()) {
        return Err(Error::data(
            "no participant utterances in any input transcript",
        ));
    }

    let records = sentence_records(&transcripts, &cfg.corpus);
    let mut corpus = build_corpus(&transcripts, cfg.grouping, &cfg.corpus)?;
    tokenize_corpus(&mut corpus, cfg);

    let transcripts_json = serde_json::to_string_pretty(&transcripts)
        .map_err(|e| Error::Internal(format!("serializing transcripts: {e}")))?;
    let mut sentences_jsonl = String::new();
    for r in &records {
        sentences_jsonl.push_str(
            &serde_json::to_string(r)
                .map_err(|e| Error::Internal(format!("serializing sentence record: {e}")))?,
        );
        sentences_jsonl.push('\n');
    }
    let mut corpus_jsonl = String::new();
    for d in &corpus.documents {
        corpus_jsonl.push_str(
            &serde_json::to_string(d)
                .map_err(|e| Error::Internal(format!("serializing document: {e}")))?,
        );
        corpus_jsonl.push('\n');
    }

    write_artifact(guard, &layout.manifest(), &manifest_json(cfg)?)?;
    write_artifact(guard, &layout.transcripts(), &format!("{transcripts_json}\n"))?;
    write_artifact(guard, &layout.corpus_export(), &corpus_jsonl)?;
    write_artifact(guard, &layout.sentences(), &sentences_jsonl)?;
    Ok(transcripts)
}

fn summaries_text(summaries: &[TopicSummary]) -> String {
    let mut out = String::new();
    for s in summaries {
        let terms: Vec<String> = s
            .top_terms
            .iter()
            .map(|(term, p)| format!("{term} {p:.6}"))
            .collect();
        out.push_str(&format!("topic {}: {}\n", s.topic_id, terms.join(", ")));
    }
    out
}

fn passages_text(summaries: &[TopicSummary], passages: &[Vec<Passage>]) -> String {
    let mut out = String::new();
    for (s, topic_passages) in summaries.iter().zip(passages) {
        let terms: Vec<&str> = s.top_terms.iter().map(|(t, _)| t.as_str()).collect();
        out.push_str(&format!("# topic {}: {}\n", s.topic_id, terms.join(", ")));
        for p in topic_passages {
            let first = p.refs.first().map(|r| r.utterance_index).unwrap_or(0);
            let last = p.refs.last().map(|r| r.utterance_index).unwrap_or(0);
            out.push_str(&format!(
                "@ {} utterances {first}..{last}\n",
                p.session_id
            ));
            for sentence in &p.sentences {
                out.push_str(&format!("  {sentence}\n"));
            }
            out.push('\n');
        }
    }
    out
}

fn community_transcripts(transcripts: &[Transcript], community: &str) -> Vec<Transcript> {
    transcripts
        .iter()
        .filter(|t| t.community_label == community)
        .cloned()
        .collect()
}

fn summaries_and_passages(
    model: &TopicModel,
    records: &[SentenceRecord],
    community: &str,
    cfg: &PipelineConfig,
) -> Result<(Vec<TopicSummary>, Vec<Vec<Passage>>)> {
    let community_records: Vec<SentenceRecord> = records
        .iter()
        .filter(|r| r.community == community)
        .cloned()
        .collect();
    let mut summaries = Vec::new();
    let mut passages = Vec::new();
    for topic_id in 0..model.num_topics() {
        let summary = top_words(model, topic_id, cfg.top_words)?;
        let terms: BTreeSet<String> = summary
            .top_terms
            .iter()
            .map(|(t, _)| t.clone())
            .collect();
        passages.push(locate_theme_passages(
            &community_records,
            &terms,
            cfg.passage_window,
            &cfg.rules,
        ));
        summaries.push(summary);
    }
    Ok((summaries, passages))
}

/// Fit one topic model per community and persist the model, its top-word
/// summary, and the theme passages for those words.
pub fn stage_topics(cfg: &PipelineConfig) -> Result<BTreeMap<String, TopicModel>> {
    let _lock = OutputLock::acquire(&cfg.output)?;
    let mut guard = StageGuard::new();
    let result = topics_inner(cfg, &mut guard);
    if result.is_ok() {
        guard.defuse();
    }
    result.map_err(|e| stage_error("topics", e))
}

fn topics_inner(
    cfg: &PipelineConfig,
    guard: &mut StageGuard,
) -> Result<BTreeMap<String, TopicModel>> {
    let layout = Layout::new(&cfg.output);
    let transcripts = load_transcripts(&layout)?;
    let records = load_records(&layout)?;
    let communities = communities_of(&records);
    let topics_seed = derive_seed(cfg.seed, streams::TOPICS);

    let mut models = BTreeMap::new();
    write_artifact(guard, &layout.manifest(), &manifest_json(cfg)?)?;
    for (index, community) in communities.iter().enumerate() {
        let subset = community_transcripts(&transcripts, community);
        let mut corpus = build_corpus(&subset, cfg.grouping, &cfg.corpus)?;
        tokenize_corpus(&mut corpus, cfg);
        let vocab = build_vocabulary(&corpus, cfg.min_df)?;
        let dtm = build_dtm(&corpus, &vocab)?;
        let mut lda_cfg = cfg.topics.clone();
        lda_cfg.seed = derive_seed(topics_seed, index as u64);
        let mut model = fit_lda(&dtm, &lda_cfg)?;
        model.attach_vocabulary(&vocab)?;

        let (summaries, passages) = summaries_and_passages(&model, &records, community, cfg)?;
        write_artifact(guard, &layout.model(community), &model.to_json())?;
        write_artifact(guard, &layout.topics_txt(community), &summaries_text(&summaries))?;
        write_artifact(
            guard,
            &layout.passages_txt(community),
            &passages_text(&summaries, &passages),
        )?;
        models.insert(community.clone(), model);
    }
    Ok(models)
}

/// Induce the lexicon, label sentences, train the classifier, and score
/// every sentence; persist all four artifacts.
pub fn stage_sentiment(cfg: &PipelineConfig) -> Result<SentimentClassifier> {
    let _lock = OutputLock::acquire(&cfg.output)?;
    let mut guard = StageGuard::new();
    let result = sentiment_inner(cfg, &mut guard);
    if result.is_ok() {
        guard.defuse();
    }
    result.map_err(|e| stage_error("sentiment", e))
}

fn sentiment_inner(
    cfg: &PipelineConfig,
    guard: &mut StageGuard,
) -> Result<SentimentClassifier> {
    let layout = Layout::new(&cfg.output);
    let transcripts = load_transcripts(&layout)?;
    let records = load_records(&layout)?;

    let reference = build_corpus(&transcripts, GroupingPolicy::PerUtterance, &cfg.corpus)?;
    let phrases: Vec<CandidatePhrase> = records
        .iter()
        .flat_map(|r| extract_phrases(&tokenize(&r.text)))
        .collect();
    if phrases.is_empty() {
        return Err(Error::data(
            "no candidate phrases extracted; corpus too small for lexicon induction",
        ));
    }
    let lexicon = build_lexicon(&phrases, &reference, &cfg.seeds, cfg.window)?;

    let weak = weak_label(&records, &lexicon, cfg.tau);
    let hand = match &cfg.labels_path {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_label_file(&text)?
        }
        None => Default::default(),
    };
    let labeled = apply_hand_labels(&records, &weak, &hand);
    if labeled.items.is_empty() {
        return Err(Error::data(
            "weak labeling produced no training items; lower sentiment.tau or add hand labels",
        ));
    }

    let token_lists: Vec<Vec<String>> = records
        .iter()
        .map(|r| normalized_tokens(r, cfg))
        .collect();
    let ids: Vec<String> = records
        .iter()
        .map(|r| {
            format!(
                "{}#u{}#s{}",
                r.sref.session_id, r.sref.utterance_index, r.sref.sentence_index
            )
        })
        .collect();
    let vocab = vocabulary_from_token_lists(&token_lists, cfg.min_df)?;
    let dtm = dtm_from_token_lists(&ids, &token_lists, &vocab)?;
    let idf = idf_vector(&dtm);

    let row_of: BTreeMap<&SentenceRef, usize> = records
        .iter()
        .enumerate()
        .map(|(i, r)| (&r.sref, i))
        .collect();
    let mut flat = Vec::with_capacity(labeled.items.len() * vocab.len());
    for item in &labeled.items {
        let row = *row_of.get(&item.sref).ok_or_else(|| {
            Error::data(format!(
                "label references unknown sentence {}#u{}#s{}",
                item.sref.session_id, item.sref.utterance_index, item.sref.sentence_index
            ))
        })?;
        flat.extend(vectorize_tokens(&token_lists[row], &vocab, &idf));
    }
    let features = Array2::from_shape_vec((labeled.items.len(), vocab.len()), flat)
        .map_err(|e| Error::Internal(format!("feature matrix shape: {e}")))?;

    let cv_seed = derive_seed(cfg.seed, streams::CROSS_VALIDATION);
    let mut classifier = train_classifier(
        &labeled,
        &features,
        &cfg.lambda_grid,
        cfg.mix,
        cfg.folds,
        cv_seed,
    )?;
    classifier.attach_vocabulary(&vocab, idf.clone())?;
    classifier.thresholds = cfg.thresholds;

    let mut scores_jsonl = String::new();
    for (record, tokens) in records.iter().zip(&token_lists) {
        let x = vectorize_tokens(tokens, &vocab, &idf);
        let score = score_sentence(&classifier, record.sref.clone(), &x)?;
        let row = ScoreRow {
            session_id: score.sref.session_id,
            utterance_index: score.sref.utterance_index,
            sentence_index: score.sref.sentence_index,
            probability_of_positiveness: score.probability_of_positiveness,
            class: score.class,
        };
        scores_jsonl.push_str(
            &serde_json::to_string(&row)
                .map_err(|e| Error::Internal(format!("serializing score: {e}")))?,
        );
        scores_jsonl.push('\n');
    }

    write_artifact(guard, &layout.manifest(), &manifest_json(cfg)?)?;
    write_artifact(guard, &layout.lexicon(), &lexicon.to_tsv())?;
    write_artifact(guard, &layout.labels(), &write_label_file(&labeled))?;
    write_artifact(guard, &layout.classifier(), &classifier.to_json())?;
    write_artifact(guard, &layout.scores(), &scores_jsonl)?;
    Ok(classifier)
}

/// Join scores back onto sentence records, aggregate per community, and emit
/// the report files (CSV set or single JSON bundle).
pub fn stage_report(cfg: &PipelineConfig) -> Result<ReportBundle> {
    let _lock = OutputLock::acquire(&cfg.output)?;
    let mut guard = StageGuard::new();
    let result = report_inner(cfg, &mut guard);
    if result.is_ok() {
        guard.defuse();
    }
    result.map_err(|e| stage_error("report", e))
}

fn report_inner(cfg: &PipelineConfig, guard: &mut StageGuard) -> Result<ReportBundle> {
    let layout = Layout::new(&cfg.output);
    let records = load_records(&layout)?;
    let score_rows = load_scores(&layout)?;
    let lexicon = SentimentLexicon::from_tsv(&read_artifact(&layout.lexicon(), "sentiment")?)?;
    let classifier =
        SentimentClassifier::from_json(&read_artifact(&layout.classifier(), "sentiment")?)?;

    let mut score_map: BTreeMap<SentenceRef, (f64, SentimentClass)> = BTreeMap::new();
    for row in score_rows {
        let sref = SentenceRef {
            session_id: row.session_id,
            utterance_index: row.utterance_index,
            sentence_index: row.sentence_index,
        };
        score_map.insert(sref, (row.probability_of_positiveness, row.class));
    }
    let mut scored = Vec::with_capacity(records.len());
    for record in &records {
        let (p, class) = *score_map.get(&record.sref).ok_or_else(|| {
            Error::data(format!(
                "no score for sentence {}#u{}#s{}; rerun the sentiment stage",
                record.sref.session_id, record.sref.utterance_index, record.sref.sentence_index
            ))
        })?;
        scored.push(ScoredSentence {
            record: record.clone(),
            probability_of_positiveness: p,
            class,
        });
    }

    let communities = communities_of(&records);
    let mut figure_topics = vec![
        DiscussionTopic::T1,
        DiscussionTopic::T2,
        DiscussionTopic::T3,
    ];
    if cfg.include_t4 {
        figure_topics.push(DiscussionTopic::T4);
    }

    let mut topic_summaries = BTreeMap::new();
    let mut all_passages = BTreeMap::new();
    let mut reports = BTreeMap::new();
    write_artifact(guard, &layout.manifest(), &manifest_json(cfg)?)?;
    for community in &communities {
        let model = TopicModel::from_json(&read_artifact(&layout.model(community), "topics")?)?;
        let (summaries, passages) = summaries_and_passages(&model, &records, community, cfg)?;

        let sentences: Vec<ScoredSentence> = scored
            .iter()
            .filter(|s| &s.record.community == community)
            .cloned()
            .collect();
        let roster: Vec<String> = {
            let set: BTreeSet<&str> = records
                .iter()
                .filter(|r| &r.community == community)
                .map(|r| r.speaker_id.as_str())
                .collect();
            set.into_iter().map(str::to_owned).collect()
        };
        let speakers = speaker_positiveness(&sentences, &roster);
        let topic_mu = topic_mean_positiveness(&sentences, cfg.include_t4);
        let mode_scores = mode_phrase_scores(&sentences, &lexicon, &cfg.modes, &cfg.rules);
        let mode_table = mode_sentiment_table(&mode_scores, &cfg.modes);
        let figures: Vec<_> = figure_topics
            .iter()
            .map(|&t| (t, figure_data(&sentences, t)))
            .collect();

        if cfg.format == OutputFormat::Csv {
            write_artifact(guard, &layout.speakers_csv(community), &speakers_csv(&speakers))?;
            write_artifact(
                guard,
                &layout.topic_mu_csv(community),
                &topic_mu_csv(&topic_mu),
            )?;
            write_artifact(
                guard,
                &layout.mode_table_csv(community),
                &mode_table_csv(&mode_table),
            )?;
            for (topic, data) in &figures {
                write_artifact(guard, &layout.figure(community, *topic), &figure_json(data))?;
            }
            write_artifact(
                guard,
                &layout.report_topics_txt(community),
                &summaries_text(&summaries),
            )?;
        }

        topic_summaries.insert(community.clone(), summaries);
        all_passages.insert(community.clone(), passages);
        reports.insert(
            community.clone(),
            CommunityReport {
                speakers,
                topic_mu,
                mode_table,
                figures,
            },
        );
    }

    let bundle = ReportBundle {
        communities,
        topic_summaries,
        passages: all_passages,
        lexicon,
        classifier,
        reports,
        manifest_json: manifest_json(cfg)?,
    };
    if cfg.format == OutputFormat::Json {
        write_artifact(guard, &layout.bundle(), &bundle_json(&bundle))?;
    }
    Ok(bundle)
}

/// Single-file JSON mirror of the report set. Aggregate statistics carry the
/// same six-decimal values as the CSV files.
pub fn bundle_json(bundle: &ReportBundle) -> String {
    let mut buf = String::from("{\n  \"manifest\": ");
    buf.push_str(bundle.manifest_json.trim_end());
    buf.push_str(",\n  \"communities\": {\n");
    for (ci, community) in bundle.communities.iter().enumerate() {
        buf.push_str("    ");
        push_json_string(&mut buf, community);
        buf.push_str(": {\n      \"topics\": [");
        let summaries = &bundle.topic_summaries[community];
        for (i, s) in summaries.iter().enumerate() {
            if i > 0 {
                buf.push_str(", ");
            }
            buf.push_str(&format!("{{\"topic\": {}, \"terms\": [", s.topic_id));
            for (j, (term, p)) in s.top_terms.iter().enumerate() {
                if j > 0 {
                    buf.push_str(", ");
                }
                buf.push('[');
                push_json_string(&mut buf, term);
                buf.push_str(&format!(", {p:.6}]"));
            }
            buf.push_str("]}");
        }
        buf.push_str("],\n      \"passages\": [");
        let passages = &bundle.passages[community];
        let mut first = true;
        for (topic_id, topic_passages) in passages.iter().enumerate() {
            for p in topic_passages {
                if !first {
                    buf.push_str(", ");
                }
                first = false;
                buf.push_str(&format!("{{\"topic\": {topic_id}, \"session\": "));
                push_json_string(&mut buf, &p.session_id);
                buf.push_str(", \"sentences\": [");
                for (j, s) in p.sentences.iter().enumerate() {
                    if j > 0 {
                        buf.push_str(", ");
                    }
                    push_json_string(&mut buf, s);
                }
                buf.push_str("]}");
            }
        }
        buf.push_str("],\n      \"speakers\": [");
        let report = &bundle.reports[community];
        for (i, s) in report.speakers.iter().enumerate() {
            if i > 0 {
                buf.push_str(", ");
            }
            buf.push_str("{\"speaker_id\": ");
            push_json_string(&mut buf, &s.speaker_id);
            buf.push_str(", \"utterance_means\": [");
            for (j, m) in s.utterance_means.iter().enumerate() {
                if j > 0 {
                    buf.push_str(", ");
                }
                buf.push_str(&format!("{m:.6}"));
            }
            buf.push_str(&format!(
                "], \"overall_mean\": {:.6}, \"sentence_count\": {}}}",
                s.overall_mean, s.sentence_count
            ));
        }
        buf.push_str("],\n      \"topic_mu\": [");
        for (i, t) in report.topic_mu.iter().enumerate() {
            if i > 0 {
                buf.push_str(", ");
            }
            buf.push_str(&format!(
                "{{\"discussion_topic\": \"{}\", \"community\": ",
                t.discussion_topic
            ));
            push_json_string(&mut buf, &t.community);
            buf.push_str(&format!(", \"mu\": {:.6}}}", t.mu));
        }
        buf.push_str("],\n      \"mode_table\": [");
        for (i, r) in report.mode_table.iter().enumerate() {
            if i > 0 {
                buf.push_str(", ");
            }
            buf.push_str("{\"mode\": ");
            push_json_string(&mut buf, &r.mode);
            let fmt_opt = |v: Option<f64>| match v {
                Some(x) => format!("{x:.6}"),
                None => "null".to_owned(),
            };
            buf.push_str(&format!(
                ", \"mean\": {}, \"std_dev\": {}, \"count\": {}}}",
                fmt_opt(r.mean),
                fmt_opt(r.std_dev),
                r.count
            ));
        }
        buf.push_str("],\n      \"figures\": {");
        for (i, (topic, data)) in report.figures.iter().enumerate() {
            if i > 0 {
                buf.push_str(", ");
            }
            buf.push_str(&format!("\"{topic}\": "));
            let fig = figure_json(data);
            buf.push_str(fig.trim_end());
        }
        buf.push_str("}\n    }");
        if ci + 1 < bundle.communities.len() {
            buf.push(',');
        }
        buf.push('\n');
    }
    buf.push_str("  },\n  \"lexicon\": {\n");
    let entries: Vec<_> = bundle.lexicon.entries.iter().collect();
    for (i, (phrase, e)) in entries.iter().enumerate() {
        buf.push_str("    ");
        push_json_string(&mut buf, phrase);
        buf.push_str(&format!(
            ": {{\"hit_pos\": {}, \"hit_neg\": {}, \"ratio\": {:.6}, \"score\": {:.6}}}",
            e.hit_positive_count, e.hit_negative_count, e.ratio, e.score
        ));
        if i + 1 < entries.len() {
            buf.push(',');
        }
        buf.push('\n');
    }
    buf.push_str("  },\n  \"classifier\": ");
    buf.push_str(bundle.classifier.to_json().trim_end());
    buf.push_str("\n}\n");
    buf
}

/// Run all four stages in order. Every stage reads its inputs from the
/// persisted artifacts of the previous one, so this equals running the
/// staged subcommands by hand.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<ReportBundle> {
    stage_ingest(cfg)?;
    stage_topics(cfg)?;
    stage_sentiment(cfg)?;
    stage_report(cfg)
}
