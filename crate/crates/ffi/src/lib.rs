//! C interface for the colloquy toolkit: opaque handles, integer status
//! codes, and a per-thread last-error message.
//!
//! Conventions:
//! - Functions returning `int` yield `CLQ_OK` (0) on success or a nonzero
//!   status mirroring the CLI exit codes (2 config, 3 data, 4 internal).
//! - Functions returning a pointer yield null on failure.
//! - After any failure, [`clq_last_error_message`] describes it; the message
//!   lives until the next failing call on the same thread.
//! - Strings returned as `char*` are owned by the caller; release them with
//!   [`clq_string_free`]. Handles are released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::{c_char, c_int};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use colloquy::corpus::{parse_transcript, CorpusConfig, Role, Transcript};
use colloquy::pipeline::{
    run_pipeline, stage_ingest, stage_report, stage_sentiment, stage_topics, validate_config,
};
use colloquy::preprocess::{normalize, tokenize, vectorize_tokens, NormalizationRules, Vocabulary};
use colloquy::sentiment::{classify, log_odds, SentimentClass, SentimentClassifier};
use colloquy::topics::{top_words, TopicModel};
use colloquy::{Error, Result};

/// Success.
pub const CLQ_OK: c_int = 0;
/// Invalid configuration or arguments.
pub const CLQ_ERR_CONFIG: c_int = 2;
/// Unreadable, malformed, or inconsistent data.
pub const CLQ_ERR_DATA: c_int = 3;
/// Unexpected internal failure.
pub const CLQ_ERR_INTERNAL: c_int = 4;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = Some(CString::new(sanitized).expect("no interior NUL"));
    });
}

fn status_of(e: &Error) -> c_int {
    e.exit_code() as c_int
}

/// Run `f` behind a panic guard, translating errors into a status code.
fn guarded_status<F: FnOnce() -> Result<()>>(f: F) -> c_int {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CLQ_OK,
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic crossed the language boundary".to_owned());
            CLQ_ERR_INTERNAL
        }
    }
}

/// Run `f` behind a panic guard, boxing the result into an opaque handle.
fn guarded_handle<T, F: FnOnce() -> Result<T>>(f: F) -> *mut T {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(value)) => Box::into_raw(Box::new(value)),
        Ok(Err(e)) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
        Err(_) => {
            set_error("internal panic crossed the language boundary".to_owned());
            std::ptr::null_mut()
        }
    }
}

/// Borrow a C string argument, rejecting null and non-UTF-8 input.
unsafe fn text_arg<'a>(ptr: *const c_char, what: &str) -> Result<&'a str> {
    if ptr.is_null() {
        return Err(Error::data(format!("{what} pointer is null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| Error::data(format!("{what} is not valid UTF-8")))
}

unsafe fn handle_arg<'a, T>(ptr: *const T, what: &str) -> Result<&'a T> {
    ptr.as_ref()
        .ok_or_else(|| Error::data(format!("{what} handle is null")))
}

fn owned_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .expect("no interior NUL")
        .into_raw()
}

/// Message for the most recent failure on this thread, or null if the last
/// call succeeded. Do not free; the buffer is reused by later failures.
#[no_mangle]
pub extern "C" fn clq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |msg| msg.as_ptr())
    })
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn clq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must come from a colloquy function returning `char*`, and must not be
/// used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn clq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---------------------------------------------------------------------------
// Pipeline

/// Run the whole pipeline described by the key=value config file at
/// `config_path`: ingest, topics, sentiment, report.
///
/// # Safety
/// `config_path` must be null or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn clq_run_pipeline(config_path: *const c_char) -> c_int {
    guarded_status(|| {
        let path = text_arg(config_path, "config path")?;
        let cfg = validate_config(Path::new(path))?;
        run_pipeline(&cfg)?;
        Ok(())
    })
}

/// Run one pipeline stage: "ingest", "topics", "sentiment", or "report".
/// Stages read their inputs from the output directory, so run them in order.
///
/// # Safety
/// Both arguments must be null or NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn clq_run_stage(config_path: *const c_char, stage: *const c_char) -> c_int {
    guarded_status(|| {
        let path = text_arg(config_path, "config path")?;
        let stage = text_arg(stage, "stage name")?;
        let cfg = validate_config(Path::new(path))?;
        match stage {
            "ingest" => stage_ingest(&cfg).map(drop),
            "topics" => stage_topics(&cfg).map(drop),
            "sentiment" => stage_sentiment(&cfg).map(drop),
            "report" => stage_report(&cfg).map(drop),
            other => Err(Error::config(
                "stage",
                format!("unknown stage {other:?}; expected ingest, topics, sentiment, or report"),
            )),
        }
    })
}

// ---------------------------------------------------------------------------
// Transcripts

/// A parsed transcript; see `clq_transcript_parse`.
pub struct ClqTranscript {
    inner: Transcript,
}

/// Parse the transcript file at `path` with default settings. Returns a
/// handle to free with `clq_transcript_free`, or null on failure.
///
/// # Safety
/// `path` must be null or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn clq_transcript_parse(path: *const c_char) -> *mut ClqTranscript {
    guarded_handle(|| {
        let path = text_arg(path, "transcript path")?;
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(Path::new(path), e))?;
        let inner = parse_transcript(&raw, &CorpusConfig::default())
            .map_err(|e| Error::data(format!("{path}: {e}")))?;
        Ok(ClqTranscript { inner })
    })
}

/// Session identifier of a parsed transcript; free with `clq_string_free`.
///
/// # Safety
/// `t` must be null or a live transcript handle.
#[no_mangle]
pub unsafe extern "C" fn clq_transcript_session_id(t: *const ClqTranscript) -> *mut c_char {
    match handle_arg(t, "transcript") {
        Ok(t) => owned_c_string(t.inner.session_id.clone()),
        Err(e) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Community label of a parsed transcript; free with `clq_string_free`.
///
/// # Safety
/// `t` must be null or a live transcript handle.
#[no_mangle]
pub unsafe extern "C" fn clq_transcript_community(t: *const ClqTranscript) -> *mut c_char {
    match handle_arg(t, "transcript") {
        Ok(t) => owned_c_string(t.inner.community_label.clone()),
        Err(e) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Number of turns in the transcript, moderator included. Zero with an error
/// recorded if the handle is null.
///
/// # Safety
/// `t` must be null or a live transcript handle.
#[no_mangle]
pub unsafe extern "C" fn clq_transcript_utterance_count(t: *const ClqTranscript) -> usize {
    match handle_arg(t, "transcript") {
        Ok(t) => t.inner.utterances.len(),
        Err(e) => {
            set_error(e.to_string());
            0
        }
    }
}

/// Number of distinct participant speakers, moderator excluded.
///
/// # Safety
/// `t` must be null or a live transcript handle.
#[no_mangle]
pub unsafe extern "C" fn clq_transcript_speaker_count(t: *const ClqTranscript) -> usize {
    match handle_arg(t, "transcript") {
        Ok(t) => {
            let speakers: std::collections::BTreeSet<&str> = t
                .inner
                .utterances
                .iter()
                .filter(|u| u.role == Role::Participant)
                .map(|u| u.speaker_id.as_str())
                .collect();
            speakers.len()
        }
        Err(e) => {
            set_error(e.to_string());
            0
        }
    }
}

/// Release a transcript handle. Null is ignored.
///
/// # Safety
/// `t` must come from `clq_transcript_parse` and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn clq_transcript_free(t: *mut ClqTranscript) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

// ---------------------------------------------------------------------------
// Topic models

/// A fitted topic model; see `clq_topic_model_load`.
pub struct ClqTopicModel {
    inner: TopicModel,
}

/// Load a topic model from the `model.json` a pipeline run wrote. Returns a
/// handle to free with `clq_topic_model_free`, or null on failure.
///
/// # Safety
/// `path` must be null or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn clq_topic_model_load(path: *const c_char) -> *mut ClqTopicModel {
    guarded_handle(|| {
        let path = text_arg(path, "model path")?;
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(Path::new(path), e))?;
        Ok(ClqTopicModel {
            inner: TopicModel::from_json(&raw)?,
        })
    })
}

/// Number of topics in the model; zero with an error recorded on null.
///
/// # Safety
/// `m` must be null or a live topic model handle.
#[no_mangle]
pub unsafe extern "C" fn clq_topic_model_num_topics(m: *const ClqTopicModel) -> usize {
    match handle_arg(m, "topic model") {
        Ok(m) => m.inner.num_topics(),
        Err(e) => {
            set_error(e.to_string());
            0
        }
    }
}

/// The `n` highest-probability terms of one topic, space-joined; free with
/// `clq_string_free`. Null on failure (bad handle or topic out of range).
///
/// # Safety
/// `m` must be null or a live topic model handle.
#[no_mangle]
pub unsafe extern "C" fn clq_topic_model_top_terms(
    m: *const ClqTopicModel,
    topic: usize,
    n: usize,
) -> *mut c_char {
    match handle_arg(m, "topic model").and_then(|m| top_words(&m.inner, topic, n)) {
        Ok(summary) => {
            let terms: Vec<&str> = summary
                .top_terms
                .iter()
                .map(|(term, _)| term.as_str())
                .collect();
            owned_c_string(terms.join(" "))
        }
        Err(e) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Release a topic model handle. Null is ignored.
///
/// # Safety
/// `m` must come from `clq_topic_model_load` and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn clq_topic_model_free(m: *mut ClqTopicModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

// ---------------------------------------------------------------------------
// Sentiment

/// A trained sentence classifier; see `clq_classifier_load`.
pub struct ClqClassifier {
    inner: SentimentClassifier,
    vocab: Vocabulary,
    rules: NormalizationRules,
}

/// Load a classifier from the `classifier.json` a pipeline run wrote.
/// Returns a handle to free with `clq_classifier_free`, or null on failure.
///
/// # Safety
/// `path` must be null or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn clq_classifier_load(path: *const c_char) -> *mut ClqClassifier {
    guarded_handle(|| {
        let path = text_arg(path, "classifier path")?;
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(Path::new(path), e))?;
        let inner = SentimentClassifier::from_json(&raw)?;
        let vocab = Vocabulary::from_terms(inner.terms.iter().cloned())?;
        Ok(ClqClassifier {
            inner,
            vocab,
            rules: NormalizationRules::default(),
        })
    })
}

/// Probability that `text` is positive, in [0, 1]. NaN on failure.
///
/// # Safety
/// `c` must be null or a live classifier handle; `text` null or a
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn clq_classifier_probability(
    c: *const ClqClassifier,
    text: *const c_char,
) -> f64 {
    let result = handle_arg(c, "classifier").and_then(|c| {
        let text = text_arg(text, "text")?;
        let tokens = normalize(&tokenize(text), &c.rules);
        let x = vectorize_tokens(&tokens, &c.vocab, &c.inner.idf);
        c.inner.probability(&x)
    });
    match result {
        Ok(p) => p,
        Err(e) => {
            set_error(e.to_string());
            f64::NAN
        }
    }
}

/// Class of `text` under the classifier's thresholds: 1 positive, 0 neutral,
/// -1 negative. -2 on failure.
///
/// # Safety
/// `c` must be null or a live classifier handle; `text` null or a
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn clq_classifier_class(
    c: *const ClqClassifier,
    text: *const c_char,
) -> c_int {
    let p = clq_classifier_probability(c, text);
    if p.is_nan() {
        return -2;
    }
    match classify(p, &(*c).inner.thresholds) {
        SentimentClass::Positive => 1,
        SentimentClass::Neutral => 0,
        SentimentClass::Negative => -1,
    }
}

/// Release a classifier handle. Null is ignored.
///
/// # Safety
/// `c` must come from `clq_classifier_load` and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn clq_classifier_free(c: *mut ClqClassifier) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Smoothed, clamped polarity ratio for a phrase's seed-proximity counts, in
/// [-10, 10]; divide by 10 for a score in [-1, 1].
#[no_mangle]
pub extern "C" fn clq_phrase_ratio(hit_positive: u64, hit_negative: u64) -> f64 {
    log_odds(hit_positive, hit_negative)
}
