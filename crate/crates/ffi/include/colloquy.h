#ifndef COLLOQUY_H
#define COLLOQUY_H

/* Generated by cbindgen from colloquy-ffi; edit src/lib.rs instead. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Success.
#define CLQ_OK 0

// Invalid configuration or arguments.
#define CLQ_ERR_CONFIG 2

// Unreadable, malformed, or inconsistent data.
#define CLQ_ERR_DATA 3

// Unexpected internal failure.
#define CLQ_ERR_INTERNAL 4

// A trained sentence classifier; see `clq_classifier_load`.
typedef struct ClqClassifier ClqClassifier;

// A fitted topic model; see `clq_topic_model_load`.
typedef struct ClqTopicModel ClqTopicModel;

// A parsed transcript; see `clq_transcript_parse`.
typedef struct ClqTranscript ClqTranscript;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or null if the last
// call succeeded. Do not free; the buffer is reused by later failures.
const char *clq_last_error_message(void);

// Library version as a static string; do not free.
const char *clq_version(void);

// Release a string returned by this library.
//
// # Safety
// `s` must come from a colloquy function returning `char*`, and must not be
// used afterwards. Null is ignored.
void clq_string_free(char *s);

// Run the whole pipeline described by the key=value config file at
// `config_path`: ingest, topics, sentiment, report.
//
// # Safety
// `config_path` must be null or a NUL-terminated string.
int clq_run_pipeline(const char *config_path);

// Run one pipeline stage: "ingest", "topics", "sentiment", or "report".
// Stages read their inputs from the output directory, so run them in order.
//
// # Safety
// Both arguments must be null or NUL-terminated strings.
int clq_run_stage(const char *config_path, const char *stage);

// Parse the transcript file at `path` with default settings. Returns a
// handle to free with `clq_transcript_free`, or null on failure.
//
// # Safety
// `path` must be null or a NUL-terminated string.
struct ClqTranscript *clq_transcript_parse(const char *path);

// Session identifier of a parsed transcript; free with `clq_string_free`.
//
// # Safety
// `t` must be null or a live transcript handle.
char *clq_transcript_session_id(const struct ClqTranscript *t);

// Community label of a parsed transcript; free with `clq_string_free`.
//
// # Safety
// `t` must be null or a live transcript handle.
char *clq_transcript_community(const struct ClqTranscript *t);

// Number of turns in the transcript, moderator included. Zero with an error
// recorded if the handle is null.
//
// # Safety
// `t` must be null or a live transcript handle.
size_t clq_transcript_utterance_count(const struct ClqTranscript *t);

// Number of distinct participant speakers, moderator excluded.
//
// # Safety
// `t` must be null or a live transcript handle.
size_t clq_transcript_speaker_count(const struct ClqTranscript *t);

// Release a transcript handle. Null is ignored.
//
// # Safety
// `t` must come from `clq_transcript_parse` and must not be used afterwards.
void clq_transcript_free(struct ClqTranscript *t);

// Load a topic model from the `model.json` a pipeline run wrote. Returns a
// handle to free with `clq_topic_model_free`, or null on failure.
//
// # Safety
// `path` must be null or a NUL-terminated string.
struct ClqTopicModel *clq_topic_model_load(const char *path);

// Number of topics in the model; zero with an error recorded on null.
//
// # Safety
// `m` must be null or a live topic model handle.
size_t clq_topic_model_num_topics(const struct ClqTopicModel *m);

// The `n` highest-probability terms of one topic, space-joined; free with
// `clq_string_free`. Null on failure (bad handle or topic out of range).
//
// # Safety
// `m` must be null or a live topic model handle.
char *clq_topic_model_top_terms(const struct ClqTopicModel *m, size_t topic, size_t n);

// Release a topic model handle. Null is ignored.
//
// # Safety
// `m` must come from `clq_topic_model_load` and must not be used afterwards.
void clq_topic_model_free(struct ClqTopicModel *m);

// Load a classifier from the `classifier.json` a pipeline run wrote.
// Returns a handle to free with `clq_classifier_free`, or null on failure.
//
// # Safety
// `path` must be null or a NUL-terminated string.
struct ClqClassifier *clq_classifier_load(const char *path);

// Probability that `text` is positive, in [0, 1]. NaN on failure.
//
// # Safety
// `c` must be null or a live classifier handle; `text` null or a
// NUL-terminated string.
double clq_classifier_probability(const struct ClqClassifier *c, const char *text);

// Class of `text` under the classifier's thresholds: 1 positive, 0 neutral,
// -1 negative. -2 on failure.
//
// # Safety
// `c` must be null or a live classifier handle; `text` null or a
// NUL-terminated string.
int clq_classifier_class(const struct ClqClassifier *c, const char *text);

// Release a classifier handle. Null is ignored.
//
// # Safety
// `c` must come from `clq_classifier_load` and must not be used afterwards.
void clq_classifier_free(struct ClqClassifier *c);

// Smoothed, clamped polarity ratio for a phrase's seed-proximity counts, in
// [-10, 10]; divide by 10 for a score in [-1, 1].
double clq_phrase_ratio(uint64_t hit_positive, uint64_t hit_negative);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* COLLOQUY_H */
