use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SeedWordSets;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::preprocess::{tokenize, CandidatePhrase};
use crate::serialize::sig17;

/// Signed, clamped count ratio with add-one smoothing: the larger count over
/// the smaller, negated when negative hits dominate, zero on a tie, clamped
/// to [-10, 10].
pub fn log_odds(hit_positive_count: u64, hit_negative_count: u64) -> f64 {
    let p = (hit_positive_count + 1) as f64;
    let n = (hit_negative_count + 1) as f64;
    let ratio = if p < n {
        -(n / p)
    } else if p > n {
        p / n
    } else {
        0.0
    };
    ratio.clamp(-10.0, 10.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub hit_positive_count: u64,
    pub hit_negative_count: u64,
    /// Clamped ratio in [-10, 10].
    pub ratio: f64,
    /// ratio / 10, in [-1, 1].
    pub score: f64,
}

/// Phrase sentiment dictionary keyed by the space-joined phrase tokens.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SentimentLexicon {
    pub entries: BTreeMap<String, LexiconEntry>,
}

impl SentimentLexicon {
    pub fn get(&self, phrase_key: &str) -> Option<&LexiconEntry> {
        self.entries.get(phrase_key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Tab-separated export, one phrase per line, sorted by phrase.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("phrase\thit_pos\thit_neg\tratio\tscore\n");
        for (phrase, e) in &self.entries {
            out.push_str(&format!(
                "{phrase}\t{}\t{}\t{}\t{}\n",
                e.hit_positive_count,
                e.hit_negative_count,
                sig17(e.ratio),
                sig17(e.score)
            ));
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<SentimentLexicon> {
        let mut entries = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.is_empty() || line.starts_with("phrase\t") {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [phrase, pos, neg, ratio, score] = fields.as_slice() else {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected 5 tab-separated fields, got {}", fields.len()),
                });
            };
            let parse_err = |what: &str| Error::Parse {
                line: lineno + 1,
                message: format!("invalid {what} in lexicon row"),
            };
            entries.insert(
                (*phrase).to_owned(),
                LexiconEntry {
                    hit_positive_count: pos.parse().map_err(|_| parse_err("hit_pos"))?,
                    hit_negative_count: neg.parse().map_err(|_| parse_err("hit_neg"))?,
                    ratio: ratio.parse().map_err(|_| parse_err("ratio"))?,
                    score: score.parse().map_err(|_| parse_err("score"))?,
                },
            );
        }
        Ok(SentimentLexicon { entries })
    }
}

/// Count, for every distinct candidate phrase, how many of its occurrences in
/// the reference corpus sit within `window` tokens of a positive or negative
/// seed word, then score each phrase with [`log_odds`]. Occurrences are
/// matched inside single sentences on lowercased raw tokens; one occurrence
/// contributes at most one hit per polarity.
pub fn build_lexicon(
    phrases: &[CandidatePhrase],
    reference_corpus: &Corpus,
    seeds: &SeedWordSets,
    window: usize,
) -> Result<SentimentLexicon> {
    seeds.validate()?;
    if window < 1 {
        return Err(Error::config("sentiment.window", "must be at least 1"));
    }
    let total_sentences: usize = reference_corpus
        .documents
        .iter()
        .map(|d| d.sentences.len())
        .sum();
    if total_sentences == 0 {
        return Err(Error::data("reference corpus has no sentences"));
    }

    // One entry per distinct phrase key, zero-initialized so phrases with no
    // nearby seeds still appear with the neutral score.
    let mut counts: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    let mut keys: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for p in phrases {
        counts.entry(p.key()).or_insert((0, 0));
        keys.entry(p.key()).or_insert_with(|| p.tokens.clone());
    }

    for doc in &reference_corpus.documents {
        for sentence in &doc.sentences {
            let tokens: Vec<String> = tokenize(sentence)
                .iter()
                .map(|t| t.to_lowercase())
                .collect();
            if tokens.is_empty() {
                continue;
            }
            let pos_at: Vec<usize> = tokens
                .iter()
                .enumerate()
                .filter(|(_, t)| seeds.positive.contains(*t))
                .map(|(i, _)| i)
                .collect();
            let neg_at: Vec<usize> = tokens
                .iter()
                .enumerate()
                .filter(|(_, t)| seeds.negative.contains(*t))
                .map(|(i, _)| i)
                .collect();
            if pos_at.is_empty() && neg_at.is_empty() {
                continue;
            }
            for (key, phrase_tokens) in &keys {
                for start in occurrences(&tokens, phrase_tokens) {
                    let end = start + phrase_tokens.len() - 1;
                    let near = |positions: &[usize]| {
                        positions.iter().any(|&s| {
                            let dist = if s < start {
                                start - s
                            } else {
                                s.saturating_sub(end)
                            };
                            dist <= window
                        })
                    };
                    let entry = counts.get_mut(key).expect("key preseeded");
                    if near(&pos_at) {
                        entry.0 += 1;
                    }
                    if near(&neg_at) {
                        entry.1 += 1;
                    }
                }
            }
        }
    }

    let entries = counts
        .into_iter()
        .map(|(key, (pos, neg))| {
            let ratio = log_odds(pos, neg);
            (
                key,
                LexiconEntry {
                    hit_positive_count: pos,
                    hit_negative_count: neg,
                    ratio,
                    score: ratio / 10.0,
                },
            )
        })
        .collect();
    Ok(SentimentLexicon { entries })
}

/// Start indices of every occurrence of `needle` as a contiguous subsequence.
fn occurrences(haystack: &[String], needle: &[String]) -> Vec<usize> {
    if needle.is_empty() || haystack.len() < needle.len() {
        return Vec::new();
    }
    (0..=haystack.len() - needle.len())
        .filter(|&i| haystack[i..i + needle.len()] == *needle)
        .collect()
}
