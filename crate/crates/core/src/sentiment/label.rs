use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::lexicon::SentimentLexicon;
use crate::corpus::{SentenceRecord, SentenceRef};
use crate::error::{Error, Result};
use crate::preprocess::{extract_phrases, tokenize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Negative,
    Positive,
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Label::Negative => "negative",
            Label::Positive => "positive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledItem {
    pub sref: SentenceRef,
    pub label: Label,
    pub weight: f64,
}

/// Training items for the classifier: only positive and negative labels,
/// never neutral.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LabeledSet {
    pub items: Vec<LabeledItem>,
}

/// Label sentences from their lexicon phrases: the aggregate score is the
/// mean of the sentence's phrase scores; aggregates above `tau` label
/// positive, below `-tau` negative, anything else is left out. Sentences
/// without any lexicon phrase are left out too.
pub fn weak_label(
    sentences: &[SentenceRecord],
    lexicon: &SentimentLexicon,
    tau: f64,
) -> LabeledSet {
    let mut items = Vec::new();
    for record in sentences {
        let tokens = tokenize(&record.text);
        let scores: Vec<f64> = extract_phrases(&tokens)
            .iter()
            .filter_map(|p| lexicon.get(&p.key()).map(|e| e.score))
            .collect();
        if scores.is_empty() {
            continue;
        }
        let aggregate: f64 = scores.iter().sum::<f64>() / scores.len() as f64;
        let label = if aggregate > tau {
            Label::Positive
        } else if aggregate < -tau {
            Label::Negative
        } else {
            continue;
        };
        items.push(LabeledItem {
            sref: record.sref.clone(),
            label,
            weight: 1.0,
        });
    }
    LabeledSet { items }
}

/// Merge hand labels over weak labels: walk the sentence records in order;
/// a hand label wins where both exist, and hand-labeled sentences join the
/// set even if weak labeling skipped them.
pub fn apply_hand_labels(
    records: &[SentenceRecord],
    weak: &LabeledSet,
    hand: &LabeledSet,
) -> LabeledSet {
    let weak_by_ref: BTreeMap<&SentenceRef, &LabeledItem> =
        weak.items.iter().map(|i| (&i.sref, i)).collect();
    let hand_by_ref: BTreeMap<&SentenceRef, &LabeledItem> =
        hand.items.iter().map(|i| (&i.sref, i)).collect();
    let items = records
        .iter()
        .filter_map(|r| {
            hand_by_ref
                .get(&r.sref)
                .or_else(|| weak_by_ref.get(&r.sref))
                .map(|i| (*i).clone())
        })
        .collect();
    LabeledSet { items }
}

/// Parse a label file: tab-separated `session_id`, utterance index, sentence
/// index, and `positive` or `negative`. `#` lines and blank lines are
/// skipped.
pub fn parse_label_file(text: &str) -> Result<LabeledSet> {
    let mut items = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [session, utt, sent, label] = fields.as_slice() else {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("expected 4 tab-separated fields, got {}", fields.len()),
            });
        };
        let label = match *label {
            "positive" => Label::Positive,
            "negative" => Label::Negative,
            other => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("label must be \"positive\" or \"negative\", got {other:?}"),
                })
            }
        };
        let parse_idx = |s: &str, what: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse {
                line: lineno + 1,
                message: format!("invalid {what} {s:?}"),
            })
        };
        items.push(LabeledItem {
            sref: SentenceRef {
                session_id: (*session).to_owned(),
                utterance_index: parse_idx(utt, "utterance index")?,
                sentence_index: parse_idx(sent, "sentence index")?,
            },
            label,
            weight: 1.0,
        });
    }
    Ok(LabeledSet { items })
}

pub fn write_label_file(set: &LabeledSet) -> String {
    let mut out = String::new();
    for item in &set.items {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            item.sref.session_id,
            item.sref.utterance_index,
            item.sref.sentence_index,
            match item.label {
                Label::Positive => "positive",
                Label::Negative => "negative",
            }
        ));
    }
    out
}
