//! Aggregate sentence scores into per-speaker, per-discussion-topic, and
//! per-transport-mode reports, plus the CSV and plot-data emitters for them.
//!
//! All means are computed by left-to-right summation over inputs sorted by
//! sentence address, so every report is byte-stable under input permutation.

use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::{DiscussionTopic, SentenceRef};
use crate::error::{Error, Result};
use crate::sentiment::{ModeScore, ScoredSentence};
use crate::serialize::sig17;

/// Transport mode categories and the keywords that signal a mention of each.
/// Category order is preserved and fixes report row order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeCategoryDictionary {
    categories: Vec<(String, Vec<String>)>,
}

impl Default for ModeCategoryDictionary {
    fn default() -> Self {
        let cat = |mode: &str, kws: &[&str]| {
            (
                mode.to_owned(),
                kws.iter().map(|k| (*k).to_owned()).collect(),
            )
        };
        ModeCategoryDictionary {
            categories: vec![
                cat("walking", &["walk", "pedestrian", "sidewalk", "crosswalk"]),
                cat(
                    "bicycling",
                    &["bike", "bicycle", "cycling", "cyclist", "bike lane"],
                ),
                cat(
                    "public_transportation",
                    &["bus", "train", "transit", "rail", "station"],
                ),
                cat(
                    "private_car",
                    &["car", "driving", "parking", "traffic", "vehicle"],
                ),
                cat(
                    "shared_multimodal",
                    &[
                        "uber",
                        "lyft",
                        "divvy",
                        "bikeshare",
                        "rideshare",
                        "ridesourcing",
                        "carshare",
                        "multimodal",
                    ],
                ),
            ],
        }
    }
}

impl ModeCategoryDictionary {
    pub fn new(categories: Vec<(String, Vec<String>)>) -> Result<Self> {
        let dict = ModeCategoryDictionary { categories };
        dict.validate()?;
        Ok(dict)
    }

    pub fn validate(&self) -> Result<()> {
        if self.categories.is_empty() {
            return Err(Error::config("modes", "mode dictionary must be non-empty"));
        }
        let mut seen = BTreeSet::new();
        for (mode, keywords) in &self.categories {
            if !seen.insert(mode.as_str()) {
                return Err(Error::config("modes", format!("duplicate mode {mode:?}")));
            }
            if keywords.is_empty() || keywords.iter().any(|k| k.trim().is_empty()) {
                return Err(Error::config(
                    "modes",
                    format!("mode {mode:?} needs at least one non-blank keyword"),
                ));
            }
        }
        Ok(())
    }

    pub fn categories(&self) -> &[(String, Vec<String>)] {
        &self.categories
    }

    pub fn modes(&self) -> impl Iterator<Item = &str> {
        self.categories.iter().map(|(m, _)| m.as_str())
    }

    pub fn keywords(&self, mode: &str) -> Option<&[String]> {
        self.categories
            .iter()
            .find(|(m, _)| m == mode)
            .map(|(_, k)| k.as_slice())
    }
}

/// Per-speaker positiveness summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeakerReport {
    pub speaker_id: String,
    /// Mean probability per utterance, in session and utterance order.
    pub utterance_means: Vec<f64>,
    /// Arithmetic mean over all of the speaker's scored sentences.
    pub overall_mean: f64,
    pub sentence_count: usize,
}

/// Mean positiveness for one (discussion topic, community) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicSentimentReport {
    pub discussion_topic: DiscussionTopic,
    pub community: String,
    pub mu: f64,
}

/// One row of the per-mode sentiment table. Statistics are absent when too
/// few scores exist to compute them (no scores, or a single score for the
/// sample standard deviation).
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSentimentRow {
    pub mode: String,
    pub mean: Option<f64>,
    pub std_dev: Option<f64>,
    pub count: usize,
}

fn sorted_refs(items: &mut [(&SentenceRef, f64)]) {
    items.sort_by(|a, b| a.0.cmp(b.0).then_with(|| a.1.total_cmp(&b.1)));
}

fn mean(values: impl Iterator<Item = f64>, count: usize) -> f64 {
    let mut sum = 0.0;
    for v in values {
        sum += v;
    }
    sum / count as f64
}

/// Group sorted (ref, probability) pairs into utterances and return the mean
/// probability of each utterance.
fn utterance_means(items: &[(&SentenceRef, f64)]) -> Vec<f64> {
    let mut means = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let key = (&items[i].0.session_id, items[i].0.utterance_index);
        let mut j = i;
        let mut sum = 0.0;
        while j < items.len() && (&items[j].0.session_id, items[j].0.utterance_index) == key {
            sum += items[j].1;
            j += 1;
        }
        means.push(sum / (j - i) as f64);
        i = j;
    }
    means
}

/// One report per speaker with scored sentences, sorted by speaker id.
/// Roster speakers with no scored sentences are omitted with a warning; pass
/// an empty roster to skip that check.
pub fn speaker_positiveness(
    sentences: &[ScoredSentence],
    roster: &[String],
) -> Vec<SpeakerReport> {
    let mut by_speaker: BTreeMap<&str, Vec<(&SentenceRef, f64)>> = BTreeMap::new();
    for s in sentences {
        by_speaker
            .entry(s.record.speaker_id.as_str())
            .or_default()
            .push((&s.record.sref, s.probability_of_positiveness));
    }
    for name in roster {
        if !by_speaker.contains_key(name.as_str()) {
            log::warn!("speaker {name} has no scored sentences and is omitted from the report");
        }
    }
    let mut out = Vec::with_capacity(by_speaker.len());
    for (speaker, mut items) in by_speaker {
        sorted_refs(&mut items);
        let overall = mean(items.iter().map(|(_, p)| *p), items.len());
        out.push(SpeakerReport {
            speaker_id: speaker.to_owned(),
            utterance_means: utterance_means(&items),
            overall_mean: overall,
            sentence_count: items.len(),
        });
    }
    out
}

/// Mean positiveness per (discussion topic, community) cell, communities in
/// lexicographic order. The wrap-up topic T4 is excluded unless requested;
/// untagged sentences never contribute. Empty cells are omitted with a
/// warning.
pub fn topic_mean_positiveness(
    sentences: &[ScoredSentence],
    include_t4: bool,
) -> Vec<TopicSentimentReport> {
    let mut topics = vec![
        DiscussionTopic::T1,
        DiscussionTopic::T2,
        DiscussionTopic::T3,
    ];
    if include_t4 {
        topics.push(DiscussionTopic::T4);
    }
    let mut cells: BTreeMap<(&str, DiscussionTopic), Vec<(&SentenceRef, f64)>> = BTreeMap::new();
    let mut communities = BTreeSet::new();
    let mut untagged = 0usize;
    for s in sentences {
        communities.insert(s.record.community.as_str());
        if s.record.topic == DiscussionTopic::Untagged {
            untagged += 1;
            continue;
        }
        if !topics.contains(&s.record.topic) {
            continue;
        }
        cells
            .entry((s.record.community.as_str(), s.record.topic))
            .or_default()
            .push((&s.record.sref, s.probability_of_positiveness));
    }
    if untagged > 0 {
        log::warn!("{untagged} scored sentences carry no discussion-topic tag; skipped");
    }
    let mut out = Vec::new();
    for community in communities {
        for &topic in &topics {
            match cells.get_mut(&(community, topic)) {
                Some(items) => {
                    sorted_refs(items);
                    out.push(TopicSentimentReport {
                        discussion_topic: topic,
                        community: community.to_owned(),
                        mu: mean(items.iter().map(|(_, p)| *p), items.len()),
                    });
                }
                None => {
                    log::warn!("no scored sentences for {topic} in {community}; cell omitted");
                }
            }
        }
    }
    out
}

/// One row per dictionary mode, in dictionary order, with mean, sample
/// standard deviation, and count of that mode's scores.
pub fn mode_sentiment_table(
    scores: &[ModeScore],
    dict: &ModeCategoryDictionary,
) -> Vec<ModeSentimentRow> {
    let mut by_mode: BTreeMap<&str, Vec<(&SentenceRef, f64)>> = BTreeMap::new();
    for s in scores {
        match dict.keywords(&s.mode) {
            Some(_) => by_mode
                .entry(s.mode.as_str())
                .or_default()
                .push((&s.sref, s.score)),
            None => log::warn!("score for unknown mode {:?} dropped", s.mode),
        }
    }
    dict.modes()
        .map(|mode| {
            let mut items = by_mode.remove(mode).unwrap_or_default();
            sorted_refs(&mut items);
            let count = items.len();
            let (mean_v, std_dev) = if count == 0 {
                (None, None)
            } else {
                let m = mean(items.iter().map(|(_, v)| *v), count);
                let std = if count < 2 {
                    None
                } else {
                    let ss = mean(
                        items.iter().map(|(_, v)| (v - m) * (v - m)),
                        count - 1,
                    );
                    Some(ss.sqrt())
                };
                (Some(m), std)
            };
            ModeSentimentRow {
                mode: mode.to_owned(),
                mean: mean_v,
                std_dev,
                count,
            }
        })
        .collect()
}

fn csv_field(raw: &str) -> String {
    if raw.contains(',') || raw.contains('"') || raw.contains('\n') {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_owned()
    }
}

fn fmt6(x: f64) -> String {
    format!("{x:.6}")
}

fn fmt6_opt(x: Option<f64>) -> String {
    x.map(fmt6).unwrap_or_default()
}

/// CSV with one row per speaker; utterance means are semicolon-joined inside
/// one field. Six decimal places throughout.
pub fn speakers_csv(reports: &[SpeakerReport]) -> String {
    let mut out = String::from("speaker_id,utterance_means,overall_mean,sentence_count\n");
    for r in reports {
        let means: Vec<String> = r.utterance_means.iter().map(|&m| fmt6(m)).collect();
        out.push_str(&format!(
            "{},{},{},{}\n",
            csv_field(&r.speaker_id),
            means.join(";"),
            fmt6(r.overall_mean),
            r.sentence_count
        ));
    }
    out
}

pub fn topic_mu_csv(reports: &[TopicSentimentReport]) -> String {
    let mut out = String::from("discussion_topic,community,mu\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{}\n",
            r.discussion_topic,
            csv_field(&r.community),
            fmt6(r.mu)
        ));
    }
    out
}

pub fn mode_table_csv(rows: &[ModeSentimentRow]) -> String {
    let mut out = String::from("mode,mean,std_dev,count\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            csv_field(&r.mode),
            fmt6_opt(r.mean),
            fmt6_opt(r.std_dev),
            r.count
        ));
    }
    out
}

/// Plot data for one discussion topic's speaker chart: community -> speaker
/// -> per-utterance mean probabilities.
pub type FigureSeries = BTreeMap<String, BTreeMap<String, Vec<f64>>>;

type GroupedRefs<'a> = BTreeMap<String, BTreeMap<String, Vec<(&'a SentenceRef, f64)>>>;

pub fn figure_data(sentences: &[ScoredSentence], topic: DiscussionTopic) -> FigureSeries {
    let mut grouped: GroupedRefs = BTreeMap::new();
    for s in sentences.iter().filter(|s| s.record.topic == topic) {
        grouped
            .entry(s.record.community.clone())
            .or_default()
            .entry(s.record.speaker_id.clone())
            .or_default()
            .push((&s.record.sref, s.probability_of_positiveness));
    }
    grouped
        .into_iter()
        .map(|(community, speakers)| {
            let speakers = speakers
                .into_iter()
                .map(|(speaker, mut items)| {
                    sorted_refs(&mut items);
                    (speaker, utterance_means(&items))
                })
                .collect();
            (community, speakers)
        })
        .collect()
}

/// Serialize figure data as JSON with floats at 17 significant digits.
pub fn figure_json(data: &FigureSeries) -> String {
    use crate::serialize::push_json_string;
    let mut buf = String::from("{\n");
    for (ci, (community, speakers)) in data.iter().enumerate() {
        if ci > 0 {
            buf.push_str(",\n");
        }
        buf.push_str("  ");
        push_json_string(&mut buf, community);
        buf.push_str(": {");
        for (si, (speaker, means)) in speakers.iter().enumerate() {
            if si > 0 {
                buf.push_str(", ");
            }
            push_json_string(&mut buf, speaker);
            buf.push_str(": [");
            for (mi, m) in means.iter().enumerate() {
                if mi > 0 {
                    buf.push_str(", ");
                }
                buf.push_str(&sig17(*m));
            }
            buf.push(']');
        }
        buf.push('}');
    }
    buf.push_str("\n}\n");
    buf
}
