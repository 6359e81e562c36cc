//! Transcript parsing and corpus assembly.
//!
//! The transcript format is line oriented: `#` comments, `@session:` /
//! `@community:` / `@topic:` header directives, and one speaker turn per line
//! as `SPEAKER<TAB>text`. A leading `[es] ` on the text marks translated
//! dialogue. Moderator turns are recognized by a configurable speaker-id
//! prefix and removed before any analysis.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Participant,
    Moderator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DiscussionTopic {
    T1,
    T2,
    T3,
    T4,
    Untagged,
}

impl DiscussionTopic {
    pub fn parse(s: &str) -> Option<DiscussionTopic> {
        match s {
            "T1" => Some(DiscussionTopic::T1),
            "T2" => Some(DiscussionTopic::T2),
            "T3" => Some(DiscussionTopic::T3),
            "T4" => Some(DiscussionTopic::T4),
            _ => None,
        }
    }
}

impl fmt::Display for DiscussionTopic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DiscussionTopic::T1 => "T1",
            DiscussionTopic::T2 => "T2",
            DiscussionTopic::T3 => "T3",
            DiscussionTopic::T4 => "T4",
            DiscussionTopic::Untagged => "untagged",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LanguageTag {
    Primary,
    Translated,
}

/// One uninterrupted speaker turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    pub speaker_id: String,
    pub role: Role,
    pub session_id: String,
    pub discussion_topic: DiscussionTopic,
    pub language_tag: LanguageTag,
    pub text: String,
    /// Position of this turn in the source transcript, before any stripping.
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub session_id: String,
    pub community_label: String,
    pub utterances: Vec<Utterance>,
}

/// Parsing and segmentation settings shared across the corpus stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub moderator_prefix: String,
    pub abbreviations: BTreeSet<String>,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        let abbreviations = ["Dr.", "Mr.", "Mrs.", "Ms.", "St.", "e.g.", "i.e."]
            .into_iter()
            .map(str::to_owned)
            .collect();
        CorpusConfig {
            moderator_prefix: "MOD".to_owned(),
            abbreviations,
        }
    }
}

const TRANSLATED_TAG: &str = "[es] ";

/// Parse one transcript file.
pub fn parse_transcript(raw: &str, config: &CorpusConfig) -> Result<Transcript> {
    let mut session_id = String::new();
    let mut community_label = String::new();
    let mut saw_session = false;
    let mut saw_community = false;
    let mut current_topic = DiscussionTopic::Untagged;
    let mut utterances: Vec<Utterance> = Vec::new();

    for (lineno, line) in raw.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('@') {
            let (directive, value) = rest.split_once(':').ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!("directive without ':' separator: {trimmed:?}"),
            })?;
            let value = value.trim();
            match directive.trim() {
                "session" => {
                    if saw_session {
                        return Err(Error::Format(format!(
                            "duplicate @session directive at line {lineno}"
                        )));
                    }
                    saw_session = true;
                    session_id = value.to_owned();
                }
                "community" => {
                    if saw_community {
                        return Err(Error::Format(format!(
                            "duplicate @community directive at line {lineno}"
                        )));
                    }
                    saw_community = true;
                    community_label = value.to_owned();
                }
                "topic" => {
                    current_topic = DiscussionTopic::parse(value).ok_or_else(|| Error::Parse {
                        line: lineno,
                        message: format!("unknown discussion topic {value:?} (expected T1..T4)"),
                    })?;
                }
                other => {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("unknown directive @{other}"),
                    });
                }
            }
            continue;
        }

        let (speaker, text) = line.split_once('\t').ok_or_else(|| Error::Parse {
            line: lineno,
            message: "turn line without tab separator".to_owned(),
        })?;
        let speaker = speaker.trim();
        if speaker.is_empty() {
            return Err(Error::Parse {
                line: lineno,
                message: "empty speaker id".to_owned(),
            });
        }
        let (language_tag, text) = match text.trim_start().strip_prefix(TRANSLATED_TAG) {
            Some(stripped) => (LanguageTag::Translated, stripped),
            None => (LanguageTag::Primary, text),
        };
        let text = text.trim();
        if text.is_empty() {
            return Err(Error::Parse {
                line: lineno,
                message: "empty utterance text".to_owned(),
            });
        }
        let role = if speaker.starts_with(&config.moderator_prefix) {
            Role::Moderator
        } else {
            Role::Participant
        };
        utterances.push(Utterance {
            speaker_id: speaker.to_owned(),
            role,
            session_id: String::new(), // filled in below once directives are known
            discussion_topic: current_topic,
            language_tag,
            text: text.to_owned(),
            index: utterances.len(),
        });
    }

    for u in &mut utterances {
        u.session_id = session_id.clone();
    }
    Ok(Transcript {
        session_id,
        community_label,
        utterances,
    })
}

/// Render a transcript back into the line-oriented file format.
pub fn serialize_transcript(t: &Transcript) -> String {
    let mut out = String::new();
    if !t.session_id.is_empty() {
        out.push_str(&format!("@session: {}\n", t.session_id));
    }
    if !t.community_label.is_empty() {
        out.push_str(&format!("@community: {}\n", t.community_label));
    }
    let mut current_topic = DiscussionTopic::Untagged;
    for u in &t.utterances {
        if u.discussion_topic != current_topic && u.discussion_topic != DiscussionTopic::Untagged {
            out.push_str(&format!("@topic: {}\n", u.discussion_topic));
            current_topic = u.discussion_topic;
        }
        let tag = match u.language_tag {
            LanguageTag::Translated => TRANSLATED_TAG,
            LanguageTag::Primary => "",
        };
        out.push_str(&format!("{}\t{}{}\n", u.speaker_id, tag, u.text));
    }
    out
}

/// Keep only participant turns, preserving order and source indices.
pub fn strip_moderator(t: &Transcript) -> Transcript {
    Transcript {
        session_id: t.session_id.clone(),
        community_label: t.community_label.clone(),
        utterances: t
            .utterances
            .iter()
            .filter(|u| u.role == Role::Participant)
            .cloned()
            .collect(),
    }
}

/// Split text into sentences on `.`, `!`, `?` followed by whitespace, with an
/// abbreviation guard so "Dr. Smith" stays together.
pub fn segment_sentences(text: &str, abbreviations: &BTreeSet<String>) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        if matches!(c, '.' | '!' | '?') {
            let next_is_ws = chars.get(i + 1).is_none_or(|n| n.is_whitespace());
            let at_end = i + 1 == chars.len();
            if next_is_ws && !at_end {
                let guarded = c == '.' && {
                    // Word ending at this period, e.g. "Dr." or "e.g."
                    let mut w = i;
                    while w > start && !chars[w - 1].is_whitespace() {
                        w -= 1;
                    }
                    let word: String = chars[w..=i].iter().collect();
                    abbreviations.contains(&word)
                };
                if !guarded {
                    let sentence: String = chars[start..=i].iter().collect();
                    let sentence = sentence.trim();
                    if !sentence.is_empty() {
                        sentences.push(sentence.to_owned());
                    }
                    i += 1;
                    while i < chars.len() && chars[i].is_whitespace() {
                        i += 1;
                    }
                    start = i;
                    continue;
                }
            }
        }
        i += 1;
    }
    if start < chars.len() {
        let rest: String = chars[start..].iter().collect();
        let rest = rest.trim();
        if !rest.is_empty() {
            sentences.push(rest.to_owned());
        }
    }
    sentences
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupingPolicy {
    PerUtterance,
    PerSpeaker,
    PerSessionTopic,
}

impl GroupingPolicy {
    pub fn parse(s: &str) -> Option<GroupingPolicy> {
        match s {
            "per_utterance" => Some(GroupingPolicy::PerUtterance),
            "per_speaker" => Some(GroupingPolicy::PerSpeaker),
            "per_session_topic" => Some(GroupingPolicy::PerSessionTopic),
            _ => None,
        }
    }
}

/// One analysis document: a group of participant sentences with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    /// (session_id, utterance index) pairs this document was built from.
    pub source_refs: Vec<(String, usize)>,
    pub sentences: Vec<String>,
    /// Normalized token stream; empty until the preprocessing stage runs.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub grouping_policy: GroupingPolicy,
}

/// Group participant utterances into analysis documents.
///
/// Moderator turns are ignored regardless of whether the caller stripped them
/// already, so the no-moderator-text invariant holds unconditionally.
pub fn build_corpus(
    transcripts: &[Transcript],
    policy: GroupingPolicy,
    config: &CorpusConfig,
) -> Result<Corpus> {
    if transcripts.is_empty() {
        return Err(Error::data("cannot build a corpus from zero transcripts"));
    }
    let mut documents: Vec<Document> = Vec::new();
    for t in transcripts {
        let participants: Vec<&Utterance> = t
            .utterances
            .iter()
            .filter(|u| u.role == Role::Participant)
            .collect();
        match policy {
            GroupingPolicy::PerUtterance => {
                for u in &participants {
                    documents.push(Document {
                        doc_id: format!("{}#u{}", t.session_id, u.index),
                        source_refs: vec![(t.session_id.clone(), u.index)],
                        sentences: segment_sentences(&u.text, &config.abbreviations),
                        tokens: Vec::new(),
                    });
                }
            }
            GroupingPolicy::PerSpeaker => {
                let mut order: Vec<&str> = Vec::new();
                for u in &participants {
                    if !order.contains(&u.speaker_id.as_str()) {
                        order.push(&u.speaker_id);
                    }
                }
                for speaker in order {
                    let group: Vec<&&Utterance> = participants
                        .iter()
                        .filter(|u| u.speaker_id == speaker)
                        .collect();
                    documents.push(Document {
                        doc_id: format!("{}#s{}", t.session_id, speaker),
                        source_refs: group
                            .iter()
                            .map(|u| (t.session_id.clone(), u.index))
                            .collect(),
                        sentences: group
                            .iter()
                            .flat_map(|u| segment_sentences(&u.text, &config.abbreviations))
                            .collect(),
                        tokens: Vec::new(),
                    });
                }
            }
            GroupingPolicy::PerSessionTopic => {
                let mut order: Vec<DiscussionTopic> = Vec::new();
                for u in &participants {
                    if !order.contains(&u.discussion_topic) {
                        order.push(u.discussion_topic);
                    }
                }
                for topic in order {
                    let group: Vec<&&Utterance> = participants
                        .iter()
                        .filter(|u| u.discussion_topic == topic)
                        .collect();
                    documents.push(Document {
                        doc_id: format!("{}#t{}", t.session_id, topic),
                        source_refs: group
                            .iter()
                            .map(|u| (t.session_id.clone(), u.index))
                            .collect(),
                        sentences: group
                            .iter()
                            .flat_map(|u| segment_sentences(&u.text, &config.abbreviations))
                            .collect(),
                        tokens: Vec::new(),
                    });
                }
            }
        }
    }
    if documents.is_empty() {
        return Err(Error::data("corpus has no participant utterances"));
    }
    Ok(Corpus {
        documents,
        grouping_policy: policy,
    })
}

/// Export a corpus as JSON lines, one document per line.
pub fn corpus_to_jsonl(corpus: &Corpus) -> String {
    #[derive(Serialize)]
    struct Row<'a> {
        doc_id: &'a str,
        source_refs: &'a [(String, usize)],
        sentences: &'a [String],
    }
    let mut out = String::new();
    for d in &corpus.documents {
        let row = Row {
            doc_id: &d.doc_id,
            source_refs: &d.source_refs,
            sentences: &d.sentences,
        };
        out.push_str(&serde_json::to_string(&row).expect("document serializes"));
        out.push('\n');
    }
    out
}

/// Address of one sentence inside a session.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SentenceRef {
    pub session_id: String,
    pub utterance_index: usize,
    pub sentence_index: usize,
}

/// A participant sentence with full provenance, the unit of sentiment scoring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub sref: SentenceRef,
    pub speaker_id: String,
    pub community: String,
    pub topic: DiscussionTopic,
    pub text: String,
}

/// Flatten stripped transcripts into per-sentence records, in source order.
pub fn sentence_records(transcripts: &[Transcript], config: &CorpusConfig) -> Vec<SentenceRecord> {
    let mut records = Vec::new();
    for t in transcripts {
        for u in t.utterances.iter().filter(|u| u.role == Role::Participant) {
            for (si, sentence) in segment_sentences(&u.text, &config.abbreviations)
                .into_iter()
                .enumerate()
            {
                records.push(SentenceRecord {
                    sref: SentenceRef {
                        session_id: t.session_id.clone(),
                        utterance_index: u.index,
                        sentence_index: si,
                    },
                    speaker_id: u.speaker_id.clone(),
                    community: t.community_label.clone(),
                    topic: u.discussion_topic,
                    text: sentence,
                });
            }
        }
    }
    records
}
