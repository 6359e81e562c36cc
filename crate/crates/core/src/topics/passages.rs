use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::{SentenceRecord, SentenceRef};
use crate::preprocess::{normalize, tokenize, NormalizationRules};

/// A contiguous run of sentences from one session in which at least one
/// sentence mentions a topic term, plus surrounding context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Passage {
    pub session_id: String,
    pub sentences: Vec<String>,
    pub refs: Vec<SentenceRef>,
}

/// Find the passages discussing any of `topic_terms`. A sentence qualifies
/// when its normalized tokens intersect the normalized term set; maximal runs
/// of qualifying sentences are extended by `window` context sentences on each
/// side, and extended runs that touch are merged. Passages never cross
/// session boundaries.
pub fn locate_theme_passages(
    records: &[SentenceRecord],
    topic_terms: &BTreeSet<String>,
    window: usize,
    rules: &NormalizationRules,
) -> Vec<Passage> {
    let term_tokens: BTreeSet<String> = topic_terms
        .iter()
        .flat_map(|t| normalize(&tokenize(t), rules))
        .collect();
    if term_tokens.is_empty() {
        return Vec::new();
    }

    let mut passages = Vec::new();
    let mut start = 0;
    while start < records.len() {
        let session = &records[start].sref.session_id;
        let mut end = start;
        while end < records.len() && &records[end].sref.session_id == session {
            end += 1;
        }
        collect_session_passages(&records[start..end], &term_tokens, window, rules, &mut passages);
        start = end;
    }
    passages
}

fn collect_session_passages(
    records: &[SentenceRecord],
    term_tokens: &BTreeSet<String>,
    window: usize,
    rules: &NormalizationRules,
    out: &mut Vec<Passage>,
) {
    let qualifying: Vec<bool> = records
        .iter()
        .map(|r| {
            normalize(&tokenize(&r.text), rules)
                .iter()
                .any(|tok| term_tokens.contains(tok))
        })
        .collect();

    // Maximal runs of qualifying sentences, extended by the context window.
    let mut ranges: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < records.len() {
        if !qualifying[i] {
            i += 1;
            continue;
        }
        let run_start = i;
        while i < records.len() && qualifying[i] {
            i += 1;
        }
        let lo = run_start.saturating_sub(window);
        let hi = (i - 1 + window).min(records.len() - 1);
        ranges.push((lo, hi));
    }

    // Merge ranges that overlap or touch after extension.
    let mut merged: Vec<(usize, usize)> = Vec::new();
    for (lo, hi) in ranges {
        match merged.last_mut() {
            Some((_, last_hi)) if lo <= *last_hi + 1 => *last_hi = (*last_hi).max(hi),
            _ => merged.push((lo, hi)),
        }
    }

    for (lo, hi) in merged {
        out.push(Passage {
            session_id: records[lo].sref.session_id.clone(),
            sentences: records[lo..=hi].iter().map(|r| r.text.clone()).collect(),
            refs: records[lo..=hi].iter().map(|r| r.sref.clone()).collect(),
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::DiscussionTopic;

    fn records(session: &str, texts: &[&str]) -> Vec<SentenceRecord> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| SentenceRecord {
                sref: SentenceRef {
                    session_id: session.to_owned(),
                    utterance_index: i,
                    sentence_index: 0,
                },
                speaker_id: "P1".to_owned(),
                community: "HP".to_owned(),
                topic: DiscussionTopic::Untagged,
                text: (*t).to_owned(),
            })
            .collect()
    }

    fn terms(words: &[&str]) -> BTreeSet<String> {
        words.iter().map(|w| (*w).to_owned()).collect()
    }

    #[test]
    fn single_match_window_zero() {
        let rules = NormalizationRules::default();
        let recs = records("S1", &["I bike.", "It rains."]);
        let got = locate_theme_passages(&recs, &terms(&["bike"]), 0, &rules);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].sentences, vec!["I bike.".to_owned()]);
    }

    #[test]
    fn window_extends_context() {
        let rules = NormalizationRules::default();
        let recs = records("S1", &["I bike.", "It rains."]);
        let got = locate_theme_passages(&recs, &terms(&["bike"]), 1, &rules);
        assert_eq!(got.len(), 1);
        assert_eq!(
            got[0].sentences,
            vec!["I bike.".to_owned(), "It rains.".to_owned()]
        );
    }

    #[test]
    fn no_match_yields_nothing() {
        let rules = NormalizationRules::default();
        let recs = records("S1", &["It rains.", "A lot."]);
        assert!(locate_theme_passages(&recs, &terms(&["bike"]), 1, &rules).is_empty());
    }

    #[test]
    fn matching_is_normalized_on_both_sides() {
        let rules = NormalizationRules::default();
        let recs = records("S1", &["Biking is fun."]);
        // "bikes" normalizes to "bike", as does "Biking" in the sentence.
        let got = locate_theme_passages(&recs, &terms(&["bikes"]), 0, &rules);
        assert_eq!(got.len(), 1);
    }

    #[test]
    fn overlapping_extended_runs_merge() {
        let rules = NormalizationRules::default();
        let recs = records(
            "S1",
            &["I bike.", "It rains.", "Still I bike.", "The end."],
        );
        let got = locate_theme_passages(&recs, &terms(&["bike"]), 1, &rules);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].sentences.len(), 4);
    }

    #[test]
    fn separated_runs_stay_separate() {
        let rules = NormalizationRules::default();
        let recs = records(
            "S1",
            &["I bike.", "One.", "Two.", "Three.", "I bike again."],
        );
        let got = locate_theme_passages(&recs, &terms(&["bike"]), 1, &rules);
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].sentences.len(), 2);
        assert_eq!(got[1].sentences.len(), 2);
    }

    #[test]
    fn passages_do_not_cross_sessions() {
        let rules = NormalizationRules::default();
        let mut recs = records("S1", &["I bike."]);
        recs.extend(records("S2", &["I bike too."]));
        let got = locate_theme_passages(&recs, &terms(&["bike"]), 2, &rules);
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].session_id, "S1");
        assert_eq!(got[1].session_id, "S2");
    }
}
