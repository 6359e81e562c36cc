use super::lexicon::SentimentLexicon;
use super::SentimentClass;
use crate::analysis::ModeCategoryDictionary;
use crate::corpus::{SentenceRecord, SentenceRef};
use crate::preprocess::{extract_phrases, normalize, tokenize, NormalizationRules};

/// A sentence with its classifier output attached.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSentence {
    pub record: SentenceRecord,
    pub probability_of_positiveness: f64,
    pub class: SentimentClass,
}

/// One sentiment contribution to a transport mode's score list.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeScore {
    pub mode: String,
    /// Lexicon phrase behind the score; absent for the probability fallback.
    pub phrase: Option<String>,
    /// In [-1, 1]: a lexicon phrase score, or 2p-1 for phrase-free sentences.
    pub score: f64,
    pub sref: SentenceRef,
}

/// Collect per-mode sentiment scores. A sentence counts toward every mode
/// whose keyword it mentions (on normalized tokens, so "buses" matches
/// "bus"); each of its lexicon phrases contributes one score, and a sentence
/// with no lexicon phrase contributes its classifier probability rescaled to
/// [-1, 1].
pub fn mode_phrase_scores(
    sentences: &[ScoredSentence],
    lexicon: &SentimentLexicon,
    mode_dict: &ModeCategoryDictionary,
    rules: &NormalizationRules,
) -> Vec<ModeScore> {
    // Normalize keywords once; multiword keywords match as contiguous runs.
    let keyword_runs: Vec<(&str, Vec<Vec<String>>)> = mode_dict
        .categories()
        .iter()
        .map(|(mode, keywords)| {
            let runs = keywords
                .iter()
                .map(|kw| normalize(&tokenize(kw), rules))
                .filter(|run| !run.is_empty())
                .collect();
            (mode.as_str(), runs)
        })
        .collect();

    let mut out = Vec::new();
    for sentence in sentences {
        let raw = tokenize(&sentence.record.text);
        let norm = normalize(&raw, rules);
        let mentioned: Vec<&str> = keyword_runs
            .iter()
            .filter(|(_, runs)| runs.iter().any(|run| contains_run(&norm, run)))
            .map(|(mode, _)| *mode)
            .collect();
        if mentioned.is_empty() {
            continue;
        }

        let mut scores: Vec<(Option<String>, f64)> = extract_phrases(&raw)
            .iter()
            .filter_map(|p| {
                let key = p.key();
                lexicon.get(&key).map(|e| (Some(key), e.score))
            })
            .collect();
        if scores.is_empty() {
            scores.push((None, 2.0 * sentence.probability_of_positiveness - 1.0));
        }

        for mode in mentioned {
            for (phrase, score) in &scores {
                out.push(ModeScore {
                    mode: mode.to_owned(),
                    phrase: phrase.clone(),
                    score: *score,
                    sref: sentence.record.sref.clone(),
                });
            }
        }
    }
    out
}

fn contains_run(haystack: &[String], needle: &[String]) -> bool {
    if needle.is_empty() || needle.len() > haystack.len() {
        return false;
    }
    haystack.windows(needle.len()).any(|w| w == needle)
}
