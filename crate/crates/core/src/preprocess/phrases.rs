use serde::{Deserialize, Serialize};

use super::tagger::{tag_tokens, PosTag};

/// A modifier-noun phrase candidate found in one sentence: an adjective-noun
/// bigram or an adverb-adjective-noun trigram.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidatePhrase {
    /// Lowercased source tokens, length 2 or 3.
    pub tokens: Vec<String>,
    pub head_noun: String,
    /// The tokens before the head noun, space-joined.
    pub modifier: String,
    /// Position of the first token within the sentence's token stream.
    pub start: usize,
}

impl CandidatePhrase {
    /// Dictionary key: the space-joined token sequence.
    pub fn key(&self) -> String {
        self.tokens.join(" ")
    }

    /// Index of the last token within the sentence's token stream.
    pub fn end(&self) -> usize {
        self.start + self.tokens.len() - 1
    }
}

/// Scan a tokenized sentence for candidate phrases, left to right. At each
/// position an adverb-adjective-noun trigram is emitted before the embedded
/// adjective-noun bigram, so "really great service" yields both.
pub fn extract_phrases(tokens: &[String]) -> Vec<CandidatePhrase> {
    let tags = tag_tokens(tokens);
    let lower: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();
    let mut phrases = Vec::new();
    for i in 0..tokens.len() {
        if i + 2 < tokens.len()
            && tags[i] == PosTag::Adverb
            && tags[i + 1] == PosTag::Adjective
            && tags[i + 2] == PosTag::Noun
        {
            phrases.push(CandidatePhrase {
                tokens: lower[i..=i + 2].to_vec(),
                head_noun: lower[i + 2].clone(),
                modifier: format!("{} {}", lower[i], lower[i + 1]),
                start: i,
            });
        }
        if i + 1 < tokens.len() && tags[i] == PosTag::Adjective && tags[i + 1] == PosTag::Noun {
            phrases.push(CandidatePhrase {
                tokens: lower[i..=i + 1].to_vec(),
                head_noun: lower[i + 1].clone(),
                modifier: lower[i].clone(),
                start: i,
            });
        }
    }
    phrases
}
