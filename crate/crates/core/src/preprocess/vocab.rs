use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Sorted term list with reverse lookup. Term indices are stable across runs
/// because the terms are kept in lexicographic byte order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    terms: Vec<String>,
    #[serde(skip)]
    index: BTreeMap<String, usize>,
}

impl Vocabulary {
    /// Build from arbitrary terms; duplicates collapse, order is ignored.
    pub fn from_terms<I>(terms: I) -> Result<Vocabulary>
    where
        I: IntoIterator<Item = String>,
    {
        let mut sorted: Vec<String> = terms.into_iter().collect();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.is_empty() {
            return Err(Error::data("vocabulary is empty"));
        }
        let index = sorted
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(Vocabulary {
            terms: sorted,
            index,
        })
    }

    /// Rebuild the reverse index after deserialization.
    pub fn reindex(&mut self) {
        self.index = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, idx: usize) -> &str {
        &self.terms[idx]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// SHA-256 of the newline-joined term list, as lowercase hex. Used to pair
    /// persisted models with the vocabulary they were trained on.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        for (i, term) in self.terms.iter().enumerate() {
            if i > 0 {
                hasher.update(b"\n");
            }
            hasher.update(term.as_bytes());
        }
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Collect the vocabulary over token lists, keeping terms that appear in at
/// least `min_df` distinct lists. `min_df` of 0 behaves like 1.
pub fn vocabulary_from_token_lists(lists: &[Vec<String>], min_df: usize) -> Result<Vocabulary> {
    if lists.is_empty() {
        return Err(Error::data("cannot build a vocabulary from zero documents"));
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for tokens in lists {
        let mut seen: Vec<&str> = tokens.iter().map(String::as_str).collect();
        seen.sort_unstable();
        seen.dedup();
        for term in seen {
            *df.entry(term).or_insert(0) += 1;
        }
    }
    let threshold = min_df.max(1);
    let kept = df
        .into_iter()
        .filter(|&(_, count)| count >= threshold)
        .map(|(term, _)| term.to_owned());
    Vocabulary::from_terms(kept).map_err(|_| {
        Error::data(format!(
            "no term appears in at least {threshold} documents; vocabulary is empty"
        ))
    })
}

/// Vocabulary over the normalized token streams of a corpus. The corpus must
/// already be tokenized.
pub fn build_vocabulary(corpus: &Corpus, min_df: usize) -> Result<Vocabulary> {
    if corpus.documents.iter().all(|d| d.tokens.is_empty()) {
        return Err(Error::data(
            "corpus has no tokens; run normalization before building a vocabulary",
        ));
    }
    let lists: Vec<Vec<String>> = corpus.documents.iter().map(|d| d.tokens.clone()).collect();
    vocabulary_from_token_lists(&lists, min_df)
}
