//! Tokenization, normalization, and vectorization.

mod matrix;
mod phrases;
mod rules;
mod tagger;
mod tokenize;
mod vocab;

pub use matrix::{
    build_dtm, dtm_from_token_lists, idf_vector, tfidf, vectorize_tokens, DocTermMatrix,
    WeightedMatrix,
};
pub use phrases::{extract_phrases, CandidatePhrase};
pub use rules::NormalizationRules;
pub use tagger::{tag_token, tag_tokens, PosTag};
pub use tokenize::{normalize, tokenize};
pub use vocab::{build_vocabulary, vocabulary_from_token_lists, Vocabulary};
