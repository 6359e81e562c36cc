//! Discourse mining for multi-speaker transcripts: topic extraction by
//! collapsed Gibbs sampling and lexicon-seeded sentiment scoring, with
//! deterministic, byte-reproducible outputs.

pub mod analysis;
pub mod corpus;
pub mod error;
pub mod pipeline;
pub mod preprocess;
pub mod rng;
pub mod sentiment;
pub mod serialize;
pub mod topics;

pub use error::{Error, Result};
