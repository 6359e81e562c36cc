//! Topic extraction by latent Dirichlet allocation with collapsed Gibbs
//! sampling.

mod gibbs;
mod model;
mod passages;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use gibbs::{fit_lda, GibbsState};
pub use model::{perplexity, top_words, TopicModel, TopicSummary};
pub use passages::{locate_theme_passages, Passage};

/// Sampler settings. `alpha` and `beta` are the symmetric Dirichlet
/// parameters for the document-topic and topic-word distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            k: 5,
            alpha: 0.1,
            beta: 0.01,
            iterations: 2000,
            burn_in: 500,
            seed: 42,
        }
    }
}

impl LdaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::config("topics.k", "must be at least 1"));
        }
        if self.alpha.is_nan() || self.alpha <= 0.0 {
            return Err(Error::config("topics.alpha", "must be positive"));
        }
        if self.beta.is_nan() || self.beta <= 0.0 {
            return Err(Error::config("topics.beta", "must be positive"));
        }
        if self.iterations <= self.burn_in {
            return Err(Error::config(
                "topics.iterations",
                format!(
                    "must exceed burn_in ({} <= {})",
                    self.iterations, self.burn_in
                ),
            ));
        }
        Ok(())
    }
}
