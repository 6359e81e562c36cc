//! Sentence sentiment: seed-word lexicon induction, weak labeling,
//! elastic-net logistic classification, and probability thresholds.

mod classifier;
mod elastic_net;
mod label;
mod lexicon;
mod modes;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use classifier::{
    cross_validate, partition_folds, score_sentence, train_classifier, CvFold, SentenceScore,
    SentimentClassifier,
};
pub use elastic_net::{
    coordinate_update, fit_logistic_elastic_net, lambda_grid, lambda_max, penalized_objective,
    smooth_gradient, smooth_objective, soft_threshold, FitResult,
};
pub use label::{
    apply_hand_labels, parse_label_file, weak_label, write_label_file, Label, LabeledItem,
    LabeledSet,
};
pub use lexicon::{build_lexicon, log_odds, LexiconEntry, SentimentLexicon};
pub use modes::{mode_phrase_scores, ModeScore, ScoredSentence};

/// Known-polarity seed words used to anchor the induced lexicon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedWordSets {
    pub positive: BTreeSet<String>,
    pub negative: BTreeSet<String>,
}

impl Default for SeedWordSets {
    fn default() -> Self {
        SeedWordSets {
            positive: ["good", "wonderful", "spectacular"]
                .into_iter()
                .map(str::to_owned)
                .collect(),
            negative: ["bad", "horrible", "awful"]
                .into_iter()
                .map(str::to_owned)
                .collect(),
        }
    }
}

impl SeedWordSets {
    pub fn validate(&self) -> Result<()> {
        if self.positive.is_empty() || self.negative.is_empty() {
            return Err(Error::config(
                "sentiment.seeds",
                "both seed sets must be non-empty",
            ));
        }
        if let Some(shared) = self.positive.intersection(&self.negative).next() {
            return Err(Error::config(
                "sentiment.seeds",
                format!("seed sets must be disjoint; {shared:?} is in both"),
            ));
        }
        Ok(())
    }
}

/// Probability cutoffs for the three-way sentiment classes. The endpoints
/// themselves classify as neutral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub negative_below: f64,
    pub positive_above: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            negative_below: 0.35,
            positive_above: 0.65,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        let ok = self.negative_below > 0.0
            && self.negative_below <= self.positive_above
            && self.positive_above < 1.0;
        if !ok {
            return Err(Error::config(
                "sentiment.thresholds",
                format!(
                    "need 0 < negative_below <= positive_above < 1, got {} and {}",
                    self.negative_below, self.positive_above
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentClass {
    Negative,
    Neutral,
    Positive,
}

impl std::fmt::Display for SentimentClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SentimentClass::Negative => "negative",
            SentimentClass::Neutral => "neutral",
            SentimentClass::Positive => "positive",
        };
        f.write_str(s)
    }
}

/// Map a probability of positiveness to a class.
pub fn classify(p: f64, thresholds: &Thresholds) -> SentimentClass {
    if p < thresholds.negative_below {
        SentimentClass::Negative
    } else if p > thresholds.positive_above {
        SentimentClass::Positive
    } else {
        SentimentClass::Neutral
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_seeds_match_expectations() {
        let seeds = SeedWordSets::default();
        assert!(seeds.positive.contains("good"));
        assert!(seeds.positive.contains("wonderful"));
        assert!(seeds.positive.contains("spectacular"));
        assert!(seeds.negative.contains("bad"));
        assert!(seeds.negative.contains("horrible"));
        assert!(seeds.negative.contains("awful"));
        assert!(seeds.validate().is_ok());
    }

    #[test]
    fn overlapping_or_empty_seeds_are_rejected() {
        let mut seeds = SeedWordSets::default();
        seeds.negative.insert("good".into());
        assert!(seeds.validate().is_err());

        let mut seeds = SeedWordSets::default();
        seeds.positive.clear();
        assert!(seeds.validate().is_err());
    }

    #[test]
    fn classification_boundaries_are_neutral() {
        let t = Thresholds::default();
        assert_eq!(classify(0.0, &t), SentimentClass::Negative);
        assert_eq!(classify(0.2, &t), SentimentClass::Negative);
        assert_eq!(classify(0.35, &t), SentimentClass::Neutral);
        assert_eq!(classify(0.5, &t), SentimentClass::Neutral);
        assert_eq!(classify(0.65, &t), SentimentClass::Neutral);
        assert_eq!(classify(0.7, &t), SentimentClass::Positive);
        assert_eq!(classify(1.0, &t), SentimentClass::Positive);
    }

    #[test]
    fn threshold_validation() {
        assert!(Thresholds::default().validate().is_ok());
        let bad = Thresholds {
            negative_below: 0.7,
            positive_above: 0.3,
        };
        assert!(bad.validate().is_err());
    }
}
