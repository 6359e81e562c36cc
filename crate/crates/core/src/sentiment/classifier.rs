use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::elastic_net::{fit_logistic_elastic_net, lambda_grid, lambda_max, sigmoid};
use super::label::{Label, LabeledSet};
use super::{classify, SentimentClass, Thresholds};
use crate::corpus::SentenceRef;
use crate::error::{Error, Result};
use crate::preprocess::Vocabulary;
use crate::rng::PortableRng;
use crate::serialize::{push_f64_array, push_json_string, push_string_array, sig17};

/// Held-out metrics for one cross-validation fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvFold {
    pub fold: usize,
    pub size: usize,
    /// Twice the mean held-out negative log-likelihood.
    pub deviance: f64,
    pub accuracy: f64,
}

/// Elastic-net logistic sentiment model over TF-IDF features.
#[derive(Debug, Clone, PartialEq)]
pub struct SentimentClassifier {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
    pub mix: f64,
    /// Per-fold metrics at the chosen penalty.
    pub cv_report: Vec<CvFold>,
    /// Vocabulary terms by feature column; empty until attached.
    pub terms: Vec<String>,
    pub idf: Vec<f64>,
    pub vocab_hash: String,
    pub thresholds: Thresholds,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentenceScore {
    pub sref: SentenceRef,
    pub probability_of_positiveness: f64,
    pub class: SentimentClass,
}

/// Split `0..n` into `folds` disjoint, seed-deterministic parts whose sizes
/// differ by at most one; the first `n % folds` folds take the extra item.
pub fn partition_folds(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::data(format!(
            "cross-validation needs at least 2 folds, got {folds}"
        )));
    }
    if n < folds {
        return Err(Error::data(format!(
            "cannot split {n} items into {folds} folds"
        )));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = PortableRng::new(seed);
    rng.shuffle(&mut indices);
    let base = n / folds;
    let extra = n % folds;
    let mut out = Vec::with_capacity(folds);
    let mut at = 0;
    for f in 0..folds {
        let size = base + usize::from(f < extra);
        out.push(indices[at..at + size].to_vec());
        at += size;
    }
    Ok(out)
}

struct TrainingData {
    y: Vec<f64>,
    sample_weights: Vec<f64>,
}

fn prepare(labeled: &LabeledSet, features: &Array2<f64>, folds: usize) -> Result<TrainingData> {
    let n = labeled.items.len();
    if features.nrows() != n {
        return Err(Error::data(format!(
            "{} labeled items but {} feature rows",
            n,
            features.nrows()
        )));
    }
    if n < folds {
        return Err(Error::data(format!(
            "need at least {folds} labeled items for {folds}-fold cross-validation, got {n}"
        )));
    }
    let y: Vec<f64> = labeled
        .items
        .iter()
        .map(|i| match i.label {
            Label::Positive => 1.0,
            Label::Negative => 0.0,
        })
        .collect();
    if y.iter().all(|&v| v == 1.0) || y.iter().all(|&v| v == 0.0) {
        return Err(Error::data(
            "training labels contain a single class; need both positive and negative",
        ));
    }
    let sample_weights: Vec<f64> = labeled.items.iter().map(|i| i.weight).collect();
    Ok(TrainingData { y, sample_weights })
}

fn weighted_mean(values: &[f64], weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    values
        .iter()
        .zip(weights)
        .map(|(v, w)| v * w)
        .sum::<f64>()
        / total
}

fn logit(p: f64) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    (p / (1.0 - p)).ln()
}

fn take_rows(features: &Array2<f64>, rows: &[usize]) -> Array2<f64> {
    let p = features.ncols();
    let mut out = Array2::zeros((rows.len(), p));
    for (r, &i) in rows.iter().enumerate() {
        out.row_mut(r).assign(&features.row(i));
    }
    out
}

fn nll(eta: f64, y: f64) -> f64 {
    let softplus = if eta > 0.0 {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    };
    softplus - y * eta
}

const MAX_SWEEPS: usize = 100_000;
const TOL: f64 = 1e-7;

/// Fold metrics for a model trained at a fixed penalty: each fold is held
/// out once while the rest trains.
pub fn cross_validate(
    labeled: &LabeledSet,
    features: &Array2<f64>,
    folds: usize,
    seed: u64,
    lambda: f64,
    mix: f64,
) -> Result<Vec<CvFold>> {
    let data = prepare(labeled, features, folds)?;
    let partition = partition_folds(labeled.items.len(), folds, seed)?;
    let p = features.ncols();
    let mut report = Vec::with_capacity(folds);
    for (f, held_out) in partition.iter().enumerate() {
        let train: Vec<usize> = (0..labeled.items.len())
            .filter(|i| !held_out.contains(i))
            .collect();
        let x_train = take_rows(features, &train);
        let y_train: Vec<f64> = train.iter().map(|&i| data.y[i]).collect();
        let w_train: Vec<f64> = train.iter().map(|&i| data.sample_weights[i]).collect();
        let b0 = logit(weighted_mean(&y_train, &w_train));
        let fit = fit_logistic_elastic_net(
            &x_train,
            &y_train,
            &w_train,
            lambda,
            mix,
            &vec![0.0; p],
            b0,
            MAX_SWEEPS,
            TOL,
        )?;
        let (deviance, accuracy) = held_out_metrics(
            features,
            &data,
            held_out,
            &fit.weights,
            fit.intercept,
        );
        report.push(CvFold {
            fold: f,
            size: held_out.len(),
            deviance,
            accuracy,
        });
    }
    Ok(report)
}

fn held_out_metrics(
    features: &Array2<f64>,
    data: &TrainingData,
    held_out: &[usize],
    weights: &[f64],
    intercept: f64,
) -> (f64, f64) {
    let mut dev = 0.0;
    let mut correct = 0.0;
    let mut total = 0.0;
    for &i in held_out {
        let eta: f64 = intercept
            + features
                .row(i)
                .iter()
                .zip(weights)
                .map(|(x, w)| x * w)
                .sum::<f64>();
        let w = data.sample_weights[i];
        dev += w * 2.0 * nll(eta, data.y[i]);
        let predicted_positive = sigmoid(eta) >= 0.5;
        if predicted_positive == (data.y[i] == 1.0) {
            correct += w;
        }
        total += w;
    }
    (dev / total, correct / total)
}

/// Train the sentiment classifier: pick the penalty by `folds`-fold
/// cross-validated deviance over a descending lambda grid (built from the
/// null-gradient bound when not supplied), then refit on all items at the
/// winning penalty with warm starts along the grid.
pub fn train_classifier(
    labeled: &LabeledSet,
    features: &Array2<f64>,
    grid: &[f64],
    mix: f64,
    folds: usize,
    seed: u64,
) -> Result<SentimentClassifier> {
    if !(0.0..=1.0).contains(&mix) {
        return Err(Error::config("sentiment.mix", "must lie in [0, 1]"));
    }
    let data = prepare(labeled, features, folds)?;
    let n = labeled.items.len();
    let p = features.ncols();

    let grid: Vec<f64> = if grid.is_empty() {
        let top = lambda_max(features, &data.y, &data.sample_weights)? / mix.max(1e-3);
        lambda_grid(top, 50, 1e-4)
    } else {
        if grid.iter().any(|&l| l.is_nan() || l < 0.0) {
            return Err(Error::config(
                "sentiment.lambda_grid",
                "penalties must be nonnegative",
            ));
        }
        let mut g = grid.to_vec();
        g.sort_by(|a, b| b.total_cmp(a));
        g
    };

    let partition = partition_folds(n, folds, seed)?;
    // metrics[fold][grid index] = (deviance, accuracy, held-out weight).
    let mut fold_metrics: Vec<Vec<(f64, f64, f64)>> = Vec::with_capacity(folds);
    for held_out in &partition {
        let train: Vec<usize> = (0..n).filter(|i| !held_out.contains(i)).collect();
        let x_train = take_rows(features, &train);
        let y_train: Vec<f64> = train.iter().map(|&i| data.y[i]).collect();
        let w_train: Vec<f64> = train.iter().map(|&i| data.sample_weights[i]).collect();
        let mut warm_w = vec![0.0; p];
        let mut warm_b = logit(weighted_mean(&y_train, &w_train));
        let mut per_lambda = Vec::with_capacity(grid.len());
        for &lambda in &grid {
            let fit = fit_logistic_elastic_net(
                &x_train,
                &y_train,
                &w_train,
                lambda,
                mix,
                &warm_w,
                warm_b,
                MAX_SWEEPS,
                TOL,
            )?;
            warm_w = fit.weights;
            warm_b = fit.intercept;
            let (dev, acc) = held_out_metrics(features, &data, held_out, &warm_w, warm_b);
            let held_weight: f64 = held_out.iter().map(|&i| data.sample_weights[i]).sum();
            per_lambda.push((dev, acc, held_weight));
        }
        fold_metrics.push(per_lambda);
    }

    // Mean deviance per penalty, weighting folds by held-out weight.
    let mut best = 0;
    let mut best_dev = f64::INFINITY;
    for g in 0..grid.len() {
        let total_w: f64 = fold_metrics.iter().map(|f| f[g].2).sum();
        let dev: f64 = fold_metrics.iter().map(|f| f[g].0 * f[g].2).sum::<f64>() / total_w;
        if dev < best_dev {
            best_dev = dev;
            best = g;
        }
    }

    // Refit on everything, warm-started down the grid to the winner.
    let mut warm_w = vec![0.0; p];
    let mut warm_b = logit(weighted_mean(&data.y, &data.sample_weights));
    let mut final_fit = None;
    for &lambda in &grid[..=best] {
        let fit = fit_logistic_elastic_net(
            features,
            &data.y,
            &data.sample_weights,
            lambda,
            mix,
            &warm_w,
            warm_b,
            MAX_SWEEPS,
            TOL,
        )?;
        warm_w = fit.weights.clone();
        warm_b = fit.intercept;
        final_fit = Some(fit);
    }
    let fit = final_fit.expect("grid is never empty");

    let cv_report = fold_metrics
        .iter()
        .enumerate()
        .map(|(f, per_lambda)| CvFold {
            fold: f,
            size: partition[f].len(),
            deviance: per_lambda[best].0,
            accuracy: per_lambda[best].1,
        })
        .collect();

    Ok(SentimentClassifier {
        weights: fit.weights,
        intercept: fit.intercept,
        lambda: grid[best],
        mix,
        cv_report,
        terms: Vec::new(),
        idf: Vec::new(),
        vocab_hash: String::new(),
        thresholds: Thresholds::default(),
    })
}

impl SentimentClassifier {
    /// Record the vocabulary and idf table the feature rows were built with.
    pub fn attach_vocabulary(&mut self, vocab: &Vocabulary, idf: Vec<f64>) -> Result<()> {
        if vocab.len() != self.weights.len() || idf.len() != self.weights.len() {
            return Err(Error::data(format!(
                "vocabulary of {} terms and idf of {} entries for {} weights",
                vocab.len(),
                idf.len(),
                self.weights.len()
            )));
        }
        self.terms = vocab.terms().to_vec();
        self.idf = idf;
        self.vocab_hash = vocab.hash();
        Ok(())
    }

    /// Probability of positiveness for one feature vector.
    pub fn probability(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::data(format!(
                "feature vector has {} entries but the classifier covers {}",
                x.len(),
                self.weights.len()
            )));
        }
        let eta: f64 = self.intercept
            + x.iter()
                .zip(&self.weights)
                .map(|(xi, wi)| xi * wi)
                .sum::<f64>();
        Ok(sigmoid(eta))
    }

    /// Serialize to JSON with floats at 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut buf = String::new();
        buf.push_str("{\n  \"vocab_hash\": ");
        push_json_string(&mut buf, &self.vocab_hash);
        buf.push_str(",\n  \"terms\": ");
        push_string_array(&mut buf, &self.terms);
        buf.push_str(",\n  \"idf\": ");
        push_f64_array(&mut buf, self.idf.iter().copied());
        buf.push_str(",\n  \"weights\": ");
        push_f64_array(&mut buf, self.weights.iter().copied());
        buf.push_str(&format!(
            ",\n  \"intercept\": {},\n  \"lambda\": {},\n  \"mix\": {}",
            sig17(self.intercept),
            sig17(self.lambda),
            sig17(self.mix)
        ));
        buf.push_str(&format!(
            ",\n  \"thresholds\": {{\"negative_below\": {}, \"positive_above\": {}}}",
            sig17(self.thresholds.negative_below),
            sig17(self.thresholds.positive_above)
        ));
        buf.push_str(",\n  \"cv_report\": [");
        for (i, f) in self.cv_report.iter().enumerate() {
            if i > 0 {
                buf.push(',');
            }
            buf.push_str(&format!(
                "{{\"fold\": {}, \"size\": {}, \"deviance\": {}, \"accuracy\": {}}}",
                f.fold,
                f.size,
                sig17(f.deviance),
                sig17(f.accuracy)
            ));
        }
        buf.push_str("]\n}\n");
        buf
    }

    pub fn from_json(text: &str) -> Result<SentimentClassifier> {
        #[derive(Deserialize)]
        struct ClassifierFile {
            vocab_hash: String,
            terms: Vec<String>,
            idf: Vec<f64>,
            weights: Vec<f64>,
            intercept: f64,
            lambda: f64,
            mix: f64,
            thresholds: Thresholds,
            cv_report: Vec<CvFold>,
        }
        let file: ClassifierFile = serde_json::from_str(text)
            .map_err(|e| Error::Format(format!("classifier JSON: {e}")))?;
        if !file.terms.is_empty() && file.terms.len() != file.weights.len() {
            return Err(Error::Format(format!(
                "classifier JSON: {} terms for {} weights",
                file.terms.len(),
                file.weights.len()
            )));
        }
        Ok(SentimentClassifier {
            weights: file.weights,
            intercept: file.intercept,
            lambda: file.lambda,
            mix: file.mix,
            cv_report: file.cv_report,
            terms: file.terms,
            idf: file.idf,
            vocab_hash: file.vocab_hash,
            thresholds: file.thresholds,
        })
    }
}

/// Score one sentence's feature vector and classify it by the thresholds.
pub fn score_sentence(
    classifier: &SentimentClassifier,
    sref: SentenceRef,
    x: &[f64],
) -> Result<SentenceScore> {
    let p = classifier.probability(x)?;
    Ok(SentenceScore {
        sref,
        probability_of_positiveness: p,
        class: classify(p, &classifier.thresholds),
    })
}
