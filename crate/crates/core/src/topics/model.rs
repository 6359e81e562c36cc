use ndarray::Array2;
use serde::Deserialize;

use super::LdaConfig;
use crate::error::{Error, Result};
use crate::preprocess::{DocTermMatrix, Vocabulary};
use crate::rng::{derive_seed, streams, PortableRng};
use crate::serialize::{push_f64_array, push_int_array, push_json_string, push_string_array};

/// A fitted topic model: smoothed point estimates, the final assignments,
/// and the count tables they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    /// Document-topic distribution, one row per document.
    pub theta: Array2<f64>,
    /// Topic-word distribution, one row per topic.
    pub phi: Array2<f64>,
    /// Final topic assignment per token occurrence, per document.
    pub z: Vec<Vec<usize>>,
    /// Document-topic counts behind `theta`.
    pub n_wk: Vec<Vec<u32>>,
    /// Topic-word counts behind `phi`.
    pub n_kv: Vec<Vec<u32>>,
    pub doc_ids: Vec<String>,
    /// Vocabulary terms by column; empty until a vocabulary is attached.
    pub terms: Vec<String>,
    pub vocab_hash: String,
    pub config: LdaConfig,
}

/// The highest-probability terms of one topic.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicSummary {
    pub topic_id: usize,
    pub top_terms: Vec<(String, f64)>,
    pub label: Option<String>,
}

impl TopicModel {
    pub fn num_topics(&self) -> usize {
        self.phi.nrows()
    }

    pub fn vocab_size(&self) -> usize {
        self.phi.ncols()
    }

    /// Record the vocabulary the model was fitted against, enabling term
    /// lookups and pairing exported files with their vocabulary.
    pub fn attach_vocabulary(&mut self, vocab: &Vocabulary) -> Result<()> {
        if vocab.len() != self.vocab_size() {
            return Err(Error::data(format!(
                "vocabulary has {} terms but the model covers {}",
                vocab.len(),
                self.vocab_size()
            )));
        }
        self.terms = vocab.terms().to_vec();
        self.vocab_hash = vocab.hash();
        Ok(())
    }

    /// Topic weights for a known document id.
    pub fn doc_topics(&self, doc_id: &str) -> Result<Vec<f64>> {
        let idx = self
            .doc_ids
            .iter()
            .position(|d| d == doc_id)
            .ok_or_else(|| Error::data(format!("unknown document id {doc_id:?}")))?;
        Ok(self.theta.row(idx).to_vec())
    }

    /// Serialize to JSON with floats at 17 significant digits, so reloading
    /// reproduces the model bit for bit.
    pub fn to_json(&self) -> String {
        let mut buf = String::new();
        buf.push_str("{\n  \"config\": {");
        buf.push_str(&format!(
            "\"k\": {}, \"alpha\": {}, \"beta\": {}, \"iterations\": {}, \"burn_in\": {}, \"seed\": {}",
            self.config.k,
            crate::serialize::sig17(self.config.alpha),
            crate::serialize::sig17(self.config.beta),
            self.config.iterations,
            self.config.burn_in,
            self.config.seed
        ));
        buf.push_str("},\n  \"vocab_hash\": ");
        push_json_string(&mut buf, &self.vocab_hash);
        buf.push_str(",\n  \"doc_ids\": ");
        push_string_array(&mut buf, &self.doc_ids);
        buf.push_str(",\n  \"terms\": ");
        push_string_array(&mut buf, &self.terms);
        buf.push_str(",\n  \"theta\": ");
        push_f64_array(&mut buf, self.theta.iter().copied());
        buf.push_str(",\n  \"phi\": ");
        push_f64_array(&mut buf, self.phi.iter().copied());
        buf.push_str(",\n  \"z\": [");
        for (i, row) in self.z.iter().enumerate() {
            if i > 0 {
                buf.push(',');
            }
            push_int_array(&mut buf, row.iter().map(|&t| t as u64));
        }
        buf.push_str("],\n  \"doc_topic_counts\": [");
        for (i, row) in self.n_wk.iter().enumerate() {
            if i > 0 {
                buf.push(',');
            }
            push_int_array(&mut buf, row.iter().map(|&c| u64::from(c)));
        }
        buf.push_str("],\n  \"topic_word_counts\": [");
        for (i, row) in self.n_kv.iter().enumerate() {
            if i > 0 {
                buf.push(',');
            }
            push_int_array(&mut buf, row.iter().map(|&c| u64::from(c)));
        }
        buf.push_str("]\n}\n");
        buf
    }

    pub fn from_json(text: &str) -> Result<TopicModel> {
        #[derive(Deserialize)]
        struct ModelFile {
            config: LdaConfig,
            vocab_hash: String,
            doc_ids: Vec<String>,
            terms: Vec<String>,
            theta: Vec<f64>,
            phi: Vec<f64>,
            z: Vec<Vec<usize>>,
            doc_topic_counts: Vec<Vec<u32>>,
            topic_word_counts: Vec<Vec<u32>>,
        }
        let file: ModelFile = serde_json::from_str(text)
            .map_err(|e| Error::Format(format!("topic model JSON: {e}")))?;
        let d = file.doc_ids.len();
        let k = file.config.k;
        let v = file.terms.len();
        if file.theta.len() != d * k || file.phi.len() != k * v {
            return Err(Error::Format(format!(
                "topic model JSON: matrix sizes {}x{} and {}x{} do not match {} and {} entries",
                d,
                k,
                k,
                v,
                file.theta.len(),
                file.phi.len()
            )));
        }
        let theta = Array2::from_shape_vec((d, k), file.theta)
            .map_err(|e| Error::Format(format!("topic model JSON: {e}")))?;
        let phi = Array2::from_shape_vec((k, v), file.phi)
            .map_err(|e| Error::Format(format!("topic model JSON: {e}")))?;
        Ok(TopicModel {
            theta,
            phi,
            z: file.z,
            n_wk: file.doc_topic_counts,
            n_kv: file.topic_word_counts,
            doc_ids: file.doc_ids,
            terms: file.terms,
            vocab_hash: file.vocab_hash,
            config: file.config,
        })
    }
}

/// The `n` most probable terms of one topic, ties broken by term order.
pub fn top_words(model: &TopicModel, topic_id: usize, n: usize) -> Result<TopicSummary> {
    if topic_id >= model.num_topics() {
        return Err(Error::data(format!(
            "topic {topic_id} out of range for {} topics",
            model.num_topics()
        )));
    }
    if model.terms.len() != model.vocab_size() {
        return Err(Error::data(
            "model has no vocabulary attached; cannot name terms",
        ));
    }
    let row = model.phi.row(topic_id);
    let mut ranked: Vec<(usize, f64)> = row.iter().copied().enumerate().collect();
    ranked.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| model.terms[a.0].cmp(&model.terms[b.0]))
    });
    ranked.truncate(n);
    Ok(TopicSummary {
        topic_id,
        top_terms: ranked
            .into_iter()
            .map(|(v, p)| (model.terms[v].clone(), p))
            .collect(),
        label: None,
    })
}

/// Held-out perplexity: exp of the negative mean token log-likelihood, with
/// per-document topic weights re-estimated by Gibbs steps against frozen
/// topic-word probabilities.
pub fn perplexity(model: &TopicModel, held_out: &DocTermMatrix) -> Result<f64> {
    if held_out.vocab_size != model.vocab_size() {
        return Err(Error::data(format!(
            "held-out matrix has vocabulary size {} but the model covers {}",
            held_out.vocab_size,
            model.vocab_size()
        )));
    }
    let total: u64 = (0..held_out.num_docs()).map(|i| held_out.row_sum(i)).sum();
    if held_out.num_docs() == 0 || total == 0 {
        return Err(Error::data("held-out set has no tokens"));
    }
    let k = model.num_topics();
    let alpha = model.config.alpha;
    let sweeps = 50;
    let mut rng = PortableRng::new(derive_seed(model.config.seed, streams::FOLD_IN));
    let mut log_likelihood = 0.0;
    for (doc, row) in held_out.rows.iter().enumerate() {
        let n_d = held_out.row_sum(doc);
        if n_d == 0 {
            continue;
        }
        let mut stream = Vec::with_capacity(n_d as usize);
        for &(col, count) in row {
            stream.extend(std::iter::repeat_n(col, count as usize));
        }
        let mut z = vec![0usize; stream.len()];
        let mut counts = vec![0u32; k];
        for slot in z.iter_mut() {
            let t = rng.index(k);
            *slot = t;
            counts[t] += 1;
        }
        let mut weights = vec![0.0; k];
        for _ in 0..sweeps {
            for (pos, &v) in stream.iter().enumerate() {
                let old = z[pos];
                counts[old] -= 1;
                for (t, w) in weights.iter_mut().enumerate() {
                    *w = (f64::from(counts[t]) + alpha) * model.phi[[t, v]];
                }
                let new = rng.weighted_index(&weights);
                z[pos] = new;
                counts[new] += 1;
            }
        }
        let denom = n_d as f64 + k as f64 * alpha;
        let theta_hat: Vec<f64> = counts
            .iter()
            .map(|&c| (f64::from(c) + alpha) / denom)
            .collect();
        for &(col, count) in row {
            let p: f64 = (0..k).map(|t| theta_hat[t] * model.phi[[t, col]]).sum();
            log_likelihood += f64::from(count) * p.ln();
        }
    }
    Ok((-log_likelihood / total as f64).exp())
}
