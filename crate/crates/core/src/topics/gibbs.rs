use ndarray::Array2;

use super::model::TopicModel;
use super::LdaConfig;
use crate::error::{Error, Result};
use crate::preprocess::DocTermMatrix;
use crate::rng::PortableRng;

/// Collapsed Gibbs sampler state: expanded token streams, per-token topic
/// assignments, and the three count tables the conditional needs.
#[derive(Debug, Clone)]
pub struct GibbsState {
    k: usize,
    vocab_size: usize,
    alpha: f64,
    beta: f64,
    /// Token streams, one entry per token occurrence, columns ascending.
    docs: Vec<Vec<usize>>,
    /// Topic assignment per token, aligned with `docs`.
    z: Vec<Vec<usize>>,
    /// Document-topic counts, D x K.
    n_wk: Vec<Vec<u32>>,
    /// Topic-word counts, K x V.
    n_kv: Vec<Vec<u32>>,
    /// Tokens currently assigned to each topic.
    n_k: Vec<u64>,
}

impl GibbsState {
    /// Expand a count matrix into token streams with every assignment set to
    /// topic 0 and counts consistent with that.
    pub fn new(dtm: &DocTermMatrix, config: &LdaConfig) -> GibbsState {
        let docs: Vec<Vec<usize>> = dtm
            .rows
            .iter()
            .map(|row| {
                let mut stream = Vec::with_capacity(row.iter().map(|&(_, c)| c as usize).sum());
                for &(col, count) in row {
                    stream.extend(std::iter::repeat_n(col, count as usize));
                }
                stream
            })
            .collect();
        let z: Vec<Vec<usize>> = docs.iter().map(|d| vec![0; d.len()]).collect();
        let mut state = GibbsState {
            k: config.k,
            vocab_size: dtm.vocab_size,
            alpha: config.alpha,
            beta: config.beta,
            docs,
            z,
            n_wk: Vec::new(),
            n_kv: Vec::new(),
            n_k: Vec::new(),
        };
        state.rebuild_counts();
        state
    }

    /// Build a state with explicit assignments, for checking the conditional
    /// against hand-computed tables.
    pub fn from_assignments(
        dtm: &DocTermMatrix,
        assignments: &[Vec<usize>],
        config: &LdaConfig,
    ) -> Result<GibbsState> {
        let mut state = GibbsState::new(dtm, config);
        if assignments.len() != state.docs.len() {
            return Err(Error::data(format!(
                "{} assignment rows for {} documents",
                assignments.len(),
                state.docs.len()
            )));
        }
        for (doc, row) in assignments.iter().enumerate() {
            if row.len() != state.docs[doc].len() {
                return Err(Error::data(format!(
                    "document {doc} has {} tokens but {} assignments",
                    state.docs[doc].len(),
                    row.len()
                )));
            }
            if let Some(&bad) = row.iter().find(|&&t| t >= config.k) {
                return Err(Error::data(format!(
                    "assignment {bad} out of range for {} topics",
                    config.k
                )));
            }
        }
        state.z = assignments.to_vec();
        state.rebuild_counts();
        Ok(state)
    }

    fn rebuild_counts(&mut self) {
        self.n_wk = vec![vec![0; self.k]; self.docs.len()];
        self.n_kv = vec![vec![0; self.vocab_size]; self.k];
        self.n_k = vec![0; self.k];
        for (doc, stream) in self.docs.iter().enumerate() {
            for (pos, &v) in stream.iter().enumerate() {
                let t = self.z[doc][pos];
                self.n_wk[doc][t] += 1;
                self.n_kv[t][v] += 1;
                self.n_k[t] += 1;
            }
        }
    }

    /// Draw a fresh uniform topic for every token.
    pub fn init_random(&mut self, rng: &mut PortableRng) {
        for doc in 0..self.docs.len() {
            for pos in 0..self.docs[doc].len() {
                self.z[doc][pos] = rng.index(self.k);
            }
        }
        self.rebuild_counts();
    }

    /// Unnormalized conditional p(z = k | everything else) for the token at
    /// (doc, pos), with that token's current assignment excluded from the
    /// counts: (n_wk + alpha) * (n_kv + beta) / (n_k + V*beta).
    pub fn conditional_weights(&self, doc: usize, pos: usize) -> Vec<f64> {
        let v = self.docs[doc][pos];
        let current = self.z[doc][pos];
        let vb = self.vocab_size as f64 * self.beta;
        (0..self.k)
            .map(|t| {
                let held_out = if t == current { 1.0 } else { 0.0 };
                let nwk = f64::from(self.n_wk[doc][t]) - held_out;
                let nkv = f64::from(self.n_kv[t][v]) - held_out;
                let nk = self.n_k[t] as f64 - held_out;
                (nwk + self.alpha) * (nkv + self.beta) / (nk + vb)
            })
            .collect()
    }

    /// One full sweep: resample every token of every document in order.
    pub fn sweep(&mut self, rng: &mut PortableRng) {
        let vb = self.vocab_size as f64 * self.beta;
        let mut weights = vec![0.0; self.k];
        for doc in 0..self.docs.len() {
            for pos in 0..self.docs[doc].len() {
                let v = self.docs[doc][pos];
                let old = self.z[doc][pos];
                self.n_wk[doc][old] -= 1;
                self.n_kv[old][v] -= 1;
                self.n_k[old] -= 1;
                for (t, w) in weights.iter_mut().enumerate() {
                    *w = (f64::from(self.n_wk[doc][t]) + self.alpha)
                        * (f64::from(self.n_kv[t][v]) + self.beta)
                        / (self.n_k[t] as f64 + vb);
                }
                let new = rng.weighted_index(&weights);
                self.z[doc][pos] = new;
                self.n_wk[doc][new] += 1;
                self.n_kv[new][v] += 1;
                self.n_k[new] += 1;
            }
        }
    }

    pub fn num_topics(&self) -> usize {
        self.k
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn assignments(&self) -> &[Vec<usize>] {
        &self.z
    }

    pub fn doc_topic_counts(&self) -> &[Vec<u32>] {
        &self.n_wk
    }

    pub fn topic_word_counts(&self) -> &[Vec<u32>] {
        &self.n_kv
    }

    pub fn topic_totals(&self) -> &[u64] {
        &self.n_k
    }

    /// Smoothed point estimates from the current counts. Row d of theta is
    /// (n_wk + alpha) / (N_d + K*alpha); row k of phi is
    /// (n_kv + beta) / (n_k + V*beta).
    pub fn point_estimates(&self) -> (Array2<f64>, Array2<f64>) {
        let d = self.docs.len();
        let mut theta = Array2::zeros((d, self.k));
        for doc in 0..d {
            let n_d = self.docs[doc].len() as f64;
            let denom = n_d + self.k as f64 * self.alpha;
            for t in 0..self.k {
                theta[[doc, t]] = (f64::from(self.n_wk[doc][t]) + self.alpha) / denom;
            }
        }
        let mut phi = Array2::zeros((self.k, self.vocab_size));
        for t in 0..self.k {
            let denom = self.n_k[t] as f64 + self.vocab_size as f64 * self.beta;
            for v in 0..self.vocab_size {
                phi[[t, v]] = (f64::from(self.n_kv[t][v]) + self.beta) / denom;
            }
        }
        (theta, phi)
    }
}

/// Fit a topic model by collapsed Gibbs sampling, deterministically for a
/// given seed. Documents with no tokens take part with uniform smoothed
/// topic weights and are logged.
pub fn fit_lda(dtm: &DocTermMatrix, config: &LdaConfig) -> Result<TopicModel> {
    config.validate()?;
    if dtm.num_docs() == 0 {
        return Err(Error::data("cannot fit topics on zero documents"));
    }
    if dtm.vocab_size == 0 {
        return Err(Error::data("cannot fit topics on an empty vocabulary"));
    }
    let total: u64 = (0..dtm.num_docs()).map(|i| dtm.row_sum(i)).sum();
    if total == 0 {
        return Err(Error::data("cannot fit topics: no document has any tokens"));
    }
    if dtm.vocab_size < config.k {
        log::warn!(
            "vocabulary size {} is below the topic count {}",
            dtm.vocab_size,
            config.k
        );
    }
    let empty = (0..dtm.num_docs()).filter(|&i| dtm.row_sum(i) == 0).count();
    if empty > 0 {
        log::warn!("{empty} documents have no tokens and get uniform topic weights");
    }

    let mut state = GibbsState::new(dtm, config);
    let mut rng = PortableRng::new(config.seed);
    state.init_random(&mut rng);
    for _ in 0..config.iterations {
        state.sweep(&mut rng);
    }
    let (theta, phi) = state.point_estimates();
    Ok(TopicModel {
        theta,
        phi,
        z: state.z,
        n_wk: state.n_wk,
        n_kv: state.n_kv,
        doc_ids: dtm.doc_ids.clone(),
        terms: Vec::new(),
        vocab_hash: String::new(),
        config: config.clone(),
    })
}
