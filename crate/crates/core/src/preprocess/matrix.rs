use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::vocab::Vocabulary;
use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Sparse count matrix: one row per document, columns indexed by vocabulary.
/// Each row holds (column, count) pairs sorted by column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocTermMatrix {
    pub doc_ids: Vec<String>,
    pub vocab_size: usize,
    pub rows: Vec<Vec<(usize, u32)>>,
}

impl DocTermMatrix {
    pub fn num_docs(&self) -> usize {
        self.rows.len()
    }

    /// Total token count of document `i` (sum over its row).
    pub fn row_sum(&self, i: usize) -> u64 {
        self.rows[i].iter().map(|&(_, c)| u64::from(c)).sum()
    }

    /// Document frequency per column: number of rows with a nonzero entry.
    pub fn document_frequencies(&self) -> Vec<usize> {
        let mut df = vec![0usize; self.vocab_size];
        for row in &self.rows {
            for &(col, _) in row {
                df[col] += 1;
            }
        }
        df
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut dense = Array2::zeros((self.rows.len(), self.vocab_size));
        for (i, row) in self.rows.iter().enumerate() {
            for &(col, count) in row {
                dense[[i, col]] = f64::from(count);
            }
        }
        dense
    }
}

/// Count matrix over explicit token lists. Out-of-vocabulary tokens are
/// ignored; a document of only such tokens becomes a zero row.
pub fn dtm_from_token_lists(
    doc_ids: &[String],
    lists: &[Vec<String>],
    vocab: &Vocabulary,
) -> Result<DocTermMatrix> {
    if doc_ids.len() != lists.len() {
        return Err(Error::data(format!(
            "{} doc ids but {} token lists",
            doc_ids.len(),
            lists.len()
        )));
    }
    if lists.is_empty() {
        return Err(Error::data("cannot build a matrix over zero documents"));
    }
    if vocab.is_empty() {
        return Err(Error::data("cannot build a matrix over an empty vocabulary"));
    }
    let mut rows = Vec::with_capacity(lists.len());
    for tokens in lists {
        let mut cols: Vec<usize> = tokens.iter().filter_map(|t| vocab.get(t)).collect();
        cols.sort_unstable();
        let mut row: Vec<(usize, u32)> = Vec::new();
        for col in cols {
            match row.last_mut() {
                Some((c, n)) if *c == col => *n += 1,
                _ => row.push((col, 1)),
            }
        }
        rows.push(row);
    }
    Ok(DocTermMatrix {
        doc_ids: doc_ids.to_vec(),
        vocab_size: vocab.len(),
        rows,
    })
}

/// Count matrix over the normalized token streams of a corpus.
pub fn build_dtm(corpus: &Corpus, vocab: &Vocabulary) -> Result<DocTermMatrix> {
    let doc_ids: Vec<String> = corpus.documents.iter().map(|d| d.doc_id.clone()).collect();
    let lists: Vec<Vec<String>> = corpus.documents.iter().map(|d| d.tokens.clone()).collect();
    dtm_from_token_lists(&doc_ids, &lists, vocab)
}

/// TF-IDF weighted matrix. Same sparsity pattern as the source counts except
/// that terms present in every document weight to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedMatrix {
    pub doc_ids: Vec<String>,
    pub vocab_size: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
    /// Per-column inverse document frequency, ln(D/df); 0 where df is 0.
    pub idf: Vec<f64>,
}

impl WeightedMatrix {
    pub fn num_docs(&self) -> usize {
        self.rows.len()
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut dense = Array2::zeros((self.rows.len(), self.vocab_size));
        for (i, row) in self.rows.iter().enumerate() {
            for &(col, w) in row {
                dense[[i, col]] = w;
            }
        }
        dense
    }
}

/// Inverse document frequencies for a count matrix: ln(D/df_j), with unused
/// columns (df 0) pinned to 0 so they never contribute weight.
pub fn idf_vector(dtm: &DocTermMatrix) -> Vec<f64> {
    let d = dtm.num_docs() as f64;
    dtm.document_frequencies()
        .into_iter()
        .map(|df| if df == 0 { 0.0 } else { (d / df as f64).ln() })
        .collect()
}

/// TF-IDF transform: weight(i,j) = tf(i,j) * idf(j) with tf = count/row_sum.
/// All-zero rows stay all-zero.
pub fn tfidf(dtm: &DocTermMatrix) -> WeightedMatrix {
    let idf = idf_vector(dtm);
    let rows = dtm
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let total = dtm.row_sum(i);
            if total == 0 {
                return Vec::new();
            }
            let total = total as f64;
            row.iter()
                .map(|&(col, count)| (col, f64::from(count) / total * idf[col]))
                .collect()
        })
        .collect();
    WeightedMatrix {
        doc_ids: dtm.doc_ids.clone(),
        vocab_size: dtm.vocab_size,
        rows,
        idf,
    }
}

/// TF-IDF vector for a single new token list against a fixed vocabulary and
/// idf table, as a dense row. Out-of-vocabulary tokens are ignored on both
/// sides of the ratio, matching how [`tfidf`] treats matrix rows.
pub fn vectorize_tokens(tokens: &[String], vocab: &Vocabulary, idf: &[f64]) -> Vec<f64> {
    let mut counts = vec![0u32; vocab.len()];
    let mut total = 0u32;
    for t in tokens {
        if let Some(col) = vocab.get(t) {
            counts[col] += 1;
            total += 1;
        }
    }
    let mut x = vec![0.0; vocab.len()];
    if total == 0 {
        return x;
    }
    for (col, &count) in counts.iter().enumerate() {
        if count > 0 {
            x[col] = f64::from(count) / f64::from(total) * idf[col];
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    fn vocab(terms: &[&str]) -> Vocabulary {
        Vocabulary::from_terms(terms.iter().map(|t| (*t).to_owned())).unwrap()
    }

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("d{i}")).collect()
    }

    fn lists(data: &[&[&str]]) -> Vec<Vec<String>> {
        data.iter()
            .map(|doc| doc.iter().map(|w| (*w).to_owned()).collect())
            .collect()
    }

    #[test]
    fn counts_follow_vocabulary_order() {
        let v = vocab(&["bike", "walk"]);
        let dtm = dtm_from_token_lists(&ids(1), &lists(&[&["bike", "walk", "walk"]]), &v).unwrap();
        assert_eq!(dtm.rows[0], vec![(0, 1), (1, 2)]);
        assert_eq!(dtm.row_sum(0), 3);
    }

    #[test]
    fn oov_tokens_are_ignored() {
        let v = vocab(&["bike"]);
        let dtm =
            dtm_from_token_lists(&ids(2), &lists(&[&["zeppelin", "quux"], &["bike"]]), &v).unwrap();
        assert!(dtm.rows[0].is_empty());
        assert_eq!(dtm.rows[1], vec![(0, 1)]);
    }

    #[test]
    fn empty_document_list_errors() {
        let v = vocab(&["bike"]);
        assert!(dtm_from_token_lists(&[], &[], &v).is_err());
    }

    #[test]
    fn mismatched_ids_error() {
        let v = vocab(&["bike"]);
        assert!(dtm_from_token_lists(&ids(2), &lists(&[&["bike"]]), &v).is_err());
    }

    #[test]
    fn term_in_every_document_weights_zero() {
        let v = vocab(&["bike", "bus"]);
        let dtm =
            dtm_from_token_lists(&ids(2), &lists(&[&["bus", "bike"], &["bus"]]), &v).unwrap();
        let w = tfidf(&dtm);
        let dense = w.to_dense();
        assert_abs_diff_eq!(dense[[0, 1]], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dense[[1, 1]], 0.0, epsilon = 1e-15);
        assert!(dense[[0, 0]] > 0.0);
    }

    #[test]
    fn diagonal_counts_give_ln2_weights() {
        let v = vocab(&["a", "b"]);
        let dtm =
            dtm_from_token_lists(&ids(2), &lists(&[&["a", "a"], &["b", "b"]]), &v).unwrap();
        let dense = tfidf(&dtm).to_dense();
        let ln2 = std::f64::consts::LN_2;
        assert_abs_diff_eq!(dense[[0, 0]], ln2, epsilon = 1e-12);
        assert_abs_diff_eq!(dense[[0, 1]], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dense[[1, 0]], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dense[[1, 1]], ln2, epsilon = 1e-12);
    }

    #[test]
    fn single_document_corpus_weights_zero() {
        let v = vocab(&["bike", "walk"]);
        let dtm = dtm_from_token_lists(&ids(1), &lists(&[&["bike", "walk"]]), &v).unwrap();
        let dense = tfidf(&dtm).to_dense();
        assert!(dense.iter().all(|&w| w.abs() < 1e-15));
    }

    #[test]
    fn zero_rows_stay_zero_after_weighting() {
        let v = vocab(&["bike"]);
        let dtm = dtm_from_token_lists(&ids(2), &lists(&[&[], &["bike"]]), &v).unwrap();
        let w = tfidf(&dtm);
        assert!(w.rows[0].is_empty());
    }

    #[test]
    fn vectorize_matches_matrix_weighting_for_seen_documents() {
        let v = vocab(&["bike", "bus", "walk"]);
        let docs = lists(&[&["bike", "walk", "walk"], &["bus"], &["walk", "bus"]]);
        let dtm = dtm_from_token_lists(&ids(3), &docs, &v).unwrap();
        let w = tfidf(&dtm);
        let dense = w.to_dense();
        for (i, doc) in docs.iter().enumerate() {
            let x = vectorize_tokens(doc, &v, &w.idf);
            for (j, &xj) in x.iter().enumerate() {
                assert_abs_diff_eq!(xj, dense[[i, j]], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn vectorize_ignores_oov_tokens_entirely() {
        let v = vocab(&["bike"]);
        let idf = vec![1.0];
        let x = vectorize_tokens(&lists(&[&["bike", "zeppelin"]])[0], &v, &idf);
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-12);
        let none = vectorize_tokens(&lists(&[&["zeppelin"]])[0], &v, &idf);
        assert_abs_diff_eq!(none[0], 0.0, epsilon = 1e-15);
    }
}
