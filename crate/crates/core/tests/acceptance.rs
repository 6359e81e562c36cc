//! Acceptance suite: one verdict line per criterion, covering sampler
//! correctness, matrix weighting, lexicon scoring, classifier training,
//! report aggregation, and whole-pipeline determinism. Run with
//! `cargo test --test acceptance -- --nocapture` to see every line.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::Array2;

use colloquy::analysis::{
    mode_sentiment_table, mode_table_csv, speaker_positiveness, topic_mean_positiveness,
    ModeCategoryDictionary,
};
use colloquy::corpus::{DiscussionTopic, SentenceRecord, SentenceRef};
use colloquy::pipeline::{
    bundle_json, run_pipeline, stage_ingest, stage_report, stage_sentiment, stage_topics,
    OutputFormat, PipelineConfig,
};
use colloquy::preprocess::{
    dtm_from_token_lists, normalize, tfidf, tokenize, vectorize_tokens, NormalizationRules,
    Vocabulary,
};
use colloquy::rng::PortableRng;
use colloquy::sentiment::{
    classify, coordinate_update, fit_logistic_elastic_net, lambda_max, log_odds, partition_folds,
    smooth_gradient, smooth_objective, ModeScore, ScoredSentence, SentimentClass,
    SentimentClassifier, Thresholds,
};
use colloquy::topics::{fit_lda, GibbsState, LdaConfig};

/// Print the verdict line for one criterion, then enforce it.
fn report(num: u32, name: &str, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    if detail.is_empty() {
        println!("criterion {num:02} {name}: {verdict}");
    } else {
        println!("criterion {num:02} {name}: {verdict} ({detail})");
    }
    assert!(ok, "criterion {num:02} {name}: {verdict} ({detail})");
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

// ---------------------------------------------------------------------------
// 1. Topic recovery on a corpus with planted, disjoint topic supports.

#[test]
fn criterion_01_topic_recovery() {
    let started = Instant::now();
    let k = 5usize;
    let block = 40usize; // words owned by each planted topic
    let vocab_terms: Vec<String> = (0..k * block).map(|w| format!("w{w:03}")).collect();
    let vocab = Vocabulary::from_terms(vocab_terms.clone()).unwrap();

    let mut rng = PortableRng::new(20260823);
    let mut ids = Vec::new();
    let mut lists = Vec::new();
    for d in 0..500 {
        let primary = d % k;
        let secondary = (d + 1) % k;
        let mut tokens = Vec::with_capacity(60);
        for _ in 0..60 {
            let topic = if rng.next_f64() < 0.8 { primary } else { secondary };
            tokens.push(vocab_terms[topic * block + rng.index(block)].clone());
        }
        ids.push(format!("d{d:03}"));
        lists.push(tokens);
    }
    let dtm = dtm_from_token_lists(&ids, &lists, &vocab).unwrap();

    let config = LdaConfig::default(); // k=5, alpha 0.1, beta 0.01, 2000 sweeps
    assert_eq!(
        (config.k, config.alpha, config.beta, config.iterations),
        (5, 0.1, 0.01, 2000)
    );
    let model = fit_lda(&dtm, &config).unwrap();

    // Planted truth: each topic uniform over its own 40-word block.
    let mut truth = vec![vec![0.0; k * block]; k];
    for (t, row) in truth.iter_mut().enumerate() {
        for w in 0..block {
            row[t * block + w] = 1.0 / block as f64;
        }
    }
    // Total variation between every estimated and planted topic.
    let mut tv = vec![vec![0.0; k]; k];
    for (e, row) in tv.iter_mut().enumerate() {
        for (t, cell) in row.iter_mut().enumerate() {
            *cell = 0.5
                * (0..k * block)
                    .map(|v| (model.phi[[e, v]] - truth[t][v]).abs())
                    .sum::<f64>();
        }
    }
    // Greedy one-to-one alignment on smallest distance first.
    let mut used_e = vec![false; k];
    let mut used_t = vec![false; k];
    let mut aligned = Vec::new();
    for _ in 0..k {
        let mut best = (0, 0, f64::INFINITY);
        for e in 0..k {
            for t in 0..k {
                if !used_e[e] && !used_t[t] && tv[e][t] < best.2 {
                    best = (e, t, tv[e][t]);
                }
            }
        }
        used_e[best.0] = true;
        used_t[best.1] = true;
        aligned.push(best.2);
    }
    let mean_tv = aligned.iter().sum::<f64>() / k as f64;
    let secs = started.elapsed().as_secs_f64();
    report(
        1,
        "topic recovery on planted supports",
        mean_tv <= 0.15 && secs <= 60.0,
        &format!("mean aligned total variation {mean_tv:.4}, {secs:.1}s"),
    );
}

// ---------------------------------------------------------------------------
// 2. A single-topic model must collapse exactly: theta all ones, phi the
//    smoothed corpus frequencies.

#[test]
fn criterion_02_single_topic_collapse() {
    let ids: Vec<String> = ["a", "b", "c", "d"].map(String::from).to_vec();
    let lists: Vec<Vec<String>> = [
        vec!["apple", "apple", "banana"],
        vec!["banana", "cherry"],
        vec!["apple", "cherry", "cherry", "cherry"],
        vec!["date"],
    ]
    .map(|l| l.into_iter().map(String::from).collect())
    .to_vec();
    let vocab = Vocabulary::from_terms(
        ["apple", "banana", "cherry", "date"].map(String::from),
    )
    .unwrap();
    let dtm = dtm_from_token_lists(&ids, &lists, &vocab).unwrap();

    let config = LdaConfig {
        k: 1,
        iterations: 60,
        burn_in: 10,
        ..LdaConfig::default()
    };
    let model = fit_lda(&dtm, &config).unwrap();

    let theta_exact = (0..4).all(|d| model.theta[[d, 0]] == 1.0);

    // Corpus counts by hand: apple 3, banana 2, cherry 4, date 1; total 10.
    let counts = [3.0, 2.0, 4.0, 1.0];
    let total = 10.0;
    let beta = config.beta;
    let mut worst = 0.0f64;
    for (v, c) in counts.iter().enumerate() {
        let expected = (c + beta) / (total + 4.0 * beta);
        worst = worst.max((model.phi[[0, v]] - expected).abs());
    }
    report(
        2,
        "single-topic collapse",
        theta_exact && worst <= 1e-12,
        &format!("theta exact: {theta_exact}, max phi error {worst:.2e}"),
    );
}

// ---------------------------------------------------------------------------
// 3. Count invariants hold exactly after every sweep; point estimates are
//    proper distributions; a fixed seed reproduces bit-identical fits.

fn check_counts(state: &GibbsState, dtm: &colloquy::preprocess::DocTermMatrix) {
    let k = state.num_topics();
    let v = state.vocab_size();
    let n_wk = state.doc_topic_counts();
    let n_kv = state.topic_word_counts();
    let n_k = state.topic_totals();
    let mut grand = 0u64;
    for (d, row) in n_wk.iter().enumerate() {
        let row_total: u64 = row.iter().map(|&c| u64::from(c)).sum();
        assert_eq!(row_total, dtm.row_sum(d), "doc {d} count drift");
        grand += row_total;
    }
    for t in 0..k {
        let by_doc: u64 = (0..dtm.num_docs()).map(|d| u64::from(n_wk[d][t])).sum();
        let by_word: u64 = (0..v).map(|w| u64::from(n_kv[t][w])).sum();
        assert_eq!(by_doc, n_k[t], "topic {t} doc-side drift");
        assert_eq!(by_word, n_k[t], "topic {t} word-side drift");
    }
    assert_eq!(grand, n_k.iter().sum::<u64>(), "grand total drift");
    for (d, row) in state.assignments().iter().enumerate() {
        assert!(row.iter().all(|&z| z < k), "doc {d} has an out-of-range topic");
    }
}

#[test]
fn criterion_03_sampler_invariants_and_determinism() {
    let mut gen = PortableRng::new(99);
    let mut corpora = 0;
    let mut sweeps = 0;
    for case in 0..8u64 {
        let num_docs = 1 + gen.index(50);
        let vocab_size = 2 + gen.index(25);
        let terms: Vec<String> = (0..vocab_size).map(|w| format!("t{w:02}")).collect();
        let vocab = Vocabulary::from_terms(terms.clone()).unwrap();
        let mut ids = Vec::new();
        let mut lists = Vec::new();
        for d in 0..num_docs {
            let len = gen.index(30); // empty documents included on purpose
            let tokens = (0..len).map(|_| terms[gen.index(vocab_size)].clone()).collect();
            ids.push(format!("d{d}"));
            lists.push(tokens);
        }
        if lists.iter().all(Vec::is_empty) {
            lists[0].push(terms[0].clone());
        }
        let dtm = dtm_from_token_lists(&ids, &lists, &vocab).unwrap();
        let config = LdaConfig {
            k: 2 + gen.index(4),
            iterations: 20,
            burn_in: 5,
            seed: case,
            ..LdaConfig::default()
        };
        let mut state = GibbsState::new(&dtm, &config);
        let mut rng = PortableRng::new(1000 + case);
        state.init_random(&mut rng);
        check_counts(&state, &dtm);
        for _ in 0..12 {
            state.sweep(&mut rng);
            check_counts(&state, &dtm);
            sweeps += 1;
        }
        corpora += 1;

        // Point estimates are proper distributions.
        let (theta, phi) = state.point_estimates();
        for d in 0..theta.nrows() {
            let s: f64 = (0..theta.ncols()).map(|t| theta[[d, t]]).sum();
            assert!(close(s, 1.0, 1e-9), "theta row {d} sums to {s}");
        }
        for t in 0..phi.nrows() {
            let s: f64 = (0..phi.ncols()).map(|w| phi[[t, w]]).sum();
            assert!(close(s, 1.0, 1e-9), "phi row {t} sums to {s}");
        }

        // Same seed, same corpus: bit-identical fits.
        let a = fit_lda(&dtm, &config).unwrap();
        let b = fit_lda(&dtm, &config).unwrap();
        let bits = |m: &Array2<f64>| m.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.theta), bits(&b.theta), "theta differs across reruns");
        assert_eq!(bits(&a.phi), bits(&b.phi), "phi differs across reruns");
        assert_eq!(a.z, b.z, "assignments differ across reruns");
        assert_eq!(a.n_wk, b.n_wk);
        assert_eq!(a.n_kv, b.n_kv);
    }
    report(
        3,
        "sampler invariants and determinism",
        true,
        &format!("{corpora} corpora, {sweeps} checked sweeps"),
    );
}

// ---------------------------------------------------------------------------
// 4. Conditional weights against a hand-derived table for a two-document,
//    three-word corpus with a fixed assignment.

#[test]
fn criterion_04_conditional_oracle() {
    let ids: Vec<String> = ["d0", "d1"].map(String::from).to_vec();
    let lists: Vec<Vec<String>> = [vec!["a", "b"], vec!["b", "c"]]
        .map(|l| l.into_iter().map(String::from).collect())
        .to_vec();
    let vocab = Vocabulary::from_terms(["a", "b", "c"].map(String::from)).unwrap();
    let dtm = dtm_from_token_lists(&ids, &lists, &vocab).unwrap();
    let config = LdaConfig {
        k: 2,
        alpha: 0.1,
        beta: 0.01,
        iterations: 2,
        burn_in: 1,
        ..LdaConfig::default()
    };
    // d0 = [a->topic0, b->topic1], d1 = [b->topic1, c->topic0].
    let state =
        GibbsState::from_assignments(&dtm, &[vec![0, 1], vec![1, 0]], &config).unwrap();

    // Bookkeeping sanity for the fixed assignment.
    assert_eq!(state.doc_topic_counts(), &[vec![1, 1], vec![1, 1]]);
    assert_eq!(state.topic_word_counts(), &[vec![1, 0, 1], vec![0, 2, 0]]);
    assert_eq!(state.topic_totals(), &[2, 2]);

    // Hand table: w = (held-out doc count + 0.1)(held-out word count + 0.01)
    //                 / (held-out topic total + 3 * 0.01).
    let w = |nwk: f64, nkv: f64, nk: f64| (nwk + 0.1) * (nkv + 0.01) / (nk + 3.0 * 0.01);
    let table: [((usize, usize), [f64; 2]); 4] = [
        ((0, 0), [w(0.0, 0.0, 1.0), w(1.0, 0.0, 2.0)]), // token a, currently topic 0
        ((0, 1), [w(1.0, 0.0, 2.0), w(0.0, 1.0, 1.0)]), // token b, currently topic 1
        ((1, 0), [w(1.0, 0.0, 2.0), w(0.0, 1.0, 1.0)]), // token b, currently topic 1
        ((1, 1), [w(0.0, 0.0, 1.0), w(1.0, 0.0, 2.0)]), // token c, currently topic 0
    ];
    let mut worst = 0.0f64;
    for ((doc, pos), expected) in table {
        let got = state.conditional_weights(doc, pos);
        assert_eq!(got.len(), 2);
        for t in 0..2 {
            worst = worst.max((got[t] - expected[t]).abs());
        }
    }
    report(
        4,
        "collapsed conditional oracle",
        worst <= 1e-12,
        &format!("max weight error {worst:.2e}"),
    );
}

// ---------------------------------------------------------------------------
// 5. TF-IDF against brute force on random count matrices; terms present in
//    every document weigh exactly zero.

#[test]
fn criterion_05_tfidf_brute_force() {
    let mut gen = PortableRng::new(5);
    let mut worst = 0.0f64;
    let mut all_doc_terms = 0;
    for case in 0..10 {
        let n = 2 + gen.index(19); // documents
        let v = 1 + gen.index(20); // vocabulary
        let mut counts = vec![vec![0u32; v]; n];
        for row in counts.iter_mut() {
            for cell in row.iter_mut() {
                *cell = gen.index(4) as u32;
            }
        }
        for (i, row) in counts.iter_mut().enumerate() {
            if row.iter().all(|&c| c == 0) {
                row[i % v] = 1; // keep every document non-empty
            }
        }
        if case % 2 == 0 {
            for row in counts.iter_mut() {
                row[0] = row[0].max(1); // plant a term that appears everywhere
            }
        }

        let terms: Vec<String> = (0..v).map(|w| format!("t{w:02}")).collect();
        let vocab = Vocabulary::from_terms(terms.clone()).unwrap();
        let ids: Vec<String> = (0..n).map(|d| format!("d{d}")).collect();
        let lists: Vec<Vec<String>> = counts
            .iter()
            .map(|row| {
                let mut tokens = Vec::new();
                for (j, &c) in row.iter().enumerate() {
                    for _ in 0..c {
                        tokens.push(terms[j].clone());
                    }
                }
                tokens
            })
            .collect();
        let dtm = dtm_from_token_lists(&ids, &lists, &vocab).unwrap();
        let dense = tfidf(&dtm).to_dense();

        // Brute force straight from the raw counts.
        for i in 0..n {
            let total: u32 = counts[i].iter().sum();
            for j in 0..v {
                let df = counts.iter().filter(|row| row[j] > 0).count();
                let idf = if df == 0 { 0.0 } else { (n as f64 / df as f64).ln() };
                let expected = f64::from(counts[i][j]) / f64::from(total) * idf;
                worst = worst.max((dense[[i, j]] - expected).abs());
                if df == n {
                    assert!(
                        dense[[i, j]] == 0.0,
                        "term in every document must weigh exactly zero, got {}",
                        dense[[i, j]]
                    );
                    all_doc_terms += 1;
                }
            }
        }
    }
    report(
        5,
        "tf-idf brute force",
        worst <= 1e-12 && all_doc_terms > 0,
        &format!("max error {worst:.2e}, {all_doc_terms} everywhere-terms pinned to zero"),
    );
}

// ---------------------------------------------------------------------------
// 6. Smoothed log-odds ratio: branch table, clamps, exact antisymmetry.

#[test]
fn criterion_06_log_odds() {
    let cases: &[(u64, u64, f64)] = &[
        (0, 0, 0.0),
        (1, 1, 0.0),
        (3, 0, 4.0),   // (3+1)/(0+1)
        (0, 3, -4.0),
        (2, 1, 1.5),   // 3/2
        (1, 2, -1.5),
        (9, 0, 10.0),  // exactly at the clamp
        (99, 0, 10.0), // 100, clamped
        (0, 99, -10.0),
        (19, 1, 10.0), // 20/2
    ];
    for &(p, n, expected) in cases {
        let got = log_odds(p, n);
        assert!(
            got == expected,
            "log_odds({p}, {n}) = {got}, expected {expected}"
        );
    }
    let mut rng = PortableRng::new(6);
    for _ in 0..1000 {
        let a = rng.index(1000) as u64;
        let b = rng.index(1000) as u64;
        let fwd = log_odds(a, b);
        let rev = log_odds(b, a);
        assert!(fwd == -rev, "antisymmetry broke at ({a}, {b}): {fwd} vs {rev}");
        assert!(fwd.abs() <= 10.0, "ratio out of clamp at ({a}, {b}): {fwd}");
    }
    report(
        6,
        "lexicon log-odds scoring",
        true,
        &format!("{} branch cases, 1000 antisymmetry draws", cases.len()),
    );
}

// ---------------------------------------------------------------------------
// 7. Elastic net: the null penalty zeroes every weight, the single-coordinate
//    update satisfies its optimality condition, the analytic gradient matches
//    central differences, and the descent trace never increases.

fn random_problem(rng: &mut PortableRng, n: usize, p: usize) -> (Array2<f64>, Vec<f64>, Vec<f64>) {
    let mut x = Array2::zeros((n, p));
    for i in 0..n {
        for j in 0..p {
            x[[i, j]] = rng.next_f64() * 2.0 - 1.0;
        }
    }
    let mut y: Vec<f64> = (0..n).map(|_| f64::from(rng.index(2) as u32)).collect();
    y[0] = 1.0;
    y[1] = 0.0; // guarantee both classes
    let sw: Vec<f64> = (0..n).map(|_| 0.5 + 1.5 * rng.next_f64()).collect();
    (x, y, sw)
}

#[test]
fn criterion_07_elastic_net() {
    let mut rng = PortableRng::new(7);
    let (x, y, sw) = random_problem(&mut rng, 40, 6);

    // (a) Any penalty at or above lambda_max keeps every weight at zero.
    // Penalties strictly above the threshold on the general weighted problem;
    // the equality case on a balanced unit-weight problem, where the null
    // intercept coincides with the initial one and the gradient comparison
    // against the threshold is exact.
    let lmax = lambda_max(&x, &y, &sw).unwrap();
    let mut zeroed = true;
    for (lambda, mix) in [(lmax * 1.5, 1.0), (lmax * 10.0, 1.0), (lmax * 4.0, 0.5)] {
        let fit = fit_logistic_elastic_net(
            &x, &y, &sw, lambda, mix, &[0.0; 6], 0.0, 100_000, 1e-7,
        )
        .unwrap();
        zeroed &= fit.converged && fit.weights.iter().all(|&w| w == 0.0);
    }
    let yb: Vec<f64> = (0..40).map(|i| f64::from(i as u32 % 2)).collect();
    let ones = vec![1.0; 40];
    let lmax_b = lambda_max(&x, &yb, &ones).unwrap();
    for (lambda, mix) in [(lmax_b, 1.0), (lmax_b / 0.5, 0.5)] {
        let fit = fit_logistic_elastic_net(
            &x, &yb, &ones, lambda, mix, &[0.0; 6], 0.0, 100_000, 1e-7,
        )
        .unwrap();
        zeroed &= fit.converged && fit.weights.iter().all(|&w| w == 0.0);
    }

    // (b) The closed-form coordinate update: hand cases, then the
    // stationarity condition of its one-dimensional objective.
    assert!(coordinate_update(3.0, 1.0, 2.0, 1.0) == 1.0);
    assert!(coordinate_update(-3.0, 1.0, 2.0, 1.0) == -1.0);
    assert!(coordinate_update(1.5, 1.0, 2.0, 1.0) == 0.0);
    assert!(coordinate_update(3.0, 1.0, 2.0, 0.5) == 1.0); // S(3,1)/(1+1)
    let mut stationarity = 0.0f64;
    for _ in 0..200 {
        let z = (rng.next_f64() - 0.5) * 8.0;
        let h = 0.05 + rng.next_f64() * 3.0;
        let lambda = rng.next_f64() * 2.0;
        let mix = rng.next_f64();
        let got = coordinate_update(z, h, lambda, mix);
        let denom = h + lambda * (1.0 - mix);
        if got != 0.0 {
            let r = denom * got - z + lambda * mix * got.signum();
            stationarity = stationarity.max(r.abs() / z.abs().max(1.0));
        } else {
            assert!(z.abs() <= lambda * mix + 1e-12, "zero despite |z| > threshold");
        }
        // The update must beat nearby points of its own objective.
        let f = |v: f64| 0.5 * denom * v * v - z * v + lambda * mix * v.abs();
        for d in [1e-4, 1e-2, 0.5] {
            assert!(f(got) <= f(got + d) + 1e-12 && f(got) <= f(got - d) + 1e-12);
        }
    }

    // (c) Analytic gradient of the smooth part against central differences.
    let (lambda, mix) = (0.3, 0.4);
    let mut grad_err = 0.0f64;
    for _ in 0..10 {
        let w: Vec<f64> = (0..6).map(|_| (rng.next_f64() - 0.5) * 4.0).collect();
        let b = (rng.next_f64() - 0.5) * 2.0;
        let (ga, gb) = smooth_gradient(&x, &y, &sw, &w, b, lambda, mix);
        for j in 0..6 {
            let h = 1e-6 * (1.0 + w[j].abs());
            let mut hi = w.clone();
            let mut lo = w.clone();
            hi[j] += h;
            lo[j] -= h;
            let num = (smooth_objective(&x, &y, &sw, &hi, b, lambda, mix)
                - smooth_objective(&x, &y, &sw, &lo, b, lambda, mix))
                / (2.0 * h);
            grad_err = grad_err.max((num - ga[j]).abs() / ga[j].abs().max(1.0));
        }
        let h = 1e-6;
        let num_b = (smooth_objective(&x, &y, &sw, &w, b + h, lambda, mix)
            - smooth_objective(&x, &y, &sw, &w, b - h, lambda, mix))
            / (2.0 * h);
        grad_err = grad_err.max((num_b - gb).abs() / gb.abs().max(1.0));
    }

    // (d) The recorded objective never increases along the descent.
    let fit = fit_logistic_elastic_net(
        &x, &y, &sw, 0.05, 0.5, &[0.0; 6], 0.0, 100_000, 1e-7,
    )
    .unwrap();
    let monotone = fit
        .objective_trace
        .windows(2)
        .all(|w| w[1] <= w[0] + 1e-10);

    report(
        7,
        "elastic-net optimizer",
        zeroed && stationarity <= 1e-10 && grad_err <= 1e-5 && monotone && fit.converged,
        &format!(
            "zeroing {zeroed}, stationarity {stationarity:.2e}, gradient {grad_err:.2e}, \
             monotone {monotone} over {} sweeps",
            fit.sweeps
        ),
    );
}

// ---------------------------------------------------------------------------
// 8. Cross-validation folds: disjoint, exhaustive, balanced, reproducible.

#[test]
fn criterion_08_fold_partitioning() {
    for &n in &[20usize, 23, 100] {
        let folds = partition_folds(n, 10, 4242).unwrap();
        assert_eq!(folds.len(), 10);
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        let spread = sizes.iter().max().unwrap() - sizes.iter().min().unwrap();
        assert!(spread <= 1, "fold sizes {sizes:?} differ by more than one");
        let mut seen = BTreeSet::new();
        for fold in &folds {
            for &i in fold {
                assert!(seen.insert(i), "index {i} lands in two folds");
            }
        }
        assert_eq!(seen, (0..n).collect::<BTreeSet<_>>(), "folds must cover 0..{n}");
        assert_eq!(folds, partition_folds(n, 10, 4242).unwrap(), "same seed must repeat");
        assert_ne!(folds, partition_folds(n, 10, 4243).unwrap(), "different seed, same split");
    }
    report(8, "cross-validation folds", true, "n in {20, 23, 100}, 10 folds");
}

// ---------------------------------------------------------------------------
// 9. Probability thresholds map to the three classes at the documented cuts.

#[test]
fn criterion_09_class_thresholds() {
    let t = Thresholds::default();
    let cases = [
        (0.0, SentimentClass::Negative),
        (0.2, SentimentClass::Negative),
        (0.35, SentimentClass::Neutral),
        (0.5, SentimentClass::Neutral),
        (0.65, SentimentClass::Neutral),
        (0.7, SentimentClass::Positive),
        (1.0, SentimentClass::Positive),
    ];
    for (p, expected) in cases {
        let got = classify(p, &t);
        assert_eq!(got, expected, "classify({p}) = {got:?}");
    }
    report(9, "class thresholds", true, "7 probe probabilities");
}

// ---------------------------------------------------------------------------
// 10. Report aggregation against brute force, plus the mode table's column
//     structure.

fn make_record(
    session: &str,
    utterance: usize,
    sentence: usize,
    speaker: &str,
    community: &str,
    topic: DiscussionTopic,
) -> SentenceRecord {
    SentenceRecord {
        sref: SentenceRef {
            session_id: session.to_owned(),
            utterance_index: utterance,
            sentence_index: sentence,
        },
        speaker_id: speaker.to_owned(),
        community: community.to_owned(),
        topic,
        text: String::new(),
    }
}

#[test]
fn criterion_10_aggregation_brute_force() {
    let topics = [
        DiscussionTopic::T1,
        DiscussionTopic::T2,
        DiscussionTopic::T3,
        DiscussionTopic::T4,
        DiscussionTopic::Untagged,
    ];
    let speakers = ["P1", "P2", "P3", "P4"];
    let mut rng = PortableRng::new(10);
    let mut sentences = Vec::new();
    for (c, community) in ["A", "B"].into_iter().enumerate() {
        for session in 0..2 {
            let session_id = format!("{community}-{session}");
            for utterance in 0..6 {
                for sentence in 0..1 + rng.index(3) {
                    let record = make_record(
                        &session_id,
                        utterance,
                        sentence,
                        speakers[(utterance + c) % speakers.len()],
                        community,
                        topics[(utterance + sentence) % topics.len()],
                    );
                    let p = rng.next_f64();
                    sentences.push(ScoredSentence {
                        record,
                        probability_of_positiveness: p,
                        class: classify(p, &Thresholds::default()),
                    });
                }
            }
        }
    }

    // Brute force in the same sorted-by-sref order the reports promise.
    let mut worst = 0.0f64;
    let by_speaker = speaker_positiveness(&sentences, &[]);
    for report_row in &by_speaker {
        let mut mine: Vec<(&SentenceRef, f64)> = sentences
            .iter()
            .filter(|s| s.record.speaker_id == report_row.speaker_id)
            .map(|s| (&s.record.sref, s.probability_of_positiveness))
            .collect();
        mine.sort_by(|a, b| a.0.cmp(b.0));
        assert_eq!(report_row.sentence_count, mine.len());
        let overall = mine.iter().map(|(_, p)| p).sum::<f64>() / mine.len() as f64;
        worst = worst.max((report_row.overall_mean - overall).abs());
        let mut means = Vec::new();
        let mut i = 0;
        while i < mine.len() {
            let key = (&mine[i].0.session_id, mine[i].0.utterance_index);
            let mut j = i;
            let mut sum = 0.0;
            while j < mine.len() && (&mine[j].0.session_id, mine[j].0.utterance_index) == key {
                sum += mine[j].1;
                j += 1;
            }
            means.push(sum / (j - i) as f64);
            i = j;
        }
        assert_eq!(report_row.utterance_means.len(), means.len());
        for (got, want) in report_row.utterance_means.iter().zip(&means) {
            worst = worst.max((got - want).abs());
        }
    }

    for include_t4 in [false, true] {
        let rows = topic_mean_positiveness(&sentences, include_t4);
        assert_eq!(
            rows.iter().any(|r| r.discussion_topic == DiscussionTopic::T4),
            include_t4,
            "wrap-up rows present iff requested"
        );
        assert!(rows.iter().all(|r| r.discussion_topic != DiscussionTopic::Untagged));
        for row in &rows {
            let mut mine: Vec<(&SentenceRef, f64)> = sentences
                .iter()
                .filter(|s| {
                    s.record.community == row.community
                        && s.record.topic == row.discussion_topic
                })
                .map(|s| (&s.record.sref, s.probability_of_positiveness))
                .collect();
            mine.sort_by(|a, b| a.0.cmp(b.0));
            assert!(!mine.is_empty());
            let mu = mine.iter().map(|(_, p)| p).sum::<f64>() / mine.len() as f64;
            worst = worst.max((row.mu - mu).abs());
        }
    }

    // Mode rows: brute-force mean and sample standard deviation, fixed row
    // order, empty and singleton cells degrade to blanks.
    let dict = ModeCategoryDictionary::default();
    let modes: Vec<String> = dict.modes().map(str::to_owned).collect();
    let mut scores = Vec::new();
    for (m, mode) in modes.iter().enumerate() {
        let count = match m {
            0 => 0,
            1 => 1,
            _ => 3 + m,
        };
        for i in 0..count {
            scores.push(ModeScore {
                mode: mode.clone(),
                phrase: None,
                score: rng.next_f64() * 2.0 - 1.0,
                sref: SentenceRef {
                    session_id: format!("S-{m}"),
                    utterance_index: i,
                    sentence_index: 0,
                },
            });
        }
    }
    let table = mode_sentiment_table(&scores, &dict);
    assert_eq!(
        table.iter().map(|r| r.mode.as_str()).collect::<Vec<_>>(),
        modes.iter().map(String::as_str).collect::<Vec<_>>(),
        "rows must follow dictionary order"
    );
    for (m, row) in table.iter().enumerate() {
        let mut mine: Vec<(&SentenceRef, f64)> = scores
            .iter()
            .filter(|s| s.mode == row.mode)
            .map(|s| (&s.sref, s.score))
            .collect();
        mine.sort_by(|a, b| a.0.cmp(b.0));
        assert_eq!(row.count, mine.len());
        match mine.len() {
            0 => assert_eq!((row.mean, row.std_dev), (None, None)),
            1 => {
                worst = worst.max((row.mean.unwrap() - mine[0].1).abs());
                assert_eq!(row.std_dev, None);
            }
            n => {
                let mean = mine.iter().map(|(_, v)| v).sum::<f64>() / n as f64;
                let var = mine.iter().map(|(_, v)| (v - mean) * (v - mean)).sum::<f64>()
                    / (n - 1) as f64;
                worst = worst.max((row.mean.unwrap() - mean).abs());
                worst = worst.max((row.std_dev.unwrap() - var.sqrt()).abs());
            }
        }
        let _ = m;
    }

    let csv = mode_table_csv(&table);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("mode,mean,std_dev,count"));
    let mut rows = 0;
    for line in lines {
        assert_eq!(line.split(',').count(), 4, "bad row {line:?}");
        rows += 1;
    }
    assert_eq!(rows, modes.len());

    report(
        10,
        "report aggregation brute force",
        worst <= 1e-12,
        &format!("max error {worst:.2e}, {} mode rows", modes.len()),
    );
}

// ---------------------------------------------------------------------------
// 11. The bundled-corpus pipeline is byte-identical across repeated runs and
//     across whole-run versus stage-by-stage execution.

fn sample_config(out: &Path) -> PipelineConfig {
    let samples = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/samples");
    let cfg = PipelineConfig {
        inputs: vec![samples],
        output: out.to_path_buf(),
        format: OutputFormat::Json,
        min_df: 2,
        ..PipelineConfig::default()
    };
    cfg.validate().unwrap();
    cfg
}

fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path
                    .strip_prefix(root)
                    .unwrap()
                    .components()
                    .map(|c| c.as_os_str().to_string_lossy())
                    .collect::<Vec<_>>()
                    .join("/");
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn diff_keys(a: &BTreeMap<String, Vec<u8>>, b: &BTreeMap<String, Vec<u8>>) -> Vec<String> {
    let keys: BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    keys.into_iter()
        .filter(|k| a.get(*k) != b.get(*k))
        .cloned()
        .collect()
}

#[test]
fn criterion_11_pipeline_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let out: PathBuf = dir.path().join("out");
    let cfg = sample_config(&out);

    let t1 = Instant::now();
    let first = run_pipeline(&cfg).unwrap();
    let secs1 = t1.elapsed().as_secs_f64();
    let files1 = snapshot(&out);
    let json1 = bundle_json(&first);

    fs::remove_dir_all(&out).unwrap();
    let t2 = Instant::now();
    let second = run_pipeline(&cfg).unwrap();
    let secs2 = t2.elapsed().as_secs_f64();
    let files2 = snapshot(&out);
    let json2 = bundle_json(&second);

    fs::remove_dir_all(&out).unwrap();
    let t3 = Instant::now();
    stage_ingest(&cfg).unwrap();
    stage_topics(&cfg).unwrap();
    stage_sentiment(&cfg).unwrap();
    let staged = stage_report(&cfg).unwrap();
    let secs3 = t3.elapsed().as_secs_f64();
    let files3 = snapshot(&out);
    let json3 = bundle_json(&staged);

    let rerun_diff = diff_keys(&files1, &files2);
    let staged_diff = diff_keys(&files1, &files3);
    let ok = json1 == json2
        && json1 == json3
        && rerun_diff.is_empty()
        && staged_diff.is_empty()
        && secs1 <= 120.0
        && secs2 <= 120.0
        && secs3 <= 120.0;
    report(
        11,
        "pipeline determinism",
        ok,
        &format!(
            "{} artifacts, rerun diff {rerun_diff:?}, staged diff {staged_diff:?}, \
             runs {secs1:.1}s / {secs2:.1}s / {secs3:.1}s",
            files1.len()
        ),
    );
}

// ---------------------------------------------------------------------------
// 12. A classifier trained on the bundled corpus with the default seed words
//     rates a glowing sentence positive and a scathing one negative.

#[test]
fn criterion_12_seed_word_polarity() {
    let dir = tempfile::tempdir().unwrap();
    let out: PathBuf = dir.path().join("out");
    let cfg = sample_config(&out);
    stage_ingest(&cfg).unwrap();
    stage_sentiment(&cfg).unwrap();

    let text = fs::read_to_string(out.join("sentiment/classifier.json")).unwrap();
    let cls = SentimentClassifier::from_json(&text).unwrap();
    let vocab = Vocabulary::from_terms(cls.terms.iter().cloned()).unwrap();
    let rules = NormalizationRules::default();
    let score = |sentence: &str| {
        let tokens = normalize(&tokenize(sentence), &rules);
        let x = vectorize_tokens(&tokens, &vocab, &cls.idf);
        cls.probability(&x).unwrap()
    };

    let p_pos = score("this service is wonderful and spectacular");
    let p_neg = score("this service is horrible and awful");
    let ok = classify(p_pos, &cls.thresholds) == SentimentClass::Positive
        && classify(p_neg, &cls.thresholds) == SentimentClass::Negative;
    report(
        12,
        "seed-word polarity",
        ok,
        &format!("p(positive sentence) = {p_pos:.4}, p(negative sentence) = {p_neg:.4}"),
    );
}
