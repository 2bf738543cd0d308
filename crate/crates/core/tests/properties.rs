//! Cross-module invariants checked with randomized inputs.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rankadapt::data::{parse_letor, serialize_letor, split_dataset, Dataset, Document, Query};
use rankadapt::gbdt::{ls_loss, optimal_beta};
use rankadapt::lambda::compute_lambdas;
use rankadapt::metrics::{delta_ndcg, mean_ndcg, ndcg_at_k, rank_order, NdcgConfig};
use rankadapt::Scorer;

/// Straightforward re-implementation of per-query NDCG and its means,
/// written without any of the library's metric helpers.
mod reference {
    use rankadapt::data::Dataset;
    use rankadapt::Scorer;

    fn dcg(labels: &[u8], k: usize) -> f64 {
        let mut total = 0.0;
        for (i, &label) in labels.iter().enumerate() {
            if i + 1 > k {
                break;
            }
            let gain = 2f64.powi(i32::from(label)) - 1.0;
            total += gain / (i as f64 + 2.0).ln();
        }
        total
    }

    pub fn evaluate<S: Scorer>(dataset: &Dataset, scorer: &S, cutoffs: &[usize]) -> Vec<f64> {
        let mut sums = vec![0.0; cutoffs.len()];
        let mut evaluable = 0usize;
        for query in &dataset.queries {
            let mut labels: Vec<u8> = query.documents.iter().map(|d| d.label).collect();
            if labels.iter().all(|&l| l == 0) {
                continue;
            }
            evaluable += 1;
            let scores: Vec<f64> = query
                .documents
                .iter()
                .map(|d| scorer.score(&d.features))
                .collect();
            // selection ordering: highest score first, earlier index on ties
            let mut ranked: Vec<usize> = Vec::new();
            let mut remaining: Vec<usize> = (0..labels.len()).collect();
            while !remaining.is_empty() {
                let mut best = 0;
                for (slot, &doc) in remaining.iter().enumerate() {
                    if scores[doc] > scores[remaining[best]] {
                        best = slot;
                    }
                }
                ranked.push(remaining.remove(best));
            }
            let ranked_labels: Vec<u8> = ranked.iter().map(|&d| labels[d]).collect();
            labels.sort_unstable_by(|a, b| b.cmp(a));
            for (slot, &k) in cutoffs.iter().enumerate() {
                sums[slot] += dcg(&ranked_labels, k) / dcg(&labels, k);
            }
        }
        sums.iter().map(|s| s / evaluable as f64).collect()
    }
}

fn query_of(labels: &[u8]) -> Query {
    Query {
        qid: "q".into(),
        documents: labels
            .iter()
            .map(|&label| Document {
                label,
                features: vec![0.0],
            })
            .collect(),
    }
}

/// Dyadic scores make affine transforms exact, so rank ties survive the
/// transform bit-for-bit.
fn dyadic_scores(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec((-160i32..160).prop_map(|i| f64::from(i) / 16.0), n)
}

fn labeled_query() -> impl Strategy<Value = (Query, Vec<f64>)> {
    (1usize..10).prop_flat_map(|n| {
        (
            proptest::collection::vec(0u8..=4, n),
            dyadic_scores(n),
        )
            .prop_map(|(labels, scores)| (query_of(&labels), scores))
    })
}

#[test]
fn mean_ndcg_matches_the_reference_evaluator() {
    struct RandomScorer;

    impl Scorer for RandomScorer {
        fn feature_count(&self) -> usize {
            2
        }
        fn score(&self, features: &[f64]) -> f64 {
            // arbitrary fixed function of the features
            features[0] * 0.37 - features[1] * 1.21
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let dataset = Dataset {
        queries: (0..50)
            .map(|qi| Query {
                qid: format!("q{qi}"),
                documents: (0..rng.gen_range(2..12))
                    .map(|_| Document {
                        label: rng.gen_range(0..=4),
                        features: vec![rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)],
                    })
                    .collect(),
            })
            .collect(),
        feature_count: 2,
        feature_names: None,
    };

    let cutoffs = [1usize, 3, 10];
    let report = mean_ndcg(&dataset, &RandomScorer, &NdcgConfig::default(), &cutoffs).unwrap();
    let expected = reference::evaluate(&dataset, &RandomScorer, &cutoffs);
    for (&k, want) in cutoffs.iter().zip(&expected) {
        let got = report.ndcg_at[&k];
        assert!(
            (got - want).abs() < 1e-12,
            "NDCG@{k}: {got} vs reference {want}"
        );
    }
    let range: Vec<usize> = (1..=10).collect();
    let per_k = reference::evaluate(&dataset, &RandomScorer, &range);
    let expected_ave = per_k.iter().sum::<f64>() / per_k.len() as f64;
    assert!(
        (report.ave_ndcg - expected_ave).abs() < 1e-12,
        "AveNDCG: {} vs reference {expected_ave}",
        report.ave_ndcg
    );
}

proptest! {
    #[test]
    fn ndcg_is_invariant_under_increasing_transforms(
        (query, scores) in labeled_query(),
        scale in (1i32..=8).prop_map(|i| f64::from(i) / 4.0),
        shift in (-20i32..=20).prop_map(|i| f64::from(i) / 4.0),
        k in 1usize..12,
    ) {
        let transformed: Vec<f64> = scores.iter().map(|s| scale * s + shift).collect();
        let a = ndcg_at_k(&query, &scores, k).unwrap();
        let b = ndcg_at_k(&query, &transformed, k).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn ndcg_is_bounded_and_one_on_ideal_orders(
        (query, scores) in labeled_query(),
        k in 1usize..12,
    ) {
        if let Some(value) = ndcg_at_k(&query, &scores, k).unwrap() {
            prop_assert!((0.0..=1.0).contains(&value), "ndcg = {}", value);
        }
        // score each document by its label: an ideal ordering
        let ideal_scores: Vec<f64> = query.documents.iter().map(|d| f64::from(d.label)).collect();
        match ndcg_at_k(&query, &ideal_scores, k).unwrap() {
            Some(value) => prop_assert_eq!(value, 1.0),
            None => prop_assert!(query.documents.iter().all(|d| d.label == 0)),
        }
    }

    #[test]
    fn delta_ndcg_matches_full_recompute_for_every_pair(
        (query, scores) in labeled_query(),
        k in 1usize..12,
    ) {
        let n = query.documents.len();
        let order = rank_order(&scores);
        for i in 0..n {
            for j in (i + 1)..n {
                let closed = delta_ndcg(&query, &scores, i, j, k).unwrap();

                // full recompute: swap the two documents' rank positions
                let mut swapped = order.clone();
                let pi = swapped.iter().position(|&d| d == i).unwrap();
                let pj = swapped.iter().position(|&d| d == j).unwrap();
                swapped.swap(pi, pj);
                let labels: Vec<u8> = query.documents.iter().map(|d| d.label).collect();
                let ranked_before: Vec<u8> = order.iter().map(|&d| labels[d]).collect();
                let ranked_after: Vec<u8> = swapped.iter().map(|&d| labels[d]).collect();
                let ideal = rankadapt::metrics::ideal_dcg(&labels, k);
                let recomputed = if ideal == 0.0 {
                    0.0
                } else {
                    (rankadapt::metrics::dcg_at_k(&ranked_after, k)
                        - rankadapt::metrics::dcg_at_k(&ranked_before, k))
                        / ideal
                };
                prop_assert!(
                    (closed - recomputed).abs() < 1e-12,
                    "closed {} vs recomputed {}",
                    closed,
                    recomputed
                );
            }
        }
    }

    #[test]
    fn delta_ndcg_is_antisymmetric_under_position_exchange(
        (query, scores) in labeled_query(),
        k in 1usize..12,
    ) {
        let n = query.documents.len();
        prop_assume!(n >= 2);
        // exchange the score-order positions of documents 0 and 1 by giving
        // each the other's score (scores are dyadic, so this is exact)
        let mut exchanged = scores.clone();
        exchanged.swap(0, 1);
        // swapping scores only exchanges rank positions when the two scores
        // differ; equal scores keep index order and change nothing
        prop_assume!(scores[0] != scores[1]);
        let forward = delta_ndcg(&query, &scores, 0, 1, k).unwrap();
        let backward = delta_ndcg(&query, &exchanged, 0, 1, k).unwrap();
        prop_assert!(
            (forward + backward).abs() < 1e-12,
            "forward {} backward {}",
            forward,
            backward
        );
    }

    #[test]
    fn lambda_residuals_conserve_and_weights_are_nonnegative(
        (query, scores) in labeled_query(),
    ) {
        let grads = compute_lambdas(&query, &scores, &NdcgConfig::default()).unwrap();
        let sum: f64 = grads.residuals.iter().sum();
        prop_assert!(sum.abs() < 1e-12, "residual sum = {}", sum);
        prop_assert!(grads.newton_weights.iter().all(|&w| w >= 0.0));
    }

    /// Each pair pushes its higher-labeled document up regardless of the
    /// score scale; isolated as two-document queries, where the residual is
    /// exactly the single pair's contribution.
    #[test]
    fn positive_score_scaling_preserves_pair_residual_signs(
        labels in (0u8..=4, 0u8..=4),
        scores in dyadic_scores(2),
        scale in (1i32..=12).prop_map(|i| f64::from(i) / 4.0),
    ) {
        let query = query_of(&[labels.0, labels.1]);
        let cfg = NdcgConfig::default();
        let base = compute_lambdas(&query, &scores, &cfg).unwrap();
        let scaled_scores: Vec<f64> = scores.iter().map(|s| s * scale).collect();
        let scaled = compute_lambdas(&query, &scaled_scores, &cfg).unwrap();
        for (a, b) in base.residuals.iter().zip(&scaled.residuals) {
            prop_assert!(
                a.signum() == b.signum() || (*a == 0.0 && *b == 0.0),
                "sign flip: {} vs {}",
                a,
                b
            );
        }
        if labels.0 > labels.1 {
            prop_assert!(base.residuals[0] >= 0.0);
            prop_assert!(scaled.residuals[0] >= 0.0);
        }
    }

    #[test]
    fn optimal_beta_is_the_least_squares_minimizer(
        pairs in proptest::collection::vec(((-50i32..50), (-50i32..50)), 2..20),
        trials in proptest::collection::vec(-40i32..40, 20),
    ) {
        let residuals: Vec<f64> = pairs.iter().map(|&(y, _)| f64::from(y) / 8.0).collect();
        let basis: Vec<f64> = pairs.iter().map(|&(_, h)| f64::from(h) / 8.0).collect();
        prop_assume!(basis.iter().any(|&h| h != 0.0));
        let beta = optimal_beta(&residuals, &basis).unwrap();
        let loss = ls_loss(&residuals, &basis).unwrap();
        let direct = |b: f64| -> f64 {
            residuals
                .iter()
                .zip(&basis)
                .map(|(y, h)| (y - b * h).powi(2))
                .sum()
        };
        prop_assert!((loss - direct(beta)).abs() < 1e-10);
        for t in trials {
            prop_assert!(loss <= direct(f64::from(t) / 8.0) + 1e-10);
        }
    }

    #[test]
    fn letor_round_trip_is_lossless(
        spec in proptest::collection::vec(
            (1usize..5, proptest::collection::vec((0u8..=4, dyadic_scores(3)), 1..5)),
            1..6,
        ),
    ) {
        let queries: Vec<Query> = spec
            .iter()
            .enumerate()
            .map(|(i, (_, docs))| Query {
                qid: format!("q{i}"),
                documents: docs
                    .iter()
                    .map(|(label, features)| Document {
                        label: *label,
                        features: features.clone(),
                    })
                    .collect(),
            })
            .collect();
        let ds = Dataset { queries, feature_count: 3, feature_names: None };
        let parsed = parse_letor(serialize_letor(&ds).as_bytes()).unwrap();
        prop_assert_eq!(ds, parsed);
    }

    #[test]
    fn split_is_a_partition(
        n in 3usize..60,
        seed in any::<u64>(),
        cut in (1u32..8, 1u32..8),
    ) {
        let ds = Dataset {
            queries: (0..n)
                .map(|i| Query {
                    qid: format!("q{i}"),
                    documents: vec![Document { label: 1, features: vec![0.0] }],
                })
                .collect(),
            feature_count: 1,
            feature_names: None,
        };
        let a = f64::from(cut.0) / 10.0;
        let b = f64::from(cut.1) / 10.0;
        prop_assume!(a + b < 1.0);
        let fractions = (1.0 - a - b, a, b);
        let (train, valid, test) = split_dataset(&ds, fractions, seed).unwrap();
        let mut all: Vec<&str> = train
            .queries
            .iter()
            .chain(&valid.queries)
            .chain(&test.queries)
            .map(|q| q.qid.as_str())
            .collect();
        all.sort_unstable();
        all.dedup();
        prop_assert_eq!(all.len(), n);
    }
}
