//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured values (run with `--nocapture` to see them).

use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rankadapt::data::{Dataset, Document, Query};
use rankadapt::gbdt::{
    fit_regression_tree, lambda_boost, lambda_smart, ls_loss, optimal_beta, BasisFunction,
    BoostConfig, TreeNode,
};
use rankadapt::interpolation::{optimize_weights_powell, InterpolatedModel, PowellConfig};
use rankadapt::lambda::{compute_lambdas, pair_cost, pair_cost_gradient};
use rankadapt::linear::{train_linear_lambdarank, LinearModel, TrainConfig};
use rankadapt::metrics::{dcg_at_k, delta_ndcg, ideal_dcg, mean_ndcg, rank_order, NdcgConfig};
use rankadapt::model::Model;
use rankadapt::Scorer;

fn random_query(rng: &mut ChaCha8Rng, max_docs: usize) -> (Query, Vec<f64>) {
    let n = rng.gen_range(1..=max_docs);
    let documents = (0..n)
        .map(|_| Document {
            label: rng.gen_range(0..=4),
            features: vec![0.0],
        })
        .collect();
    let scores = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
    (
        Query {
            qid: "q".into(),
            documents,
        },
        scores,
    )
}

#[test]
fn criterion_01_gradient_matches_finite_differences() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let o = rng.gen_range(-10.0..10.0);
        let numeric = (pair_cost(o + h, 0.0) - pair_cost(o - h, 0.0)) / (2.0 * h);
        let analytic = pair_cost_gradient(o);
        worst = worst.max((numeric - analytic).abs());
        assert!(
            (numeric - analytic).abs() < 1e-6,
            "o = {o}: analytic {analytic} vs numeric {numeric}"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 1 gradient-vs-finite-differences: PASS (worst |diff| = {worst:.2e}, {elapsed:?})"
    );
}

#[test]
fn criterion_02_delta_ndcg_matches_full_recompute() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let k = NdcgConfig::default().truncation;
    let mut pairs = 0usize;
    for _ in 0..200 {
        let (query, scores) = random_query(&mut rng, 10);
        let labels: Vec<u8> = query.documents.iter().map(|d| d.label).collect();
        let order = rank_order(&scores);
        let ideal = ideal_dcg(&labels, k);
        for i in 0..labels.len() {
            for j in (i + 1)..labels.len() {
                let closed = delta_ndcg(&query, &scores, i, j, k).unwrap();
                let mut swapped = order.clone();
                let pi = swapped.iter().position(|&d| d == i).unwrap();
                let pj = swapped.iter().position(|&d| d == j).unwrap();
                swapped.swap(pi, pj);
                let before: Vec<u8> = order.iter().map(|&d| labels[d]).collect();
                let after: Vec<u8> = swapped.iter().map(|&d| labels[d]).collect();
                let recomputed = if ideal == 0.0 {
                    0.0
                } else {
                    (dcg_at_k(&after, k) - dcg_at_k(&before, k)) / ideal
                };
                assert!(
                    (closed - recomputed).abs() < 1e-12,
                    "pair ({i},{j}): closed {closed} vs recomputed {recomputed}"
                );
                pairs += 1;
            }
        }
    }
    println!("ACCEPTANCE 2 delta-ndcg-oracle: PASS ({pairs} pairs checked)");
}

#[test]
fn criterion_03_lambda_conservation_and_nonnegative_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let config = NdcgConfig::default();
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (query, scores) = random_query(&mut rng, 10);
        let grads = compute_lambdas(&query, &scores, &config).unwrap();
        let sum: f64 = grads.residuals.iter().sum();
        worst = worst.max(sum.abs());
        assert!(sum.abs() < 1e-12, "residual sum = {sum}");
        assert!(grads.newton_weights.iter().all(|&w| w >= 0.0));
    }
    println!("ACCEPTANCE 3 lambda-conservation: PASS (worst |sum| = {worst:.2e})");
}

#[test]
fn criterion_04_least_squares_optimality() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for fixture in 0..100 {
        let n = rng.gen_range(2..30);
        let residuals: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let mut basis: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        if basis.iter().all(|&h| h == 0.0) {
            basis[0] = 1.0;
        }
        let beta = optimal_beta(&residuals, &basis).unwrap();
        let loss = ls_loss(&residuals, &basis).unwrap();
        let direct = |b: f64| -> f64 {
            residuals
                .iter()
                .zip(&basis)
                .map(|(y, h)| (y - b * h).powi(2))
                .sum()
        };
        assert!(
            (loss - direct(beta)).abs() < 1e-10,
            "fixture {fixture}: ls_loss {loss} vs direct {}",
            direct(beta)
        );
        for _ in 0..100 {
            let candidate = rng.gen_range(-5.0..5.0);
            assert!(
                direct(beta) <= direct(candidate) + 1e-10,
                "fixture {fixture}: beta {beta} loses to {candidate}"
            );
        }
    }
    println!("ACCEPTANCE 4 least-squares-optimality: PASS (100 fixtures x 100 candidates)");
}

/// Exhaustive scan over midpoint thresholds of a single feature, mirroring
/// the trainer's split algebra; ties resolve to the first (lowest) midpoint.
fn exhaustive_best_split(values: &[f64], targets: &[f64]) -> Option<f64> {
    let mut column: Vec<(f64, f64)> = values.iter().copied().zip(targets.iter().copied()).collect();
    column.sort_by(|a, b| a.0.total_cmp(&b.0));
    let node_sse = {
        let first = column[0].1;
        if column.iter().all(|&(_, t)| t == first) {
            0.0
        } else {
            let mean = column.iter().map(|&(_, t)| t).sum::<f64>() / column.len() as f64;
            column.iter().map(|&(_, t)| (t - mean).powi(2)).sum()
        }
    };
    if node_sse == 0.0 {
        return None;
    }
    let total_sum: f64 = column.iter().map(|&(_, t)| t).sum();
    let total_sq: f64 = column.iter().map(|&(_, t)| t * t).sum();
    let n = column.len() as f64;
    let mut best: Option<(f64, f64)> = None;
    for i in 0..column.len() - 1 {
        if column[i].0 == column[i + 1].0 {
            continue;
        }
        let left: Vec<f64> = column[..=i].iter().map(|&(_, t)| t).collect();
        let left_sum: f64 = left.iter().sum();
        let left_sq: f64 = left.iter().map(|t| t * t).sum();
        let left_n = left.len() as f64;
        let left_sse = (left_sq - left_sum * left_sum / left_n).max(0.0);
        let right_sum = total_sum - left_sum;
        let right_n = n - left_n;
        let right_sse = (total_sq - left_sq - right_sum * right_sum / right_n).max(0.0);
        let gain = node_sse - left_sse - right_sse;
        if gain > 0.0 && best.map_or(true, |(g, _)| gain > g) {
            best = Some((gain, (column[i].0 + column[i + 1].0) / 2.0));
        }
    }
    best.map(|(_, threshold)| threshold)
}

#[test]
fn criterion_05_first_split_matches_exhaustive_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let config = BoostConfig {
        rounds: 1,
        leaves: 2,
        min_samples_per_leaf: 1,
        randomize: false,
        ..BoostConfig::default()
    };
    let mut split_count = 0usize;
    for fixture in 0..50 {
        let n = rng.gen_range(2..=12);
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..4.0)).collect();
        let targets: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let samples: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
        let refs: Vec<&[f64]> = samples.iter().map(|s| s.as_slice()).collect();
        let mut tree_rng = ChaCha8Rng::seed_from_u64(0);
        let tree = fit_regression_tree(&refs, &targets, &config, &mut tree_rng).unwrap();
        let expected = exhaustive_best_split(&values, &targets);
        match (&tree.root, expected) {
            (
                TreeNode::Internal {
                    feature_index,
                    threshold,
                    ..
                },
                Some(expected_threshold),
            ) => {
                assert_eq!(*feature_index, 0);
                assert_eq!(
                    *threshold, expected_threshold,
                    "fixture {fixture}: split {threshold} vs oracle {expected_threshold}"
                );
                split_count += 1;
            }
            (TreeNode::Leaf { .. }, None) => {}
            (root, expected) => {
                panic!("fixture {fixture}: tree root {root:?} vs oracle {expected:?}")
            }
        }
    }
    println!("ACCEPTANCE 5 tree-split-oracle: PASS (50 fixtures, {split_count} splits)");
}

fn random_dataset(
    rng: &mut ChaCha8Rng,
    queries: usize,
    docs: usize,
    features: usize,
) -> Dataset {
    Dataset {
        queries: (0..queries)
            .map(|qi| Query {
                qid: format!("q{qi}"),
                documents: (0..docs)
                    .map(|_| Document {
                        label: rng.gen_range(0..=4),
                        features: (0..features).map(|_| rng.gen_range(0.0..1.0)).collect(),
                    })
                    .collect(),
            })
            .collect(),
        feature_count: features,
        feature_names: None,
    }
}

#[test]
fn criterion_06_boost_feature_selection_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let ndcg = NdcgConfig::default();
    for fixture in 0..20 {
        let dataset = random_dataset(&mut rng, 10, 10, 10);
        let background = Model::Linear(LinearModel::zeros(10));
        let config = BoostConfig {
            rounds: 1,
            leaves: 1,
            ..BoostConfig::default()
        };
        let ensemble = lambda_boost(&background, &dataset, &config, &ndcg).unwrap();
        let chosen = match ensemble.stages[0].basis {
            BasisFunction::SingleFeature { feature_index } => feature_index,
            _ => unreachable!("lambda_boost emits single-feature stages"),
        };

        // brute force: per-feature optimal least-squares loss at the
        // background's (zero) scores
        let mut residuals = Vec::new();
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); 10];
        for query in &dataset.queries {
            let scores = vec![0.0; query.documents.len()];
            let grads = compute_lambdas(query, &scores, &ndcg).unwrap();
            residuals.extend(grads.residuals);
            for doc in &query.documents {
                for (f, column) in columns.iter_mut().enumerate() {
                    column.push(doc.features[f]);
                }
            }
        }
        let mut expected = (usize::MAX, f64::INFINITY);
        for (f, column) in columns.iter().enumerate() {
            if column.iter().map(|h| h * h).sum::<f64>() == 0.0 {
                continue;
            }
            let loss = ls_loss(&residuals, column).unwrap();
            if loss < expected.1 {
                expected = (f, loss);
            }
        }
        assert_eq!(
            chosen, expected.0,
            "fixture {fixture}: chose {chosen}, brute force says {}",
            expected.0
        );
    }
    println!("ACCEPTANCE 6 boost-feature-selection-oracle: PASS (20 fixtures)");
}

/// Binary labels separable on feature 0 at 0.5 (40 queries x 10 docs).
fn indicator_dataset(seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Dataset {
        queries: (0..40)
            .map(|qi| Query {
                qid: format!("q{qi}"),
                documents: (0..10)
                    .map(|_| {
                        let x0: f64 = rng.gen_range(0.0..1.0);
                        Document {
                            label: u8::from(x0 > 0.5),
                            features: vec![x0, rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)],
                        }
                    })
                    .collect(),
            })
            .collect(),
        feature_count: 3,
        feature_names: None,
    }
}

#[test]
fn criterion_07_training_effectiveness() {
    let ndcg = NdcgConfig::default();

    let start = Instant::now();
    let dataset = indicator_dataset(7);
    let config = BoostConfig {
        rounds: 100,
        shrinkage: 0.5,
        leaves: 4,
        randomize: false,
        ..BoostConfig::default()
    };
    let background = Model::Linear(LinearModel::zeros(3));
    let ensemble = lambda_smart(&background, &dataset, &config, &ndcg).unwrap();
    let smart_ave = mean_ndcg(&dataset, &ensemble, &ndcg, &[10]).unwrap().ave_ndcg;
    let smart_elapsed = start.elapsed();
    assert!(smart_ave >= 0.98, "smart ave_ndcg = {smart_ave}");
    assert!(smart_elapsed.as_secs_f64() < 30.0, "took {smart_elapsed:?}");

    // linear trainer on its own separable fixture: feature 0 = label
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let linear_fixture = Dataset {
        queries: (0..20)
            .map(|qi| Query {
                qid: format!("q{qi}"),
                documents: (0..8)
                    .map(|di| {
                        let label = ((qi + di) % 5) as u8;
                        Document {
                            label,
                            features: vec![
                                f64::from(label),
                                rng.gen_range(-1.0..1.0),
                                rng.gen_range(-1.0..1.0),
                            ],
                        }
                    })
                    .collect(),
            })
            .collect(),
        feature_count: 3,
        feature_names: None,
    };
    let model = train_linear_lambdarank(
        &linear_fixture,
        &TrainConfig {
            epochs: 100,
            learning_rate: 1e-3,
            seed: 0,
            shuffle: true,
        },
    )
    .unwrap();
    let linear_ave = mean_ndcg(&linear_fixture, &model, &ndcg, &[10]).unwrap().ave_ndcg;
    assert!(linear_ave >= 0.99, "linear ave_ndcg = {linear_ave}");

    println!(
        "ACCEPTANCE 7 training-effectiveness: PASS (smart {smart_ave:.4} in {smart_elapsed:?}, linear {linear_ave:.4})"
    );
}

#[test]
fn criterion_08_interpolation_optimality() {
    let ndcg = NdcgConfig::default();
    let powell = PowellConfig::default();

    // perfect + adversarial: feature 0 equals the label
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let validation = Dataset {
        queries: (0..12)
            .map(|qi| Query {
                qid: format!("q{qi}"),
                documents: (0..6)
                    .map(|di| {
                        let label = ((qi * 2 + di) % 5) as u8;
                        Document {
                            label,
                            features: vec![f64::from(label), rng.gen_range(-1.0..1.0)],
                        }
                    })
                    .collect(),
            })
            .collect(),
        feature_count: 2,
        feature_names: None,
    };
    let components = vec![
        Model::Linear(LinearModel::new(vec![1.0, 0.0])),
        Model::Linear(LinearModel::new(vec![-1.0, 0.0])),
    ];
    let alphas = optimize_weights_powell(&components, &validation, &ndcg, &powell).unwrap();
    let tuned = InterpolatedModel::new(components, alphas).unwrap();
    let ave = mean_ndcg(&validation, &tuned, &ndcg, &[10]).unwrap().ave_ndcg;
    assert_eq!(ave, 1.0, "perfect+adversarial ave_ndcg = {ave}");

    // 10 random 3-component fixtures: never below the best single component
    let mut worst_margin = f64::INFINITY;
    for fixture in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + fixture);
        let dataset = random_dataset(&mut rng, 12, 8, 4);
        let components: Vec<Model> = (0..3)
            .map(|_| {
                Model::Linear(LinearModel::new(
                    (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                ))
            })
            .collect();
        let best_single = components
            .iter()
            .map(|c| mean_ndcg(&dataset, c, &ndcg, &[10]).unwrap().ave_ndcg)
            .fold(f64::NEG_INFINITY, f64::max);
        let alphas = optimize_weights_powell(&components, &dataset, &ndcg, &powell).unwrap();
        let tuned = InterpolatedModel::new(components, alphas).unwrap();
        let tuned_ave = mean_ndcg(&dataset, &tuned, &ndcg, &[10]).unwrap().ave_ndcg;
        worst_margin = worst_margin.min(tuned_ave - best_single);
        assert!(
            tuned_ave >= best_single - 1e-12,
            "fixture {fixture}: tuned {tuned_ave} vs best single {best_single}"
        );
    }
    println!(
        "ACCEPTANCE 8 interpolation-optimality: PASS (worst margin over best single = {worst_margin:+.2e})"
    );
}

#[test]
fn criterion_09_augmentation_oracle_and_monotonicity() {
    use rankadapt::augment::{cosine_similarity, knn_expand, AugmentConfig};

    let angle = |deg: f64| -> Vec<f64> {
        let rad = deg.to_radians();
        vec![rad.cos(), rad.sin()]
    };
    let make = |qid: &str, docs: Vec<(u8, Vec<f64>)>| Query {
        qid: qid.into(),
        documents: docs
            .into_iter()
            .map(|(label, features)| Document { label, features })
            .collect(),
    };
    let seeds = Dataset {
        queries: vec![make(
            "s",
            vec![
                (1, angle(0.0)),
                (2, angle(5.0)),
                (1, angle(10.0)),
                (3, angle(60.0)),
                (0, angle(90.0)),
            ],
        )],
        feature_count: 2,
        feature_names: None,
    };
    let background = Dataset {
        queries: vec![
            make(
                "b1",
                vec![(1, angle(4.0)), (4, angle(6.0)), (2, angle(45.0))],
            ),
            make(
                "b2",
                vec![(1, angle(8.0)), (0, angle(89.0)), (3, angle(-15.0))],
            ),
        ],
        feature_count: 2,
        feature_names: None,
    };

    // brute-force all-pairs distance matrix oracle
    let pool: Vec<&Document> = seeds.queries[0].documents.iter().collect();
    let oracle = |eps: f64| -> Vec<String> {
        let mut accepted = Vec::new();
        for q in &background.queries {
            for (i, d) in q.documents.iter().enumerate() {
                let mut dists: Vec<(f64, usize)> = pool
                    .iter()
                    .enumerate()
                    .map(|(pi, s)| {
                        (
                            1.0 - cosine_similarity(&d.features, &s.features).unwrap(),
                            pi,
                        )
                    })
                    .collect();
                dists.sort_by(|a, b| a.0.total_cmp(&b.0));
                let top = &dists[..3];
                if top.iter().all(|&(dist, _)| dist <= eps)
                    && top.iter().any(|&(_, pi)| pool[pi].label == d.label)
                {
                    accepted.push(format!("aug-{}-{}", q.qid, i));
                }
            }
        }
        accepted
    };

    let mut sizes = Vec::new();
    for eps in [0.01, 0.05, 0.2] {
        let config = AugmentConfig {
            seed_query_count: 1,
            neighbors: 3,
            max_distance: eps,
        };
        let expanded = knn_expand(&seeds, &background, &config).unwrap();
        let got: Vec<String> = expanded.queries.iter().map(|q| q.qid.clone()).collect();
        assert_eq!(got, oracle(eps), "eps = {eps}");
        sizes.push(got.len());
    }
    assert!(
        sizes[0] <= sizes[1] && sizes[1] <= sizes[2],
        "epsilon monotonicity violated: {sizes:?}"
    );
    println!("ACCEPTANCE 9 augmentation-oracle: PASS (accept sets {sizes:?} for eps 0.01/0.05/0.2)");
}

fn rankadapt_cmd(dir: &Path, args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_rankadapt"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn dir_snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(dir: &Path, prefix: &Path, into: &mut Vec<(String, Vec<u8>)>) {
        let mut entries: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap()).collect();
        entries.sort_by_key(|e| e.file_name());
        for entry in entries {
            let path = entry.path();
            let rel = path.strip_prefix(prefix).unwrap().to_owned();
            if path.is_dir() {
                walk(&path, prefix, into);
            } else {
                into.push((rel.display().to_string(), std::fs::read(&path).unwrap()));
            }
        }
    }
    let mut files = Vec::new();
    walk(dir, dir, &mut files);
    files
}

#[test]
fn criterion_10_determinism_and_model_round_trip() {
    // every command, run twice in fresh directories, produces identical
    // bytes on disk and on stdout
    let write_fixtures = |dir: &Path| {
        let mut train = String::new();
        for qi in 0..12 {
            for di in 0..8 {
                let x0 = ((qi * 7 + di * 13) % 20) as f64 / 20.0 + 0.025;
                let label = u8::from(x0 > 0.5);
                train.push_str(&format!(
                    "{label} qid:q{qi} 1:{x0} 2:{} 3:0.5\n",
                    ((qi * 3 + di * 5) % 17) as f64 / 17.0
                ));
            }
        }
        std::fs::write(dir.join("train.letor"), &train).unwrap();
        std::fs::write(
            dir.join("zero.json"),
            r#"{"kind": "linear", "feature_count": 3, "weights": [0.0, 0.0, 0.0]}"#,
        )
        .unwrap();
    };
    let run_all = |dir: &Path| -> Vec<u8> {
        let mut transcript = Vec::new();
        for args in [
            vec!["synth", "--profile", "shift", "--seed", "2", "--out-dir", "synthetic"],
            vec!["train", "--data", "train.letor", "--out", "linear.json", "--epochs", "40", "--seed", "5"],
            vec![
                "adapt", "--method", "smart", "--background", "zero.json", "--data", "train.letor",
                "--out", "smart.json", "--rounds", "20", "--leaves", "4", "--randomize", "--seed", "9",
            ],
            vec![
                "interpolate", "--models", "linear.json", "smart.json", "--valid", "train.letor",
                "--out", "interp.json",
            ],
            vec![
                "augment", "--in-domain", "train.letor", "--background", "train.letor",
                "--out", "e2.letor", "--k", "3", "--epsilon", "0.1",
            ],
            vec![
                "evaluate", "--model", "linear.json", "--model", "smart.json", "--model", "interp.json",
                "--data", "train.letor", "--ttest-baseline", "0",
            ],
            vec!["experiment", "--spec", "synthetic/experiment.json"],
        ] {
            transcript.extend_from_slice(&rankadapt_cmd(dir, &args).stdout);
        }
        transcript
    };
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    write_fixtures(dir_a.path());
    write_fixtures(dir_b.path());
    let transcript_a = run_all(dir_a.path());
    let transcript_b = run_all(dir_b.path());
    assert_eq!(transcript_a, transcript_b, "stdout transcripts differ");
    let files_a = dir_snapshot(dir_a.path());
    let files_b = dir_snapshot(dir_b.path());
    assert_eq!(
        files_a.iter().map(|(n, _)| n).collect::<Vec<_>>(),
        files_b.iter().map(|(n, _)| n).collect::<Vec<_>>()
    );
    for ((name_a, bytes_a), (_, bytes_b)) in files_a.iter().zip(&files_b) {
        assert_eq!(bytes_a, bytes_b, "file {name_a} differs between reruns");
    }

    // model file round trip preserves scores exactly on 1000 random inputs
    let dataset = indicator_dataset(3);
    let config = BoostConfig {
        rounds: 15,
        leaves: 4,
        randomize: true,
        seed: 4,
        ..BoostConfig::default()
    };
    let ndcg = NdcgConfig::default();
    let background = Model::Linear(LinearModel::new(vec![0.1, -0.2, 0.3]));
    let ensemble = Model::Ensemble(lambda_smart(&background, &dataset, &config, &ndcg).unwrap());
    let model = Model::Interpolated(
        InterpolatedModel::new(
            vec![ensemble, Model::Linear(LinearModel::new(vec![1.0, 2.0, -3.0]))],
            vec![0.6, 0.4],
        )
        .unwrap(),
    );
    let parsed = Model::from_json(&model.to_json().unwrap(), Path::new(".")).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    for _ in 0..1000 {
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-5.0..5.0)).collect();
        assert_eq!(model.score(&x), parsed.score(&x), "round trip changed a score");
    }
    println!(
        "ACCEPTANCE 10 determinism-and-round-trip: PASS ({} files byte-identical, 1000 scores exact)",
        files_a.len()
    );
}

#[test]
fn criterion_11_closed_open_qualitative_replication() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    rankadapt_cmd(
        dir.path(),
        &["synth", "--profile", "shift", "--seed", "2", "--out-dir", "."],
    );
    rankadapt_cmd(dir.path(), &["experiment", "--spec", "experiment.json"]);

    let ave = |table: &str, row: &str| -> f64 {
        let text = std::fs::read_to_string(dir.path().join(table)).unwrap();
        text.lines()
            .find(|l| l.starts_with(row))
            .unwrap_or_else(|| panic!("row {row} missing from {table}"))
            .split('\t')
            .next_back()
            .unwrap()
            .parse()
            .unwrap()
    };

    // (a) closed test: LambdaSMART is at least as good as the interpolations
    let smart_closed = ave("results/closed.tsv", "λ-SMART");
    let interp2_closed = ave("results/closed.tsv", "2W-Interp.");
    let interp3_closed = ave("results/closed.tsv", "3W-Interp.");
    assert!(
        smart_closed >= interp2_closed && smart_closed >= interp3_closed,
        "closed: smart {smart_closed} vs interp {interp2_closed}/{interp3_closed}"
    );

    // (b) open test: the interpolated models hold up, LambdaSMART drops
    let smart_open = ave("results/open.tsv", "λ-SMART");
    let interp2_open = ave("results/open.tsv", "2W-Interp.");
    let interp3_open = ave("results/open.tsv", "3W-Interp.");
    assert!(
        interp2_open >= smart_open && interp3_open >= smart_open,
        "open: interp {interp2_open}/{interp3_open} vs smart {smart_open}"
    );

    // randomization direction: open-test Ave-NDCG of randomized LambdaSMART
    // (rate 0.7, L = 20) is at least the non-randomized run's
    let spec_text = std::fs::read_to_string(dir.path().join("experiment.json")).unwrap();
    let mut spec: serde_json::Value = serde_json::from_str(&spec_text).unwrap();
    spec["smart"]["randomize"] = serde_json::Value::Bool(false);
    spec["methods"] = serde_json::json!(["lambda-smart"]);
    spec["output_dir"] = serde_json::json!("results_plain");
    std::fs::write(
        dir.path().join("plain.json"),
        serde_json::to_string_pretty(&spec).unwrap(),
    )
    .unwrap();
    rankadapt_cmd(dir.path(), &["experiment", "--spec", "plain.json"]);
    let smart_plain_open = ave("results_plain/open.tsv", "λ-SMART");
    assert!(
        smart_open >= smart_plain_open,
        "open: randomized {smart_open} vs plain {smart_plain_open}"
    );

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 11 qualitative-replication: PASS (closed smart {smart_closed:.4} >= interp {:.4}; open interp {:.4} >= smart {smart_open:.4}; randomized {smart_open:.4} >= plain {smart_plain_open:.4}; {elapsed:?})",
        interp2_closed.max(interp3_closed),
        interp2_open.min(interp3_open),
    );
}
