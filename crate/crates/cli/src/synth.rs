//! Synthetic ranking data with controlled distribution drift between a
//! background collection and a later, shifted open-test collection.
//!
//! The `shift` profile draws iid uniform feature vectors and grades
//! documents per query by the rank of a hidden relevance function. Three
//! relevance functions are used: a purely linear one for the background
//! domain; a mostly piecewise-constant one (threshold interactions over a
//! weak linear base) for the in-domain collection that generates train,
//! validation, and closed-test files; and, for the open test, a blend that
//! drifts back toward the background's linear relevance with moved, shrunk
//! interaction patterns plus label noise. Every parameter is recorded in
//! the emitted experiment spec.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rankadapt::data::{serialize_letor, Dataset, Document, Query};

use crate::experiment::{AugmentSpec, BoostSpec, ExperimentSpec, PowellSpec, TrainSpec};
use crate::{CliError, CliResult};

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum Profile {
    /// Background/in-domain/open collections with feature re-weighting and
    /// label noise between the in-domain and open sets
    Shift,
}

#[derive(Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub profile: Profile,
    #[arg(long, default_value_t = 2)]
    pub seed: u64,
    /// Directory receiving the LETOR files and the experiment spec
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub const FEATURE_COUNT: usize = 8;

const BACKGROUND_WEIGHTS: [f64; FEATURE_COUNT] = [1.2, 1.0, 0.4, 0.2, 0.6, 0.0, 0.3, 0.1];
const IN_DOMAIN_WEIGHTS: [f64; FEATURE_COUNT] = [0.3, 0.4, 1.1, 0.9, 0.1, 0.7, 0.2, 0.0];
const IN_DOMAIN_LINEAR_SCALE: f64 = 0.3;

/// Threshold interactions of the in-domain relevance: value added when
/// every (feature, low, high) clause holds, i.e. low < x[feature] <= high.
const IN_DOMAIN_PATTERNS: [(f64, [(usize, f64, f64); 2]); 3] = [
    (1.8, [(2, 0.55, 1.0), (5, 0.5, 1.0)]),
    (1.5, [(3, 0.6, 1.0), (3, 0.6, 1.0)]),
    (-1.2, [(0, 0.7, 1.0), (1, 0.0, 0.3)]),
];

/// Open-test relevance: a blend drifting back toward the background's
/// linear function; the in-domain interaction patterns are mostly washed
/// out, surviving at a quarter strength with moved thresholds.
const OPEN_BACKGROUND_BLEND: f64 = 0.7;
const OPEN_PATTERNS: [(f64, [(usize, f64, f64); 2]); 3] = [
    (0.45, [(2, 0.75, 1.0), (5, 0.35, 1.0)]),
    (0.375, [(3, 0.45, 1.0), (3, 0.45, 1.0)]),
    (-0.3, [(0, 0.55, 1.0), (1, 0.0, 0.45)]),
];
/// Judgment noise: labels jitter by one grade at these rates. The in-domain
/// rate applies to train, validation, and closed test (one collection
/// period); the open rate is higher on top of the relevance drift.
const IN_DOMAIN_LABEL_NOISE: f64 = 0.1;
const OPEN_LABEL_NOISE: f64 = 0.25;

/// Grade fractions per query, best first: top 10% get 4, next 20% get 3,
/// then 30% get 2 and 25% get 1; the remainder is 0.
const GRADE_FRACTIONS: [f64; 4] = [0.1, 0.2, 0.3, 0.25];

const BACKGROUND_QUERIES: usize = 120;
const BACKGROUND_DOCS: usize = 14;
const TRAIN_QUERIES: usize = 60;
const VALID_QUERIES: usize = 25;
const CLOSED_QUERIES: usize = 35;
const OPEN_QUERIES: usize = 40;
const IN_DOMAIN_DOCS: usize = 12;

#[derive(Copy, Clone)]
enum Domain {
    Background,
    InDomain,
    Open,
}

fn dot(weights: &[f64; FEATURE_COUNT], features: &[f64]) -> f64 {
    weights.iter().zip(features).map(|(w, x)| w * x).sum()
}

fn pattern_sum(patterns: &[(f64, [(usize, f64, f64); 2])], features: &[f64]) -> f64 {
    patterns
        .iter()
        .filter(|(_, clauses)| {
            clauses
                .iter()
                .all(|&(feature, low, high)| features[feature] > low && features[feature] <= high)
        })
        .map(|(value, _)| value)
        .sum()
}

fn relevance(domain: Domain, features: &[f64]) -> f64 {
    match domain {
        Domain::Background => dot(&BACKGROUND_WEIGHTS, features),
        Domain::InDomain => {
            IN_DOMAIN_LINEAR_SCALE * dot(&IN_DOMAIN_WEIGHTS, features)
                + pattern_sum(&IN_DOMAIN_PATTERNS, features)
        }
        Domain::Open => {
            OPEN_BACKGROUND_BLEND * dot(&BACKGROUND_WEIGHTS, features)
                + (1.0 - OPEN_BACKGROUND_BLEND)
                    * IN_DOMAIN_LINEAR_SCALE
                    * dot(&IN_DOMAIN_WEIGHTS, features)
                + pattern_sum(&OPEN_PATTERNS, features)
        }
    }
}

fn grade_by_quantile(rank: usize, total: usize) -> u8 {
    let mut boundary = 0.0;
    for (grade, fraction) in GRADE_FRACTIONS.iter().enumerate() {
        boundary += fraction;
        if (rank as f64 + 1.0) <= (boundary * total as f64).round() {
            return 4 - grade as u8;
        }
    }
    0
}

fn generate_collection(
    prefix: &str,
    n_queries: usize,
    docs_per_query: usize,
    domain: Domain,
    label_noise: f64,
    rng: &mut ChaCha8Rng,
) -> Dataset {
    let queries = (0..n_queries)
        .map(|qi| {
            let features: Vec<Vec<f64>> = (0..docs_per_query)
                .map(|_| (0..FEATURE_COUNT).map(|_| rng.gen_range(0.0..1.0)).collect())
                .collect();
            let relevances: Vec<f64> = features.iter().map(|x| relevance(domain, x)).collect();
            let mut order: Vec<usize> = (0..docs_per_query).collect();
            order.sort_by(|&a, &b| relevances[b].total_cmp(&relevances[a]).then(a.cmp(&b)));
            let mut labels = vec![0u8; docs_per_query];
            for (rank, &doc) in order.iter().enumerate() {
                labels[doc] = grade_by_quantile(rank, docs_per_query);
            }
            let documents = features
                .into_iter()
                .zip(labels)
                .map(|(features, label)| {
                    let label = if label_noise > 0.0 && rng.gen_range(0.0..1.0) < label_noise {
                        let jitter: i8 = if rng.gen_range(0.0..1.0) < 0.5 { -1 } else { 1 };
                        (label as i8 + jitter).clamp(0, 4) as u8
                    } else {
                        label
                    };
                    Document { label, features }
                })
                .collect();
            Query {
                qid: format!("{prefix}{qi}"),
                documents,
            }
        })
        .collect();
    Dataset {
        queries,
        feature_count: FEATURE_COUNT,
        feature_names: None,
    }
}

pub struct SynthOutput {
    pub spec_path: PathBuf,
}

pub fn generate(seed: u64, out_dir: &PathBuf) -> CliResult<SynthOutput> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Internal(format!("cannot create {}: {e}", out_dir.display())))?;

    // one independent stream per collection, so sizes can change without
    // perturbing the other files
    let collections = [
        (
            "background.letor",
            "bg",
            BACKGROUND_QUERIES,
            BACKGROUND_DOCS,
            Domain::Background,
            0.0,
        ),
        (
            "indomain_train.letor",
            "in",
            TRAIN_QUERIES,
            IN_DOMAIN_DOCS,
            Domain::InDomain,
            IN_DOMAIN_LABEL_NOISE,
        ),
        (
            "validation.letor",
            "val",
            VALID_QUERIES,
            IN_DOMAIN_DOCS,
            Domain::InDomain,
            IN_DOMAIN_LABEL_NOISE,
        ),
        (
            "closed_test.letor",
            "closed",
            CLOSED_QUERIES,
            IN_DOMAIN_DOCS,
            Domain::InDomain,
            IN_DOMAIN_LABEL_NOISE,
        ),
        (
            "open_test.letor",
            "open",
            OPEN_QUERIES,
            IN_DOMAIN_DOCS,
            Domain::Open,
            OPEN_LABEL_NOISE,
        ),
    ];

    for (offset, (file, prefix, n_queries, docs, domain, noise)) in
        collections.into_iter().enumerate()
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(offset as u64));
        let dataset = generate_collection(prefix, n_queries, docs, domain, noise, &mut rng);
        std::fs::write(out_dir.join(file), serialize_letor(&dataset))
            .map_err(|e| CliError::Internal(format!("cannot write {file}: {e}")))?;
    }

    let spec = ExperimentSpec {
        background_train: "background.letor".into(),
        in_domain_train: "indomain_train.letor".into(),
        validation: "validation.letor".into(),
        closed_test: "closed_test.letor".into(),
        open_test: "open_test.letor".into(),
        methods: vec![
            "baselines".into(),
            "interpolate-2way".into(),
            "interpolate-3way".into(),
            "lambda-boost".into(),
            "lambda-smart".into(),
        ],
        output_dir: "results".into(),
        seed,
        background_train_config: TrainSpec {
            epochs: 120,
            learning_rate: 0.02,
            shuffle: true,
        },
        in_domain_train_config: TrainSpec {
            epochs: 120,
            learning_rate: 0.02,
            shuffle: true,
        },
        // boosting settings as if tuned on the validation split: the small
        // in-domain collection needs a gentler shrinkage than large-scale
        // defaults
        boost: BoostSpec {
            rounds: 300,
            shrinkage: 0.2,
            leaves: 1,
            randomize: false,
            sample_rate: 0.7,
            min_samples_per_leaf: 1,
        },
        smart: BoostSpec {
            rounds: 100,
            shrinkage: 0.2,
            leaves: 20,
            randomize: true,
            sample_rate: 0.7,
            min_samples_per_leaf: 16,
        },
        powell: PowellSpec::default(),
        augment: AugmentSpec {
            seed_queries: 12,
            neighbors: 3,
            epsilon: 0.05,
        },
        generator: Some(generator_manifest(seed)),
    };
    let spec_path = out_dir.join("experiment.json");
    let json = serde_json::to_string_pretty(&spec)
        .map_err(|e| CliError::Internal(format!("serialize spec: {e}")))?;
    std::fs::write(&spec_path, json)
        .map_err(|e| CliError::Internal(format!("cannot write spec: {e}")))?;

    Ok(SynthOutput { spec_path })
}

fn patterns_json(patterns: &[(f64, [(usize, f64, f64); 2])]) -> serde_json::Value {
    patterns
        .iter()
        .map(|(value, clauses)| {
            serde_json::json!({
                "value": value,
                "clauses": clauses.iter().map(|(feature, low, high)| {
                    serde_json::json!({ "feature": feature, "low": low, "high": high })
                }).collect::<Vec<_>>(),
            })
        })
        .collect::<Vec<_>>()
        .into()
}

fn generator_manifest(seed: u64) -> serde_json::Value {
    serde_json::json!({
        "profile": "shift",
        "seed": seed,
        "feature_count": FEATURE_COUNT,
        "features": "iid uniform on [0, 1)",
        "background_relevance": { "weights": BACKGROUND_WEIGHTS },
        "in_domain_relevance": {
            "linear_scale": IN_DOMAIN_LINEAR_SCALE,
            "weights": IN_DOMAIN_WEIGHTS,
            "patterns": patterns_json(&IN_DOMAIN_PATTERNS),
            "label_noise": IN_DOMAIN_LABEL_NOISE,
        },
        "open_relevance": {
            "background_blend": OPEN_BACKGROUND_BLEND,
            "patterns": patterns_json(&OPEN_PATTERNS),
            "label_noise": OPEN_LABEL_NOISE,
        },
        "grade_fractions_best_first": GRADE_FRACTIONS,
        "collections": {
            "background": { "queries": BACKGROUND_QUERIES, "docs_per_query": BACKGROUND_DOCS },
            "indomain_train": { "queries": TRAIN_QUERIES, "docs_per_query": IN_DOMAIN_DOCS },
            "validation": { "queries": VALID_QUERIES, "docs_per_query": IN_DOMAIN_DOCS },
            "closed_test": { "queries": CLOSED_QUERIES, "docs_per_query": IN_DOMAIN_DOCS },
            "open_test": { "queries": OPEN_QUERIES, "docs_per_query": IN_DOMAIN_DOCS },
        },
    })
}

pub fn run(args: &SynthArgs) -> CliResult<()> {
    let Profile::Shift = args.profile;
    let output = generate(args.seed, &args.out_dir)?;
    println!("spec={}", output.spec_path.display());
    Ok(())
}
