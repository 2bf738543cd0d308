//! Shared fixture generators for the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rankadapt::data::{Dataset, Document, Query};

/// Random query-grouped data: uniform features, uniform grades.
pub fn random_dataset(queries: usize, docs_per_query: usize, features: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Dataset {
        queries: (0..queries)
            .map(|qi| Query {
                qid: format!("q{qi}"),
                documents: (0..docs_per_query)
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
