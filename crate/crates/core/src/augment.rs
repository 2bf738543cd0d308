//! kNN-based adaptation-data expansion: pick the least label-noisy queries
//! of the in-domain data as seeds, then harvest near-duplicate documents
//! from a background pool.

use crate::data::{Dataset, Document, Query};
use crate::error::{Error, Result};

/// Expansion settings.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentConfig {
    /// How many lowest-entropy queries form the seed set.
    pub seed_query_count: usize,
    /// Neighbors consulted per background document.
    pub neighbors: usize,
    /// Cosine-distance acceptance threshold (all neighbors must be within).
    pub max_distance: f64,
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.neighbors < 1 {
            return Err(Error::InvalidConfig("neighbors must be >= 1".into()));
        }
        // distance 0 is admitted: it accepts exact duplicates only
        if !(0.0..=2.0).contains(&self.max_distance) {
            return Err(Error::InvalidConfig(
                "max_distance must be within [0, 2]".into(),
            ));
        }
        Ok(())
    }
}

/// Shannon entropy (base 2) of a query's empirical label distribution.
pub fn label_entropy(query: &Query) -> f64 {
    let mut counts = [0usize; 5];
    for doc in &query.documents {
        counts[doc.label as usize] += 1;
    }
    let n = query.documents.len() as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// The `seed_query_count` queries with lowest label entropy, ties broken by
/// qid in lexicographic order.
pub fn select_seed_queries(in_domain: &Dataset, config: &AugmentConfig) -> Result<Dataset> {
    config.validate()?;
    if config.seed_query_count > in_domain.queries.len() {
        return Err(Error::SeedCountTooLarge {
            requested: config.seed_query_count,
            available: in_domain.queries.len(),
        });
    }
    let mut ranked: Vec<(f64, &Query)> = in_domain
        .queries
        .iter()
        .map(|q| (label_entropy(q), q))
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.qid.cmp(&b.1.qid)));
    Ok(Dataset {
        queries: ranked
            .into_iter()
            .take(config.seed_query_count)
            .map(|(_, q)| q.clone())
            .collect(),
        feature_count: in_domain.feature_count,
        feature_names: in_domain.feature_names.clone(),
    })
}

/// Cosine of the angle between two vectors, in [-1, 1].
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let norm_a: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let norm_b: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm_a == 0.0 || norm_b == 0.0 {
        return Err(Error::ZeroVector);
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok((dot / (norm_a * norm_b)).clamp(-1.0, 1.0))
}

/// Cosine distance with an exact-duplicate shortcut so identical vectors are
/// at distance 0 even when the norm product rounds away from the dot product.
fn cosine_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a == b {
        // still reject zero vectors
        cosine_similarity(a, b)?;
        return Ok(0.0);
    }
    Ok(1.0 - cosine_similarity(a, b)?)
}

/// Expands the seed set with background documents whose `k` nearest seed
/// documents are all within `max_distance` and at least one of them carries
/// the same label. Each accepted document becomes its own single-document
/// query with qid `aug-<original qid>-<in-query index>`; output follows
/// background scan order. Zero-vector documents are skipped with a warning.
pub fn knn_expand(
    seeds: &Dataset,
    background: &Dataset,
    config: &AugmentConfig,
) -> Result<Dataset> {
    config.validate()?;
    if seeds.feature_count != background.feature_count {
        return Err(Error::DimensionMismatch {
            expected: seeds.feature_count,
            actual: background.feature_count,
        });
    }

    let mut pool: Vec<&Document> = Vec::new();
    for query in &seeds.queries {
        for doc in &query.documents {
            if doc.features.iter().all(|&x| x == 0.0) {
                log::warn!("skipping zero-vector seed document in query {}", query.qid);
                continue;
            }
            pool.push(doc);
        }
    }
    if pool.len() < config.neighbors {
        return Err(Error::TooFewSeedDocuments {
            k: config.neighbors,
            available: pool.len(),
        });
    }

    let mut expanded = Vec::new();
    for query in &background.queries {
        for (index, doc) in query.documents.iter().enumerate() {
            if doc.features.iter().all(|&x| x == 0.0) {
                log::warn!(
                    "skipping zero-vector background document {} of query {}",
                    index,
                    query.qid
                );
                continue;
            }
            let mut distances: Vec<(f64, usize)> = pool
                .iter()
                .enumerate()
                .map(|(pi, seed)| Ok((cosine_distance(&doc.features, &seed.features)?, pi)))
                .collect::<Result<_>>()?;
            distances.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let nearest = &distances[..config.neighbors];
            let all_close = nearest.iter().all(|&(d, _)| d <= config.max_distance);
            let label_match = nearest.iter().any(|&(_, pi)| pool[pi].label == doc.label);
            if all_close && label_match {
                expanded.push(Query {
                    qid: format!("aug-{}-{}", query.qid, index),
                    documents: vec![doc.clone()],
                });
            }
        }
    }

    Ok(Dataset {
        queries: expanded,
        feature_count: background.feature_count,
        feature_names: None,
    })
}
