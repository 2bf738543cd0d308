use crate::data::Query;

/// A ranking function: maps a query-document feature vector to a relevance
/// score. Implementations must be pure and deterministic.
pub trait Scorer {
    /// Input dimensionality the scorer was built for.
    fn feature_count(&self) -> usize;

    /// Scores one feature vector. Callers pass exactly `feature_count()`
    /// values; the typed entry points of each model perform that check.
    fn score(&self, features: &[f64]) -> f64;
}

impl<S: Scorer + ?Sized> Scorer for &S {
    fn feature_count(&self) -> usize {
        (**self).feature_count()
    }

    fn score(&self, features: &[f64]) -> f64 {
        (**self).score(features)
    }
}

impl<S: Scorer + ?Sized> Scorer for Box<S> {
    fn feature_count(&self) -> usize {
        (**self).feature_count()
    }

    fn score(&self, features: &[f64]) -> f64 {
        (**self).score(features)
    }
}

/// Scores every document of a query in document order.
pub fn score_query<S: Scorer + ?Sized>(scorer: &S, query: &Query) -> Vec<f64> {
    query
        .documents
        .iter()
        .map(|d| scorer.score(&d.features))
        .collect()
}
