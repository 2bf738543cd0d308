//! Linear interpolation of component rankers and interpolation-weight
//! optimization.
//!
//! Two weight trainers are provided. The Powell search treats each component
//! as one dimension of a derivative-free optimization over validation
//! Ave-NDCG; because NDCG is piecewise constant in the weights, each line
//! search evaluates the objective on a dense grid and refines around the
//! best point instead of assuming a unimodal bracket. The alternative
//! trainer views the interpolation as a linear ranker whose input features
//! are the component scores and reuses the lambda-gradient trainer.

use crate::data::{Dataset, Document, Query};
use crate::error::{Error, Result};
use crate::linear::{train_linear_lambdarank, TrainConfig};
use crate::metrics::{dataset_ave_ndcg, NdcgConfig};
use crate::model::Model;
use crate::scorer::Scorer;

/// A weighted sum of component scorers.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolatedModel {
    pub components: Vec<Model>,
    pub alphas: Vec<f64>,
}

impl InterpolatedModel {
    pub fn new(components: Vec<Model>, alphas: Vec<f64>) -> Result<Self> {
        if components.len() < 2 {
            return Err(Error::InvalidConfig(
                "interpolation needs at least 2 components".into(),
            ));
        }
        if components.len() != alphas.len() {
            return Err(Error::LengthMismatch {
                left: components.len(),
                right: alphas.len(),
            });
        }
        if alphas.iter().all(|&a| a == 0.0) {
            return Err(Error::InvalidConfig(
                "at least one interpolation weight must be nonzero".into(),
            ));
        }
        let feature_count = components[0].feature_count();
        for component in &components[1..] {
            if component.feature_count() != feature_count {
                return Err(Error::DimensionMismatch {
                    expected: feature_count,
                    actual: component.feature_count(),
                });
            }
        }
        Ok(InterpolatedModel { components, alphas })
    }
}

impl Scorer for InterpolatedModel {
    fn feature_count(&self) -> usize {
        self.components[0].feature_count()
    }

    fn score(&self, features: &[f64]) -> f64 {
        self.components
            .iter()
            .zip(&self.alphas)
            .map(|(c, a)| a * c.score(features))
            .sum()
    }
}

/// Weighted sum of component scores with an explicit dimension check.
pub fn interpolated_score(model: &InterpolatedModel, features: &[f64]) -> Result<f64> {
    if features.len() != model.feature_count() {
        return Err(Error::DimensionMismatch {
            expected: model.feature_count(),
            actual: features.len(),
        });
    }
    Ok(model.score(features))
}

/// Settings for the derivative-free weight search.
#[derive(Debug, Clone, PartialEq)]
pub struct PowellConfig {
    pub max_iterations: usize,
    /// Grid points evaluated per line-search sweep.
    pub line_search_grid: usize,
    /// Initial bracket half-width of each line search.
    pub line_search_span: f64,
    /// Refinement passes around the best grid point.
    pub refine_levels: usize,
    /// Stop when a full iteration improves the objective by less than this.
    pub tolerance: f64,
}

impl Default for PowellConfig {
    fn default() -> Self {
        PowellConfig {
            max_iterations: 20,
            line_search_grid: 201,
            line_search_span: 2.0,
            refine_levels: 3,
            tolerance: 1e-6,
        }
    }
}

impl PowellConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::InvalidConfig("max_iterations must be >= 1".into()));
        }
        if self.line_search_grid < 2 {
            return Err(Error::InvalidConfig("line_search_grid must be >= 2".into()));
        }
        if !(self.line_search_span > 0.0) {
            return Err(Error::InvalidConfig("line_search_span must be > 0".into()));
        }
        if self.refine_levels < 1 {
            return Err(Error::InvalidConfig("refine_levels must be >= 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidConfig("tolerance must be > 0".into()));
        }
        Ok(())
    }
}

/// Component scores for every validation document, component-major, with
/// per-query spans. Lets the objective re-score the dataset with a dot
/// product per document.
struct ScoreTable {
    per_component: Vec<Vec<f64>>,
    spans: Vec<(usize, usize)>,
}

impl ScoreTable {
    fn build<S: Scorer>(components: &[S], dataset: &Dataset) -> Result<Self> {
        for component in components {
            if component.feature_count() != dataset.feature_count {
                return Err(Error::DimensionMismatch {
                    expected: dataset.feature_count,
                    actual: component.feature_count(),
                });
            }
        }
        let mut spans = Vec::with_capacity(dataset.queries.len());
        let mut offset = 0;
        for query in &dataset.queries {
            spans.push((offset, offset + query.documents.len()));
            offset += query.documents.len();
        }
        let per_component = components
            .iter()
            .map(|c| {
                dataset
                    .queries
                    .iter()
                    .flat_map(|q| q.documents.iter().map(|d| c.score(&d.features)))
                    .collect()
            })
            .collect();
        Ok(ScoreTable {
            per_component,
            spans,
        })
    }

    fn interpolated(&self, alphas: &[f64]) -> Vec<Vec<f64>> {
        self.spans
            .iter()
            .map(|&(start, end)| {
                (start..end)
                    .map(|i| {
                        self.per_component
                            .iter()
                            .zip(alphas)
                            .map(|(scores, a)| a * scores[i])
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }
}

/// Optimizes interpolation weights by Powell's direction-set method with
/// grid-plus-refinement line searches, maximizing validation Ave-NDCG from a
/// uniform start. The returned weights are L1-normalized (which cannot
/// change any ranking); the achieved objective is never below the uniform
/// start's.
pub fn optimize_weights_powell<S: Scorer>(
    components: &[S],
    validation: &Dataset,
    ndcg: &NdcgConfig,
    config: &PowellConfig,
) -> Result<Vec<f64>> {
    if components.len() < 2 {
        return Err(Error::InvalidConfig(
            "interpolation needs at least 2 components".into(),
        ));
    }
    config.validate()?;
    ndcg.validate()?;

    let table = ScoreTable::build(components, validation)?;
    // negated Ave-NDCG, so the search minimizes
    let objective = |alphas: &[f64]| -> Result<f64> {
        Ok(-dataset_ave_ndcg(validation, &table.interpolated(alphas), ndcg)?)
    };

    let n = components.len();
    let mut point = vec![1.0 / n as f64; n];
    let mut value = objective(&point)?;
    let mut directions: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect())
        .collect();

    for _ in 0..config.max_iterations {
        let start_value = value;
        let start_point = point.clone();
        let mut biggest_drop = 0.0;
        let mut biggest_index = 0;

        for (i, direction) in directions.iter().enumerate() {
            let before = value;
            (point, value) = line_search(&objective, &point, direction, value, config)?;
            if before - value > biggest_drop {
                biggest_drop = before - value;
                biggest_index = i;
            }
        }

        if start_value - value < config.tolerance {
            break;
        }

        // Powell's direction-replacement test on the extrapolated point
        let extrapolated: Vec<f64> = point
            .iter()
            .zip(&start_point)
            .map(|(p, s)| 2.0 * p - s)
            .collect();
        let extrapolated_value = objective(&extrapolated)?;
        if extrapolated_value < start_value {
            let t = 2.0 * (start_value - 2.0 * value + extrapolated_value)
                * (start_value - value - biggest_drop).powi(2)
                - biggest_drop * (start_value - extrapolated_value).powi(2);
            if t < 0.0 {
                let new_direction: Vec<f64> = point
                    .iter()
                    .zip(&start_point)
                    .map(|(p, s)| p - s)
                    .collect();
                (point, value) = line_search(&objective, &point, &new_direction, value, config)?;
                directions[biggest_index] = directions[n - 1].clone();
                directions[n - 1] = new_direction;
            }
        }
    }

    let l1: f64 = point.iter().map(|a| a.abs()).sum();
    if l1 > 0.0 {
        for a in &mut point {
            *a /= l1;
        }
    }
    Ok(point)
}

/// One grid-plus-refinement line search along `direction` from `point`.
/// `t = 0` is always a candidate, so the result never worsens; ties prefer
/// the smallest step magnitude.
fn line_search<F>(
    objective: &F,
    point: &[f64],
    direction: &[f64],
    current_value: f64,
    config: &PowellConfig,
) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let at = |t: f64| -> Vec<f64> {
        point
            .iter()
            .zip(direction)
            .map(|(p, d)| p + t * d)
            .collect()
    };

    let mut best_t = 0.0f64;
    let mut best_value = current_value;
    let grid = config.line_search_grid;
    let mut center = 0.0;
    let mut half = config.line_search_span;

    for _ in 0..=config.refine_levels {
        for i in 0..grid {
            let t = center - half + 2.0 * half * i as f64 / (grid - 1) as f64;
            let candidate = at(t);
            if candidate.iter().all(|&a| a == 0.0) {
                // the all-zero weight vector is not an admissible model
                continue;
            }
            let v = objective(&candidate)?;
            if v < best_value || (v == best_value && t.abs() < best_t.abs()) {
                best_value = v;
                best_t = t;
            }
        }
        center = best_t;
        half = 2.0 * half / (grid - 1) as f64;
    }

    Ok((at(best_t), best_value))
}

/// Learns interpolation weights by treating the component scores as the
/// feature vector of a derived dataset and running the linear
/// lambda-gradient trainer on it. Weights are returned unnormalized.
pub fn optimize_weights_lambdarank<S: Scorer>(
    components: &[S],
    validation: &Dataset,
    config: &TrainConfig,
) -> Result<Vec<f64>> {
    if components.len() < 2 {
        return Err(Error::InvalidConfig(
            "interpolation needs at least 2 components".into(),
        ));
    }
    for component in components {
        if component.feature_count() != validation.feature_count {
            return Err(Error::DimensionMismatch {
                expected: validation.feature_count,
                actual: component.feature_count(),
            });
        }
    }
    let derived = Dataset {
        queries: validation
            .queries
            .iter()
            .map(|q| Query {
                qid: q.qid.clone(),
                documents: q
                    .documents
                    .iter()
                    .map(|d| Document {
                        label: d.label,
                        features: components.iter().map(|c| c.score(&d.features)).collect(),
                    })
                    .collect(),
            })
            .collect(),
        feature_count: components.len(),
        feature_names: None,
    };
    let model = train_linear_lambdarank(&derived, config)?;
    Ok(model.weights)
}
