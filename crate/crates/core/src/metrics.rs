//! NDCG family, rank-swap NDCG deltas, and the paired t-test used for
//! significance reporting.
//!
//! DCG uses the graded gain `2^r - 1` with a `1/ln(1+j)` position discount
//! (j is the 1-based rank). The log base is fixed to the natural log: it
//! cancels in the NDCG ratio but not in raw DCG values.

use std::collections::{BTreeMap, BTreeSet};

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::data::{Dataset, Query};
use crate::error::{Error, Result};
use crate::scorer::{score_query, Scorer};

/// NDCG evaluation settings: the truncation level and the cutoff range
/// averaged into Ave-NDCG.
#[derive(Debug, Clone, PartialEq)]
pub struct NdcgConfig {
    /// Ranking truncation level (positions beyond it contribute nothing).
    pub truncation: usize,
    /// Inclusive cutoff range whose per-cutoff means form Ave-NDCG.
    pub ave_ndcg_range: (usize, usize),
}

impl Default for NdcgConfig {
    fn default() -> Self {
        NdcgConfig {
            truncation: 10,
            ave_ndcg_range: (1, 10),
        }
    }
}

impl NdcgConfig {
    pub fn validate(&self) -> Result<()> {
        if self.truncation < 1 {
            return Err(Error::InvalidConfig("truncation must be >= 1".into()));
        }
        let (lo, hi) = self.ave_ndcg_range;
        if lo < 1 || lo > hi {
            return Err(Error::InvalidConfig(
                "ave_ndcg_range must satisfy 1 <= start <= end".into(),
            ));
        }
        Ok(())
    }
}

/// Per-query metric values kept alongside the aggregate means.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryMetrics {
    pub qid: String,
    pub ndcg_at: BTreeMap<usize, f64>,
    pub ave_ndcg: f64,
}

/// Evaluation result for one model over a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    /// Mean NDCG per requested cutoff, over evaluable queries.
    pub ndcg_at: BTreeMap<usize, f64>,
    /// Mean over the configured cutoff range of the per-cutoff means.
    pub ave_ndcg: f64,
    /// One entry per evaluable query, in dataset order.
    pub per_query: Vec<QueryMetrics>,
    /// Queries excluded because their ideal DCG is zero (all labels 0).
    pub excluded_queries: usize,
}

impl MetricsReport {
    /// One TSV row: model name followed by the per-cutoff means and Ave-NDCG,
    /// four decimals each.
    pub fn tsv_row(&self, name: &str) -> String {
        let mut row = name.to_string();
        for value in self.ndcg_at.values() {
            row.push_str(&format!("\t{value:.4}"));
        }
        row.push_str(&format!("\t{:.4}", self.ave_ndcg));
        row
    }
}

/// TSV header matching [`MetricsReport::tsv_row`].
pub fn tsv_header(cutoffs: &[usize]) -> String {
    let mut header = "model".to_string();
    let mut sorted = cutoffs.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for k in sorted {
        header.push_str(&format!("\tNDCG@{k}"));
    }
    header.push_str("\tAveNDCG");
    header
}

fn gain(label: u8) -> f64 {
    (1u32 << label) as f64 - 1.0
}

fn discount(rank: usize) -> f64 {
    1.0 / (1.0 + rank as f64).ln()
}

/// DCG of labels already in rank order, truncated at `k`.
pub fn dcg_at_k(labels_in_rank_order: &[u8], k: usize) -> f64 {
    labels_in_rank_order
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, &label)| gain(label) * discount(i + 1))
        .sum()
}

/// Ideal (label-sorted) DCG at `k`.
pub fn ideal_dcg(labels: &[u8], k: usize) -> f64 {
    let mut sorted = labels.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    dcg_at_k(&sorted, k)
}

/// Document indices in score order: descending score, ties broken by
/// original document index.
pub fn rank_order(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

/// 1-based rank position of each document under [`rank_order`].
pub fn rank_positions(scores: &[f64]) -> Vec<usize> {
    let order = rank_order(scores);
    let mut positions = vec![0; scores.len()];
    for (rank0, &doc) in order.iter().enumerate() {
        positions[doc] = rank0 + 1;
    }
    positions
}

/// NDCG of the score-induced ordering at cutoff `k`, or `None` for queries
/// whose ideal DCG is zero (all labels 0).
pub fn ndcg_at_k(query: &Query, scores: &[f64], k: usize) -> Result<Option<f64>> {
    let n = query.documents.len();
    if scores.len() != n {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: n,
        });
    }
    let labels: Vec<u8> = query.documents.iter().map(|d| d.label).collect();
    let ideal = ideal_dcg(&labels, k);
    if ideal == 0.0 {
        return Ok(None);
    }
    let ranked: Vec<u8> = rank_order(scores).into_iter().map(|i| labels[i]).collect();
    Ok(Some(dcg_at_k(&ranked, k) / ideal))
}

/// NDCG change from swapping the rank positions of documents `i` and `j` in
/// the current score-sorted order, in closed form touching only the two
/// positions. Returns 0 when the query's ideal DCG is zero.
pub fn delta_ndcg(query: &Query, scores: &[f64], i: usize, j: usize, k: usize) -> Result<f64> {
    let n = query.documents.len();
    if scores.len() != n {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: n,
        });
    }
    for index in [i, j] {
        if index >= n {
            return Err(Error::IndexOutOfRange { index, len: n });
        }
    }
    let labels: Vec<u8> = query.documents.iter().map(|d| d.label).collect();
    let ideal = ideal_dcg(&labels, k);
    if ideal == 0.0 {
        return Ok(0.0);
    }
    let positions = rank_positions(scores);
    let disc = |rank: usize| if rank <= k { discount(rank) } else { 0.0 };
    let delta = (gain(labels[i]) - gain(labels[j])) * (disc(positions[j]) - disc(positions[i]));
    Ok(delta / ideal)
}

/// Evaluates a scorer over a dataset: per-cutoff mean NDCG plus Ave-NDCG.
///
/// Queries with zero ideal DCG are excluded from the averages and counted in
/// the report. Errors when no query is evaluable.
pub fn mean_ndcg<S: Scorer + ?Sized>(
    dataset: &Dataset,
    scorer: &S,
    config: &NdcgConfig,
    cutoffs: &[usize],
) -> Result<MetricsReport> {
    config.validate()?;
    if scorer.feature_count() != dataset.feature_count {
        return Err(Error::DimensionMismatch {
            expected: dataset.feature_count,
            actual: scorer.feature_count(),
        });
    }
    let scores: Vec<Vec<f64>> = dataset
        .queries
        .iter()
        .map(|q| score_query(scorer, q))
        .collect();
    mean_ndcg_from_scores(dataset, &scores, config, cutoffs)
}

/// Same as [`mean_ndcg`] but over precomputed per-query score vectors.
pub fn mean_ndcg_from_scores(
    dataset: &Dataset,
    scores: &[Vec<f64>],
    config: &NdcgConfig,
    cutoffs: &[usize],
) -> Result<MetricsReport> {
    config.validate()?;
    if scores.len() != dataset.queries.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: dataset.queries.len(),
        });
    }
    let (lo, hi) = config.ave_ndcg_range;
    let mut all_ks: BTreeSet<usize> = cutoffs.iter().copied().collect();
    all_ks.extend(lo..=hi);

    let mut sums: BTreeMap<usize, f64> = all_ks.iter().map(|&k| (k, 0.0)).collect();
    let mut per_query = Vec::new();
    let mut excluded = 0usize;

    for (query, query_scores) in dataset.queries.iter().zip(scores) {
        let mut by_k = BTreeMap::new();
        let mut defined = true;
        for &k in &all_ks {
            match ndcg_at_k(query, query_scores, k)? {
                Some(v) => {
                    by_k.insert(k, v);
                }
                None => {
                    defined = false;
                    break;
                }
            }
        }
        if !defined {
            excluded += 1;
            continue;
        }
        for (&k, &v) in &by_k {
            *sums.get_mut(&k).unwrap() += v;
        }
        let range_vals: Vec<f64> = (lo..=hi).map(|k| by_k[&k]).collect();
        per_query.push(QueryMetrics {
            qid: query.qid.clone(),
            ndcg_at: cutoffs.iter().map(|&k| (k, by_k[&k])).collect(),
            ave_ndcg: range_vals.iter().sum::<f64>() / range_vals.len() as f64,
        });
    }

    if per_query.is_empty() {
        return Err(Error::NoEvaluableQueries);
    }

    let count = per_query.len() as f64;
    let means: BTreeMap<usize, f64> = sums.into_iter().map(|(k, s)| (k, s / count)).collect();
    let range_means: Vec<f64> = (lo..=hi).map(|k| means[&k]).collect();
    let ave_ndcg = range_means.iter().sum::<f64>() / range_means.len() as f64;

    Ok(MetricsReport {
        ndcg_at: cutoffs.iter().map(|&k| (k, means[&k])).collect(),
        ave_ndcg,
        per_query,
        excluded_queries: excluded,
    })
}

/// Ave-NDCG alone, over precomputed per-query scores. This is the objective
/// the interpolation-weight search evaluates.
pub fn dataset_ave_ndcg(
    dataset: &Dataset,
    scores: &[Vec<f64>],
    config: &NdcgConfig,
) -> Result<f64> {
    Ok(mean_ndcg_from_scores(dataset, scores, config, &[])?.ave_ndcg)
}

/// Two-sided paired Student's t-test on per-query metric differences.
///
/// Returns `(t, p)` with p from the Student-t CDF at n-1 degrees of freedom.
/// Degenerate zero-variance convention: p = 1.0 when the mean difference is
/// 0, else p = 0.0 (with an infinite t of matching sign).
pub fn paired_t_test(per_query_a: &[f64], per_query_b: &[f64]) -> Result<(f64, f64)> {
    let n = per_query_a.len();
    if n != per_query_b.len() || n < 2 {
        return Err(Error::BadPairedSamples {
            left: n,
            right: per_query_b.len(),
        });
    }
    let diffs: Vec<f64> = per_query_a
        .iter()
        .zip(per_query_b)
        .map(|(a, b)| a - b)
        .collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);

    if var == 0.0 {
        return Ok(if mean == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY.copysign(mean), 0.0)
        });
    }

    let t = mean / (var / n as f64).sqrt();
    let dist = StudentsT::new(0.0, 1.0, n as f64 - 1.0)
        .map_err(|e| Error::InvalidConfig(format!("t-distribution: {e}")))?;
    let p = 2.0 * (1.0 - dist.cdf(t.abs()));
    Ok((t, p.clamp(0.0, 1.0)))
}
