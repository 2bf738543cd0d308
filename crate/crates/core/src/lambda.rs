//! Lambda-gradient machinery shared by every trainer: the pairwise
//! cross-entropy cost, its gradient, and the per-document residuals and
//! Newton weights obtained by marginalizing over document pairs.
//!
//! Convention: for each pair with distinct labels, the higher-labeled
//! document is pushed up. With `o` the score of the higher-labeled document
//! minus the lower-labeled one, `rho = 1/(1 + exp(o))`, and `g` the absolute
//! NDCG change of swapping the pair, the higher side accumulates `+g*rho`
//! and the lower side `-g*rho`; both sides accumulate the Newton weight
//! `g*rho*(1-rho)`.

use crate::data::Query;
use crate::error::{Error, Result};
use crate::metrics::{self, NdcgConfig};

/// Per-document residuals and Newton weights for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaGradients {
    pub residuals: Vec<f64>,
    pub newton_weights: Vec<f64>,
}

/// Pairwise cross-entropy cost `C = s_j - s_i + ln(1 + exp(s_i - s_j))`,
/// evaluated without overflow for any score gap.
pub fn pair_cost(s_i: f64, s_j: f64) -> f64 {
    let o = s_i - s_j;
    if o >= 0.0 {
        (-o).exp().ln_1p()
    } else {
        -o + o.exp().ln_1p()
    }
}

/// Derivative of [`pair_cost`] with respect to the score gap `o`:
/// `-1/(1 + exp(o))`, in (-1, 0).
pub fn pair_cost_gradient(o: f64) -> f64 {
    if o >= 0.0 {
        let e = (-o).exp();
        -e / (1.0 + e)
    } else {
        -1.0 / (1.0 + o.exp())
    }
}

/// Residuals and Newton weights for one query at the given scores.
///
/// Pairs with equal labels contribute nothing; queries whose ideal DCG is
/// zero yield all-zero gradients.
pub fn compute_lambdas(query: &Query, scores: &[f64], config: &NdcgConfig) -> Result<LambdaGradients> {
    let n = query.documents.len();
    if scores.len() != n {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: n,
        });
    }
    config.validate()?;

    let mut residuals = vec![0.0; n];
    let mut newton_weights = vec![0.0; n];

    let labels: Vec<u8> = query.documents.iter().map(|d| d.label).collect();
    let k = config.truncation;
    let ideal = metrics::ideal_dcg(&labels, k);
    if ideal == 0.0 {
        return Ok(LambdaGradients {
            residuals,
            newton_weights,
        });
    }

    let positions = metrics::rank_positions(scores);
    // truncated discount per document, indexed by document
    let disc: Vec<f64> = positions
        .iter()
        .map(|&p| {
            if p <= k {
                1.0 / (1.0 + p as f64).ln()
            } else {
                0.0
            }
        })
        .collect();
    let gains: Vec<f64> = labels.iter().map(|&l| (1u32 << l) as f64 - 1.0).collect();

    for i in 0..n {
        for j in (i + 1)..n {
            if labels[i] == labels[j] {
                continue;
            }
            let (hi, lo) = if labels[i] > labels[j] { (i, j) } else { (j, i) };
            let o = scores[hi] - scores[lo];
            let rho = -pair_cost_gradient(o);
            let g = ((gains[hi] - gains[lo]) * (disc[hi] - disc[lo]) / ideal).abs();
            residuals[hi] += g * rho;
            residuals[lo] -= g * rho;
            let w = g * rho * (1.0 - rho);
            newton_weights[hi] += w;
            newton_weights[lo] += w;
        }
    }

    Ok(LambdaGradients {
        residuals,
        newton_weights,
    })
}
