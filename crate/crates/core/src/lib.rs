//! Learning-to-rank model adaptation.
//!
//! Adapts a background ranker to a small in-domain dataset through two
//! families of methods:
//!
//! * **Model interpolation** — a weighted sum of component rankers, with
//!   weights tuned on validation NDCG either by Powell's derivative-free
//!   search or by a lambda-gradient linear trainer
//!   ([`interpolation`]).
//! * **Error-driven boosting** — additive stages fit to per-document lambda
//!   residuals: single re-weighted features, or regression trees with
//!   Newton leaf steps ([`gbdt`]).
//!
//! Supporting pieces: query-grouped LETOR data ([`data`]), the NDCG metric
//! family and paired t-test ([`metrics`]), lambda gradients ([`lambda`]),
//! a linear baseline ranker ([`linear`]), kNN adaptation-data expansion
//! ([`augment`]), and JSON model persistence ([`model`]).

pub mod augment;
pub mod data;
pub mod error;
pub mod gbdt;
pub mod interpolation;
pub mod lambda;
pub mod linear;
pub mod metrics;
pub mod model;
pub mod scorer;

pub use data::{parse_letor, serialize_letor, split_dataset, Dataset, Document, Query};
pub use error::{Error, Result};
pub use gbdt::{lambda_boost, lambda_smart, BoostConfig, BoostedEnsemble, RegressionTree};
pub use interpolation::{
    optimize_weights_lambdarank, optimize_weights_powell, InterpolatedModel, PowellConfig,
};
pub use lambda::{compute_lambdas, LambdaGradients};
pub use linear::{train_linear_lambdarank, LinearModel, TrainConfig};
pub use metrics::{mean_ndcg, paired_t_test, MetricsReport, NdcgConfig};
pub use model::Model;
pub use scorer::Scorer;
