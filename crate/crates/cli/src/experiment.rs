//! Closed/open adaptation experiment runner.
//!
//! Trains linear baselines on the background and in-domain collections, runs
//! the requested adaptation methods, evaluates every model on the closed and
//! open test sets, and writes one TSV table per test set plus a `run.json`
//! manifest of seeds, configs, and versions. All stages are seeded, so a
//! rerun of the same spec is byte-identical.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use rankadapt::augment::{knn_expand, select_seed_queries, AugmentConfig};
use rankadapt::data::{merge_datasets, serialize_letor, Dataset};
use rankadapt::gbdt::{lambda_boost, lambda_smart, BoostConfig};
use rankadapt::interpolation::{optimize_weights_powell, InterpolatedModel, PowellConfig};
use rankadapt::linear::{train_linear_lambdarank, TrainConfig};
use rankadapt::metrics::{mean_ndcg, tsv_header, NdcgConfig};
use rankadapt::model::Model;

use crate::commands::{load_dataset, REPORT_CUTOFFS};
use crate::{CliError, CliResult};

#[derive(Args)]
pub struct ExperimentArgs {
    /// Experiment spec (JSON)
    #[arg(long)]
    pub spec: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainSpec {
    pub epochs: usize,
    pub learning_rate: f64,
    #[serde(default = "default_true")]
    pub shuffle: bool,
}

fn default_true() -> bool {
    true
}

impl TrainSpec {
    fn to_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            seed,
            shuffle: self.shuffle,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoostSpec {
    pub rounds: usize,
    pub shrinkage: f64,
    pub leaves: usize,
    #[serde(default)]
    pub randomize: bool,
    #[serde(default = "default_sample_rate")]
    pub sample_rate: f64,
    #[serde(default = "default_min_leaf")]
    pub min_samples_per_leaf: usize,
}

fn default_sample_rate() -> f64 {
    0.7
}

fn default_min_leaf() -> usize {
    1
}

impl BoostSpec {
    fn to_config(&self, seed: u64) -> BoostConfig {
        BoostConfig {
            rounds: self.rounds,
            shrinkage: self.shrinkage,
            leaves: self.leaves,
            min_samples_per_leaf: self.min_samples_per_leaf,
            randomize: self.randomize,
            sample_rate: self.sample_rate,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowellSpec {
    pub max_iterations: usize,
    pub line_search_grid: usize,
    pub line_search_span: f64,
    pub refine_levels: usize,
    pub tolerance: f64,
}

impl Default for PowellSpec {
    fn default() -> Self {
        let config = PowellConfig::default();
        PowellSpec {
            max_iterations: config.max_iterations,
            line_search_grid: config.line_search_grid,
            line_search_span: config.line_search_span,
            refine_levels: config.refine_levels,
            tolerance: config.tolerance,
        }
    }
}

impl PowellSpec {
    fn to_config(&self) -> PowellConfig {
        PowellConfig {
            max_iterations: self.max_iterations,
            line_search_grid: self.line_search_grid,
            line_search_span: self.line_search_span,
            refine_levels: self.refine_levels,
            tolerance: self.tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AugmentSpec {
    pub seed_queries: usize,
    pub neighbors: usize,
    pub epsilon: f64,
}

/// The experiment description. Dataset paths resolve against the spec
/// file's directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub background_train: String,
    pub in_domain_train: String,
    pub validation: String,
    pub closed_test: String,
    pub open_test: String,
    pub methods: Vec<String>,
    pub output_dir: String,
    pub seed: u64,
    pub background_train_config: TrainSpec,
    pub in_domain_train_config: TrainSpec,
    pub boost: BoostSpec,
    pub smart: BoostSpec,
    #[serde(default)]
    pub powell: PowellSpec,
    pub augment: AugmentSpec,
    /// Free-form provenance (e.g. generator parameters); carried into the
    /// run manifest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<serde_json::Value>,
}

const KNOWN_METHODS: [&str; 5] = [
    "baselines",
    "interpolate-2way",
    "interpolate-3way",
    "lambda-boost",
    "lambda-smart",
];

struct Stage<'a>(&'a str);

impl Stage<'_> {
    fn wrap<T>(&self, result: CliResult<T>) -> CliResult<T> {
        result.map_err(|e| match e {
            CliError::Usage(m) => CliError::Usage(format!("stage {}: {m}", self.0)),
            CliError::Degenerate(m) => CliError::Degenerate(format!("stage {}: {m}", self.0)),
            CliError::Internal(m) => CliError::Internal(format!("stage {}: {m}", self.0)),
        })
    }
}

pub fn run(args: &ExperimentArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.spec)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", args.spec.display())))?;
    let spec: ExperimentSpec = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", args.spec.display())))?;
    let base = args
        .spec
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    run_spec(&spec, &base)
}

pub fn run_spec(spec: &ExperimentSpec, base: &Path) -> CliResult<()> {
    for method in &spec.methods {
        if !KNOWN_METHODS.contains(&method.as_str()) {
            return Err(CliError::Usage(format!(
                "unknown method '{method}' (expected one of {KNOWN_METHODS:?})"
            )));
        }
    }

    let load = |name: &str| -> CliResult<(Dataset, PathBuf)> {
        let path = base.join(name);
        Ok((load_dataset(&path)?, path))
    };
    let (background_train, background_path) = Stage("load").wrap(load(&spec.background_train))?;
    let (in_domain_train, in_domain_path) = Stage("load").wrap(load(&spec.in_domain_train))?;
    let (validation, validation_path) = Stage("load").wrap(load(&spec.validation))?;
    let (closed_test, closed_path) = Stage("load").wrap(load(&spec.closed_test))?;
    let (open_test, open_path) = Stage("load").wrap(load(&spec.open_test))?;

    let named = [
        (&background_train, &background_path),
        (&in_domain_train, &in_domain_path),
        (&validation, &validation_path),
        (&closed_test, &closed_path),
        (&open_test, &open_path),
    ];
    for (dataset, path) in &named[1..] {
        if dataset.feature_count != background_train.feature_count {
            return Err(CliError::Usage(format!(
                "feature count mismatch: {} has {}, {} has {}",
                background_path.display(),
                background_train.feature_count,
                path.display(),
                dataset.feature_count
            )));
        }
    }

    let out_dir = base.join(&spec.output_dir);
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Internal(format!("cannot create {}: {e}", out_dir.display())))?;

    let ndcg = NdcgConfig::default();
    let wants = |m: &str| spec.methods.iter().any(|x| x == m);

    // baselines are the raw material of every method
    let background = Stage("train-background").wrap(
        train_linear_lambdarank(
            &background_train,
            &spec.background_train_config.to_config(spec.seed),
        )
        .map(Model::Linear)
        .map_err(CliError::from),
    )?;
    let in_domain = Stage("train-indomain").wrap(
        train_linear_lambdarank(
            &in_domain_train,
            &spec.in_domain_train_config.to_config(spec.seed.wrapping_add(1)),
        )
        .map(Model::Linear)
        .map_err(CliError::from),
    )?;

    let mut rows: Vec<(String, String, Model)> = vec![
        ("Back.".into(), "back.json".into(), background.clone()),
        ("In-domain".into(), "indomain.json".into(), in_domain.clone()),
    ];
    let mut e2_size = None;

    if wants("interpolate-2way") {
        let stage = Stage("interpolate-2way");
        let components = vec![background.clone(), in_domain.clone()];
        let alphas = stage.wrap(
            optimize_weights_powell(&components, &validation, &ndcg, &spec.powell.to_config())
                .map_err(CliError::from),
        )?;
        let model = stage.wrap(
            InterpolatedModel::new(components, alphas)
                .map(Model::Interpolated)
                .map_err(CliError::from),
        )?;
        rows.push(("2W-Interp.".into(), "interp2.json".into(), model));
    }

    if wants("interpolate-3way") {
        let stage = Stage("interpolate-3way");
        let augment_config = AugmentConfig {
            seed_query_count: spec.augment.seed_queries,
            neighbors: spec.augment.neighbors,
            max_distance: spec.augment.epsilon,
        };
        let seeds = stage.wrap(
            select_seed_queries(&in_domain_train, &augment_config).map_err(CliError::from),
        )?;
        let expanded = stage.wrap(
            knn_expand(&seeds, &background_train, &augment_config).map_err(CliError::from),
        )?;
        e2_size = Some(expanded.document_count());
        std::fs::write(out_dir.join("expanded.letor"), serialize_letor(&expanded))
            .map_err(|e| CliError::Internal(format!("cannot write expanded.letor: {e}")))?;

        // third component: trained on in-domain data merged with the
        // kNN-expanded set
        let augmented_train = if expanded.queries.is_empty() {
            in_domain_train.clone()
        } else {
            stage.wrap(merge_datasets(&in_domain_train, &expanded).map_err(CliError::from))?
        };
        let third = stage.wrap(
            train_linear_lambdarank(
                &augmented_train,
                &spec
                    .in_domain_train_config
                    .to_config(spec.seed.wrapping_add(2)),
            )
            .map(Model::Linear)
            .map_err(CliError::from),
        )?;
        let components = vec![background.clone(), in_domain.clone(), third];
        let alphas = stage.wrap(
            optimize_weights_powell(&components, &validation, &ndcg, &spec.powell.to_config())
                .map_err(CliError::from),
        )?;
        let model = stage.wrap(
            InterpolatedModel::new(components, alphas)
                .map(Model::Interpolated)
                .map_err(CliError::from),
        )?;
        rows.push(("3W-Interp.".into(), "interp3.json".into(), model));
    }

    if wants("lambda-boost") {
        let model = Stage("lambda-boost").wrap(
            lambda_boost(
                &background,
                &in_domain_train,
                &spec.boost.to_config(spec.seed.wrapping_add(3)),
                &ndcg,
            )
            .map(Model::Ensemble)
            .map_err(CliError::from),
        )?;
        rows.push(("λ-Boost".into(), "boost.json".into(), model));
    }

    if wants("lambda-smart") {
        let model = Stage("lambda-smart").wrap(
            lambda_smart(
                &background,
                &in_domain_train,
                &spec.smart.to_config(spec.seed.wrapping_add(4)),
                &ndcg,
            )
            .map(Model::Ensemble)
            .map_err(CliError::from),
        )?;
        rows.push(("λ-SMART".into(), "smart.json".into(), model));
    }

    for (_, file, model) in &rows {
        Stage("save-models").wrap(model.save(&out_dir.join(file)).map_err(CliError::from))?;
    }

    let evaluate_all = |dataset: &Dataset, table: &str| -> CliResult<String> {
        let stage = Stage("evaluate");
        let mut out = String::new();
        out.push_str(&tsv_header(&REPORT_CUTOFFS));
        out.push('\n');
        for (name, _, model) in &rows {
            let report =
                stage.wrap(mean_ndcg(dataset, model, &ndcg, &REPORT_CUTOFFS).map_err(CliError::from))?;
            out.push_str(&report.tsv_row(name));
            out.push('\n');
        }
        std::fs::write(out_dir.join(table), &out)
            .map_err(|e| CliError::Internal(format!("cannot write {table}: {e}")))?;
        Ok(out)
    };

    let closed_table = evaluate_all(&closed_test, "closed.tsv")?;
    let open_table = evaluate_all(&open_test, "open.tsv")?;

    let manifest = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "seed": spec.seed,
        "stage_seeds": {
            "background": spec.seed,
            "in_domain": spec.seed.wrapping_add(1),
            "augmented_third": spec.seed.wrapping_add(2),
            "lambda_boost": spec.seed.wrapping_add(3),
            "lambda_smart": spec.seed.wrapping_add(4),
        },
        "methods": spec.methods,
        "models": rows.iter().map(|(name, file, _)| {
            serde_json::json!({ "name": name, "file": file })
        }).collect::<Vec<_>>(),
        "expanded_set_size": e2_size,
        "configs": {
            "background_train": spec.background_train_config,
            "in_domain_train": spec.in_domain_train_config,
            "boost": spec.boost,
            "smart": spec.smart,
            "powell": spec.powell,
            "augment": spec.augment,
        },
        "generator": spec.generator,
    });
    std::fs::write(
        out_dir.join("run.json"),
        serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::Internal(format!("serialize manifest: {e}")))?,
    )
    .map_err(|e| CliError::Internal(format!("cannot write run.json: {e}")))?;

    print!("closed test ({})\n{closed_table}", spec.closed_test);
    print!("open test ({})\n{open_table}", spec.open_test);
    println!("results={}", out_dir.display());
    Ok(())
}
