use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};

use rankadapt::augment::{knn_expand, select_seed_queries, AugmentConfig};
use rankadapt::data::{parse_letor, serialize_letor, Dataset};
use rankadapt::gbdt::{lambda_boost_traced, lambda_smart_traced, BoostConfig};
use rankadapt::interpolation::{
    optimize_weights_lambdarank, optimize_weights_powell, InterpolatedModel, PowellConfig,
};
use rankadapt::linear::{train_linear_lambdarank, TrainConfig};
use rankadapt::metrics::{mean_ndcg, paired_t_test, tsv_header, NdcgConfig};
use rankadapt::model::{ComponentRef, Model, ModelFile};
use rankadapt::Scorer;

use crate::{CliError, CliResult};

pub const REPORT_CUTOFFS: [usize; 3] = [1, 3, 10];

pub fn load_dataset(path: &Path) -> CliResult<Dataset> {
    let file = File::open(path)
        .map_err(|e| CliError::Usage(format!("cannot open {}: {e}", path.display())))?;
    parse_letor(BufReader::new(file))
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn load_model(path: &Path) -> CliResult<Model> {
    Model::load(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))
}

fn model_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Lexical relative path from `base` to `path`. Component references in a
/// model file resolve against that file's directory, so the written paths
/// must be rebased from the invocation directory onto the output file's.
fn relative_to(path: &Path, base: &Path) -> CliResult<PathBuf> {
    let absolutize = |p: &Path| -> CliResult<PathBuf> {
        std::path::absolute(p)
            .map_err(|e| CliError::Internal(format!("cannot resolve {}: {e}", p.display())))
    };
    let path = absolutize(path)?;
    let base = absolutize(base)?;
    let mut path_parts = path.components().peekable();
    let mut base_parts = base.components().peekable();
    while let (Some(a), Some(b)) = (path_parts.peek(), base_parts.peek()) {
        if a != b {
            break;
        }
        path_parts.next();
        base_parts.next();
    }
    let mut out = PathBuf::new();
    for _ in base_parts {
        out.push("..");
    }
    for part in path_parts {
        out.push(part);
    }
    Ok(out)
}

#[derive(Args)]
pub struct TrainArgs {
    /// Training data in LETOR format
    #[arg(long)]
    pub data: PathBuf,
    /// Output model file
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep query order fixed instead of reshuffling each epoch
    #[arg(long)]
    pub no_shuffle: bool,
}

pub fn train(args: &TrainArgs) -> CliResult<()> {
    if args.epochs < 1 {
        return Err(CliError::Usage("epochs must be >= 1".into()));
    }
    if !(args.lr > 0.0) {
        return Err(CliError::Usage("learning rate must be > 0".into()));
    }
    let dataset = load_dataset(&args.data)?;
    let config = TrainConfig {
        epochs: args.epochs,
        learning_rate: args.lr,
        seed: args.seed,
        shuffle: !args.no_shuffle,
    };
    let model = Model::Linear(train_linear_lambdarank(&dataset, &config)?);
    model.save(&args.out)?;
    let report = mean_ndcg(&dataset, &model, &NdcgConfig::default(), &REPORT_CUTOFFS)?;
    println!("ave_ndcg={:.6}", report.ave_ndcg);
    Ok(())
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum AdaptMethod {
    /// Single-feature basis stages
    Boost,
    /// Regression-tree stages with Newton leaf values
    Smart,
}

#[derive(Args)]
pub struct AdaptArgs {
    #[arg(long, value_enum)]
    pub method: AdaptMethod,
    /// Background model file
    #[arg(long)]
    pub background: PathBuf,
    /// Adaptation data in LETOR format
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 500)]
    pub rounds: usize,
    #[arg(long, default_value_t = 0.5)]
    pub shrinkage: f64,
    #[arg(long, default_value_t = 20)]
    pub leaves: usize,
    /// Draw row/feature subsamples before each node split
    #[arg(long)]
    pub randomize: bool,
    #[arg(long, default_value_t = 0.7)]
    pub sample_rate: f64,
    #[arg(long, default_value_t = 1)]
    pub min_leaf: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Print per-round training Ave-NDCG
    #[arg(long)]
    pub trace: bool,
}

pub fn adapt(args: &AdaptArgs) -> CliResult<()> {
    let background = load_model(&args.background)?;
    let dataset = load_dataset(&args.data)?;
    if background.feature_count() != dataset.feature_count {
        return Err(CliError::Usage(format!(
            "feature count mismatch: model {} has {}, data {} has {}",
            args.background.display(),
            background.feature_count(),
            args.data.display(),
            dataset.feature_count
        )));
    }
    let config = BoostConfig {
        rounds: args.rounds,
        shrinkage: args.shrinkage,
        leaves: args.leaves,
        min_samples_per_leaf: args.min_leaf,
        randomize: args.randomize,
        sample_rate: args.sample_rate,
        seed: args.seed,
    };
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let ndcg = NdcgConfig::default();

    let mut print_round = |round: usize, ave: f64| {
        println!("round={round} ave_ndcg={ave:.6}");
    };
    let trace = args.trace.then_some(&mut print_round as &mut dyn FnMut(usize, f64));
    let ensemble = match args.method {
        AdaptMethod::Boost => lambda_boost_traced(&background, &dataset, &config, &ndcg, trace)?,
        AdaptMethod::Smart => lambda_smart_traced(&background, &dataset, &config, &ndcg, trace)?,
    };
    let model = Model::Ensemble(ensemble);
    model.save(&args.out)?;
    let report = mean_ndcg(&dataset, &model, &ndcg, &REPORT_CUTOFFS)?;
    println!("ave_ndcg={:.6}", report.ave_ndcg);
    Ok(())
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum Optimizer {
    Powell,
    Lambdarank,
}

#[derive(Args)]
pub struct InterpolateArgs {
    /// Component model files (at least two)
    #[arg(long, num_args = 2.., required = true)]
    pub models: Vec<PathBuf>,
    /// Validation data the weights are tuned on
    #[arg(long)]
    pub valid: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Optimizer::Powell)]
    pub optimizer: Optimizer,
    #[arg(long, default_value_t = 20)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = 201)]
    pub grid: usize,
    #[arg(long, default_value_t = 2.0)]
    pub span: f64,
    #[arg(long, default_value_t = 3)]
    pub refine: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    /// Epochs for the lambdarank optimizer
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    /// Learning rate for the lambdarank optimizer
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn interpolate(args: &InterpolateArgs) -> CliResult<()> {
    if args.models.len() < 2 {
        return Err(CliError::Usage(
            "interpolation needs at least 2 --models".into(),
        ));
    }
    let components: Vec<Model> = args
        .models
        .iter()
        .map(|p| load_model(p))
        .collect::<CliResult<_>>()?;
    let feature_count = components[0].feature_count();
    for (model, path) in components.iter().zip(&args.models) {
        if model.feature_count() != feature_count {
            return Err(CliError::Usage(format!(
                "feature count mismatch: {} has {}, {} has {}",
                args.models[0].display(),
                feature_count,
                path.display(),
                model.feature_count()
            )));
        }
    }
    let validation = load_dataset(&args.valid)?;
    let ndcg = NdcgConfig::default();

    let alphas = match args.optimizer {
        Optimizer::Powell => {
            let config = PowellConfig {
                max_iterations: args.max_iterations,
                line_search_grid: args.grid,
                line_search_span: args.span,
                refine_levels: args.refine,
                tolerance: args.tolerance,
            };
            optimize_weights_powell(&components, &validation, &ndcg, &config)?
        }
        Optimizer::Lambdarank => {
            let config = TrainConfig {
                epochs: args.epochs,
                learning_rate: args.lr,
                seed: args.seed,
                shuffle: true,
            };
            optimize_weights_lambdarank(&components, &validation, &config)?
        }
    };

    let interpolated = InterpolatedModel::new(components, alphas.clone())?;
    let report = mean_ndcg(&validation, &interpolated, &ndcg, &REPORT_CUTOFFS)?;

    // the written file references the component models by path, rebased
    // onto the output file's directory
    let out_dir = args.out.parent().filter(|p| !p.as_os_str().is_empty());
    let components = args
        .models
        .iter()
        .map(|p| {
            let rebased = match out_dir {
                Some(base) => relative_to(p, base)?,
                None => p.clone(),
            };
            Ok(ComponentRef::Path(rebased.display().to_string()))
        })
        .collect::<CliResult<_>>()?;
    let file = ModelFile::Interpolated {
        feature_count,
        components,
        alphas: alphas.clone(),
    };
    let json = serde_json::to_string_pretty(&file)
        .map_err(|e| CliError::Internal(format!("serialize model: {e}")))?;
    write_file(&args.out, &json)?;

    let rendered: Vec<String> = alphas.iter().map(|a| format!("{a:.6}")).collect();
    println!("alphas={}", rendered.join(","));
    println!("ave_ndcg={:.6}", report.ave_ndcg);
    Ok(())
}

#[derive(Args)]
pub struct AugmentArgs {
    /// In-domain data the seed queries are drawn from
    #[arg(long)]
    pub in_domain: PathBuf,
    /// Background data to harvest from
    #[arg(long)]
    pub background: PathBuf,
    /// Output LETOR file for the expanded set
    #[arg(long)]
    pub out: PathBuf,
    /// Number of lowest-entropy seed queries (defaults to all)
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Cosine-distance acceptance threshold
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
}

pub fn augment(args: &AugmentArgs) -> CliResult<()> {
    let in_domain = load_dataset(&args.in_domain)?;
    let background = load_dataset(&args.background)?;
    let config = AugmentConfig {
        seed_query_count: args.seeds.unwrap_or(in_domain.queries.len()),
        neighbors: args.k,
        max_distance: args.epsilon,
    };
    let seeds = select_seed_queries(&in_domain, &config)?;
    let expanded = knn_expand(&seeds, &background, &config)?;
    write_file(&args.out, &serialize_letor(&expanded))?;
    println!(
        "accepted={} scanned={}",
        expanded.document_count(),
        background.document_count()
    );
    Ok(())
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Model files to evaluate (repeatable)
    #[arg(long = "model", required = true)]
    pub models: Vec<PathBuf>,
    /// Evaluation data in LETOR format
    #[arg(long)]
    pub data: PathBuf,
    /// Index into --model of the t-test baseline
    #[arg(long)]
    pub ttest_baseline: Option<usize>,
}

pub fn evaluate(args: &EvaluateArgs) -> CliResult<()> {
    let dataset = load_dataset(&args.data)?;
    if let Some(baseline) = args.ttest_baseline {
        if baseline >= args.models.len() {
            return Err(CliError::Usage(format!(
                "--ttest-baseline {baseline} out of range for {} models",
                args.models.len()
            )));
        }
    }

    let ndcg = NdcgConfig::default();
    let mut reports = Vec::new();
    println!("{}", tsv_header(&REPORT_CUTOFFS));
    for path in &args.models {
        let model = load_model(path)?;
        let report = mean_ndcg(&dataset, &model, &ndcg, &REPORT_CUTOFFS)?;
        println!("{}", report.tsv_row(&model_name(path)));
        reports.push(report);
    }

    if let Some(baseline) = args.ttest_baseline {
        let base_scores: Vec<f64> = reports[baseline]
            .per_query
            .iter()
            .map(|q| q.ave_ndcg)
            .collect();
        println!(
            "# paired t-test vs {} (per-query AveNDCG)",
            model_name(&args.models[baseline])
        );
        println!("model\tt\tp");
        for (index, report) in reports.iter().enumerate() {
            if index == baseline {
                continue;
            }
            let scores: Vec<f64> = report.per_query.iter().map(|q| q.ave_ndcg).collect();
            let (t, p) = paired_t_test(&scores, &base_scores)?;
            println!("{}\t{t:.4}\t{p:.4}", model_name(&args.models[index]));
        }
    }
    Ok(())
}
