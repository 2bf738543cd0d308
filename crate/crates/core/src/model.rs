//! Model persistence: a JSON document with a top-level `kind` of
//! `"linear"`, `"ensemble"`, or `"interpolated"`.
//!
//! Numbers are written in the shortest representation that parses back to
//! the same float, so a round trip through the file format scores
//! identically to the in-memory model. Ensemble backgrounds and
//! interpolation components may be inlined or referenced by file path;
//! relative paths resolve against the referring file's directory.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gbdt::{BasisFunction, BoostedEnsemble, RegressionTree, Stage, TreeNode};
use crate::interpolation::InterpolatedModel;
use crate::linear::LinearModel;
use crate::scorer::Scorer;

/// Any persistable ranking model.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Linear(LinearModel),
    Ensemble(BoostedEnsemble),
    Interpolated(InterpolatedModel),
}

impl Scorer for Model {
    fn feature_count(&self) -> usize {
        match self {
            Model::Linear(m) => m.feature_count(),
            Model::Ensemble(m) => m.feature_count(),
            Model::Interpolated(m) => m.feature_count(),
        }
    }

    fn score(&self, features: &[f64]) -> f64 {
        match self {
            Model::Linear(m) => m.score(features),
            Model::Ensemble(m) => m.score(features),
            Model::Interpolated(m) => m.score(features),
        }
    }
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Linear(_) => "linear",
            Model::Ensemble(_) => "ensemble",
            Model::Interpolated(_) => "interpolated",
        }
    }

    /// Reads a model file, resolving relative component references against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Model> {
        let text = fs::read_to_string(path)?;
        let file: ModelFile = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        file.into_model(base, 0)
    }

    /// Writes the model with every component inlined.
    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    /// Serializes the model (fully inline) as pretty JSON.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelFile::from_model(self))?)
    }

    /// Parses a model document; `base` resolves relative component paths.
    pub fn from_json(text: &str, base: &Path) -> Result<Model> {
        let file: ModelFile = serde_json::from_str(text)?;
        file.into_model(base, 0)
    }
}

const MAX_REFERENCE_DEPTH: usize = 32;

/// The on-disk schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelFile {
    Linear {
        feature_count: usize,
        weights: Vec<f64>,
    },
    Ensemble {
        feature_count: usize,
        background: ComponentRef,
        shrinkage: f64,
        stages: Vec<StageFile>,
    },
    Interpolated {
        feature_count: usize,
        components: Vec<ComponentRef>,
        alphas: Vec<f64>,
    },
}

/// A nested model or a path to another model file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComponentRef {
    Path(String),
    Inline(Box<ModelFile>),
}

/// One boosting stage on disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum StageFile {
    Feature {
        feature_index: usize,
        coefficient: f64,
    },
    Tree {
        tree: TreeNodeFile,
    },
}

/// Tree nodes nest directly in the document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNodeFile {
    Internal {
        feature_index: usize,
        threshold: f64,
        left: Box<TreeNodeFile>,
        right: Box<TreeNodeFile>,
    },
    Leaf {
        value: f64,
    },
}

impl ModelFile {
    pub fn from_model(model: &Model) -> ModelFile {
        match model {
            Model::Linear(m) => ModelFile::Linear {
                feature_count: m.weights.len(),
                weights: m.weights.clone(),
            },
            Model::Ensemble(m) => ModelFile::Ensemble {
                feature_count: m.feature_count,
                background: ComponentRef::Inline(Box::new(ModelFile::from_model(&m.background))),
                shrinkage: m.shrinkage,
                stages: m.stages.iter().map(StageFile::from_stage).collect(),
            },
            Model::Interpolated(m) => ModelFile::Interpolated {
                feature_count: m.feature_count(),
                components: m
                    .components
                    .iter()
                    .map(|c| ComponentRef::Inline(Box::new(ModelFile::from_model(c))))
                    .collect(),
                alphas: m.alphas.clone(),
            },
        }
    }

    pub fn into_model(self, base: &Path, depth: usize) -> Result<Model> {
        if depth > MAX_REFERENCE_DEPTH {
            return Err(Error::ModelFormat(
                "component reference depth exceeded".into(),
            ));
        }
        match self {
            ModelFile::Linear {
                feature_count,
                weights,
            } => {
                if weights.len() != feature_count {
                    return Err(Error::ModelFormat(format!(
                        "linear model declares {feature_count} features but has {} weights",
                        weights.len()
                    )));
                }
                if weights.iter().any(|w| !w.is_finite()) {
                    return Err(Error::ModelFormat("non-finite weight".into()));
                }
                Ok(Model::Linear(LinearModel::new(weights)))
            }
            ModelFile::Ensemble {
                feature_count,
                background,
                shrinkage,
                stages,
            } => {
                if !(shrinkage > 0.0 && shrinkage <= 1.0) {
                    return Err(Error::ModelFormat("shrinkage must be in (0, 1]".into()));
                }
                let background = background.into_model(base, depth + 1)?;
                if background.feature_count() != feature_count {
                    return Err(Error::ModelFormat(format!(
                        "ensemble declares {feature_count} features but its background has {}",
                        background.feature_count()
                    )));
                }
                let stages = stages
                    .into_iter()
                    .map(|s| s.into_stage(feature_count))
                    .collect::<Result<_>>()?;
                Ok(Model::Ensemble(BoostedEnsemble {
                    background: Box::new(background),
                    shrinkage,
                    stages,
                    feature_count,
                }))
            }
            ModelFile::Interpolated {
                feature_count,
                components,
                alphas,
            } => {
                let components: Vec<Model> = components
                    .into_iter()
                    .map(|c| c.into_model(base, depth + 1))
                    .collect::<Result<_>>()?;
                for component in &components {
                    if component.feature_count() != feature_count {
                        return Err(Error::ModelFormat(format!(
                            "interpolated model declares {feature_count} features but a component has {}",
                            component.feature_count()
                        )));
                    }
                }
                InterpolatedModel::new(components, alphas)
                    .map(Model::Interpolated)
                    .map_err(|e| Error::ModelFormat(e.to_string()))
            }
        }
    }
}

impl ComponentRef {
    fn into_model(self, base: &Path, depth: usize) -> Result<Model> {
        match self {
            ComponentRef::Inline(file) => file.into_model(base, depth),
            ComponentRef::Path(path) => {
                if depth > MAX_REFERENCE_DEPTH {
                    return Err(Error::ModelFormat(
                        "component reference depth exceeded".into(),
                    ));
                }
                let resolved = base.join(&path);
                let text = fs::read_to_string(&resolved).map_err(|e| {
                    Error::ModelFormat(format!(
                        "cannot read component '{}': {e}",
                        resolved.display()
                    ))
                })?;
                let file: ModelFile = serde_json::from_str(&text)?;
                let next_base = resolved.parent().unwrap_or_else(|| Path::new("."));
                file.into_model(next_base, depth + 1)
            }
        }
    }
}

impl StageFile {
    fn from_stage(stage: &Stage) -> StageFile {
        match &stage.basis {
            BasisFunction::SingleFeature { feature_index } => StageFile::Feature {
                feature_index: *feature_index,
                coefficient: stage.coefficient,
            },
            BasisFunction::Tree(tree) => StageFile::Tree {
                tree: TreeNodeFile::from_node(&tree.root),
            },
        }
    }

    fn into_stage(self, feature_count: usize) -> Result<Stage> {
        match self {
            StageFile::Feature {
                feature_index,
                coefficient,
            } => {
                if feature_index >= feature_count {
                    return Err(Error::ModelFormat(format!(
                        "stage feature index {feature_index} out of range for {feature_count} features"
                    )));
                }
                if !coefficient.is_finite() {
                    return Err(Error::ModelFormat("non-finite stage coefficient".into()));
                }
                Ok(Stage {
                    basis: BasisFunction::SingleFeature { feature_index },
                    coefficient,
                })
            }
            StageFile::Tree { tree } => {
                let root = tree.into_node(feature_count)?;
                Ok(Stage {
                    basis: BasisFunction::Tree(RegressionTree::new(root)),
                    coefficient: 1.0,
                })
            }
        }
    }
}

impl TreeNodeFile {
    fn from_node(node: &TreeNode) -> TreeNodeFile {
        match node {
            TreeNode::Leaf { value } => TreeNodeFile::Leaf { value: *value },
            TreeNode::Internal {
                feature_index,
                threshold,
                left,
                right,
            } => TreeNodeFile::Internal {
                feature_index: *feature_index,
                threshold: *threshold,
                left: Box::new(TreeNodeFile::from_node(left)),
                right: Box::new(TreeNodeFile::from_node(right)),
            },
        }
    }

    fn into_node(self, feature_count: usize) -> Result<TreeNode> {
        match self {
            TreeNodeFile::Leaf { value } => {
                if !value.is_finite() {
                    return Err(Error::ModelFormat("non-finite leaf value".into()));
                }
                Ok(TreeNode::Leaf { value })
            }
            TreeNodeFile::Internal {
                feature_index,
                threshold,
                left,
                right,
            } => {
                if feature_index >= feature_count {
                    return Err(Error::ModelFormat(format!(
                        "tree split on feature {feature_index} out of range for {feature_count} features"
                    )));
                }
                Ok(TreeNode::Internal {
                    feature_index,
                    threshold,
                    left: Box::new(left.into_node(feature_count)?),
                    right: Box::new(right.into_node(feature_count)?),
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gbdt::{BasisFunction, Stage};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample_ensemble() -> Model {
        let tree = RegressionTree::new(TreeNode::Internal {
            feature_index: 0,
            threshold: 0.5,
            left: Box::new(TreeNode::Leaf { value: -0.75 }),
            right: Box::new(TreeNode::Internal {
                feature_index: 2,
                threshold: 1.25,
                left: Box::new(TreeNode::Leaf { value: 0.1 }),
                right: Box::new(TreeNode::Leaf { value: 2.5 }),
            }),
        });
        Model::Ensemble(BoostedEnsemble {
            background: Box::new(Model::Linear(LinearModel::new(vec![0.3, -0.2, 0.7]))),
            shrinkage: 0.5,
            stages: vec![
                Stage {
                    basis: BasisFunction::SingleFeature { feature_index: 1 },
                    coefficient: 0.123456789012345,
                },
                Stage {
                    basis: BasisFunction::Tree(tree),
                    coefficient: 1.0,
                },
            ],
            feature_count: 3,
        })
    }

    fn sample_interpolated() -> Model {
        Model::Interpolated(
            InterpolatedModel::new(
                vec![sample_ensemble(), Model::Linear(LinearModel::new(vec![1.0, 2.0, 3.0]))],
                vec![0.7, -0.3],
            )
            .unwrap(),
        )
    }

    #[test]
    fn round_trip_scores_exactly() {
        let model = sample_interpolated();
        let json = model.to_json().unwrap();
        let parsed = Model::from_json(&json, Path::new(".")).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-10.0..10.0)).collect();
            assert_eq!(model.score(&x), parsed.score(&x));
        }
        assert_eq!(parsed.feature_count(), 3);
        assert_eq!(parsed.kind(), "interpolated");
    }

    #[test]
    fn path_references_resolve_relative_to_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let linear = Model::Linear(LinearModel::new(vec![1.5, -2.5]));
        linear.save(&dir.path().join("component.json")).unwrap();

        let doc = r#"{
            "kind": "interpolated",
            "feature_count": 2,
            "components": ["component.json", "component.json"],
            "alphas": [0.5, 0.5]
        }"#;
        let path = dir.path().join("top.json");
        std::fs::write(&path, doc).unwrap();

        let model = Model::load(&path).unwrap();
        assert_eq!(model.score(&[1.0, 1.0]), linear.score(&[1.0, 1.0]));
    }

    #[test]
    fn invalid_documents_are_rejected() {
        let base = Path::new(".");
        // wrong weight count
        let bad = r#"{"kind": "linear", "feature_count": 3, "weights": [1.0]}"#;
        assert!(Model::from_json(bad, base).is_err());
        // shrinkage out of range
        let bad = r#"{
            "kind": "ensemble", "feature_count": 1, "shrinkage": 1.5,
            "background": {"kind": "linear", "feature_count": 1, "weights": [0.0]},
            "stages": []
        }"#;
        assert!(Model::from_json(bad, base).is_err());
        // stage indexing past the declared dimensionality
        let bad = r#"{
            "kind": "ensemble", "feature_count": 1, "shrinkage": 0.5,
            "background": {"kind": "linear", "feature_count": 1, "weights": [0.0]},
            "stages": [{"type": "feature", "feature_index": 4, "coefficient": 1.0}]
        }"#;
        assert!(Model::from_json(bad, base).is_err());
        // unknown kind
        let bad = r#"{"kind": "mystery", "feature_count": 1}"#;
        assert!(Model::from_json(bad, base).is_err());
    }

    #[test]
    fn missing_component_file_is_a_model_error() {
        let doc = r#"{
            "kind": "interpolated",
            "feature_count": 1,
            "components": ["nope.json", "nope.json"],
            "alphas": [1.0, 1.0]
        }"#;
        let err = Model::from_json(doc, Path::new("/definitely/missing")).unwrap_err();
        assert!(err.to_string().contains("nope.json"));
    }
}
