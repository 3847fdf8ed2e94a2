//! Versioned JSON model bundle.

use std::fs;
use std::path::{Path, PathBuf};

use cogdist_core::classifier::{BinaryLogisticModel, FitDiagnostics, OvrModel, PipelineParams, TextClassifier};
use cogdist_core::textprep::NgramRange;
use cogdist_core::vectorize::{VocabParams, Vocabulary};
use cogdist_core::{Task, TaskLabel};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("cannot access model bundle {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt bundle: {0}")]
    Corrupt(String),
    #[error("unsupported version {found:?} (this build reads version {FORMAT_VERSION:?})")]
    UnsupportedVersion { found: String },
    #[error("length mismatch for class {class}: {expected} vocabulary terms but {found} weights")]
    LengthMismatch {
        class: String,
        expected: usize,
        found: usize,
    },
    #[error("invalid bundle: {0}")]
    Invalid(#[from] cogdist_core::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub ngram_range: NgramRange,
    pub min_df: usize,
    pub max_df: f64,
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl From<PipelineParams> for PipelineConfig {
    fn from(p: PipelineParams) -> Self {
        PipelineConfig {
            ngram_range: p.vocab.ngram_range,
            min_df: p.vocab.min_df,
            max_df: p.vocab.max_df,
            c: p.fit.c,
            tol: p.fit.tol,
            max_iter: p.fit.max_iter,
        }
    }
}

impl From<PipelineConfig> for PipelineParams {
    fn from(p: PipelineConfig) -> Self {
        PipelineParams {
            vocab: VocabParams::new(p.ngram_range, p.min_df, p.max_df),
            fit: cogdist_core::classifier::FitParams {
                c: p.c,
                tol: p.tol,
                max_iter: p.max_iter,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub label: TaskLabel,
    pub intercept: f64,
    pub weights: Vec<f64>,
    pub diagnostics: FitDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 of the training corpus file, hex.
    pub corpus_sha256: String,
    pub seed: Option<u64>,
    /// RFC 3339.
    pub created: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub format_version: String,
    pub task: Task,
    pub pipeline: PipelineConfig,
    pub vocabulary: Vocabulary,
    pub classes: Vec<ClassWeights>,
    pub provenance: Provenance,
}

impl ModelBundle {
    pub fn new(classifier: &TextClassifier, task: Task, params: PipelineParams, provenance: Provenance) -> Self {
        let classes = classifier
            .model
            .classes
            .iter()
            .zip(&classifier.model.models)
            .map(|(&label, m)| ClassWeights {
                label,
                intercept: m.intercept,
                weights: m.weights.clone(),
                diagnostics: FitDiagnostics {
                    objective_trace: Vec::new(),
                    ..m.diagnostics.clone()
                },
            })
            .collect();
        ModelBundle {
            format_version: FORMAT_VERSION.to_string(),
            task,
            pipeline: params.into(),
            vocabulary: classifier.vocabulary.clone(),
            classes,
            provenance,
        }
    }

    /// Checks the weight lengths and rebuilds the classifier.
    pub fn classifier(&self) -> Result<TextClassifier, BundleError> {
        let n = self.vocabulary.len();
        for c in &self.classes {
            if c.weights.len() != n {
                return Err(BundleError::LengthMismatch {
                    class: c.label.name().to_string(),
                    expected: n,
                    found: c.weights.len(),
                });
            }
            if c.label.task() != self.task {
                return Err(BundleError::Invalid(cogdist_core::Error::MixedTasks));
            }
        }
        let model = OvrModel {
            classes: self.classes.iter().map(|c| c.label).collect(),
            models: self
                .classes
                .iter()
                .map(|c| BinaryLogisticModel {
                    weights: c.weights.clone(),
                    intercept: c.intercept,
                    c: self.pipeline.c,
                    diagnostics: c.diagnostics.clone(),
                })
                .collect(),
        };
        let classifier = TextClassifier {
            vocabulary: self.vocabulary.clone(),
            model,
        };
        classifier.validate()?;
        Ok(classifier)
    }
}

pub fn save_model(bundle: &ModelBundle, path: &Path) -> Result<(), BundleError> {
    let mut text = serde_json::to_string_pretty(bundle).map_err(|e| BundleError::Corrupt(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|source| BundleError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a bundle. The version is checked before the rest of the document
/// is interpreted.
pub fn load_model(path: &Path) -> Result<ModelBundle, BundleError> {
    let text = fs::read_to_string(path).map_err(|source| BundleError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_bundle(&text)
}

pub fn parse_bundle(text: &str) -> Result<ModelBundle, BundleError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| BundleError::Corrupt(e.to_string()))?;
    let version = match value.get("format_version") {
        Some(serde_json::Value::String(s)) => s.clone(),
        Some(serde_json::Value::Number(n)) => n.to_string(),
        Some(_) => return Err(BundleError::Corrupt("format_version is not a string".into())),
        None => return Err(BundleError::Corrupt("missing format_version".into())),
    };
    if version != FORMAT_VERSION {
        return Err(BundleError::UnsupportedVersion { found: version });
    }
    let bundle: ModelBundle = serde_json::from_value(value).map_err(|e| BundleError::Corrupt(e.to_string()))?;
    bundle.classifier()?;
    Ok(bundle)
}
