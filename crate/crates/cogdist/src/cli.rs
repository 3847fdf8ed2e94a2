//! The `cogdist` command line.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use cogdist_core::classifier::{FitParams, PipelineParams, TextClassifier};
use cogdist_core::corpus::{adjudicate, corpus_task, stratified_kfold, validate_corpus, LabeledPassage};
use cogdist_core::evaluation::{evaluate_classifier, grid_search, nested_cv, HyperparamGrid, NestedCvConfig, Solver};
use cogdist_core::exploration::{
    class_profiles_lda, class_profiles_tfidf, count_documents, lda_fit, similarity_matrix, ward_cluster, LdaParams,
};
use cogdist_core::synth::{generate, DocsPerClass, SynthConfig};
use cogdist_core::textprep::{analyze, NgramRange, TermSequence};
use cogdist_core::vectorize::{fit_vocabulary, VocabParams};
use cogdist_core::{Task, TaskLabel};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bundle::{load_model, save_model, ModelBundle, Provenance};
use crate::error::CliError;
use crate::io::{
    load_corpus, load_labeled, output_path, read_to_string, write_json, write_jsonl, write_text, CorpusFormat,
};
use crate::manifest::Manifest;
use crate::report;

#[derive(Debug, Parser)]
#[command(
    name = "cogdist",
    version,
    about = "Cognitive distortion detection and classification toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate an annotated corpus and rewrite it as normalized JSONL.
    Ingest(IngestArgs),
    /// Majority-vote adjudication into single task labels.
    Adjudicate(AdjudicateArgs),
    /// Stratified fold assignment.
    Split(SplitArgs),
    /// Fit the tf-idf + one-vs-rest pipeline and save a model bundle.
    Train(TrainArgs),
    /// Score a saved model, or run nested cross-validation.
    Eval(EvalArgs),
    /// Label passages with a saved model.
    Predict(PredictArgs),
    /// Most discriminative terms per class.
    Terms(TermsArgs),
    /// Ward clustering of per-class tf-idf profiles.
    Cluster(ClusterArgs),
    /// LDA topic model.
    Topics(TopicsArgs),
    /// Cosine similarity between class profiles.
    Sim(SimArgs),
    /// Generate a synthetic annotated corpus.
    Synth(SynthArgs),
    /// Print the terms extracted from a text.
    Tokens(TokensArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskArg {
    Detect,
    Classify,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Task {
        match t {
            TaskArg::Detect => Task::Detection,
            TaskArg::Classify => Task::Classification,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Tfidf,
    Lda,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Default,
    Crowd,
    Clinical,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Defaults to the file extension.
    #[arg(long, value_enum)]
    pub format: Option<CorpusFormat>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct AdjudicateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<CorpusFormat>,
    #[arg(long, value_enum)]
    pub task: TaskArg,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Adjudicated JSONL.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Pipeline flags of `train`; unset flags fall back to the config file.
#[derive(Debug, Args, Default)]
pub struct PipelineFlags {
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// `1-1` or `1-2`.
    #[arg(long)]
    pub ngram: Option<NgramRange>,
    #[arg(long)]
    pub min_df: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub max_df: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

/// Optional fields of a `train` config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineFile {
    pub c: Option<f64>,
    pub ngram_range: Option<NgramRange>,
    pub min_df: Option<usize>,
    pub max_df: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

impl PipelineFlags {
    /// Flag over file over default.
    pub fn resolve(&self, file: &PipelineFile) -> Result<PipelineParams, CliError> {
        let d = FitParams::default();
        let params = PipelineParams {
            vocab: VocabParams::new(
                self.ngram.or(file.ngram_range).unwrap_or(NgramRange::UNI_BI),
                self.min_df.or(file.min_df).unwrap_or(1),
                self.max_df.or(file.max_df).unwrap_or(1.0),
            ),
            fit: FitParams {
                c: self.c.or(file.c).unwrap_or(d.c),
                tol: self.tol.or(file.tol).unwrap_or(d.tol),
                max_iter: self.max_iter.or(file.max_iter).unwrap_or(d.max_iter),
            },
        };
        params.vocab.validate().map_err(usage)?;
        params.fit.validate().map_err(usage)?;
        Ok(params)
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Adjudicated JSONL.
    #[arg(long)]
    pub input: PathBuf,
    /// JSON file with any of c, ngram_range, min_df, max_df, tol, max_iter.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub pipeline: PipelineFlags,
    /// Select hyperparameters by inner cross-validation over this grid first.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub inner: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Adjudicated JSONL.
    #[arg(long)]
    pub input: PathBuf,
    /// Score this bundle on the input.
    #[arg(long, conflicts_with = "nested", required_unless_present = "nested")]
    pub model: Option<PathBuf>,
    /// Nested cross-validation with grid search in the inner loop.
    #[arg(long)]
    pub nested: bool,
    #[arg(long, default_value_t = 5)]
    pub outer: usize,
    #[arg(long, default_value_t = 3)]
    pub inner: usize,
    /// JSON grid `{"c": [...], "ngram_range": [...], "min_df": [...], "max_df": [...]}`.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Passage text; repeatable.
    #[arg(long)]
    pub text: Vec<String>,
    /// JSONL with a "text" field (and optionally "id") per line.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Also write predictions.jsonl and a manifest here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TermsArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct VocabFlags {
    #[arg(long, default_value = "1-2")]
    pub ngram: NgramRange,
    #[arg(long, default_value_t = 1)]
    pub min_df: usize,
    #[arg(long, default_value_t = 1.0)]
    pub max_df: f64,
}

impl VocabFlags {
    fn params(&self) -> Result<VocabParams, CliError> {
        let p = VocabParams::new(self.ngram, self.min_df, self.max_df);
        p.validate().map_err(usage)?;
        Ok(p)
    }
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// Adjudicated classification JSONL.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub vocab: VocabFlags,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct LdaFlags {
    /// Number of topics.
    #[arg(long = "k", default_value_t = 25)]
    pub topics: usize,
    #[arg(long, default_value_t = 1000)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.01)]
    pub beta: f64,
    /// Document-frequency floor of the count vocabulary.
    #[arg(long = "lda-min-df", default_value_t = 2)]
    pub lda_min_df: usize,
}

impl LdaFlags {
    fn params(&self) -> Result<LdaParams, CliError> {
        if self.topics == 0 || self.sweeps == 0 {
            return Err(CliError::Usage("--k and --sweeps must be positive".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite() && self.beta > 0.0 && self.beta.is_finite()) {
            return Err(CliError::Usage("--alpha and --beta must be positive".into()));
        }
        if self.lda_min_df == 0 {
            return Err(CliError::Usage("--lda-min-df must be at least 1".into()));
        }
        Ok(LdaParams {
            k: self.topics,
            alpha: self.alpha,
            beta: self.beta,
            sweeps: self.sweeps,
            seed: self.seed,
        })
    }
}

#[derive(Debug, Args)]
pub struct TopicsArgs {
    /// Adjudicated JSONL.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub lda: LdaFlags,
    /// Terms listed per topic.
    #[arg(long, default_value_t = 20)]
    pub top: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// Adjudicated classification JSONL.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Space::Tfidf)]
    pub space: Space,
    #[command(flatten)]
    pub vocab: VocabFlags,
    #[command(flatten)]
    pub lda: LdaFlags,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// JSON file with any SynthConfig fields; applied on top of the preset.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Preset::Default)]
    pub preset: Preset,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub docs_per_class: Option<usize>,
    #[arg(long)]
    pub signature_probability: Option<f64>,
    #[arg(long)]
    pub signature_terms: Option<usize>,
    #[arg(long)]
    pub annotators: Option<usize>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub not_distorted_fraction: Option<f64>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct TokensArgs {
    #[arg(long)]
    pub text: String,
    #[arg(long, default_value = "1-2")]
    pub ngram: NgramRange,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Ingest(a) => ingest(a),
        Command::Adjudicate(a) => adjudicate_cmd(a),
        Command::Split(a) => split(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::Predict(a) => predict(a),
        Command::Terms(a) => terms(a),
        Command::Cluster(a) => cluster(a),
        Command::Topics(a) => topics(a),
        Command::Sim(a) => sim(a),
        Command::Synth(a) => synth(a),
        Command::Tokens(a) => tokens(a),
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn read_config<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

/// Writes each `(name, contents)` pair and the manifest into `dir`.
fn finish(dir: &Path, mut manifest: Manifest, files: Vec<(&str, String)>) -> Result<(), CliError> {
    for (name, contents) in files {
        write_text(&output_path(dir, name)?, &contents)?;
        manifest.outputs.push(name.to_string());
    }
    write_json(&output_path(dir, "manifest.json")?, &manifest)
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn to_jsonl<T: Serialize>(items: &[T]) -> String {
    let mut s = String::new();
    for item in items {
        s.push_str(&serde_json::to_string(item).expect("record serializes"));
        s.push('\n');
    }
    s
}

fn load_labeled_input(path: &Path, manifest: &mut Manifest) -> Result<Vec<LabeledPassage>, CliError> {
    manifest.input(path)?;
    let corpus = load_labeled(path)?;
    if corpus.is_empty() {
        return Err(cogdist_core::Error::EmptyCorpus.into());
    }
    corpus_task(&corpus)?;
    Ok(corpus)
}

fn require_classification(corpus: &[LabeledPassage]) -> Result<(), CliError> {
    if corpus_task(corpus)? != Task::Classification {
        return Err(CliError::Usage("this command needs a classification corpus".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct IngestSummary {
    passages: usize,
    annotations: usize,
    annotators_per_passage: BTreeMap<usize, usize>,
    label_votes: BTreeMap<String, usize>,
    empty_votes: usize,
}

fn ingest(a: IngestArgs) -> Result<(), CliError> {
    let mut manifest = Manifest::new("ingest", &serde_json::json!({ "format": a.format }));
    manifest.input(&a.input)?;
    let corpus = load_corpus(&a.input, a.format)?;
    validate_corpus(&corpus)?;
    let mut summary = IngestSummary {
        passages: corpus.len(),
        annotations: 0,
        annotators_per_passage: BTreeMap::new(),
        label_votes: BTreeMap::new(),
        empty_votes: 0,
    };
    for p in &corpus {
        summary.annotations += p.annotations.len();
        *summary.annotators_per_passage.entry(p.annotations.len()).or_default() += 1;
        for ann in &p.annotations {
            if ann.labels.is_empty() {
                summary.empty_votes += 1;
            }
            for l in &ann.labels {
                *summary.label_votes.entry(l.name().to_string()).or_default() += 1;
            }
        }
    }
    finish(
        &a.out_dir,
        manifest,
        vec![("corpus.jsonl", to_jsonl(&corpus)), ("summary.json", to_json(&summary))],
    )
}

#[derive(Serialize)]
struct AdjudicationSummary {
    task: Task,
    input: usize,
    kept: usize,
    discarded: usize,
    label_counts: BTreeMap<String, usize>,
}

fn adjudicate_cmd(a: AdjudicateArgs) -> Result<(), CliError> {
    let task: Task = a.task.into();
    let mut manifest = Manifest::new("adjudicate", &serde_json::json!({ "format": a.format, "task": task }));
    manifest.input(&a.input)?;
    let corpus = load_corpus(&a.input, a.format)?;
    let result = adjudicate(&corpus, task)?;
    let mut label_counts = BTreeMap::new();
    for p in &result.kept {
        *label_counts.entry(p.label.name().to_string()).or_default() += 1;
    }
    let summary = AdjudicationSummary {
        task,
        input: corpus.len(),
        kept: result.kept_count(),
        discarded: result.discarded_count(),
        label_counts,
    };
    finish(
        &a.out_dir,
        manifest,
        vec![
            ("adjudicated.jsonl", to_jsonl(&result.kept)),
            ("discarded.json", to_json(&result.discarded)),
            ("summary.json", to_json(&summary)),
        ],
    )
}

fn split(a: SplitArgs) -> Result<(), CliError> {
    let mut manifest = Manifest::new("split", &serde_json::json!({ "k": a.k, "seed": a.seed }));
    manifest.seed("split", a.seed);
    let corpus = load_labeled_input(&a.input, &mut manifest)?;
    if a.k < 2 || a.k > corpus.len() {
        return Err(CliError::Usage(format!("--k must lie in 2..={}", corpus.len())));
    }
    let folds = stratified_kfold(&corpus, a.k, a.seed)?;
    let mut csv = String::from("id,fold\n");
    for p in &corpus {
        csv.push_str(&format!(
            "{},{}\n",
            csv_field(&p.id),
            folds.fold_of(&p.id).unwrap_or_default()
        ));
    }
    finish(
        &a.out_dir,
        manifest,
        vec![("folds.json", to_json(&folds)), ("folds.csv", csv)],
    )
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Serialize)]
struct TrainConfig {
    pipeline: crate::bundle::PipelineConfig,
    grid: Option<HyperparamGrid>,
    inner: usize,
    seed: u64,
}

fn train(a: TrainArgs) -> Result<(), CliError> {
    let file: PipelineFile = match &a.config {
        Some(p) => read_config(p)?,
        None => PipelineFile::default(),
    };
    let mut params = a.pipeline.resolve(&file)?;
    let grid: Option<HyperparamGrid> = a.grid.as_deref().map(read_config).transpose()?;
    if let Some(g) = &grid {
        g.validate().map_err(usage)?;
    }

    let mut inputs = Manifest::new("train", &());
    let corpus = load_labeled_input(&a.input, &mut inputs)?;
    let corpus_sha256 = inputs.inputs[0].sha256.clone();
    let task = corpus_task(&corpus)?;
    let mut search = None;
    if let Some(g) = &grid {
        let solver = Solver {
            tol: params.fit.tol,
            max_iter: params.fit.max_iter,
        };
        let result = grid_search(&corpus, g, a.inner, a.seed, solver)?;
        params = result.best.pipeline(solver);
        search = Some(result);
    }
    let classifier = TextClassifier::fit(&corpus, &task.classes(), params)?;

    let config = TrainConfig {
        pipeline: params.into(),
        grid,
        inner: a.inner,
        seed: a.seed,
    };
    let mut manifest = Manifest::new("train", &config);
    manifest.inputs = inputs.inputs;
    if let Some(c) = &a.config {
        manifest.input(c)?;
    }
    if let Some(g) = &a.grid {
        manifest.input(g)?;
    }
    manifest.seed("grid_search", a.seed);
    let bundle = ModelBundle::new(
        &classifier,
        task,
        params,
        Provenance {
            corpus_sha256,
            seed: Some(a.seed),
            created: manifest.timestamp.clone(),
        },
    );
    let model_path = output_path(&a.out_dir, "model.json")?;
    save_model(&bundle, &model_path)?;
    manifest.outputs.push("model.json".into());
    let diagnostics: Vec<_> = classifier
        .model
        .classes
        .iter()
        .zip(&classifier.model.models)
        .map(|(l, m)| serde_json::json!({ "label": l, "diagnostics": m.diagnostics }))
        .collect();
    let mut files = vec![("fit.json", to_json(&diagnostics))];
    if let Some(s) = &search {
        files.push(("grid_search.json", to_json(s)));
    }
    finish(&a.out_dir, manifest, files)
}

fn eval(a: EvalArgs) -> Result<(), CliError> {
    if let Some(model) = &a.model {
        let mut manifest = Manifest::new("eval", &serde_json::json!({ "mode": "model" }));
        let corpus = load_labeled_input(&a.input, &mut manifest)?;
        manifest.input(model)?;
        let bundle = load_model(model)?;
        if corpus_task(&corpus)? != bundle.task {
            return Err(CliError::Usage(format!(
                "model was trained for {} but the corpus is not",
                bundle.task.name()
            )));
        }
        let report = evaluate_classifier(&bundle.classifier()?, &corpus)?;
        return finish(
            &a.out_dir,
            manifest,
            vec![
                ("eval.json", to_json(&report)),
                ("eval.csv", report::evaluation_csv(&report)),
            ],
        );
    }

    let grid = match &a.grid {
        Some(p) => read_config::<HyperparamGrid>(p)?,
        None => HyperparamGrid::default(),
    };
    grid.validate().map_err(usage)?;
    let d = Solver::default();
    let config = NestedCvConfig {
        outer_k: a.outer,
        inner_k: a.inner,
        seed: a.seed,
        solver: Solver {
            tol: a.tol.unwrap_or(d.tol),
            max_iter: a.max_iter.unwrap_or(d.max_iter),
        },
    };
    FitParams {
        c: 1.0,
        tol: config.solver.tol,
        max_iter: config.solver.max_iter,
    }
    .validate()
    .map_err(usage)?;
    if a.outer < 2 || a.inner < 2 {
        return Err(CliError::Usage("--outer and --inner must be at least 2".into()));
    }
    let mut manifest = Manifest::new(
        "eval",
        &serde_json::json!({ "mode": "nested", "cv": config, "grid": grid }),
    );
    manifest.seed("outer", a.seed);
    let corpus = load_labeled_input(&a.input, &mut manifest)?;
    if let Some(g) = &a.grid {
        manifest.input(g)?;
    }
    let cv = nested_cv(&corpus, &grid, config)?;

    let mut preds = String::from("id,fold,truth,predicted\n");
    for p in &cv.predictions {
        preds.push_str(&format!(
            "{},{},{},{}\n",
            csv_field(&p.id),
            p.fold,
            csv_field(p.truth.name()),
            csv_field(p.predicted.name())
        ));
    }
    let mut folds = String::from("fold,n_train,n_test,c,ngram_range,min_df,max_df,weighted_f1\n");
    for f in &cv.folds {
        folds.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            f.fold,
            f.n_train,
            f.n_test,
            f.chosen.c,
            f.chosen.ngram_range,
            f.chosen.min_df,
            f.chosen.max_df,
            f.report
                .as_ref()
                .map_or(String::new(), |r| format!("{:.4}", r.weighted.f1))
        ));
    }
    finish(
        &a.out_dir,
        manifest,
        vec![
            ("cv_report.json", to_json(&cv)),
            ("eval.json", to_json(&cv.pooled)),
            ("eval.csv", report::evaluation_csv(&cv.pooled)),
            ("folds.csv", folds),
            ("predictions.csv", preds),
        ],
    )
}

#[derive(Deserialize)]
struct TextRecord {
    id: Option<String>,
    text: String,
}

#[derive(Serialize)]
struct PredictionRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    label: TaskLabel,
    probability: f64,
}

fn predict(a: PredictArgs) -> Result<(), CliError> {
    let mut manifest = Manifest::new("predict", &serde_json::json!({ "texts": a.text.len() }));
    manifest.input(&a.model)?;
    let bundle = load_model(&a.model)?;
    let classifier = bundle.classifier()?;
    let mut records: Vec<TextRecord> = a
        .text
        .iter()
        .map(|t| TextRecord {
            id: None,
            text: t.clone(),
        })
        .collect();
    if let Some(path) = &a.input {
        manifest.input(path)?;
        let data = read_to_string(path)?;
        for (i, line) in data.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let r: TextRecord = serde_json::from_str(line).map_err(|e| crate::error::LoadError::Malformed {
                line: i as u64 + 1,
                message: e.to_string(),
            })?;
            records.push(r);
        }
    }
    if records.is_empty() {
        return Err(CliError::Usage("give --text or --input".into()));
    }
    let out: Vec<PredictionRecord> = records
        .into_iter()
        .map(|r| {
            let p = classifier.predict_text(&r.text);
            PredictionRecord {
                id: r.id,
                label: p.label,
                probability: p.probability,
            }
        })
        .collect();
    let lines = to_jsonl(&out);
    print!("{lines}");
    if let Some(dir) = &a.out_dir {
        finish(dir, manifest, vec![("predictions.jsonl", lines)])?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TermWeight {
    term: String,
    weight: f64,
}

fn terms(a: TermsArgs) -> Result<(), CliError> {
    if a.k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    let mut manifest = Manifest::new("terms", &serde_json::json!({ "k": a.k }));
    manifest.input(&a.model)?;
    let bundle = load_model(&a.model)?;
    let classifier = bundle.classifier()?;
    let mut columns = Vec::new();
    let mut json = BTreeMap::new();
    for (&label, model) in classifier.model.classes.iter().zip(&classifier.model.models) {
        // a class never seen in training has no meaningful ranking
        let ranked = if model.is_degenerate() {
            Vec::new()
        } else {
            classifier.top_terms(label, a.k)?
        };
        columns.push((label, ranked.iter().map(|(t, _)| t.clone()).collect()));
        json.insert(
            label.name().to_string(),
            ranked
                .into_iter()
                .map(|(term, weight)| TermWeight { term, weight })
                .collect::<Vec<_>>(),
        );
    }
    finish(
        &a.out_dir,
        manifest,
        vec![
            ("terms.csv", report::terms_csv(&columns)),
            ("terms.json", to_json(&json)),
        ],
    )
}

fn cluster(a: ClusterArgs) -> Result<(), CliError> {
    let vocab_params = a.vocab.params()?;
    let mut manifest = Manifest::new("cluster", &vocab_params);
    let corpus = load_labeled_input(&a.input, &mut manifest)?;
    require_classification(&corpus)?;
    let docs: Vec<TermSequence> = corpus
        .iter()
        .map(|p| analyze(&p.text, vocab_params.ngram_range))
        .collect();
    let vocab = fit_vocabulary(&docs, vocab_params)?;
    let profiles = class_profiles_tfidf(&corpus, &vocab)?;
    let dendrogram = ward_cluster(&profiles)?;
    let mut newick = dendrogram.to_newick();
    newick.push('\n');
    finish(
        &a.out_dir,
        manifest,
        vec![
            ("dendrogram.json", to_json(&dendrogram)),
            ("dendrogram.nwk", newick),
            ("merges.csv", report::merges_csv(&dendrogram)),
        ],
    )
}

fn topics(a: TopicsArgs) -> Result<(), CliError> {
    let params = a.lda.params()?;
    if a.top == 0 {
        return Err(CliError::Usage("--top must be at least 1".into()));
    }
    let mut manifest = Manifest::new(
        "topics",
        &serde_json::json!({ "lda": params, "min_df": a.lda.lda_min_df, "top": a.top }),
    );
    manifest.seed("lda", params.seed);
    let corpus = load_labeled_input(&a.input, &mut manifest)?;
    let texts: Vec<&str> = corpus.iter().map(|p| p.text.as_str()).collect();
    let counts = count_documents(&texts, a.lda.lda_min_df)?;
    let model = lda_fit(counts.docs, counts.vocabulary.len(), params)?;
    let top = model.top_terms(&counts.vocabulary, a.top);
    let mut doc_topics = String::new();
    for (d, p) in corpus.iter().enumerate() {
        let theta = model.doc_topics(d)?;
        doc_topics.push_str(&serde_json::to_string(&serde_json::json!({ "id": p.id, "topics": theta })).unwrap());
        doc_topics.push('\n');
    }
    finish(
        &a.out_dir,
        manifest,
        vec![
            ("topics.json", to_json(&top)),
            ("topics.csv", report::topics_csv(&top)),
            ("doc_topics.jsonl", doc_topics),
        ],
    )
}

fn sim(a: SimArgs) -> Result<(), CliError> {
    let config = match a.space {
        Space::Tfidf => serde_json::json!({ "space": a.space, "vocab": a.vocab.params()? }),
        Space::Lda => serde_json::json!({ "space": a.space, "lda": a.lda.params()?, "min_df": a.lda.lda_min_df }),
    };
    let mut manifest = Manifest::new("sim", &config);
    if a.space == Space::Lda {
        manifest.seed("lda", a.lda.seed);
    }
    let corpus = load_labeled_input(&a.input, &mut manifest)?;
    require_classification(&corpus)?;
    let profiles = match a.space {
        Space::Tfidf => {
            let vp = a.vocab.params()?;
            let docs: Vec<TermSequence> = corpus.iter().map(|p| analyze(&p.text, vp.ngram_range)).collect();
            let vocab = fit_vocabulary(&docs, vp)?;
            class_profiles_tfidf(&corpus, &vocab)?
        }
        Space::Lda => {
            let texts: Vec<&str> = corpus.iter().map(|p| p.text.as_str()).collect();
            let counts = count_documents(&texts, a.lda.lda_min_df)?;
            let model = lda_fit(counts.docs, counts.vocabulary.len(), a.lda.params()?)?;
            class_profiles_lda(&model, &corpus)?
        }
    };
    let matrix = similarity_matrix(&profiles)?;
    finish(
        &a.out_dir,
        manifest,
        vec![
            ("similarity.json", to_json(&matrix)),
            ("similarity.csv", report::similarity_csv(&matrix)),
        ],
    )
}

fn synth(a: SynthArgs) -> Result<(), CliError> {
    let mut config = match a.preset {
        Preset::Default => SynthConfig::default(),
        Preset::Crowd => SynthConfig::crowd(),
        Preset::Clinical => SynthConfig::clinical(),
    };
    if let Some(path) = &a.config {
        // file fields override the preset; absent fields keep it
        let overrides: serde_json::Value = read_config(path)?;
        let mut merged = serde_json::to_value(&config).expect("config serializes");
        match (overrides, merged.as_object_mut()) {
            (serde_json::Value::Object(o), Some(m)) => {
                for (k, v) in o {
                    if !m.contains_key(&k) {
                        return Err(CliError::Usage(format!("unknown synth config field {k:?}")));
                    }
                    m.insert(k, v);
                }
            }
            _ => return Err(CliError::Usage("synth config must be a JSON object".into())),
        }
        config = serde_json::from_value(merged).map_err(usage)?;
    }
    if let Some(v) = a.seed {
        config.seed = v;
    }
    if let Some(v) = a.docs_per_class {
        config.docs_per_class = DocsPerClass::Uniform(v);
    }
    if let Some(v) = a.signature_probability {
        config.signature_probability = v;
    }
    if let Some(v) = a.signature_terms {
        config.signature_terms_per_class = v;
    }
    if let Some(v) = a.annotators {
        config.annotators = v;
    }
    if let Some(v) = a.noise {
        config.annotator_noise = v;
    }
    if let Some(v) = a.not_distorted_fraction {
        config.not_distorted_fraction = v;
    }
    config.validate().map_err(usage)?;
    let mut manifest = Manifest::new("synth", &config);
    if let Some(path) = &a.config {
        manifest.input(path)?;
    }
    manifest.seed("synth", config.seed);
    let corpus = generate(&config)?;
    let path = output_path(&a.out_dir, "corpus.jsonl")?;
    write_jsonl(&path, &corpus)?;
    manifest.outputs.push("corpus.jsonl".into());
    finish(&a.out_dir, manifest, Vec::new())
}

fn tokens(a: TokensArgs) -> Result<(), CliError> {
    let terms = analyze(&a.text, a.ngram);
    println!("{}", serde_json::to_string(&terms).expect("terms serialize"));
    Ok(())
}
