//! Precision/recall/F1 with macro and support-weighted averages, grid search
//! and nested cross-validation.
//!
//! Zero denominators yield zero. Cross-validated reports pool the held-out
//! predictions of every fold and score them once.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::classifier::{fit_ovr, FitParams, PipelineParams, TextClassifier};
use crate::corpus::{corpus_task, stratified_kfold, FoldAssignment, LabeledPassage};
use crate::error::{Error, Result};
use crate::label::{Task, TaskLabel};
use crate::textprep::{ngrams_in, normalize, tokenize, NgramRange, TermSequence};
use crate::vectorize::{fit_vocabulary, VocabParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: TaskLabel,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    Macro,
    Weighted,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

fn check_lengths(y_true: &[TaskLabel], y_pred: &[TaskLabel]) -> Result<()> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            expected: y_true.len(),
            found: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::InvalidArgument("no labels to evaluate".into()));
    }
    Ok(())
}

/// Counts indexed `[true class][predicted class]` over the union of both
/// label sequences, in canonical class order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<TaskLabel>,
    pub counts: Vec<Vec<usize>>,
}

pub fn confusion_matrix(y_true: &[TaskLabel], y_pred: &[TaskLabel]) -> Result<ConfusionMatrix> {
    check_lengths(y_true, y_pred)?;
    let classes: Vec<TaskLabel> = y_true
        .iter()
        .chain(y_pred)
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let idx = |l: &TaskLabel| classes.binary_search(l).unwrap_or_default();
    let mut counts = vec![vec![0; classes.len()]; classes.len()];
    for (t, p) in y_true.iter().zip(y_pred) {
        counts[idx(t)][idx(p)] += 1;
    }
    Ok(ConfusionMatrix { classes, counts })
}

impl ConfusionMatrix {
    pub fn metrics(&self) -> Vec<ClassMetrics> {
        let n = self.classes.len();
        (0..n)
            .map(|c| {
                let tp = self.counts[c][c];
                let support: usize = self.counts[c].iter().sum();
                let predicted: usize = (0..n).map(|r| self.counts[r][c]).sum();
                let precision = ratio(tp, predicted);
                let recall = ratio(tp, support);
                ClassMetrics {
                    label: self.classes[c],
                    precision,
                    recall,
                    f1: f1_score(precision, recall),
                    support,
                }
            })
            .collect()
    }
}

/// Metrics for every class appearing in either sequence.
pub fn per_class_metrics(y_true: &[TaskLabel], y_pred: &[TaskLabel]) -> Result<Vec<ClassMetrics>> {
    Ok(confusion_matrix(y_true, y_pred)?.metrics())
}

/// Unweighted (macro) or support-weighted mean of per-class metrics.
pub fn aggregate(metrics: &[ClassMetrics], mode: Aggregation) -> Result<Averages> {
    if metrics.is_empty() {
        return Err(Error::InvalidArgument("cannot aggregate zero classes".into()));
    }
    let weight = |m: &ClassMetrics| match mode {
        Aggregation::Macro => 1.0,
        Aggregation::Weighted => m.support as f64,
    };
    let total: f64 = metrics.iter().map(weight).sum();
    let mean = |get: fn(&ClassMetrics) -> f64| {
        if total == 0.0 {
            0.0
        } else {
            metrics.iter().map(|m| weight(m) * get(m)).sum::<f64>() / total
        }
    };
    Ok(Averages {
        precision: mean(|m| m.precision),
        recall: mean(|m| m.recall),
        f1: mean(|m| m.f1),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub per_class: Vec<ClassMetrics>,
    #[serde(rename = "macro")]
    pub macro_avg: Averages,
    pub weighted: Averages,
    pub accuracy: f64,
    pub total_support: usize,
}

pub fn evaluate(y_true: &[TaskLabel], y_pred: &[TaskLabel]) -> Result<EvaluationReport> {
    let per_class = per_class_metrics(y_true, y_pred)?;
    let correct = y_true.iter().zip(y_pred).filter(|(t, p)| t == p).count();
    Ok(EvaluationReport {
        macro_avg: aggregate(&per_class, Aggregation::Macro)?,
        weighted: aggregate(&per_class, Aggregation::Weighted)?,
        accuracy: ratio(correct, y_true.len()),
        total_support: y_true.len(),
        per_class,
    })
}

/// Scores a fitted classifier on a labeled corpus.
pub fn evaluate_classifier(classifier: &TextClassifier, corpus: &[LabeledPassage]) -> Result<EvaluationReport> {
    let truth: Vec<TaskLabel> = corpus.iter().map(|p| p.label).collect();
    let pred: Vec<TaskLabel> = corpus.iter().map(|p| classifier.predict_text(&p.text).label).collect();
    evaluate(&truth, &pred)
}

/// One point of the hyperparameter grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub c: f64,
    pub ngram_range: NgramRange,
    pub min_df: usize,
    pub max_df: f64,
}

impl Hyperparams {
    pub fn vocab(&self) -> VocabParams {
        VocabParams::new(self.ngram_range, self.min_df, self.max_df)
    }

    pub fn pipeline(&self, solver: Solver) -> PipelineParams {
        PipelineParams {
            vocab: self.vocab(),
            fit: FitParams {
                c: self.c,
                tol: solver.tol,
                max_iter: solver.max_iter,
            },
        }
    }
}

/// Candidate values per dimension. Points are enumerated with `c` varying
/// slowest, then n-gram range, `min_df` and `max_df`; that enumeration order
/// is the tie-break order of grid search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperparamGrid {
    pub c: Vec<f64>,
    pub ngram_range: Vec<NgramRange>,
    pub min_df: Vec<usize>,
    pub max_df: Vec<f64>,
}

impl Default for HyperparamGrid {
    fn default() -> Self {
        HyperparamGrid {
            c: vec![0.01, 0.1, 1.0, 10.0],
            ngram_range: vec![NgramRange::UNIGRAMS, NgramRange::UNI_BI],
            min_df: vec![1, 2, 5],
            max_df: vec![0.5, 1.0],
        }
    }
}

impl HyperparamGrid {
    pub fn single(point: Hyperparams) -> Self {
        HyperparamGrid {
            c: vec![point.c],
            ngram_range: vec![point.ngram_range],
            min_df: vec![point.min_df],
            max_df: vec![point.max_df],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.c.is_empty() || self.ngram_range.is_empty() || self.min_df.is_empty() || self.max_df.is_empty() {
            return Err(Error::InvalidArgument(
                "hyperparameter grid has an empty dimension".into(),
            ));
        }
        for p in self.points() {
            p.vocab().validate()?;
            FitParams {
                c: p.c,
                ..FitParams::default()
            }
            .validate()?;
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<Hyperparams> {
        let mut out = Vec::with_capacity(self.len());
        for &c in &self.c {
            for &ngram_range in &self.ngram_range {
                for &min_df in &self.min_df {
                    for &max_df in &self.max_df {
                        out.push(Hyperparams {
                            c,
                            ngram_range,
                            min_df,
                            max_df,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.c.len() * self.ngram_range.len() * self.min_df.len() * self.max_df.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Optimizer settings shared by every fit in a search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Solver {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for Solver {
    fn default() -> Self {
        let d = FitParams::default();
        Solver {
            tol: d.tol,
            max_iter: d.max_iter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPointScore {
    pub params: Hyperparams,
    /// Pooled inner-fold weighted F1; `None` when the point's thresholds
    /// emptied the vocabulary of some inner training split, or when the
    /// grid had a single point and no search ran.
    pub weighted_f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub best: Hyperparams,
    pub scores: Vec<GridPointScore>,
}

/// Per-document token lists, expanded lazily per n-gram range.
struct Tokenized {
    tokens: Vec<Vec<String>>,
}

impl Tokenized {
    fn new(corpus: &[LabeledPassage]) -> Self {
        Tokenized {
            tokens: corpus.iter().map(|p| tokenize(&normalize(&p.text))).collect(),
        }
    }

    fn sequences(&self, indices: &[usize], range: NgramRange) -> Vec<TermSequence> {
        indices.iter().map(|&i| ngrams_in(&self.tokens[i], range)).collect()
    }
}

/// Selects hyperparameters by `inner_k`-fold cross-validation inside `train`.
///
/// Every inner fold refits the whole pipeline, vocabulary included, on its
/// own training split. The score of a point is the weighted F1 of its pooled
/// held-out predictions; the first best point in grid order wins.
pub fn grid_search(
    train: &[LabeledPassage],
    grid: &HyperparamGrid,
    inner_k: usize,
    seed: u64,
    solver: Solver,
) -> Result<GridSearchResult> {
    grid.validate()?;
    let points = grid.points();
    if points.len() == 1 {
        return Ok(GridSearchResult {
            best: points[0],
            scores: vec![GridPointScore {
                params: points[0],
                weighted_f1: None,
            }],
        });
    }
    let task = corpus_task(train)?;
    let classes = task.classes();
    let folds = stratified_kfold(train, inner_k, seed)?.folds_for(train)?;
    let tokenized = Tokenized::new(train);

    // one unit per (fold, vocabulary setting); each unit sweeps every C
    let mut vocab_settings: Vec<VocabParams> = Vec::new();
    for p in &points {
        if !vocab_settings.contains(&p.vocab()) {
            vocab_settings.push(p.vocab());
        }
    }
    let units: Vec<(usize, usize)> = (0..inner_k)
        .flat_map(|f| (0..vocab_settings.len()).map(move |v| (f, v)))
        .collect();

    let outcomes = crate::par::map(&units, |&(fold, v)| -> Result<Option<Vec<Vec<TaskLabel>>>> {
        let vocab_params = vocab_settings[v];
        let train_idx: Vec<usize> = (0..train.len()).filter(|&i| folds[i] != fold).collect();
        let test_idx: Vec<usize> = (0..train.len()).filter(|&i| folds[i] == fold).collect();
        if test_idx.is_empty() {
            return Ok(Some(vec![Vec::new(); grid.c.len()]));
        }
        let train_docs = tokenized.sequences(&train_idx, vocab_params.ngram_range);
        let vocab = match fit_vocabulary(&train_docs, vocab_params) {
            Ok(v) => v,
            Err(Error::EmptyVocabulary) => return Ok(None),
            Err(e) => return Err(e),
        };
        let x_train = vocab.transform_all(&train_docs);
        let x_test = vocab.transform_all(&tokenized.sequences(&test_idx, vocab_params.ngram_range));
        let labels: Vec<TaskLabel> = train_idx.iter().map(|&i| train[i].label).collect();
        let mut per_c = Vec::with_capacity(grid.c.len());
        for &c in &grid.c {
            let fit = FitParams {
                c,
                tol: solver.tol,
                max_iter: solver.max_iter,
            };
            let model = fit_ovr(&x_train, &labels, &classes, fit)?;
            per_c.push(x_test.rows.iter().map(|x| model.predict(x)).collect());
        }
        Ok(Some(per_c))
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;

    let mut scores = Vec::with_capacity(points.len());
    for p in &points {
        let v = vocab_settings.iter().position(|s| *s == p.vocab()).unwrap_or_default();
        let ci = grid.c.iter().position(|&c| c == p.c).unwrap_or_default();
        let mut truth = Vec::new();
        let mut pred = Vec::new();
        let mut failed = false;
        for fold in 0..inner_k {
            match &outcomes[fold * vocab_settings.len() + v] {
                None => failed = true,
                Some(per_c) => {
                    let test_labels = (0..train.len()).filter(|&i| folds[i] == fold).map(|i| train[i].label);
                    truth.extend(test_labels);
                    pred.extend_from_slice(&per_c[ci]);
                }
            }
        }
        let weighted_f1 = if failed || truth.is_empty() {
            None
        } else {
            Some(evaluate(&truth, &pred)?.weighted.f1)
        };
        scores.push(GridPointScore {
            params: *p,
            weighted_f1,
        });
    }

    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.iter().enumerate() {
        if let Some(f) = s.weighted_f1 {
            if best.is_none_or(|(_, b)| f > b) {
                best = Some((i, f));
            }
        }
    }
    let (best, _) = best.ok_or(Error::EmptyVocabulary)?;
    Ok(GridSearchResult {
        best: points[best],
        scores,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NestedCvConfig {
    pub outer_k: usize,
    pub inner_k: usize,
    pub seed: u64,
    pub solver: Solver,
}

impl Default for NestedCvConfig {
    fn default() -> Self {
        NestedCvConfig {
            outer_k: 5,
            inner_k: 3,
            seed: 0,
            solver: Solver::default(),
        }
    }
}

impl NestedCvConfig {
    /// Seed of the inner split for outer fold `fold`.
    pub fn inner_seed(&self, fold: usize) -> u64 {
        self.seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(fold as u64 + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub chosen: Hyperparams,
    pub grid_scores: Vec<GridPointScore>,
    pub n_train: usize,
    pub n_test: usize,
    /// `None` when the fold received no passages.
    pub report: Option<EvaluationReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeldOutPrediction {
    pub id: String,
    pub fold: usize,
    pub truth: TaskLabel,
    pub predicted: TaskLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub task: Task,
    pub config: NestedCvConfig,
    pub grid: HyperparamGrid,
    pub folds: Vec<FoldReport>,
    pub pooled: EvaluationReport,
    pub assignment: FoldAssignment,
    /// Held-out predictions in fold order, corpus order within a fold.
    pub predictions: Vec<HeldOutPrediction>,
}

impl CvReport {
    pub fn pooled_confusion(&self) -> Result<ConfusionMatrix> {
        let t: Vec<TaskLabel> = self.predictions.iter().map(|p| p.truth).collect();
        let p: Vec<TaskLabel> = self.predictions.iter().map(|p| p.predicted).collect();
        confusion_matrix(&t, &p)
    }
}

/// Outer stratified folds; per fold, grid search on the training portion,
/// refit with the winner, predict the held-out passages.
pub fn nested_cv(corpus: &[LabeledPassage], grid: &HyperparamGrid, config: NestedCvConfig) -> Result<CvReport> {
    grid.validate()?;
    let task = corpus_task(corpus)?;
    let classes = task.classes();
    let assignment = stratified_kfold(corpus, config.outer_k, config.seed)?;
    let folds = assignment.folds_for(corpus)?;
    let fold_ids: Vec<usize> = (0..config.outer_k).collect();

    let results = crate::par::map(&fold_ids, |&fold| -> Result<(FoldReport, Vec<HeldOutPrediction>)> {
        let train: Vec<LabeledPassage> = corpus
            .iter()
            .zip(&folds)
            .filter(|(_, &f)| f != fold)
            .map(|(p, _)| p.clone())
            .collect();
        let test: Vec<&LabeledPassage> = corpus
            .iter()
            .zip(&folds)
            .filter(|(_, &f)| f == fold)
            .map(|(p, _)| p)
            .collect();
        let search = grid_search(&train, grid, config.inner_k, config.inner_seed(fold), config.solver)?;
        let mut predictions = Vec::with_capacity(test.len());
        let mut report = None;
        if !test.is_empty() {
            let model = TextClassifier::fit(&train, &classes, search.best.pipeline(config.solver))?;
            for p in &test {
                predictions.push(HeldOutPrediction {
                    id: p.id.clone(),
                    fold,
                    truth: p.label,
                    predicted: model.predict_text(&p.text).label,
                });
            }
            let t: Vec<TaskLabel> = predictions.iter().map(|p| p.truth).collect();
            let y: Vec<TaskLabel> = predictions.iter().map(|p| p.predicted).collect();
            report = Some(evaluate(&t, &y)?);
        }
        Ok((
            FoldReport {
                fold,
                chosen: search.best,
                grid_scores: search.scores,
                n_train: train.len(),
                n_test: test.len(),
                report,
            },
            predictions,
        ))
    });

    let mut fold_reports = Vec::with_capacity(config.outer_k);
    let mut predictions = Vec::with_capacity(corpus.len());
    for r in results {
        let (report, preds) = r?;
        fold_reports.push(report);
        predictions.extend(preds);
    }
    let truth: Vec<TaskLabel> = predictions.iter().map(|p| p.truth).collect();
    let pred: Vec<TaskLabel> = predictions.iter().map(|p| p.predicted).collect();
    Ok(CvReport {
        task,
        config,
        grid: grid.clone(),
        folds: fold_reports,
        pooled: evaluate(&truth, &pred)?,
        assignment,
        predictions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::{DetectionLabel, DistortionLabel};

    fn d(l: DistortionLabel) -> TaskLabel {
        TaskLabel::Classification(l)
    }

    fn metrics(f1: f64, support: usize, label: TaskLabel) -> ClassMetrics {
        ClassMetrics {
            label,
            precision: 0.0,
            recall: 0.0,
            f1,
            support,
        }
    }

    #[test]
    fn per_class_arithmetic() {
        use DistortionLabel::*;
        // Blaming: TP=2, FP=1, FN=3
        let t = [d(Blaming), d(Blaming), d(Blaming), d(Blaming), d(Blaming), d(Filtering)];
        let p = [
            d(Blaming),
            d(Blaming),
            d(Filtering),
            d(Filtering),
            d(Filtering),
            d(Blaming),
        ];
        let m = per_class_metrics(&t, &p).unwrap();
        let b = &m[0];
        assert_eq!(b.label, d(Blaming));
        assert!((b.precision - 2.0 / 3.0).abs() < 1e-12);
        assert!((b.recall - 0.4).abs() < 1e-12);
        assert!((b.f1 - 0.5).abs() < 1e-12);
        assert_eq!(b.support, 5);
    }

    #[test]
    fn perfect_and_never_predicted() {
        use DistortionLabel::*;
        let t = [d(Blaming), d(Filtering), d(Shoulds)];
        for m in per_class_metrics(&t, &t).unwrap() {
            assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
        }
        let m = per_class_metrics(&[d(Blaming), d(Filtering)], &[d(Filtering), d(Filtering)]).unwrap();
        assert_eq!((m[0].precision, m[0].recall, m[0].f1), (0.0, 0.0, 0.0));
        assert!(per_class_metrics(&t, &t[..2]).is_err());
    }

    #[test]
    fn aggregation_matches_published_detection_rows() {
        let nd = TaskLabel::Detection(DetectionLabel::NotDistorted);
        let ds = TaskLabel::Detection(DetectionLabel::Distorted);
        let rows = [metrics(0.38, 194, nd), metrics(0.95, 1605, ds)];
        assert!((aggregate(&rows, Aggregation::Macro).unwrap().f1 - 0.665).abs() < 1e-12);
        let w = aggregate(&rows, Aggregation::Weighted).unwrap().f1;
        assert!((w - (0.38 * 194.0 + 0.95 * 1605.0) / 1799.0).abs() < 1e-12);
        assert!((w - 0.8885).abs() < 5e-4);
        let single = [metrics(0.7, 3, nd)];
        let (m, w) = (
            aggregate(&single, Aggregation::Macro).unwrap(),
            aggregate(&single, Aggregation::Weighted).unwrap(),
        );
        assert!((m.f1 - 0.7).abs() < 1e-12 && (w.f1 - 0.7).abs() < 1e-12);
        assert!(aggregate(&[], Aggregation::Macro).is_err());
    }

    #[test]
    fn grid_enumeration_order_and_validation() {
        let g = HyperparamGrid::default();
        assert_eq!(g.len(), 48);
        let pts = g.points();
        assert_eq!(pts[0].c, 0.01);
        assert_eq!(pts[1].max_df, 1.0);
        assert_eq!(pts[47].c, 10.0);
        let mut empty = g.clone();
        empty.min_df.clear();
        assert!(empty.validate().is_err());
    }

    #[test]
    fn singleton_grid_skips_search() {
        let point = Hyperparams {
            c: 1.0,
            ngram_range: NgramRange::UNIGRAMS,
            min_df: 1,
            max_df: 1.0,
        };
        let r = grid_search(&[], &HyperparamGrid::single(point), 3, 0, Solver::default()).unwrap();
        assert_eq!(r.best, point);
    }
}
