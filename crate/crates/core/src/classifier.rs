//! L2-regularized logistic regression and its one-vs-rest composition.
//!
//! The binary objective is
//!
//! ```text
//! J(w, b) = ½‖w‖² + C · Σᵢ ln(1 + exp(−sᵢ (w·xᵢ + b)))      sᵢ ∈ {−1, +1}
//! ```
//!
//! so a larger `C` means weaker regularization and the intercept is never
//! penalized. It is minimized from `w = 0, b = 0` with L-BFGS and a
//! backtracking Armijo line search; every accepted step strictly lowers `J`
//! and the run stops once `‖∇J‖∞ ≤ tol`.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::LabeledPassage;
use crate::error::{Error, Result};
use crate::label::TaskLabel;
use crate::textprep::{analyze, TermSequence};
use crate::vectorize::{fit_vocabulary, DocTermMatrix, TermVector, VocabParams, Vocabulary};

/// Logistic function, evaluated without overflow for any finite `z`.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// `ln(1 + exp(t))` without overflow.
fn softplus(t: f64) -> f64 {
    t.max(0.0) + libm::log1p(libm::exp(-libm::fabs(t)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitParams {
    /// Inverse regularization strength; multiplies the data loss.
    pub c: f64,
    /// Stop once the largest absolute gradient component is at most this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FitParams {
    fn default() -> Self {
        FitParams {
            c: 1.0,
            tol: 1e-6,
            max_iter: 1000,
        }
    }
}

impl FitParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidArgument(alloc::format!(
                "C must be positive, got {}",
                self.c
            )));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(Error::InvalidArgument(alloc::format!(
                "tol must be non-negative, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

/// The regularized negative log-likelihood of one binary problem.
#[derive(Debug, Clone)]
pub struct LogisticObjective<'a> {
    x: &'a DocTermMatrix,
    positive: &'a [bool],
    c: f64,
}

impl<'a> LogisticObjective<'a> {
    pub fn new(x: &'a DocTermMatrix, positive: &'a [bool], c: f64) -> Result<Self> {
        if x.n_rows() != positive.len() {
            return Err(Error::LengthMismatch {
                expected: x.n_rows(),
                found: positive.len(),
            });
        }
        Ok(LogisticObjective { x, positive, c })
    }

    pub fn dim(&self) -> usize {
        self.x.n_features
    }

    pub fn value(&self, w: &[f64], b: f64) -> f64 {
        let reg = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
        let loss: f64 = self
            .x
            .rows
            .iter()
            .zip(self.positive)
            .map(|(row, &pos)| {
                let z = row.dot_dense(w) + b;
                softplus(if pos { -z } else { z })
            })
            .sum();
        reg + self.c * loss
    }

    /// Returns `(J, ∂J/∂w, ∂J/∂b)`.
    pub fn value_and_gradient(&self, w: &[f64], b: f64) -> (f64, Vec<f64>, f64) {
        let mut grad = w.to_vec();
        let mut grad_b = 0.0;
        let mut loss = 0.0;
        for (row, &pos) in self.x.rows.iter().zip(self.positive) {
            let z = row.dot_dense(w) + b;
            loss += softplus(if pos { -z } else { z });
            let r = self.c * (sigmoid(z) - if pos { 1.0 } else { 0.0 });
            grad_b += r;
            for &(j, v) in row.entries() {
                grad[j] += r * v;
            }
        }
        let reg = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
        (reg + self.c * loss, grad, grad_b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIterations,
    /// No step along the search direction lowered the objective; the
    /// gradient is then at the floating-point noise floor.
    LineSearchFailed,
    /// Zero-positive class: never optimized.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub iterations: usize,
    pub gradient_norm: f64,
    pub stop_reason: StopReason,
    /// Objective value at the start point and after every accepted step.
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
}

impl FitDiagnostics {
    pub fn converged(&self) -> bool {
        self.stop_reason == StopReason::Converged
    }
}

/// Weights aligned with vocabulary indices plus an unregularized intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryLogisticModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub c: f64,
    pub diagnostics: FitDiagnostics,
}

impl BinaryLogisticModel {
    /// All-zero model standing in for a class with no positive examples.
    pub fn degenerate(n_features: usize, c: f64) -> Self {
        BinaryLogisticModel {
            weights: vec![0.0; n_features],
            intercept: 0.0,
            c,
            diagnostics: FitDiagnostics {
                iterations: 0,
                gradient_norm: 0.0,
                stop_reason: StopReason::Degenerate,
                objective_trace: Vec::new(),
            },
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.diagnostics.stop_reason == StopReason::Degenerate
    }

    pub fn decision(&self, x: &TermVector) -> f64 {
        x.dot_dense(&self.weights) + self.intercept
    }

    pub fn predict_proba(&self, x: &TermVector) -> f64 {
        sigmoid(self.decision(x))
    }
}

const HISTORY: usize = 10;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(libm::fabs(*x)))
}

/// Fits one binary model. `positive[i]` marks row `i` as the positive class.
pub fn fit_binary(x: &DocTermMatrix, positive: &[bool], params: FitParams) -> Result<BinaryLogisticModel> {
    params.validate()?;
    if x.n_rows() != positive.len() {
        return Err(Error::LengthMismatch {
            expected: x.n_rows(),
            found: positive.len(),
        });
    }
    if x.n_rows() < 2 {
        return Err(Error::InvalidArgument("need at least two training rows".into()));
    }
    let n_pos = positive.iter().filter(|&&p| p).count();
    if n_pos == 0 || n_pos == positive.len() {
        return Err(Error::SingleClass);
    }
    for (i, row) in x.rows.iter().enumerate() {
        if row.entries().iter().any(|&(j, v)| !v.is_finite() || j >= x.n_features) {
            return Err(Error::NonFiniteFeature { row: i });
        }
    }

    let objective = LogisticObjective::new(x, positive, params.c)?;
    let dim = x.n_features + 1;
    let eval = |theta: &[f64]| {
        let (f, mut g, gb) = objective.value_and_gradient(&theta[..dim - 1], theta[dim - 1]);
        g.push(gb);
        (f, g)
    };

    let mut theta = vec![0.0; dim];
    let (mut f, mut g) = eval(&theta);
    let mut trace = vec![f];
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(HISTORY);
    let mut iterations = 0;
    let stop_reason = loop {
        if inf_norm(&g) <= params.tol {
            break StopReason::Converged;
        }
        if iterations >= params.max_iter {
            break StopReason::MaxIterations;
        }

        let mut direction = two_loop(&g, &history);
        let mut slope = dot(&g, &direction);
        if slope.is_nan() || slope >= 0.0 {
            history.clear();
            direction = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        // without curvature information, start with a unit-length step
        let mut step = if history.is_empty() {
            1.0f64.min(1.0 / libm::sqrt(-slope))
        } else {
            1.0
        };

        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let candidate: Vec<f64> = theta.iter().zip(&direction).map(|(t, d)| t + step * d).collect();
            let (fc, gc) = eval(&candidate);
            if fc <= f + ARMIJO * step * slope && fc < f {
                accepted = Some((candidate, fc, gc));
                break;
            }
            step *= 0.5;
        }
        let Some((next, f_next, g_next)) = accepted else {
            if history.is_empty() {
                break StopReason::LineSearchFailed;
            }
            history.clear();
            continue;
        };

        let s: Vec<f64> = next.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_next.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * libm::sqrt(dot(&s, &s) * dot(&y, &y)) {
            if history.len() == HISTORY {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        theta = next;
        f = f_next;
        g = g_next;
        trace.push(f);
        iterations += 1;
    };

    let intercept = theta.pop().unwrap_or(0.0);
    Ok(BinaryLogisticModel {
        weights: theta,
        intercept,
        c: params.c,
        diagnostics: FitDiagnostics {
            iterations,
            gradient_norm: inf_norm(&g),
            stop_reason,
            objective_trace: trace,
        },
    })
}

/// L-BFGS two-loop recursion: returns `-H·g` for the implicit inverse
/// Hessian approximation `H`.
fn two_loop(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
        let beta = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - beta) * si;
        }
    }
    for qi in q.iter_mut() {
        *qi = -*qi;
    }
    q
}

/// One binary model per class, sharing one feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvrModel {
    pub classes: Vec<TaskLabel>,
    pub models: Vec<BinaryLogisticModel>,
}

/// Index of the winning class: the highest score among non-degenerate
/// classes, earliest class on exact ties, and the first class when every
/// class is degenerate.
pub fn argmax_class(scores: &[f64], degenerate: &[bool]) -> usize {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        if degenerate.get(i).copied().unwrap_or(false) {
            continue;
        }
        match best {
            Some(b) if scores[b] >= s => {}
            _ => best = Some(i),
        }
    }
    best.unwrap_or(0)
}

/// Fits one binary model per entry of `classes`.
///
/// `classes` is sorted into canonical order. A class without positive rows
/// gets a degenerate all-zero model, which only wins `predict` when every
/// class is degenerate.
pub fn fit_ovr(x: &DocTermMatrix, labels: &[TaskLabel], classes: &[TaskLabel], params: FitParams) -> Result<OvrModel> {
    params.validate()?;
    if x.n_rows() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: x.n_rows(),
            found: labels.len(),
        });
    }
    let mut classes = classes.to_vec();
    classes.sort_unstable();
    if classes.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("duplicate class in class list".into()));
    }
    for l in labels {
        if classes.binary_search(l).is_err() {
            return Err(Error::ClassNotInModel(l.name().into()));
        }
    }
    let mut present: Vec<TaskLabel> = labels.to_vec();
    present.sort_unstable();
    present.dedup();
    if present.len() < 2 {
        return Err(Error::SingleClass);
    }

    let fits = crate::par::map(&classes, |class| {
        let positive: Vec<bool> = labels.iter().map(|l| l == class).collect();
        if positive.iter().any(|&p| p) {
            fit_binary(x, &positive, params)
        } else {
            Ok(BinaryLogisticModel::degenerate(x.n_features, params.c))
        }
    });
    let models = fits.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(OvrModel { classes, models })
}

impl OvrModel {
    pub fn n_features(&self) -> usize {
        self.models.first().map_or(0, |m| m.weights.len())
    }

    /// Checks the structural invariants after deserialization.
    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.classes.len() != self.models.len() {
            return Err(Error::LengthMismatch {
                expected: self.classes.len(),
                found: self.models.len(),
            });
        }
        if self.classes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "class list must be sorted and duplicate-free".into(),
            ));
        }
        for m in &self.models {
            if m.weights.len() != n_features {
                return Err(Error::LengthMismatch {
                    expected: n_features,
                    found: m.weights.len(),
                });
            }
        }
        Ok(())
    }

    /// Per-class probabilities, not normalized across classes.
    pub fn scores(&self, x: &TermVector) -> Vec<f64> {
        self.models.iter().map(|m| m.predict_proba(x)).collect()
    }

    /// Per-class probabilities divided by their sum, for reporting.
    pub fn normalized_scores(&self, x: &TermVector) -> Vec<f64> {
        let s = self.scores(x);
        let total: f64 = s.iter().sum();
        s.into_iter().map(|v| v / total).collect()
    }

    fn degenerate_mask(&self) -> Vec<bool> {
        self.models.iter().map(BinaryLogisticModel::is_degenerate).collect()
    }

    /// Winning class and its (unnormalized) probability.
    pub fn predict_with_score(&self, x: &TermVector) -> (TaskLabel, f64) {
        let scores = self.scores(x);
        let i = argmax_class(&scores, &self.degenerate_mask());
        (self.classes[i], scores[i])
    }

    pub fn predict(&self, x: &TermVector) -> TaskLabel {
        self.predict_with_score(x).0
    }

    pub fn model_for(&self, class: TaskLabel) -> Result<&BinaryLogisticModel> {
        self.classes
            .binary_search(&class)
            .map(|i| &self.models[i])
            .map_err(|_| Error::ClassNotInModel(class.name().into()))
    }

    /// The `k` feature indices with the largest weights for `class`,
    /// descending, ties by index; `k` is clamped to the feature count.
    pub fn top_features(&self, class: TaskLabel, k: usize) -> Result<Vec<(usize, f64)>> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        let model = self.model_for(class)?;
        let mut ranked: Vec<(usize, f64)> = model.weights.iter().copied().enumerate().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked.truncate(k);
        Ok(ranked)
    }
}

/// Everything needed to fit the text pipeline once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub vocab: VocabParams,
    pub fit: FitParams,
}

/// A fitted vocabulary together with the one-vs-rest model over it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextClassifier {
    pub vocabulary: Vocabulary,
    pub model: OvrModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: TaskLabel,
    pub probability: f64,
}

impl TextClassifier {
    /// Fits the vocabulary on `train` alone, then the one-vs-rest model.
    pub fn fit(train: &[LabeledPassage], classes: &[TaskLabel], params: PipelineParams) -> Result<Self> {
        let docs: Vec<TermSequence> = train
            .iter()
            .map(|p| analyze(&p.text, params.vocab.ngram_range))
            .collect();
        let labels: Vec<TaskLabel> = train.iter().map(|p| p.label).collect();
        Self::fit_sequences(&docs, &labels, classes, params)
    }

    /// Same as [`TextClassifier::fit`] for documents already expanded into
    /// n-grams with `params.vocab.ngram_range`.
    pub fn fit_sequences(
        docs: &[TermSequence],
        labels: &[TaskLabel],
        classes: &[TaskLabel],
        params: PipelineParams,
    ) -> Result<Self> {
        let vocabulary = fit_vocabulary(docs, params.vocab)?;
        let x = vocabulary.transform_all(docs);
        let model = fit_ovr(&x, labels, classes, params.fit)?;
        Ok(TextClassifier { vocabulary, model })
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate(self.vocabulary.len())
    }

    pub fn predict_vector(&self, x: &TermVector) -> Prediction {
        let (label, probability) = self.model.predict_with_score(x);
        Prediction { label, probability }
    }

    pub fn predict_text(&self, text: &str) -> Prediction {
        self.predict_vector(&self.vocabulary.transform_text(text))
    }

    /// The `k` highest-weighted vocabulary terms for `class`.
    pub fn top_terms(&self, class: TaskLabel, k: usize) -> Result<Vec<(String, f64)>> {
        Ok(self
            .model
            .top_features(class, k)?
            .into_iter()
            .map(|(i, w)| (String::from(self.vocabulary.term(i).unwrap_or_default()), w))
            .collect())
    }
}
