//! Annotated passages, strict-majority adjudication and fold assignment.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{DetectionLabel, DistortionLabel, Task, TaskLabel};

/// One annotator's judgement. An empty label set means the annotator saw no
/// distortion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub annotator: String,
    pub labels: BTreeSet<DistortionLabel>,
}

impl Annotation {
    pub fn new(annotator: impl Into<String>, labels: impl IntoIterator<Item = DistortionLabel>) -> Self {
        Annotation {
            annotator: annotator.into(),
            labels: labels.into_iter().collect(),
        }
    }
}

/// A raw passage with every annotator's label set, before adjudication.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedPassage {
    pub id: String,
    pub text: String,
    pub annotations: Vec<Annotation>,
}

impl AnnotatedPassage {
    /// Checks the per-passage invariants: non-empty id, distinct annotators and
    /// no sentinel inside a label set.
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::EmptyId);
        }
        let mut seen = BTreeSet::new();
        for a in &self.annotations {
            if !seen.insert(a.annotator.as_str()) {
                return Err(Error::DuplicateAnnotator {
                    passage: self.id.clone(),
                    annotator: a.annotator.clone(),
                });
            }
            if a.labels.contains(&DistortionLabel::NotDistorted) {
                return Err(Error::SentinelInAnnotation(self.id.clone()));
            }
        }
        Ok(())
    }
}

/// Validates every passage and rejects duplicate ids.
pub fn validate_corpus(corpus: &[AnnotatedPassage]) -> Result<()> {
    let mut ids = BTreeSet::new();
    for p in corpus {
        p.validate()?;
        if !ids.insert(p.id.as_str()) {
            return Err(Error::DuplicateId(p.id.clone()));
        }
    }
    Ok(())
}

/// An adjudicated passage carrying a single task label.
///
/// Serializes to the adjudicated JSONL record `{"id", "text", "label"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledPassage {
    pub id: String,
    pub text: String,
    pub label: TaskLabel,
}

impl LabeledPassage {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: TaskLabel) -> Self {
        LabeledPassage {
            id: id.into(),
            text: text.into(),
            label,
        }
    }

    pub fn task(&self) -> Task {
        self.label.task()
    }
}

/// Returns the single task shared by every passage.
pub fn corpus_task(corpus: &[LabeledPassage]) -> Result<Task> {
    let first = corpus.first().ok_or(Error::EmptyCorpus)?.task();
    if corpus.iter().any(|p| p.task() != first) {
        return Err(Error::MixedTasks);
    }
    Ok(first)
}

/// Outcome of adjudicating a corpus: the kept passages and the ids of the
/// discarded ones, both in input order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Adjudication {
    pub kept: Vec<LabeledPassage>,
    pub discarded: Vec<String>,
}

impl Adjudication {
    pub fn kept_count(&self) -> usize {
        self.kept.len()
    }

    pub fn discarded_count(&self) -> usize {
        self.discarded.len()
    }
}

/// The label that strictly more than half of the annotators selected, if
/// exactly one label clears that bar.
///
/// Multi-label sets vote for every label they contain, so two labels can both
/// clear the bar; that counts as no clear majority.
pub fn majority_label(annotations: &[Annotation]) -> Option<DistortionLabel> {
    let n = annotations.len();
    let mut votes: BTreeMap<DistortionLabel, usize> = BTreeMap::new();
    for a in annotations {
        for &l in &a.labels {
            *votes.entry(l).or_default() += 1;
        }
    }
    let mut winners = votes.into_iter().filter(|&(_, v)| 2 * v > n).map(|(l, _)| l);
    match (winners.next(), winners.next()) {
        (Some(l), None) => Some(l),
        _ => None,
    }
}

/// Strict-majority detection verdict; `None` on an exact split.
pub fn detection_verdict(annotations: &[Annotation]) -> Option<DetectionLabel> {
    let n = annotations.len();
    let distorted = annotations.iter().filter(|a| !a.labels.is_empty()).count();
    if 2 * distorted > n {
        Some(DetectionLabel::Distorted)
    } else if 2 * (n - distorted) > n {
        Some(DetectionLabel::NotDistorted)
    } else {
        None
    }
}

fn adjudicate_with<F>(corpus: &[AnnotatedPassage], verdict: F) -> Result<Adjudication>
where
    F: Fn(&[Annotation]) -> Option<TaskLabel>,
{
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut out = Adjudication {
        kept: Vec::new(),
        discarded: Vec::new(),
    };
    for p in corpus {
        if p.annotations.is_empty() {
            return Err(Error::NoAnnotations(p.id.clone()));
        }
        match verdict(&p.annotations) {
            Some(label) => out.kept.push(LabeledPassage::new(p.id.clone(), p.text.clone(), label)),
            None => out.discarded.push(p.id.clone()),
        }
    }
    Ok(out)
}

/// Keeps each passage whose annotators agree on one distortion by strict
/// majority.
pub fn adjudicate_classification(corpus: &[AnnotatedPassage]) -> Result<Adjudication> {
    adjudicate_with(corpus, |a| majority_label(a).map(TaskLabel::Classification))
}

/// Labels each passage distorted / not distorted by strict majority over
/// "selected at least one distortion"; exact splits are discarded.
pub fn adjudicate_detection(corpus: &[AnnotatedPassage]) -> Result<Adjudication> {
    adjudicate_with(corpus, |a| detection_verdict(a).map(TaskLabel::Detection))
}

pub fn adjudicate(corpus: &[AnnotatedPassage], task: Task) -> Result<Adjudication> {
    match task {
        Task::Detection => adjudicate_detection(corpus),
        Task::Classification => adjudicate_classification(corpus),
    }
}

/// Fold index for every passage id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub assignment: BTreeMap<String, usize>,
}

impl FoldAssignment {
    pub fn fold_of(&self, id: &str) -> Option<usize> {
        self.assignment.get(id).copied()
    }

    /// Fold index of each passage, aligned with `corpus`.
    pub fn folds_for(&self, corpus: &[LabeledPassage]) -> Result<Vec<usize>> {
        corpus
            .iter()
            .map(|p| {
                self.fold_of(&p.id)
                    .ok_or_else(|| Error::InvalidArgument(alloc::format!("passage {:?} has no fold", p.id)))
            })
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = alloc::vec![0; self.k];
        for &f in self.assignment.values() {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratified k-fold assignment.
///
/// Labels with at least `k` passages are shuffled and dealt round-robin, with
/// the starting fold carried over from one label to the next so that overall
/// fold sizes stay balanced too. Passages of rarer labels are visited in id
/// order and each dropped into a uniformly random fold.
pub fn stratified_kfold(corpus: &[LabeledPassage], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::InvalidArgument(alloc::format!(
            "fold count must be at least 2, got {k}"
        )));
    }
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if k > corpus.len() {
        return Err(Error::InvalidArgument(alloc::format!(
            "fold count {k} exceeds corpus size {}",
            corpus.len()
        )));
    }
    let mut ids = BTreeSet::new();
    for p in corpus {
        if !ids.insert(p.id.as_str()) {
            return Err(Error::DuplicateId(p.id.clone()));
        }
    }

    let mut groups: BTreeMap<TaskLabel, Vec<usize>> = BTreeMap::new();
    for (i, p) in corpus.iter().enumerate() {
        groups.entry(p.label).or_default().push(i);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold = alloc::vec![usize::MAX; corpus.len()];
    let mut offset = 0;
    let mut rare = Vec::new();
    for (_, mut members) in groups {
        if members.len() < k {
            rare.extend(members);
            continue;
        }
        members.shuffle(&mut rng);
        for (j, &i) in members.iter().enumerate() {
            fold[i] = (offset + j) % k;
        }
        offset = (offset + members.len()) % k;
    }
    rare.sort_by(|&a, &b| corpus[a].id.cmp(&corpus[b].id));
    for i in rare {
        fold[i] = rng.gen_range(0..k);
    }

    Ok(FoldAssignment {
        k,
        assignment: corpus.iter().zip(fold).map(|(p, f)| (p.id.clone(), f)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;
    use DistortionLabel::*;

    fn ann(labels: &[&[DistortionLabel]]) -> Vec<Annotation> {
        labels
            .iter()
            .enumerate()
            .map(|(i, ls)| Annotation::new(format!("a{i}"), ls.iter().copied()))
            .collect()
    }

    fn passage(id: &str, labels: &[&[DistortionLabel]]) -> AnnotatedPassage {
        AnnotatedPassage {
            id: id.into(),
            text: "text".into(),
            annotations: ann(labels),
        }
    }

    #[test]
    fn classification_majority_examples() {
        assert_eq!(
            majority_label(&ann(&[&[Blaming], &[Blaming], &[Blaming], &[Filtering]])),
            Some(Blaming)
        );
        assert_eq!(
            majority_label(&ann(&[&[Blaming], &[Blaming], &[Filtering], &[Filtering]])),
            None
        );
        // both labels clear 3/2 through overlapping sets
        assert_eq!(
            majority_label(&ann(&[&[Blaming, Filtering], &[Blaming], &[Filtering]])),
            None
        );
    }

    #[test]
    fn detection_examples() {
        let e: &[DistortionLabel] = &[];
        assert_eq!(
            detection_verdict(&ann(&[&[Filtering], &[Filtering], &[Filtering], e])),
            Some(DetectionLabel::Distorted)
        );
        assert_eq!(
            detection_verdict(&ann(&[&[Blaming], e, e, e])),
            Some(DetectionLabel::NotDistorted)
        );
        assert_eq!(detection_verdict(&ann(&[&[Blaming], &[Filtering], e, e])), None);
    }

    #[test]
    fn adjudication_counts_and_errors() {
        let corpus = vec![
            passage("p1", &[&[Blaming], &[Blaming], &[Blaming], &[Filtering]]),
            passage("p2", &[&[Blaming], &[Blaming], &[Filtering], &[Filtering]]),
        ];
        let out = adjudicate_classification(&corpus).unwrap();
        assert_eq!(out.kept_count(), 1);
        assert_eq!(out.discarded, vec![String::from("p2")]);
        assert_eq!(out.kept[0].label, TaskLabel::Classification(Blaming));

        assert_eq!(adjudicate_classification(&[]), Err(Error::EmptyCorpus));
        assert_eq!(adjudicate_detection(&[]), Err(Error::EmptyCorpus));
        let bare = AnnotatedPassage {
            id: "x".into(),
            text: String::new(),
            annotations: vec![],
        };
        assert_eq!(adjudicate_detection(&[bare]), Err(Error::NoAnnotations("x".into())));
    }

    #[test]
    fn passage_validation() {
        let mut p = passage("p", &[&[Blaming], &[Filtering]]);
        assert!(p.validate().is_ok());
        p.annotations[1].annotator = "a0".into();
        assert!(matches!(p.validate(), Err(Error::DuplicateAnnotator { .. })));
        let p = passage("p", &[&[NotDistorted]]);
        assert!(matches!(p.validate(), Err(Error::SentinelInAnnotation(_))));
        let dup = vec![passage("p", &[&[Blaming]]), passage("p", &[&[Blaming]])];
        assert_eq!(validate_corpus(&dup), Err(Error::DuplicateId("p".into())));
    }

    fn labeled(n: usize, label: DistortionLabel, prefix: &str) -> Vec<LabeledPassage> {
        (0..n)
            .map(|i| LabeledPassage::new(format!("{prefix}{i:04}"), "t", TaskLabel::Classification(label)))
            .collect()
    }

    #[test]
    fn kfold_exact_and_remainder_sizes() {
        let a = stratified_kfold(&labeled(100, Blaming, "p"), 5, 1).unwrap();
        assert_eq!(a.fold_sizes(), vec![20; 5]);
        let b = stratified_kfold(&labeled(101, Blaming, "p"), 5, 1).unwrap();
        let mut sizes = b.fold_sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![20, 20, 20, 20, 21]);
    }

    #[test]
    fn kfold_is_deterministic_and_validates() {
        let mut corpus = labeled(30, Blaming, "b");
        corpus.extend(labeled(3, Filtering, "f"));
        assert_eq!(stratified_kfold(&corpus, 5, 9), stratified_kfold(&corpus, 5, 9));
        assert!(stratified_kfold(&corpus, 1, 0).is_err());
        assert!(stratified_kfold(&corpus, 34, 0).is_err());
        assert_eq!(stratified_kfold(&[], 2, 0), Err(Error::EmptyCorpus));
    }
}
