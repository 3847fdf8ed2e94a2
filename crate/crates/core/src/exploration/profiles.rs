use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::LabeledPassage;
use crate::error::{Error, Result};
use crate::label::{Task, TaskLabel};
use crate::vectorize::Vocabulary;

use super::lda::TopicModel;

/// Aggregate vector of one class, in tf-idf space (length V) or topic space
/// (length K).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassProfile {
    pub label: TaskLabel,
    pub vector: Vec<f64>,
    pub n_passages: usize,
}

fn require_classification(corpus: &[LabeledPassage]) -> Result<()> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if corpus.iter().any(|p| p.task() != Task::Classification) {
        return Err(Error::InvalidArgument(
            "profiles need classification-labeled passages".into(),
        ));
    }
    Ok(())
}

fn sum_by_class<F>(corpus: &[LabeledPassage], dim: usize, mut add: F) -> Vec<ClassProfile>
where
    F: FnMut(usize, &mut [f64]),
{
    let mut by_class: BTreeMap<TaskLabel, ClassProfile> = BTreeMap::new();
    for (i, p) in corpus.iter().enumerate() {
        let profile = by_class.entry(p.label).or_insert_with(|| ClassProfile {
            label: p.label,
            vector: vec![0.0; dim],
            n_passages: 0,
        });
        add(i, &mut profile.vector);
        profile.n_passages += 1;
    }
    by_class.into_values().collect()
}

/// Sum of each class's passage tf-idf vectors, one profile per class present,
/// in canonical class order.
pub fn class_profiles_tfidf(corpus: &[LabeledPassage], vocab: &Vocabulary) -> Result<Vec<ClassProfile>> {
    require_classification(corpus)?;
    Ok(sum_by_class(corpus, vocab.len(), |i, acc| {
        vocab.transform_text(&corpus[i].text).add_to(acc)
    }))
}

/// Sum of each class's document-topic distributions. `model` must have been
/// fitted on `corpus`, in the same order.
pub fn class_profiles_lda(model: &TopicModel, corpus: &[LabeledPassage]) -> Result<Vec<ClassProfile>> {
    require_classification(corpus)?;
    if model.n_docs() != corpus.len() {
        return Err(Error::LengthMismatch {
            expected: corpus.len(),
            found: model.n_docs(),
        });
    }
    let mut theta = Vec::with_capacity(corpus.len());
    for d in 0..corpus.len() {
        theta.push(model.doc_topics(d)?);
    }
    Ok(sum_by_class(corpus, model.k(), |i, acc| {
        for (a, t) in acc.iter_mut().zip(&theta[i]) {
            *a += t;
        }
    }))
}

/// `u·v / (‖u‖‖v‖)`; zero when exactly one side is the zero vector.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    let nu = libm::sqrt(u.iter().map(|x| x * x).sum::<f64>());
    let nv = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    match (nu == 0.0, nv == 0.0) {
        (true, true) => Err(Error::ZeroVector),
        (true, false) | (false, true) => Ok(0.0),
        (false, false) => {
            let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
            Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarPair {
    pub left: TaskLabel,
    pub right: TaskLabel,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub labels: Vec<TaskLabel>,
    pub values: Vec<Vec<f64>>,
    /// The five most similar off-diagonal pairs, most similar first.
    pub top_pairs: Vec<SimilarPair>,
}

/// Pairwise cosine similarity between profiles.
pub fn similarity_matrix(profiles: &[ClassProfile]) -> Result<SimilarityMatrix> {
    if profiles.iter().any(|p| p.vector.iter().all(|&x| x == 0.0)) {
        return Err(Error::ZeroVector);
    }
    let n = profiles.len();
    let mut values = vec![vec![0.0; n]; n];
    for i in 0..n {
        values[i][i] = 1.0;
        for j in i + 1..n {
            let s = cosine_similarity(&profiles[i].vector, &profiles[j].vector)?;
            values[i][j] = s;
            values[j][i] = s;
        }
    }
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    pairs.sort_by(|a, b| values[b.0][b.1].total_cmp(&values[a.0][a.1]).then(a.cmp(b)));
    let top_pairs = pairs
        .into_iter()
        .take(5)
        .map(|(i, j)| SimilarPair {
            left: profiles[i].label,
            right: profiles[j].label,
            similarity: values[i][j],
        })
        .collect();
    Ok(SimilarityMatrix {
        labels: profiles.iter().map(|p| p.label).collect(),
        values,
        top_pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::DistortionLabel;
    use crate::textprep::analyze;
    use crate::textprep::NgramRange;
    use crate::vectorize::{fit_vocabulary, VocabParams};

    fn profile(l: DistortionLabel, v: &[f64]) -> ClassProfile {
        ClassProfile {
            label: TaskLabel::Classification(l),
            vector: v.to_vec(),
            n_passages: 1,
        }
    }

    #[test]
    fn cosine_examples() {
        assert!((cosine_similarity(&[1.0, 2.0], &[1.0, 2.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 3.0]).unwrap(), 0.0);
        let s = cosine_similarity(&[1.0, 1.0, 0.0], &[1.0, 0.0, 0.0]).unwrap();
        assert!((s - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(cosine_similarity(&[0.0], &[0.0]), Err(Error::ZeroVector));
    }

    #[test]
    fn tfidf_profiles_are_sums() {
        use DistortionLabel::*;
        let c = |id: &str, text: &str, l| LabeledPassage::new(id, text, TaskLabel::Classification(l));
        let corpus = vec![c("1", "a b", Blaming), c("2", "a b", Blaming), c("3", "c d", Filtering)];
        let docs: Vec<_> = corpus.iter().map(|p| analyze(&p.text, NgramRange::UNIGRAMS)).collect();
        let vocab = fit_vocabulary(&docs, VocabParams::new(NgramRange::UNIGRAMS, 1, 1.0)).unwrap();
        let profiles = class_profiles_tfidf(&corpus, &vocab).unwrap();
        assert_eq!(profiles.len(), 2);
        let single = vocab.transform(&docs[2]);
        for (i, v) in profiles[1].vector.iter().enumerate() {
            assert_eq!(*v, single.get(i));
        }
        let one = vocab.transform(&docs[0]);
        for (i, v) in profiles[0].vector.iter().enumerate() {
            assert!((v - 2.0 * one.get(i)).abs() < 1e-15);
        }
        assert_eq!(profiles[0].n_passages, 2);
    }

    #[test]
    fn similarity_matrix_shape_and_top_pairs() {
        use DistortionLabel::*;
        let ps = vec![
            profile(Blaming, &[1.0, 0.0, 0.0]),
            profile(Filtering, &[1.0, 0.0, 0.0]),
            profile(Shoulds, &[0.0, 1.0, 1.0]),
        ];
        let m = similarity_matrix(&ps).unwrap();
        assert_eq!(m.values[0][1], 1.0);
        for i in 0..3 {
            assert_eq!(m.values[i][i], 1.0);
            for j in 0..3 {
                assert_eq!(m.values[i][j], m.values[j][i]);
                assert!((0.0..=1.0).contains(&m.values[i][j]));
            }
        }
        assert_eq!(m.top_pairs.len(), 3);
        assert_eq!(m.top_pairs[0].similarity, 1.0);
        let mut bad = ps.clone();
        bad[2].vector = vec![0.0; 3];
        assert_eq!(similarity_matrix(&bad), Err(Error::ZeroVector));
    }
}
