//! Document-frequency filtered vocabularies and L2-normalized tf-idf vectors.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textprep::{analyze, NgramRange, TermSequence};

/// Parameters a vocabulary is fitted with. `min_df` is an absolute document
/// count, `max_df` a proportion of training documents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VocabParams {
    pub ngram_range: NgramRange,
    pub min_df: usize,
    pub max_df: f64,
}

impl VocabParams {
    pub fn new(ngram_range: NgramRange, min_df: usize, max_df: f64) -> Self {
        VocabParams {
            ngram_range,
            min_df,
            max_df,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ngram_range.validate()?;
        if self.min_df < 1 {
            return Err(Error::InvalidArgument("min_df must be at least 1".into()));
        }
        if !(self.max_df > 0.0 && self.max_df <= 1.0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "max_df must lie in (0, 1], got {}",
                self.max_df
            )));
        }
        Ok(())
    }
}

/// Largest admissible document frequency: `ceil(max_df * n_docs)`.
///
/// Products that land within rounding error of an integer are taken as that
/// integer, so `0.7 * 10` admits 7 documents rather than 8.
pub fn max_df_count(max_df: f64, n_docs: usize) -> usize {
    let x = max_df * n_docs as f64;
    let r = libm::round(x);
    if libm::fabs(x - r) <= 1e-9 * r.max(1.0) {
        r as usize
    } else {
        libm::ceil(x) as usize
    }
}

/// Smoothed inverse document frequency, `ln((1 + n) / (1 + df)) + 1`.
pub fn smoothed_idf(n_docs: usize, df: usize) -> f64 {
    libm::log((1.0 + n_docs as f64) / (1.0 + df as f64)) + 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocabEntry {
    pub term: String,
    pub index: usize,
    pub df: usize,
    pub idf: f64,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    params: VocabParams,
    n_train_docs: usize,
    terms: Vec<VocabEntry>,
}

/// A fitted term → (index, document frequency, idf) table.
///
/// Indices follow ascending byte-wise term order, so two fits on the same
/// documents produce identical vocabularies. Immutable after fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    params: VocabParams,
    n_train_docs: usize,
    entries: Vec<VocabEntry>,
    lookup: BTreeMap<String, usize>,
}

impl TryFrom<VocabularyRepr> for Vocabulary {
    type Error = Error;

    fn try_from(repr: VocabularyRepr) -> Result<Self> {
        repr.params.validate()?;
        let mut lookup = BTreeMap::new();
        for (i, e) in repr.terms.iter().enumerate() {
            if e.index != i {
                return Err(Error::InvalidArgument(alloc::format!(
                    "vocabulary entry {i} carries index {}",
                    e.index
                )));
            }
            if !e.idf.is_finite() || e.idf <= 0.0 {
                return Err(Error::InvalidArgument(alloc::format!(
                    "term {:?} has invalid idf",
                    e.term
                )));
            }
            if lookup.insert(e.term.clone(), i).is_some() {
                return Err(Error::InvalidArgument(alloc::format!(
                    "term {:?} appears twice",
                    e.term
                )));
            }
        }
        if lookup.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        Ok(Vocabulary {
            params: repr.params,
            n_train_docs: repr.n_train_docs,
            entries: repr.terms,
            lookup,
        })
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            params: v.params,
            n_train_docs: v.n_train_docs,
            terms: v.entries,
        }
    }
}

/// Fits a vocabulary on training documents only.
///
/// Keeps exactly the terms whose document frequency `d` satisfies
/// `min_df <= d <= ceil(max_df * N)`.
pub fn fit_vocabulary(train_docs: &[TermSequence], params: VocabParams) -> Result<Vocabulary> {
    params.validate()?;
    if train_docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let n = train_docs.len();
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in train_docs {
        let unique: BTreeSet<&str> = doc.terms().iter().map(String::as_str).collect();
        for t in unique {
            *df.entry(t).or_default() += 1;
        }
    }
    let upper = max_df_count(params.max_df, n);
    let mut entries = Vec::new();
    let mut lookup = BTreeMap::new();
    for (term, d) in df {
        if d < params.min_df || d > upper {
            continue;
        }
        let index = entries.len();
        lookup.insert(String::from(term), index);
        entries.push(VocabEntry {
            term: term.into(),
            index,
            df: d,
            idf: smoothed_idf(n, d),
        });
    }
    if entries.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    Ok(Vocabulary {
        params,
        n_train_docs: n,
        entries,
        lookup,
    })
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn params(&self) -> VocabParams {
        self.params
    }

    pub fn n_train_docs(&self) -> usize {
        self.n_train_docs
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.lookup.get(term).copied()
    }

    pub fn term(&self, index: usize) -> Option<&str> {
        self.entries.get(index).map(|e| e.term.as_str())
    }

    /// Raw term counts restricted to the vocabulary, keyed by index.
    pub fn counts(&self, doc: &TermSequence) -> BTreeMap<usize, usize> {
        let mut counts = BTreeMap::new();
        for t in doc.terms() {
            if let Some(i) = self.index_of(t) {
                *counts.entry(i).or_default() += 1;
            }
        }
        counts
    }

    /// tf-idf weights (raw count times idf) divided by their Euclidean norm.
    /// Out-of-vocabulary terms are ignored.
    pub fn transform(&self, doc: &TermSequence) -> TermVector {
        let weighted: Vec<(usize, f64)> = self
            .counts(doc)
            .into_iter()
            .map(|(i, c)| (i, c as f64 * self.entries[i].idf))
            .collect();
        TermVector::normalized(weighted)
    }

    /// Runs the text through normalization and n-gram expansion with this
    /// vocabulary's n-gram range, then transforms it.
    pub fn transform_text(&self, text: &str) -> TermVector {
        self.transform(&analyze(text, self.params.ngram_range))
    }

    pub fn transform_all(&self, docs: &[TermSequence]) -> DocTermMatrix {
        DocTermMatrix {
            rows: docs.iter().map(|d| self.transform(d)).collect(),
            n_features: self.len(),
        }
    }
}

/// Sparse vector of strictly positive weights, sorted by index.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TermVector {
    entries: Vec<(usize, f64)>,
}

impl TermVector {
    /// Builds a vector from index/weight pairs, dropping zero weights. The
    /// pairs must have distinct indices.
    pub fn from_pairs(mut pairs: Vec<(usize, f64)>) -> Self {
        pairs.retain(|&(_, w)| w != 0.0);
        pairs.sort_by_key(|&(i, _)| i);
        TermVector { entries: pairs }
    }

    fn normalized(pairs: Vec<(usize, f64)>) -> Self {
        let norm = libm::sqrt(pairs.iter().map(|&(_, w)| w * w).sum::<f64>());
        if norm == 0.0 {
            return TermVector::default();
        }
        TermVector::from_pairs(pairs.into_iter().map(|(i, w)| (i, w / norm)).collect())
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map(|k| self.entries[k].1)
            .unwrap_or(0.0)
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.entries.iter().map(|&(_, w)| w * w).sum::<f64>())
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, w)| w * dense[i]).sum()
    }

    /// Adds this vector into a dense accumulator.
    pub fn add_to(&self, dense: &mut [f64]) {
        for &(i, w) in &self.entries {
            dense[i] += w;
        }
    }
}

/// Rows of tf-idf vectors over a vocabulary of `n_features` terms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DocTermMatrix {
    pub rows: Vec<TermVector>,
    pub n_features: usize,
}

impl DocTermMatrix {
    pub fn new(rows: Vec<TermVector>, n_features: usize) -> Result<Self> {
        for r in &rows {
            if let Some(&(i, _)) = r.entries().last() {
                if i >= n_features {
                    return Err(Error::IndexOutOfRange {
                        index: i,
                        len: n_features,
                    });
                }
            }
        }
        Ok(DocTermMatrix { rows, n_features })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }
}
