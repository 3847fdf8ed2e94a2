//! Latent Dirichlet allocation by collapsed Gibbs sampling.
//!
//! Token `w` of document `d` is resampled from
//! `p(k) ∝ (n_dk + α)(n_kw + β) / (n_k + Vβ)`, visiting documents and tokens in
//! corpus order with one seeded generator, so a run is bitwise reproducible.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textprep::{analyze, NgramRange, TermSequence};
use crate::vectorize::{fit_vocabulary, VocabParams, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaParams {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub sweeps: usize,
    pub seed: u64,
}

impl Default for LdaParams {
    fn default() -> Self {
        LdaParams {
            k: 25,
            alpha: 0.1,
            beta: 0.01,
            sweeps: 1000,
            seed: 0,
        }
    }
}

/// Documents as word-id sequences over a unigram count vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct CountCorpus {
    pub vocabulary: Vocabulary,
    pub docs: Vec<Vec<usize>>,
}

/// Unigram word-id sequences for `texts`, keeping words that occur in at
/// least `min_df` documents. A text left without tokens is an error.
pub fn count_documents<S: AsRef<str>>(texts: &[S], min_df: usize) -> Result<CountCorpus> {
    let seqs: Vec<TermSequence> = texts
        .iter()
        .map(|t| analyze(t.as_ref(), NgramRange::UNIGRAMS))
        .collect();
    let vocabulary = fit_vocabulary(&seqs, VocabParams::new(NgramRange::UNIGRAMS, min_df, 1.0))?;
    let mut docs = Vec::with_capacity(seqs.len());
    for (d, seq) in seqs.iter().enumerate() {
        let ids: Vec<usize> = seq.terms().iter().filter_map(|t| vocabulary.index_of(t)).collect();
        if ids.is_empty() {
            return Err(Error::InvalidArgument(alloc::format!(
                "document {d} has no tokens in the count vocabulary"
            )));
        }
        docs.push(ids);
    }
    Ok(CountCorpus { vocabulary, docs })
}

/// Sampler state; call [`LdaSampler::sweep`] to advance one full pass.
#[derive(Debug, Clone)]
pub struct LdaSampler {
    params: LdaParams,
    vocab_size: usize,
    docs: Vec<Vec<usize>>,
    assignments: Vec<Vec<usize>>,
    doc_topic: Vec<u32>,
    topic_word: Vec<u32>,
    topic_totals: Vec<u32>,
    sweeps_done: usize,
    rng: ChaCha8Rng,
}

impl LdaSampler {
    /// Draws the initial topic of every token uniformly at random.
    pub fn new(docs: Vec<Vec<usize>>, vocab_size: usize, params: LdaParams) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if params.k < 1 {
            return Err(Error::InvalidArgument("topic count must be at least 1".into()));
        }
        if !(params.alpha > 0.0 && params.beta > 0.0) {
            return Err(Error::InvalidArgument("alpha and beta must be positive".into()));
        }
        for (d, doc) in docs.iter().enumerate() {
            if doc.is_empty() {
                return Err(Error::InvalidArgument(alloc::format!("document {d} is empty")));
            }
            if let Some(&w) = doc.iter().find(|&&w| w >= vocab_size) {
                return Err(Error::IndexOutOfRange {
                    index: w,
                    len: vocab_size,
                });
            }
        }
        let k = params.k;
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let mut doc_topic = vec![0u32; docs.len() * k];
        let mut topic_word = vec![0u32; k * vocab_size];
        let mut topic_totals = vec![0u32; k];
        let mut assignments = Vec::with_capacity(docs.len());
        for (d, doc) in docs.iter().enumerate() {
            let mut z = Vec::with_capacity(doc.len());
            for &w in doc {
                let t = rng.gen_range(0..k);
                doc_topic[d * k + t] += 1;
                topic_word[t * vocab_size + w] += 1;
                topic_totals[t] += 1;
                z.push(t);
            }
            assignments.push(z);
        }
        Ok(LdaSampler {
            params,
            vocab_size,
            docs,
            assignments,
            doc_topic,
            topic_word,
            topic_totals,
            sweeps_done: 0,
            rng,
        })
    }

    pub fn sweep(&mut self) {
        let k = self.params.k;
        let v = self.vocab_size;
        let (alpha, beta) = (self.params.alpha, self.params.beta);
        let v_beta = v as f64 * beta;
        let mut weights = vec![0.0f64; k];
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let w = self.docs[d][i];
                let old = self.assignments[d][i];
                self.doc_topic[d * k + old] -= 1;
                self.topic_word[old * v + w] -= 1;
                self.topic_totals[old] -= 1;

                let mut total = 0.0;
                for (t, slot) in weights.iter_mut().enumerate() {
                    let p = (self.doc_topic[d * k + t] as f64 + alpha) * (self.topic_word[t * v + w] as f64 + beta)
                        / (self.topic_totals[t] as f64 + v_beta);
                    total += p;
                    *slot = total;
                }
                let u = self.rng.gen::<f64>() * total;
                let new = weights.iter().position(|&c| u < c).unwrap_or(k - 1);

                self.doc_topic[d * k + new] += 1;
                self.topic_word[new * v + w] += 1;
                self.topic_totals[new] += 1;
                self.assignments[d][i] = new;
            }
        }
        self.sweeps_done += 1;
    }

    pub fn sweeps_done(&self) -> usize {
        self.sweeps_done
    }

    pub fn doc_topic_counts(&self, d: usize) -> &[u32] {
        &self.doc_topic[d * self.params.k..(d + 1) * self.params.k]
    }

    pub fn topic_word_counts(&self, t: usize) -> &[u32] {
        &self.topic_word[t * self.vocab_size..(t + 1) * self.vocab_size]
    }

    pub fn topic_totals(&self) -> &[u32] {
        &self.topic_totals
    }

    pub fn docs(&self) -> &[Vec<usize>] {
        &self.docs
    }

    pub fn into_model(self) -> TopicModel {
        TopicModel {
            params: LdaParams {
                sweeps: self.sweeps_done,
                ..self.params
            },
            vocab_size: self.vocab_size,
            doc_lengths: self.docs.iter().map(Vec::len).collect(),
            doc_topic: self.doc_topic,
            topic_word: self.topic_word,
            topic_totals: self.topic_totals,
        }
    }
}

/// Final-state counts of one Gibbs chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub params: LdaParams,
    pub vocab_size: usize,
    pub doc_lengths: Vec<usize>,
    /// Row-major `n_docs × k`.
    pub doc_topic: Vec<u32>,
    /// Row-major `k × vocab_size`.
    pub topic_word: Vec<u32>,
    pub topic_totals: Vec<u32>,
}

/// Runs `params.sweeps` sweeps and keeps the final counts.
pub fn lda_fit(docs: Vec<Vec<usize>>, vocab_size: usize, params: LdaParams) -> Result<TopicModel> {
    let mut sampler = LdaSampler::new(docs, vocab_size, params)?;
    for _ in 0..params.sweeps {
        sampler.sweep();
    }
    Ok(sampler.into_model())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicTerms {
    pub topic: usize,
    pub terms: Vec<(String, f64)>,
}

impl TopicModel {
    pub fn k(&self) -> usize {
        self.params.k
    }

    pub fn n_docs(&self) -> usize {
        self.doc_lengths.len()
    }

    /// `θ_dk = (n_dk + α) / (len_d + Kα)`.
    pub fn doc_topics(&self, d: usize) -> Result<Vec<f64>> {
        if d >= self.n_docs() {
            return Err(Error::IndexOutOfRange {
                index: d,
                len: self.n_docs(),
            });
        }
        let k = self.k();
        let alpha = self.params.alpha;
        let denom = self.doc_lengths[d] as f64 + k as f64 * alpha;
        Ok(self.doc_topic[d * k..(d + 1) * k]
            .iter()
            .map(|&n| (n as f64 + alpha) / denom)
            .collect())
    }

    /// `φ_kw = (n_kw + β) / (n_k + Vβ)`.
    pub fn topic_word_prob(&self, topic: usize, word: usize) -> f64 {
        let beta = self.params.beta;
        (self.topic_word[topic * self.vocab_size + word] as f64 + beta)
            / (self.topic_totals[topic] as f64 + self.vocab_size as f64 * beta)
    }

    /// The `n` most probable words of every topic.
    pub fn top_terms(&self, vocab: &Vocabulary, n: usize) -> Vec<TopicTerms> {
        (0..self.k())
            .map(|t| {
                let mut words: Vec<(usize, f64)> =
                    (0..self.vocab_size).map(|w| (w, self.topic_word_prob(t, w))).collect();
                words.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
                TopicTerms {
                    topic: t,
                    terms: words
                        .into_iter()
                        .take(n)
                        .map(|(w, p)| (String::from(vocab.term(w).unwrap_or_default()), p))
                        .collect(),
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k: usize, sweeps: usize) -> LdaParams {
        LdaParams {
            k,
            sweeps,
            seed: 4,
            ..LdaParams::default()
        }
    }

    #[test]
    fn single_topic_is_exactly_one() {
        let m = lda_fit(vec![vec![0, 1, 1], vec![2]], 3, params(1, 5)).unwrap();
        for d in 0..2 {
            assert_eq!(m.doc_topics(d).unwrap(), vec![1.0]);
        }
    }

    #[test]
    fn counts_are_conserved_after_each_sweep() {
        let docs = vec![vec![0, 1, 2, 2], vec![3, 4], vec![0, 4, 4, 1, 2]];
        let mut s = LdaSampler::new(docs.clone(), 5, params(3, 0)).unwrap();
        for _ in 0..10 {
            s.sweep();
            for (d, doc) in docs.iter().enumerate() {
                assert_eq!(s.doc_topic_counts(d).iter().sum::<u32>() as usize, doc.len());
            }
            for w in 0..5 {
                let freq = docs.iter().flatten().filter(|&&x| x == w).count();
                assert_eq!((0..3).map(|t| s.topic_word_counts(t)[w]).sum::<u32>() as usize, freq);
            }
        }
    }

    #[test]
    fn theta_rows_normalize_and_bad_input_is_rejected() {
        let m = lda_fit(vec![vec![0, 1], vec![1, 1, 0]], 2, params(4, 3)).unwrap();
        for d in 0..2 {
            assert!((m.doc_topics(d).unwrap().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert!(m.doc_topics(2).is_err());
        assert_eq!(lda_fit(vec![], 2, params(2, 1)), Err(Error::EmptyCorpus));
        assert!(lda_fit(vec![vec![]], 2, params(2, 1)).is_err());
        assert!(lda_fit(vec![vec![5]], 2, params(2, 1)).is_err());
        assert!(lda_fit(vec![vec![0]], 2, params(0, 1)).is_err());
    }

    #[test]
    fn uniform_counts_give_uniform_theta() {
        let m = TopicModel {
            params: params(4, 0),
            vocab_size: 1,
            doc_lengths: vec![8],
            doc_topic: vec![2, 2, 2, 2],
            topic_word: vec![2, 2, 2, 2],
            topic_totals: vec![2, 2, 2, 2],
        };
        for t in m.doc_topics(0).unwrap() {
            assert!((t - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn count_documents_drops_rare_words() {
        let c = count_documents(&["a b c", "a b", "b d"], 2).unwrap();
        assert_eq!(c.vocabulary.len(), 2);
        assert_eq!(c.docs, vec![vec![0, 1], vec![0, 1], vec![1]]);
        assert!(count_documents(&["a b", "c"], 2).is_err());
    }
}
