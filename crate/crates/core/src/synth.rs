//! Seeded generator of annotated corpora with planted class-signature terms.
//!
//! Each passage draws its tokens from a shared Zipf-weighted background
//! vocabulary (`w1`, `w2`, ...); every token is independently swapped for one
//! of its class's signature terms (e.g. `blaming3`) with probability
//! `signature_probability`. Background and signature vocabularies never
//! overlap. Simulated annotators report the true label with probability
//! `1 − annotator_noise` and a uniformly chosen alternative otherwise.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotatedPassage, Annotation, LabeledPassage};
use crate::error::{Error, Result};
use crate::label::DistortionLabel;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DocsPerClass {
    Uniform(usize),
    PerClass(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthRange {
    pub min: usize,
    pub max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub classes: Vec<DistortionLabel>,
    pub docs_per_class: DocsPerClass,
    pub signature_terms_per_class: usize,
    pub signature_probability: f64,
    pub background_vocab_size: usize,
    pub passage_length: LengthRange,
    /// Share of the whole corpus made of background-only passages with
    /// empty label sets.
    pub not_distorted_fraction: f64,
    pub annotators: usize,
    pub annotator_noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            classes: DistortionLabel::DISTORTIONS.to_vec(),
            docs_per_class: DocsPerClass::Uniform(100),
            signature_terms_per_class: 10,
            signature_probability: 0.3,
            background_vocab_size: 2000,
            passage_length: LengthRange { min: 30, max: 60 },
            not_distorted_fraction: 0.0,
            annotators: 1,
            annotator_noise: 0.0,
            seed: 0,
        }
    }
}

/// Per-class passage counts of the clinical classification subset, canonical
/// class order.
pub const CLINICAL_CLASS_COUNTS: [usize; 15] = [0, 23, 53, 60, 187, 0, 1, 386, 4, 0, 260, 22, 25, 123, 20];

impl SynthConfig {
    /// Balanced 15-class corpus with one annotator per passage, shaped like
    /// the crowdsourced dataset (about 500 passages per class).
    pub fn crowd() -> Self {
        SynthConfig {
            docs_per_class: DocsPerClass::Uniform(511),
            ..SynthConfig::default()
        }
    }

    /// Skewed class counts, four noisy annotators and a 10.8% share of
    /// non-distorted passages, shaped like the clinical logs.
    pub fn clinical() -> Self {
        SynthConfig {
            docs_per_class: DocsPerClass::PerClass(CLINICAL_CLASS_COUNTS.to_vec()),
            signature_probability: 0.1,
            not_distorted_fraction: 0.108,
            annotators: 4,
            annotator_noise: 0.1,
            ..SynthConfig::default()
        }
    }

    fn invalid(field: &'static str, reason: &str) -> Error {
        Error::InvalidConfig {
            field,
            reason: reason.into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes.is_empty() {
            return Err(Self::invalid("classes", "must not be empty"));
        }
        if self.classes.contains(&DistortionLabel::NotDistorted) {
            return Err(Self::invalid("classes", "must not contain NotDistorted"));
        }
        let mut sorted = self.classes.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.classes.len() {
            return Err(Self::invalid("classes", "must be distinct"));
        }
        if let DocsPerClass::PerClass(counts) = &self.docs_per_class {
            if counts.len() != self.classes.len() {
                return Err(Self::invalid("docs_per_class", "needs one count per class"));
            }
        }
        if self.signature_terms_per_class == 0 {
            return Err(Self::invalid("signature_terms_per_class", "must be at least 1"));
        }
        if !(self.signature_probability > 0.0 && self.signature_probability <= 1.0) {
            return Err(Self::invalid("signature_probability", "must lie in (0, 1]"));
        }
        if self.background_vocab_size == 0 {
            return Err(Self::invalid("background_vocab_size", "must be at least 1"));
        }
        if self.passage_length.min < 2 || self.passage_length.min > self.passage_length.max {
            return Err(Self::invalid("passage_length", "needs 2 <= min <= max"));
        }
        if !(0.0..1.0).contains(&self.not_distorted_fraction) {
            return Err(Self::invalid("not_distorted_fraction", "must lie in [0, 1)"));
        }
        if self.annotators == 0 {
            return Err(Self::invalid("annotators", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.annotator_noise) {
            return Err(Self::invalid("annotator_noise", "must lie in [0, 1)"));
        }
        Ok(())
    }

    pub fn class_counts(&self) -> Vec<usize> {
        match &self.docs_per_class {
            DocsPerClass::Uniform(n) => vec![*n; self.classes.len()],
            DocsPerClass::PerClass(v) => v.clone(),
        }
    }

    /// Number of background-only passages: the configured fraction of the
    /// final corpus, rounded to the nearest passage.
    pub fn not_distorted_count(&self) -> usize {
        let distorted: usize = self.class_counts().iter().sum();
        let f = self.not_distorted_fraction;
        libm::round(f * distorted as f64 / (1.0 - f)) as usize
    }

    pub fn signature_terms(&self, class: DistortionLabel) -> Vec<String> {
        let slug = class.slug();
        (0..self.signature_terms_per_class)
            .map(|j| alloc::format!("{slug}{j}"))
            .collect()
    }

    pub fn background_term(rank: usize) -> String {
        alloc::format!("w{rank}")
    }
}

/// Rank-inverse cumulative weights over background ranks `1..=size`.
struct Zipf {
    cumulative: Vec<f64>,
}

impl Zipf {
    fn new(size: usize) -> Self {
        let mut total = 0.0;
        let cumulative = (1..=size)
            .map(|r| {
                total += 1.0 / r as f64;
                total
            })
            .collect();
        Zipf { cumulative }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let u = rng.gen::<f64>() * self.cumulative[self.cumulative.len() - 1];
        let i = self.cumulative.partition_point(|&c| c <= u);
        i.min(self.cumulative.len() - 1) + 1
    }
}

fn render(tokens: &[String]) -> String {
    let mut text = tokens.join(" ");
    if let Some(first) = text.get(0..1) {
        let upper = first.to_ascii_uppercase();
        text.replace_range(0..1, &upper);
    }
    text.push('.');
    text
}

/// Generates the corpus: every class's passages in configuration order, then
/// the non-distorted passages. Ids are `p00001`, `p00002`, ...
pub fn generate(config: &SynthConfig) -> Result<Vec<AnnotatedPassage>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let zipf = Zipf::new(config.background_vocab_size);
    let signatures: Vec<Vec<String>> = config.classes.iter().map(|&c| config.signature_terms(c)).collect();
    let counts = config.class_counts();
    let n_clean = config.not_distorted_count();
    let total = counts.iter().sum::<usize>() + n_clean;
    let width = id_width(total);
    let detection_mode = config.not_distorted_fraction > 0.0;

    let mut out = Vec::with_capacity(total);
    let mut next_id = 1;
    let make_tokens = |rng: &mut ChaCha8Rng, signature: Option<&[String]>| -> Vec<String> {
        let len = rng.gen_range(config.passage_length.min..=config.passage_length.max);
        (0..len)
            .map(|_| {
                let background = zipf.sample(rng);
                match signature {
                    Some(sig) if rng.gen_bool(config.signature_probability) => sig[rng.gen_range(0..sig.len())].clone(),
                    _ => SynthConfig::background_term(background),
                }
            })
            .collect()
    };

    // true label None = not distorted
    let annotate = |rng: &mut ChaCha8Rng, truth: Option<usize>| -> Vec<Annotation> {
        (0..config.annotators)
            .map(|a| {
                let mut alternatives: Vec<Option<usize>> = (0..config.classes.len())
                    .filter(|&c| Some(c) != truth)
                    .map(Some)
                    .collect();
                if truth.is_some() && detection_mode {
                    alternatives.push(None);
                }
                let pick = if alternatives.is_empty() || !rng.gen_bool(config.annotator_noise) {
                    truth
                } else {
                    alternatives[rng.gen_range(0..alternatives.len())]
                };
                Annotation::new(alloc::format!("a{}", a + 1), pick.map(|c| config.classes[c]))
            })
            .collect()
    };

    for (c, &n) in counts.iter().enumerate() {
        for _ in 0..n {
            let tokens = make_tokens(&mut rng, Some(&signatures[c]));
            let annotations = annotate(&mut rng, Some(c));
            out.push(AnnotatedPassage {
                id: alloc::format!("p{:0width$}", next_id),
                text: render(&tokens),
                annotations,
            });
            next_id += 1;
        }
    }
    for _ in 0..n_clean {
        let tokens = make_tokens(&mut rng, None);
        let annotations = annotate(&mut rng, None);
        out.push(AnnotatedPassage {
            id: alloc::format!("p{:0width$}", next_id),
            text: render(&tokens),
            annotations,
        });
        next_id += 1;
    }
    Ok(out)
}

/// Zero-padded id width: at least five digits.
fn id_width(total: usize) -> usize {
    let mut n = total;
    let mut digits = 1;
    while n >= 10 {
        n /= 10;
        digits += 1;
    }
    digits.max(5)
}

/// Permutes the labels across passages; texts and ids stay in place.
pub fn shuffle_labels(corpus: &[LabeledPassage], seed: u64) -> Vec<LabeledPassage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<_> = corpus.iter().map(|p| p.label).collect();
    labels.shuffle(&mut rng);
    corpus
        .iter()
        .zip(labels)
        .map(|(p, label)| LabeledPassage { label, ..p.clone() })
        .collect()
}
