//! Library results checked against the brute-force references.

mod common;

use common::oracles;

use cogdist_core::classifier::LogisticObjective;
use cogdist_core::corpus::{adjudicate_classification, adjudicate_detection, AnnotatedPassage, Annotation};
use cogdist_core::evaluation::per_class_metrics;
use cogdist_core::exploration::{ward_cluster, ClassProfile};
use cogdist_core::textprep::{NgramRange, TermSequence};
use cogdist_core::vectorize::DocTermMatrix;
use cogdist_core::vectorize::{fit_vocabulary, TermVector, VocabParams};
use cogdist_core::{DistortionLabel, TaskLabel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LABELS: [DistortionLabel; 3] = [
    DistortionLabel::Blaming,
    DistortionLabel::Filtering,
    DistortionLabel::Shoulds,
];

/// Every annotator vote over three labels is one of eight subsets.
fn subset(mask: u8) -> Vec<u8> {
    (0..3).filter(|b| mask & (1 << b) != 0).collect()
}

#[test]
fn adjudication_matches_exhaustive_enumeration() {
    let mut checked = 0;
    for n in 1..=4u32 {
        for code in 0..8u32.pow(n) {
            let votes: Vec<Vec<u8>> = (0..n).map(|a| subset(((code >> (3 * a)) & 7) as u8)).collect();
            let passage = AnnotatedPassage {
                id: "p".into(),
                text: String::new(),
                annotations: votes
                    .iter()
                    .enumerate()
                    .map(|(a, v)| Annotation::new(format!("a{a}"), v.iter().map(|&l| LABELS[l as usize])))
                    .collect(),
            };
            let cls = adjudicate_classification(std::slice::from_ref(&passage)).unwrap();
            let expected =
                oracles::adjudicate_classification(&votes, 3).map(|l| TaskLabel::Classification(LABELS[l as usize]));
            assert_eq!(cls.kept.first().map(|p| p.label), expected, "{votes:?}");
            assert_eq!(cls.kept_count() + cls.discarded_count(), 1);

            let det = adjudicate_detection(std::slice::from_ref(&passage)).unwrap();
            let expected = oracles::adjudicate_detection(&votes);
            assert_eq!(
                det.kept.first().map(|p| p.label.name() == "Distorted"),
                expected,
                "{votes:?}"
            );
            checked += 1;
        }
    }
    assert_eq!(checked, 8 + 64 + 512 + 4096);
}

fn random_micro_corpus(rng: &mut ChaCha8Rng) -> Vec<Vec<String>> {
    let n_docs = rng.gen_range(1..=5);
    let n_terms = rng.gen_range(1..=10);
    (0..n_docs)
        .map(|_| {
            let len = rng.gen_range(0..=8);
            (0..len).map(|_| format!("t{}", rng.gen_range(0..n_terms))).collect()
        })
        .collect()
}

#[test]
fn tfidf_matches_brute_force_on_micro_corpora() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut compared = 0;
    for _ in 0..200 {
        let docs = random_micro_corpus(&mut rng);
        let min_df = rng.gen_range(1..=2);
        let max_df = [0.4, 0.6, 1.0][rng.gen_range(0..3)];
        let seqs: Vec<TermSequence> = docs.iter().cloned().map(TermSequence).collect();
        let Ok(vocab) = fit_vocabulary(&seqs, VocabParams::new(NgramRange::UNIGRAMS, min_df, max_df)) else {
            continue;
        };
        for doc in &docs {
            let got = vocab.transform(&TermSequence(doc.clone()));
            let want = oracles::tfidf(&docs, doc, min_df, max_df);
            assert_eq!(got.nnz(), want.len());
            for (term, w) in &want {
                let i = vocab.index_of(term).unwrap();
                assert!((got.get(i) - w).abs() < 1e-9);
            }
            compared += 1;
        }
    }
    assert!(compared > 100);
}

#[test]
fn ward_matches_full_rescan_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..100 {
        let n = rng.gen_range(4..=8);
        let dim = rng.gen_range(2..=6);
        let vectors: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        let profiles: Vec<ClassProfile> = vectors
            .iter()
            .enumerate()
            .map(|(i, v)| ClassProfile {
                label: TaskLabel::Classification(DistortionLabel::DISTORTIONS[i]),
                vector: v.clone(),
                n_passages: 1,
            })
            .collect();
        let got = ward_cluster(&profiles).unwrap();
        let want = oracles::ward_naive(&vectors);
        assert_eq!(got.merges.len(), n - 1);
        for (m, (l, r, h)) in got.merges.iter().zip(&want) {
            assert_eq!((m.left, m.right), (*l, *r));
            assert!((m.height - h).abs() < 1e-12);
        }
    }
}

#[test]
fn metrics_match_confusion_oracle_exhaustively() {
    let classes = LABELS.map(TaskLabel::Classification);
    for len in 1..=6u32 {
        let total = 3u32.pow(len);
        for a in 0..total {
            let y_true: Vec<TaskLabel> = (0..len).map(|i| classes[((a / 3u32.pow(i)) % 3) as usize]).collect();
            for b in 0..total {
                let y_pred: Vec<TaskLabel> = (0..len).map(|i| classes[((b / 3u32.pow(i)) % 3) as usize]).collect();
                let got = per_class_metrics(&y_true, &y_pred).unwrap();
                for m in &got {
                    let (p, r, f, s) = oracles::class_prf(&y_true, &y_pred, &m.label);
                    assert_eq!(m.support, s);
                    assert!((m.precision - p).abs() < 1e-12);
                    assert!((m.recall - r).abs() < 1e-12);
                    assert!((m.f1 - f).abs() < 1e-12);
                }
                let present = classes
                    .iter()
                    .filter(|c| y_true.contains(c) || y_pred.contains(c))
                    .count();
                assert_eq!(got.len(), present);
            }
        }
    }
}

#[test]
fn analytic_gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..10 {
        let (rows, features) = (50, 20);
        let x = DocTermMatrix::new(
            (0..rows)
                .map(|_| {
                    let mut pairs = Vec::new();
                    for j in 0..features {
                        if rng.gen_bool(0.3) {
                            pairs.push((j, rng.gen_range(-1.0..1.0)));
                        }
                    }
                    TermVector::from_pairs(pairs)
                })
                .collect(),
            features,
        )
        .unwrap();
        let y: Vec<bool> = (0..rows).map(|_| rng.gen_bool(0.5)).collect();
        let obj = LogisticObjective::new(&x, &y, rng.gen_range(0.1..10.0)).unwrap();
        let theta: Vec<f64> = (0..=features).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (_, g, gb) = obj.value_and_gradient(&theta[..features], theta[features]);
        let f = |t: &[f64]| obj.value(&t[..features], t[features]);
        let analytic = g.iter().copied().chain([gb]);
        for (j, an) in analytic.enumerate() {
            let fd = oracles::central_difference(f, &theta, j, 1e-5);
            let rel = (fd - an).abs() / fd.abs().max(an.abs()).max(1e-8);
            assert!(rel < 1e-4 || (fd - an).abs() < 1e-9, "coordinate {j}: {fd} vs {an}");
        }
    }
}
