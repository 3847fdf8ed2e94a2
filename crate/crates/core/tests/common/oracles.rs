//! Brute-force reference implementations, written independently of the
//! library code paths they check.
#![allow(dead_code)]

use std::collections::HashMap;

/// Strict-majority classification verdict by direct counting. Labels are
/// small integers; an annotator's vote is the list of labels they chose.
pub fn adjudicate_classification(votes: &[Vec<u8>], n_labels: u8) -> Option<u8> {
    let n = votes.len() as f64;
    let winners: Vec<u8> = (0..n_labels)
        .filter(|l| votes.iter().filter(|v| v.contains(l)).count() as f64 > n / 2.0)
        .collect();
    if winners.len() == 1 {
        Some(winners[0])
    } else {
        None
    }
}

/// `Some(true)` distorted, `Some(false)` not distorted, `None` tie.
pub fn adjudicate_detection(votes: &[Vec<u8>]) -> Option<bool> {
    let n = votes.len() as f64;
    let yes = votes.iter().filter(|v| !v.is_empty()).count() as f64;
    let no = n - yes;
    if yes > n / 2.0 {
        Some(true)
    } else if no > n / 2.0 {
        Some(false)
    } else {
        None
    }
}

/// tf-idf weights of `doc` against training `docs`, keyed by term. Applies
/// the df thresholds, counts raw term frequency, smoothed idf, L2 norm.
pub fn tfidf(docs: &[Vec<String>], doc: &[String], min_df: usize, max_df: f64) -> HashMap<String, f64> {
    let n = docs.len();
    let upper = (max_df * n as f64 - 1e-9).ceil() as usize;
    let mut raw = HashMap::new();
    for term in doc {
        if raw.contains_key(term) {
            continue;
        }
        let df = docs.iter().filter(|d| d.contains(term)).count();
        if df < min_df || df > upper || df == 0 {
            continue;
        }
        let tf = doc.iter().filter(|t| *t == term).count() as f64;
        let idf = ((1.0 + n as f64) / (1.0 + df as f64)).ln() + 1.0;
        raw.insert(term.clone(), tf * idf);
    }
    let norm = raw.values().map(|w| w * w).sum::<f64>().sqrt();
    raw.into_iter().map(|(t, w)| (t, w / norm)).collect()
}

/// Ward agglomeration by full rescan. The distance between two clusters is
/// recomputed from scratch each step by unfolding the later-formed cluster
/// through the Lance-Williams recurrence.
pub fn ward_naive(vectors: &[Vec<f64>]) -> Vec<(usize, usize, f64)> {
    let n = vectors.len();
    let cos_dist = |a: &[f64], b: &[f64]| {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        (1.0 - (dot / (na * nb)).clamp(-1.0, 1.0)).max(0.0)
    };
    // children[id - n] = (left, right); size[id]
    let mut children: Vec<(usize, usize)> = Vec::new();
    let mut size: Vec<usize> = vec![1; n];
    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::new();

    fn dist(
        x: usize,
        y: usize,
        n: usize,
        vectors: &[Vec<f64>],
        children: &[(usize, usize)],
        size: &[usize],
        cos_dist: &dyn Fn(&[f64], &[f64]) -> f64,
    ) -> f64 {
        if x < n && y < n {
            return cos_dist(&vectors[x], &vectors[y]);
        }
        let (later, other) = if x > y { (x, y) } else { (y, x) };
        let (i, j) = children[later - n];
        let d_ik = dist(i, other, n, vectors, children, size, cos_dist);
        let d_jk = dist(j, other, n, vectors, children, size, cos_dist);
        let d_ij = dist(i, j, n, vectors, children, size, cos_dist);
        let (ni, nj, nk) = (size[i] as f64, size[j] as f64, size[other] as f64);
        let v = ((ni + nk) * d_ik * d_ik + (nj + nk) * d_jk * d_jk - nk * d_ij * d_ij) / (ni + nj + nk);
        v.max(0.0).sqrt()
    }

    while active.len() > 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..active.len() {
            for b in a + 1..active.len() {
                let (l, r) = (active[a].min(active[b]), active[a].max(active[b]));
                let d = dist(l, r, n, vectors, &children, &size, &cos_dist);
                let better = match best {
                    None => true,
                    Some((bd, bl, br)) => d < bd || (d == bd && (l, r) < (bl, br)),
                };
                if better {
                    best = Some((d, l, r));
                }
            }
        }
        let (d, l, r) = best.unwrap();
        let id = n + children.len();
        children.push((l, r));
        size.push(size[l] + size[r]);
        active.retain(|&c| c != l && c != r);
        active.push(id);
        merges.push((l, r, d));
    }
    merges
}

/// (precision, recall, f1, support) for `class` by direct counting.
pub fn class_prf<T: PartialEq>(y_true: &[T], y_pred: &[T], class: &T) -> (f64, f64, f64, usize) {
    let mut tp = 0;
    let mut fp = 0;
    let mut fn_ = 0;
    for (t, p) in y_true.iter().zip(y_pred) {
        match (t == class, p == class) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            _ => {}
        }
    }
    let p = if tp + fp == 0 {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let r = if tp + fn_ == 0 {
        0.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f, tp + fn_)
}

/// Central finite difference of `f` along coordinate `j`.
pub fn central_difference<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], j: usize, h: f64) -> f64 {
    let mut plus = x.to_vec();
    let mut minus = x.to_vec();
    plus[j] += h;
    minus[j] -= h;
    (f(&plus) - f(&minus)) / (2.0 * h)
}
