use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::profiles::{cosine_similarity, ClassProfile};

/// One agglomeration step. Leaves are nodes `0..n`; merge `t` creates node
/// `n + t`. `left < right` always.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub leaves: Vec<String>,
    pub merges: Vec<Merge>,
    /// Indices of merges lower than their predecessor.
    pub monotonicity_violations: Vec<usize>,
}

/// Ward agglomeration over the cosine distance `1 − cos` between profiles.
pub fn ward_cluster(profiles: &[ClassProfile]) -> Result<Dendrogram> {
    if profiles.len() < 2 {
        return Err(Error::InvalidArgument("clustering needs at least two profiles".into()));
    }
    if profiles.iter().any(|p| p.vector.iter().all(|&x| x == 0.0)) {
        return Err(Error::ZeroVector);
    }
    let n = profiles.len();
    let mut dist = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = (1.0 - cosine_similarity(&profiles[i].vector, &profiles[j].vector)?).max(0.0);
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    let merges = ward_linkage(dist);
    Ok(Dendrogram::new(
        profiles.iter().map(|p| String::from(p.label.name())).collect(),
        merges,
    ))
}

/// Lance-Williams update for Ward linkage: distance from cluster `k` to the
/// union of `i` and `j`.
pub(crate) fn ward_update(d_ik: f64, d_jk: f64, d_ij: f64, n_i: usize, n_j: usize, n_k: usize) -> f64 {
    let (ni, nj, nk) = (n_i as f64, n_j as f64, n_k as f64);
    let num = (ni + nk) * d_ik * d_ik + (nj + nk) * d_jk * d_jk - nk * d_ij * d_ij;
    libm::sqrt((num / (ni + nj + nk)).max(0.0))
}

/// Agglomerates a symmetric distance matrix. Ties go to the pair with the
/// smallest `(left id, right id)`.
pub fn ward_linkage(mut dist: Vec<Vec<f64>>) -> Vec<Merge> {
    let n = dist.len();
    // slot -> (node id, size); merged clusters reuse the lower slot
    let mut slots: Vec<Option<(usize, usize)>> = (0..n).map(|i| Some((i, 1))).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for step in 0..n.saturating_sub(1) {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for a in 0..n {
            let Some((id_a, _)) = slots[a] else { continue };
            for b in a + 1..n {
                let Some((id_b, _)) = slots[b] else { continue };
                let key = (dist[a][b], id_a.min(id_b), id_a.max(id_b));
                let better = match best {
                    None => true,
                    Some((d, l, r, _, _)) => key.0 < d || (key.0 == d && (key.1, key.2) < (l, r)),
                };
                if better {
                    best = Some((key.0, key.1, key.2, a, b));
                }
            }
        }
        let Some((height, left, right, a, b)) = best else { break };
        let (size_a, size_b) = (slots[a].map_or(0, |s| s.1), slots[b].map_or(0, |s| s.1));
        for k in 0..n {
            if k == a || k == b {
                continue;
            }
            let Some((_, size_k)) = slots[k] else { continue };
            let d = ward_update(dist[a][k], dist[b][k], height, size_a, size_b, size_k);
            dist[a][k] = d;
            dist[k][a] = d;
        }
        slots[a] = Some((n + step, size_a + size_b));
        slots[b] = None;
        merges.push(Merge {
            left,
            right,
            height,
            size: size_a + size_b,
        });
    }
    merges
}

impl Dendrogram {
    pub fn new(leaves: Vec<String>, merges: Vec<Merge>) -> Self {
        let monotonicity_violations = merges
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[1].height < w[0].height)
            .map(|(i, _)| i + 1)
            .collect();
        Dendrogram {
            leaves,
            merges,
            monotonicity_violations,
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.leaves.len()
    }

    fn height_of(&self, node: usize) -> f64 {
        if node < self.n_leaves() {
            0.0
        } else {
            self.merges[node - self.n_leaves()].height
        }
    }

    /// Newick string with branch lengths equal to height differences.
    pub fn to_newick(&self) -> String {
        let mut out = String::new();
        if self.merges.is_empty() {
            for (i, leaf) in self.leaves.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&newick_label(leaf));
            }
            out.push(';');
            return out;
        }
        let root = self.n_leaves() + self.merges.len() - 1;
        self.write_node(root, &mut out);
        out.push(';');
        out
    }

    fn write_node(&self, node: usize, out: &mut String) {
        let n = self.n_leaves();
        if node < n {
            out.push_str(&newick_label(&self.leaves[node]));
            return;
        }
        let m = self.merges[node - n];
        out.push('(');
        for (i, child) in [m.left, m.right].into_iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            self.write_node(child, out);
            let _ = write!(out, ":{}", m.height - self.height_of(child));
        }
        out.push(')');
    }
}

fn newick_label(label: &str) -> String {
    if label.chars().any(|c| " ()[]':;,".contains(c)) {
        let mut s = String::from("'");
        s.push_str(&label.replace('\'', "''"));
        s.push('\'');
        s
    } else {
        label.into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::{DistortionLabel, TaskLabel};

    fn profile(i: usize, v: &[f64]) -> ClassProfile {
        ClassProfile {
            label: TaskLabel::Classification(DistortionLabel::DISTORTIONS[i]),
            vector: v.to_vec(),
            n_passages: 1,
        }
    }

    #[test]
    fn duplicates_merge_first_at_zero() {
        let ps = [
            profile(0, &[1.0, 0.0, 0.2]),
            profile(1, &[0.0, 1.0, 0.0]),
            profile(2, &[1.0, 0.0, 0.2]),
            profile(3, &[0.3, 0.3, 1.0]),
        ];
        let d = ward_cluster(&ps).unwrap();
        assert_eq!((d.merges[0].left, d.merges[0].right), (0, 2));
        assert_eq!(d.merges[0].height, 0.0);
        assert_eq!(d.merges.len(), 3);
        assert_eq!(d.merges.last().unwrap().size, 4);
        assert!(d.monotonicity_violations.is_empty());
    }

    #[test]
    fn two_leaves_single_merge() {
        let u = [1.0, 2.0, 0.0];
        let v = [0.5, 0.0, 1.0];
        let d = ward_cluster(&[profile(0, &u), profile(1, &v)]).unwrap();
        let cos = cosine_similarity(&u, &v).unwrap();
        assert_eq!(d.merges.len(), 1);
        assert!((d.merges[0].height - (1.0 - cos)).abs() < 1e-15);
        assert_eq!(
            d.to_newick(),
            alloc::format!("('Being Right':{h},Blaming:{h});", h = 1.0 - cos)
        );
    }

    #[test]
    fn errors() {
        assert!(ward_cluster(&[profile(0, &[1.0])]).is_err());
        assert_eq!(
            ward_cluster(&[profile(0, &[1.0, 0.0]), profile(1, &[0.0, 0.0])]),
            Err(Error::ZeroVector)
        );
    }

    #[test]
    fn newick_quotes_apostrophes() {
        assert_eq!(newick_label("Heaven's Reward Fallacy"), "'Heaven''s Reward Fallacy'");
        assert_eq!(newick_label("Blaming"), "Blaming");
    }
}
