//! CART classification trees on sparse rows, weighted Gini impurity.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::weights::ClassWeights;
use crate::corpus::Sentiment;
use crate::error::{Error, Result};
use crate::features::{DocTermMatrix, SparseVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf { dist: [f64; 3] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn leaf_distribution(&self, x: &SparseVector) -> &[f64; 3] {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { dist } => return dist,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x.get(*feature as usize) <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    pub fn predict_proba(&self, x: &SparseVector) -> [f64; 3] {
        *self.leaf_distribution(x)
    }

    pub fn predict(&self, x: &SparseVector) -> Sentiment {
        let d = self.leaf_distribution(x);
        let mut best = 0;
        for c in 1..3 {
            if d[c] > d[best] {
                best = c;
            }
        }
        Sentiment::from_index(best).expect("class index below 3")
    }

    pub fn depth(&self) -> usize {
        let mut max = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((at, d)) = stack.pop() {
            max = max.max(d);
            if let Node::Split { left, right, .. } = self.nodes[at] {
                stack.push((left as usize, d + 1));
                stack.push((right as usize, d + 1));
            }
        }
        max
    }
}

/// Single tree on all rows, each weighted by its class weight, scanning every feature.
pub fn train_tree(x: &DocTermMatrix, y: &[Sentiment], w: &ClassWeights) -> Result<DecisionTree> {
    check(x, y)?;
    let samples: Vec<(u32, f64)> = y.iter().enumerate().map(|(i, l)| (i as u32, w.get(*l))).collect();
    Ok(grow_tree(x, y, samples, None, None))
}

pub(crate) fn check(x: &DocTermMatrix, y: &[Sentiment]) -> Result<()> {
    if x.n_rows() == 0 {
        return Err(Error::InvalidInput("training set is empty".into()));
    }
    if x.n_rows() != y.len() {
        return Err(Error::InvalidInput(format!("{} feature rows but {} labels", x.n_rows(), y.len())));
    }
    Ok(())
}

struct Scratch {
    count: Vec<u32>,
    first: Vec<f64>,
    varies: Vec<bool>,
    selected: Vec<bool>,
    touched: Vec<u32>,
}

#[derive(Clone, Copy)]
struct Candidate {
    score: f64,
    feature: u32,
    threshold: f64,
}

/// Grows a tree until nodes are pure, hold fewer than two distinct rows, or
/// have no feature that varies. `samples` lists distinct rows with positive
/// weight. With `max_features`, each node draws that many candidate features
/// uniformly among its non-constant features.
pub fn grow_tree(
    x: &DocTermMatrix,
    y: &[Sentiment],
    samples: Vec<(u32, f64)>,
    max_features: Option<usize>,
    mut rng: Option<&mut ChaCha8Rng>,
) -> DecisionTree {
    let f = x.n_cols;
    let mut scratch = Scratch {
        count: vec![0; f],
        first: vec![0.0; f],
        varies: vec![false; f],
        selected: vec![false; f],
        touched: Vec::new(),
    };
    let mut nodes = vec![Node::Leaf { dist: [0.0; 3] }];
    let mut stack = vec![(0usize, samples)];
    while let Some((id, samples)) = stack.pop() {
        let mut totals = [0.0; 3];
        for &(r, sw) in &samples {
            totals[y[r as usize].index()] += sw;
        }
        let mass: f64 = totals.iter().sum();
        let leaf = Node::Leaf {
            dist: if mass > 0.0 { totals.map(|t| t / mass) } else { [1.0 / 3.0; 3] },
        };
        let classes = totals.iter().filter(|&&t| t > 0.0).count();
        if classes <= 1 || samples.len() < 2 {
            nodes[id] = leaf;
            continue;
        }
        let mut features = non_constant_features(x, &samples, &mut scratch);
        if features.is_empty() {
            nodes[id] = leaf;
            continue;
        }
        if let (Some(m), Some(rng)) = (max_features, rng.as_deref_mut()) {
            if m < features.len() {
                for i in 0..m {
                    let j = rng.gen_range(i..features.len());
                    features.swap(i, j);
                }
                features.truncate(m);
                features.sort_unstable();
            }
        }
        let Some(best) = best_split(x, y, &samples, &features, &totals, &mut scratch) else {
            nodes[id] = leaf;
            continue;
        };
        let (left, right): (Vec<_>, Vec<_>) = samples
            .into_iter()
            .partition(|&(r, _)| x.rows[r as usize].get(best.feature as usize) <= best.threshold);
        let l = nodes.len();
        nodes.push(Node::Leaf { dist: [0.0; 3] });
        nodes.push(Node::Leaf { dist: [0.0; 3] });
        nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: l as u32,
            right: l as u32 + 1,
        };
        stack.push((l + 1, right));
        stack.push((l, left));
    }
    DecisionTree { nodes }
}

/// Features taking at least two distinct values (implicit zeros included) among `samples`, ascending.
fn non_constant_features(x: &DocTermMatrix, samples: &[(u32, f64)], s: &mut Scratch) -> Vec<u32> {
    for &(r, _) in samples {
        for (c, v) in x.rows[r as usize].iter() {
            if s.count[c] == 0 {
                s.touched.push(c as u32);
                s.first[c] = v;
            } else if v != s.first[c] {
                s.varies[c] = true;
            }
            s.count[c] += 1;
        }
    }
    let n = samples.len() as u32;
    let mut out: Vec<u32> = s
        .touched
        .iter()
        .copied()
        .filter(|&c| s.varies[c as usize] || s.count[c as usize] < n)
        .collect();
    for &c in &s.touched {
        s.count[c as usize] = 0;
        s.varies[c as usize] = false;
    }
    s.touched.clear();
    out.sort_unstable();
    out
}

fn gini_score(left: &[f64; 3], right: &[f64; 3]) -> f64 {
    // maximizing sum_c L_c^2 / |L| + sum_c R_c^2 / |R| minimizes weighted Gini
    let part = |side: &[f64; 3]| {
        let m: f64 = side.iter().sum();
        side.iter().map(|v| v * v).sum::<f64>() / m
    };
    part(left) + part(right)
}

fn best_split(
    x: &DocTermMatrix,
    y: &[Sentiment],
    samples: &[(u32, f64)],
    features: &[u32],
    totals: &[f64; 3],
    s: &mut Scratch,
) -> Option<Candidate> {
    for &c in features {
        s.selected[c as usize] = true;
    }
    // (feature, value, class, weight) for every stored entry of a candidate feature
    let mut entries: Vec<(u32, f64, u8, f64)> = Vec::new();
    for &(r, sw) in samples {
        let cls = y[r as usize].index() as u8;
        for (c, v) in x.rows[r as usize].iter() {
            if s.selected[c] {
                entries.push((c as u32, v, cls, sw));
            }
        }
    }
    for &c in features {
        s.selected[c as usize] = false;
    }
    entries.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)).then(a.3.total_cmp(&b.3)));

    let n = samples.len();
    let mut best: Option<Candidate> = None;
    let mut start = 0;
    while start < entries.len() {
        let feat = entries[start].0;
        let mut end = start;
        while end < entries.len() && entries[end].0 == feat {
            end += 1;
        }
        let group = &entries[start..end];
        start = end;

        let mut zero = *totals;
        for &(_, _, cls, sw) in group {
            zero[cls as usize] -= sw;
        }
        let zero_rows = n - group.len();
        // value-ordered runs: (value, class weights)
        let mut runs: Vec<(f64, [f64; 3])> = Vec::new();
        let mut zero_placed = zero_rows == 0;
        for &(_, v, cls, sw) in group {
            if !zero_placed && v > 0.0 {
                runs.push((0.0, zero.map(|z| z.max(0.0))));
                zero_placed = true;
            }
            match runs.last_mut() {
                Some((rv, w)) if *rv == v => w[cls as usize] += sw,
                _ => {
                    let mut w = [0.0; 3];
                    w[cls as usize] = sw;
                    runs.push((v, w));
                }
            }
        }
        if !zero_placed {
            runs.push((0.0, zero.map(|z| z.max(0.0))));
        }
        let mut left = [0.0; 3];
        for i in 0..runs.len().saturating_sub(1) {
            for c in 0..3 {
                left[c] += runs[i].1[c];
            }
            let right: [f64; 3] = std::array::from_fn(|c| (totals[c] - left[c]).max(0.0));
            if left.iter().sum::<f64>() <= 0.0 || right.iter().sum::<f64>() <= 0.0 {
                continue;
            }
            let score = gini_score(&left, &right);
            if best.is_none_or(|b| score > b.score) {
                let (a, b) = (runs[i].0, runs[i + 1].0);
                let mid = a + (b - a) / 2.0;
                best = Some(Candidate {
                    score,
                    feature: feat,
                    threshold: if mid < b { mid } else { a },
                });
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use Sentiment::*;

    fn sv(pairs: &[(u32, f64)]) -> SparseVector {
        SparseVector::from_pairs(pairs.to_vec())
    }

    #[test]
    fn separable_indicator_set() {
        let x = DocTermMatrix::new(
            vec![sv(&[(0, 1.0)]), sv(&[(1, 1.0)]), sv(&[(2, 1.0)]), sv(&[(0, 2.0)]), sv(&[(1, 3.0), (3, 1.0)])],
            4,
        );
        let y = [Negative, Neutral, Positive, Negative, Neutral];
        let t = train_tree(&x, &y, &ClassWeights::uniform()).unwrap();
        for (r, l) in x.rows.iter().zip(&y) {
            assert_eq!(t.predict(r), *l);
            let d = t.predict_proba(r);
            assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn threshold_is_midpoint() {
        let x = DocTermMatrix::new(vec![sv(&[(0, 1.0)]), sv(&[(0, 3.0)])], 1);
        let t = train_tree(&x, &[Negative, Positive], &ClassWeights::uniform()).unwrap();
        match &t.nodes[0] {
            Node::Split { threshold, .. } => assert_eq!(*threshold, 2.0),
            other => panic!("expected split, got {other:?}"),
        }
    }

    #[test]
    fn implicit_zero_splits() {
        // negative values sort before the implicit zero
        let x = DocTermMatrix::new(vec![sv(&[(0, -1.0)]), sv(&[]), sv(&[(0, 1.0)])], 1);
        let y = [Negative, Neutral, Positive];
        let t = train_tree(&x, &y, &ClassWeights::uniform()).unwrap();
        for (r, l) in x.rows.iter().zip(&y) {
            assert_eq!(t.predict(r), *l);
        }
    }

    #[test]
    fn identical_rows_make_mixed_leaf() {
        let x = DocTermMatrix::new(vec![sv(&[(0, 1.0)]), sv(&[(0, 1.0)])], 1);
        let t = train_tree(&x, &[Negative, Positive], &ClassWeights([3.0, 1.0, 1.0])).unwrap();
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.predict_proba(&x.rows[0]), [0.75, 0.0, 0.25]);
    }

    #[test]
    fn split_minimizes_weighted_gini() {
        // feature 0 separates perfectly; feature 1 does not
        let x = DocTermMatrix::new(
            vec![sv(&[(0, 1.0), (1, 1.0)]), sv(&[(0, 1.0)]), sv(&[(1, 1.0)]), sv(&[])],
            2,
        );
        let y = [Negative, Negative, Positive, Positive];
        let t = train_tree(&x, &y, &ClassWeights::uniform()).unwrap();
        assert!(matches!(t.nodes[0], Node::Split { feature: 0, .. }));
        assert_eq!(t.depth(), 1);
    }
}
