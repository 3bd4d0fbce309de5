use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{check, grow_tree, DecisionTree};
use super::weights::ClassWeights;
use super::TrainConfig;
use crate::corpus::Sentiment;
use crate::error::{Error, Result};
use crate::features::{DocTermMatrix, SparseVector};

pub const DEFAULT_N_ESTIMATORS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<DecisionTree>,
    pub n_estimators: usize,
    pub seed: u64,
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of tree `index`: `splitmix64(splitmix64(seed) ^ index)`.
pub fn tree_seed(seed: u64, index: usize) -> u64 {
    splitmix64(splitmix64(seed) ^ index as u64)
}

/// `max(1, floor(sqrt(n_features)))`.
pub fn sqrt_features(n_features: usize) -> usize {
    ((n_features as f64).sqrt().floor() as usize).max(1)
}

/// Draw counts of an `n`-row bootstrap sample.
pub fn bootstrap_counts(n: usize, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let mut counts = vec![0u32; n];
    for _ in 0..n {
        counts[rng.gen_range(0..n)] += 1;
    }
    counts
}

/// One forest member: bootstrap from the tree seed, then the same stream drives feature sampling.
pub fn train_member(x: &DocTermMatrix, y: &[Sentiment], w: &ClassWeights, seed: u64) -> DecisionTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = bootstrap_counts(x.n_rows(), &mut rng);
    let samples: Vec<(u32, f64)> = counts
        .iter()
        .enumerate()
        .filter(|&(_, &k)| k > 0)
        .map(|(i, &k)| (i as u32, k as f64 * w.get(y[i])))
        .collect();
    grow_tree(x, y, samples, Some(sqrt_features(x.n_cols)), Some(&mut rng))
}

/// Trees are trained in parallel; each depends only on its own seed, so the
/// result does not depend on the thread count.
pub fn train_forest(
    x: &DocTermMatrix,
    y: &[Sentiment],
    w: &ClassWeights,
    n_estimators: usize,
    cfg: &TrainConfig,
) -> Result<ForestModel> {
    check(x, y)?;
    if n_estimators == 0 {
        return Err(Error::Config("a forest needs at least one tree".into()));
    }
    let trees = (0..n_estimators)
        .into_par_iter()
        .map(|i| train_member(x, y, w, tree_seed(cfg.seed, i)))
        .collect();
    Ok(ForestModel {
        trees,
        n_estimators,
        seed: cfg.seed,
    })
}

impl ForestModel {
    /// Mean of the trees' leaf distributions, summed in tree order.
    pub fn predict_proba(&self, x: &SparseVector) -> [f64; 3] {
        let mut acc = [0.0; 3];
        for t in &self.trees {
            let d = t.leaf_distribution(x);
            for c in 0..3 {
                acc[c] += d[c];
            }
        }
        let n = self.trees.len() as f64;
        acc.map(|v| v / n)
    }

    pub fn predict(&self, x: &SparseVector) -> Sentiment {
        let p = self.predict_proba(x);
        let mut best = 0;
        for c in 1..3 {
            if p[c] > p[best] {
                best = c;
            }
        }
        Sentiment::from_index(best).expect("class index below 3")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Sentiment::*;

    fn toy() -> (DocTermMatrix, Vec<Sentiment>) {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for rep in 0..8u32 {
            for c in 0..3u32 {
                rows.push(SparseVector::from_pairs(vec![(c, 1.0 + rep as f64 / 10.0), (3 + rep % 3, 0.3)]));
                y.push(Sentiment::from_index(c as usize).unwrap());
            }
        }
        (DocTermMatrix::new(rows, 6), y)
    }

    #[test]
    fn single_tree_forest_matches_member() {
        let (x, y) = toy();
        let w = ClassWeights::uniform();
        let cfg = TrainConfig::default();
        let f = train_forest(&x, &y, &w, 1, &cfg).unwrap();
        let t = train_member(&x, &y, &w, tree_seed(cfg.seed, 0));
        assert_eq!(f.trees[0], t);
        for r in &x.rows {
            assert_eq!(f.predict(r), t.predict(r));
        }
    }

    #[test]
    fn separable_and_normalized() {
        let (x, y) = toy();
        let f = train_forest(&x, &y, &ClassWeights::uniform(), 25, &TrainConfig::default()).unwrap();
        assert_eq!(f.trees.len(), 25);
        for (r, l) in x.rows.iter().zip(&y) {
            assert_eq!(f.predict(r), *l);
            assert!((f.predict_proba(r).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn pure_agreement_gives_certainty() {
        let x = DocTermMatrix::new(vec![SparseVector::default(); 4], 1);
        let y = vec![Positive; 4];
        let f = train_forest(&x, &y, &ClassWeights::uniform(), 5, &TrainConfig::default()).unwrap();
        assert_eq!(f.predict_proba(&SparseVector::default()), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let (x, y) = toy();
        let w = ClassWeights::uniform();
        let cfg = TrainConfig::default();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| train_forest(&x, &y, &w, 12, &cfg).unwrap());
        let b = four.install(|| train_forest(&x, &y, &w, 12, &cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn seeds_differ_per_tree() {
        assert_ne!(tree_seed(0, 0), tree_seed(0, 1));
        assert_ne!(tree_seed(0, 0), tree_seed(1, 0));
        assert_eq!(sqrt_features(27000), 164);
        assert_eq!(sqrt_features(0), 1);
    }
}
