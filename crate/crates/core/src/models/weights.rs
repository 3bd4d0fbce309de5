use serde::{Deserialize, Serialize};

use crate::corpus::Sentiment;
use crate::error::{Error, Result};

/// Per-class counts, indexed by [`Sentiment::index`].
pub fn class_counts(labels: &[Sentiment]) -> [u64; 3] {
    let mut counts = [0u64; 3];
    for l in labels {
        counts[l.index()] += 1;
    }
    counts
}

/// Balanced weights `w_c = n / (k * n_c)` over the `k` classes present.
/// Classes absent from the labels get weight 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights(pub [f64; 3]);

impl ClassWeights {
    pub fn uniform() -> Self {
        ClassWeights([1.0; 3])
    }

    pub fn from_counts(counts: [u64; 3]) -> Self {
        let n: u64 = counts.iter().sum();
        let present = counts.iter().filter(|&&c| c > 0).count() as f64;
        let mut w = [1.0; 3];
        for (wc, &nc) in w.iter_mut().zip(&counts) {
            if nc > 0 {
                *wc = n as f64 / (present * nc as f64);
            }
        }
        ClassWeights(w)
    }

    pub fn get(&self, s: Sentiment) -> f64 {
        self.0[s.index()]
    }
}

pub fn compute_class_weights(labels: &[Sentiment]) -> Result<ClassWeights> {
    if labels.is_empty() {
        return Err(Error::InvalidInput("class weights need at least one label".into()));
    }
    Ok(ClassWeights::from_counts(class_counts(labels)))
}

/// Among the classes whose score equals the maximum, picks the one with the
/// larger training count, then the lexicographically smaller label.
pub fn argmax_with_prior(scores: &[f64; 3], prior_counts: &[u64; 3]) -> Sentiment {
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut pick: Option<usize> = None;
    for c in 0..3 {
        if scores[c] != best {
            continue;
        }
        pick = match pick {
            Some(p) if prior_counts[p] >= prior_counts[c] => Some(p),
            _ => Some(c),
        };
    }
    // label index order is lexicographic: negative < neutral < positive
    Sentiment::from_index(pick.unwrap_or(0)).expect("class index below 3")
}
