use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::weights::class_counts;
use crate::corpus::Sentiment;
use crate::error::{Error, Result};
use crate::eval::metrics::macro_f1;
use crate::features::{ColumnMatrix, DocTermMatrix, SparseVector};

pub const K_MAX: usize = 100;
/// Used when no validation split is available to choose `k`.
pub const FALLBACK_K: usize = 5;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KnnModel {
    pub x: DocTermMatrix,
    pub labels: Vec<Sentiment>,
    pub k: usize,
    pub prior_counts: [u64; 3],
    norms: Vec<f64>,
    #[serde(skip)]
    columns: OnceLock<ColumnMatrix>,
}

impl KnnModel {
    pub fn new(x: DocTermMatrix, labels: Vec<Sentiment>, k: usize) -> Result<Self> {
        if x.n_rows() == 0 {
            return Err(Error::InvalidInput("training set is empty".into()));
        }
        if x.n_rows() != labels.len() {
            return Err(Error::InvalidInput(format!("{} feature rows but {} labels", x.n_rows(), labels.len())));
        }
        check_k(k, x.n_rows())?;
        let norms = x.rows.iter().map(SparseVector::squared_norm).collect();
        let prior_counts = class_counts(&labels);
        Ok(KnnModel {
            x,
            labels,
            k,
            prior_counts,
            norms,
            columns: OnceLock::new(),
        })
    }

    fn columns(&self) -> &ColumnMatrix {
        self.columns.get_or_init(|| self.x.to_columns())
    }

    /// Training rows ordered by (distance, row index), truncated to `limit`.
    pub fn neighbors(&self, q: &SparseVector, limit: usize) -> Vec<(f64, usize)> {
        let cols = self.columns();
        let mut dots = vec![0.0; self.x.n_rows()];
        for (c, v) in q.iter() {
            if c >= self.x.n_cols {
                continue;
            }
            let (rows, vals) = cols.column(c);
            for (&r, &xv) in rows.iter().zip(vals) {
                dots[r as usize] += v * xv;
            }
        }
        let qn = q.iter().filter(|&(c, _)| c < self.x.n_cols).map(|(_, v)| v * v).sum::<f64>();
        let mut d: Vec<(f64, usize)> = dots
            .iter()
            .zip(&self.norms)
            .enumerate()
            .map(|(i, (&dot, &n))| ((n + qn - 2.0 * dot).max(0.0).sqrt(), i))
            .collect();
        let limit = limit.min(d.len());
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if limit < d.len() {
            d.select_nth_unstable_by(limit, cmp);
            d.truncate(limit);
        }
        d.sort_by(cmp);
        d
    }

    /// Majority label among the first `k` neighbors. Count ties go to the
    /// smaller summed distance, then the larger training prior, then label order.
    pub fn vote(&self, neighbors: &[(f64, usize)], k: usize) -> Sentiment {
        let mut count = [0usize; 3];
        let mut dist = [0.0f64; 3];
        for &(d, i) in &neighbors[..k.min(neighbors.len())] {
            let c = self.labels[i].index();
            count[c] += 1;
            dist[c] += d;
        }
        let mut best = 0usize;
        for c in 1..3 {
            let better = count[c] > count[best]
                || (count[c] == count[best]
                    && (dist[c] < dist[best]
                        || (dist[c] == dist[best] && self.prior_counts[c] > self.prior_counts[best])));
            if better {
                best = c;
            }
        }
        Sentiment::from_index(best).expect("class index below 3")
    }

    pub fn predict(&self, q: &SparseVector) -> Sentiment {
        self.predict_k(q, self.k)
    }

    pub fn predict_k(&self, q: &SparseVector, k: usize) -> Sentiment {
        self.vote(&self.neighbors(q, k), k)
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if k > n {
        return Err(Error::Config(format!("k = {k} exceeds the {n} training rows")));
    }
    Ok(())
}

pub fn knn_predict(model: &KnnModel, x: &SparseVector, k: usize) -> Result<Sentiment> {
    check_k(k, model.x.n_rows())?;
    Ok(model.predict_k(x, k))
}

/// The `k` in `k_range` with the best validation macro-F1; ties go to the smallest `k`.
pub fn select_k(
    model: &KnnModel,
    val_x: &DocTermMatrix,
    val_y: &[Sentiment],
    k_range: std::ops::RangeInclusive<usize>,
) -> Result<usize> {
    let hi = (*k_range.end()).min(model.x.n_rows());
    let lo = (*k_range.start()).max(1);
    if lo > hi {
        return Err(Error::Config(format!("empty k range {lo}..={hi}")));
    }
    if val_x.n_rows() != val_y.len() || val_y.is_empty() {
        return Err(Error::InvalidInput("validation set must be non-empty and labeled".into()));
    }
    let neighbor_lists: Vec<Vec<(f64, usize)>> = val_x.rows.par_iter().map(|q| model.neighbors(q, hi)).collect();
    let mut best = (f64::NEG_INFINITY, lo);
    for k in lo..=hi {
        let pred: Vec<Sentiment> = neighbor_lists.iter().map(|n| model.vote(n, k)).collect();
        let f1 = macro_f1(val_y, &pred)?;
        if f1 > best.0 {
            best = (f1, k);
        }
    }
    Ok(best.1)
}
