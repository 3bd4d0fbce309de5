use serde::{Deserialize, Serialize};

use super::weights::ClassWeights;
use crate::corpus::Sentiment;
use crate::error::{Error, Result};
use crate::features::{DocTermMatrix, SparseVector};

/// Default budget for densifying a feature matrix (8 GiB).
pub const DEFAULT_MEMORY_BUDGET: u64 = 8 << 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NaiveBayesModel {
    Multinomial {
        /// Class mass used for the prior; zero for classes absent from training.
        class_mass: [f64; 3],
        feature_log_prob: [Vec<f64>; 3],
        alpha: f64,
    },
    Gaussian {
        class_mass: [f64; 3],
        mean: [Vec<f64>; 3],
        var: [Vec<f64>; 3],
        epsilon: f64,
        /// Log-likelihood of the all-zero vector per class.
        zero_loglik: [f64; 3],
    },
}

fn check(x: &DocTermMatrix, y: &[Sentiment]) -> Result<()> {
    if x.n_rows() == 0 {
        return Err(Error::InvalidInput("training set is empty".into()));
    }
    if x.n_rows() != y.len() {
        return Err(Error::InvalidInput(format!("{} feature rows but {} labels", x.n_rows(), y.len())));
    }
    Ok(())
}

/// Multinomial model with additive smoothing
/// `theta_ct = (count_ct + alpha) / (count_c + alpha |V|)`.
/// Optional class weights scale each document's counts and prior mass.
pub fn train_mnb(x: &DocTermMatrix, y: &[Sentiment], alpha: f64, w: Option<&ClassWeights>) -> Result<NaiveBayesModel> {
    check(x, y)?;
    if x.has_negative() {
        return Err(Error::InvalidInput("multinomial naive bayes needs nonnegative features".into()));
    }
    if !(alpha > 0.0) {
        return Err(Error::Config("smoothing alpha must be positive".into()));
    }
    let f = x.n_cols;
    let mut counts: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; f]);
    let mut class_mass = [0.0; 3];
    for (row, &l) in x.rows.iter().zip(y) {
        let sw = w.map_or(1.0, |w| w.get(l));
        let c = l.index();
        class_mass[c] += sw;
        for (i, v) in row.iter() {
            counts[c][i] += sw * v;
        }
    }
    let feature_log_prob = counts.map(|cnt| {
        let total: f64 = cnt.iter().sum::<f64>() + alpha * f as f64;
        cnt.iter().map(|&v| ((v + alpha) / total).ln()).collect()
    });
    Ok(NaiveBayesModel::Multinomial {
        class_mass,
        feature_log_prob,
        alpha,
    })
}

/// Bytes needed to hold `x` as a dense `f64` matrix.
pub fn dense_bytes(x: &DocTermMatrix) -> u128 {
    x.n_rows() as u128 * x.n_cols as u128 * 8
}

/// Gaussian model over the densified matrix. The densified size is checked
/// against `memory_budget` first; the statistics themselves are accumulated
/// sparsely, which gives the same values.
pub fn train_gnb(x: &DocTermMatrix, y: &[Sentiment], memory_budget: u64) -> Result<NaiveBayesModel> {
    check(x, y)?;
    let needed = dense_bytes(x);
    if needed > memory_budget as u128 {
        return Err(Error::ResourceExhausted {
            needed,
            budget: memory_budget as u128,
        });
    }
    let f = x.n_cols;
    let n = x.n_rows() as f64;
    let mut class_mass = [0.0; 3];
    let mut sum: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; f]);
    let mut sq: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; f]);
    let mut all_sum = vec![0.0; f];
    let mut all_sq = vec![0.0; f];
    for (row, &l) in x.rows.iter().zip(y) {
        let c = l.index();
        class_mass[c] += 1.0;
        for (i, v) in row.iter() {
            sum[c][i] += v;
            sq[c][i] += v * v;
            all_sum[i] += v;
            all_sq[i] += v * v;
        }
    }
    let max_var = (0..f)
        .map(|i| {
            let m = all_sum[i] / n;
            (all_sq[i] / n - m * m).max(0.0)
        })
        .fold(0.0, f64::max);
    // an all-constant matrix would otherwise leave every variance at zero
    let epsilon = if max_var > 0.0 { 1e-9 * max_var } else { 1e-9 };
    let mut mean: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; f]);
    let mut var: [Vec<f64>; 3] = std::array::from_fn(|_| vec![epsilon; f]);
    let mut zero_loglik = [0.0; 3];
    for c in 0..3 {
        let nc = class_mass[c];
        for i in 0..f {
            if nc > 0.0 {
                let m = sum[c][i] / nc;
                mean[c][i] = m;
                var[c][i] = (sq[c][i] / nc - m * m).max(0.0) + epsilon;
            }
            let (m, v) = (mean[c][i], var[c][i]);
            zero_loglik[c] += -0.5 * (2.0 * std::f64::consts::PI * v).ln() - m * m / (2.0 * v);
        }
    }
    Ok(NaiveBayesModel::Gaussian {
        class_mass,
        mean,
        var,
        epsilon,
        zero_loglik,
    })
}

impl NaiveBayesModel {
    fn class_mass(&self) -> &[f64; 3] {
        match self {
            NaiveBayesModel::Multinomial { class_mass, .. } | NaiveBayesModel::Gaussian { class_mass, .. } => class_mass,
        }
    }

    /// Unnormalized log posterior per class; `-inf` for classes never seen in training.
    pub fn joint_log_likelihood(&self, x: &SparseVector) -> [f64; 3] {
        let mass = self.class_mass();
        let total: f64 = mass.iter().sum();
        std::array::from_fn(|c| {
            if mass[c] == 0.0 {
                return f64::NEG_INFINITY;
            }
            let prior = (mass[c] / total).ln();
            match self {
                NaiveBayesModel::Multinomial { feature_log_prob, .. } => {
                    let lp = &feature_log_prob[c];
                    prior + x.iter().filter(|&(i, _)| i < lp.len()).map(|(i, v)| v * lp[i]).sum::<f64>()
                }
                NaiveBayesModel::Gaussian {
                    mean, var, zero_loglik, ..
                } => {
                    let (m, s) = (&mean[c], &var[c]);
                    let mut ll = zero_loglik[c];
                    for (i, v) in x.iter().filter(|&(i, _)| i < m.len()) {
                        ll += (m[i] * m[i] - (v - m[i]) * (v - m[i])) / (2.0 * s[i]);
                    }
                    prior + ll
                }
            }
        })
    }

    pub fn predict_proba(&self, x: &SparseVector) -> [f64; 3] {
        let j = self.joint_log_likelihood(x);
        let max = j.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e = j.map(|v| if v == f64::NEG_INFINITY { 0.0 } else { (v - max).exp() });
        let s: f64 = e.iter().sum();
        e.map(|v| v / s)
    }

    pub fn predict(&self, x: &SparseVector) -> Sentiment {
        let j = self.joint_log_likelihood(x);
        let mut best = 0;
        for c in 1..3 {
            if j[c] > j[best] {
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

    fn sv(pairs: &[(u32, f64)]) -> SparseVector {
        SparseVector::from_pairs(pairs.to_vec())
    }

    #[test]
    fn multinomial_closed_form() {
        // A = negative: [a,a], [a,b]; B = neutral: [b,b]
        let x = DocTermMatrix::new(vec![sv(&[(0, 2.0)]), sv(&[(0, 1.0), (1, 1.0)]), sv(&[(1, 2.0)])], 2);
        let y = [Negative, Negative, Neutral];
        let m = train_mnb(&x, &y, 1.0, None).unwrap();
        let NaiveBayesModel::Multinomial { feature_log_prob, .. } = &m else { unreachable!() };
        assert!((feature_log_prob[0][0].exp() - 4.0 / 6.0).abs() < 1e-12);
        assert!((feature_log_prob[1][1].exp() - 3.0 / 4.0).abs() < 1e-12);
        let p = m.predict_proba(&sv(&[(0, 1.0)]));
        // (2/3 * 2/3) / (2/3 * 2/3 + 1/3 * 1/4) = 16/19
        assert!((p[0] - 16.0 / 19.0).abs() < 1e-12);
        assert_eq!(p[2], 0.0);
        assert_eq!(m.predict(&sv(&[(0, 1.0)])), Negative);
    }

    #[test]
    fn identical_classes_give_prior() {
        let x = DocTermMatrix::new(vec![sv(&[(0, 1.0)]), sv(&[(0, 1.0)]), sv(&[(0, 1.0)])], 1);
        let y = [Negative, Negative, Positive];
        for m in [train_mnb(&x, &y, 1.0, None).unwrap(), train_gnb(&x, &y, DEFAULT_MEMORY_BUDGET).unwrap()] {
            let p = m.predict_proba(&sv(&[(0, 1.0)]));
            assert!((p[0] - 2.0 / 3.0).abs() < 1e-12);
            assert!((p[2] - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_features_rejected() {
        let x = DocTermMatrix::new(vec![sv(&[(0, -1.0)])], 1);
        assert!(train_mnb(&x, &[Negative], 1.0, None).is_err());
    }

    #[test]
    fn gaussian_separates_and_guards_memory() {
        let x = DocTermMatrix::new(
            vec![sv(&[(0, 1.0)]), sv(&[(0, 1.01)]), sv(&[(1, 5.0)]), sv(&[(1, 5.02)])],
            3,
        );
        let y = [Positive, Positive, Negative, Negative];
        let m = train_gnb(&x, &y, DEFAULT_MEMORY_BUDGET).unwrap();
        for (r, l) in x.rows.iter().zip(&y) {
            assert_eq!(m.predict(r), *l);
        }
        // feature 2 is zero everywhere: finite thanks to the variance floor
        assert!(m.joint_log_likelihood(&x.rows[0]).iter().any(|v| v.is_finite()));
        let err = train_gnb(&x, &y, 10).unwrap_err();
        assert!(err.is_resource());
    }

    #[test]
    fn gaussian_sparse_equals_dense() {
        let x = DocTermMatrix::new(
            vec![sv(&[(0, 1.0), (2, 0.5)]), sv(&[(1, 2.0)]), sv(&[(0, 3.0), (1, 1.0)]), sv(&[(2, 1.5)])],
            3,
        );
        let y = [Negative, Negative, Neutral, Neutral];
        let m = train_gnb(&x, &y, DEFAULT_MEMORY_BUDGET).unwrap();
        let NaiveBayesModel::Gaussian { mean, var, .. } = &m else { unreachable!() };
        let q = sv(&[(1, 0.7)]);
        let dense = q.to_dense(3);
        for c in 0..2 {
            let mut ll = 0.5f64.ln();
            for i in 0..3 {
                ll += -0.5 * (2.0 * std::f64::consts::PI * var[c][i]).ln()
                    - (dense[i] - mean[c][i]).powi(2) / (2.0 * var[c][i]);
            }
            let got = m.joint_log_likelihood(&q)[c];
            assert!((got - ll).abs() < 1e-9 * ll.abs().max(1.0), "{got} vs {ll}");
        }
    }
}
