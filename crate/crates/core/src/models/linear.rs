//! Multinomial logistic regression, one-vs-rest linear SVM and Platt scaling.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::weights::ClassWeights;
use super::TrainConfig;
use crate::corpus::Sentiment;
use crate::error::{Error, Result};
use crate::features::{DocTermMatrix, SparseVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearKind {
    Logreg,
    Svm,
}

/// `p = 1 / (1 + exp(a * s + b))` over a decision margin `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sigmoid {
    pub a: f64,
    pub b: f64,
}

impl Sigmoid {
    pub const IDENTITY_START: Sigmoid = Sigmoid { a: -1.0, b: 0.0 };

    pub fn eval(&self, s: f64) -> f64 {
        let z = self.a * s + self.b;
        if z >= 0.0 {
            let e = (-z).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + z.exp())
        }
    }

    /// Mean negative log-likelihood of binary targets.
    pub fn log_loss(&self, margins: &[f64], targets: &[bool]) -> f64 {
        let n = margins.len().max(1) as f64;
        margins
            .iter()
            .zip(targets)
            .map(|(&s, &t)| {
                let z = self.a * s + self.b;
                // -log p = log(1 + e^z), -log(1-p) = log(1 + e^-z)
                if t {
                    softplus(z)
                } else {
                    softplus(-z)
                }
            })
            .sum::<f64>()
            / n
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub kind: LinearKind,
    pub n_features: usize,
    pub weights: [Vec<f64>; 3],
    pub bias: [f64; 3],
    pub calibrator: Option<[Sigmoid; 3]>,
}

impl LinearModel {
    pub fn zeros(kind: LinearKind, n_features: usize) -> Self {
        LinearModel {
            kind,
            n_features,
            weights: std::array::from_fn(|_| vec![0.0; n_features]),
            bias: [0.0; 3],
            calibrator: None,
        }
    }

    /// Per-class decision values `w_c . x + b_c`.
    pub fn margins(&self, x: &SparseVector) -> [f64; 3] {
        std::array::from_fn(|c| {
            let w = &self.weights[c];
            x.iter()
                .filter(|&(i, _)| i < self.n_features)
                .map(|(i, v)| w[i] * v)
                .sum::<f64>()
                + self.bias[c]
        })
    }

    pub fn predict(&self, x: &SparseVector) -> Sentiment {
        let m = self.margins(x);
        let mut best = 0;
        for c in 1..3 {
            if m[c] > m[best] {
                best = c;
            }
        }
        Sentiment::from_index(best).expect("class index below 3")
    }

    /// Softmax for logistic regression; calibrated sigmoids for the SVM
    /// (`None` when the SVM has no calibrator).
    pub fn predict_proba(&self, x: &SparseVector) -> Option<[f64; 3]> {
        let m = self.margins(x);
        match (self.kind, &self.calibrator) {
            (LinearKind::Logreg, _) => Some(softmax(&m)),
            (LinearKind::Svm, Some(cal)) => {
                let p: [f64; 3] = std::array::from_fn(|c| cal[c].eval(m[c]));
                let z: f64 = p.iter().sum();
                Some(if z > 0.0 { p.map(|v| v / z) } else { [1.0 / 3.0; 3] })
            }
            (LinearKind::Svm, None) => None,
        }
    }
}

pub fn softmax(z: &[f64; 3]) -> [f64; 3] {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = z.map(|v| (v - max).exp());
    let s: f64 = e.iter().sum();
    e.map(|v| v / s)
}

fn check_training_set(x: &DocTermMatrix, y: &[Sentiment]) -> Result<()> {
    if x.n_rows() == 0 {
        return Err(Error::InvalidInput("training set is empty".into()));
    }
    if x.n_rows() != y.len() {
        return Err(Error::InvalidInput(format!(
            "{} feature rows but {} labels",
            x.n_rows(),
            y.len()
        )));
    }
    Ok(())
}

/// Class-weighted softmax cross-entropy with an L2 penalty on the weights
/// (biases are not penalized). Parameters are flattened as
/// `[w_0 (F values), w_1, w_2, b_0, b_1, b_2]`.
pub struct LogRegObjective<'a> {
    pub x: &'a DocTermMatrix,
    pub y: &'a [Sentiment],
    pub class_weights: ClassWeights,
    pub l2_lambda: f64,
}

impl LogRegObjective<'_> {
    pub fn n_params(&self) -> usize {
        3 * self.x.n_cols + 3
    }

    pub fn loss_and_grad(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let f = self.x.n_cols;
        let mut grad = vec![0.0; theta.len()];
        let total_w: f64 = self.y.iter().map(|&l| self.class_weights.get(l)).sum();
        let mut loss = 0.0;
        for (row, &label) in self.x.rows.iter().zip(self.y) {
            let z: [f64; 3] = std::array::from_fn(|c| {
                row.iter().map(|(i, v)| theta[c * f + i] * v).sum::<f64>() + theta[3 * f + c]
            });
            let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            let sw = self.class_weights.get(label) / total_w;
            loss += sw * (lse - z[label.index()]);
            for c in 0..3 {
                let p = (z[c] - lse).exp();
                let d = sw * (p - if c == label.index() { 1.0 } else { 0.0 });
                if d == 0.0 {
                    continue;
                }
                for (i, v) in row.iter() {
                    grad[c * f + i] += d * v;
                }
                grad[3 * f + c] += d;
            }
        }
        for k in 0..3 * f {
            loss += 0.5 * self.l2_lambda * theta[k] * theta[k];
            grad[k] += self.l2_lambda * theta[k];
        }
        (loss, grad)
    }
}

/// Loss after every accepted step, first entry at the starting point.
#[derive(Debug, Clone, Default)]
pub struct LogRegTrace {
    pub losses: Vec<f64>,
}

pub fn train_logreg(x: &DocTermMatrix, y: &[Sentiment], w: &ClassWeights, cfg: &TrainConfig) -> Result<LinearModel> {
    train_logreg_traced(x, y, w, cfg).map(|(m, _)| m)
}

/// Full-batch gradient descent. A step that would raise the loss is rejected
/// and retried at half the rate; accepted steps grow the rate by 10%, so the
/// recorded loss never increases.
pub fn train_logreg_traced(
    x: &DocTermMatrix,
    y: &[Sentiment],
    w: &ClassWeights,
    cfg: &TrainConfig,
) -> Result<(LinearModel, LogRegTrace)> {
    check_training_set(x, y)?;
    cfg.validate()?;
    let obj = LogRegObjective {
        x,
        y,
        class_weights: *w,
        l2_lambda: cfg.l2_lambda,
    };
    let mut theta = vec![0.0; obj.n_params()];
    let (mut loss, mut grad) = obj.loss_and_grad(&theta);
    let mut trace = LogRegTrace { losses: vec![loss] };
    let mut lr = cfg.learning_rate;
    let max_lr = cfg.learning_rate * 64.0;
    let mut iters = 0;
    while iters < cfg.max_iters {
        iters += 1;
        let trial: Vec<f64> = theta.iter().zip(&grad).map(|(t, g)| t - lr * g).collect();
        let (new_loss, new_grad) = obj.loss_and_grad(&trial);
        if !(new_loss <= loss) {
            lr *= 0.5;
            if lr < 1e-12 {
                break;
            }
            continue;
        }
        let improvement = loss - new_loss;
        theta = trial;
        loss = new_loss;
        grad = new_grad;
        trace.losses.push(loss);
        lr = (lr * 1.1).min(max_lr);
        if improvement < cfg.tolerance {
            break;
        }
    }
    Ok((unflatten(LinearKind::Logreg, x.n_cols, &theta), trace))
}

fn unflatten(kind: LinearKind, f: usize, theta: &[f64]) -> LinearModel {
    LinearModel {
        kind,
        n_features: f,
        weights: std::array::from_fn(|c| theta[c * f..(c + 1) * f].to_vec()),
        bias: std::array::from_fn(|c| theta[3 * f + c]),
        calibrator: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    /// Inverse regularization strength; the penalty is `1 / (2 C n) ||w||^2` per sample.
    pub c: f64,
    pub epochs: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams { c: 1.0, epochs: 30 }
    }
}

/// One-vs-rest class-weighted hinge loss, minimized with Pegasos-style
/// stochastic subgradient steps. The bias is an extra constant feature. The
/// returned weights average the iterates recorded at the end of each epoch in
/// the second half of training.
pub fn train_linear_svm(
    x: &DocTermMatrix,
    y: &[Sentiment],
    w: &ClassWeights,
    cfg: &TrainConfig,
    params: &SvmParams,
) -> Result<LinearModel> {
    check_training_set(x, y)?;
    if !(params.c > 0.0) || params.epochs == 0 {
        return Err(Error::Config("svm needs C > 0 and at least one epoch".into()));
    }
    let n = x.n_rows();
    let f = x.n_cols;
    let lambda = 1.0 / (params.c * n as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let orders: Vec<Vec<usize>> = (0..params.epochs)
        .map(|_| {
            let mut o: Vec<usize> = (0..n).collect();
            o.shuffle(&mut rng);
            o
        })
        .collect();
    let tail_start = params.epochs / 2;

    let mut model = LinearModel::zeros(LinearKind::Svm, f);
    for c in 0..3 {
        // w = scale * v, last slot of v is the bias
        let mut v = vec![0.0; f + 1];
        let mut scale = 1.0;
        let mut avg = vec![0.0; f + 1];
        let mut snapshots = 0usize;
        let mut t = 0usize;
        for (epoch, order) in orders.iter().enumerate() {
            for &i in order {
                t += 1;
                let eta = 1.0 / (lambda * t as f64);
                let row = &x.rows[i];
                let target = if y[i].index() == c { 1.0 } else { -1.0 };
                let margin = scale * (row.dot_dense(&v) + v[f]);
                let shrink = 1.0 - eta * lambda;
                if shrink <= 0.0 {
                    v.iter_mut().for_each(|e| *e = 0.0);
                    scale = 1.0;
                } else {
                    scale *= shrink;
                }
                if target * margin < 1.0 {
                    let step = eta * w.get(y[i]) * target / scale;
                    for (j, val) in row.iter() {
                        v[j] += step * val;
                    }
                    v[f] += step;
                }
                if scale < 1e-9 {
                    v.iter_mut().for_each(|e| *e *= scale);
                    scale = 1.0;
                }
            }
            if epoch >= tail_start {
                for (a, &e) in avg.iter_mut().zip(&v) {
                    *a += scale * e;
                }
                snapshots += 1;
            }
        }
        let k = snapshots as f64;
        model.weights[c] = avg[..f].iter().map(|a| a / k).collect();
        model.bias[c] = avg[f] / k;
    }
    Ok(model)
}

/// Fits one sigmoid per class on the model's margins and attaches them.
pub fn calibrate_platt(svm: &LinearModel, x_cal: &DocTermMatrix, y_cal: &[Sentiment]) -> Result<LinearModel> {
    if x_cal.n_rows() == 0 || x_cal.n_rows() != y_cal.len() {
        return Err(Error::InvalidInput("calibration set must be non-empty and labeled".into()));
    }
    if y_cal.iter().all(|&l| l == y_cal[0]) {
        return Err(Error::InvalidInput("calibration set contains a single class".into()));
    }
    let margins: Vec<[f64; 3]> = x_cal.rows.iter().map(|r| svm.margins(r)).collect();
    let cal: [Sigmoid; 3] = std::array::from_fn(|c| {
        let s: Vec<f64> = margins.iter().map(|m| m[c]).collect();
        let t: Vec<bool> = y_cal.iter().map(|l| l.index() == c).collect();
        fit_sigmoid(&s, &t)
    });
    let mut out = svm.clone();
    out.calibrator = Some(cal);
    Ok(out)
}

/// Gradient descent with backtracking on the mean log-loss, from `a = -1, b = 0`.
pub fn fit_sigmoid(margins: &[f64], targets: &[bool]) -> Sigmoid {
    let mut sig = Sigmoid::IDENTITY_START;
    let mut loss = sig.log_loss(margins, targets);
    let n = margins.len().max(1) as f64;
    let mut lr = 1.0;
    for _ in 0..500 {
        let (mut ga, mut gb) = (0.0, 0.0);
        for (&s, &t) in margins.iter().zip(targets) {
            // d/dz of the loss is (target ? 1 - p : -p) with p = sigmoid(-z)
            let p = sig.eval(s);
            let dz = if t { 1.0 - p } else { -p };
            ga += dz * s;
            gb += dz;
        }
        ga /= n;
        gb /= n;
        if ga * ga + gb * gb < 1e-18 {
            break;
        }
        let mut accepted = false;
        while lr > 1e-12 {
            let trial = Sigmoid {
                a: sig.a - lr * ga,
                b: sig.b - lr * gb,
            };
            let tl = trial.log_loss(margins, targets);
            if tl <= loss {
                let gain = loss - tl;
                sig = trial;
                loss = tl;
                accepted = gain > 1e-12;
                lr *= 2.0;
                break;
            }
            lr *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    sig
}
