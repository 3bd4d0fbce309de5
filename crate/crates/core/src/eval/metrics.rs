use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::Sentiment;
use crate::error::{Error, Result};

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 3]; 3],
}

impl ConfusionMatrix {
    pub fn from_labels(y_true: &[Sentiment], y_pred: &[Sentiment]) -> Result<Self> {
        if y_true.len() != y_pred.len() {
            return Err(Error::InvalidInput(format!(
                "{} true labels but {} predictions",
                y_true.len(),
                y_pred.len()
            )));
        }
        if y_true.is_empty() {
            return Err(Error::InvalidInput("cannot evaluate an empty prediction set".into()));
        }
        let mut m = ConfusionMatrix::default();
        for (t, p) in y_true.iter().zip(y_pred) {
            m.counts[t.index()][p.index()] += 1;
        }
        Ok(m)
    }

    pub fn row_sum(&self, c: usize) -> u64 {
        self.counts[c].iter().sum()
    }

    pub fn col_sum(&self, c: usize) -> u64 {
        (0..3).map(|r| self.counts[r][c]).sum()
    }

    pub fn total(&self) -> u64 {
        (0..3).map(|r| self.row_sum(r)).sum()
    }

    pub fn scores(&self, c: usize) -> ClassScores {
        let tp = self.counts[c][c] as f64;
        let pred = self.col_sum(c) as f64;
        let actual = self.row_sum(c) as f64;
        let precision = if pred > 0.0 { tp / pred } else { 0.0 };
        let recall = if actual > 0.0 { tp / actual } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        ClassScores { precision, recall, f1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub confusion: ConfusionMatrix,
    pub per_class: [ClassScores; 3],
    pub macro_f1: f64,
    pub accuracy: f64,
}

/// Precision, recall and F1 for each of the three classes (absent classes score 0),
/// their unweighted mean F1, and accuracy.
pub fn evaluate(y_true: &[Sentiment], y_pred: &[Sentiment]) -> Result<EvalReport> {
    let confusion = ConfusionMatrix::from_labels(y_true, y_pred)?;
    let per_class: [ClassScores; 3] = std::array::from_fn(|c| confusion.scores(c));
    let macro_f1 = per_class.iter().map(|s| s.f1).sum::<f64>() / 3.0;
    let correct: u64 = (0..3).map(|c| confusion.counts[c][c]).sum();
    Ok(EvalReport {
        confusion,
        per_class,
        macro_f1,
        accuracy: correct as f64 / confusion.total() as f64,
    })
}

pub fn macro_f1(y_true: &[Sentiment], y_pred: &[Sentiment]) -> Result<f64> {
    evaluate(y_true, y_pred).map(|r| r.macro_f1)
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "macro_f1\t{:.4}", self.macro_f1)?;
        writeln!(f, "accuracy\t{:.4}", self.accuracy)?;
        writeln!(f, "class\tprecision\trecall\tf1")?;
        for s in Sentiment::ALL {
            let c = &self.per_class[s.index()];
            writeln!(f, "{}\t{:.4}\t{:.4}\t{:.4}", s, c.precision, c.recall, c.f1)?;
        }
        writeln!(f, "confusion (rows true, columns predicted: negative neutral positive)")?;
        for s in Sentiment::ALL {
            let r = &self.confusion.counts[s.index()];
            writeln!(f, "{}\t{}\t{}\t{}", s, r[0], r[1], r[2])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Sentiment::*;

    #[test]
    fn hand_example() {
        let t = [Negative, Neutral, Positive, Positive];
        let p = [Negative, Neutral, Negative, Positive];
        let r = evaluate(&t, &p).unwrap();
        assert!((r.per_class[0].f1 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.per_class[1].f1, 1.0);
        assert!((r.macro_f1 - 7.0 / 9.0).abs() < 1e-12);
        assert_eq!(r.accuracy, 0.75);
    }

    #[test]
    fn perfect_and_hopeless() {
        let t = [Negative, Neutral, Positive];
        assert_eq!(macro_f1(&t, &t).unwrap(), 1.0);
        assert_eq!(macro_f1(&[Negative, Negative], &[Positive, Positive]).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        assert!(macro_f1(&[], &[]).is_err());
        assert!(macro_f1(&[Negative], &[]).is_err());
    }
}
