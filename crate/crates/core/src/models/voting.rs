use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::forest::ForestModel;
use super::linear::{LinearKind, LinearModel};
use super::weights::argmax_with_prior;
use crate::corpus::Sentiment;
use crate::error::{Error, Result};
use crate::features::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VoteMode {
    Hard,
    Soft,
}

impl fmt::Display for VoteMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VoteMode::Hard => "hard",
            VoteMode::Soft => "soft",
        })
    }
}

impl FromStr for VoteMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hard" => Ok(VoteMode::Hard),
            "soft" => Ok(VoteMode::Soft),
            _ => Err(format!("unknown vote mode {s:?} (expected hard or soft)")),
        }
    }
}

/// What one ensemble member contributes to a vote.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MemberOutput {
    Label(Sentiment),
    Proba([f64; 3]),
}

/// Hard: plurality of member labels (probability outputs vote for their argmax).
/// Soft: argmax of the unweighted mean probability vector.
/// Ties in either mode go to the larger training prior, then label order.
pub fn vote(outputs: &[MemberOutput], mode: VoteMode, prior_counts: &[u64; 3]) -> Result<Sentiment> {
    if outputs.is_empty() {
        return Err(Error::Config("voting needs at least one member".into()));
    }
    let mut scores = [0.0; 3];
    match mode {
        VoteMode::Hard => {
            for o in outputs {
                let l = match o {
                    MemberOutput::Label(l) => *l,
                    MemberOutput::Proba(p) => argmax_with_prior(p, prior_counts),
                };
                scores[l.index()] += 1.0;
            }
        }
        VoteMode::Soft => {
            for o in outputs {
                let MemberOutput::Proba(p) = o else {
                    return Err(Error::Config("soft voting needs probability outputs from every member".into()));
                };
                for c in 0..3 {
                    scores[c] += p[c];
                }
            }
            let n = outputs.len() as f64;
            scores = scores.map(|s| s / n);
        }
    }
    Ok(argmax_with_prior(&scores, prior_counts))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VotingModel {
    pub svm: LinearModel,
    pub logreg: LinearModel,
    pub forest: ForestModel,
    pub mode: VoteMode,
    pub prior_counts: [u64; 3],
}

impl VotingModel {
    pub fn new(
        svm: LinearModel,
        logreg: LinearModel,
        forest: ForestModel,
        mode: VoteMode,
        prior_counts: [u64; 3],
    ) -> Result<Self> {
        if svm.kind != LinearKind::Svm || logreg.kind != LinearKind::Logreg {
            return Err(Error::Config("voting members must be an svm and a logistic regression".into()));
        }
        if mode == VoteMode::Soft && svm.calibrator.is_none() {
            return Err(Error::Config("soft voting needs a calibrated svm".into()));
        }
        Ok(VotingModel {
            svm,
            logreg,
            forest,
            mode,
            prior_counts,
        })
    }

    fn outputs(&self, x: &SparseVector) -> Result<[MemberOutput; 3]> {
        Ok(match self.mode {
            VoteMode::Hard => [
                MemberOutput::Label(self.svm.predict(x)),
                MemberOutput::Label(self.logreg.predict(x)),
                MemberOutput::Label(self.forest.predict(x)),
            ],
            VoteMode::Soft => [
                MemberOutput::Proba(
                    self.svm
                        .predict_proba(x)
                        .ok_or_else(|| Error::Config("soft voting needs a calibrated svm".into()))?,
                ),
                MemberOutput::Proba(self.logreg.predict_proba(x).expect("logistic regression is probabilistic")),
                MemberOutput::Proba(self.forest.predict_proba(x)),
            ],
        })
    }

    pub fn predict(&self, x: &SparseVector) -> Result<Sentiment> {
        vote(&self.outputs(x)?, self.mode, &self.prior_counts)
    }

    /// Mean member probabilities (soft mode), or label vote shares (hard mode).
    pub fn predict_proba(&self, x: &SparseVector) -> Result<[f64; 3]> {
        let mut acc = [0.0; 3];
        for o in self.outputs(x)? {
            match o {
                MemberOutput::Label(l) => acc[l.index()] += 1.0,
                MemberOutput::Proba(p) => (0..3).for_each(|c| acc[c] += p[c]),
            }
        }
        Ok(acc.map(|v| v / 3.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use MemberOutput::*;
    use Sentiment::*;

    #[test]
    fn hard_plurality() {
        let out = [Label(Negative), Label(Negative), Label(Neutral)];
        assert_eq!(vote(&out, VoteMode::Hard, &[1, 1, 1]).unwrap(), Negative);
    }

    #[test]
    fn hard_three_way_tie_uses_prior() {
        let out = [Label(Negative), Label(Neutral), Label(Positive)];
        assert_eq!(vote(&out, VoteMode::Hard, &[4102, 5264, 4634]).unwrap(), Neutral);
        assert_eq!(vote(&out, VoteMode::Hard, &[5, 5, 5]).unwrap(), Negative);
    }

    #[test]
    fn soft_mean() {
        let out = [Proba([0.6, 0.4, 0.0]), Proba([0.2, 0.8, 0.0]), Proba([0.5, 0.5, 0.0])];
        assert_eq!(vote(&out, VoteMode::Soft, &[1, 1, 1]).unwrap(), Neutral);
        let bad = [Label(Negative), Proba([1.0, 0.0, 0.0])];
        assert!(vote(&bad, VoteMode::Soft, &[1, 1, 1]).is_err());
    }

    #[test]
    fn unanimity() {
        for c in Sentiment::ALL {
            let mut p = [0.1; 3];
            p[c.index()] = 0.8;
            assert_eq!(vote(&[Label(c); 3], VoteMode::Hard, &[0, 0, 0]).unwrap(), c);
            assert_eq!(vote(&[Proba(p); 3], VoteMode::Soft, &[0, 0, 0]).unwrap(), c);
        }
    }

    fn simplex() -> impl Strategy<Value = [f64; 3]> {
        proptest::array::uniform3(0.0f64..1.0).prop_filter_map("nonzero", |v| {
            let s: f64 = v.iter().sum();
            (s > 1e-6).then(|| v.map(|x| x / s))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn soft_vote_is_mean_argmax(a in simplex(), b in simplex(), c in simplex()) {
            let mean: Vec<f64> = (0..3).map(|k| (a[k] + b[k] + c[k]) / 3.0).collect();
            let max = mean.iter().cloned().fold(f64::MIN, f64::max);
            let expected = (0..3).find(|&k| mean[k] == max).unwrap();
            let got = vote(&[Proba(a), Proba(b), Proba(c)], VoteMode::Soft, &[1, 1, 1]).unwrap();
            prop_assert_eq!(got.index(), expected);
        }
    }
}
