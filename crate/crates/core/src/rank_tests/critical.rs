use serde::{Deserialize, Serialize};

use crate::error::{check_unit_open, Result};

use super::null::NullDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tail {
    Upper,
    Lower,
}

/// `(C_α, γ)` with `P(S > C_α) + γ P(S = C_α) = α` for the upper tail,
/// or with `<` in place of `>` for the lower tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomizedCriticalValue {
    pub c_alpha: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub tail: Tail,
}

impl RandomizedCriticalValue {
    /// Rejection probability for an observed value.
    pub fn decision(&self, s: f64, tolerance: f64) -> f64 {
        let beyond = match self.tail {
            Tail::Upper => s > self.c_alpha + tolerance,
            Tail::Lower => s < self.c_alpha - tolerance,
        };
        if beyond {
            1.0
        } else if (s - self.c_alpha).abs() <= tolerance {
            self.gamma
        } else {
            0.0
        }
    }

    /// `P(beyond C_α) + γ P(S = C_α)` under `null`.
    pub fn size(&self, null: &NullDistribution) -> f64 {
        let (lt, eq, gt) = null.split(self.c_alpha);
        let beyond = match self.tail {
            Tail::Upper => gt,
            Tail::Lower => lt,
        };
        beyond + self.gamma * eq
    }
}

/// Smallest support point `C` with `P(S > C) ≤ α`, and the matching `γ`.
pub fn randomized_critical_value(null: &NullDistribution, alpha: f64) -> Result<RandomizedCriticalValue> {
    check_unit_open("alpha", alpha)?;
    let support = null.support();
    let probs = null.probabilities();
    // above[k] = P(S > support[k])
    let mut above = vec![0.0; support.len()];
    for k in (0..support.len().saturating_sub(1)).rev() {
        above[k] = above[k + 1] + probs[k + 1];
    }
    let k = (0..support.len())
        .find(|&k| above[k] <= alpha * (1.0 + 1e-12))
        .expect("the largest atom has nothing above it");
    Ok(RandomizedCriticalValue {
        c_alpha: support[k],
        gamma: ((alpha - above[k]) / probs[k]).clamp(0.0, 1.0),
        alpha,
        tail: Tail::Upper,
    })
}

/// Largest support point `C` with `P(S < C) ≤ α`, and the matching `γ`.
pub fn randomized_lower_critical_value(null: &NullDistribution, alpha: f64) -> Result<RandomizedCriticalValue> {
    check_unit_open("alpha", alpha)?;
    let support = null.support();
    let probs = null.probabilities();
    let mut below = vec![0.0; support.len()];
    for k in 1..support.len() {
        below[k] = below[k - 1] + probs[k - 1];
    }
    let k = (0..support.len())
        .rev()
        .find(|&k| below[k] <= alpha * (1.0 + 1e-12))
        .expect("the smallest atom has nothing below it");
    Ok(RandomizedCriticalValue {
        c_alpha: support[k],
        gamma: ((alpha - below[k]) / probs[k]).clamp(0.0, 1.0),
        alpha,
        tail: Tail::Lower,
    })
}

/// Direction of the alternative in terms of the statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alternative {
    /// Large values of the statistic are evidence against the hypothesis.
    Greater,
    /// Both tails, α/2 each.
    TwoSided,
}

/// Randomized (exact size α) or conservative p-value based decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecisionRule {
    Randomized,
    Nonrandomized,
}

/// A null distribution together with the decision rule applied to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub null: NullDistribution,
    pub alpha: f64,
    pub alternative: Alternative,
    pub rule: DecisionRule,
    pub upper: RandomizedCriticalValue,
    pub lower: Option<RandomizedCriticalValue>,
}

impl Calibration {
    pub fn new(null: NullDistribution, alpha: f64, alternative: Alternative, rule: DecisionRule) -> Result<Self> {
        let (upper, lower) = match alternative {
            Alternative::Greater => (randomized_critical_value(&null, alpha)?, None),
            Alternative::TwoSided => (
                randomized_critical_value(&null, alpha / 2.0)?,
                Some(randomized_lower_critical_value(&null, alpha / 2.0)?),
            ),
        };
        Ok(Self {
            null,
            alpha,
            alternative,
            rule,
            upper,
            lower,
        })
    }

    pub fn p_value(&self, s: f64) -> f64 {
        match self.alternative {
            Alternative::Greater => self.null.upper_tail(s),
            Alternative::TwoSided => (2.0 * self.null.upper_tail(s).min(self.null.lower_tail(s))).min(1.0),
        }
    }

    /// Rejection probability: 0, γ or 1 for randomized rules, 0 or 1 otherwise.
    pub fn decision(&self, s: f64) -> f64 {
        let tol = self.null.tolerance();
        match self.rule {
            DecisionRule::Randomized => {
                let up = self.upper.decision(s, tol);
                let low = self.lower.map_or(0.0, |l| l.decision(s, tol));
                (up + low).min(1.0)
            }
            DecisionRule::Nonrandomized => {
                if self.p_value(s) <= self.alpha * (1.0 + 1e-12) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::null::{null_distribution, NullMethod, NullMode};
    use super::*;
    use crate::rng::RngSeed;
    use crate::scores::ScoreVector;

    fn rank_sum_2x2() -> NullDistribution {
        null_distribution(2, 2, &ScoreVector::raw_ranks(4), NullMethod::Enumerate, RngSeed::new(0, 0)).unwrap()
    }

    #[test]
    fn critical_value_examples() {
        let d = rank_sum_2x2();
        let c = randomized_critical_value(&d, 1.0 / 6.0).unwrap();
        assert_eq!((c.c_alpha, c.gamma), (6.0, 0.0));
        let c = randomized_critical_value(&d, 0.25).unwrap();
        assert_eq!(c.c_alpha, 6.0);
        assert!((c.gamma - 0.5).abs() < 1e-12);
        assert!((c.size(&d) - 0.25).abs() < 1e-12);
        let l = randomized_lower_critical_value(&d, 0.25).unwrap();
        assert_eq!(l.c_alpha, 4.0);
        assert!((l.size(&d) - 0.25).abs() < 1e-12);
        assert!(randomized_critical_value(&d, 0.0).is_err());
    }

    #[test]
    fn degenerate_null() {
        let d = NullDistribution::from_weighted(vec![(2.0, 1.0)], NullMode::ExactEnumeration, 1, 1);
        let c = randomized_critical_value(&d, 0.05).unwrap();
        assert_eq!((c.c_alpha, c.gamma), (2.0, 0.05));
    }

    #[test]
    fn calibrated_decisions() {
        let d = rank_sum_2x2();
        let cal = Calibration::new(d.clone(), 0.25, Alternative::Greater, DecisionRule::Randomized).unwrap();
        assert_eq!(cal.decision(7.0), 1.0);
        assert!((cal.decision(6.0) - 0.5).abs() < 1e-12);
        assert_eq!(cal.decision(5.0), 0.0);
        assert!((cal.p_value(6.0) - 2.0 / 6.0).abs() < 1e-15);
        let two = Calibration::new(d.clone(), 0.5, Alternative::TwoSided, DecisionRule::Nonrandomized).unwrap();
        assert_eq!(two.decision(3.0), 1.0);
        assert_eq!(two.decision(7.0), 1.0);
        assert_eq!(two.decision(4.0), 0.0);
        let size: f64 = d
            .support()
            .iter()
            .zip(d.probabilities())
            .map(|(&s, p)| p * Calibration::new(d.clone(), 0.3, Alternative::TwoSided, DecisionRule::Randomized).unwrap().decision(s))
            .sum();
        assert!((size - 0.3).abs() < 1e-12);
    }
}
