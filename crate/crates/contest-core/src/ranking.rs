//! Winner-selection models and general expected-payoff mechanisms.
//!
//! A ranking model turns realized contribution qualities into winner
//! probabilities. Three variants are supported: perfect ranking (the
//! unique highest quality wins, ties split uniformly), the beta-accuracy
//! mixture (perfect with probability beta, a uniformly random order
//! otherwise), and softmax noise (a Gumbel race over quality signals with
//! temperature eta, the canonical "noisy signal s_i = q_i + eps_i"
//! instantiation: it has closed-form win probabilities and a strictly
//! positive quality derivative).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{RankPrizes, RewardScheme};
use crate::util::linspace;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RankingModel {
    Perfect {},
    #[serde(rename = "beta")]
    BetaMixture { beta: f64 },
    #[serde(rename = "softmax")]
    SoftmaxNoise { eta: f64 },
}

impl RankingModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RankingModel::Perfect {} => Ok(()),
            RankingModel::BetaMixture { beta } => {
                if (0.0..=1.0).contains(&beta) {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig(format!(
                        "ranking accuracy beta must lie in [0, 1], got {beta}"
                    )))
                }
            }
            RankingModel::SoftmaxNoise { eta } => {
                if eta > 0.0 && eta.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig(format!(
                        "softmax noise scale eta must be positive, got {eta}"
                    )))
                }
            }
        }
    }

    /// Probability that each contributor is selected as the winner.
    ///
    /// Perfect ranking puts all mass on the argmax (ties split uniformly);
    /// the beta mixture blends that with the uniform vector; softmax noise
    /// gives `exp(q_i/eta) / sum_j exp(q_j/eta)`. The vector sums to one.
    pub fn winner_probabilities(&self, qualities: &[f64]) -> Result<Vec<f64>> {
        if qualities.is_empty() {
            return Err(Error::Contract(
                "winner probabilities need at least one contributor".into(),
            ));
        }
        Ok(match *self {
            RankingModel::Perfect {} => perfect_vector(qualities),
            RankingModel::BetaMixture { beta } => {
                let perfect = perfect_vector(qualities);
                let uniform = 1.0 / qualities.len() as f64;
                perfect
                    .into_iter()
                    .map(|p| beta * p + (1.0 - beta) * uniform)
                    .collect()
            }
            RankingModel::SoftmaxNoise { eta } => softmax(qualities, eta),
        })
    }
}

fn perfect_vector(qualities: &[f64]) -> Vec<f64> {
    let max = qualities.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ties = qualities.iter().filter(|q| **q == max).count();
    qualities
        .iter()
        .map(|q| if *q == max { 1.0 / ties as f64 } else { 0.0 })
        .collect()
}

fn softmax(qualities: &[f64], eta: f64) -> Vec<f64> {
    let max = qualities.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = qualities.iter().map(|q| ((q - max) / eta).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// d pi_i / d q_i for the softmax model: pi (1 - pi) / eta.
pub fn softmax_quality_derivative(pi: f64, eta: f64) -> f64 {
    pi * (1.0 - pi) / eta
}

/// A mechanism's expected reward p(q_i, q_{-i}, m) for a contributor:
/// best-contribution, rank-order with beta-accurate ranking, proportional
/// split of a fixed budget, or a scaled wrapper around any of these.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneralMechanism {
    Best {
        rewards: RewardScheme,
        ranking: RankingModel,
    },
    RankOrder {
        prizes: RankPrizes,
        beta: f64,
    },
    Proportional {
        scale: f64,
    },
    Scaled {
        base: Box<GeneralMechanism>,
        scale: f64,
    },
}

impl GeneralMechanism {
    pub fn validate(&self) -> Result<()> {
        match self {
            GeneralMechanism::Best { rewards, ranking } => {
                rewards.validate()?;
                ranking.validate()
            }
            GeneralMechanism::RankOrder { prizes, beta } => {
                prizes.validate()?;
                if (0.0..=1.0).contains(beta) {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig(format!(
                        "ranking accuracy beta must lie in [0, 1], got {beta}"
                    )))
                }
            }
            GeneralMechanism::Proportional { scale } | GeneralMechanism::Scaled { scale, .. } => {
                if *scale > 0.0 && scale.is_finite() {
                    if let GeneralMechanism::Scaled { base, .. } = self {
                        base.validate()?;
                    }
                    Ok(())
                } else {
                    Err(Error::InvalidConfig(format!(
                        "mechanism scale must be positive, got {scale}"
                    )))
                }
            }
        }
    }

    /// Expected points for a contributor of quality `own` against the
    /// realized qualities `others`, averaging over ranking randomness.
    ///
    /// The proportional mechanism with all qualities zero degenerates to a
    /// uniform split of the budget (k/m).
    pub fn expected_points(&self, own: f64, others: &[f64]) -> Result<f64> {
        if !(0.0..=1.0).contains(&own) || others.iter().any(|q| !(0.0..=1.0).contains(q)) {
            return Err(Error::Domain("qualities must lie in [0, 1]".into()));
        }
        Ok(self.expected_points_raw(own, others))
    }

    pub(crate) fn expected_points_raw(&self, own: f64, others: &[f64]) -> f64 {
        let m = 1 + others.len();
        match self {
            GeneralMechanism::Best { rewards, ranking } => {
                let mut qs = Vec::with_capacity(m);
                qs.push(own);
                qs.extend_from_slice(others);
                let pi = ranking
                    .winner_probabilities(&qs)
                    .expect("nonempty by construction")[0];
                pi * rewards.p_b + (1.0 - pi) * rewards.p_c
            }
            GeneralMechanism::RankOrder { prizes, beta } => {
                // Perfect branch: rank is 1 + (# strictly better), spread
                // uniformly across any exact ties.
                let better = others.iter().filter(|q| **q > own).count();
                let ties = others.iter().filter(|q| **q == own).count();
                let perfect: f64 = (0..=ties)
                    .map(|t| prizes.for_rank(better + 1 + t))
                    .sum::<f64>()
                    / (ties + 1) as f64;
                beta * perfect + (1.0 - beta) * prizes.mean_over_ranks(m)
            }
            GeneralMechanism::Proportional { scale } => {
                let total = own + others.iter().sum::<f64>();
                if total == 0.0 {
                    scale / m as f64
                } else {
                    scale * own / total
                }
            }
            GeneralMechanism::Scaled { base, scale } => {
                scale * base.expected_points_raw(own, others)
            }
        }
    }
}

/// Outcome of the Definition-2.2 sanity check on a winner model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub pass: bool,
    pub note: Option<String>,
    /// Description of the first grid violation, when failing.
    pub violation: Option<String>,
}

/// Grid check that a winner model satisfies the ranking assumptions:
/// win probability nondecreasing in own quality and nonincreasing in the
/// number of other contributors. `strict` additionally requires a strict
/// overall gain in own quality across the grid (softmax and interior
/// beta mixtures). The closure form lets tests feed deliberately broken
/// models.
pub fn check_winner_monotonicity<F>(
    pi: F,
    grid: usize,
    strict: bool,
    max_m: usize,
) -> MonotonicityReport
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let grid = grid.max(3);
    let own_grid = linspace(0.0, 1.0, grid);
    for m in 1..=max_m {
        let opponents: Vec<f64> = if m >= 2 {
            linspace(0.2, 0.8, (m - 1).max(2))[..m - 1].to_vec()
        } else {
            Vec::new()
        };
        let mut prev: Option<f64> = None;
        let mut first = f64::NAN;
        let mut last = f64::NAN;
        for own in &own_grid {
            let mut qs = vec![*own];
            qs.extend_from_slice(&opponents);
            let p = pi(&qs)[0];
            if let Some(prev) = prev {
                if p < prev - 1e-12 {
                    return MonotonicityReport {
                        pass: false,
                        note: None,
                        violation: Some(format!(
                            "win probability decreased in own quality at q={own}, m={m}: {prev} -> {p}"
                        )),
                    };
                }
            }
            if prev.is_none() {
                first = p;
            }
            last = p;
            prev = Some(p);
        }
        if strict && m >= 2 && last <= first + 1e-12 {
            return MonotonicityReport {
                pass: false,
                note: None,
                violation: Some(format!(
                    "win probability failed to strictly increase across the quality grid at m={m}"
                )),
            };
        }
    }
    // Nonincreasing in m: add opponents of fixed quality 0.5.
    for own in [0.25, 0.5, 0.75] {
        let mut prev: Option<f64> = None;
        for m in 1..=max_m {
            let mut qs = vec![own];
            qs.extend(std::iter::repeat(0.5).take(m - 1));
            let p = pi(&qs)[0];
            if let Some(prev) = prev {
                if p > prev + 1e-12 {
                    return MonotonicityReport {
                        pass: false,
                        note: None,
                        violation: Some(format!(
                            "win probability increased with more contributors at q={own}, m={m}: {prev} -> {p}"
                        )),
                    };
                }
            }
            prev = Some(p);
        }
    }
    MonotonicityReport {
        pass: true,
        note: None,
        violation: None,
    }
}

/// Definition-2.2 report for a ranking model on a quality grid.
pub fn validate_ranking_assumptions(ranking: &RankingModel, grid: usize) -> MonotonicityReport {
    let (strict, note) = match *ranking {
        RankingModel::SoftmaxNoise { .. } => (true, None),
        RankingModel::BetaMixture { beta } if beta > 0.0 && beta < 1.0 => (true, None),
        RankingModel::BetaMixture { beta } if beta == 0.0 => (
            false,
            Some("beta = 0 ranks uniformly at random; quality monotonicity is vacuous".to_string()),
        ),
        _ => (
            false,
            Some("perfect ranking is weakly monotone off ties".to_string()),
        ),
    };
    let mut report = check_winner_monotonicity(
        |qs| ranking.winner_probabilities(qs).expect("nonempty grid"),
        grid,
        strict,
        4,
    );
    if report.pass {
        report.note = note;
    }
    report
}
