//! Learning hidden costs from contest behavior: simulate a series of
//! identical contests, estimate the contribution frequency, and invert
//! the monotone threshold map to recover the contribution cost. A second
//! experiment with a different winner reward identifies the rating cost
//! as well through a 2x2 linear system.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::AbilityDistribution;
use crate::error::{Error, Result};
use crate::mc::{streams, SimulationPlan};
use crate::ranking::RankingModel;
use crate::scenario::{CostModel, RewardScheme};
use crate::threshold::{
    prob_any_other_contribution, solve_symmetric_threshold, win_probability, GapMc,
};

/// Residual target on the inner threshold solve during cost inversion.
const INVERT_THRESHOLD_TOL: f64 = 1e-9;
const MAX_BISECT: usize = 200;

/// A simulated series of T contests under fixed rewards.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContestSeriesResult {
    /// Contributor count per contest.
    pub counts: Vec<u32>,
    /// Sum of counts / (T n): the participation-frequency estimate.
    pub f_hat: f64,
    /// The equilibrium threshold the simulated agents actually used.
    pub true_threshold: f64,
}

impl ContestSeriesResult {
    pub fn contests(&self) -> usize {
        self.counts.len()
    }

    pub fn counts_to_csv(&self) -> String {
        let mut out = String::from("t,n_c\n");
        for (t, c) in self.counts.iter().enumerate() {
            let _ = writeln!(out, "{t},{c}");
        }
        out
    }
}

/// Machine-readable summary of a learning run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnSummary {
    #[serde(rename = "T")]
    pub t: usize,
    pub f_hat: f64,
    #[serde(rename = "c_C_hat")]
    pub c_c_hat: f64,
    /// Binomial standard error of f_hat: sqrt(f (1-f) / (T n)).
    pub stderr_proxy: f64,
}

/// Run T contests with the same rewards: agents play the unique symmetric
/// equilibrium of the true cost model, and the designer observes only the
/// per-contest contributor counts.
#[allow(clippy::too_many_arguments)]
pub fn run_contest_series(
    rewards: &RewardScheme,
    true_costs: &CostModel,
    n: usize,
    dist: &AbilityDistribution,
    ranking: &RankingModel,
    contests: usize,
    seed: u64,
    mc: &GapMc,
) -> Result<ContestSeriesResult> {
    if contests < 1 {
        return Err(Error::Contract("a contest series needs T >= 1".into()));
    }
    let report = solve_symmetric_threshold(rewards, true_costs, n, dist, ranking, None, mc)?;
    let a_star = report.threshold;
    let plan = SimulationPlan::new(contests, seed);
    let counts: Vec<u32> = (0..contests)
        .into_par_iter()
        .map(|t| {
            let mut rng = plan.rng(streams::SERIES, t as u64);
            (0..n)
                .filter(|_| dist.sample_one(&mut rng) >= a_star)
                .count() as u32
        })
        .collect();
    let total: u64 = counts.iter().map(|c| *c as u64).sum();
    Ok(ContestSeriesResult {
        f_hat: total as f64 / (contests as f64 * n as f64),
        counts,
        true_threshold: a_star,
    })
}

/// Recover the contribution cost from an observed participation
/// frequency.
///
/// Requires the identification conditions p_C = 0 and p_B > p_R + c_bar,
/// which pin the equilibrium threshold strictly inside (0, 1) for every
/// cost in (0, c_bar) and make the threshold map strictly increasing in
/// the cost. The observed threshold is F^{-1}(1 - f_hat) and the cost is
/// found by bisection on the solver.
#[allow(clippy::too_many_arguments)]
pub fn estimate_contribution_cost(
    f_hat: f64,
    rewards: &RewardScheme,
    c_r: f64,
    c_bar: f64,
    n: usize,
    dist: &AbilityDistribution,
    ranking: &RankingModel,
    mc: &GapMc,
) -> Result<f64> {
    if rewards.p_c != 0.0 {
        return Err(Error::Contract(format!(
            "cost identification requires p_C = 0, got {}",
            rewards.p_c
        )));
    }
    if !(c_bar > 0.0) {
        return Err(Error::Contract(format!("c_bar must be positive, got {c_bar}")));
    }
    if !(rewards.p_b > rewards.p_r + c_bar) {
        return Err(Error::Contract(format!(
            "cost identification requires p_B > p_R + c_bar, got p_B={}, p_R={}, c_bar={c_bar}",
            rewards.p_b, rewards.p_r
        )));
    }
    if f_hat <= 0.0 || f_hat >= 1.0 {
        return Err(Error::Degenerate(format!(
            "frequency {f_hat} sits at a corner; the threshold is unidentifiable"
        )));
    }
    let a_obs = dist.inverse_cdf(1.0 - f_hat)?;
    let solve_at = |c: f64| -> Result<f64> {
        let costs = CostModel::new(c, c_r);
        Ok(solve_symmetric_threshold(rewards, &costs, n, dist, ranking, None, mc)?.threshold)
    };
    let (mut lo, mut hi) = (0.0f64, c_bar);
    if solve_at(hi)? < a_obs - INVERT_THRESHOLD_TOL {
        return Err(Error::Infeasible(format!(
            "observed threshold {a_obs} exceeds what any cost below c_bar = {c_bar} can produce"
        )));
    }
    let mut best = 0.5 * c_bar;
    for _ in 0..MAX_BISECT {
        let mid = 0.5 * (lo + hi);
        best = mid;
        let a_mid = solve_at(mid)?;
        if (a_mid - a_obs).abs() <= INVERT_THRESHOLD_TOL || hi - lo < 1e-14 {
            return Ok(mid);
        }
        if a_mid < a_obs {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best)
}

/// One experiment of the two-contest identification: the winner reward
/// used and the equilibrium threshold observed under it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostExperiment {
    pub p_b: f64,
    pub observed_threshold: f64,
}

/// Recover (c_C, c_R) from two experiments with different winner rewards
/// (p_C = 0 in both).
///
/// Each observed threshold satisfies the indifference identity
/// `c_C - c_R Pr(C>0|a) = p_B Pr(W|a) - p_R Pr(C>0|a)`, linear in the two
/// unknown costs; two experiments give a 2x2 system that is nonsingular
/// exactly when the contribution probabilities differ.
pub fn estimate_both_costs(
    exp1: CostExperiment,
    exp2: CostExperiment,
    p_r: f64,
    n: usize,
    dist: &AbilityDistribution,
    ranking: &RankingModel,
    mc: &GapMc,
) -> Result<(f64, f64)> {
    if exp1.p_b == exp2.p_b {
        return Err(Error::Degenerate(
            "the two experiments use the same winner reward; the system is singular".into(),
        ));
    }
    for e in [&exp1, &exp2] {
        if !(e.observed_threshold > 0.0 && e.observed_threshold < 1.0) {
            return Err(Error::Contract(format!(
                "observed thresholds must be interior, got {}",
                e.observed_threshold
            )));
        }
    }
    let row = |e: &CostExperiment| -> (f64, f64) {
        let pr_c = prob_any_other_contribution(e.observed_threshold, n, dist, None);
        let pr_w = win_probability(
            e.observed_threshold,
            e.observed_threshold,
            n,
            dist,
            ranking,
            None,
            mc,
        );
        (pr_c, e.p_b * pr_w - p_r * pr_c)
    };
    let (pc1, r1) = row(&exp1);
    let (pc2, r2) = row(&exp2);
    let det = pc1 - pc2;
    if det.abs() <= 1e-12 {
        return Err(Error::Degenerate(format!(
            "Pr(C>0) is identical across the two experiments ({pc1}); the system is singular"
        )));
    }
    let c_r = (r2 - r1) / det;
    let c_c = r1 + c_r * pc1;
    Ok((c_c, c_r))
}

/// Whether a reward scheme satisfies the identification precondition
/// used throughout the learning protocol.
pub fn identification_rewards_ok(rewards: &RewardScheme, c_bar: f64) -> bool {
    rewards.p_c == 0.0 && rewards.p_b > rewards.p_r + c_bar
}
