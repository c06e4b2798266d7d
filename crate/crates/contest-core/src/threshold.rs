//! Symmetric threshold equilibria of the best-contribution mechanism in
//! the homogeneous-effort model.
//!
//! At a candidate threshold `a`, the marginal agent compares the rating
//! utility `(p_R - c_R) Pr(C>0 | a)` against the contribution utility
//! `(p_B - c_C) Pr(W | a) + (p_C - c_C)(1 - Pr(W | a))`. Their difference,
//! the indifference gap, is strictly decreasing in `a`, so the symmetric
//! equilibrium is the unique root (or a corner when the gap never changes
//! sign).

use serde::{Deserialize, Serialize};

use crate::dist::AbilityDistribution;
use crate::error::{Error, Result};
use crate::mc::{streams, SimulationPlan};
use crate::ranking::RankingModel;
use crate::scenario::{CostModel, NonstrategicPool, QualityModel, RewardScheme};

/// Bisection iteration cap; the gap is monotone so bracketing is safe,
/// the cap guards Monte Carlo-estimated gaps.
const MAX_BISECT: usize = 200;
/// Bracket width at which bisection stops.
const BRACKET_TOL: f64 = 1e-12;

/// Where the equilibrium landed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CornerStatus {
    Interior,
    /// a* = 0, everyone contributes.
    AllContribute,
    /// a* = 1, nobody contributes.
    AllRate,
}

/// Classification of the reward-cost inequality chain
/// `p_C - c_C  vs  p_R - c_R  vs  p_B - c_C`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeClass {
    /// p_C - c_C < p_R - c_R < p_B - c_C: the equilibrium is interior.
    Interior,
    /// p_C - c_C >= p_R - c_R: contributing dominates rating at any ability.
    ContributeDominant,
    /// p_B - c_C <= p_R - c_R: rating dominates even a sure win.
    RateDominant,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub threshold: f64,
    /// |gap(threshold)| at the returned point.
    pub residual: f64,
    pub corner: CornerStatus,
    pub regime: RegimeClass,
    /// Exact indifference at a corner (the gap vanished there), in which
    /// case the corner action of the marginal agent is a tie.
    pub knife_edge: bool,
}

/// Replication settings for Monte Carlo-backed gap estimates (softmax
/// rankings); ignored by the closed-form rankings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapMc {
    pub reps: usize,
    pub seed: u64,
}

impl Default for GapMc {
    fn default() -> Self {
        Self {
            reps: 20_000,
            seed: 0xC0FFEE,
        }
    }
}

/// Ability-to-quality map used by the gap evaluator. The homogeneous
/// model is the identity; the endogenous-effort calibration pins effort
/// at one and maps abilities through q(a, 1).
#[derive(Clone, Copy)]
pub(crate) enum QualityMap<'a> {
    Identity,
    FullEffort(&'a QualityModel),
}

impl QualityMap<'_> {
    pub(crate) fn q(&self, a: f64) -> f64 {
        match self {
            QualityMap::Identity => a,
            QualityMap::FullEffort(model) => model.quality(a, 1.0),
        }
    }
}

/// Fixed opponent draws reused at every candidate threshold (common
/// random numbers), so Monte Carlo gap estimates stay monotone enough
/// for bisection.
pub(crate) struct GapDraws {
    reps: usize,
    /// reps x (n-1) opponent abilities, row-major.
    abilities: Vec<f64>,
    /// reps x pool_count exogenous qualities, row-major.
    pool: Vec<f64>,
}

impl GapDraws {
    pub(crate) fn generate(
        n: usize,
        dist: &AbilityDistribution,
        pool: Option<&NonstrategicPool>,
        mc: &GapMc,
    ) -> Self {
        let plan = SimulationPlan::new(mc.reps, mc.seed);
        let k0 = pool.map_or(0, |p| p.count);
        let mut abilities = Vec::with_capacity(mc.reps * (n - 1));
        let mut pool_q = Vec::with_capacity(mc.reps * k0);
        for rep in 0..mc.reps {
            let mut rng = plan.rng(streams::GAP_ESTIMATE, rep as u64);
            for _ in 0..n - 1 {
                abilities.push(dist.sample_one(&mut rng));
            }
            if let Some(p) = pool {
                for _ in 0..p.count {
                    pool_q.push(p.quality_dist.sample_one(&mut rng));
                }
            }
        }
        Self {
            reps: mc.reps,
            abilities,
            pool: pool_q,
        }
    }
}

/// The indifference-gap evaluator behind every threshold solve.
pub(crate) struct GapModel<'a> {
    pub p_b: f64,
    pub p_c: f64,
    /// p_R - c_R.
    pub p_r_net: f64,
    /// Cost of contributing: c_C, or c(1) when effort is pinned at one.
    pub cost: f64,
    pub n: usize,
    pub dist: &'a AbilityDistribution,
    pub ranking: &'a RankingModel,
    pub pool: Option<&'a NonstrategicPool>,
    pub quality: QualityMap<'a>,
    pub draws: Option<&'a GapDraws>,
}

impl GapModel<'_> {
    fn pool_count(&self) -> usize {
        self.pool.map_or(0, |p| p.count)
    }

    pub(crate) fn prob_any_other(&self, a: f64) -> f64 {
        if self.pool_count() >= 1 {
            return 1.0;
        }
        1.0 - self.dist.cdf_raw(a).powi(self.n as i32 - 1)
    }

    /// Win probability of a contributor with ability `a` when the other
    /// strategic agents use threshold `a_star` (and contribute with the
    /// mapped quality of their ability).
    ///
    /// Perfect: the focal agent wins iff every other agent is either below
    /// the threshold or below her own ability, and she beats every pool
    /// quality, so F(max(a, a*))^(n-1) * G(q(a))^k0. The beta mixture adds
    /// the uniformly random branch 1/(M+1+k0) with M ~ Bin(n-1, 1-F(a*)),
    /// evaluated by exact binomial summation. Softmax is estimated over
    /// the fixed draws.
    pub(crate) fn win_probability(&self, a: f64, a_star: f64) -> f64 {
        match *self.ranking {
            RankingModel::Perfect {} => self.perfect_win(a, a_star),
            RankingModel::BetaMixture { beta } => {
                let random = expected_inverse_rank(
                    self.n - 1,
                    1.0 - self.dist.cdf_raw(a_star),
                    self.pool_count(),
                );
                beta * self.perfect_win(a, a_star) + (1.0 - beta) * random
            }
            RankingModel::SoftmaxNoise { eta } => self.softmax_win(a, a_star, eta),
        }
    }

    fn perfect_win(&self, a: f64, a_star: f64) -> f64 {
        let base = self
            .dist
            .cdf_raw(a.max(a_star))
            .powi(self.n as i32 - 1);
        match self.pool {
            Some(pool) if pool.count > 0 => {
                let beat_one = pool.quality_dist.cdf_raw(self.quality.q(a).clamp(0.0, 1.0));
                base * beat_one.powi(pool.count as i32)
            }
            _ => base,
        }
    }

    fn softmax_win(&self, a: f64, a_star: f64, eta: f64) -> f64 {
        let draws = self
            .draws
            .expect("softmax gap evaluation requires generated draws");
        let own_q = self.quality.q(a);
        let n1 = self.n - 1;
        let k0 = self.pool_count();
        let mut total = 0.0;
        for rep in 0..draws.reps {
            let mut denom = 1.0;
            for j in 0..n1 {
                let ab = draws.abilities[rep * n1 + j];
                if ab >= a_star {
                    denom += ((self.quality.q(ab) - own_q) / eta).exp();
                }
            }
            for k in 0..k0 {
                denom += ((draws.pool[rep * k0 + k] - own_q) / eta).exp();
            }
            total += 1.0 / denom;
        }
        total / draws.reps as f64
    }

    /// u_delta(a): rating utility minus contributing utility for the
    /// marginal agent at the shared threshold `a`.
    pub(crate) fn gap(&self, a: f64) -> f64 {
        let w = self.win_probability(a, a);
        self.p_r_net * self.prob_any_other(a)
            - (self.p_b - self.cost) * w
            - (self.p_c - self.cost) * (1.0 - w)
    }

    pub(crate) fn regime(&self) -> RegimeClass {
        if self.p_c - self.cost >= self.p_r_net {
            RegimeClass::ContributeDominant
        } else if self.p_b - self.cost <= self.p_r_net {
            RegimeClass::RateDominant
        } else {
            RegimeClass::Interior
        }
    }

    pub(crate) fn solve(&self) -> Result<EquilibriumReport> {
        if !(self.p_b > self.p_c) {
            return Err(Error::Contract(format!(
                "threshold solve needs p_B > p_C, got p_B={}, p_C={}",
                self.p_b, self.p_c
            )));
        }
        let regime = self.regime();
        let g0 = self.gap(0.0);
        if g0 <= 0.0 {
            return Ok(EquilibriumReport {
                threshold: 0.0,
                residual: g0.abs(),
                corner: CornerStatus::AllContribute,
                regime,
                knife_edge: g0.abs() <= 1e-15,
            });
        }
        let g1 = self.gap(1.0);
        if g1 >= 0.0 {
            return Ok(EquilibriumReport {
                threshold: 1.0,
                residual: g1.abs(),
                corner: CornerStatus::AllRate,
                regime,
                knife_edge: g1.abs() <= 1e-15,
            });
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut iter = 0;
        while hi - lo > BRACKET_TOL && iter < MAX_BISECT {
            let mid = 0.5 * (lo + hi);
            let g = self.gap(mid);
            if g == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if g > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            iter += 1;
        }
        let threshold = 0.5 * (lo + hi);
        Ok(EquilibriumReport {
            threshold,
            residual: self.gap(threshold).abs(),
            corner: CornerStatus::Interior,
            regime,
            knife_edge: false,
        })
    }
}

/// E[1 / (M + 1 + k0)] for M ~ Binomial(trials, p) by exact summation.
pub(crate) fn expected_inverse_rank(trials: usize, p: f64, k0: usize) -> f64 {
    if trials == 0 || p <= 0.0 {
        return 1.0 / (1 + k0) as f64;
    }
    if p >= 1.0 {
        return 1.0 / (trials + 1 + k0) as f64;
    }
    let ratio = p / (1.0 - p);
    let mut pmf = (1.0 - p).powi(trials as i32);
    let mut total = 0.0;
    for m in 0..=trials {
        total += pmf / (m + 1 + k0) as f64;
        if m < trials {
            pmf *= ratio * (trials - m) as f64 / (m + 1) as f64;
        }
    }
    total
}

fn model<'a>(
    rewards: &RewardScheme,
    costs: &CostModel,
    n: usize,
    dist: &'a AbilityDistribution,
    ranking: &'a RankingModel,
    pool: Option<&'a NonstrategicPool>,
    draws: Option<&'a GapDraws>,
) -> GapModel<'a> {
    GapModel {
        p_b: rewards.p_b,
        p_c: rewards.p_c,
        p_r_net: rewards.p_r - costs.c_r,
        cost: costs.c_c,
        n,
        dist,
        ranking,
        pool,
        quality: QualityMap::Identity,
        draws,
    }
}

fn needs_draws(ranking: &RankingModel) -> bool {
    matches!(ranking, RankingModel::SoftmaxNoise { .. })
}

/// Pr(C>0 | a, n) = 1 - F(a)^(n-1): the probability the marginal agent
/// sees at least one other contribution. Exactly one when a nonstrategic
/// pool guarantees content.
pub fn prob_any_other_contribution(
    a: f64,
    n: usize,
    dist: &AbilityDistribution,
    pool: Option<&NonstrategicPool>,
) -> f64 {
    debug_assert!((0.0..=1.0).contains(&a) && n >= 2);
    if pool.map_or(0, |p| p.count) >= 1 {
        return 1.0;
    }
    1.0 - dist.cdf_raw(a).powi(n as i32 - 1)
}

/// Pr(W | a, a*, n): win probability of a contributor with ability `a`
/// (quality = ability) when the other agents use threshold `a_star`.
/// Softmax rankings are estimated by Monte Carlo under `mc`.
pub fn win_probability(
    a: f64,
    a_star: f64,
    n: usize,
    dist: &AbilityDistribution,
    ranking: &RankingModel,
    pool: Option<&NonstrategicPool>,
    mc: &GapMc,
) -> f64 {
    debug_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&a_star) && n >= 2);
    let draws = needs_draws(ranking).then(|| GapDraws::generate(n, dist, pool, mc));
    let m = GapModel {
        p_b: 1.0,
        p_c: 0.0,
        p_r_net: 0.0,
        cost: 0.0,
        n,
        dist,
        ranking,
        pool,
        quality: QualityMap::Identity,
        draws: draws.as_ref(),
    };
    m.win_probability(a, a_star)
}

/// The indifference gap u_delta(a) =
/// (p_R - c_R) Pr(C>0|a) - (p_B - c_C) Pr(W|a,a) - (p_C - c_C)(1 - Pr(W|a,a)),
/// strictly decreasing in `a`.
pub fn utility_gap(
    a: f64,
    rewards: &RewardScheme,
    costs: &CostModel,
    n: usize,
    dist: &AbilityDistribution,
    ranking: &RankingModel,
    pool: Option<&NonstrategicPool>,
    mc: &GapMc,
) -> f64 {
    let draws = needs_draws(ranking).then(|| GapDraws::generate(n, dist, pool, mc));
    model(rewards, costs, n, dist, ranking, pool, draws.as_ref()).gap(a)
}

/// Solve for the unique symmetric threshold equilibrium.
///
/// Corner rules: `gap(0) <= 0` means everyone contributes (a* = 0),
/// `gap(1) >= 0` means nobody does (a* = 1); otherwise the root is found
/// by bisection. For closed-form rankings the residual lands below 1e-9;
/// Monte Carlo-backed gaps (softmax) bisect the same deterministic
/// common-random-number estimate and report its residual as is.
pub fn solve_symmetric_threshold(
    rewards: &RewardScheme,
    costs: &CostModel,
    n: usize,
    dist: &AbilityDistribution,
    ranking: &RankingModel,
    pool: Option<&NonstrategicPool>,
    mc: &GapMc,
) -> Result<EquilibriumReport> {
    if n < 2 {
        return Err(Error::Contract(format!("threshold solve needs n >= 2, got {n}")));
    }
    let draws = needs_draws(ranking).then(|| GapDraws::generate(n, dist, pool, mc));
    model(rewards, costs, n, dist, ranking, pool, draws.as_ref()).solve()
}
