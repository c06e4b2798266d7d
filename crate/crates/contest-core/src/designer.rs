//! Designer-side optimization: expected-utility estimation under
//! threshold strategies, the optimal threshold search, reward calibration
//! that implements a target threshold, comparative-statics schedules, and
//! scale calibration for general mechanisms.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::AbilityDistribution;
use crate::error::{Error, Result};
use crate::mc::{streams, SimulationPlan};
use crate::ranking::{GeneralMechanism, RankingModel};
use crate::scenario::{
    evaluate_designer_utility, CostModel, DesignerUtility, MixedParticipationStrategy,
    NonstrategicPool, RewardScheme,
};
use crate::threshold::{EquilibriumReport, GapDraws, GapMc, GapModel, QualityMap, RegimeClass};
use crate::util::{linspace, mean_stderr};

/// Residual target on |a*(s) - a_hat| for reward calibration.
const CALIBRATION_TOL: f64 = 1e-6;
const MAX_BISECT: usize = 200;
/// Geometric bracket limits for the reward scale search.
const SCALE_MIN: f64 = 1e-12;
const SCALE_MAX: f64 = 1e12;

/// Outcome of calibrating rewards to a target threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub p_b: f64,
    pub p_c: f64,
    pub achieved_threshold: f64,
    /// |a*(p_B, p_C) - a_hat|.
    pub residual: f64,
    pub iterations: usize,
}

impl CalibrationResult {
    pub fn rewards(&self, p_r: f64) -> RewardScheme {
        RewardScheme {
            p_b: self.p_b,
            p_c: self.p_c,
            p_r,
        }
    }
}

/// Fixed ability draws for E[V] estimation, reused across every threshold
/// candidate (common random numbers) so sweeps and refinements compare
/// thresholds on identical populations.
pub struct EvSampler {
    n: usize,
    reps: usize,
    /// reps x n abilities, row-major.
    abilities: Vec<f64>,
    /// reps x n participation uniforms for mixed strategies.
    participation: Vec<f64>,
    /// reps x pool_count exogenous qualities.
    pool_q: Vec<f64>,
    pool_count: usize,
}

impl EvSampler {
    pub fn generate(
        n: usize,
        dist: &AbilityDistribution,
        pool: Option<&NonstrategicPool>,
        plan: &SimulationPlan,
    ) -> Self {
        let k0 = pool.map_or(0, |p| p.count);
        let rows: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = (0..plan.reps)
            .into_par_iter()
            .map(|rep| {
                let mut rng = plan.rng(streams::DESIGNER_EV, rep as u64);
                let abilities: Vec<f64> = (0..n).map(|_| dist.sample_one(&mut rng)).collect();
                let uniforms: Vec<f64> = (0..n).map(|_| rand::Rng::gen(&mut rng)).collect();
                let pool_q: Vec<f64> = match pool {
                    Some(p) => (0..p.count)
                        .map(|_| p.quality_dist.sample_one(&mut rng))
                        .collect(),
                    None => Vec::new(),
                };
                (abilities, uniforms, pool_q)
            })
            .collect();
        let mut abilities = Vec::with_capacity(plan.reps * n);
        let mut participation = Vec::with_capacity(plan.reps * n);
        let mut pool_q = Vec::with_capacity(plan.reps * k0);
        for (a, u, p) in rows {
            abilities.extend(a);
            participation.extend(u);
            pool_q.extend(p);
        }
        Self {
            n,
            reps: plan.reps,
            abilities,
            participation,
            pool_q,
            pool_count: k0,
        }
    }

    fn utility_samples<F, Q>(&self, contribute: F, quality_of: Q, utility: &DesignerUtility) -> Vec<f64>
    where
        F: Fn(usize, f64) -> bool + Sync,
        Q: Fn(f64) -> f64 + Sync,
    {
        (0..self.reps)
            .into_par_iter()
            .map(|rep| {
                let mut qualities: Vec<f64> = Vec::with_capacity(self.n + self.pool_count);
                for j in 0..self.n {
                    let a = self.abilities[rep * self.n + j];
                    if contribute(rep * self.n + j, a) {
                        qualities.push(quality_of(a));
                    }
                }
                for k in 0..self.pool_count {
                    qualities.push(self.pool_q[rep * self.pool_count + k]);
                }
                qualities.sort_by(|x, y| y.partial_cmp(x).unwrap());
                evaluate_designer_utility(utility, &qualities).expect("sorted by construction")
            })
            .collect()
    }

    /// E[V] when every agent contributes above `a_hat` with quality equal
    /// to ability.
    pub fn expected_utility(&self, a_hat: f64, utility: &DesignerUtility) -> (f64, f64) {
        self.expected_utility_mapped(a_hat, utility, |a| a)
    }

    /// E[V] for the threshold strategy with an ability-to-quality map
    /// (used when effort is pinned at one).
    pub fn expected_utility_mapped<Q>(
        &self,
        a_hat: f64,
        utility: &DesignerUtility,
        quality_of: Q,
    ) -> (f64, f64)
    where
        Q: Fn(f64) -> f64 + Sync,
    {
        let samples = self.utility_samples(|_, a| a >= a_hat, quality_of, utility);
        mean_stderr(&samples)
    }

    /// E[V] when agents randomize participation according to sigma, on the
    /// same ability draws as the threshold estimates.
    pub fn expected_utility_mixed(
        &self,
        sigma: &MixedParticipationStrategy,
        utility: &DesignerUtility,
    ) -> (f64, f64) {
        let samples = self.utility_samples(
            |idx, a| self.participation[idx] < sigma.probability_at(a),
            |a| a,
            utility,
        );
        mean_stderr(&samples)
    }
}

/// Monte Carlo estimate of the designer's expected utility when all
/// agents use threshold `a_hat` (qualities equal abilities); exactly zero
/// when nobody can contribute.
pub fn expected_designer_utility(
    a_hat: f64,
    n: usize,
    dist: &AbilityDistribution,
    utility: &DesignerUtility,
    pool: Option<&NonstrategicPool>,
    plan: &SimulationPlan,
) -> (f64, f64) {
    EvSampler::generate(n, dist, pool, plan).expected_utility(a_hat, utility)
}

/// Grid search plus golden-section refinement for the threshold that
/// maximizes E[V]. The global grid pass comes first because E[V] need not
/// be unimodal for non-monotone utilities; when several thresholds tie,
/// the smallest maximizer is returned.
pub fn optimal_threshold(
    n: usize,
    dist: &AbilityDistribution,
    utility: &DesignerUtility,
    grid: usize,
    pool: Option<&NonstrategicPool>,
    plan: &SimulationPlan,
) -> Result<f64> {
    optimal_threshold_mapped(n, dist, utility, grid, pool, plan, |a| a)
}

pub(crate) fn optimal_threshold_mapped<Q>(
    n: usize,
    dist: &AbilityDistribution,
    utility: &DesignerUtility,
    grid: usize,
    pool: Option<&NonstrategicPool>,
    plan: &SimulationPlan,
    quality_of: Q,
) -> Result<f64>
where
    Q: Fn(f64) -> f64 + Sync + Copy,
{
    if grid < 11 {
        return Err(Error::Contract(format!(
            "threshold grid needs at least 11 points, got {grid}"
        )));
    }
    let sampler = EvSampler::generate(n, dist, pool, plan);
    let ev = |a: f64| sampler.expected_utility_mapped(a, utility, quality_of).0;
    let points = linspace(0.0, 1.0, grid);
    let values: Vec<f64> = points.iter().map(|a| ev(*a)).collect();
    let mut best = 0usize;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    // Golden-section refinement inside the best bracket.
    let mut lo = if best == 0 { points[0] } else { points[best - 1] };
    let mut hi = if best + 1 == points.len() {
        points[best]
    } else {
        points[best + 1]
    };
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = ev(x1);
    let mut f2 = ev(x2);
    while hi - lo > 1e-4 {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = ev(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = ev(x2);
        }
    }
    let refined = 0.5 * (lo + hi);
    let refined_ev = ev(refined);
    Ok(
        if refined_ev > values[best] || (refined_ev == values[best] && refined < points[best]) {
            refined
        } else {
            points[best]
        },
    )
}

/// E[V] sweep rows (a_hat, mean, stderr) over a uniform threshold grid.
pub fn threshold_sweep(
    n: usize,
    dist: &AbilityDistribution,
    utility: &DesignerUtility,
    grid: usize,
    pool: Option<&NonstrategicPool>,
    plan: &SimulationPlan,
) -> Vec<(f64, f64, f64)> {
    let sampler = EvSampler::generate(n, dist, pool, plan);
    linspace(0.0, 1.0, grid.max(2))
        .into_iter()
        .map(|a| {
            let (mean, se) = sampler.expected_utility(a, utility);
            (a, mean, se)
        })
        .collect()
}

pub fn sweep_to_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut out = String::from("a_hat,ev_mean,ev_stderr\n");
    for (a, mean, se) in rows {
        let _ = writeln!(out, "{a},{mean},{se}");
    }
    out
}

fn human_regime(regime: RegimeClass) -> &'static str {
    match regime {
        RegimeClass::Interior => "p_C - c_C < p_R - c_R < p_B - c_C",
        RegimeClass::ContributeDominant => "p_C - c_C >= p_R - c_R",
        RegimeClass::RateDominant => "p_B - c_C <= p_R - c_R",
    }
}

/// Calibrate (p_B, p_C) at a fixed ratio so the symmetric equilibrium
/// threshold equals `a_hat`.
///
/// The scale s with p_C = s, p_B = ratio * s is bisected: a*(s) is
/// continuous and nonincreasing in s, so the intermediate value theorem
/// guarantees a solution whenever the target lies between the vanishing-
/// and saturating-reward limits. Infeasible targets name the reward-cost
/// inequality that pins the threshold at a corner.
pub fn calibrate_rewards(
    a_hat: f64,
    ratio: f64,
    p_r: f64,
    costs: &CostModel,
    n: usize,
    dist: &AbilityDistribution,
    ranking: &RankingModel,
    mc: &GapMc,
) -> Result<CalibrationResult> {
    if !(0.0..=1.0).contains(&a_hat) {
        return Err(Error::Domain(format!(
            "target threshold {a_hat} outside [0, 1]"
        )));
    }
    if !(ratio > 1.0) {
        return Err(Error::Domain(format!(
            "reward ratio must exceed 1, got {ratio}"
        )));
    }
    let draws = matches!(ranking, RankingModel::SoftmaxNoise { .. })
        .then(|| GapDraws::generate(n, dist, None, mc));
    calibrate_scale_on(
        a_hat,
        ratio,
        p_r - costs.c_r,
        costs.c_c,
        n,
        dist,
        ranking,
        draws.as_ref(),
        QualityMap::Identity,
    )
}

/// Shared scale-bisection driver; also used by the endogenous-effort
/// calibration with effort pinned at one.
#[allow(clippy::too_many_arguments)]
pub(crate) fn calibrate_scale_on(
    a_hat: f64,
    ratio: f64,
    p_r_net: f64,
    contribution_cost: f64,
    n: usize,
    dist: &AbilityDistribution,
    ranking: &RankingModel,
    draws: Option<&GapDraws>,
    quality: QualityMap<'_>,
) -> Result<CalibrationResult> {
    let solve_at = |s: f64| -> Result<EquilibriumReport> {
        GapModel {
            p_b: ratio * s,
            p_c: s,
            p_r_net,
            cost: contribution_cost,
            n,
            dist,
            ranking,
            pool: None,
            quality,
            draws,
        }
        .solve()
    };

    // Grow the upper bracket until rewards are large enough to pull the
    // threshold down to (or past) the target.
    let mut iterations = 0;
    let mut s_hi = 1.0;
    let mut rep_hi = solve_at(s_hi)?;
    while rep_hi.threshold > a_hat && s_hi < SCALE_MAX {
        s_hi *= 4.0;
        rep_hi = solve_at(s_hi)?;
        iterations += 1;
    }
    if rep_hi.threshold > a_hat {
        return Err(Error::Infeasible(format!(
            "target threshold {a_hat} unreachable from above: at scale {s_hi} the equilibrium \
             threshold is still {} ({})",
            rep_hi.threshold,
            human_regime(rep_hi.regime)
        )));
    }
    // Shrink the lower bracket until rewards are small enough to leave the
    // threshold at (or above) the target.
    let mut s_lo = s_hi;
    let mut rep_lo = rep_hi;
    while rep_lo.threshold < a_hat && s_lo > SCALE_MIN {
        s_lo /= 4.0;
        rep_lo = solve_at(s_lo)?;
        iterations += 1;
    }
    if rep_lo.threshold < a_hat {
        return Err(Error::Infeasible(format!(
            "target threshold {a_hat} unreachable from below: even at scale {s_lo} the \
             equilibrium threshold is {} ({})",
            rep_lo.threshold,
            human_regime(rep_lo.regime)
        )));
    }

    let finish = |s: f64, rep: EquilibriumReport, iterations: usize| CalibrationResult {
        p_b: ratio * s,
        p_c: s,
        achieved_threshold: rep.threshold,
        residual: (rep.threshold - a_hat).abs(),
        iterations,
    };
    if (rep_lo.threshold - a_hat).abs() <= CALIBRATION_TOL {
        return Ok(finish(s_lo, rep_lo, iterations));
    }
    let mut best: Option<(f64, EquilibriumReport)> = None;
    while iterations < MAX_BISECT {
        iterations += 1;
        let mid = 0.5 * (s_lo + s_hi);
        let rep = solve_at(mid)?;
        if best.as_ref().map_or(true, |(_, b)| {
            (rep.threshold - a_hat).abs() < (b.threshold - a_hat).abs()
        }) {
            best = Some((mid, rep));
        }
        if (rep.threshold - a_hat).abs() <= CALIBRATION_TOL {
            return Ok(finish(mid, rep, iterations));
        }
        if rep.threshold > a_hat {
            s_lo = mid;
        } else {
            s_hi = mid;
        }
        if (s_hi - s_lo) / s_hi.max(1.0) < 1e-16 {
            break;
        }
    }
    let (s, rep) = best.expect("at least one bisection step");
    let result = finish(s, rep, iterations);
    if result.residual <= CALIBRATION_TOL {
        Ok(result)
    } else {
        Err(Error::Infeasible(format!(
            "calibration stalled: best threshold {} misses target {a_hat} by {}",
            result.achieved_threshold, result.residual
        )))
    }
}

/// Comparative-statics row: rewards that implement the same threshold for
/// a given number of agents.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRow {
    pub n: usize,
    pub p_b: f64,
    pub p_c: f64,
    pub residual: f64,
}

/// Calibrated rewards per n for a fixed interior target threshold; both
/// reward columns come out strictly increasing in n.
pub fn reward_schedule_vs_n(
    a_hat: f64,
    ratio: f64,
    p_r: f64,
    costs: &CostModel,
    dist: &AbilityDistribution,
    ranking: &RankingModel,
    n_range: &[usize],
    mc: &GapMc,
) -> Result<Vec<ScheduleRow>> {
    if !(a_hat > 0.0 && a_hat < 1.0) {
        return Err(Error::Domain(format!(
            "comparative statics need an interior target threshold, got {a_hat}"
        )));
    }
    n_range
        .iter()
        .map(|&n| {
            let cal = calibrate_rewards(a_hat, ratio, p_r, costs, n, dist, ranking, mc)?;
            Ok(ScheduleRow {
                n,
                p_b: cal.p_b,
                p_c: cal.p_c,
                residual: cal.residual,
            })
        })
        .collect()
}

pub fn schedule_to_csv(rows: &[ScheduleRow]) -> String {
    let mut out = String::from("n,p_B,p_C,residual\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.n, r.p_b, r.p_c, r.residual);
    }
    out
}

/// Monte Carlo threshold solve for a general mechanism paying
/// k * p(q_i, q_{-i}, m): the marginal agent at `a` compares the rating
/// utility against k * E[p] - c_C, with E[p] averaged over the fixed
/// opponent draws (opponents above the threshold contribute with quality
/// equal to ability).
fn general_threshold(
    mech: &GeneralMechanism,
    k: f64,
    p_r_net: f64,
    c_c: f64,
    draws_ab: &[Vec<f64>],
    n: usize,
    dist: &AbilityDistribution,
) -> f64 {
    let expected_p = |a: f64| -> f64 {
        let mut total = 0.0;
        let mut others: Vec<f64> = Vec::with_capacity(n - 1);
        for row in draws_ab {
            others.clear();
            others.extend(row.iter().copied().filter(|x| *x >= a));
            total += mech.expected_points_raw(a, &others);
        }
        total / draws_ab.len() as f64
    };
    let gap = |a: f64| -> f64 {
        p_r_net * (1.0 - dist.cdf_raw(a).powi(n as i32 - 1)) - (k * expected_p(a) - c_c)
    };
    if gap(0.0) <= 0.0 {
        return 0.0;
    }
    if gap(1.0) >= 0.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..MAX_BISECT {
        if hi - lo <= 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Calibrate the scale k of a general mechanism so the symmetric
/// equilibrium threshold equals `a_hat`: tiny k drives everyone out,
/// huge k pulls everyone in, and the threshold moves continuously and
/// monotonically in between.
pub fn calibrate_general_scale(
    mech: &GeneralMechanism,
    a_hat: f64,
    p_r: f64,
    costs: &CostModel,
    n: usize,
    dist: &AbilityDistribution,
    mc: &GapMc,
) -> Result<f64> {
    if !(a_hat > 0.0 && a_hat < 1.0) {
        return Err(Error::Domain(format!(
            "general-mechanism calibration needs an interior target, got {a_hat}"
        )));
    }
    mech.validate()?;
    let plan = SimulationPlan::new(mc.reps, mc.seed);
    let draws_ab: Vec<Vec<f64>> = (0..plan.reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = plan.rng(streams::GAP_ESTIMATE, rep as u64);
            (0..n - 1).map(|_| dist.sample_one(&mut rng)).collect()
        })
        .collect();
    let p_r_net = p_r - costs.c_r;
    let solve_at = |k: f64| general_threshold(mech, k, p_r_net, costs.c_c, &draws_ab, n, dist);

    let mut k_hi = 1.0;
    while solve_at(k_hi) > a_hat && k_hi < SCALE_MAX {
        k_hi *= 4.0;
    }
    if solve_at(k_hi) > a_hat {
        return Err(Error::Infeasible(format!(
            "no scale reaches threshold {a_hat}: even k = {k_hi} leaves the threshold above it"
        )));
    }
    let mut k_lo = k_hi;
    while solve_at(k_lo) < a_hat && k_lo > SCALE_MIN {
        k_lo /= 4.0;
    }
    if solve_at(k_lo) < a_hat {
        return Err(Error::Infeasible(format!(
            "no scale reaches threshold {a_hat}: even k = {k_lo} leaves the threshold below it"
        )));
    }
    for _ in 0..MAX_BISECT {
        let mid = 0.5 * (k_lo + k_hi);
        let a = solve_at(mid);
        if (a - a_hat).abs() <= CALIBRATION_TOL {
            return Ok(mid);
        }
        if a > a_hat {
            k_lo = mid;
        } else {
            k_hi = mid;
        }
        if (k_hi - k_lo) / k_hi.max(1.0) < 1e-16 {
            break;
        }
    }
    Err(Error::Infeasible(format!(
        "scale calibration stalled between {k_lo} and {k_hi} for target {a_hat}"
    )))
}
