//! Asymmetric equilibria of rank-order mechanisms with beta-accurate
//! ranking: agent 1 always contributes while everyone else shares an
//! interior threshold. The shared threshold is the root of the rating-
//! versus-contributing gap of the marginal non-special agent, and the
//! construction is valid whenever neither all-rate nor all-contribute is
//! already an equilibrium.

use serde::{Deserialize, Serialize};

use crate::dist::AbilityDistribution;
use crate::error::{Error, Result};
use crate::mc::{estimate_action_utility, SimulationPlan};
use crate::ranking::RankingModel;
use crate::scenario::{
    Action, CostModel, DesignerUtility, OffAction, QualityModel, RankPrizes, RewardConfig,
    ScenarioConfig, StrategyEntry, StrategyProfile,
};

const MAX_BISECT: usize = 200;

/// The constructed asymmetric profile: agent 1 contributes at every
/// ability, agents 2..n contribute above the shared threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymmetricProfile {
    /// Shared threshold of agents 2..n, strictly inside (0, 1).
    pub shared_threshold: f64,
    /// |w_delta(shared_threshold)| at the returned root.
    pub residual: f64,
    /// Agent 1's contribute-minus-rate margin at ability zero.
    pub agent1_margin: f64,
}

impl AsymmetricProfile {
    /// The profile as playable strategies (agent slot 0 is the
    /// always-contributor).
    pub fn to_strategy_profile(&self, n: usize, off_action: OffAction) -> StrategyProfile {
        let mut entries = vec![
            StrategyEntry::threshold_only(self.shared_threshold).with_off_action(off_action);
            n
        ];
        entries[0] = StrategyEntry::threshold_only(0.0).with_off_action(off_action);
        StrategyProfile::per_agent(entries)
    }

    pub fn report(&self, verified_regret: Option<f64>) -> AsymmetricReport {
        AsymmetricReport {
            a_star: self.shared_threshold,
            residual: self.residual,
            agent1_margin: self.agent1_margin,
            verified_regret,
        }
    }
}

/// JSON report emitted by the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymmetricReport {
    pub a_star: f64,
    pub residual: f64,
    pub agent1_margin: f64,
    pub verified_regret: Option<f64>,
}

/// Rating payoffs in the asymmetric profile: agent 1 only finds content
/// to rate when at least one of the other n-1 agents clears the shared
/// threshold, while agents 2..n always do because agent 1 contributes no
/// matter what. Hence ui_rate >= u1_rate.
pub fn rating_payoffs(
    a_star: f64,
    n: usize,
    dist: &AbilityDistribution,
    p_r: f64,
    c_r: f64,
) -> (f64, f64) {
    let net = p_r - c_r;
    let u1 = (1.0 - dist.cdf_raw(a_star).powi(n as i32 - 1)) * net;
    (u1, net)
}

/// Scenario wrapper for the rank-order game used by the Monte Carlo
/// branches and by regret verification.
pub fn rank_order_scenario(
    prizes: &RankPrizes,
    beta: f64,
    costs: &CostModel,
    p_r: f64,
    n: usize,
    dist: &AbilityDistribution,
    seed: u64,
) -> ScenarioConfig {
    ScenarioConfig {
        n,
        dist: dist.clone(),
        rewards: RewardConfig::RankOrder {
            prizes: prizes.as_slice().to_vec(),
            p_r,
        },
        costs: *costs,
        effort_cost: None,
        quality: QualityModel::Homogeneous {},
        ranking: RankingModel::BetaMixture { beta },
        utility: DesignerUtility::MaxQuality,
        pool: None,
        seed,
    }
}

fn asym_strategies(a_star: f64, n: usize, off: OffAction) -> StrategyProfile {
    AsymmetricProfile {
        shared_threshold: a_star,
        residual: 0.0,
        agent1_margin: 0.0,
    }
    .to_strategy_profile(n, off)
}

/// Expected payoff from contributing at ability `a` for one agent of the
/// asymmetric profile (slot 0 always contributes, slots 1.. use the
/// shared threshold `a_star`).
///
/// The two-agent game is evaluated in closed form by branching on the
/// opponent's presence and the perfect-versus-random ranking draw;
/// larger games fall back to Monte Carlo under the plan's common random
/// numbers.
#[allow(clippy::too_many_arguments)]
pub fn rank_order_contribution_payoff(
    agent_index: usize,
    a: f64,
    a_star: f64,
    prizes: &RankPrizes,
    beta: f64,
    n: usize,
    dist: &AbilityDistribution,
    c_c: f64,
    plan: &SimulationPlan,
) -> Result<f64> {
    if agent_index >= n {
        return Err(Error::Contract(format!(
            "agent index {agent_index} out of range for n = {n}"
        )));
    }
    if n == 2 {
        let p1 = prizes.for_rank(1);
        let p2 = prizes.for_rank(2);
        let random_two = 0.5 * (p1 + p2);
        let points = if agent_index == 0 {
            // The opponent contributes only above the threshold.
            let present = 1.0 - dist.cdf_raw(a_star);
            let absent = 1.0 - present;
            let win_given_present = if present > 0.0 {
                ((dist.cdf_raw(a) - dist.cdf_raw(a_star)).max(0.0) / present).min(1.0)
            } else {
                0.0
            };
            let present_points = beta * (win_given_present * p1 + (1.0 - win_given_present) * p2)
                + (1.0 - beta) * random_two;
            absent * p1 + present * present_points
        } else {
            // Agent 1 always contributes, so the focal agent always faces
            // exactly one opponent with quality drawn from F.
            let win = dist.cdf_raw(a);
            beta * (win * p1 + (1.0 - win) * p2) + (1.0 - beta) * random_two
        };
        return Ok(points - c_c);
    }
    let costs = CostModel::new(c_c, 0.0);
    let scenario = rank_order_scenario(prizes, beta, &costs, 0.0, n, dist, plan.seed);
    let profile = asym_strategies(a_star, n, OffAction::Rate);
    let (mean, _) = estimate_action_utility(
        agent_index,
        a,
        &Action::contribute(0.0),
        &profile,
        &scenario,
        plan,
    )?;
    Ok(mean)
}

/// Contribution payoff at ability zero when every agent contributes: the
/// perfect branch ranks the zero-quality contribution last.
fn contribute_floor_when_all_in(prizes: &RankPrizes, beta: f64, n: usize, c_c: f64) -> f64 {
    beta * prizes.for_rank(n) + (1.0 - beta) * prizes.mean_over_ranks(n) - c_c
}

/// Contribution payoff at ability one when only agent 1 competes.
fn contribute_top_vs_agent1(prizes: &RankPrizes, beta: f64, c_c: f64) -> f64 {
    let p1 = prizes.for_rank(1);
    let p2 = prizes.for_rank(2);
    beta * p1 + (1.0 - beta) * 0.5 * (p1 + p2) - c_c
}

/// Construct the asymmetric equilibrium of the rank-order game.
///
/// Preconditions are checked exactly first: all-rate is an equilibrium
/// when the top prize cannot cover the contribution cost, and
/// all-contribute is an equilibrium when even a zero-ability agent
/// prefers contributing against a full field. Both reject construction
/// with an error naming the trivial equilibrium. Otherwise the gap
/// w_delta has a sign change on (0, 1) and bisection finds the shared
/// threshold; agent 1's optimality is then confirmed on an ability grid.
pub fn find_asymmetric_equilibrium(
    prizes: &RankPrizes,
    beta: f64,
    costs: &CostModel,
    p_r: f64,
    n: usize,
    dist: &AbilityDistribution,
    plan: &SimulationPlan,
) -> Result<AsymmetricProfile> {
    prizes.validate()?;
    if prizes.len() != n {
        return Err(Error::Contract(format!(
            "prize list length {} must equal n = {n}",
            prizes.len()
        )));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Domain(format!("beta {beta} outside [0, 1]")));
    }
    let outside = (p_r - costs.c_r).max(0.0);

    if prizes.for_rank(1) - costs.c_c <= 0.0 {
        return Err(Error::Infeasible(format!(
            "all-rate is already an equilibrium: the top prize {} does not cover the \
             contribution cost {}",
            prizes.for_rank(1),
            costs.c_c
        )));
    }
    let floor = contribute_floor_when_all_in(prizes, beta, n, costs.c_c);
    if floor >= outside {
        return Err(Error::Infeasible(format!(
            "all-contribute is already an equilibrium: contributing at ability zero pays \
             {floor} against an outside option of {outside}"
        )));
    }
    // w_delta(1) < 0 must hold for an interior root; its failure means the
    // boundary profile (agent 1 in, everyone else out) is itself an
    // equilibrium.
    let top = contribute_top_vs_agent1(prizes, beta, costs.c_c);
    if outside - top >= 0.0 {
        return Err(Error::Infeasible(format!(
            "no interior root: the profile where only agent 1 contributes is an equilibrium \
             (contributing at ability one pays {top} against {outside})"
        )));
    }

    let gap = |a_star: f64| -> Result<f64> {
        let u_c = rank_order_contribution_payoff(
            1, a_star, a_star, prizes, beta, n, dist, costs.c_c, plan,
        )?;
        Ok(outside - u_c)
    };
    // Sign bracket from the preconditions: w(0) > 0 > w(1).
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut iter = 0;
    while hi - lo > 1e-12 && iter < MAX_BISECT {
        let mid = 0.5 * (lo + hi);
        let g = gap(mid)?;
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
    let a_star = 0.5 * (lo + hi);
    let residual = gap(a_star)?.abs();
    if !(a_star > 0.0 && a_star < 1.0) {
        return Err(Error::Infeasible(format!(
            "shared threshold collapsed to a corner ({a_star})"
        )));
    }

    // Agent 1 must weakly prefer contributing at every ability; her payoff
    // increases in ability so zero is the binding point, but the whole
    // grid is confirmed.
    let u1_outside = rating_payoffs(a_star, n, dist, p_r, costs.c_r).0.max(0.0);
    let mut margin_at_zero = f64::NAN;
    for i in 0..=10 {
        let a = i as f64 / 10.0;
        let u1_c =
            rank_order_contribution_payoff(0, a, a_star, prizes, beta, n, dist, costs.c_c, plan)?;
        let slack = if n == 2 { 1e-12 } else { 3.0 * stderr_bound(prizes, plan) };
        if u1_c < u1_outside - slack {
            return Err(Error::VerificationFailed(format!(
                "agent 1 prefers the outside option at ability {a}: {u1_c} < {u1_outside}"
            )));
        }
        if i == 0 {
            margin_at_zero = u1_c - u1_outside;
        }
    }

    Ok(AsymmetricProfile {
        shared_threshold: a_star,
        residual,
        agent1_margin: margin_at_zero,
    })
}

/// Conservative standard-error scale for prize-valued Monte Carlo means.
fn stderr_bound(prizes: &RankPrizes, plan: &SimulationPlan) -> f64 {
    let spread = prizes.for_rank(1) - prizes.for_rank(prizes.len());
    0.5 * spread / (plan.reps as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::{verification_ability_grid, verify_equilibrium, RegretTolerance};

    fn uniform() -> AbilityDistribution {
        AbilityDistribution::uniform()
    }

    fn two_prizes() -> RankPrizes {
        RankPrizes::new(vec![1.0, 0.0]).unwrap()
    }

    #[test]
    fn rating_payoffs_worked_values() {
        let (u1, ui) = rating_payoffs(0.15, 2, &uniform(), 0.05, 0.0);
        assert!((u1 - 0.0425).abs() < 1e-12);
        assert!((ui - 0.05).abs() < 1e-12);
        assert!(ui >= u1);

        assert_eq!(rating_payoffs(0.3, 2, &uniform(), 0.05, 0.05), (0.0, 0.0));
        let (u1, ui) = rating_payoffs(0.0, 4, &uniform(), 0.05, 0.0);
        assert_eq!(u1, ui);
    }

    #[test]
    fn contribution_payoff_worked_values() {
        let plan = SimulationPlan::new(1, 0);
        // Agent 2 at her threshold beats agent 1 iff a_1 < 0.15.
        let u = rank_order_contribution_payoff(
            1,
            0.15,
            0.15,
            &two_prizes(),
            1.0,
            2,
            &uniform(),
            0.1,
            &plan,
        )
        .unwrap();
        assert!((u - 0.05).abs() < 1e-12);

        // Agent 1 at ability zero wins only when agent 2 stays out.
        let u = rank_order_contribution_payoff(
            0,
            0.0,
            0.15,
            &two_prizes(),
            1.0,
            2,
            &uniform(),
            0.1,
            &plan,
        )
        .unwrap();
        assert!((u - 0.05).abs() < 1e-12);

        // Random ranking with both agents in: win probability one half.
        let u = rank_order_contribution_payoff(
            1,
            0.4,
            0.0,
            &two_prizes(),
            0.0,
            2,
            &uniform(),
            0.1,
            &plan,
        )
        .unwrap();
        assert!((u - 0.4).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_branch_matches_uniform_rank_oracle() {
        // n = 3 with the other non-special agent out of the market
        // (threshold 1): the focal agent faces agent 1 alone, so at
        // beta = 0 the expected prize is the two-rank mean.
        let prizes = RankPrizes::new(vec![1.0, 0.5, 0.0]).unwrap();
        let plan = SimulationPlan::new(60_000, 5);
        let u = rank_order_contribution_payoff(
            1, 0.9, 1.0, &prizes, 0.0, 3, &uniform(), 0.0, &plan,
        )
        .unwrap();
        assert!((u - 0.75).abs() < 0.01, "u = {u}");
    }

    #[test]
    fn worked_equilibrium_and_margin() {
        let costs = CostModel::new(0.1, 0.0);
        let plan = SimulationPlan::new(1, 0);
        let profile =
            find_asymmetric_equilibrium(&two_prizes(), 1.0, &costs, 0.05, 2, &uniform(), &plan)
                .unwrap();
        assert!(
            (profile.shared_threshold - 0.15).abs() <= 1e-9,
            "a* = {}",
            profile.shared_threshold
        );
        assert!(profile.residual <= 1e-9);
        // agent-1 check: contributing pays 0.05 against rating's 0.0425.
        assert!((profile.agent1_margin - 0.0075).abs() <= 1e-9);
    }

    #[test]
    fn beta_zero_all_contribute_precondition_error() {
        // Random ranking: contributing pays 0.5 - 0.1 = 0.4 at any
        // ability, beating the 0.05 rating payoff, so all-contribute is an
        // equilibrium and the construction must refuse.
        let costs = CostModel::new(0.1, 0.0);
        let plan = SimulationPlan::new(1, 0);
        let err =
            find_asymmetric_equilibrium(&two_prizes(), 0.0, &costs, 0.05, 2, &uniform(), &plan);
        match err {
            Err(Error::Infeasible(msg)) => assert!(msg.contains("all-contribute"), "{msg}"),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn top_prize_below_cost_is_all_rate() {
        let costs = CostModel::new(1.5, 0.0);
        let plan = SimulationPlan::new(1, 0);
        let err =
            find_asymmetric_equilibrium(&two_prizes(), 1.0, &costs, 0.05, 2, &uniform(), &plan);
        match err {
            Err(Error::Infeasible(msg)) => assert!(msg.contains("all-rate"), "{msg}"),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn constructed_profile_verifies_and_differs_from_symmetric() {
        let costs = CostModel::new(0.1, 0.0);
        let plan = SimulationPlan::new(1, 0);
        let profile =
            find_asymmetric_equilibrium(&two_prizes(), 1.0, &costs, 0.05, 2, &uniform(), &plan)
                .unwrap();

        let scenario = rank_order_scenario(&two_prizes(), 1.0, &costs, 0.05, 2, &uniform(), 31);
        let strategies = profile.to_strategy_profile(2, OffAction::Rate);
        let verify_plan = SimulationPlan::new(50_000, 77);
        let grid = verification_ability_grid(profile.shared_threshold);
        let report = verify_equilibrium(
            &strategies,
            &scenario,
            &grid,
            &[],
            &verify_plan,
            RegretTolerance::default(),
        )
        .unwrap();
        assert!(report.verified, "worst: {:?}", report.worst());

        // The symmetric equilibrium of the same game solves
        // F(a) - 0.1 = 0.05 (1 - F(a)), i.e. a = 1/7: the asymmetric
        // threshold differs measurably (suboptimality witness).
        let symmetric = 1.0 / 7.0;
        assert!((profile.shared_threshold - symmetric).abs() > 1e-6);
    }

    #[test]
    fn dominance_ordering_at_thresholds() {
        let costs = CostModel::new(0.1, 0.0);
        let plan = SimulationPlan::new(1, 0);
        let profile =
            find_asymmetric_equilibrium(&two_prizes(), 1.0, &costs, 0.05, 2, &uniform(), &plan)
                .unwrap();
        let a_star = profile.shared_threshold;
        let u1_c = rank_order_contribution_payoff(
            0,
            0.0,
            a_star,
            &two_prizes(),
            1.0,
            2,
            &uniform(),
            0.1,
            &plan,
        )
        .unwrap();
        let ui_c = rank_order_contribution_payoff(
            1,
            a_star,
            a_star,
            &two_prizes(),
            1.0,
            2,
            &uniform(),
            0.1,
            &plan,
        )
        .unwrap();
        let (u1_r, ui_r) = rating_payoffs(a_star, 2, &uniform(), 0.05, 0.0);
        assert!(u1_c >= ui_c - 1e-12);
        assert!(ui_r >= u1_r);
    }
}
