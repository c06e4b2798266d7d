//! Endogenous effort: designer-optimal strategies with effort pinned at
//! its maximum, effort best responses, the perfect-ranking impossibility
//! witness, the sufficient condition for noisy-ranking implementability,
//! and the constructive reward calibration under softmax noise.

use serde::{Deserialize, Serialize};

use crate::designer::{calibrate_scale_on, optimal_threshold_mapped, CalibrationResult};
use crate::dist::AbilityDistribution;
use crate::error::{Error, Result};
use crate::mc::{
    action_payoff_samples, verification_ability_grid, verify_equilibrium, RegretReport,
    RegretTolerance, SimulationPlan,
};
use crate::ranking::RankingModel;
use crate::scenario::{
    Action, DesignerUtility, EffortCostFunction, EffortPolicy, NonstrategicPool, OffAction,
    QualityModel, RewardConfig, RewardScheme, ScenarioConfig, StrategyEntry, StrategyProfile,
};
use crate::threshold::{GapDraws, GapMc, QualityMap};
use crate::util::{linspace, mean_stderr};

/// A validated endogenous-effort scenario: non-homogeneous quality model
/// with an effort cost function attached.
#[derive(Clone, Debug)]
pub struct EffortScenario {
    scenario: ScenarioConfig,
}

impl EffortScenario {
    pub fn new(scenario: ScenarioConfig) -> Result<Self> {
        scenario.validate()?;
        if scenario.quality.is_homogeneous() {
            return Err(Error::Contract(
                "endogenous-effort analysis needs a non-homogeneous quality model".into(),
            ));
        }
        Ok(Self { scenario })
    }

    pub fn scenario(&self) -> &ScenarioConfig {
        &self.scenario
    }

    pub fn effort_cost(&self) -> &EffortCostFunction {
        self.scenario
            .effort_cost
            .as_ref()
            .expect("validated at construction")
    }

    fn softmax_eta(&self) -> Result<f64> {
        match self.scenario.ranking {
            RankingModel::SoftmaxNoise { eta } => Ok(eta),
            other => Err(Error::Contract(format!(
                "this analysis needs softmax ranking noise, scenario uses {other:?}"
            ))),
        }
    }

    fn best_rewards(&self) -> Result<RewardScheme> {
        self.scenario.rewards.as_best()
    }
}

/// Effort grid over the quality model's meaningful effort range.
pub fn effort_grid(quality: &QualityModel, points: usize) -> Vec<f64> {
    let (lo, hi) = quality.effort_domain();
    if hi <= lo {
        return vec![lo];
    }
    linspace(lo, hi, points.max(2))
}

/// The designer-optimal endogenous strategy: pin effort at one, map
/// abilities through q(a, 1), and search the participation threshold that
/// maximizes E[V] on the induced quality distribution. Returns
/// (threshold, effort = 1).
pub fn optimal_endogenous_strategy(
    n: usize,
    dist: &AbilityDistribution,
    quality: &QualityModel,
    utility: &DesignerUtility,
    grid: usize,
    pool: Option<&NonstrategicPool>,
    plan: &SimulationPlan,
) -> Result<(f64, f64)> {
    quality.validate()?;
    let a_hat = optimal_threshold_mapped(n, dist, utility, grid, pool, plan, |a| {
        quality.quality(a, 1.0)
    })?;
    Ok((a_hat, 1.0))
}

/// Best-response effort of a contributing agent: maximize the Monte
/// Carlo payoff over the effort grid with common random numbers; ties go
/// to the smallest effort.
pub fn best_response_effort(
    a: f64,
    profile: &StrategyProfile,
    scenario: &ScenarioConfig,
    efforts: &[f64],
    plan: &SimulationPlan,
) -> Result<f64> {
    if efforts.is_empty() {
        return Err(Error::Contract("effort grid is empty".into()));
    }
    let mut best_effort = efforts[0];
    let mut best_mean = f64::NEG_INFINITY;
    for &e in efforts {
        let samples =
            action_payoff_samples(0, a, &Action::contribute(e), profile, scenario, plan)?;
        let (mean, _) = mean_stderr(&samples);
        if mean > best_mean {
            best_mean = mean;
            best_effort = e;
        }
    }
    Ok(best_effort)
}

/// Witness that perfect ranking destroys effort incentives at the
/// designer-optimal profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    /// c(1) - c(0): the exact payoff gain from dropping to zero effort at
    /// the threshold, where the win probability cannot depend on effort.
    pub cost_saved: f64,
    /// Monte Carlo (mean, stderr) of the zero-versus-full effort payoff
    /// difference at the threshold ability.
    pub gain_at_threshold: (f64, f64),
    /// The same comparison slightly above the threshold.
    pub gain_near_threshold: (f64, f64),
    /// True when the cost saving is strictly positive, so the optimal
    /// profile cannot be an equilibrium.
    pub equilibrium_broken: bool,
    /// Flat effort cost: no deviation gain exists and the impossibility
    /// is not witnessed.
    pub flat_cost_flagged: bool,
}

/// Check the threshold agent's effort deviation under perfect ranking.
///
/// At the profile where everyone above `a_hat` contributes with effort
/// one, the marginal contributor wins exactly when nobody else enters:
/// any rival has both higher ability and full effort, hence higher
/// quality. Her winning odds are therefore independent of her own effort
/// and she pockets c(1) - c(0) by shirking completely.
pub fn perfect_ranking_undermines_effort(
    scenario: &EffortScenario,
    a_hat: f64,
    plan: &SimulationPlan,
) -> Result<DeviationReport> {
    if !matches!(scenario.scenario().ranking, RankingModel::Perfect {}) {
        return Err(Error::Contract(
            "the impossibility witness is about perfect ranking".into(),
        ));
    }
    let cfg = scenario.scenario();
    let cost = scenario.effort_cost();
    let cost_saved = cost.cost(1.0) - cost.cost(0.0);

    let rewards = scenario.best_rewards()?;
    let off = OffAction::preferred(rewards.p_r, cfg.costs.c_r);
    let profile = StrategyProfile::symmetric(
        StrategyEntry::threshold_only(a_hat)
            .with_effort(EffortPolicy::constant(1.0))
            .with_off_action(off),
    );
    let paired_gain = |ability: f64| -> Result<(f64, f64)> {
        let full =
            action_payoff_samples(0, ability, &Action::contribute(1.0), &profile, cfg, plan)?;
        let none =
            action_payoff_samples(0, ability, &Action::contribute(0.0), &profile, cfg, plan)?;
        let diffs: Vec<f64> = none.iter().zip(&full).map(|(z, f)| z - f).collect();
        Ok(mean_stderr(&diffs))
    };
    let gain_at_threshold = paired_gain(a_hat)?;
    let gain_near_threshold = paired_gain((a_hat + 0.01).min(1.0))?;
    Ok(DeviationReport {
        cost_saved,
        gain_at_threshold,
        gain_near_threshold,
        equilibrium_broken: cost_saved > 0.0,
        flat_cost_flagged: cost_saved == 0.0,
    })
}

/// Which winner-reward floor the sufficient condition is evaluated at.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PbFloor {
    /// p_B = c(0), the stated form.
    #[default]
    CostAtZero,
    /// p_B = c(0) + max(p_R - c_R, 0), the weaker variant that accounts
    /// for the rating outside option.
    CostPlusRatingMargin,
}

/// Outcome of the effort-incentive sufficiency check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffortConditionReport {
    pub holds: bool,
    /// min over the grid of [marginal benefit bound - c'(e)].
    pub margin: f64,
    pub witness_effort: f64,
    pub witness_ability: f64,
    pub witness_contributors: usize,
    /// The marginal-benefit bound at the witness point.
    pub rhs_at_witness: f64,
}

/// Conservative grid check of the implementability condition
/// `c'(e) <= dq/de * dpi/dq * (p_B - p_C) * (1 - F(a_hat)^(n-1))` with
/// p_B at its floor.
///
/// The winner-probability derivative is bounded below by the worst case
/// of pi (1 - pi) / eta over the extreme quality gaps reachable by the
/// quality model, separately for every contributor count m in 2..=n; a
/// false negative only forbids calibration, it never admits an
/// unverified scheme. Perfect and beta-mixture rankings have a flat
/// winner probability almost everywhere, so the bound is zero and the
/// condition can only fail (or hold vacuously at zero marginal cost).
pub fn effort_condition_holds(
    scenario: &EffortScenario,
    a_hat: f64,
    ratio: f64,
    e_grid_points: usize,
    a_grid_points: usize,
    floor: PbFloor,
) -> Result<EffortConditionReport> {
    if !(ratio > 1.0) {
        return Err(Error::Domain(format!(
            "reward ratio must exceed 1, got {ratio}"
        )));
    }
    if !(0.0..=1.0).contains(&a_hat) {
        return Err(Error::Domain(format!("threshold {a_hat} outside [0, 1]")));
    }
    let cfg = scenario.scenario();
    let cost = scenario.effort_cost();
    let p_b = match floor {
        PbFloor::CostAtZero => cost.cost(0.0),
        PbFloor::CostPlusRatingMargin => {
            cost.cost(0.0) + (cfg.rewards.p_r() - cfg.costs.c_r).max(0.0)
        }
    };
    let p_c = p_b / ratio;
    let participation = 1.0 - cfg.dist.cdf_raw(a_hat).powi(cfg.n as i32 - 1);

    // Lower bound on dpi/dq over all reachable quality profiles, per m.
    let dpi_bound = match cfg.ranking {
        RankingModel::SoftmaxNoise { eta } => {
            let (e_lo, _) = cfg.quality.effort_domain();
            let q_min = cfg.quality.quality(0.0, e_lo);
            let q_max = cfg.quality.quality(1.0, 1.0);
            let gap = q_max - q_min;
            let mut worst = f64::INFINITY;
            for m in 2..=cfg.n {
                let rivals = (m - 1) as f64;
                let pi_lo = 1.0 / (1.0 + rivals * (gap / eta).exp());
                let pi_hi = 1.0 / (1.0 + rivals * (-gap / eta).exp());
                let bound = (pi_lo * (1.0 - pi_lo)).min(pi_hi * (1.0 - pi_hi)) / eta;
                worst = worst.min(bound);
            }
            worst
        }
        // Flat winner probability off ties: no marginal effort benefit.
        _ => 0.0,
    };
    let worst_m = cfg.n;

    let mut report = EffortConditionReport {
        holds: true,
        margin: f64::INFINITY,
        witness_effort: 0.0,
        witness_ability: 0.0,
        witness_contributors: worst_m,
        rhs_at_witness: f64::INFINITY,
    };
    for e in effort_grid(&cfg.quality, e_grid_points) {
        for a in linspace(0.0, 1.0, a_grid_points.max(2)) {
            let rhs = cfg.quality.dq_de(a, e) * dpi_bound * (p_b - p_c) * participation;
            let margin = rhs - cost.marginal(e);
            if margin < report.margin {
                report.margin = margin;
                report.witness_effort = e;
                report.witness_ability = a;
                report.rhs_at_witness = rhs;
            }
        }
    }
    report.holds = report.margin >= 0.0;
    Ok(report)
}

/// A calibrated endogenous-effort scheme together with its equilibrium
/// verification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndogenousCalibration {
    pub rewards: RewardScheme,
    pub calibration: CalibrationResult,
    pub verification: RegretReport,
}

/// Calibrate (p_B, p_C) at a fixed ratio so that contributing above
/// `a_hat` with effort one is an equilibrium under softmax ranking.
///
/// With effort pinned at one the game reduces to a homogeneous contest
/// with contribution cost c(1) and qualities q(a, 1); the reward scale
/// is bisected until the solved threshold matches the target (the
/// threshold map is strictly monotone in the scale, so the matching
/// scale - and hence the smallest implementing p_B - is unique). The
/// sufficient condition must hold first, and the returned profile is
/// re-verified by best-response regret before it is accepted.
pub fn calibrate_endogenous_rewards(
    a_hat: f64,
    ratio: f64,
    scenario: &EffortScenario,
    mc: &GapMc,
    verify_plan: &SimulationPlan,
) -> Result<EndogenousCalibration> {
    let condition = effort_condition_holds(scenario, a_hat, ratio, 21, 21, PbFloor::default())?;
    if !condition.holds {
        return Err(Error::Contract(format!(
            "the effort-incentive condition fails (margin {}); calibration would not verify",
            condition.margin
        )));
    }
    scenario.softmax_eta()?;
    let cfg = scenario.scenario();
    let cost = scenario.effort_cost();
    let base_rewards = scenario.best_rewards()?;

    let draws = GapDraws::generate(cfg.n, &cfg.dist, None, mc);
    let calibration = calibrate_scale_on(
        a_hat,
        ratio,
        base_rewards.p_r - cfg.costs.c_r,
        cost.cost(1.0),
        cfg.n,
        &cfg.dist,
        &cfg.ranking,
        Some(&draws),
        QualityMap::FullEffort(&cfg.quality),
    )?;
    let rewards = calibration.rewards(base_rewards.p_r);
    if !(rewards.p_b > cost.cost(0.0)) {
        return Err(Error::VerificationFailed(format!(
            "calibrated p_B = {} does not exceed c(0) = {}; no agent would enter",
            rewards.p_b,
            cost.cost(0.0)
        )));
    }

    let mut verified_cfg = cfg.clone();
    verified_cfg.rewards = RewardConfig::Best {
        p_b: rewards.p_b,
        p_c: rewards.p_c,
        p_r: rewards.p_r,
    };
    let profile = StrategyProfile::symmetric(
        StrategyEntry::threshold_only(a_hat)
            .with_effort(EffortPolicy::constant(1.0))
            .with_off_action(OffAction::preferred(rewards.p_r, cfg.costs.c_r)),
    );
    let verification = verify_equilibrium(
        &profile,
        &verified_cfg,
        &verification_ability_grid(a_hat),
        &effort_grid(&cfg.quality, 21),
        verify_plan,
        RegretTolerance::default(),
    )?;
    if !verification.verified {
        return Err(Error::VerificationFailed(format!(
            "calibrated scheme failed regret verification: {:?}",
            verification.worst()
        )));
    }
    Ok(EndogenousCalibration {
        rewards,
        calibration,
        verification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::CostModel;

    fn uniform() -> AbilityDistribution {
        AbilityDistribution::uniform()
    }

    fn effort_scenario(
        ranking: RankingModel,
        kappa: f64,
        rewards: (f64, f64, f64),
    ) -> EffortScenario {
        EffortScenario::new(ScenarioConfig {
            n: 2,
            dist: uniform(),
            rewards: RewardConfig::Best {
                p_b: rewards.0,
                p_c: rewards.1,
                p_r: rewards.2,
            },
            costs: CostModel::new(0.1, 0.0),
            effort_cost: Some(EffortCostFunction::new(0.05, kappa, 1.0).unwrap()),
            quality: QualityModel::LinearMix { gamma: 0.5 },
            ranking,
            utility: DesignerUtility::SumMinusSearchCost { gamma: 0.75 },
            pool: None,
            seed: 7,
        })
        .unwrap()
    }

    #[test]
    fn effort_scenario_rejects_homogeneous_quality() {
        let cfg = ScenarioConfig {
            n: 2,
            dist: uniform(),
            rewards: RewardConfig::Best {
                p_b: 1.0,
                p_c: 0.0,
                p_r: 0.0,
            },
            costs: CostModel::new(0.1, 0.0),
            effort_cost: None,
            quality: QualityModel::Homogeneous {},
            ranking: RankingModel::Perfect {},
            utility: DesignerUtility::MaxQuality,
            pool: None,
            seed: 1,
        };
        assert!(EffortScenario::new(cfg).is_err());
    }

    #[test]
    fn optimal_strategy_reduces_to_homogeneous_at_gamma_one() {
        let plan = SimulationPlan::new(30_000, 11);
        let utility = DesignerUtility::SumMinusSearchCost { gamma: 0.5 };
        let quality = QualityModel::LinearMix { gamma: 1.0 };
        let (a_hat, e) =
            optimal_endogenous_strategy(4, &uniform(), &quality, &utility, 51, None, &plan)
                .unwrap();
        assert_eq!(e, 1.0);
        let homog =
            crate::designer::optimal_threshold(4, &uniform(), &utility, 51, None, &plan).unwrap();
        assert!((a_hat - homog).abs() < 1e-12);
    }

    #[test]
    fn optimal_strategy_worked_values() {
        let plan = SimulationPlan::new(30_000, 12);
        // Monotone utility: everyone should participate at full effort.
        let (a_hat, e) = optimal_endogenous_strategy(
            3,
            &uniform(),
            &QualityModel::LinearMix { gamma: 0.5 },
            &DesignerUtility::SumQuality,
            51,
            None,
            &plan,
        )
        .unwrap();
        assert_eq!(e, 1.0);
        assert!(a_hat <= 1e-9);

        // Search cost 0.75 with q(a, 1) = (a + 1) / 2: the marginal
        // contributor breaks even at a = 0.5.
        let (a_hat, _) = optimal_endogenous_strategy(
            3,
            &uniform(),
            &QualityModel::LinearMix { gamma: 0.5 },
            &DesignerUtility::SumMinusSearchCost { gamma: 0.75 },
            101,
            None,
            &plan,
        )
        .unwrap();
        assert!((a_hat - 0.5).abs() <= 0.02, "a_hat = {a_hat}");
    }

    #[test]
    fn best_response_effort_collapses_under_perfect_ranking() {
        let scenario = effort_scenario(RankingModel::Perfect {}, 0.1, (1.0, 0.0, 0.0));
        let profile = StrategyProfile::symmetric(
            StrategyEntry::threshold_only(0.2).with_effort(EffortPolicy::constant(1.0)),
        );
        let plan = SimulationPlan::new(20_000, 5);
        let grid = effort_grid(&QualityModel::LinearMix { gamma: 0.5 }, 11);
        let e = best_response_effort(0.2, &profile, scenario.scenario(), &grid, &plan).unwrap();
        assert_eq!(e, 0.0);
    }

    #[test]
    fn best_response_effort_collapses_under_huge_marginal_cost() {
        let scenario = effort_scenario(
            RankingModel::SoftmaxNoise { eta: 1.0 },
            50.0,
            (1.0, 0.1, 0.0),
        );
        let profile = StrategyProfile::symmetric(
            StrategyEntry::threshold_only(0.2).with_effort(EffortPolicy::constant(1.0)),
        );
        let plan = SimulationPlan::new(20_000, 6);
        let grid = effort_grid(&QualityModel::LinearMix { gamma: 0.5 }, 11);
        let e = best_response_effort(0.5, &profile, scenario.scenario(), &grid, &plan).unwrap();
        assert_eq!(e, 0.0);
    }

    #[test]
    fn perfect_ranking_deviation_gain_is_the_cost_saving() {
        let scenario = effort_scenario(RankingModel::Perfect {}, 0.1, (1.0, 0.0, 0.0));
        let plan = SimulationPlan::new(60_000, 9);
        let report = perfect_ranking_undermines_effort(&scenario, 0.2, &plan).unwrap();
        assert!((report.cost_saved - 0.1).abs() < 1e-12);
        assert!(report.equilibrium_broken);
        assert!(!report.flat_cost_flagged);
        let (gain, se) = report.gain_at_threshold;
        assert!((gain - 0.1).abs() <= 3.0 * se.max(1e-12), "gain {gain}");
        let (near, se) = report.gain_near_threshold;
        assert!(near > 3.0 * se, "near-threshold gain {near} se {se}");
    }

    #[test]
    fn flat_effort_cost_is_flagged_not_witnessed() {
        let scenario = effort_scenario(RankingModel::Perfect {}, 0.0, (1.0, 0.0, 0.0));
        let plan = SimulationPlan::new(5_000, 9);
        let report = perfect_ranking_undermines_effort(&scenario, 0.2, &plan).unwrap();
        assert_eq!(report.cost_saved, 0.0);
        assert!(report.flat_cost_flagged);
        assert!(!report.equilibrium_broken);
    }

    #[test]
    fn condition_report_matches_hand_computation() {
        // eta = 1, dq/de = 0.5, p_B = c(0) = 0.05, ratio 10, a_hat = 0.2:
        // worst pi(1-pi) = e / (1 + e)^2 and the bound works out to about
        // 3.539e-3, so kappa = 0.003 holds with margin ~5.39e-4.
        let scenario = effort_scenario(
            RankingModel::SoftmaxNoise { eta: 1.0 },
            0.003,
            (1.0, 0.1, 0.0),
        );
        let report =
            effort_condition_holds(&scenario, 0.2, 10.0, 21, 21, PbFloor::CostAtZero).unwrap();
        assert!(report.holds);
        assert!(
            (report.margin - 5.390e-4).abs() < 1e-5,
            "margin {}",
            report.margin
        );
        assert!((report.rhs_at_witness - 3.539e-3).abs() < 1e-5);

        let scenario = effort_scenario(
            RankingModel::SoftmaxNoise { eta: 1.0 },
            0.01,
            (1.0, 0.1, 0.0),
        );
        let report =
            effort_condition_holds(&scenario, 0.2, 10.0, 21, 21, PbFloor::CostAtZero).unwrap();
        assert!(!report.holds);
        assert!(
            (report.margin + 6.461e-3).abs() < 1e-5,
            "margin {}",
            report.margin
        );
    }

    #[test]
    fn condition_fails_vacuously_under_perfect_ranking() {
        let scenario = effort_scenario(RankingModel::Perfect {}, 0.003, (1.0, 0.1, 0.0));
        let report =
            effort_condition_holds(&scenario, 0.2, 10.0, 21, 21, PbFloor::CostAtZero).unwrap();
        assert!(!report.holds);
        assert_eq!(report.rhs_at_witness, 0.0);
    }

    #[test]
    fn rating_floor_variant_is_weaker() {
        let scenario = effort_scenario(
            RankingModel::SoftmaxNoise { eta: 1.0 },
            0.003,
            (1.0, 0.1, 0.05),
        );
        let strict =
            effort_condition_holds(&scenario, 0.2, 10.0, 21, 21, PbFloor::CostAtZero).unwrap();
        let weak =
            effort_condition_holds(&scenario, 0.2, 10.0, 21, 21, PbFloor::CostPlusRatingMargin)
                .unwrap();
        assert!(weak.margin >= strict.margin);
    }

    #[test]
    fn endogenous_calibration_round_trips_and_verifies() {
        let scenario = effort_scenario(
            RankingModel::SoftmaxNoise { eta: 1.0 },
            0.003,
            (1.0, 0.1, 0.0),
        );
        let mc = GapMc {
            reps: 20_000,
            seed: 88,
        };
        let verify_plan = SimulationPlan::new(20_000, 99);
        let out = calibrate_endogenous_rewards(0.2, 10.0, &scenario, &mc, &verify_plan).unwrap();
        assert!(out.calibration.residual <= 1e-6);
        assert!(out.rewards.p_b > 0.05, "p_B = {}", out.rewards.p_b);
        assert!(out.verification.verified);
        assert!((out.rewards.p_b / out.rewards.p_c - 10.0).abs() < 1e-9);

        // With the condition violated the precondition gate must trip.
        let bad = effort_scenario(
            RankingModel::SoftmaxNoise { eta: 1.0 },
            0.01,
            (1.0, 0.1, 0.0),
        );
        assert!(matches!(
            calibrate_endogenous_rewards(0.2, 10.0, &bad, &mc, &verify_plan),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn calibrated_scheme_induces_full_effort_best_response() {
        let scenario = effort_scenario(
            RankingModel::SoftmaxNoise { eta: 1.0 },
            0.003,
            (1.0, 0.1, 0.0),
        );
        let mc = GapMc {
            reps: 20_000,
            seed: 88,
        };
        let verify_plan = SimulationPlan::new(20_000, 99);
        let out = calibrate_endogenous_rewards(0.2, 10.0, &scenario, &mc, &verify_plan).unwrap();
        let mut cfg = scenario.scenario().clone();
        cfg.rewards = RewardConfig::Best {
            p_b: out.rewards.p_b,
            p_c: out.rewards.p_c,
            p_r: out.rewards.p_r,
        };
        let profile = StrategyProfile::symmetric(
            StrategyEntry::threshold_only(0.2).with_effort(EffortPolicy::constant(1.0)),
        );
        let plan = SimulationPlan::new(40_000, 123);
        let grid = effort_grid(&cfg.quality, 11);
        for a in [0.2, 0.5, 0.9] {
            let e = best_response_effort(a, &profile, &cfg, &grid, &plan).unwrap();
            assert_eq!(e, 1.0, "best response at ability {a}");
        }
    }
}
