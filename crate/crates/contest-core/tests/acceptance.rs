//! Acceptance suite: one test per release criterion, each printing a
//! PASS line (run with `cargo test --test acceptance -- --nocapture` to
//! see them). Tolerances are pinned in code; statistical checks use
//! three standard errors of the paired or pooled comparison.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use contest_core::asymmetric::{
    find_asymmetric_equilibrium, rank_order_scenario, rating_payoffs,
};
use contest_core::designer::{calibrate_rewards, reward_schedule_vs_n, EvSampler};
use contest_core::dist::AbilityDistribution;
use contest_core::effort::{
    calibrate_endogenous_rewards, effort_condition_holds, effort_grid,
    perfect_ranking_undermines_effort, EffortScenario, PbFloor,
};
use contest_core::error::Error;
use contest_core::learning::{
    estimate_both_costs, estimate_contribution_cost, run_contest_series, CostExperiment,
};
use contest_core::mc::{
    verification_ability_grid, verify_equilibrium, RegretTolerance, SimulationPlan,
};
use contest_core::ranking::RankingModel;
use contest_core::scenario::{
    CostModel, DesignerUtility, EffortCostFunction, EffortPolicy, MixedParticipationStrategy,
    OffAction, QualityModel, RankPrizes, RewardConfig, RewardScheme, ScenarioConfig,
    StrategyEntry, StrategyProfile,
};
use contest_core::threshold::{
    solve_symmetric_threshold, utility_gap, win_probability, CornerStatus, GapMc, RegimeClass,
};

fn uniform() -> AbilityDistribution {
    AbilityDistribution::uniform()
}

fn worked_rewards() -> RewardScheme {
    RewardScheme::new(1.0, 0.0, 0.0).unwrap()
}

fn worked_costs() -> CostModel {
    CostModel::new(0.1, 0.0)
}

fn homogeneous_scenario(rewards: RewardConfig, n: usize, seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        n,
        dist: uniform(),
        rewards,
        costs: worked_costs(),
        effort_cost: None,
        quality: QualityModel::Homogeneous {},
        ranking: RankingModel::Perfect {},
        utility: DesignerUtility::MaxQuality,
        pool: None,
        seed,
    }
}

/// Interior-regime scenario parameters drawn so that
/// p_C - c_C < p_R - c_R < p_B - c_C with comfortable gaps.
struct RandomScenario {
    rewards: RewardScheme,
    costs: CostModel,
    n: usize,
}

fn random_interior_scenario(rng: &mut ChaCha8Rng) -> RandomScenario {
    let c_c = 0.05 + 0.25 * rng.gen::<f64>();
    let c_r = 0.05 * rng.gen::<f64>();
    let p_c = 0.5 * c_c * rng.gen::<f64>();
    let x = 0.02 + 0.15 * rng.gen::<f64>(); // p_R - c_R headroom above p_C - c_C
    let p_r = c_r + x;
    let p_b = c_c + x + 0.05 + 0.6 * rng.gen::<f64>();
    RandomScenario {
        rewards: RewardScheme::new(p_b, p_c, p_r).unwrap(),
        costs: CostModel::new(c_c, c_r),
        n: 2 + (rng.gen::<u32>() % 5) as usize,
    }
}

#[test]
fn criterion_01_solver_worked_scenario_and_corners() {
    let mc = GapMc::default();
    let rep = solve_symmetric_threshold(
        &worked_rewards(),
        &worked_costs(),
        2,
        &uniform(),
        &RankingModel::Perfect {},
        None,
        &mc,
    )
    .unwrap();
    assert!(
        (rep.threshold - 0.1).abs() <= 1e-9,
        "worked threshold {}",
        rep.threshold
    );
    assert_eq!(rep.corner, CornerStatus::Interior);
    assert_eq!(rep.regime, RegimeClass::Interior);

    let all_rate = solve_symmetric_threshold(
        &RewardScheme::new(0.05, 0.0, 0.0).unwrap(),
        &worked_costs(),
        2,
        &uniform(),
        &RankingModel::Perfect {},
        None,
        &mc,
    )
    .unwrap();
    assert_eq!(
        (all_rate.corner, all_rate.regime),
        (CornerStatus::AllRate, RegimeClass::RateDominant)
    );
    assert_eq!(all_rate.threshold, 1.0);

    let all_contribute = solve_symmetric_threshold(
        &RewardScheme::new(1.0, 0.5, 0.2).unwrap(),
        &worked_costs(),
        2,
        &uniform(),
        &RankingModel::Perfect {},
        None,
        &mc,
    )
    .unwrap();
    assert_eq!(
        (all_contribute.corner, all_contribute.regime),
        (CornerStatus::AllContribute, RegimeClass::ContributeDominant)
    );
    assert_eq!(all_contribute.threshold, 0.0);
    println!("ACCEPTANCE 01 PASS equilibrium solver: a* = 0.1 within 1e-9, corners classified");
}

#[test]
fn criterion_02_gap_monotone_with_single_sign_change() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x02);
    let mc = GapMc::default();
    let mut checked = 0;
    let mut attempts = 0;
    while checked < 50 && attempts < 500 {
        attempts += 1;
        let s = random_interior_scenario(&mut rng);
        let ranking = if checked % 2 == 0 {
            RankingModel::Perfect {}
        } else {
            RankingModel::BetaMixture { beta: 0.5 }
        };
        let rep = solve_symmetric_threshold(
            &s.rewards, &s.costs, s.n, &uniform(), &ranking, None, &mc,
        )
        .unwrap();
        if rep.corner != CornerStatus::Interior {
            continue;
        }
        let mut prev = f64::INFINITY;
        let mut sign_changes = 0;
        let mut last_sign = 0i8;
        for i in 0..101 {
            let a = i as f64 / 100.0;
            let g = utility_gap(a, &s.rewards, &s.costs, s.n, &uniform(), &ranking, None, &mc);
            assert!(
                g < prev,
                "gap not strictly decreasing at a={a} (scenario {checked}, {ranking:?})"
            );
            prev = g;
            let sign = if g > 0.0 {
                1
            } else if g < 0.0 {
                -1
            } else {
                0
            };
            if sign != 0 {
                if last_sign != 0 && sign != last_sign {
                    sign_changes += 1;
                }
                last_sign = sign;
            }
        }
        assert_eq!(sign_changes, 1, "scenario {checked} under {ranking:?}");
        checked += 1;
    }
    assert_eq!(checked, 50, "could not build 50 interior scenarios");
    println!("ACCEPTANCE 02 PASS uniqueness: strictly decreasing gap, one sign change, 50 scenarios");
}

#[test]
fn criterion_03_threshold_continuity_in_rewards() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x03);
    let mc = GapMc::default();
    let mut checked = 0;
    let mut attempts = 0;
    while checked < 20 && attempts < 200 {
        attempts += 1;
        let s = random_interior_scenario(&mut rng);
        let base = solve_symmetric_threshold(
            &s.rewards,
            &s.costs,
            s.n,
            &uniform(),
            &RankingModel::Perfect {},
            None,
            &mc,
        )
        .unwrap();
        if base.corner != CornerStatus::Interior {
            continue;
        }
        let mut moves = Vec::new();
        for delta in [1e-2, 1e-3, 1e-4] {
            let perturbed = RewardScheme::new(
                s.rewards.p_b + delta,
                s.rewards.p_c + delta,
                s.rewards.p_r,
            )
            .unwrap();
            let rep = solve_symmetric_threshold(
                &perturbed,
                &s.costs,
                s.n,
                &uniform(),
                &RankingModel::Perfect {},
                None,
                &mc,
            )
            .unwrap();
            moves.push((rep.threshold - base.threshold).abs());
        }
        assert!(
            moves[0] + 1e-12 >= moves[1] && moves[1] + 1e-12 >= moves[2],
            "threshold moves {moves:?} not shrinking with delta"
        );
        assert!(moves[2] <= 1e-2, "smallest perturbation moved too far: {moves:?}");
        checked += 1;
    }
    assert_eq!(checked, 20);
    println!("ACCEPTANCE 03 PASS continuity: perturbation response shrinks with delta, 20 scenarios");
}

#[test]
fn criterion_04_calibration_round_trip() {
    let costs = worked_costs();
    let mc = GapMc::default();
    for ranking in [
        RankingModel::Perfect {},
        RankingModel::BetaMixture { beta: 0.5 },
    ] {
        for ratio in [2.0, 10.0] {
            for i in 1..=9 {
                let a_hat = i as f64 / 10.0;
                let cal =
                    calibrate_rewards(a_hat, ratio, 0.0, &costs, 2, &uniform(), &ranking, &mc)
                        .unwrap();
                let rep = solve_symmetric_threshold(
                    &cal.rewards(0.0),
                    &costs,
                    2,
                    &uniform(),
                    &ranking,
                    None,
                    &mc,
                )
                .unwrap();
                assert!(
                    (rep.threshold - a_hat).abs() <= 1e-6,
                    "round trip {a_hat} ratio {ratio} {ranking:?}: {}",
                    rep.threshold
                );
            }
        }
    }
    let cal = calibrate_rewards(
        0.1,
        10.0,
        0.0,
        &costs,
        2,
        &uniform(),
        &RankingModel::Perfect {},
        &mc,
    )
    .unwrap();
    assert!((cal.p_c - 1.0 / 19.0).abs() <= 1e-6, "p_C(0.1) = {}", cal.p_c);
    let cal = calibrate_rewards(
        0.5,
        10.0,
        0.0,
        &costs,
        2,
        &uniform(),
        &RankingModel::Perfect {},
        &mc,
    )
    .unwrap();
    assert!((cal.p_c - 1.0 / 55.0).abs() <= 1e-6, "p_C(0.5) = {}", cal.p_c);
    println!("ACCEPTANCE 04 PASS implementation: calibrate/solve round trip <= 1e-6, closed forms hit");
}

#[test]
fn criterion_05_threshold_dominates_mixed_strategies() {
    let n = 4;
    let dist = uniform();
    let plan = SimulationPlan::new(100_000, 0x05);
    let sampler = EvSampler::generate(n, &dist, None, &plan);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5151);
    let utilities = [
        DesignerUtility::MaxQuality,
        DesignerUtility::SumQuality,
        DesignerUtility::TopK { k: 2 },
    ];
    for trial in 0..20 {
        let cells: Vec<f64> = (0..10).map(|_| rng.gen::<f64>()).collect();
        let sigma = MixedParticipationStrategy::from_cells(cells).unwrap();
        let a_hat = dist.inverse_cdf(1.0 - sigma.lambda(&dist)).unwrap();
        for utility in &utilities {
            let (ev_mixed, se_m) = sampler.expected_utility_mixed(&sigma, utility);
            let (ev_thresh, se_t) = sampler.expected_utility(a_hat, utility);
            let pooled = (se_m * se_m + se_t * se_t).sqrt();
            assert!(
                ev_thresh >= ev_mixed - 3.0 * pooled,
                "trial {trial} {utility:?}: threshold {ev_thresh} < mixed {ev_mixed} - 3 x {pooled}"
            );
        }
    }
    println!("ACCEPTANCE 05 PASS dominance: threshold E[V] >= mixed E[V] - 3 se, 20 strategies x 3 utilities");
}

#[test]
fn criterion_06_comparative_statics_schedule() {
    let ns: Vec<usize> = (2..=10).collect();
    let rows = reward_schedule_vs_n(
        0.5,
        10.0,
        0.0,
        &worked_costs(),
        &uniform(),
        &RankingModel::Perfect {},
        &ns,
        &GapMc::default(),
    )
    .unwrap();
    for w in rows.windows(2) {
        assert!(
            w[1].p_b > w[0].p_b && w[1].p_c > w[0].p_c,
            "schedule not strictly increasing at n = {}",
            w[1].n
        );
    }
    assert!((rows[0].p_c - 0.018182).abs() <= 1e-6, "p_C(2) = {}", rows[0].p_c);
    assert!((rows[1].p_c - 0.030769).abs() <= 1e-6, "p_C(3) = {}", rows[1].p_c);
    println!("ACCEPTANCE 06 PASS comparative statics: rewards strictly increasing in n, spot values hit");
}

#[test]
fn criterion_07_cost_learning() {
    let rewards = worked_rewards();
    let mc = GapMc::default();

    // Simulated series: 9 of 10 seeds within 0.02 of the true cost.
    let mut hits = 0;
    for seed in 0..10u64 {
        let series = run_contest_series(
            &rewards,
            &CostModel::with_bound(0.1, 0.0, 0.5),
            2,
            &uniform(),
            &RankingModel::Perfect {},
            10_000,
            seed,
            &mc,
        )
        .unwrap();
        let c = estimate_contribution_cost(
            series.f_hat,
            &rewards,
            0.0,
            0.5,
            2,
            &uniform(),
            &RankingModel::Perfect {},
            &mc,
        )
        .unwrap();
        if (c - 0.1).abs() <= 0.02 {
            hits += 1;
        }
    }
    assert!(hits >= 9, "only {hits}/10 seeds recovered the cost within 0.02");

    // Noiseless inversion across the cost grid.
    for i in 0..25 {
        let c_true = 0.01 + 0.02 * i as f64;
        let a_star = solve_symmetric_threshold(
            &rewards,
            &CostModel::new(c_true, 0.0),
            2,
            &uniform(),
            &RankingModel::Perfect {},
            None,
            &mc,
        )
        .unwrap()
        .threshold;
        let f_exact = 1.0 - uniform().cdf(a_star).unwrap();
        let c_hat = estimate_contribution_cost(
            f_exact,
            &rewards,
            0.0,
            0.5,
            2,
            &uniform(),
            &RankingModel::Perfect {},
            &mc,
        )
        .unwrap();
        assert!(
            (c_hat - c_true).abs() <= 1e-6,
            "noiseless inversion missed {c_true}: {c_hat}"
        );
    }

    // Two-contest identification from the exact thresholds.
    let (c_c, c_r) = estimate_both_costs(
        CostExperiment {
            p_b: 1.0,
            observed_threshold: 5.0 / 23.0,
        },
        CostExperiment {
            p_b: 2.0,
            observed_threshold: 5.0 / 43.0,
        },
        0.2,
        2,
        &uniform(),
        &RankingModel::Perfect {},
        &mc,
    )
    .unwrap();
    assert!((c_c - 0.1).abs() <= 1e-9 && (c_r - 0.05).abs() <= 1e-9);
    println!("ACCEPTANCE 07 PASS learning: series recovery 9+/10 seeds, noiseless grid 1e-6, two-contest 1e-9");
}

#[test]
fn criterion_08_asymmetric_equilibrium() {
    let prizes = RankPrizes::new(vec![1.0, 0.0]).unwrap();
    let costs = worked_costs();
    let plan = SimulationPlan::new(100_000, 0x08);
    let profile =
        find_asymmetric_equilibrium(&prizes, 1.0, &costs, 0.05, 2, &uniform(), &plan).unwrap();
    assert!(
        (profile.shared_threshold - 0.15).abs() <= 1e-9,
        "a* = {}",
        profile.shared_threshold
    );
    let (u1_rate, _) = rating_payoffs(profile.shared_threshold, 2, &uniform(), 0.05, 0.0);
    assert!((u1_rate - 0.0425).abs() <= 1e-9);
    assert!((profile.agent1_margin - (0.05 - 0.0425)).abs() <= 1e-9);

    let scenario = rank_order_scenario(&prizes, 1.0, &costs, 0.05, 2, &uniform(), 0x08);
    let strategies = profile.to_strategy_profile(2, OffAction::Rate);
    let report = verify_equilibrium(
        &strategies,
        &scenario,
        &verification_ability_grid(profile.shared_threshold),
        &[],
        &plan,
        RegretTolerance::default(),
    )
    .unwrap();
    assert!(report.verified, "worst {:?}", report.worst());

    let err = find_asymmetric_equilibrium(&prizes, 0.0, &costs, 0.05, 2, &uniform(), &plan);
    match err {
        Err(Error::Infeasible(msg)) => assert!(msg.contains("all-contribute"), "{msg}"),
        other => panic!("beta = 0 should name the all-contribute equilibrium, got {other:?}"),
    }
    println!("ACCEPTANCE 08 PASS asymmetric: a* = 0.15, margin 0.05 vs 0.0425, verified at 3 se, beta=0 rejected");
}

#[test]
fn criterion_09_perfect_ranking_kills_effort() {
    let scenario = ScenarioConfig {
        n: 2,
        dist: uniform(),
        rewards: RewardConfig::Best {
            p_b: 1.0,
            p_c: 0.0,
            p_r: 0.0,
        },
        costs: worked_costs(),
        effort_cost: Some(EffortCostFunction::new(0.05, 0.1, 1.0).unwrap()),
        quality: QualityModel::LinearMix { gamma: 0.5 },
        ranking: RankingModel::Perfect {},
        utility: DesignerUtility::SumQuality,
        pool: None,
        seed: 0x09,
    };
    let effort = EffortScenario::new(scenario.clone()).unwrap();
    let a_hat = 0.2;
    let plan = SimulationPlan::new(60_000, 0x09);

    let deviation = perfect_ranking_undermines_effort(&effort, a_hat, &plan).unwrap();
    assert!(deviation.equilibrium_broken);
    assert!((deviation.cost_saved - 0.1).abs() < 1e-12);

    let profile = StrategyProfile::symmetric(
        StrategyEntry::threshold_only(a_hat).with_effort(EffortPolicy::constant(1.0)),
    );
    let report = verify_equilibrium(
        &profile,
        &scenario,
        &verification_ability_grid(a_hat),
        &effort_grid(&scenario.quality, 21),
        &plan,
        RegretTolerance::default(),
    )
    .unwrap();
    assert!(!report.verified, "full-effort profile must fail under perfect ranking");
    let worst = report.worst().unwrap();
    assert!(
        worst.regret >= 0.1 - 3.0 * worst.stderr,
        "regret {} below the cost saving",
        worst.regret
    );
    println!("ACCEPTANCE 09 PASS impossibility: full-effort profile fails with regret >= c(1)-c(0) - 3 se");
}

#[test]
fn criterion_10_noisy_ranking_implements_effort() {
    let base = ScenarioConfig {
        n: 2,
        dist: uniform(),
        rewards: RewardConfig::Best {
            p_b: 1.0,
            p_c: 0.1,
            p_r: 0.0,
        },
        costs: worked_costs(),
        effort_cost: Some(EffortCostFunction::new(0.05, 0.003, 1.0).unwrap()),
        quality: QualityModel::LinearMix { gamma: 0.5 },
        ranking: RankingModel::SoftmaxNoise { eta: 1.0 },
        utility: DesignerUtility::SumQuality,
        pool: None,
        seed: 0x10,
    };
    let scenario = EffortScenario::new(base.clone()).unwrap();
    let condition =
        effort_condition_holds(&scenario, 0.2, 10.0, 21, 21, PbFloor::CostAtZero).unwrap();
    assert!(condition.holds);
    assert!(
        (condition.margin - 5.39e-4).abs() <= 1e-5,
        "margin {}",
        condition.margin
    );

    let mc = GapMc {
        reps: 20_000,
        seed: 0x10,
    };
    let verify_plan = SimulationPlan::new(25_000, 0x1010);
    let out = calibrate_endogenous_rewards(0.2, 10.0, &scenario, &mc, &verify_plan).unwrap();
    assert!(out.calibration.residual <= 1e-6);
    assert!(out.verification.verified, "worst {:?}", out.verification.worst());
    assert!(out.rewards.p_b > 0.05);

    let mut stiff = base;
    stiff.effort_cost = Some(EffortCostFunction::new(0.05, 0.01, 1.0).unwrap());
    let stiff = EffortScenario::new(stiff).unwrap();
    let condition =
        effort_condition_holds(&stiff, 0.2, 10.0, 21, 21, PbFloor::CostAtZero).unwrap();
    assert!(!condition.holds, "kappa = 0.01 must fail the condition");
    println!("ACCEPTANCE 10 PASS implementability: condition margin ~5.4e-4, calibrated profile verified, kappa=0.01 fails");
}

#[test]
fn criterion_11_closed_forms_match_monte_carlo() {
    let reps = 100_000;
    let dist = uniform();
    let mc = GapMc::default();

    // Participation and perfect-ranking win probabilities on a 5x5 grid.
    for (i, a) in [0.1, 0.3, 0.5, 0.7, 0.9].into_iter().enumerate() {
        for (j, a_star) in [0.1, 0.3, 0.5, 0.7, 0.9].into_iter().enumerate() {
            let n = 3;
            let mut rng = ChaCha8Rng::seed_from_u64(0x1175 + (i * 5 + j) as u64);
            let mut any = 0u32;
            let mut wins = 0u32;
            let mut beta_wins = 0u32;
            for _ in 0..reps {
                let rivals: Vec<f64> = (0..n - 1).map(|_| rng.gen::<f64>()).collect();
                let entered: Vec<f64> =
                    rivals.iter().copied().filter(|r| *r >= a_star).collect();
                if !entered.is_empty() {
                    any += 1;
                }
                let perfect_win = entered.iter().all(|r| *r < a);
                if perfect_win {
                    wins += 1;
                }
                // beta mixture at 0.5: flip between perfect and uniform.
                let win = if rng.gen::<f64>() < 0.5 {
                    perfect_win
                } else {
                    rng.gen_range(0..entered.len() + 1) == 0
                };
                if win {
                    beta_wins += 1;
                }
            }
            let check = |freq: f64, exact: f64, label: &str| {
                let se = (exact * (1.0 - exact) / reps as f64).sqrt().max(1e-9);
                assert!(
                    (freq - exact).abs() <= 3.0 * se,
                    "{label} at (a={a}, a*={a_star}): {freq} vs {exact}"
                );
            };
            let pr_any = 1.0 - a_star.powi(n as i32 - 1);
            check(any as f64 / reps as f64, pr_any, "Pr(C>0)");
            let pr_win = win_probability(
                a,
                a_star,
                n,
                &dist,
                &RankingModel::Perfect {},
                None,
                &mc,
            );
            check(wins as f64 / reps as f64, pr_win, "Pr(W) perfect");
            let pr_beta = win_probability(
                a,
                a_star,
                n,
                &dist,
                &RankingModel::BetaMixture { beta: 0.5 },
                None,
                &mc,
            );
            check(beta_wins as f64 / reps as f64, pr_beta, "Pr(W) beta");
        }
    }

    // Softmax winner probabilities against Gumbel-race draws.
    let eta = 0.4;
    let ranking = RankingModel::SoftmaxNoise { eta };
    for (case, qualities) in [
        vec![0.9, 0.4],
        vec![0.2, 0.5, 0.8],
        vec![0.5, 0.5, 0.1, 0.9],
    ]
    .into_iter()
    .enumerate()
    {
        let exact = ranking.winner_probabilities(&qualities).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0x11_40 + case as u64);
        let mut wins = vec![0u32; qualities.len()];
        for _ in 0..reps {
            let mut best = 0;
            let mut best_score = f64::NEG_INFINITY;
            for (k, q) in qualities.iter().enumerate() {
                let u: f64 = rng.gen::<f64>();
                let score = q / eta - (-(u.ln())).ln();
                if score > best_score {
                    best_score = score;
                    best = k;
                }
            }
            wins[best] += 1;
        }
        for (k, exact_p) in exact.iter().enumerate() {
            let freq = wins[k] as f64 / reps as f64;
            let se = (exact_p * (1.0 - exact_p) / reps as f64).sqrt().max(1e-9);
            assert!(
                (freq - exact_p).abs() <= 3.0 * se,
                "softmax case {case} contestant {k}: {freq} vs {exact_p}"
            );
        }
    }
    println!("ACCEPTANCE 11 PASS oracle agreement: closed-form probabilities within 3 se of Monte Carlo");
}
