//! Command-line harness: loads a scenario JSON, dispatches to the
//! solvers and experiments, and writes CSV/JSON artifacts.
//!
//! Exit codes: 0 on success, 1 on domain outcomes (infeasible
//! calibration, failed verification) with an error JSON on stdout, 2 on
//! usage or configuration errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use contest_core::asymmetric::{find_asymmetric_equilibrium, rank_order_scenario};
use contest_core::designer::{
    calibrate_rewards, optimal_threshold, reward_schedule_vs_n, schedule_to_csv, sweep_to_csv,
    threshold_sweep,
};
use contest_core::effort::{
    calibrate_endogenous_rewards, effort_condition_holds, EffortScenario, PbFloor,
};
use contest_core::error::Error;
use contest_core::learning::{estimate_both_costs, run_contest_series, LearnSummary};
use contest_core::mc::{
    simulate_batch, verification_ability_grid, verify_equilibrium, RegretTolerance,
};
use contest_core::ranking::RankingModel;
use contest_core::scenario::{
    evaluate_designer_utility, EffortPolicy, OffAction, RankPrizes, RewardConfig, ScenarioConfig,
    StrategyEntry, StrategyProfile, Winner,
};
use contest_core::threshold::{solve_symmetric_threshold, GapMc};
use contest_core::SimulationPlan;

#[derive(Parser)]
#[command(
    name = "contest",
    version,
    about = "Solvers and simulators for best-contribution contest mechanisms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// Scenario configuration (strict-schema JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo replications (or contests for `learn`).
    #[arg(long)]
    reps: Option<usize>,
    /// Directory for output artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Format of tabular artifacts.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the symmetric threshold equilibrium.
    Solve(Common),
    /// Find the designer-optimal threshold and emit the E[V] sweep.
    Design {
        #[command(flatten)]
        common: Common,
        /// Threshold grid resolution (>= 11).
        #[arg(long, default_value_t = 101)]
        grid: usize,
    },
    /// Calibrate (p_B, p_C) at a fixed ratio to a target threshold.
    Calibrate {
        #[command(flatten)]
        common: Common,
        /// Target equilibrium threshold in [0, 1].
        #[arg(long)]
        target: f64,
        #[arg(long, default_value_t = 10.0)]
        ratio: f64,
    },
    /// Run a contest series and recover the contribution cost.
    Learn(Common),
    /// Run two series with different winner rewards and recover both costs.
    Learn2 {
        #[command(flatten)]
        common: Common,
        /// Winner reward of the second experiment.
        #[arg(long)]
        pb2: f64,
    },
    /// Construct the asymmetric equilibrium of a rank-order scenario.
    Asymmetric(Common),
    /// Check the endogenous-effort implementability condition.
    EndogenousCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        target: f64,
        #[arg(long, default_value_t = 10.0)]
        ratio: f64,
        /// Evaluate p_B at c(0) + max(p_R - c_R, 0) instead of c(0).
        #[arg(long, default_value_t = false)]
        rating_floor: bool,
    },
    /// Calibrate rewards for the full-effort profile under softmax noise.
    EndogenousCalibrate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        target: f64,
        #[arg(long, default_value_t = 10.0)]
        ratio: f64,
    },
    /// Simulate contests under the equilibrium profile.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Play this threshold instead of solving for it.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Solve and verify the equilibrium by best-response regret.
    Verify(Common),
    /// Calibrated reward schedule across contest sizes.
    Schedule {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        target: f64,
        #[arg(long, default_value_t = 10.0)]
        ratio: f64,
        #[arg(long, default_value_t = 2)]
        n_from: usize,
        #[arg(long, default_value_t = 10)]
        n_to: usize,
    },
}

/// Envelope for every JSON artifact: the resolved scenario and seed are
/// echoed so any output is reproducible on its own.
#[derive(Serialize)]
struct RunOutput<'a, T: Serialize> {
    command: &'a str,
    seed: u64,
    config: &'a ScenarioConfig,
    result: T,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let payload = json!({
                "error": {
                    "kind": err.kind(),
                    "message": err.to_string(),
                }
            });
            println!("{}", serde_json::to_string_pretty(&payload).expect("error json"));
            if err.is_usage() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

struct Context {
    config: ScenarioConfig,
    seed: u64,
    reps: usize,
    out: Option<PathBuf>,
    format: Format,
}

impl Context {
    fn load(common: &Common, default_reps: usize) -> Result<Self, Error> {
        let text = fs::read_to_string(&common.config).map_err(|e| {
            Error::InvalidConfig(format!("cannot read {}: {e}", common.config.display()))
        })?;
        let mut config = ScenarioConfig::from_json(&text)?;
        let seed = common.seed.unwrap_or(config.seed);
        config.seed = seed;
        Ok(Self {
            config,
            seed,
            reps: common.reps.unwrap_or(default_reps),
            out: common.out.clone(),
            format: common.format,
        })
    }

    fn gap_mc(&self) -> GapMc {
        GapMc {
            reps: self.reps.min(100_000).max(1),
            seed: self.seed,
        }
    }

    fn plan(&self) -> SimulationPlan {
        SimulationPlan::new(self.reps, self.seed)
    }

    fn emit<T: Serialize>(&self, command: &str, result: T) -> Result<(), Error> {
        let output = RunOutput {
            command,
            seed: self.seed,
            config: &self.config,
            result,
        };
        let text = serde_json::to_string_pretty(&output)
            .map_err(|e| Error::InvalidConfig(format!("cannot serialize output: {e}")))?;
        println!("{text}");
        if let Some(dir) = &self.out {
            write_artifact(dir, &format!("{command}.json"), &text)?;
        }
        Ok(())
    }

    fn emit_table(&self, name: &str, csv: &str, rows_json: serde_json::Value) -> Result<(), Error> {
        if let Some(dir) = &self.out {
            match self.format {
                Format::Csv => write_artifact(dir, &format!("{name}.csv"), csv)?,
                Format::Json => write_artifact(
                    dir,
                    &format!("{name}.json"),
                    &serde_json::to_string_pretty(&rows_json)
                        .map_err(|e| Error::InvalidConfig(format!("cannot serialize rows: {e}")))?,
                )?,
            }
        }
        Ok(())
    }
}

fn write_artifact(dir: &Path, name: &str, text: &str) -> Result<(), Error> {
    fs::create_dir_all(dir)
        .map_err(|e| Error::InvalidConfig(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    let mut body = text.to_string();
    if !body.ends_with('\n') {
        body.push('\n');
    }
    fs::write(&path, body)
        .map_err(|e| Error::InvalidConfig(format!("cannot write {}: {e}", path.display())))
}

fn configure_workers() {
    if let Ok(value) = std::env::var("CONTEST_WORKERS") {
        if let Ok(workers) = value.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(workers.max(1))
                .build_global();
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    configure_workers();
    match command {
        Command::Solve(common) => {
            let ctx = Context::load(&common, 20_000)?;
            let cfg = &ctx.config;
            let rewards = cfg.rewards.as_best()?;
            let report = solve_symmetric_threshold(
                &rewards,
                &cfg.costs,
                cfg.n,
                &cfg.dist,
                &cfg.ranking,
                cfg.pool.as_ref(),
                &ctx.gap_mc(),
            )?;
            ctx.emit(
                "solve",
                json!({
                    "a_star": report.threshold,
                    "corner": report.corner,
                    "regime": report.regime,
                    "residual": report.residual,
                    "knife_edge": report.knife_edge,
                }),
            )
        }
        Command::Design { common, grid } => {
            let ctx = Context::load(&common, 50_000)?;
            let cfg = &ctx.config;
            let plan = ctx.plan();
            let a_hat = optimal_threshold(
                cfg.n,
                &cfg.dist,
                &cfg.utility,
                grid,
                cfg.pool.as_ref(),
                &plan,
            )?;
            let sweep = threshold_sweep(
                cfg.n,
                &cfg.dist,
                &cfg.utility,
                grid,
                cfg.pool.as_ref(),
                &plan,
            );
            let rows: Vec<_> = sweep
                .iter()
                .map(|(a, mean, se)| json!({"a_hat": a, "ev_mean": mean, "ev_stderr": se}))
                .collect();
            ctx.emit_table("sweep", &sweep_to_csv(&sweep), json!(rows))?;
            ctx.emit("design", json!({ "a_hat": a_hat, "grid": grid }))
        }
        Command::Calibrate {
            common,
            target,
            ratio,
        } => {
            let ctx = Context::load(&common, 20_000)?;
            let cfg = &ctx.config;
            let cal = calibrate_rewards(
                target,
                ratio,
                cfg.rewards.p_r(),
                &cfg.costs,
                cfg.n,
                &cfg.dist,
                &cfg.ranking,
                &ctx.gap_mc(),
            )?;
            ctx.emit("calibrate", cal)
        }
        Command::Learn(common) => {
            let ctx = Context::load(&common, 10_000)?;
            let cfg = &ctx.config;
            let rewards = cfg.rewards.as_best()?;
            let c_bar = cfg.costs.c_bar.ok_or_else(|| {
                Error::InvalidConfig("learning needs costs.c_bar in the scenario".into())
            })?;
            let series = run_contest_series(
                &rewards,
                &cfg.costs,
                cfg.n,
                &cfg.dist,
                &cfg.ranking,
                ctx.reps,
                ctx.seed,
                &ctx.gap_mc(),
            )?;
            let c_hat = estimate_contribution_cost_cli(&ctx, &rewards, c_bar, series.f_hat)?;
            let summary = LearnSummary {
                t: series.contests(),
                f_hat: series.f_hat,
                c_c_hat: c_hat,
                stderr_proxy: (series.f_hat * (1.0 - series.f_hat)
                    / (series.contests() as f64 * cfg.n as f64))
                    .sqrt(),
            };
            ctx.emit_table(
                "counts",
                &series.counts_to_csv(),
                json!(series.counts),
            )?;
            ctx.emit("learn", summary)
        }
        Command::Learn2 { common, pb2 } => {
            let ctx = Context::load(&common, 10_000)?;
            let cfg = &ctx.config;
            let rewards1 = cfg.rewards.as_best()?;
            let mut rewards2 = rewards1;
            rewards2.p_b = pb2;
            rewards2.validate()?;
            let series1 = run_contest_series(
                &rewards1,
                &cfg.costs,
                cfg.n,
                &cfg.dist,
                &cfg.ranking,
                ctx.reps,
                ctx.seed,
                &ctx.gap_mc(),
            )?;
            let series2 = run_contest_series(
                &rewards2,
                &cfg.costs,
                cfg.n,
                &cfg.dist,
                &cfg.ranking,
                ctx.reps,
                ctx.seed.wrapping_add(1),
                &ctx.gap_mc(),
            )?;
            let threshold_of = |f_hat: f64| -> Result<f64, Error> {
                if f_hat <= 0.0 || f_hat >= 1.0 {
                    return Err(Error::Degenerate(format!(
                        "frequency {f_hat} sits at a corner; the threshold is unidentifiable"
                    )));
                }
                cfg.dist.inverse_cdf(1.0 - f_hat)
            };
            let exp1 = contest_core::learning::CostExperiment {
                p_b: rewards1.p_b,
                observed_threshold: threshold_of(series1.f_hat)?,
            };
            let exp2 = contest_core::learning::CostExperiment {
                p_b: rewards2.p_b,
                observed_threshold: threshold_of(series2.f_hat)?,
            };
            let (c_c, c_r) = estimate_both_costs(
                exp1,
                exp2,
                rewards1.p_r,
                cfg.n,
                &cfg.dist,
                &cfg.ranking,
                &ctx.gap_mc(),
            )?;
            ctx.emit(
                "learn2",
                json!({
                    "T": ctx.reps,
                    "f_hat_1": series1.f_hat,
                    "f_hat_2": series2.f_hat,
                    "threshold_1": exp1.observed_threshold,
                    "threshold_2": exp2.observed_threshold,
                    "c_C_hat": c_c,
                    "c_R_hat": c_r,
                }),
            )
        }
        Command::Asymmetric(common) => {
            let ctx = Context::load(&common, 50_000)?;
            let cfg = &ctx.config;
            let prizes = RankPrizes::new(match &cfg.rewards {
                RewardConfig::RankOrder { prizes, .. } => prizes.clone(),
                RewardConfig::Best { .. } => {
                    return Err(Error::Contract(
                        "the asymmetric construction needs rank-order prizes".into(),
                    ))
                }
            })?;
            let beta = match cfg.ranking {
                RankingModel::BetaMixture { beta } => beta,
                RankingModel::Perfect {} => 1.0,
                RankingModel::SoftmaxNoise { .. } => {
                    return Err(Error::Contract(
                        "the asymmetric construction uses beta-accurate ranking".into(),
                    ))
                }
            };
            let plan = ctx.plan();
            let profile = find_asymmetric_equilibrium(
                &prizes,
                beta,
                &cfg.costs,
                cfg.rewards.p_r(),
                cfg.n,
                &cfg.dist,
                &plan,
            )?;
            let scenario =
                rank_order_scenario(&prizes, beta, &cfg.costs, cfg.rewards.p_r(), cfg.n, &cfg.dist, ctx.seed);
            let strategies = profile
                .to_strategy_profile(cfg.n, OffAction::preferred(cfg.rewards.p_r(), cfg.costs.c_r));
            let report = verify_equilibrium(
                &strategies,
                &scenario,
                &verification_ability_grid(profile.shared_threshold),
                &[],
                &plan,
                RegretTolerance::default(),
            )?;
            if !report.verified {
                return Err(Error::VerificationFailed(format!(
                    "asymmetric profile failed regret verification: {:?}",
                    report.worst()
                )));
            }
            ctx.emit("asymmetric", profile.report(Some(report.max_regret)))
        }
        Command::EndogenousCheck {
            common,
            target,
            ratio,
            rating_floor,
        } => {
            let ctx = Context::load(&common, 20_000)?;
            let scenario = EffortScenario::new(ctx.config.clone())?;
            let floor = if rating_floor {
                PbFloor::CostPlusRatingMargin
            } else {
                PbFloor::CostAtZero
            };
            let report = effort_condition_holds(&scenario, target, ratio, 21, 21, floor)?;
            ctx.emit("endogenous-check", report)
        }
        Command::EndogenousCalibrate {
            common,
            target,
            ratio,
        } => {
            let ctx = Context::load(&common, 20_000)?;
            let scenario = EffortScenario::new(ctx.config.clone())?;
            let out = calibrate_endogenous_rewards(
                target,
                ratio,
                &scenario,
                &ctx.gap_mc(),
                &ctx.plan(),
            )?;
            ctx.emit(
                "endogenous-calibrate",
                json!({
                    "rewards": out.rewards,
                    "calibration": out.calibration,
                    "verified": out.verification.verified,
                    "max_regret": out.verification.max_regret,
                }),
            )
        }
        Command::Simulate { common, threshold } => {
            let ctx = Context::load(&common, 1_000)?;
            let cfg = &ctx.config;
            let a_star = match threshold {
                Some(t) => {
                    if !(0.0..=1.0).contains(&t) {
                        return Err(Error::Domain(format!("threshold {t} outside [0, 1]")));
                    }
                    t
                }
                None => {
                    let rewards = cfg.rewards.as_best().map_err(|_| {
                        Error::Contract(
                            "rank-order scenarios need an explicit --threshold to simulate".into(),
                        )
                    })?;
                    solve_symmetric_threshold(
                        &rewards,
                        &cfg.costs,
                        cfg.n,
                        &cfg.dist,
                        &cfg.ranking,
                        cfg.pool.as_ref(),
                        &ctx.gap_mc(),
                    )?
                    .threshold
                }
            };
            let effort = if cfg.quality.is_homogeneous() { 0.0 } else { 1.0 };
            let profile = StrategyProfile::symmetric(
                StrategyEntry::threshold_only(a_star)
                    .with_effort(EffortPolicy::constant(effort))
                    .with_off_action(OffAction::preferred(cfg.rewards.p_r(), cfg.costs.c_r)),
            );
            let outcomes = simulate_batch(&profile, cfg, &ctx.plan())?;
            let mut csv = String::from("t,m,winner,q_top,v\n");
            let mut rows = Vec::with_capacity(outcomes.len());
            let mut mean_m = 0.0;
            let mut mean_v = 0.0;
            for (t, out) in outcomes.iter().enumerate() {
                let v = evaluate_designer_utility(&cfg.utility, &out.sorted_qualities)?;
                let q_top = out.sorted_qualities.first().copied();
                let winner = match out.winner {
                    Some(Winner::Agent { slot }) => format!("agent:{slot}"),
                    Some(Winner::Pool { index }) => format!("pool:{index}"),
                    None => "none".to_string(),
                };
                use std::fmt::Write as _;
                let _ = writeln!(
                    csv,
                    "{t},{},{winner},{},{v}",
                    out.contributor_count,
                    q_top.map_or(String::new(), |q| q.to_string()),
                );
                rows.push(json!({
                    "t": t,
                    "m": out.contributor_count,
                    "winner": out.winner,
                    "q_top": q_top,
                    "v": v,
                }));
                mean_m += out.contributor_count as f64;
                mean_v += v;
            }
            let contests = outcomes.len().max(1) as f64;
            ctx.emit_table("contests", &csv, json!(rows))?;
            ctx.emit(
                "simulate",
                json!({
                    "threshold": a_star,
                    "contests": outcomes.len(),
                    "mean_contributors": mean_m / contests,
                    "mean_designer_utility": mean_v / contests,
                }),
            )
        }
        Command::Verify(common) => {
            let ctx = Context::load(&common, 40_000)?;
            let cfg = &ctx.config;
            let rewards = cfg.rewards.as_best()?;
            let solved = solve_symmetric_threshold(
                &rewards,
                &cfg.costs,
                cfg.n,
                &cfg.dist,
                &cfg.ranking,
                cfg.pool.as_ref(),
                &ctx.gap_mc(),
            )?;
            let effort = if cfg.quality.is_homogeneous() { 0.0 } else { 1.0 };
            let profile = StrategyProfile::symmetric(
                StrategyEntry::threshold_only(solved.threshold)
                    .with_effort(EffortPolicy::constant(effort))
                    .with_off_action(OffAction::preferred(rewards.p_r, cfg.costs.c_r)),
            );
            let efforts = if cfg.quality.is_homogeneous() {
                Vec::new()
            } else {
                contest_core::effort::effort_grid(&cfg.quality, 21)
            };
            let report = verify_equilibrium(
                &profile,
                cfg,
                &verification_ability_grid(solved.threshold),
                &efforts,
                &ctx.plan(),
                RegretTolerance::default(),
            )?;
            if !report.verified {
                return Err(Error::VerificationFailed(format!(
                    "solved profile failed regret verification: {:?}",
                    report.worst()
                )));
            }
            ctx.emit(
                "verify",
                json!({
                    "a_star": solved.threshold,
                    "verified": report.verified,
                    "max_regret": report.max_regret,
                    "records": report.records.len(),
                }),
            )
        }
        Command::Schedule {
            common,
            target,
            ratio,
            n_from,
            n_to,
        } => {
            let ctx = Context::load(&common, 20_000)?;
            let cfg = &ctx.config;
            if n_from < 2 || n_to < n_from {
                return Err(Error::Domain(format!(
                    "schedule needs 2 <= n_from <= n_to, got {n_from}..{n_to}"
                )));
            }
            let ns: Vec<usize> = (n_from..=n_to).collect();
            let rows = reward_schedule_vs_n(
                target,
                ratio,
                cfg.rewards.p_r(),
                &cfg.costs,
                &cfg.dist,
                &cfg.ranking,
                &ns,
                &ctx.gap_mc(),
            )?;
            let rows_json: Vec<_> = rows
                .iter()
                .map(|r| json!({"n": r.n, "p_B": r.p_b, "p_C": r.p_c, "residual": r.residual}))
                .collect();
            ctx.emit_table("schedule", &schedule_to_csv(&rows), json!(rows_json))?;
            ctx.emit("schedule", json!(rows_json))
        }
    }
}

fn estimate_contribution_cost_cli(
    ctx: &Context,
    rewards: &contest_core::scenario::RewardScheme,
    c_bar: f64,
    f_hat: f64,
) -> Result<f64, Error> {
    contest_core::learning::estimate_contribution_cost(
        f_hat,
        rewards,
        ctx.config.costs.c_r,
        c_bar,
        ctx.config.n,
        &ctx.config.dist,
        &ctx.config.ranking,
        &ctx.gap_mc(),
    )
}
