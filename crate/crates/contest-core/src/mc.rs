//! Seeded Monte Carlo engine: contest simulation, action-utility
//! estimation with common random numbers, and best-response regret
//! verification. This module is the independent oracle for every closed
//! form in the crate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranking::RankingModel;
use crate::scenario::{
    realized_payoff, Action, AgentRecord, ContestOutcome, RewardConfig, ScenarioConfig,
    StrategyProfile, Winner,
};
use crate::util::mean_stderr;

/// Replication plan with counter-based substreams: the random stream for
/// (stream id, rep id) is a pure function of `(seed, stream, rep)`, so
/// identical plans give bit-identical outputs regardless of how the reps
/// are scheduled across workers, and candidates compared under the same
/// (stream, rep) pair share their draws (common random numbers).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationPlan {
    pub reps: usize,
    pub seed: u64,
}

impl SimulationPlan {
    pub fn new(reps: usize, seed: u64) -> Self {
        Self { reps, seed }
    }

    /// Independent generator for one replication of one stream.
    pub fn rng(&self, stream: u64, rep: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(substream_key(self.seed, stream, rep))
    }
}

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn substream_key(seed: u64, stream: u64, rep: u64) -> u64 {
    let mut h = 0x243F_6A88_85A3_08D3_u64;
    for v in [seed, stream, rep] {
        h = mix64(h ^ v.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    }
    h
}

/// Stream ids, one per independent consumer of randomness.
pub(crate) mod streams {
    pub const CONTEST: u64 = 1;
    pub const FOCAL_EVAL_BASE: u64 = 0x100;
    pub const DESIGNER_EV: u64 = 2;
    pub const GAP_ESTIMATE: u64 = 3;
    pub const SERIES: u64 = 4;
}

/// Draw a full ranking (best first) of the given qualities.
///
/// Perfect sorts by quality with uniform tie-breaks; the beta mixture
/// uses the perfect order with probability beta and a uniformly random
/// permutation otherwise; softmax noise races Gumbel-perturbed scores
/// q/eta + G, whose argmax is exactly the softmax winner distribution.
pub(crate) fn draw_ranking<R: Rng + ?Sized>(
    ranking: &RankingModel,
    qualities: &[f64],
    rng: &mut R,
) -> Vec<usize> {
    let m = qualities.len();
    let mut order: Vec<usize> = (0..m).collect();
    match *ranking {
        RankingModel::Perfect {} => {
            let ubreak: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
            order.sort_by(|&i, &j| {
                qualities[j]
                    .partial_cmp(&qualities[i])
                    .unwrap()
                    .then(ubreak[j].partial_cmp(&ubreak[i]).unwrap())
            });
        }
        RankingModel::BetaMixture { beta } => {
            if rng.gen::<f64>() < beta {
                let ubreak: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
                order.sort_by(|&i, &j| {
                    qualities[j]
                        .partial_cmp(&qualities[i])
                        .unwrap()
                        .then(ubreak[j].partial_cmp(&ubreak[i]).unwrap())
                });
            } else {
                // Fisher-Yates
                for i in (1..m).rev() {
                    let j = rng.gen_range(0..=i);
                    order.swap(i, j);
                }
            }
        }
        RankingModel::SoftmaxNoise { eta } => {
            let scores: Vec<f64> = qualities
                .iter()
                .map(|q| {
                    let u: f64 = rng.gen::<f64>();
                    q / eta - (-(u.max(f64::MIN_POSITIVE)).ln()).ln()
                })
                .collect();
            order.sort_by(|&i, &j| scores[j].partial_cmp(&scores[i]).unwrap());
        }
    }
    order
}

/// Draw the winner index from the winner-probability vector using a
/// single uniform; keeps candidates coupled under common random numbers.
pub(crate) fn draw_winner<R: Rng + ?Sized>(
    ranking: &RankingModel,
    qualities: &[f64],
    rng: &mut R,
) -> usize {
    let probs = ranking
        .winner_probabilities(qualities)
        .expect("nonempty contributor list");
    let u: f64 = rng.gen::<f64>();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Simulate one contest: draw abilities, apply the profile, rank the
/// contributions, and award points. Raters earn `p_R` only when at least
/// one contribution exists.
pub fn simulate_contest<R: Rng + ?Sized>(
    profile: &StrategyProfile,
    scenario: &ScenarioConfig,
    rng: &mut R,
) -> Result<ContestOutcome> {
    if !profile.arity_matches(scenario.n) {
        return Err(Error::Contract(format!(
            "profile arity does not match n = {}",
            scenario.n
        )));
    }
    let n = scenario.n;
    let abilities: Vec<f64> = (0..n).map(|_| scenario.dist.sample_one(rng)).collect();
    let pool_qualities: Vec<f64> = match &scenario.pool {
        Some(pool) => (0..pool.count)
            .map(|_| pool.quality_dist.sample_one(rng))
            .collect(),
        None => Vec::new(),
    };

    let actions: Vec<Action> = (0..n)
        .map(|i| profile.entry(i).action_at(abilities[i]))
        .collect();

    // Contributors in deterministic order: agents by slot, then pool.
    let mut contributor_qualities: Vec<f64> = Vec::new();
    let mut contributor_ids: Vec<Winner> = Vec::new();
    let mut agent_quality: Vec<Option<f64>> = vec![None; n];
    for i in 0..n {
        if let Action::Contribute { effort } = actions[i] {
            let q = scenario.quality.quality(abilities[i], effort);
            agent_quality[i] = Some(q);
            contributor_qualities.push(q);
            contributor_ids.push(Winner::Agent { slot: i });
        }
    }
    for (k, q) in pool_qualities.iter().enumerate() {
        contributor_qualities.push(*q);
        contributor_ids.push(Winner::Pool { index: k });
    }
    let m = contributor_qualities.len();

    // Points per contributor id, winner, and rater pay.
    let mut contributor_points = vec![0.0; m];
    let mut winner = None;
    let rater_points;
    match &scenario.rewards {
        RewardConfig::Best { p_b, p_c, p_r } => {
            if m >= 1 {
                let w = draw_winner(&scenario.ranking, &contributor_qualities, rng);
                for (k, pts) in contributor_points.iter_mut().enumerate() {
                    *pts = if k == w { *p_b } else { *p_c };
                }
                winner = Some(contributor_ids[w]);
                rater_points = *p_r;
            } else {
                rater_points = 0.0;
            }
        }
        RewardConfig::RankOrder { prizes, p_r } => {
            if m >= 1 {
                let order = draw_ranking(&scenario.ranking, &contributor_qualities, rng);
                for (rank0, idx) in order.iter().enumerate() {
                    contributor_points[*idx] = prizes.get(rank0).copied().unwrap_or(0.0);
                }
                winner = Some(contributor_ids[order[0]]);
                rater_points = *p_r;
            } else {
                rater_points = 0.0;
            }
        }
    }

    let mut agent_points = vec![0.0; n];
    let mut pool_points = 0.0;
    for (k, id) in contributor_ids.iter().enumerate() {
        match id {
            Winner::Agent { slot } => agent_points[*slot] = contributor_points[k],
            Winner::Pool { .. } => pool_points += contributor_points[k],
        }
    }

    let agents: Vec<AgentRecord> = (0..n)
        .map(|i| {
            let points = match actions[i] {
                Action::Contribute { .. } => agent_points[i],
                Action::Rate {} => rater_points,
                Action::NotParticipate {} => 0.0,
            };
            AgentRecord {
                action: actions[i],
                ability: abilities[i],
                quality: agent_quality[i],
                points,
                payoff: realized_payoff(
                    &actions[i],
                    points,
                    &scenario.costs,
                    scenario.effort_cost.as_ref(),
                ),
            }
        })
        .collect();

    let mut sorted_qualities = contributor_qualities;
    sorted_qualities.sort_by(|a, b| b.partial_cmp(a).unwrap());

    Ok(ContestOutcome {
        agents,
        pool_qualities,
        pool_points,
        contributor_count: m,
        sorted_qualities,
        winner,
    })
}

/// Simulate `plan.reps` independent contests on the CONTEST stream.
pub fn simulate_batch(
    profile: &StrategyProfile,
    scenario: &ScenarioConfig,
    plan: &SimulationPlan,
) -> Result<Vec<ContestOutcome>> {
    if !profile.arity_matches(scenario.n) {
        return Err(Error::Contract(format!(
            "profile arity does not match n = {}",
            scenario.n
        )));
    }
    (0..plan.reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = plan.rng(streams::CONTEST, rep as u64);
            simulate_contest(profile, scenario, &mut rng)
        })
        .collect()
}

/// Realized payoff of a focal agent holding everyone else to the profile.
///
/// Replication `rep` draws the same opponent abilities, pool qualities,
/// and ranking noise for every candidate action evaluated under the same
/// plan and focal slot, which is what makes paired comparisons tight.
fn focal_payoff<R: Rng + ?Sized>(
    focal_slot: usize,
    ability: f64,
    candidate: &Action,
    profile: &StrategyProfile,
    scenario: &ScenarioConfig,
    rng: &mut R,
) -> f64 {
    let n = scenario.n;
    // Opponent abilities in slot order, then pool qualities.
    let mut contributor_qualities: Vec<f64> = Vec::new();
    let mut focal_index = None;
    for slot in 0..n {
        if slot == focal_slot {
            if let Action::Contribute { effort } = candidate {
                focal_index = Some(contributor_qualities.len());
                contributor_qualities.push(scenario.quality.quality(ability, *effort));
            }
            continue;
        }
        let a = scenario.dist.sample_one(rng);
        if let Action::Contribute { effort } = profile.entry(slot).action_at(a) {
            contributor_qualities.push(scenario.quality.quality(a, effort));
        }
    }
    if let Some(pool) = &scenario.pool {
        for _ in 0..pool.count {
            contributor_qualities.push(pool.quality_dist.sample_one(rng));
        }
    }
    let m = contributor_qualities.len();

    let points = match (&scenario.rewards, candidate) {
        (_, Action::NotParticipate {}) => 0.0,
        (RewardConfig::Best { p_r, .. }, Action::Rate {})
        | (RewardConfig::RankOrder { p_r, .. }, Action::Rate {}) => {
            if m >= 1 {
                *p_r
            } else {
                0.0
            }
        }
        (RewardConfig::Best { p_b, p_c, .. }, Action::Contribute { .. }) => {
            let w = draw_winner(&scenario.ranking, &contributor_qualities, rng);
            if Some(w) == focal_index {
                *p_b
            } else {
                *p_c
            }
        }
        (RewardConfig::RankOrder { prizes, .. }, Action::Contribute { .. }) => {
            let order = draw_ranking(&scenario.ranking, &contributor_qualities, rng);
            let rank0 = order
                .iter()
                .position(|i| Some(*i) == focal_index)
                .expect("focal contributes");
            prizes.get(rank0).copied().unwrap_or(0.0)
        }
    };
    realized_payoff(candidate, points, &scenario.costs, scenario.effort_cost.as_ref())
}

/// Per-replication payoffs of a candidate action for a focal agent.
pub fn action_payoff_samples(
    focal_slot: usize,
    ability: f64,
    candidate: &Action,
    profile: &StrategyProfile,
    scenario: &ScenarioConfig,
    plan: &SimulationPlan,
) -> Result<Vec<f64>> {
    if !profile.arity_matches(scenario.n) {
        return Err(Error::Contract(format!(
            "profile arity does not match n = {}",
            scenario.n
        )));
    }
    if !(0.0..=1.0).contains(&ability) {
        return Err(Error::Domain(format!("ability {ability} outside [0, 1]")));
    }
    if matches!(candidate, Action::NotParticipate {}) {
        return Ok(vec![0.0; plan.reps]);
    }
    let stream = streams::FOCAL_EVAL_BASE + focal_slot as u64;
    Ok((0..plan.reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = plan.rng(stream, rep as u64);
            focal_payoff(focal_slot, ability, candidate, profile, scenario, &mut rng)
        })
        .collect())
}

/// Mean and standard error of a candidate action's payoff for a focal
/// agent, with common random numbers across candidates.
pub fn estimate_action_utility(
    focal_slot: usize,
    ability: f64,
    candidate: &Action,
    profile: &StrategyProfile,
    scenario: &ScenarioConfig,
    plan: &SimulationPlan,
) -> Result<(f64, f64)> {
    let samples = action_payoff_samples(focal_slot, ability, candidate, profile, scenario, plan)?;
    Ok(mean_stderr(&samples))
}

/// Acceptance tolerance for regret verification.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegretTolerance {
    /// Pass when every regret estimate is below `sigma` standard errors
    /// of its paired comparison (the default, with sigma = 3).
    StatSigma { sigma: f64 },
    Absolute { bound: f64 },
}

impl Default for RegretTolerance {
    fn default() -> Self {
        RegretTolerance::StatSigma { sigma: 3.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretRecord {
    pub role_slot: usize,
    pub ability: f64,
    pub prescribed: Action,
    pub best_alternative: Action,
    /// Best alternative minus prescribed (positive means a profitable
    /// deviation).
    pub regret: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub records: Vec<RegretRecord>,
    pub max_regret: f64,
    pub verified: bool,
    pub tolerance: RegretTolerance,
}

impl RegretReport {
    /// Record with the largest regret, if any records exist.
    pub fn worst(&self) -> Option<&RegretRecord> {
        self.records
            .iter()
            .max_by(|a, b| a.regret.partial_cmp(&b.regret).unwrap())
    }
}

/// Best-response regret check of a strategy profile.
///
/// For every strategic role and grid ability, compares the prescribed
/// action against rating, staying out, and contributing at each grid
/// effort, using paired common-random-number samples. The profile is
/// verified when no alternative beats the prescription by more than the
/// tolerance.
pub fn verify_equilibrium(
    profile: &StrategyProfile,
    scenario: &ScenarioConfig,
    ability_grid: &[f64],
    effort_grid: &[f64],
    plan: &SimulationPlan,
    tolerance: RegretTolerance,
) -> Result<RegretReport> {
    if ability_grid.is_empty() {
        return Err(Error::Contract("ability grid is empty".into()));
    }
    profile.validate(scenario.n)?;
    let mut records = Vec::new();
    for (slot, entry) in profile.roles(scenario.n) {
        for &a in ability_grid {
            let prescribed = entry.action_at(a);
            let mut candidates: Vec<Action> = vec![Action::rate(), Action::not_participate()];
            if effort_grid.is_empty() {
                candidates.push(Action::contribute(entry.effort.at(a)));
            } else {
                candidates.extend(effort_grid.iter().map(|e| Action::contribute(*e)));
            }
            let base = action_payoff_samples(slot, a, &prescribed, profile, scenario, plan)?;
            let mut best: Option<(Action, f64, f64)> = None;
            for alt in candidates {
                if alt == prescribed {
                    continue;
                }
                let alt_samples = action_payoff_samples(slot, a, &alt, profile, scenario, plan)?;
                let diffs: Vec<f64> = alt_samples
                    .iter()
                    .zip(&base)
                    .map(|(x, y)| x - y)
                    .collect();
                let (mean, se) = mean_stderr(&diffs);
                if best.as_ref().map_or(true, |(_, m, _)| mean > *m) {
                    best = Some((alt, mean, se));
                }
            }
            let (best_alternative, regret, stderr) =
                best.expect("at least one alternative action");
            records.push(RegretRecord {
                role_slot: slot,
                ability: a,
                prescribed,
                best_alternative,
                regret,
                stderr,
            });
        }
    }
    let max_regret = records
        .iter()
        .map(|r| r.regret)
        .fold(f64::NEG_INFINITY, f64::max);
    let verified = records.iter().all(|r| match tolerance {
        RegretTolerance::StatSigma { sigma } => r.regret <= sigma * r.stderr,
        RegretTolerance::Absolute { bound } => r.regret <= bound,
    });
    Ok(RegretReport {
        records,
        max_regret,
        verified,
        tolerance,
    })
}

/// Ability grid for verification: a handful of points below the
/// threshold, the threshold itself, and a denser sweep above it.
pub fn verification_ability_grid(a_star: f64) -> Vec<f64> {
    let mut grid = Vec::new();
    if a_star > 0.0 {
        for i in 1..=5 {
            grid.push(a_star * i as f64 / 6.0);
        }
    }
    let above = crate::util::linspace(a_star, 1.0, 21);
    grid.extend(above);
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    grid
}
