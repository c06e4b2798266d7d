//! Shared contest vocabulary: rewards, costs, actions, quality and effort
//! models, designer utilities, strategies, outcomes, and the top-level
//! scenario configuration.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dist::AbilityDistribution;
use crate::error::{Error, Result};
use crate::ranking::RankingModel;

/// Rewards of the best-contribution mechanism: `p_B` for the winner,
/// `p_C` for every other contributor, `p_R` for raters. Requires
/// `p_B > p_C >= 0` (the mechanism needs a strict gap) and `p_B > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardScheme {
    pub p_b: f64,
    pub p_c: f64,
    pub p_r: f64,
}

impl RewardScheme {
    pub fn new(p_b: f64, p_c: f64, p_r: f64) -> Result<Self> {
        let s = Self { p_b, p_c, p_r };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_b > 0.0 && self.p_b.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "winner reward p_B must be positive, got {}",
                self.p_b
            )));
        }
        if !(self.p_c >= 0.0 && self.p_c < self.p_b) {
            return Err(Error::InvalidConfig(format!(
                "rewards need p_B > p_C >= 0, got p_B={}, p_C={}",
                self.p_b, self.p_c
            )));
        }
        if !(self.p_r >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "rater reward p_R must be nonnegative, got {}",
                self.p_r
            )));
        }
        Ok(())
    }
}

/// Prize ladder of a rank-order mechanism: `p_1 >= p_2 >= ... >= p_n >= 0`
/// with at least one strict drop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RankPrizes {
    prizes: Vec<f64>,
}

impl RankPrizes {
    pub fn new(prizes: Vec<f64>) -> Result<Self> {
        let s = Self { prizes };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.prizes.is_empty() {
            return Err(Error::InvalidConfig("prize list is empty".into()));
        }
        if self.prizes.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::InvalidConfig("prizes must be nonnegative".into()));
        }
        let mut any_strict = false;
        for w in self.prizes.windows(2) {
            if w[1] > w[0] {
                return Err(Error::InvalidConfig(format!(
                    "prizes must be nonincreasing, got {} then {}",
                    w[0], w[1]
                )));
            }
            if w[1] < w[0] {
                any_strict = true;
            }
        }
        if !any_strict {
            return Err(Error::InvalidConfig(
                "prize list needs at least one strict drop between consecutive ranks".into(),
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.prizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prizes.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.prizes
    }

    /// Prize for a 1-based rank; ranks beyond the list pay nothing.
    pub fn for_rank(&self, rank: usize) -> f64 {
        self.prizes.get(rank - 1).copied().unwrap_or(0.0)
    }

    /// Mean prize over ranks 1..=m, the expected prize under a uniformly
    /// random ordering of m contributors.
    pub fn mean_over_ranks(&self, m: usize) -> f64 {
        if m == 0 {
            return 0.0;
        }
        (1..=m).map(|r| self.for_rank(r)).sum::<f64>() / m as f64
    }
}

/// Action costs: `c_C` to contribute (homogeneous model), `c_R` to rate,
/// and an optional upper bound `c_bar` used by the cost-learning protocol.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostModel {
    pub c_c: f64,
    pub c_r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_bar: Option<f64>,
}

impl CostModel {
    pub fn new(c_c: f64, c_r: f64) -> Self {
        Self {
            c_c,
            c_r,
            c_bar: None,
        }
    }

    pub fn with_bound(c_c: f64, c_r: f64, c_bar: f64) -> Self {
        Self {
            c_c,
            c_r,
            c_bar: Some(c_bar),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_c >= 0.0) || !(self.c_r >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "costs must be nonnegative, got c_C={}, c_R={}",
                self.c_c, self.c_r
            )));
        }
        if let Some(bar) = self.c_bar {
            if !(self.c_c > 0.0 && self.c_c < bar) {
                return Err(Error::InvalidConfig(format!(
                    "learning requires 0 < c_C < c_bar, got c_C={}, c_bar={bar}",
                    self.c_c
                )));
            }
        }
        Ok(())
    }
}

/// Effort cost `c(e) = c0 + kappa * e^p` on [0, 1]; continuously
/// differentiable and nondecreasing, with closed-form marginal cost.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffortCostFunction {
    pub c0: f64,
    pub kappa: f64,
    #[serde(default = "default_p_exp")]
    pub p_exp: f64,
}

fn default_p_exp() -> f64 {
    1.0
}

impl EffortCostFunction {
    pub fn new(c0: f64, kappa: f64, p_exp: f64) -> Result<Self> {
        let s = Self { c0, kappa, p_exp };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c0 >= 0.0) || !(self.kappa >= 0.0) || !(self.p_exp >= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "effort cost needs c0 >= 0, kappa >= 0, p >= 1, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn cost(&self, e: f64) -> f64 {
        self.c0 + self.kappa * e.powf(self.p_exp)
    }

    /// c'(e) = kappa * p * e^(p-1).
    pub fn marginal(&self, e: f64) -> f64 {
        if self.p_exp == 1.0 {
            self.kappa
        } else {
            self.kappa * self.p_exp * e.powf(self.p_exp - 1.0)
        }
    }
}

/// How ability and effort combine into contribution quality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum QualityModel {
    /// q(a, e) = a: quality is expertise alone.
    Homogeneous {},
    /// q(a, e) = gamma * a + (1 - gamma) * e with gamma in (0, 1].
    LinearMix { gamma: f64 },
    /// q(a, e) = a^theta * e^(1-theta) with effort clamped to [e_min, 1];
    /// the clamp keeps the marginal product of effort finite.
    CobbDouglas {
        theta: f64,
        #[serde(default = "default_e_min")]
        e_min: f64,
    },
}

fn default_e_min() -> f64 {
    0.05
}

impl QualityModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            QualityModel::Homogeneous {} => Ok(()),
            QualityModel::LinearMix { gamma } => {
                if gamma > 0.0 && gamma <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig(format!(
                        "linear_mix gamma must lie in (0, 1], got {gamma}"
                    )))
                }
            }
            QualityModel::CobbDouglas { theta, e_min } => {
                if !(theta > 0.0 && theta < 1.0) {
                    return Err(Error::InvalidConfig(format!(
                        "cobb_douglas theta must lie in (0, 1), got {theta}"
                    )));
                }
                if !(e_min > 0.0 && e_min <= 1.0) {
                    return Err(Error::InvalidConfig(format!(
                        "cobb_douglas e_min must lie in (0, 1], got {e_min}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        matches!(self, QualityModel::Homogeneous {})
    }

    pub fn quality(&self, a: f64, e: f64) -> f64 {
        match *self {
            QualityModel::Homogeneous {} => a,
            QualityModel::LinearMix { gamma } => gamma * a + (1.0 - gamma) * e,
            QualityModel::CobbDouglas { theta, e_min } => {
                a.powf(theta) * e.clamp(e_min, 1.0).powf(1.0 - theta)
            }
        }
    }

    /// Closed-form partial derivative of quality in effort (zero inside the
    /// Cobb-Douglas clamp region).
    pub fn dq_de(&self, a: f64, e: f64) -> f64 {
        match *self {
            QualityModel::Homogeneous {} => 0.0,
            QualityModel::LinearMix { gamma } => 1.0 - gamma,
            QualityModel::CobbDouglas { theta, e_min } => {
                if e < e_min {
                    0.0
                } else {
                    (1.0 - theta) * a.powf(theta) * e.clamp(e_min, 1.0).powf(-theta)
                }
            }
        }
    }

    /// Effort range over which marginal-effort comparisons are meaningful.
    pub fn effort_domain(&self) -> (f64, f64) {
        match *self {
            QualityModel::Homogeneous {} => (0.0, 0.0),
            QualityModel::LinearMix { .. } => (0.0, 1.0),
            QualityModel::CobbDouglas { e_min, .. } => (e_min, 1.0),
        }
    }
}

/// Designer utility V(m, q^1, ..., q^m) over the sorted qualities of an
/// outcome. Built-ins are nondecreasing in each quality at fixed m and
/// satisfy V(0) = 0; `Tabulated` injects an arbitrary evaluation contract
/// (API-only, not serializable).
#[derive(Clone)]
pub enum DesignerUtility {
    MaxQuality,
    SumQuality,
    TopK { k: usize },
    /// V = sum of qualities - gamma * m, the search-cost objective that is
    /// deliberately non-monotone in the number of contributions.
    SumMinusSearchCost { gamma: f64 },
    Tabulated(Arc<dyn Fn(usize, &[f64]) -> f64 + Send + Sync>),
}

impl fmt::Debug for DesignerUtility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DesignerUtility::MaxQuality => f.write_str("MaxQuality"),
            DesignerUtility::SumQuality => f.write_str("SumQuality"),
            DesignerUtility::TopK { k } => write!(f, "TopK {{ k: {k} }}"),
            DesignerUtility::SumMinusSearchCost { gamma } => {
                write!(f, "SumMinusSearchCost {{ gamma: {gamma} }}")
            }
            DesignerUtility::Tabulated(_) => f.write_str("Tabulated(..)"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum UtilitySpec {
    MaxQuality {},
    SumQuality {},
    TopK { k: usize },
    SumMinusSearchCost { gamma: f64 },
}

impl Serialize for DesignerUtility {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let spec = match self {
            DesignerUtility::MaxQuality => UtilitySpec::MaxQuality {},
            DesignerUtility::SumQuality => UtilitySpec::SumQuality {},
            DesignerUtility::TopK { k } => UtilitySpec::TopK { k: *k },
            DesignerUtility::SumMinusSearchCost { gamma } => {
                UtilitySpec::SumMinusSearchCost { gamma: *gamma }
            }
            DesignerUtility::Tabulated(_) => {
                return Err(serde::ser::Error::custom(
                    "tabulated designer utilities are API-only and cannot be serialized",
                ))
            }
        };
        spec.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for DesignerUtility {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        Ok(match UtilitySpec::deserialize(de)? {
            UtilitySpec::MaxQuality {} => DesignerUtility::MaxQuality,
            UtilitySpec::SumQuality {} => DesignerUtility::SumQuality,
            UtilitySpec::TopK { k } => DesignerUtility::TopK { k },
            UtilitySpec::SumMinusSearchCost { gamma } => {
                DesignerUtility::SumMinusSearchCost { gamma }
            }
        })
    }
}

impl DesignerUtility {
    pub fn validate(&self) -> Result<()> {
        match self {
            DesignerUtility::TopK { k } if *k == 0 => Err(Error::InvalidConfig(
                "top_k utility needs k >= 1".into(),
            )),
            DesignerUtility::SumMinusSearchCost { gamma } if !(*gamma >= 0.0) => Err(
                Error::InvalidConfig(format!("search cost gamma must be nonnegative, got {gamma}")),
            ),
            _ => Ok(()),
        }
    }
}

/// V(m, q^1, ..., q^m) with m = qualities.len(); the slice must be sorted
/// nonincreasing. Built-ins return exactly 0 on the empty outcome.
pub fn evaluate_designer_utility(utility: &DesignerUtility, qualities: &[f64]) -> Result<f64> {
    if qualities.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::Contract(
            "designer utility expects qualities sorted in nonincreasing order".into(),
        ));
    }
    let m = qualities.len();
    Ok(match utility {
        DesignerUtility::MaxQuality => qualities.first().copied().unwrap_or(0.0),
        DesignerUtility::SumQuality => qualities.iter().sum(),
        DesignerUtility::TopK { k } => qualities.iter().take(*k).sum(),
        DesignerUtility::SumMinusSearchCost { gamma } => {
            qualities.iter().sum::<f64>() - gamma * m as f64
        }
        DesignerUtility::Tabulated(f) => f(m, qualities),
    })
}

/// What an agent does in a contest.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    Contribute { effort: f64 },
    Rate {},
    NotParticipate {},
}

impl Action {
    pub fn rate() -> Self {
        Action::Rate {}
    }

    pub fn not_participate() -> Self {
        Action::NotParticipate {}
    }

    pub fn contribute(effort: f64) -> Self {
        Action::Contribute { effort }
    }

    pub fn is_contribute(&self) -> bool {
        matches!(self, Action::Contribute { .. })
    }
}

/// Realized payoff u = points - cost(action). Not participating pays and
/// costs nothing; contributing costs `c_C` in the homogeneous model and
/// `c(e)` when an effort cost function is supplied.
pub fn realized_payoff(
    action: &Action,
    points: f64,
    costs: &CostModel,
    effort_cost: Option<&EffortCostFunction>,
) -> f64 {
    match action {
        Action::Contribute { effort } => match effort_cost {
            Some(c) => points - c.cost(*effort),
            None => points - costs.c_c,
        },
        Action::Rate {} => points - costs.c_r,
        Action::NotParticipate {} => 0.0,
    }
}

/// What a non-contributing agent does instead.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OffAction {
    Rate,
    NotParticipate,
}

impl OffAction {
    pub fn to_action(self) -> Action {
        match self {
            OffAction::Rate => Action::Rate {},
            OffAction::NotParticipate => Action::NotParticipate {},
        }
    }

    /// Rating weakly beats staying out exactly when p_R >= c_R.
    pub fn preferred(p_r: f64, c_r: f64) -> Self {
        if p_r >= c_r {
            OffAction::Rate
        } else {
            OffAction::NotParticipate
        }
    }
}

/// Effort as a piecewise-constant function of ability over equal cells
/// of [0, 1].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EffortPolicy {
    values: Vec<f64>,
}

impl EffortPolicy {
    /// Default grid resolution for ability-dependent policies.
    pub const DEFAULT_CELLS: usize = 101;

    pub fn constant(effort: f64) -> Self {
        Self {
            values: vec![effort],
        }
    }

    /// Tabulate an effort function on the default ability grid.
    pub fn from_fn(f: impl Fn(f64) -> f64) -> Result<Self> {
        let cells = (0..Self::DEFAULT_CELLS)
            .map(|i| f((i as f64 + 0.5) / Self::DEFAULT_CELLS as f64))
            .collect();
        Self::from_cells(cells)
    }

    pub fn from_cells(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidConfig("effort policy needs at least one cell".into()));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidConfig("effort values must lie in [0, 1]".into()));
        }
        Ok(Self { values })
    }

    pub fn at(&self, a: f64) -> f64 {
        let idx = ((a * self.values.len() as f64) as usize).min(self.values.len() - 1);
        self.values[idx]
    }
}

/// One agent's strategy: a participation threshold, an effort policy for
/// abilities above it, and the action taken below it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyEntry {
    pub threshold: f64,
    pub effort: EffortPolicy,
    pub off_action: OffAction,
}

impl StrategyEntry {
    /// Homogeneous-model strategy: contribute above the threshold with the
    /// constant zero effort slot, rate below it.
    pub fn threshold_only(threshold: f64) -> Self {
        Self {
            threshold,
            effort: EffortPolicy::constant(0.0),
            off_action: OffAction::Rate,
        }
    }

    pub fn with_effort(mut self, effort: EffortPolicy) -> Self {
        self.effort = effort;
        self
    }

    pub fn with_off_action(mut self, off: OffAction) -> Self {
        self.off_action = off;
        self
    }

    pub fn action_at(&self, ability: f64) -> Action {
        if ability >= self.threshold {
            Action::Contribute {
                effort: self.effort.at(ability),
            }
        } else {
            self.off_action.to_action()
        }
    }
}

/// Per-agent threshold strategies; the symmetric case stores one shared
/// entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum StrategyProfile {
    Symmetric(StrategyEntry),
    PerAgent(Vec<StrategyEntry>),
}

impl StrategyProfile {
    pub fn symmetric(entry: StrategyEntry) -> Self {
        StrategyProfile::Symmetric(entry)
    }

    pub fn per_agent(entries: Vec<StrategyEntry>) -> Self {
        StrategyProfile::PerAgent(entries)
    }

    pub fn entry(&self, agent: usize) -> &StrategyEntry {
        match self {
            StrategyProfile::Symmetric(e) => e,
            StrategyProfile::PerAgent(v) => &v[agent],
        }
    }

    pub fn arity_matches(&self, n: usize) -> bool {
        match self {
            StrategyProfile::Symmetric(_) => true,
            StrategyProfile::PerAgent(v) => v.len() == n,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !self.arity_matches(n) {
            return Err(Error::Contract(format!(
                "profile arity does not match n = {n}"
            )));
        }
        let check = |e: &StrategyEntry| -> Result<()> {
            if !(0.0..=1.0).contains(&e.threshold) {
                return Err(Error::InvalidConfig(format!(
                    "threshold {} outside [0, 1]",
                    e.threshold
                )));
            }
            Ok(())
        };
        match self {
            StrategyProfile::Symmetric(e) => check(e),
            StrategyProfile::PerAgent(v) => v.iter().try_for_each(check),
        }
    }

    /// Distinct strategic roles as (representative agent slot, entry);
    /// used by regret verification so symmetric blocks are checked once.
    pub fn roles(&self, n: usize) -> Vec<(usize, &StrategyEntry)> {
        match self {
            StrategyProfile::Symmetric(e) => vec![(0, e)],
            StrategyProfile::PerAgent(v) => {
                let mut out: Vec<(usize, &StrategyEntry)> = Vec::new();
                for (i, e) in v.iter().enumerate().take(n) {
                    if !out.iter().any(|(_, seen)| *seen == e) {
                        out.push((i, e));
                    }
                }
                out
            }
        }
    }
}

/// A randomized participation strategy sigma(a): the probability of
/// contributing at ability a, piecewise-constant over equal cells of
/// [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct MixedParticipationStrategy {
    values: Vec<f64>,
}

impl MixedParticipationStrategy {
    pub fn from_cells(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidConfig(
                "participation strategy needs at least one cell".into(),
            ));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidConfig(
                "participation probabilities must lie in [0, 1]".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn probability_at(&self, a: f64) -> f64 {
        let idx = ((a * self.values.len() as f64) as usize).min(self.values.len() - 1);
        self.values[idx]
    }

    /// lambda(sigma): the unconditional contribution probability
    /// integral of sigma(a) dF(a), exact for the piecewise-constant cells.
    pub fn lambda(&self, dist: &AbilityDistribution) -> f64 {
        let k = self.values.len();
        let mut total = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let lo = i as f64 / k as f64;
            let hi = (i + 1) as f64 / k as f64;
            total += v * (dist.cdf_raw(hi) - dist.cdf_raw(lo));
        }
        total
    }
}

/// Exogenous contributors: a fixed count whose qualities are drawn from
/// the given distribution every contest, regardless of incentives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonstrategicPool {
    pub count: usize,
    pub quality_dist: AbilityDistribution,
}

/// Who won a contest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "who", rename_all = "snake_case")]
pub enum Winner {
    Agent { slot: usize },
    Pool { index: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentRecord {
    pub action: Action,
    pub ability: f64,
    pub quality: Option<f64>,
    pub points: f64,
    pub payoff: f64,
}

/// Everything realized in one simulated contest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContestOutcome {
    pub agents: Vec<AgentRecord>,
    pub pool_qualities: Vec<f64>,
    pub pool_points: f64,
    /// Contributor count m, nonstrategic pool included.
    pub contributor_count: usize,
    /// Qualities q^1 >= ... >= q^m.
    pub sorted_qualities: Vec<f64>,
    pub winner: Option<Winner>,
}

impl ContestOutcome {
    pub fn rater_count(&self) -> usize {
        self.agents
            .iter()
            .filter(|r| matches!(r.action, Action::Rate {}))
            .count()
    }

    pub fn total_points(&self) -> f64 {
        self.agents.iter().map(|r| r.points).sum::<f64>() + self.pool_points
    }
}

/// Reward side of a scenario: a best-contribution scheme or a rank-order
/// prize ladder (with the rating reward alongside).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RewardConfig {
    Best { p_b: f64, p_c: f64, p_r: f64 },
    RankOrder { prizes: Vec<f64>, p_r: f64 },
}

impl RewardConfig {
    pub fn p_r(&self) -> f64 {
        match self {
            RewardConfig::Best { p_r, .. } => *p_r,
            RewardConfig::RankOrder { p_r, .. } => *p_r,
        }
    }

    pub fn as_best(&self) -> Result<RewardScheme> {
        match self {
            RewardConfig::Best { p_b, p_c, p_r } => RewardScheme::new(*p_b, *p_c, *p_r),
            RewardConfig::RankOrder { .. } => Err(Error::Contract(
                "operation needs a best-contribution reward scheme, scenario uses rank-order prizes"
                    .into(),
            )),
        }
    }

    pub fn as_rank_prizes(&self) -> Result<RankPrizes> {
        match self {
            RewardConfig::RankOrder { prizes, .. } => RankPrizes::new(prizes.clone()),
            RewardConfig::Best { .. } => Err(Error::Contract(
                "operation needs rank-order prizes, scenario uses a best-contribution scheme"
                    .into(),
            )),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            RewardConfig::Best { .. } => self.as_best().map(|_| ()),
            RewardConfig::RankOrder { prizes, p_r } => {
                let pr = RankPrizes::new(prizes.clone())?;
                if pr.len() != n {
                    return Err(Error::InvalidConfig(format!(
                        "prize list length {} must equal n = {n}",
                        pr.len()
                    )));
                }
                if !(*p_r >= 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "rater reward p_R must be nonnegative, got {p_r}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Full contest specification: agents, ability distribution, rewards,
/// costs, quality and ranking models, designer objective, optional
/// nonstrategic pool, and the base seed.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n: usize,
    pub dist: AbilityDistribution,
    pub rewards: RewardConfig,
    pub costs: CostModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effort_cost: Option<EffortCostFunction>,
    pub quality: QualityModel,
    pub ranking: RankingModel,
    pub utility: DesignerUtility,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool: Option<NonstrategicPool>,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!(
                "scenario needs n >= 2 agents, got {}",
                self.n
            )));
        }
        self.rewards.validate(self.n)?;
        self.costs.validate()?;
        self.quality.validate()?;
        self.ranking.validate()?;
        self.utility.validate()?;
        match (&self.effort_cost, self.quality.is_homogeneous()) {
            (Some(_), true) => {
                return Err(Error::InvalidConfig(
                    "effort_cost is only meaningful with a non-homogeneous quality model".into(),
                ))
            }
            (None, false) => {
                return Err(Error::InvalidConfig(
                    "non-homogeneous quality models require an effort_cost".into(),
                ))
            }
            (Some(c), false) => c.validate()?,
            (None, true) => {}
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text)
            .map_err(|e| Error::InvalidConfig(format!("scenario JSON: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn pool_count(&self) -> usize {
        self.pool.as_ref().map_or(0, |p| p.count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranking::RankingModel;

    fn worked_scenario() -> ScenarioConfig {
        ScenarioConfig {
            n: 2,
            dist: AbilityDistribution::uniform(),
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
            seed: 7,
        }
    }

    #[test]
    fn designer_utility_worked_values() {
        assert_eq!(
            evaluate_designer_utility(&DesignerUtility::MaxQuality, &[]).unwrap(),
            0.0
        );
        let v = evaluate_designer_utility(
            &DesignerUtility::SumMinusSearchCost { gamma: 0.5 },
            &[0.9, 0.6],
        )
        .unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        let t = evaluate_designer_utility(&DesignerUtility::TopK { k: 1 }, &[0.8, 0.7, 0.2]).unwrap();
        assert!((t - 0.8).abs() < 1e-12);
    }

    #[test]
    fn designer_utility_rejects_unsorted() {
        let err = evaluate_designer_utility(&DesignerUtility::SumQuality, &[0.2, 0.8]);
        assert!(matches!(err, Err(Error::Contract(_))));
    }

    #[test]
    fn builtin_utilities_are_monotone_in_quality() {
        let builtins = [
            DesignerUtility::MaxQuality,
            DesignerUtility::SumQuality,
            DesignerUtility::TopK { k: 2 },
            DesignerUtility::SumMinusSearchCost { gamma: 0.4 },
        ];
        let base = [0.8, 0.5, 0.3];
        for u in &builtins {
            let v0 = evaluate_designer_utility(u, &base).unwrap();
            for i in 0..base.len() {
                let mut raised = base;
                raised[i] = (raised[i] + 0.1).min(raised.get(i.wrapping_sub(1)).copied().unwrap_or(1.0));
                let v1 = evaluate_designer_utility(u, &raised).unwrap();
                assert!(v1 >= v0 - 1e-12, "{u:?} decreased when raising q^{i}");
            }
        }
    }

    #[test]
    fn search_cost_utility_penalizes_low_marginal_quality() {
        let u = DesignerUtility::SumMinusSearchCost { gamma: 0.5 };
        let one = evaluate_designer_utility(&u, &[0.9]).unwrap();
        let two = evaluate_designer_utility(&u, &[0.9, 0.2]).unwrap();
        assert!((two - one) - (0.2 - 0.5) < 1e-12);
        assert!(two < one);
    }

    #[test]
    fn tabulated_utility_is_callable_but_not_serializable() {
        let u = DesignerUtility::Tabulated(Arc::new(|m, q: &[f64]| {
            if m >= 2 {
                q[0] * q[1] * 4.0
            } else {
                q.first().copied().unwrap_or(0.0)
            }
        }));
        let v = evaluate_designer_utility(&u, &[0.5, 0.5]).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert!(serde_json::to_string(&u).is_err());
    }

    #[test]
    fn realized_payoff_worked_values() {
        let costs = CostModel::new(0.1, 0.0);
        assert_eq!(
            realized_payoff(&Action::not_participate(), 0.0, &costs, None),
            0.0
        );
        let p = realized_payoff(&Action::contribute(0.0), 1.0, &costs, None);
        assert!((p - 0.9).abs() < 1e-12);
        let ec = EffortCostFunction::new(0.05, 0.01, 1.0).unwrap();
        let p = realized_payoff(&Action::contribute(1.0), 0.5, &costs, Some(&ec));
        assert!((p - 0.44).abs() < 1e-12);
    }

    #[test]
    fn reward_and_prize_validation() {
        assert!(RewardScheme::new(1.0, 0.0, 0.0).is_ok());
        assert!(RewardScheme::new(0.5, 0.5, 0.0).is_err());
        assert!(RewardScheme::new(0.0, 0.0, 0.0).is_err());
        assert!(RankPrizes::new(vec![1.0, 0.5, 0.0]).is_ok());
        assert!(RankPrizes::new(vec![1.0, 1.0]).is_err());
        assert!(RankPrizes::new(vec![0.5, 1.0]).is_err());
        let pr = RankPrizes::new(vec![1.0, 0.5, 0.0]).unwrap();
        assert_eq!(pr.for_rank(1), 1.0);
        assert_eq!(pr.for_rank(4), 0.0);
        assert!((pr.mean_over_ranks(3) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn effort_policy_and_entry_actions() {
        let policy = EffortPolicy::from_cells(vec![0.2, 0.8]).unwrap();
        assert_eq!(policy.at(0.1), 0.2);
        assert_eq!(policy.at(0.9), 0.8);
        assert_eq!(policy.at(1.0), 0.8);
        let entry = StrategyEntry::threshold_only(0.5);
        assert_eq!(entry.action_at(0.4), Action::rate());
        assert_eq!(entry.action_at(0.5), Action::contribute(0.0));

        let tabulated = EffortPolicy::from_fn(|a| a).unwrap();
        assert!((tabulated.at(0.5) - 0.5).abs() < 0.01);
        assert!(EffortPolicy::from_fn(|a| 2.0 * a).is_err());
    }

    #[test]
    fn mixed_strategy_lambda_matches_hand_integral() {
        let sigma = MixedParticipationStrategy::from_cells(vec![0.0, 1.0]).unwrap();
        let lam = sigma.lambda(&AbilityDistribution::uniform());
        assert!((lam - 0.5).abs() < 1e-12);
        let sigma = MixedParticipationStrategy::from_cells(vec![0.25; 4]).unwrap();
        assert!((sigma.lambda(&AbilityDistribution::uniform()) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn scenario_round_trips_and_rejects_unknown_keys() {
        let cfg = worked_scenario();
        cfg.validate().unwrap();
        let js = serde_json::to_string_pretty(&cfg).unwrap();
        let back = ScenarioConfig::from_json(&js).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), serde_json::to_string(&cfg).unwrap());

        let mut doc: serde_json::Value = serde_json::from_str(&js).unwrap();
        doc["surprise"] = serde_json::json!(1);
        assert!(ScenarioConfig::from_json(&doc.to_string()).is_err());
    }

    #[test]
    fn scenario_validation_catches_mismatches() {
        let mut cfg = worked_scenario();
        cfg.n = 1;
        assert!(cfg.validate().is_err());

        let mut cfg = worked_scenario();
        cfg.effort_cost = Some(EffortCostFunction::new(0.05, 0.1, 1.0).unwrap());
        assert!(cfg.validate().is_err());

        let mut cfg = worked_scenario();
        cfg.quality = QualityModel::LinearMix { gamma: 0.5 };
        assert!(cfg.validate().is_err()); // missing effort_cost
        cfg.effort_cost = Some(EffortCostFunction::new(0.05, 0.1, 1.0).unwrap());
        cfg.validate().unwrap();

        let mut cfg = worked_scenario();
        cfg.rewards = RewardConfig::RankOrder {
            prizes: vec![1.0, 0.5, 0.0],
            p_r: 0.0,
        };
        assert!(cfg.validate().is_err()); // length 3 != n = 2
    }
}
