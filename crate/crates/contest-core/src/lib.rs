//! Solvers and simulators for best-contribution contest mechanisms.
//!
//! A contest ("best contribution") mechanism awards `p_B` points to the
//! contribution judged best and `p_C < p_B` points to every other
//! contribution; agents with privately known abilities decide whether to
//! contribute, rate, or stay out, and (in the endogenous-effort model)
//! how much effort to spend. This crate provides:
//!
//! - ability distributions with exact inversion and seeded sampling ([`dist`])
//! - the shared contest vocabulary: rewards, costs, qualities, designer
//!   utilities, strategies, outcomes ([`scenario`])
//! - winner-selection models and general expected-payoff mechanisms
//!   ([`ranking`])
//! - the symmetric threshold-equilibrium solver ([`threshold`])
//! - designer-side optimization and reward calibration ([`designer`])
//! - cost learning from simulated contest series ([`learning`])
//! - asymmetric equilibria of rank-order mechanisms ([`asymmetric`])
//! - the endogenous-effort analysis: perfect-ranking impossibility and
//!   noisy-ranking calibration ([`effort`])
//! - a seeded Monte Carlo engine with best-response regret verification
//!   ([`mc`])

pub mod asymmetric;
pub mod designer;
pub mod dist;
pub mod effort;
pub mod error;
pub mod learning;
pub mod mc;
pub mod ranking;
pub mod scenario;
pub mod threshold;
mod util;

pub use dist::AbilityDistribution;
pub use error::{Error, Result};
pub use mc::{RegretReport, SimulationPlan};
pub use ranking::{GeneralMechanism, RankingModel};
pub use scenario::{
    Action, ContestOutcome, CostModel, DesignerUtility, EffortCostFunction, NonstrategicPool,
    QualityModel, RankPrizes, RewardScheme, ScenarioConfig, StrategyProfile,
};
pub use threshold::{solve_symmetric_threshold, EquilibriumReport};
