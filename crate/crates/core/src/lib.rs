//! Exact and empirical analysis of the secretary stopping rule `R_n(k, l)`.
//!
//! The rule rejects the first `k` of `n` candidates arriving in uniformly
//! random order, then hires the first later candidate who beats the `l`-th
//! best of those rejected, or the last candidate if nobody does.
//!
//! * [`combinatorics`]: exact rationals, binomials, harmonic differences and
//!   the counting identities behind the closed forms.
//! * [`strategy`]: the rule itself and the truncated reward `v_{n,d}`.
//! * [`analysis`]: selection probabilities, expected rank and expected
//!   reward, exact and in floating point.
//! * [`oracle`]: exhaustive enumeration over all `n!` arrival orders.
//! * [`montecarlo`]: seeded simulation for large `n`.
//! * [`optimizer`]: parameter search, closed-form minimizers and the
//!   constants `c_d`.

pub mod analysis;
pub mod combinatorics;
mod error;
pub mod format;
pub mod montecarlo;
pub mod optimizer;
pub mod oracle;
pub mod strategy;

pub use analysis::{
    complement_check, expected_rank, expected_rank_float, expected_reward, expected_reward_closed,
    expected_reward_float, p_fail, p_success, rank_distribution, FloatEvaluator, RankDistribution,
};
pub use combinatorics::Rational;
pub use error::{Error, Result};
pub use montecarlo::{simulate, SimConfig, SimResult};
pub use optimizer::{
    asymptotics, closed_k_l1, closed_k_l2, estimate_cd, optimize_rank, optimize_reward, solve_c2, AsymptoticEstimate,
    Objective, OptimizationResult, Value,
};
pub use oracle::{Discrepancy, Oracle, OracleReport};
pub use strategy::{reward, run_rule, Permutation, RewardHorizon, RuleParams, SelectionOutcome};
