//! Parameter search over `(k, l)`, the closed-form and asymptotic
//! minimizers of the expected rank, and the reward constants `c_d`.
//!
//! Grid searches visit `k` ascending and, within each `k`, `l` ascending, and
//! only replace the incumbent on strict improvement. Ties therefore resolve
//! to the smallest `k`, then the smallest `l`.

use std::cmp::Ordering;
use std::f64::consts::E;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::analysis::{self, FloatEvaluator};
use crate::combinatorics::Rational;
use crate::error::{Error, Result};
use crate::format::to_f64;
use crate::strategy::{RewardHorizon, RuleParams};

/// Tie-break rule recorded in every [`OptimizationResult`].
pub const TIE_BREAK: &str = "smallest k, then smallest l";

/// Pool sizes up to this are searched with exact rationals by default.
pub const DEFAULT_EXACT_UP_TO: usize = 500;

/// `⌈4·ln n⌉`, at least 1: the default cap on `l`.
pub fn default_l_max(n: usize) -> usize {
    ((4.0 * (n as f64).ln()).ceil() as usize).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Objective {
    MinRank,
    MaxReward { d: usize },
}

/// An objective value from either evaluation path.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(Rational),
    Float(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => to_f64(r),
            Value::Float(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Value::Exact(r) => Some(r),
            Value::Float(_) => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ValueRepr {
    exact: Option<String>,
    decimal: f64,
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ValueRepr {
            exact: self.as_exact().map(|r| r.to_string()),
            decimal: self.to_f64(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = ValueRepr::deserialize(de)?;
        match repr.exact {
            Some(s) => Rational::from_str(&s)
                .map(Value::Exact)
                .map_err(serde::de::Error::custom),
            None => Ok(Value::Float(repr.decimal)),
        }
    }
}

/// Inclusive ranges searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchDomain {
    pub k_min: usize,
    pub k_max: usize,
    pub l_min: usize,
    pub l_max: usize,
}

impl SearchDomain {
    pub fn contains(&self, k: usize, l: usize) -> bool {
        (self.k_min..=self.k_max).contains(&k) && (self.l_min..=self.l_max).contains(&l) && l <= k
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub n: usize,
    pub k_star: usize,
    pub l_star: usize,
    pub value: Value,
    pub objective: Objective,
    pub search_domain: SearchDomain,
    pub tie_break: String,
}

impl OptimizationResult {
    pub fn params(&self) -> RuleParams {
        RuleParams::new(self.n, self.k_star, self.l_star).expect("optimum lies in a valid domain")
    }
}

/// Search settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    /// Cap on `l`; [`default_l_max`] when unset.
    pub l_max: Option<usize>,
    /// Exact rationals for `n` up to this, floats above.
    pub exact_up_to: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            l_max: None,
            exact_up_to: DEFAULT_EXACT_UP_TO,
        }
    }
}

impl SearchConfig {
    pub fn with_l_max(l_max: Option<usize>) -> Self {
        Self {
            l_max,
            ..Self::default()
        }
    }

    /// Always use the float path.
    pub fn float(l_max: Option<usize>) -> Self {
        Self { l_max, exact_up_to: 0 }
    }
}

fn better<T: PartialOrd>(candidate: &T, incumbent: &T, objective: Objective) -> bool {
    let ord = candidate.partial_cmp(incumbent);
    match objective {
        Objective::MinRank => ord == Some(Ordering::Less),
        Objective::MaxReward { .. } => ord == Some(Ordering::Greater),
    }
}

/// Best `(value, k, l)` over the domain, scanning `k` in parallel and
/// reducing in `k` order.
fn scan<T, F>(n: usize, domain: SearchDomain, objective: Objective, eval: F) -> (T, usize, usize)
where
    T: PartialOrd + Send,
    F: Fn(&RuleParams) -> T + Sync,
{
    let per_k: Vec<(T, usize, usize)> = (domain.k_min..=domain.k_max)
        .into_par_iter()
        .filter_map(|k| {
            let mut best: Option<(T, usize, usize)> = None;
            for l in domain.l_min..=domain.l_max.min(k) {
                let params = RuleParams::new(n, k, l).expect("domain is valid");
                let v = eval(&params);
                if best.as_ref().is_none_or(|(b, _, _)| better(&v, b, objective)) {
                    best = Some((v, k, l));
                }
            }
            best
        })
        .collect();
    per_k
        .into_iter()
        .reduce(|acc, cand| if better(&cand.0, &acc.0, objective) { cand } else { acc })
        .expect("search domain is nonempty")
}

fn search(n: usize, domain: SearchDomain, objective: Objective, exact: bool) -> OptimizationResult {
    let (value, k_star, l_star) = match (objective, exact) {
        (Objective::MinRank, true) => {
            let (v, k, l) = scan(n, domain, objective, analysis::expected_rank);
            (Value::Exact(v), k, l)
        }
        (Objective::MaxReward { d }, true) => {
            let h = RewardHorizon::new(d, n).expect("validated by caller");
            let (v, k, l) = scan(n, domain, objective, |p| analysis::expected_reward(p, h));
            (Value::Exact(v), k, l)
        }
        (Objective::MinRank, false) => {
            let eval = FloatEvaluator::new(n);
            let (v, k, l) = scan(n, domain, objective, |p| eval.expected_rank(p));
            (Value::Float(v), k, l)
        }
        (Objective::MaxReward { d }, false) => {
            let eval = FloatEvaluator::new(n);
            let h = RewardHorizon::new(d, n).expect("validated by caller");
            let (v, k, l) = scan(n, domain, objective, |p| eval.expected_reward(p, h));
            (Value::Float(v), k, l)
        }
    };
    OptimizationResult {
        n,
        k_star,
        l_star,
        value,
        objective,
        search_domain: domain,
        tie_break: TIE_BREAK.to_string(),
    }
}

fn full_domain(n: usize, l_max: Option<usize>) -> Result<SearchDomain> {
    if n < 2 {
        return Err(Error::PoolTooSmall { n });
    }
    let l_max = l_max.unwrap_or_else(|| default_l_max(n)).clamp(1, n - 1);
    Ok(SearchDomain {
        k_min: 1,
        k_max: n - 1,
        l_min: 1,
        l_max,
    })
}

/// Minimizes the expected rank over `1 ≤ l ≤ min(l_max, k)`, `l ≤ k ≤ n−1`.
pub fn optimize_rank(n: usize, l_max: Option<usize>) -> Result<OptimizationResult> {
    optimize_rank_with(n, &SearchConfig::with_l_max(l_max))
}

pub fn optimize_rank_with(n: usize, config: &SearchConfig) -> Result<OptimizationResult> {
    let domain = full_domain(n, config.l_max)?;
    Ok(search(n, domain, Objective::MinRank, n <= config.exact_up_to))
}

/// Minimizes the expected rank over `k ∈ [l, n−1]` with `l` held fixed.
pub fn optimize_rank_at_l(n: usize, l: usize) -> Result<OptimizationResult> {
    RuleParams::new(n, l.max(1), l)?;
    let domain = SearchDomain {
        k_min: l,
        k_max: n - 1,
        l_min: l,
        l_max: l,
    };
    Ok(search(n, domain, Objective::MinRank, n <= DEFAULT_EXACT_UP_TO))
}

/// Maximizes the expected truncated reward over the same domain as
/// [`optimize_rank`].
pub fn optimize_reward(n: usize, horizon: RewardHorizon, l_max: Option<usize>) -> Result<OptimizationResult> {
    optimize_reward_with(n, horizon, &SearchConfig::with_l_max(l_max))
}

pub fn optimize_reward_with(n: usize, horizon: RewardHorizon, config: &SearchConfig) -> Result<OptimizationResult> {
    let domain = full_domain(n, config.l_max)?;
    RewardHorizon::new(horizon.d(), n)?;
    Ok(search(
        n,
        domain,
        Objective::MaxReward { d: horizon.d() },
        n <= config.exact_up_to,
    ))
}

/// `√n − 1`, the continuous minimizer of `E_n(k, 1)`.
pub fn closed_k_l1(n: usize) -> f64 {
    (n as f64).sqrt() - 1.0
}

/// Continuous minimizer of `E_n(k, 2)`:
/// `½·(r − 1 + 1/r)` with `r = (√((2n−1)⁴ − 1) + (2n−1)²)^{1/3}`.
pub fn closed_k_l2(n: usize) -> f64 {
    let m2 = {
        let m = 2.0 * n as f64 - 1.0;
        m * m
    };
    // (2n−1)⁴ − 1 = (m² − 1)(m² + 1), without forming m⁴
    let radicand = ((m2 - 1.0) * (m2 + 1.0)).sqrt() + m2;
    let r = radicand.cbrt();
    0.5 * (r - 1.0 + 1.0 / r)
}

/// Leading-order asymptotics of the optimal rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticEstimate {
    pub n: f64,
    /// The `l` used for `k_approx` and `value_approx`, when given.
    pub l: Option<f64>,
    /// `n^{l/(l+1)}`.
    pub k_approx: f64,
    /// `ln n − 1`.
    pub l_approx: f64,
    /// `(l+1)/2 · n^{1/(l+1)}`.
    pub value_approx: f64,
}

/// With `l` unset, uses `l = ln n − 1`, which gives `k ≈ n/e` and
/// `E ≈ (e/2)·ln n`.
pub fn asymptotics(n: f64, l: Option<f64>) -> Result<AsymptoticEstimate> {
    let l_approx = n.ln() - 1.0;
    let l_used = match l {
        Some(l) => l,
        None if n >= 3.0 => l_approx,
        None => return Err(Error::AsymptoticDomain { n }),
    };
    let exponent = 1.0 / (l_used + 1.0);
    Ok(AsymptoticEstimate {
        n,
        l,
        k_approx: n.powf(l_used * exponent),
        l_approx,
        value_approx: (l_used + 1.0) / 2.0 * n.powf(exponent),
    })
}

/// Root `x` of `2x − 2 ln x = 3` in `(0, 1)` and `c₂ = x(2 − x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct C2Solution {
    pub x: f64,
    pub c2: f64,
}

/// Bisection on `f(x) = 2x − 2 ln x − 3` over `(0, 1)`: `f → +∞` at `0⁺`
/// and `f(1) = −1`, and `f` is decreasing there, so the bracket holds exactly
/// one root (the smaller of the two).
pub fn solve_c2() -> C2Solution {
    let f = |x: f64| 2.0 * x - 2.0 * x.ln() - 3.0;
    let (mut lo, mut hi) = (f64::EPSILON, 1.0);
    debug_assert!(f(lo) > 0.0 && f(hi) < 0.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    C2Solution { x, c2: x * (2.0 - x) }
}

/// `c₁ = 1/e`.
pub fn c1() -> f64 {
    1.0 / E
}

/// `max_{k,l} V_{n,d}(k, l) / n` on the float path.
///
/// This is a finite-`n` stand-in for the limit `c_d`; no extrapolation is
/// applied, so report `n` alongside it.
pub fn estimate_cd(horizon: RewardHorizon, n: usize, l_max: Option<usize>) -> Result<f64> {
    let best = optimize_reward_with(n, horizon, &SearchConfig::float(l_max))?;
    Ok(best.value.to_f64() / n as f64)
}

/// One row of [`estimate_cd_table`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdEstimate {
    pub d: usize,
    pub n: usize,
    pub k_star: usize,
    pub l_star: usize,
    pub value: f64,
    pub c_d: f64,
}

/// [`estimate_cd`] for every `d` in `1..=d_max`, sharing one pass over the
/// grid.
pub fn estimate_cd_table(n: usize, d_max: usize, l_max: Option<usize>) -> Result<Vec<CdEstimate>> {
    let domain = full_domain(n, l_max)?;
    RewardHorizon::new(d_max, n)?;
    let eval = FloatEvaluator::new(n);

    let per_k: Vec<Vec<(f64, usize, usize)>> = (domain.k_min..=domain.k_max)
        .into_par_iter()
        .map(|k| {
            let mut best = vec![(f64::NEG_INFINITY, 0, 0); d_max];
            for l in 1..=domain.l_max.min(k) {
                let params = RuleParams::new(n, k, l).expect("domain is valid");
                for (slot, v) in best.iter_mut().zip(eval.expected_rewards(&params, d_max)) {
                    if v > slot.0 {
                        *slot = (v, k, l);
                    }
                }
            }
            best
        })
        .collect();

    Ok((1..=d_max)
        .map(|d| {
            let (value, k_star, l_star) = per_k
                .iter()
                .map(|row| row[d - 1])
                .reduce(|acc, cand| if cand.0 > acc.0 { cand } else { acc })
                .expect("nonempty");
            CdEstimate {
                d,
                n,
                k_star,
                l_star,
                value,
                c_d: value / n as f64,
            }
        })
        .collect())
}
