//! Closed-form evaluation of the rule's selection probabilities, expected
//! rank and expected truncated reward.
//!
//! Two outcome families make up the full distribution of the selected rank
//! `s`:
//!
//! * a successful search with test value `t` selects each `s < t` with the
//!   same probability `C(t−1, l−1)·C(n−t, k−l) / ((t−1)·C(n, k))`;
//! * an unsuccessful search selects each `s ∈ [l+1, n]` with probability
//!   `C(n−l, k−l) / ((n−l)·C(n, k))`.
//!
//! Everything in this module is exact. [`float`] has the log-space
//! counterparts for large `n`.

pub mod float;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::combinatorics::{choose, falling, harmonic_diff, ratio, rational, FractionSum, Rational};
use crate::error::{Error, Result};
use crate::strategy::{RewardHorizon, RuleParams};

pub use float::{expected_rank_float, expected_reward_float, FloatEvaluator, LnFactorial};

/// Exact distribution of the selected rank under one rule.
#[derive(Debug, Clone, PartialEq)]
pub struct RankDistribution {
    n: usize,
    // index s − 1
    probabilities: Vec<Rational>,
}

impl RankDistribution {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `P(selected rank = s)`; zero outside `1..=n`.
    pub fn probability(&self, s: usize) -> Rational {
        if s < 1 || s > self.n {
            return Rational::zero();
        }
        self.probabilities[s - 1].clone()
    }

    /// `(s, P(s))` pairs in increasing `s`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.probabilities.iter().enumerate().map(|(i, p)| (i + 1, p))
    }

    pub fn total_mass(&self) -> Rational {
        self.probabilities.iter().sum()
    }

    pub fn mean(&self) -> Rational {
        self.iter().map(|(s, p)| p * rational(s)).sum()
    }

    pub fn expected_reward(&self, horizon: RewardHorizon) -> Rational {
        self.iter()
            .take(horizon.d())
            .map(|(s, p)| p * rational(self.n + 1 - s))
            .sum()
    }
}

/// `P(success, test value t, selected s)`.
///
/// Defined for `l+1 ≤ t ≤ n−k+l` and `1 ≤ s ≤ t−1`; the value does not
/// depend on `s`.
pub fn p_success(params: &RuleParams, t: usize, s: usize) -> Result<Rational> {
    let (n, k, l) = (params.n(), params.k(), params.l());
    let (lo, hi) = (l + 1, n - k + l);
    if t < lo || t > hi {
        return Err(Error::TestValueOutOfRange { t, lo, hi });
    }
    if s < 1 || s > t - 1 {
        return Err(Error::SelectionOutOfRange { s, lo: 1, hi: t - 1 });
    }
    Ok(success_mass(params, t))
}

fn success_mass(params: &RuleParams, t: usize) -> Rational {
    let (n, k, l) = (params.n(), params.k(), params.l());
    ratio(choose(t - 1, l - 1) * choose(n - t, k - l), choose(n, k) * (t - 1))
}

/// `P(failure, selected s)`, uniform over `s ∈ [l+1, n]`.
pub fn p_fail(params: &RuleParams, s: usize) -> Result<Rational> {
    let (n, k, l) = (params.n(), params.k(), params.l());
    if s < l + 1 || s > n {
        return Err(Error::SelectionOutOfRange { s, lo: l + 1, hi: n });
    }
    Ok(ratio(choose(n - l, k - l), choose(n, k) * (n - l)))
}

/// `C(n−l, k−l) / C(n, k)`, the probability that ranks `1..l` all land in the
/// rejection phase, computed as the falling-factorial ratio `k^(l) / n^(l)`.
pub fn failure_probability(params: &RuleParams) -> Rational {
    let (n, k, l) = (params.n(), params.k(), params.l());
    Rational::new(falling(k, l), falling(n, l))
}

/// Full distribution of the selected rank.
pub fn rank_distribution(params: &RuleParams) -> RankDistribution {
    let (n, k, l) = (params.n(), params.k(), params.l());
    let fail = ratio(choose(n - l, k - l), choose(n, k) * (n - l));

    // Suffix sums over t of the success mass: rank s collects every t > s.
    let t_hi = n - k + l;
    let mut probabilities = vec![Rational::zero(); n];
    let mut suffix = Rational::zero();
    for s in (1..=n).rev() {
        let t = s + 1;
        if t > l && t <= t_hi {
            suffix += success_mass(params, t);
        }
        let mut p = suffix.clone();
        if s > l {
            p += &fail;
        }
        probabilities[s - 1] = p;
    }
    RankDistribution { n, probabilities }
}

/// Expected selected rank, `(n+1)/2 · (l/(k+1) + C(n−l, k−l)/C(n, k))`.
pub fn expected_rank(params: &RuleParams) -> Rational {
    let (n, k, l) = (params.n(), params.k(), params.l());
    ratio(n + 1, 2) * (ratio(l, k + 1) + failure_probability(params))
}

/// `Σ_{s=1}^{m} (n+1−s)`.
#[inline]
fn reward_prefix(n: usize, m: usize) -> u64 {
    (m * (2 * n + 1 - m) / 2) as u64
}

/// Expected truncated reward `V_{n,d}(k, l)`, from the joint distribution of
/// `(t, s)` directly.
///
/// The success mass is independent of `s`, so the inner sum over
/// `s ≤ min(t−1, d)` collapses to an arithmetic series. What remains is one
/// pass over `t` with incrementally updated binomials, accumulated over a
/// shared integer denominator.
pub fn expected_reward(params: &RuleParams, horizon: RewardHorizon) -> Rational {
    let (n, k, l) = (params.n(), params.k(), params.l());
    let d = horizon.d();
    let t_hi = n - k + l;

    let success = if l >= 2 {
        // C(t−1, l−1)/(t−1) = C(t−2, l−2)/(l−1), so every term is an integer
        // over the common denominator (l−1)·C(n, k).
        let mut weight = choose(l - 1, l - 2) * choose(n - l - 1, k - l);
        let mut capped = BigInt::zero();
        let mut tail = BigInt::zero();
        for t in l + 1..=t_hi {
            if t - 1 <= d {
                capped += &weight * reward_prefix(n, t - 1);
            } else {
                tail += &weight;
            }
            if t < t_hi {
                weight *= ((t - 1) * (n + l - t - k)) as u64;
                weight /= ((t - l + 1) * (n - t)) as u64;
            }
        }
        ratio(capped + tail * reward_prefix(n, d), choose(n, k) * (l - 1))
    } else {
        // l = 1: weight C(n−t, k−1)/(t−1). Below the horizon the division by
        // t−1 cancels against the series; above it the terms are harmonic.
        let mut weight = choose(n - 2, k - 1);
        let mut capped = BigInt::zero();
        let mut tail = FractionSum::new();
        for t in 2..=t_hi {
            if t - 1 <= d {
                capped += &weight * (2 * n + 2 - t) as u64;
            } else {
                tail.add(&weight, (t - 1) as u64);
            }
            if t < t_hi {
                weight *= (n + 1 - t - k) as u64;
                weight /= (n - t) as u64;
            }
        }
        (ratio(capped, 2) + tail.into_rational() * rational(reward_prefix(n, d))) / rational(choose(n, k))
    };

    if d > l {
        let series = reward_prefix(n, d) - reward_prefix(n, l);
        success + failure_probability(params) * ratio(series, n - l)
    } else {
        success
    }
}

/// Closed forms for `V_{n,1}` and `V_{n,2}`.
///
/// * `d = 1, l = 1`: `k·Σ_{j=k}^{n−1} 1/j`
/// * `d = 1, l ≥ 2`: `n/(l−1) · (k/n − C(n−l,k−l)/C(n,k))`
/// * `d = 2, l = 1`: `(2n−1)/n · k·Σ_{j=k}^{n−1} 1/j − k(n−k−1)/n`
/// * `d = 2, l ≥ 2`: `(2n−1)/(l−1) · (k/n − C(n−l,k−l)/C(n,k))`
pub fn expected_reward_closed(params: &RuleParams, d: usize) -> Result<Rational> {
    let (n, k, l) = (params.n(), params.k(), params.l());
    let gap = || ratio(k, n) - failure_probability(params);
    match (d, l) {
        (1, 1) => Ok(rational(k) * harmonic_diff(n, k)?),
        (1, _) => Ok(ratio(n, l - 1) * gap()),
        (2, 1) => Ok(ratio(2 * n - 1, n) * rational(k) * harmonic_diff(n, k)? - ratio(k * (n - k - 1), n)),
        (2, _) => Ok(ratio(2 * n - 1, l - 1) * gap()),
        _ => Err(Error::NoClosedForm { d }),
    }
}

/// `V_{n,n}(k, l) + E_n(k, l) = n + 1`, each side evaluated independently.
pub fn complement_check(params: &RuleParams) -> bool {
    let n = params.n();
    let full = RewardHorizon::new(n, n).expect("d = n is always a valid horizon");
    expected_reward(params, full) + expected_rank(params) == rational(n + 1)
}
