//! Floating-point evaluation through log-factorials.
//!
//! Each success term is exponentiated on its own, so individual terms may
//! underflow to zero at very large `n` without poisoning the sum. Summation
//! order is fixed (increasing `t`), which makes every result reproducible.

use crate::strategy::{RewardHorizon, RuleParams};

/// Table of `ln(m!)` for `m ≤ max`.
#[derive(Debug, Clone)]
pub struct LnFactorial {
    table: Vec<f64>,
}

impl LnFactorial {
    pub fn new(max: usize) -> Self {
        // Neumaier-compensated running sum; keeps each entry within a few ulps.
        let mut table = Vec::with_capacity(max + 1);
        let (mut acc, mut carry) = (0.0f64, 0.0f64);
        table.push(0.0);
        for m in 1..=max {
            let x = (m as f64).ln();
            let sum = acc + x;
            carry += if acc.abs() >= x.abs() {
                (acc - sum) + x
            } else {
                (x - sum) + acc
            };
            acc = sum;
            table.push(acc + carry);
        }
        Self { table }
    }

    pub fn max(&self) -> usize {
        self.table.len() - 1
    }

    #[inline]
    pub fn ln_factorial(&self, m: usize) -> f64 {
        self.table[m]
    }

    /// `ln C(a, b)` for `b ≤ a`.
    #[inline]
    pub fn ln_choose(&self, a: usize, b: usize) -> f64 {
        debug_assert!(b <= a);
        self.table[a] - self.table[b] - self.table[a - b]
    }
}

#[inline]
fn reward_prefix(n: usize, m: usize) -> f64 {
    (m * (2 * n + 1 - m) / 2) as f64
}

/// Float evaluator for every pool size up to `n_max`. Build once and reuse it
/// across a parameter grid.
#[derive(Debug, Clone)]
pub struct FloatEvaluator {
    ln: LnFactorial,
}

impl FloatEvaluator {
    pub fn new(n_max: usize) -> Self {
        Self {
            ln: LnFactorial::new(n_max),
        }
    }

    pub fn n_max(&self) -> usize {
        self.ln.max()
    }

    fn check(&self, params: &RuleParams) {
        assert!(
            params.n() <= self.n_max(),
            "evaluator built for n ≤ {}, got n = {}",
            self.n_max(),
            params.n()
        );
    }

    /// `C(n−l, k−l) / C(n, k)`.
    pub fn failure_probability(&self, params: &RuleParams) -> f64 {
        self.check(params);
        let (n, k, l) = (params.n(), params.k(), params.l());
        (self.ln.ln_choose(n - l, k - l) - self.ln.ln_choose(n, k)).exp()
    }

    /// Success mass for test value `t`, per selected rank.
    pub fn success_mass(&self, params: &RuleParams, t: usize) -> f64 {
        self.check(params);
        let (n, k, l) = (params.n(), params.k(), params.l());
        let ln_total = self.ln.ln_choose(n, k);
        self.term(n, k, l, t, ln_total)
    }

    #[inline]
    fn term(&self, n: usize, k: usize, l: usize, t: usize, ln_total: f64) -> f64 {
        let ln_w = self.ln.ln_choose(t - 1, l - 1) + self.ln.ln_choose(n - t, k - l) - ln_total;
        ln_w.exp() / (t - 1) as f64
    }

    pub fn expected_rank(&self, params: &RuleParams) -> f64 {
        let (n, k, l) = (params.n(), params.k(), params.l());
        0.5 * (n + 1) as f64 * (l as f64 / (k + 1) as f64 + self.failure_probability(params))
    }

    pub fn expected_reward(&self, params: &RuleParams, horizon: RewardHorizon) -> f64 {
        self.check(params);
        let (n, k, l) = (params.n(), params.k(), params.l());
        let d = horizon.d();
        let ln_total = self.ln.ln_choose(n, k);

        let mut capped = 0.0;
        let mut tail = 0.0;
        for t in l + 1..=n - k + l {
            let w = self.term(n, k, l, t, ln_total);
            if t - 1 <= d {
                capped += w * reward_prefix(n, t - 1);
            } else {
                tail += w;
            }
        }
        let mut v = capped + tail * reward_prefix(n, d);
        if d > l {
            let fail = self.failure_probability(params) / (n - l) as f64;
            v += fail * (reward_prefix(n, d) - reward_prefix(n, l));
        }
        v
    }

    /// `V_{n,d}(k, l)` for every `d` in `1..=d_max` in a single pass over `t`.
    /// Entry `d − 1` of the result holds horizon `d`.
    pub fn expected_rewards(&self, params: &RuleParams, d_max: usize) -> Vec<f64> {
        self.check(params);
        let (n, k, l) = (params.n(), params.k(), params.l());
        assert!((1..=n).contains(&d_max), "d_max = {d_max} outside 1..={n}");
        let ln_total = self.ln.ln_choose(n, k);

        // mass[m] = success mass at t = m + 1 for m ≤ d_max; every horizon
        // is saturated beyond that, so only the total mass there matters.
        let mut mass = vec![0.0; d_max + 1];
        let mut beyond = 0.0;
        for t in l + 1..=n - k + l {
            let w = self.term(n, k, l, t, ln_total);
            if t - 1 <= d_max {
                mass[t - 1] = w;
            } else {
                beyond += w;
            }
        }
        // above[d] = Σ_{m > d} mass[m]
        let mut above = vec![0.0; d_max + 1];
        let mut acc = beyond;
        for d in (1..=d_max).rev() {
            above[d] = acc;
            acc += mass[d];
        }

        let fail = self.failure_probability(params) / (n - l) as f64;
        let mut below = 0.0;
        (1..=d_max)
            .map(|d| {
                below += mass[d] * reward_prefix(n, d);
                let mut v = below + above[d] * reward_prefix(n, d);
                if d > l {
                    v += fail * (reward_prefix(n, d) - reward_prefix(n, l));
                }
                v
            })
            .collect()
    }
}

/// Expected rank on the float path.
pub fn expected_rank_float(params: &RuleParams) -> f64 {
    FloatEvaluator::new(params.n()).expected_rank(params)
}

/// Expected truncated reward on the float path.
pub fn expected_reward_float(params: &RuleParams, horizon: RewardHorizon) -> f64 {
    FloatEvaluator::new(params.n()).expected_reward(params, horizon)
}
