//! Brute-force ground truth: run the rule on every one of the `n!`
//! permutations and tally what it selects.
//!
//! Permutations are visited in lexicographic order, so discrepancy reports
//! come out in a stable order.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::combinatorics::{factorial, ratio, Rational};
use crate::error::{Error, Result};
use crate::format::{rational_map, rational_str};
use crate::strategy::{reward_value, select, RewardHorizon, RuleParams};

/// Default enumeration cap; `10!` is about 3.6 million rule executions.
pub const DEFAULT_CAP: usize = 10;

/// Number of permutations with a given successful `(t, s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointCount {
    pub t: usize,
    pub s: usize,
    pub count: u64,
}

/// Exhaustive tally of the rule over all permutations of `{1..n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub n: usize,
    pub k: usize,
    pub l: usize,
    /// `n!`.
    pub total: u64,
    /// Selected rank `s` → number of permutations selecting it, for every `s` in `1..=n`.
    pub outcome_counts: BTreeMap<usize, u64>,
    /// Successful outcomes by `(t, s)`, only pairs that occurred, ordered by `(t, s)`.
    pub success_counts: Vec<JointCount>,
    /// Unsuccessful outcomes by `s`, only ranks that occurred.
    pub failure_counts: BTreeMap<usize, u64>,
    #[serde(with = "rational_str")]
    pub mean_rank: Rational,
    /// Horizon `d` → mean truncated reward, for every `d` in `1..=n`.
    #[serde(with = "rational_map")]
    pub mean_reward: BTreeMap<usize, Rational>,
}

impl OracleReport {
    pub fn params(&self) -> RuleParams {
        RuleParams::new(self.n, self.k, self.l).expect("report built from valid params")
    }

    /// Empirical `P(success, t, s)`, zero for pairs that never occurred.
    pub fn success_probability(&self, t: usize, s: usize) -> Rational {
        let count = self
            .success_counts
            .binary_search_by_key(&(t, s), |c| (c.t, c.s))
            .map(|i| self.success_counts[i].count)
            .unwrap_or(0);
        ratio(count, self.total)
    }

    /// Empirical `P(failure, s)`.
    pub fn failure_probability(&self, s: usize) -> Rational {
        ratio(self.failure_counts.get(&s).copied().unwrap_or(0), self.total)
    }
}

/// Which closed-form quantity disagreed with the enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Quantity {
    SuccessProbability { t: usize, s: usize },
    FailureProbability { s: usize },
    MeanRank,
    MeanReward { d: usize },
    ClosedFormReward { d: usize },
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::SuccessProbability { t, s } => write!(f, "P_success(t={t}, s={s})"),
            Quantity::FailureProbability { s } => write!(f, "P_fail(s={s})"),
            Quantity::MeanRank => write!(f, "E[rank]"),
            Quantity::MeanReward { d } => write!(f, "V(d={d})"),
            Quantity::ClosedFormReward { d } => write!(f, "V_closed(d={d})"),
        }
    }
}

/// One disagreement between enumeration and a formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub quantity: Quantity,
    /// Enumerated value.
    pub oracle: String,
    /// Formula value, or the error it raised.
    pub formula: String,
}

impl fmt::Display for Discrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} k={} l={} {}: oracle {}, formula {}",
            self.n, self.k, self.l, self.quantity, self.oracle, self.formula
        )
    }
}

/// The formulas checked by [`Oracle::verify_with`]. The defaults are the
/// crate's own; override a method to check an alternative.
pub trait Formulas {
    fn p_success(&self, params: &RuleParams, t: usize, s: usize) -> Result<Rational> {
        analysis::p_success(params, t, s)
    }

    fn p_fail(&self, params: &RuleParams, s: usize) -> Result<Rational> {
        analysis::p_fail(params, s)
    }

    fn expected_rank(&self, params: &RuleParams) -> Result<Rational> {
        Ok(analysis::expected_rank(params))
    }

    fn expected_reward(&self, params: &RuleParams, horizon: RewardHorizon) -> Result<Rational> {
        Ok(analysis::expected_reward(params, horizon))
    }

    fn expected_reward_closed(&self, params: &RuleParams, d: usize) -> Result<Rational> {
        analysis::expected_reward_closed(params, d)
    }
}

/// The crate's formulas, unmodified.
#[derive(Debug, Clone, Copy, Default)]
pub struct Reference;

impl Formulas for Reference {}

/// Exhaustive enumerator with a configurable size cap.
#[derive(Debug, Clone, Copy)]
pub struct Oracle {
    cap: usize,
}

impl Default for Oracle {
    fn default() -> Self {
        Self { cap: DEFAULT_CAP }
    }
}

impl Oracle {
    pub fn with_cap(cap: usize) -> Self {
        Self { cap }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    fn check_cap(&self, n: usize) -> Result<()> {
        if n > self.cap {
            return Err(Error::OracleCap { n, cap: self.cap });
        }
        Ok(())
    }

    pub fn enumerate(&self, params: &RuleParams) -> Result<OracleReport> {
        let n = params.n();
        self.check_cap(n)?;

        let mut by_rank = vec![0u64; n + 1];
        let mut failures = vec![0u64; n + 1];
        // joint[t][s]
        let mut joint = vec![vec![0u64; n + 1]; n + 1];
        let mut scratch = Vec::with_capacity(params.k());
        let mut total = 0u64;
        for perm in (1..=n).permutations(n) {
            let o = select(params, &perm, &mut scratch);
            total += 1;
            by_rank[o.s] += 1;
            if o.success {
                joint[o.t][o.s] += 1;
            } else {
                failures[o.s] += 1;
            }
        }
        debug_assert_eq!(Some(total), factorial(n).try_into().ok());

        let rank_sum: u64 = (1..=n).map(|s| s as u64 * by_rank[s]).sum();
        let mean_reward = (1..=n)
            .map(|d| {
                let sum: u64 = (1..=n).map(|s| reward_value(d, n, s) * by_rank[s]).sum();
                (d, ratio(sum, total))
            })
            .collect();
        let success_counts = (1..=n)
            .flat_map(|t| (1..=n).map(move |s| (t, s)))
            .filter(|&(t, s)| joint[t][s] > 0)
            .map(|(t, s)| JointCount {
                t,
                s,
                count: joint[t][s],
            })
            .collect();

        Ok(OracleReport {
            n,
            k: params.k(),
            l: params.l(),
            total,
            outcome_counts: (1..=n).map(|s| (s, by_rank[s])).collect(),
            success_counts,
            failure_counts: (1..=n).filter(|&s| failures[s] > 0).map(|s| (s, failures[s])).collect(),
            mean_rank: ratio(rank_sum, total),
            mean_reward,
        })
    }

    /// Checks the crate's formulas against enumeration for every
    /// `2 ≤ n ≤ n_max`, every valid `(k, l)` and every `d ∈ 1..=n`. An empty
    /// result means full agreement.
    pub fn verify_formulas(&self, n_max: usize) -> Result<Vec<Discrepancy>> {
        self.verify_with(n_max, &Reference)
    }

    pub fn verify_with<F: Formulas + ?Sized>(&self, n_max: usize, formulas: &F) -> Result<Vec<Discrepancy>> {
        self.check_cap(n_max)?;
        let mut out = Vec::new();
        for n in 2..=n_max {
            for params in RuleParams::all(n) {
                let report = self.enumerate(&params)?;
                compare(&report, formulas, &mut out);
            }
        }
        Ok(out)
    }
}

fn compare<F: Formulas + ?Sized>(report: &OracleReport, formulas: &F, out: &mut Vec<Discrepancy>) {
    let params = report.params();
    let (n, k, l) = (params.n(), params.k(), params.l());
    let mut check = |quantity: Quantity, oracle: &Rational, formula: Result<Rational>| {
        let formula = match formula {
            Ok(value) if &value == oracle => return,
            Ok(value) => value.to_string(),
            Err(e) => format!("error: {e}"),
        };
        out.push(Discrepancy {
            n,
            k,
            l,
            quantity,
            oracle: oracle.to_string(),
            formula,
        });
    };

    let t_range = l + 1..=n - k + l;
    for t in t_range.clone() {
        for s in 1..t {
            check(
                Quantity::SuccessProbability { t, s },
                &report.success_probability(t, s),
                formulas.p_success(&params, t, s),
            );
        }
    }
    for c in &report.success_counts {
        if !t_range.contains(&c.t) || c.s >= c.t {
            check(
                Quantity::SuccessProbability { t: c.t, s: c.s },
                &ratio(c.count, report.total),
                Ok(Rational::from_integer(0.into())),
            );
        }
    }
    for s in l + 1..=n {
        check(
            Quantity::FailureProbability { s },
            &report.failure_probability(s),
            formulas.p_fail(&params, s),
        );
    }
    for (&s, &count) in &report.failure_counts {
        if s <= l {
            check(
                Quantity::FailureProbability { s },
                &ratio(count, report.total),
                Ok(Rational::from_integer(0.into())),
            );
        }
    }

    check(Quantity::MeanRank, &report.mean_rank, formulas.expected_rank(&params));
    for (&d, mean) in &report.mean_reward {
        let horizon = RewardHorizon::new(d, n).expect("d in 1..=n");
        check(
            Quantity::MeanReward { d },
            mean,
            formulas.expected_reward(&params, horizon),
        );
        if d <= 2 {
            check(
                Quantity::ClosedFormReward { d },
                mean,
                formulas.expected_reward_closed(&params, d),
            );
        }
    }
}

/// [`Oracle::enumerate`] with the default cap.
pub fn enumerate(params: &RuleParams) -> Result<OracleReport> {
    Oracle::default().enumerate(params)
}

/// [`Oracle::verify_formulas`] with the default cap.
pub fn verify_formulas(n_max: usize) -> Result<Vec<Discrepancy>> {
    Oracle::default().verify_formulas(n_max)
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;
    use crate::combinatorics::{choose, rational};

    fn p(n: usize, k: usize, l: usize) -> RuleParams {
        RuleParams::new(n, k, l).unwrap()
    }

    #[test]
    fn enumerate_examples() {
        let r = enumerate(&p(3, 1, 1)).unwrap();
        assert_eq!(r.total, 6);
        assert_eq!(r.outcome_counts, BTreeMap::from([(1, 3), (2, 2), (3, 1)]));
        assert_eq!(r.mean_rank, ratio(5, 3));

        let r = enumerate(&p(2, 1, 1)).unwrap();
        assert_eq!(r.outcome_counts, BTreeMap::from([(1, 1), (2, 1)]));
        assert_eq!(r.mean_rank, ratio(3, 2));

        let r = enumerate(&p(4, 3, 3)).unwrap();
        assert_eq!(r.mean_rank, ratio(5, 2));
    }

    #[test]
    fn report_invariants() {
        for params in RuleParams::all(6) {
            let r = enumerate(&params).unwrap();
            assert_eq!(r.outcome_counts.values().sum::<u64>(), 720);
            let weighted: u64 = r.outcome_counts.iter().map(|(s, c)| *s as u64 * c).sum();
            assert_eq!(r.mean_rank, ratio(weighted, 720));
        }
    }

    #[test]
    fn failure_counts_match_counting_claim() {
        for n in 2..=7 {
            for params in RuleParams::all(n) {
                let (k, l) = (params.k(), params.l());
                let r = enumerate(&params).unwrap();
                let expected = rational(factorial(n) * choose(n - l, k - l)) / rational(choose(n, k) * (n - l));
                for s in l + 1..=n {
                    assert_eq!(rational(r.failure_counts[&s]), expected, "{params:?} s={s}");
                }
                assert!(r.failure_counts.keys().all(|&s| s > l));
            }
        }
    }

    #[test]
    fn permutation_generation_is_complete() {
        let all: Vec<Vec<usize>> = (1..=6).permutations(6).collect();
        assert_eq!(all.len(), 720);
        let distinct: HashSet<_> = all.iter().collect();
        assert_eq!(distinct.len(), 720);
        assert!(all.windows(2).all(|w| w[0] < w[1]), "lexicographic order");
    }

    #[test]
    fn verify_small() {
        assert!(verify_formulas(2).unwrap().is_empty());
        assert!(verify_formulas(6).unwrap().is_empty());
        assert!(verify_formulas(1).unwrap().is_empty());
    }

    #[test]
    fn cap_is_enforced() {
        let oracle = Oracle::with_cap(5);
        assert!(matches!(
            oracle.enumerate(&p(6, 2, 1)),
            Err(Error::OracleCap { n: 6, cap: 5 })
        ));
        assert!(oracle.verify_formulas(6).is_err());
        assert!(oracle.verify_formulas(5).is_ok());
    }

    /// `P_success` with `t` where `t − 1` belongs.
    struct OffByOne;

    impl Formulas for OffByOne {
        fn p_success(&self, params: &RuleParams, t: usize, s: usize) -> Result<Rational> {
            let exact = analysis::p_success(params, t, s)?;
            Ok(exact * ratio(t - 1, t))
        }
    }

    #[test]
    fn injected_mutation_is_reported() {
        let found = Oracle::default().verify_with(4, &OffByOne).unwrap();
        assert!(!found.is_empty());
        assert!(found
            .iter()
            .all(|d| matches!(d.quantity, Quantity::SuccessProbability { .. })));
        let first = &found[0];
        assert_eq!((first.n, first.k, first.l), (2, 1, 1));
        assert_eq!(first.quantity, Quantity::SuccessProbability { t: 2, s: 1 });
        assert!(first.to_string().contains("t=2"));
    }

    #[test]
    fn report_json_round_trip() {
        let r = enumerate(&p(4, 2, 1)).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains(r#""mean_rank":"#));
        let back: OracleReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
