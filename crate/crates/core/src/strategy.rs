//! The stopping rule `R_n(k, l)` and the truncated reward `v_{n,d}`.
//!
//! A permutation is the rank sequence itself: `a_i` is the absolute rank of
//! the `i`-th arrival, with 1 the best. The rule rejects the first `k`
//! arrivals, takes the test value `t` as the `l`-th smallest rank among
//! them, then accepts the first later arrival ranked below `t`. If none
//! qualifies it accepts the last arrival.

use serde::{Deserialize, Serialize};

use crate::combinatorics::{rational, Rational};
use crate::error::{Error, Result};

/// Parameters `(n, k, l)` of the rule, with `1 ≤ l ≤ k ≤ n−1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct RuleParams {
    n: usize,
    k: usize,
    l: usize,
}

#[derive(Deserialize)]
struct RawParams {
    n: usize,
    k: usize,
    l: usize,
}

impl TryFrom<RawParams> for RuleParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        RuleParams::new(raw.n, raw.k, raw.l)
    }
}

impl RuleParams {
    pub fn new(n: usize, k: usize, l: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::PoolTooSmall { n });
        }
        if k < 1 || k > n - 1 {
            return Err(Error::RejectionOutOfRange { k, n });
        }
        if l < 1 {
            return Err(Error::ThresholdZero { l });
        }
        if l > k {
            return Err(Error::ThresholdAboveRejection { l, k });
        }
        Ok(Self { n, k, l })
    }

    /// Pool size.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Length of the rejection phase.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Rank threshold within the rejection phase.
    pub fn l(&self) -> usize {
        self.l
    }

    /// Every valid `(k, l)` for pool size `n`, ordered by `k` then `l`.
    pub fn all(n: usize) -> impl Iterator<Item = RuleParams> {
        (1..n).flat_map(move |k| (1..=k).map(move |l| RuleParams { n, k, l }))
    }
}

/// A permutation `a_1..a_n` of `{1..n}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(values: Vec<usize>) -> Result<Self> {
        let n = values.len();
        let mut seen = vec![false; n + 1];
        for &v in &values {
            if v == 0 || v > n || seen[v] {
                return Err(Error::NotAPermutation { n });
            }
            seen[v] = true;
        }
        Ok(Self(values))
    }

    /// The identity arrangement `1, 2, …, n`.
    pub fn identity(n: usize) -> Self {
        Self((1..=n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

/// What the rule did on one permutation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SelectionOutcome {
    /// Test value: the `l`-th smallest of `a_1..a_k`.
    pub t: usize,
    /// Offset of the accepted arrival after the rejection phase, `1 ≤ j ≤ n−k`.
    pub j: usize,
    /// Rank of the accepted arrival, `a_{k+j}`.
    pub s: usize,
    /// Whether some arrival after the rejection phase beat `t`.
    pub success: bool,
}

/// Cutoff `d` of the truncated reward, `1 ≤ d ≤ n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RewardHorizon(usize);

impl RewardHorizon {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if d < 1 || d > n {
            return Err(Error::HorizonOutOfRange { d, n });
        }
        Ok(Self(d))
    }

    pub fn d(&self) -> usize {
        self.0
    }
}

/// Runs `R_n(k, l)` on `perm`.
pub fn run_rule(params: &RuleParams, perm: &Permutation) -> Result<SelectionOutcome> {
    if perm.len() != params.n {
        return Err(Error::PermutationLength {
            expected: params.n,
            got: perm.len(),
        });
    }
    let mut scratch = Vec::with_capacity(params.k);
    Ok(select(params, perm.as_slice(), &mut scratch))
}

/// [`run_rule`] without validation, for hot loops. `scratch` is reused
/// between calls to avoid allocating.
pub(crate) fn select(params: &RuleParams, values: &[usize], scratch: &mut Vec<usize>) -> SelectionOutcome {
    let (n, k, l) = (params.n, params.k, params.l);
    debug_assert_eq!(values.len(), n);

    scratch.clear();
    scratch.extend_from_slice(&values[..k]);
    let (_, &mut t, _) = scratch.select_nth_unstable(l - 1);

    match values[k..].iter().position(|&a| a < t) {
        Some(i) => SelectionOutcome {
            t,
            j: i + 1,
            s: values[k + i],
            success: true,
        },
        None => SelectionOutcome {
            t,
            j: n - k,
            s: values[n - 1],
            success: false,
        },
    }
}

/// `v_{n,d}(s)`: `n+1−s` if `s ≤ d`, else 0.
pub fn reward(horizon: RewardHorizon, n: usize, s: usize) -> Result<Rational> {
    if s < 1 || s > n {
        return Err(Error::RankOutOfRange { s, n });
    }
    Ok(rational(reward_value(horizon.d(), n, s)))
}

#[inline]
pub(crate) fn reward_value(d: usize, n: usize, s: usize) -> u64 {
    if s <= d {
        (n + 1 - s) as u64
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn outcome(n: usize, k: usize, l: usize, perm: &[usize]) -> SelectionOutcome {
        let params = RuleParams::new(n, k, l).unwrap();
        run_rule(&params, &Permutation::new(perm.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn run_rule_examples() {
        assert_eq!(
            outcome(3, 1, 1, &[3, 1, 2]),
            SelectionOutcome {
                t: 3,
                j: 1,
                s: 1,
                success: true
            }
        );
        assert_eq!(
            outcome(3, 1, 1, &[1, 2, 3]),
            SelectionOutcome {
                t: 1,
                j: 2,
                s: 3,
                success: false
            }
        );
        assert_eq!(
            outcome(5, 3, 2, &[4, 2, 5, 3, 1]),
            SelectionOutcome {
                t: 4,
                j: 1,
                s: 3,
                success: true
            }
        );
    }

    #[test]
    fn last_arrival_when_k_is_n_minus_one() {
        assert_eq!(
            outcome(4, 3, 1, &[2, 3, 4, 1]),
            SelectionOutcome {
                t: 2,
                j: 1,
                s: 1,
                success: true
            }
        );
        assert_eq!(
            outcome(4, 3, 1, &[1, 3, 2, 4]),
            SelectionOutcome {
                t: 1,
                j: 1,
                s: 4,
                success: false
            }
        );
    }

    #[test]
    fn params_validation() {
        assert!(matches!(RuleParams::new(1, 1, 1), Err(Error::PoolTooSmall { .. })));
        assert!(matches!(
            RuleParams::new(3, 3, 1),
            Err(Error::RejectionOutOfRange { .. })
        ));
        assert!(matches!(
            RuleParams::new(3, 0, 1),
            Err(Error::RejectionOutOfRange { .. })
        ));
        assert!(matches!(RuleParams::new(3, 2, 0), Err(Error::ThresholdZero { .. })));
        let err = RuleParams::new(3, 2, 3).unwrap_err();
        assert!(err.to_string().starts_with("l must satisfy l ≤ k"));
    }

    #[test]
    fn params_deserialize_validates() {
        let ok: RuleParams = serde_json::from_str(r#"{"n":5,"k":3,"l":2}"#).unwrap();
        assert_eq!((ok.n(), ok.k(), ok.l()), (5, 3, 2));
        assert!(serde_json::from_str::<RuleParams>(r#"{"n":5,"k":2,"l":3}"#).is_err());
    }

    #[test]
    fn all_params_ordered_and_complete() {
        let all: Vec<_> = RuleParams::all(4).map(|p| (p.k(), p.l())).collect();
        assert_eq!(all, vec![(1, 1), (2, 1), (2, 2), (3, 1), (3, 2), (3, 3)]);
    }

    #[test]
    fn permutation_validation() {
        assert!(Permutation::new(vec![1, 2, 2]).is_err());
        assert!(Permutation::new(vec![0, 1, 2]).is_err());
        assert!(Permutation::new(vec![1, 4, 2]).is_err());
        assert!(Permutation::new(vec![3, 1, 2]).is_ok());
        let params = RuleParams::new(3, 1, 1).unwrap();
        assert!(matches!(
            run_rule(&params, &Permutation::identity(4)),
            Err(Error::PermutationLength { expected: 3, got: 4 })
        ));
    }

    #[test]
    fn reward_examples() {
        let h2 = RewardHorizon::new(2, 4).unwrap();
        assert_eq!(reward(h2, 4, 1).unwrap(), rational(4));
        assert_eq!(reward(h2, 4, 3).unwrap(), rational(0));
        let h4 = RewardHorizon::new(4, 4).unwrap();
        assert_eq!(reward(h4, 4, 4).unwrap(), rational(1));
        assert!(reward(h4, 4, 5).is_err());
        assert!(reward(h4, 4, 0).is_err());
        assert!(RewardHorizon::new(5, 4).is_err());
        assert!(RewardHorizon::new(0, 4).is_err());
    }

    fn arb_case() -> impl Strategy<Value = (RuleParams, Vec<usize>)> {
        (2usize..14)
            .prop_flat_map(|n| (Just(n), 1..n))
            .prop_flat_map(|(n, k)| (Just(n), Just(k), 1..=k, any::<u64>()))
            .prop_map(|(n, k, l, seed)| {
                let mut perm: Vec<usize> = (1..=n).collect();
                perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
                (RuleParams::new(n, k, l).unwrap(), perm)
            })
    }

    proptest! {
        #[test]
        fn first_crossing_property((params, perm) in arb_case()) {
            let o = run_rule(&params, &Permutation::new(perm.clone()).unwrap()).unwrap();
            let k = params.k();
            prop_assert_eq!(o.s, perm[k + o.j - 1]);
            prop_assert!(perm[k..k + o.j - 1].iter().all(|&a| a > o.t));
            if o.success {
                prop_assert!(o.s < o.t);
            } else {
                prop_assert_eq!(o.j, params.n() - k);
                prop_assert!(perm[k..].iter().all(|&a| a > o.t));
            }
            let mut head = perm[..k].to_vec();
            head.sort_unstable();
            prop_assert_eq!(o.t, head[params.l() - 1]);
        }

        #[test]
        fn failure_iff_top_l_in_rejection_phase((params, perm) in arb_case()) {
            let o = run_rule(&params, &Permutation::new(perm.clone()).unwrap()).unwrap();
            let head = &perm[..params.k()];
            let top_l_hidden = (1..=params.l()).all(|r| head.contains(&r));
            prop_assert_eq!(!o.success, top_l_hidden);
        }

        #[test]
        fn full_horizon_reward_is_complement(n in 1usize..50, s_off in 0usize..50) {
            let s = 1 + s_off % n;
            let h = RewardHorizon::new(n, n).unwrap();
            prop_assert_eq!(reward(h, n, s).unwrap(), rational(n + 1 - s));
        }
    }
}
