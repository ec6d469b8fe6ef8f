//! Exact integer and rational primitives.
//!
//! Every probability and expectation in this crate is computed as a
//! [`Rational`], which is an arbitrary-precision fraction kept in lowest
//! terms with a positive denominator. Nothing here rounds.
//!
//! The `check_*` functions evaluate both sides of the counting identities
//! behind the closed forms in [`crate::analysis`]. They are exact, so a
//! `false` is always a bug.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact arbitrary-precision rational number.
pub type Rational = BigRational;

/// Lifts an integer into a [`Rational`].
pub fn rational(value: impl Into<BigInt>) -> Rational {
    Rational::from_integer(value.into())
}

/// `numer / denom` as a reduced [`Rational`]. Panics if `denom` is zero.
pub fn ratio(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Rational {
    Rational::new(numer.into(), denom.into())
}

/// `C(n, r)` as an integer; zero when `r > n`.
pub fn choose(n: usize, r: usize) -> BigInt {
    if r > n {
        return BigInt::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigInt::one();
    for i in 1..=r {
        acc *= n - r + i;
        acc /= i;
    }
    acc
}

/// Binomial `C(n, r)`, zero when `r < 0` or `r > n`.
pub fn binomial(n: u64, r: i64) -> Rational {
    if r < 0 {
        return Rational::zero();
    }
    rational(choose(n as usize, r as usize))
}

/// Falling factorial `n·(n−1)·…·(n−m+1)`; one when `m = 0`.
pub fn falling(n: usize, m: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..m {
        if i > n {
            return BigInt::zero();
        }
        acc *= n - i;
    }
    acc
}

/// `m!` as an integer.
pub fn factorial(m: usize) -> BigInt {
    falling(m, m)
}

/// Sum of terms `numer / denom` with machine-sized denominators.
///
/// Keeps a running least common multiple as the denominator, so each
/// addition is a handful of big-by-small operations with no gcd on two
/// bignums. The result is reduced once, in [`FractionSum::into_rational`].
#[derive(Debug, Clone)]
pub(crate) struct FractionSum {
    numer: BigInt,
    denom: BigInt,
}

impl FractionSum {
    pub(crate) fn new() -> Self {
        Self {
            numer: BigInt::zero(),
            denom: BigInt::one(),
        }
    }

    pub(crate) fn add(&mut self, numer: &BigInt, denom: u64) {
        debug_assert!(denom > 0);
        let rem = (&self.denom % denom)
            .to_u64()
            .expect("remainder of a positive modulus fits");
        let scale = denom / rem.gcd(&denom);
        if scale != 1 {
            self.numer *= scale;
            self.denom *= scale;
        }
        let factor = &self.denom / denom;
        self.numer += numer * factor;
    }

    pub(crate) fn into_rational(self) -> Rational {
        Rational::new(self.numer, self.denom)
    }
}

/// `Σ_{j=k}^{n−1} 1/j`, the harmonic difference appearing in the `l = 1`
/// reward formulas.
pub fn harmonic_diff(n: usize, k: usize) -> Result<Rational> {
    if n < 2 || k < 1 || k > n - 1 {
        return Err(Error::HarmonicRange {
            k,
            hi: n.saturating_sub(1),
        });
    }
    let one = BigInt::one();
    let mut sum = FractionSum::new();
    for j in k..n {
        sum.add(&one, j as u64);
    }
    Ok(sum.into_rational())
}

/// Unsigned Stirling number of the first kind `[n 2]`: arrangements of
/// `{1..n}` into exactly two disjoint nonempty cycles.
///
/// Evaluated as `(n−1)! · Σ_{t=1}^{n−1} 1/t`.
pub fn stirling_cycle2(n: usize) -> Result<Rational> {
    if n < 2 {
        return Err(Error::StirlingRange { n });
    }
    Ok(rational(factorial(n - 1)) * harmonic_diff(n, 1)?)
}

/// `Σ_{t=l}^{n−k+l} C(n−t, k−l)·C(t, l) = C(n+1, k+1)`: both sides count
/// `(k+1)`-subsets of `{1..n+1}` by their `(l+1)`-st smallest element.
///
/// Returns `false` when `1 ≤ l ≤ k ≤ n−1` does not hold.
pub fn check_subset_identity(n: usize, k: usize, l: usize) -> bool {
    if !(1 <= l && l <= k && k < n) {
        return false;
    }
    let lhs: BigInt = (l..=n - k + l).map(|t| choose(n - t, k - l) * choose(t, l)).sum();
    lhs == choose(n + 1, k + 1)
}

/// `Σ_{t=2}^{n−k+1} C(n−t, k−1)/(t−1) = C(n−1, k−1)·Σ_{j=k}^{n−1} 1/j`.
///
/// Returns `false` when `1 ≤ k ≤ n−1` does not hold.
pub fn check_harmonic_identity(n: usize, k: usize) -> bool {
    if !(1 <= k && k < n) {
        return false;
    }
    let lhs: Rational = (2..=n - k + 1).map(|t| ratio(choose(n - t, k - 1), t - 1)).sum();
    let Ok(h) = harmonic_diff(n, k) else {
        return false;
    };
    lhs == rational(choose(n - 1, k - 1)) * h
}

/// `Σ_{t=l+1}^{n−k+l} C(t−1, l−1)·C(n−t, k−l)/(t−1)
///  = (C(n−1, k−1) − C(n−l, k−l)) / (l−1)`.
///
/// Returns `false` when `2 ≤ l ≤ k ≤ n−1` does not hold.
pub fn check_l2_identity(n: usize, k: usize, l: usize) -> bool {
    if !(2 <= l && l <= k && k < n) {
        return false;
    }
    let lhs: Rational = (l + 1..=n - k + l)
        .map(|t| ratio(choose(t - 1, l - 1) * choose(n - t, k - l), t - 1))
        .sum();
    let rhs = ratio(choose(n - 1, k - 1) - choose(n - l, k - l), l - 1);
    lhs == rhs
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Counts permutations of `0..n` with exactly two cycles, by brute force.
    fn two_cycle_permutations(n: usize) -> usize {
        use itertools::Itertools;
        (0..n).permutations(n).filter(|p| cycle_count(p) == 2).count()
    }

    fn cycle_count(p: &[usize]) -> usize {
        let mut seen = vec![false; p.len()];
        let mut cycles = 0;
        for start in 0..p.len() {
            if seen[start] {
                continue;
            }
            cycles += 1;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = p[i];
            }
        }
        cycles
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial(5, 2), rational(10));
        assert_eq!(binomial(4, 0), rational(1));
        assert_eq!(binomial(3, 5), rational(0));
        assert_eq!(binomial(3, -1), rational(0));
        assert_eq!(binomial(0, 0), rational(1));
    }

    #[test]
    fn harmonic_diff_examples() {
        assert_eq!(harmonic_diff(4, 1).unwrap(), ratio(11, 6));
        assert_eq!(harmonic_diff(3, 1).unwrap(), ratio(3, 2));
        assert_eq!(harmonic_diff(10, 9).unwrap(), ratio(1, 9));
    }

    #[test]
    fn harmonic_diff_rejects_bad_k() {
        assert!(harmonic_diff(5, 0).is_err());
        assert!(harmonic_diff(5, 5).is_err());
        assert!(harmonic_diff(1, 1).is_err());
    }

    #[test]
    fn stirling_against_cycle_enumeration() {
        assert_eq!(stirling_cycle2(2).unwrap(), rational(1));
        assert_eq!(stirling_cycle2(3).unwrap(), rational(3));
        assert_eq!(stirling_cycle2(4).unwrap(), rational(11));
        for n in 2..=7 {
            assert_eq!(
                stirling_cycle2(n).unwrap(),
                rational(two_cycle_permutations(n)),
                "n = {n}"
            );
        }
        assert!(stirling_cycle2(1).is_err());
    }

    #[test]
    fn identity_examples() {
        assert!(check_subset_identity(5, 2, 1));
        assert!(check_subset_identity(3, 2, 2));
        assert!(check_subset_identity(10, 7, 3));

        assert!(check_harmonic_identity(3, 1));
        assert!(check_harmonic_identity(4, 2));
        assert!(check_harmonic_identity(12, 5));

        assert!(check_l2_identity(4, 2, 2));
        assert!(check_l2_identity(5, 3, 2));
        assert!(check_l2_identity(15, 9, 4));
    }

    #[test]
    fn identity_checks_reject_bad_domain() {
        assert!(!check_subset_identity(3, 3, 1));
        assert!(!check_harmonic_identity(3, 0));
        assert!(!check_l2_identity(5, 3, 1));
    }

    #[test]
    fn harmonic_identity_small_expansion() {
        // n = 3, k = 1: 1/1 + 1/2
        let lhs = ratio(1, 1) + ratio(1, 2);
        assert_eq!(lhs, ratio(3, 2));
        assert_eq!(harmonic_diff(3, 1).unwrap(), lhs);
    }

    #[test]
    fn fraction_sum_matches_naive_sum() {
        let mut fast = FractionSum::new();
        let mut naive = Rational::zero();
        for d in 1..60u64 {
            let numer = BigInt::from(d * d + 7);
            fast.add(&numer, d);
            naive += ratio(numer, d);
        }
        assert_eq!(fast.into_rational(), naive);
    }

    #[test]
    fn falling_and_factorial() {
        assert_eq!(falling(5, 2), BigInt::from(20));
        assert_eq!(falling(5, 0), BigInt::from(1));
        assert_eq!(falling(3, 4), BigInt::from(0));
        assert_eq!(factorial(6), BigInt::from(720));
    }

    #[test]
    fn pascal_rule() {
        for n in 1..=40usize {
            for r in 0..=n {
                let lhs = choose(n, r);
                let rhs = if r == 0 {
                    choose(n - 1, 0)
                } else {
                    choose(n - 1, r - 1) + choose(n - 1, r)
                };
                assert_eq!(lhs, rhs, "C({n},{r})");
            }
        }
    }

    #[test]
    fn harmonic_diff_recurrence() {
        for n in 3..=40 {
            for k in 1..=n - 2 {
                assert_eq!(
                    harmonic_diff(n, k).unwrap(),
                    harmonic_diff(n, k + 1).unwrap() + ratio(1, k)
                );
            }
        }
    }

    proptest! {
        #[test]
        fn rational_add_sub_round_trip(
            a in -1000i64..1000, b in 1i64..1000,
            c in -1000i64..1000, d in 1i64..1000,
        ) {
            let x = ratio(a, b);
            let y = ratio(c, d);
            prop_assert_eq!((&x + &y) - &y, x.clone());
            prop_assert!(x.denom() > &BigInt::zero());
            prop_assert!(x.numer().gcd(x.denom()) == BigInt::one() || x.is_zero());
        }
    }
}
