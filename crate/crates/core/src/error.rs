use thiserror::Error;

/// Errors raised by parameter validation and domain checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("n must satisfy n ≥ 2 (got n = {n})")]
    PoolTooSmall { n: usize },

    #[error("k must satisfy 1 ≤ k ≤ n−1 (got k = {k}, n = {n})")]
    RejectionOutOfRange { k: usize, n: usize },

    #[error("l must satisfy l ≥ 1 (got l = {l})")]
    ThresholdZero { l: usize },

    #[error("l must satisfy l ≤ k (got l = {l}, k = {k})")]
    ThresholdAboveRejection { l: usize, k: usize },

    #[error("d must satisfy 1 ≤ d ≤ n (got d = {d}, n = {n})")]
    HorizonOutOfRange { d: usize, n: usize },

    #[error("permutation has length {got}, expected {expected}")]
    PermutationLength { expected: usize, got: usize },

    #[error("sequence is not a permutation of 1..={n}")]
    NotAPermutation { n: usize },

    #[error("rank s = {s} outside 1..={n}")]
    RankOutOfRange { s: usize, n: usize },

    #[error("test value t = {t} outside {lo}..={hi}")]
    TestValueOutOfRange { t: usize, lo: usize, hi: usize },

    #[error("selected rank s = {s} outside {lo}..={hi}")]
    SelectionOutOfRange { s: usize, lo: usize, hi: usize },

    #[error("k = {k} outside 1..={hi}")]
    HarmonicRange { k: usize, hi: usize },

    #[error("two-cycle Stirling number needs n ≥ 2 (got n = {n})")]
    StirlingRange { n: usize },

    #[error("closed-form reward is only available for d ∈ {{1, 2}} (got d = {d})")]
    NoClosedForm { d: usize },

    #[error("exhaustive enumeration capped at n ≤ {cap} (got n = {n})")]
    OracleCap { n: usize, cap: usize },

    #[error("sample count must be at least 1")]
    NoSamples,

    #[error("asymptotic estimate needs n ≥ 3 when l is not given (got n = {n})")]
    AsymptoticDomain { n: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
