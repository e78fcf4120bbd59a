use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("q-series order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("non-unit series: |constant term| = {magnitude:e} is below the inversion floor {floor:e}")]
    NonUnit { magnitude: f64, floor: f64 },

    #[error("theta function evaluated at z = 0")]
    ZeroArgument,

    #[error("weight has s-exponent {s_exp} but the evaluation point has no s value")]
    MissingS { s_exp: i32 },

    #[error("lattice rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },

    #[error("invalid root of unity zeta_{n}^{k}: need n >= 2 and k not divisible by n")]
    InvalidRootOfUnity { n: u32, k: i64 },

    #[error("invalid sampler option: {0}")]
    InvalidSampler(String),

    #[error("could not sample a generic point after {attempts} attempts")]
    SamplingExhausted { attempts: usize },

    #[error(
        "ill-conditioned denominator at fixed point {point}, weight {weight}: \
         |1 - 1/w| = {magnitude:e}"
    )]
    IllConditionedWeight {
        point: usize,
        weight: usize,
        magnitude: f64,
    },

    #[error("invalid Chern root configuration: {0}")]
    InvalidConfig(String),

    #[error("evaluation point s is within {distance:e} of a pole")]
    NearPole { distance: f64 },

    #[error("poles are not simple: roots {first} and {second} coincide (gap {gap:e})")]
    NonSimplePole {
        first: usize,
        second: usize,
        gap: f64,
    },

    #[error("no usable annulus: pole moduli span [{min:e}, {max:e}]")]
    NoAnnulus { min: f64, max: f64 },

    #[error("configuration has virtual (negative-sign) roots; normalize it first")]
    VirtualConfig,

    #[error("rank condition violated: r+ = {r_plus}, r- = {r_minus} not congruent mod {n}")]
    RankCondition { r_plus: usize, r_minus: usize, n: u32 },

    #[error("invalid flag: {0}")]
    InvalidFlag(String),

    #[error("flag lengths differ: {left} vs {right}")]
    FlagLengthMismatch { left: usize, right: usize },

    #[error("enumeration budget exceeded: d1 + d2 = {total} > {limit}")]
    BudgetExceeded { total: u32, limit: u32 },

    #[error("input requires spin mode (K = 2D)")]
    NotSpin,

    #[error("{0}")]
    Usage(String),
}
