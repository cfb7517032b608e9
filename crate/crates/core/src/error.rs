//! Error type shared across the library.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows} x {cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric: |S[{i},{j}] - S[{j},{i}]| = {deviation:.3e}")]
    NotSymmetric { i: usize, j: usize, deviation: f64 },

    #[error("entry ({i},{j}) = {value} lies outside [0, 1]")]
    ProbabilityOutOfRange { i: usize, j: usize, value: f64 },

    #[error("diagonal entry ({i},{i}) = {value} must be zero when loops are disallowed")]
    NonzeroDiagonal { i: usize, value: f64 },

    #[error("entry ({i},{j}) = {value} is not binary")]
    NotBinary { i: usize, j: usize, value: f64 },

    #[error("block structure invalid: {0}")]
    InvalidBlockModel(String),

    #[error("invalid spectral window: require 0 < alpha < beta, got alpha = {alpha}, beta = {beta}")]
    InvalidWindow { alpha: f64, beta: f64 },

    #[error("vector is not unit norm: ||v|| = {norm}")]
    NotUnitNorm { norm: f64 },

    #[error("local spectrum invalid: {0}")]
    InvalidLocalSpectrum(String),

    #[error("concentration profile requires positive constants, got C = {prefactor}, c = {rate}, gamma = {exponent}")]
    InvalidProfile {
        prefactor: f64,
        rate: f64,
        exponent: f64,
    },

    #[error("deviation scale must be positive, got t = {t}")]
    NonPositiveScale { t: f64 },

    #[error(
        "net epsilon {net_eps} is inadmissible for this profile: \
         the tail exponent would be nonpositive; minimal admissible net epsilon is {min_admissible:.6}"
    )]
    InadmissibleNetEps { net_eps: f64, min_admissible: f64 },

    #[error(
        "deviation scale t = {t} is inadmissible for index k = {k}: \
         maximal admissible t is {max_admissible:.6}"
    )]
    InadmissibleScale { k: usize, t: f64, max_admissible: f64 },

    #[error("index k = {k} out of range [1, {d}]")]
    IndexOutOfRange { k: usize, d: usize },

    #[error("threshold ordering violated: {0}")]
    ThresholdOrdering(String),

    #[error(
        "residual condition failed: eps^2 = {eps_sq:.6e} must be strictly below \
         (beta - eta)(eta - alpha) = {limit:.6e}"
    )]
    ResidualTooLarge { eps_sq: f64, limit: f64 },

    #[error("window is unbounded above; use the infinite-beta lower deficit instead")]
    UnboundedWindow,

    #[error("noise norm estimate must be the analytic tail threshold matching this bound")]
    NormSourceMismatch,

    #[error(
        "level separation insufficient: gap = {gap:.6} but the window construction \
         requires gap > {required:.6}"
    )]
    InsufficientSeparation { gap: f64, required: f64 },

    #[error(
        "exhaustive subset statistic refused: n = {n}, m = {m} exceeds the guard \
         n <= {max_n}, m <= {max_m} (combinatorially prohibitive)"
    )]
    SubsetGuard {
        n: usize,
        m: usize,
        max_n: usize,
        max_m: usize,
    },

    #[error("target probability {target} unreachable: the floor is capped at {limit:.12}")]
    UnreachableTarget { target: f64, limit: f64 },

    #[error("confidence intervals overlap for every signal strength in (0, {max_eps}]")]
    NoSeparation { max_eps: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of a mathematical precondition (as opposed to
    /// malformed configuration or input parsing).
    pub fn is_domain_error(&self) -> bool {
        matches!(
            self,
            Error::InadmissibleNetEps { .. }
                | Error::InadmissibleScale { .. }
                | Error::ThresholdOrdering(_)
                | Error::ResidualTooLarge { .. }
                | Error::UnboundedWindow
                | Error::NormSourceMismatch
                | Error::InsufficientSeparation { .. }
                | Error::SubsetGuard { .. }
                | Error::UnreachableTarget { .. }
                | Error::NoSeparation { .. }
        )
    }
}
