//! Crate-wide error type.
//!
//! Domain failures carry enough context to act as witnesses: the offending
//! variable, index, or residual is embedded in the message.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Arity or dimension disagreement between values that must share one.
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),

    /// The p-adic norm context was given a non-prime base.
    #[error("invalid prime: {0}")]
    InvalidPrime(String),

    /// A q-analogue denominator vanished: q is a root of unity up to the
    /// working order, so divided powers are undefined there.
    #[error("root of unity: {0}")]
    RootOfUnity(String),

    /// A degenerate twist (s_i = x_i) was used where a genuine one is
    /// required; the dedicated identity kind must be used instead.
    #[error("identity twist: {0}")]
    IdentityTwist(String),

    /// sigma_i(f) - f was not divisible by sigma_i(x_i) - x_i. Cannot happen
    /// for substitution twists on polynomials; kept as a defensive check.
    #[error("indivisible difference: {0}")]
    Indivisible(String),

    /// Action recovery left a residual beyond the stated order bound.
    #[error("reconstruction failed: {0}")]
    Reconstruction(String),

    /// A connection failed the integrability check.
    #[error("non-integrable connection: {0}")]
    NonIntegrable(String),

    /// Monomial-basis and twisted-basis eta-norms disagreed in the isometry
    /// regime. Unreachable when preconditions hold; diagnostic hook.
    #[error("basis norm mismatch: {0}")]
    BasisNormMismatch(String),

    /// A first-order Taylor coefficient disagreed with the difference
    /// quotient. No substitution twist triggers this; diagnostic hook for
    /// non-classical configurations.
    #[error("non-classical coordinate: {0}")]
    NonClassical(String),

    /// Expression or config text failed to parse.
    #[error("parse error: {0}")]
    Parse(String),

    /// Malformed or inconsistent algebra configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Any other domain-level precondition violation.
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
