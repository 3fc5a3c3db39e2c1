//! Concentration of linear statistics of Curie-Weiss spins.
//!
//! The library computes, for the mean-field spin measure
//! P(eps = sigma) ∝ exp{(d beta / n) (sum sigma_j)^2 + h sum sigma_j},
//! the Littlewood-Offord style small-ball quantities
//!
//! * `Q_n^+` — the largest probability that sum v_j eps_j lands in an open
//!   window of length 2 when all weights satisfy v_j >= 1, and
//! * `Q_n`   — the same supremum when only |v_j| >= 1 is required,
//!
//! both exactly at finite n ([`exact`]) and through asymptotic expansion
//! ladders in powers of n ([`series`]), with independent quadrature and
//! brute-force oracles ([`oracle`]) cross-validating every claim, plus the
//! mean-field analysis the expansions are anchored to ([`model`]).
//!
//! Everything is deterministic: fixed seeds, sorted JSON keys, shortest
//! round-trip float formatting.

// Frozen reference constants keep their full derivation digits; `!(x > 0.0)`
// style guards deliberately reject NaN; parity reads better as `n % 2`.
#![allow(clippy::excessive_precision)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::manual_is_multiple_of)]

pub mod exact;
pub mod model;
pub mod oracle;
pub mod quad;
pub mod scan;
pub mod series;
pub mod special;
pub mod verify;

pub use exact::{Attainment, ConcentrationResult, LogValue};
pub use model::{MeanFieldSolution, ModelParams, Regime};
pub use oracle::{AtomDistribution, UnimodalWeights};
pub use quad::QuadConfig;
pub use series::{ExpansionCoeffs, ExpansionKind, Power};

/// Library-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("beta must be strictly positive here: {0}")]
    ZeroBeta(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parity error: {0}")]
    Parity(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("order outside validated range: {0}")]
    OrderRange(String),
    #[error("weights are not unimodal")]
    NonUnimodal,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
