// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("orbital index {index} outside 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("orbital {0} occupied twice")]
    DuplicateOrbital(usize),

    #[error("invalid counts: N={n}, eta={eta}")]
    InvalidCounts { n: usize, eta: usize },

    #[error("determinant length {got} does not match electron count {expected}")]
    ElectronCountMismatch { expected: usize, got: usize },

    #[error("basis of {0} spin-orbitals exceeds the supported maximum of 128")]
    BasisTooLarge(usize),

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("bound violated for orbital {orbital} ({quantity}) at {location:?}")]
    BoundViolated {
        orbital: usize,
        quantity: &'static str,
        location: [f64; 3],
    },

    #[error("angular momentum {0} not supported (max 2)")]
    UnsupportedAngularMomentum(u32),

    #[error("delta {delta:e} above admissibility limit {limit:e}")]
    DeltaTooLarge { delta: f64, limit: f64 },

    #[error("delta {delta:e} needs {grid_n} points per axis (cap {cap})")]
    DeltaTooSmall { delta: f64, grid_n: u64, cap: u64 },

    #[error("quadrature specs do not match: {0}")]
    SpecMismatch(String),

    #[error("zeta must be positive, got {0}")]
    InvalidZeta(f64),

    #[error("budget infeasible: {0}")]
    BudgetInfeasible(String),

    #[error("dimension {dim} exceeds dense limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("{terms} Riemann terms exceed the storage cap of {limit}")]
    TooManyTerms { terms: u64, limit: u64 },

    #[error("register simulation too large: {0}")]
    RegisterTooLarge(String),

    #[error("invalid color tuple: {0}")]
    InvalidColor(String),

    #[error("malformed gamma index: {0}")]
    MalformedGamma(String),

    #[error("pattern mismatch: {0}")]
    PatternMismatch(String),

    #[error("state of length {got} does not match dimension {expected}")]
    StateLength { expected: usize, got: usize },

    #[error("config: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
