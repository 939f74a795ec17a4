// Copyright 2026 The infodyn Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A constructor argument violates the type's invariants. `field` names
    /// the offending parameter.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    /// Every likelihood underflowed at the observation.
    #[error("marginal density {marginal:e} at observation {xi} is below the underflow floor")]
    ZeroMarginal { xi: f64, marginal: f64 },

    #[error("quadrature did not reach tolerance {tolerance:e} (error estimate {error:e})")]
    QuadratureFailure { tolerance: f64, error: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The analytic averaging formula only holds for zero-phase amplitudes.
    #[error("amplitude {index} carries a nonzero phase")]
    PhasePresent { index: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("renormalisation residue {residue:e} at step {step} exceeds the stability limit")]
    StabilityViolation { step: usize, residue: f64 },

    #[error("only {collapsed} of {total} trajectories collapsed by the horizon")]
    NonConverged { collapsed: usize, total: usize },

    #[error("decay fit failed: {0}")]
    FitFailure(String),

    #[error("cannot erase a negative number of bits ({0})")]
    NegativeBits(f64),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for the failures a runner reports as numerical rather than as
    /// bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ZeroMarginal { .. }
                | Error::QuadratureFailure { .. }
                | Error::NumericalFailure(_)
                | Error::StabilityViolation { .. }
                | Error::NonConverged { .. }
                | Error::FitFailure(_)
        )
    }
}
