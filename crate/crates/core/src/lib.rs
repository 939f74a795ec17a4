// Copyright 2026 The infodyn Authors
// SPDX-License-Identifier: Apache-2.0

//! Signal-detection dynamics.
//!
//! A hidden quantity `X` taking one of finitely many values is observed
//! through additive noise, `ξ = X + ε`. Everything in this crate is built on
//! the resulting Bayes update:
//!
//! * [`signal`]: priors, posteriors and the entropy/information functionals
//!   of the classical model.
//! * [`quantum`]: the same update acting on the moduli of a state vector in
//!   the energy basis, the observer-averaged density matrix and the
//!   decoherence kernel.
//! * [`unravel`]: repeated updates in continuous time, giving stochastic
//!   state reduction and ensemble diagnostics.
//! * [`plant`]: bearing inference on a circle and the Landauer ledger for
//!   the processed information.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod noise;
pub mod plant;
pub mod quadrature;
pub mod quantum;
pub mod rng;
pub mod signal;
pub mod stats;
pub mod unravel;

pub use error::{Error, Result};
pub use noise::{NoiseDensity, NoiseKind};
pub use plant::{CircularScenario, InfoLedger};
pub use quadrature::Quadrature;
pub use quantum::{DensityMatrix, QuantumSystem, StateVector};
pub use rng::SeedStream;
pub use signal::{Observation, Posterior, SignalModel};
pub use unravel::{DynamicsSpec, EnsembleSummary, Trajectory};

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;

/// Convert nats to bits.
pub fn nats_to_bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}
