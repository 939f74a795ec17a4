// Copyright 2026 The infodyn Authors
// SPDX-License-Identifier: Apache-2.0

//! Finite-dimensional states in the energy basis, single-shot energy
//! information acquisition, and the observer-averaged density matrix.
//!
//! Acquiring a noisy reading `ξ = E + ε` of the energy rescales each
//! amplitude modulus from `√p_i` to `√π_i(ξ)` and keeps its phase. An
//! observer who does not know `ξ` describes the system by the average of
//! `|Ψ'⟩⟨Ψ'|`, whose off-diagonal entries are damped by the overlap
//! `Λ_ij = ∫ √(f(ξ) f(ξ + ω_ij)) dξ`.

use nalgebra::{DMatrix, DVector};

use crate::noise::NoiseDensity;
use crate::quadrature::Quadrature;
use crate::rng::{chunked_fold, SeedStream};
use crate::signal::{bayes_update, sample_index};
use crate::stats::bootstrap_std_err;
use crate::{Error, Result, C64};

const NORM_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
/// Eigenvalues in `[-EIGEN_CLIP, 0)` are rounding noise.
pub const EIGEN_CLIP: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumSystem {
    energies: Vec<f64>,
}

impl QuantumSystem {
    pub fn new(energies: Vec<f64>) -> Result<Self> {
        if energies.len() < 2 {
            return Err(Error::invalid("energies", "need at least two levels"));
        }
        if let Some(e) = energies.iter().find(|e| !e.is_finite()) {
            return Err(Error::invalid("energies", format!("must be finite, got {e}")));
        }
        Ok(QuantumSystem { energies })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `ω_ij = E_i - E_j`.
    pub fn gap(&self, i: usize, j: usize) -> f64 {
        self.energies[i] - self.energies[j]
    }

    pub fn gaps(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.gap(i, j))
    }

    /// The Hamiltonian as a diagonal matrix in its own eigenbasis.
    pub fn hamiltonian(&self) -> DMatrix<C64> {
        DMatrix::from_diagonal(&DVector::from_iterator(
            self.dim(),
            self.energies.iter().map(|&e| C64::new(e, 0.0)),
        ))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<C64>,
}

impl StateVector {
    pub fn new(amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::invalid("state", "must have at least one amplitude"));
        }
        let norm = amplitudes.norm_squared();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid("state", format!("squared norm {norm} is not 1")));
        }
        Ok(StateVector { amplitudes })
    }

    /// Scales `amplitudes` to unit norm.
    pub fn normalised(amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid("state", "cannot normalise a zero or non-finite vector"));
        }
        Ok(StateVector {
            amplitudes: amplitudes / C64::new(norm, 0.0),
        })
    }

    /// Zero-phase state with moduli `√p_i`.
    pub fn from_probabilities(probs: &[f64]) -> Result<Self> {
        crate::signal::check_distribution("state.probabilities", probs)?;
        let amps = DVector::from_iterator(probs.len(), probs.iter().map(|p| C64::new(p.sqrt(), 0.0)));
        Self::normalised(amps)
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut amps = DVector::zeros(dim);
        amps[k] = C64::new(1.0, 0.0);
        StateVector { amplitudes: amps }
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm_sqr()
    }

    /// Index of the first amplitude that is not real and nonnegative.
    pub fn first_phase(&self) -> Option<usize> {
        self.amplitudes.iter().position(|c| c.im != 0.0 || c.re < 0.0)
    }

    pub fn projector(&self) -> DMatrix<C64> {
        &self.amplitudes * self.amplitudes.adjoint()
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<C64>,
}

fn hermitian_residue(m: &DMatrix<C64>) -> f64 {
    (m - m.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Result<Vec<f64>> {
    let eig = m
        .clone()
        .try_symmetric_eigen(1e-15, 10_000)
        .ok_or_else(|| Error::NumericalFailure("Hermitian eigensolver did not converge".into()))?;
    Ok(eig.eigenvalues.iter().copied().collect())
}

impl DensityMatrix {
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        let residue = hermitian_residue(&entries);
        if residue > HERMITIAN_TOL {
            return Err(Error::invalid("density", format!("not Hermitian (residue {residue:e})")));
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::invalid("density", format!("trace {trace} is not 1")));
        }
        let min = hermitian_eigenvalues(&entries)?.into_iter().fold(f64::INFINITY, f64::min);
        if min < -EIGEN_CLIP {
            return Err(Error::invalid("density", format!("negative eigenvalue {min:e}")));
        }
        Ok(DensityMatrix { entries })
    }

    pub fn pure(state: &StateVector) -> Self {
        DensityMatrix {
            entries: state.projector(),
        }
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entries[(i, i)].re).collect()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.entries)
    }

    /// `tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|c| c.norm_sqr()).sum()
    }
}

fn check_observable(dim: usize, observable: &DMatrix<C64>) -> Result<()> {
    if observable.nrows() != dim || observable.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: observable.nrows().max(observable.ncols()),
        });
    }
    if hermitian_residue(observable) > HERMITIAN_TOL {
        return Err(Error::invalid("observable", "must be Hermitian"));
    }
    Ok(())
}

/// `⟨Ψ|F|Ψ⟩`.
pub fn expectation(state: &StateVector, observable: &DMatrix<C64>) -> Result<f64> {
    check_observable(state.dim(), observable)?;
    let a = state.amplitudes();
    Ok(a.dotc(&(observable * a)).re)
}

/// `tr(ρ F)`.
pub fn expectation_trace(rho: &DensityMatrix, observable: &DMatrix<C64>) -> Result<f64> {
    check_observable(rho.dim(), observable)?;
    Ok((rho.entries() * observable).trace().re)
}

/// Rescales amplitude moduli from `√p_i` to `√π_i(ξ)`, keeping phases.
pub fn single_shot_update(
    system: &QuantumSystem,
    state: &StateVector,
    noise: &NoiseDensity,
    xi: f64,
) -> Result<StateVector> {
    if state.dim() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            found: state.dim(),
        });
    }
    let prior = state.probabilities();
    let (post, _) = bayes_update(&prior, system.energies(), noise, xi)?;
    Ok(rescale_moduli(state.amplitudes(), &prior, &post))
}

pub(crate) fn rescale_moduli(amps: &DVector<C64>, prior: &[f64], post: &[f64]) -> StateVector {
    let scaled = DVector::from_iterator(
        amps.len(),
        amps.iter().zip(prior.iter().zip(post)).map(|(c, (&p, &q))| {
            if p > 0.0 {
                c * (q / p).sqrt()
            } else {
                C64::new(0.0, 0.0)
            }
        }),
    );
    let norm = scaled.norm();
    StateVector {
        amplitudes: scaled / C64::new(norm, 0.0),
    }
}

/// `Λ_ij`. Exactly 1 on the diagonal and for degenerate levels.
pub fn decoherence_factor(
    system: &QuantumSystem,
    noise: &NoiseDensity,
    i: usize,
    j: usize,
    quad: &Quadrature,
) -> Result<f64> {
    if i == j {
        return Ok(1.0);
    }
    noise.overlap(system.gap(i, j), quad)
}

pub fn decoherence_matrix(system: &QuantumSystem, noise: &NoiseDensity, quad: &Quadrature) -> Result<DMatrix<f64>> {
    let n = system.dim();
    let mut out = DMatrix::from_element(n, n, 1.0);
    for i in 0..n {
        for j in i + 1..n {
            let l = decoherence_factor(system, noise, i, j, quad)?;
            out[(i, j)] = l;
            out[(j, i)] = l;
        }
    }
    Ok(out)
}

/// `ρ'_ij = √(p_i p_j) Λ_ij` for a zero-phase state.
pub fn averaged_density_analytic(
    system: &QuantumSystem,
    state: &StateVector,
    noise: &NoiseDensity,
    quad: &Quadrature,
) -> Result<DensityMatrix> {
    if state.dim() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            found: state.dim(),
        });
    }
    if let Some(index) = state.first_phase() {
        return Err(Error::PhasePresent { index });
    }
    let lambda = decoherence_matrix(system, noise, quad)?;
    let a = state.amplitudes();
    let n = system.dim();
    let entries = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(a[i].re * a[i].re, 0.0)
        } else {
            C64::new(a[i].re * a[j].re * lambda[(i, j)], 0.0)
        }
    });
    DensityMatrix::new(entries)
}

/// Monte Carlo estimate of the observer-averaged density matrix.
#[derive(Clone, Debug)]
pub struct McDensity {
    pub mean: DensityMatrix,
    /// Entrywise bootstrap standard error (modulus of the complex error).
    pub std_err: DMatrix<f64>,
    pub n_samples: usize,
}

const BOOTSTRAP_REPLICATES: usize = 400;

pub fn averaged_density_mc(
    system: &QuantumSystem,
    state: &StateVector,
    noise: &NoiseDensity,
    n_samples: usize,
    seed: SeedStream,
) -> Result<McDensity> {
    if n_samples == 0 {
        return Err(Error::invalid("n_samples", "must be at least 1"));
    }
    if state.dim() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            found: state.dim(),
        });
    }
    let n = system.dim();
    let prior = state.probabilities();
    let chunks = chunked_fold(
        seed,
        n_samples,
        || (DMatrix::<C64>::zeros(n, n), 0usize),
        |_, rng| {
            let k = sample_index(&prior, rng);
            let xi = system.energies()[k] + noise.sample(rng);
            Ok(single_shot_update(system, state, noise, xi)?.projector())
        },
        |acc, m| {
            acc.0 += m;
            acc.1 += 1;
        },
    )
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut total = DMatrix::<C64>::zeros(n, n);
    for (sum, _) in &chunks {
        total += sum;
    }
    let mean = total / C64::new(n_samples as f64, 0.0);

    let mut std_err = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let re: Vec<f64> = chunks.iter().map(|(s, c)| s[(i, j)].re / *c as f64).collect();
            let im: Vec<f64> = chunks.iter().map(|(s, c)| s[(i, j)].im / *c as f64).collect();
            let entry_seed = seed.derive(u64::MAX - (i * n + j) as u64);
            let se_re = bootstrap_std_err(&re, BOOTSTRAP_REPLICATES, entry_seed);
            let se_im = bootstrap_std_err(&im, BOOTSTRAP_REPLICATES, entry_seed.derive(1));
            std_err[(i, j)] = se_re.hypot(se_im);
        }
    }
    Ok(McDensity {
        mean: DensityMatrix::new(mean)?,
        std_err,
        n_samples,
    })
}

/// `-tr(ρ ln ρ)` in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(rho
        .eigenvalues()?
        .into_iter()
        .map(|l| if (-EIGEN_CLIP..0.0).contains(&l) { 0.0 } else { l })
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.ln())
        .sum())
}
