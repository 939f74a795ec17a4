// Copyright 2026 The infodyn Authors
// SPDX-License-Identifier: Apache-2.0

//! Continuous-time state reduction as repeated Bayesian updating.
//!
//! Each step of length `dt` applies the unitary `exp(-iĤdt)` and then one
//! single-shot update in the eigenbasis of the monitored observable `L̂`,
//! with gaussian reading noise of variance `1/(s² dt)`. Per step the
//! coherence between `L̂` eigenstates `i, j` is damped in the ensemble mean
//! by `exp(-s² ω_ij² dt / 8)`, giving the decay rate `γ_ij = s² ω_ij² / 8`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::noise::NoiseDensity;
use crate::quantum::{rescale_moduli, StateVector};
use crate::rng::{chunked_fold, SeedStream};
use crate::signal::{bayes_update, sample_index};
use crate::stats::{binomial_interval, least_squares, Z99};
use crate::{Error, Result, C64};

/// Upper bound on `s² dt (span L̂)²`.
pub const STABILITY_CEILING: f64 = 0.1;
/// A trajectory has collapsed once `Var(L̂) < COLLAPSE_THRESHOLD · span²`.
pub const COLLAPSE_THRESHOLD: f64 = 1e-6;
/// Fraction of trajectories that must collapse for collapse statistics.
pub const COLLAPSE_QUORUM: f64 = 0.99;
const NORM_RESIDUE_LIMIT: f64 = 1e-6;
const HERMITIAN_TOL: f64 = 1e-12;

fn hermitian_check(field: &str, m: &DMatrix<C64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::invalid(field, "must be square"));
    }
    let residue = (m - m.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
    if residue > HERMITIAN_TOL {
        return Err(Error::invalid(field, format!("not Hermitian (residue {residue:e})")));
    }
    Ok(())
}

fn is_diagonal(m: &DMatrix<C64>) -> bool {
    m.iter()
        .enumerate()
        .all(|(k, c)| k % (m.nrows() + 1) == 0 || *c == C64::new(0.0, 0.0))
}

/// Eigen-decomposition with ascending eigenvalues; diagonal inputs keep the
/// standard basis exactly.
fn eigh(m: &DMatrix<C64>) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let n = m.nrows();
    if is_diagonal(m) {
        return Ok(((0..n).map(|i| m[(i, i)].re).collect(), DMatrix::identity(n, n)));
    }
    let eig = m
        .clone()
        .try_symmetric_eigen(1e-15, 10_000)
        .ok_or_else(|| Error::NumericalFailure("eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// Two drivers: `Ĥ` generates the unitary drift, `L̂` is monitored with
/// coupling `s`.
#[derive(Clone, Debug)]
pub struct DynamicsSpec {
    hamiltonian: DMatrix<C64>,
    lindblad: DMatrix<C64>,
    coupling: f64,
    dt: f64,
    horizon: f64,
    unitary: DMatrix<C64>,
    basis: DMatrix<C64>,
    levels: Vec<f64>,
    noise: Option<NoiseDensity>,
}

impl DynamicsSpec {
    /// `coupling = 0` switches the monitoring off (pure Schrödinger
    /// evolution).
    pub fn new(
        hamiltonian: DMatrix<C64>,
        lindblad: DMatrix<C64>,
        coupling: f64,
        dt: f64,
        horizon: f64,
    ) -> Result<Self> {
        hermitian_check("hamiltonian", &hamiltonian)?;
        hermitian_check("lindblad", &lindblad)?;
        if hamiltonian.nrows() != lindblad.nrows() {
            return Err(Error::DimensionMismatch {
                expected: hamiltonian.nrows(),
                found: lindblad.nrows(),
            });
        }
        if !(coupling.is_finite() && coupling >= 0.0) {
            return Err(Error::invalid("coupling", format!("must be finite and nonnegative, got {coupling}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
        }
        if !(horizon.is_finite() && horizon >= dt) {
            return Err(Error::invalid("horizon", format!("must be at least dt, got {horizon}")));
        }
        let (levels, basis) = eigh(&lindblad)?;
        let span = levels[levels.len() - 1] - levels[0];
        let load = coupling * coupling * dt * span * span;
        if load > STABILITY_CEILING {
            return Err(Error::invalid(
                "coupling",
                format!("s² dt span² = {load} exceeds the stability ceiling {STABILITY_CEILING}"),
            ));
        }
        let (energies, h_basis) = eigh(&hamiltonian)?;
        let phases = DMatrix::from_diagonal(&DVector::from_iterator(
            energies.len(),
            energies.iter().map(|e| C64::from_polar(1.0, -e * dt)),
        ));
        let unitary = &h_basis * phases * h_basis.adjoint();
        let noise = if coupling > 0.0 {
            Some(NoiseDensity::gaussian(1.0 / (coupling * dt.sqrt()))?)
        } else {
            None
        };
        Ok(DynamicsSpec {
            hamiltonian,
            lindblad,
            coupling,
            dt,
            horizon,
            unitary,
            basis,
            levels,
            noise,
        })
    }

    pub fn hamiltonian(&self) -> &DMatrix<C64> {
        &self.hamiltonian
    }

    pub fn lindblad(&self) -> &DMatrix<C64> {
        &self.lindblad
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    pub fn n_steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    /// Eigenvalues of `L̂`, ascending.
    pub fn lindblad_levels(&self) -> &[f64] {
        &self.levels
    }

    /// Columns are the `L̂` eigenvectors matching [`Self::lindblad_levels`].
    pub fn lindblad_basis(&self) -> &DMatrix<C64> {
        &self.basis
    }

    pub fn span(&self) -> f64 {
        self.levels[self.levels.len() - 1] - self.levels[0]
    }

    /// Per-step reading noise, `None` when the coupling is zero.
    pub fn step_noise(&self) -> Option<&NoiseDensity> {
        self.noise.as_ref()
    }

    pub fn unitary(&self) -> &DMatrix<C64> {
        &self.unitary
    }

    /// Frobenius norm of `[Ĥ, L̂]`.
    pub fn commutator_norm(&self) -> f64 {
        let c = &self.hamiltonian * &self.lindblad - &self.lindblad * &self.hamiltonian;
        c.norm()
    }

    /// `‖Ĥ‖ / (‖L̂‖ s²)`, Frobenius norms.
    pub fn relative_magnitude(&self) -> f64 {
        self.hamiltonian.norm() / (self.lindblad.norm() * self.coupling * self.coupling)
    }

    /// Occupations of the `L̂` eigenstates.
    pub fn occupations(&self, state: &StateVector) -> Vec<f64> {
        (self.basis.adjoint() * state.amplitudes())
            .iter()
            .map(|c| c.norm_sqr())
            .collect()
    }

    pub fn observables(&self, state: &StateVector) -> Observables {
        let occ = self.occupations(state);
        let mean: f64 = occ.iter().zip(&self.levels).map(|(p, l)| p * l).sum();
        let variance = occ.iter().zip(&self.levels).map(|(p, l)| p * (l - mean).powi(2)).sum();
        let a = state.amplitudes();
        Observables {
            energy: a.dotc(&(&self.hamiltonian * a)).re,
            lindblad_mean: mean,
            lindblad_variance: variance,
            max_occupation: occ.iter().copied().fold(0.0, f64::max),
        }
    }

    fn step_inner<R: Rng + ?Sized>(&self, state: &StateVector, rng: &mut R) -> Result<(StateVector, f64)> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: state.dim(),
            });
        }
        let drifted = &self.unitary * state.amplitudes();
        let Some(noise) = &self.noise else {
            let residue = (drifted.norm_squared() - 1.0).abs();
            return Ok((StateVector::normalised(drifted)?, residue));
        };
        let amps = self.basis.adjoint() * drifted;
        let prior: Vec<f64> = amps.iter().map(|c| c.norm_sqr()).collect();
        let mut attempt = 0;
        let post = loop {
            let k = sample_index(&prior, rng);
            let xi = self.levels[k] + noise.sample(rng);
            match bayes_update(&prior, &self.levels, noise, xi) {
                Ok((post, _)) => break post,
                Err(Error::ZeroMarginal { .. }) if attempt == 0 => attempt += 1,
                Err(e) => return Err(e),
            }
        };
        // Drift residue and update residue; both vanish in exact arithmetic.
        let kept: f64 = prior.iter().zip(&post).filter(|(p, _)| **p > 0.0).map(|(_, q)| *q).sum();
        let residue = (prior.iter().sum::<f64>() - 1.0).abs().max((kept - 1.0).abs());
        let updated = rescale_moduli(&amps, &prior, &post);
        let back = &self.basis * updated.amplitudes();
        Ok((StateVector::normalised(back)?, residue))
    }

    /// One drift-then-update step.
    pub fn step<R: Rng + ?Sized>(&self, state: &StateVector, rng: &mut R) -> Result<StateVector> {
        self.step_inner(state, rng).map(|(s, _)| s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observables {
    pub energy: f64,
    pub lindblad_mean: f64,
    pub lindblad_variance: f64,
    pub max_occupation: f64,
}

/// One noisy realisation on the grid `0, dt, …, n_steps·dt`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub observables: Vec<Observables>,
}

fn advance<R: Rng + ?Sized>(
    spec: &DynamicsSpec,
    initial: &StateVector,
    rng: &mut R,
    mut visit: impl FnMut(usize, &StateVector),
) -> Result<StateVector> {
    let mut state = initial.clone();
    visit(0, &state);
    for k in 1..=spec.n_steps() {
        let (next, residue) = spec.step_inner(&state, rng)?;
        if residue > NORM_RESIDUE_LIMIT {
            return Err(Error::StabilityViolation { step: k, residue });
        }
        state = next;
        visit(k, &state);
    }
    Ok(state)
}

pub fn simulate_trajectory<R: Rng + ?Sized>(
    spec: &DynamicsSpec,
    initial: &StateVector,
    rng: &mut R,
) -> Result<Trajectory> {
    let n = spec.n_steps();
    let mut traj = Trajectory {
        times: Vec::with_capacity(n + 1),
        states: Vec::with_capacity(n + 1),
        observables: Vec::with_capacity(n + 1),
    };
    advance(spec, initial, rng, |k, s| {
        traj.times.push(k as f64 * spec.dt);
        traj.states.push(s.clone());
        traj.observables.push(spec.observables(s));
    })?;
    Ok(traj)
}

/// Ensemble means and standard errors on a strided time grid.
#[derive(Clone, Debug)]
pub struct EnsembleSummary {
    pub times: Vec<f64>,
    /// Mean `|Ψ⟩⟨Ψ|` in the computational basis.
    pub mean_rho: Vec<DMatrix<C64>>,
    /// Standard error of each mean entry (modulus of the complex error).
    pub rho_std_err: Vec<DMatrix<f64>>,
    /// Mean occupation of each `L̂` eigenstate.
    pub occupations: Vec<Vec<f64>>,
    pub occupation_std_err: Vec<Vec<f64>>,
    pub mean_lindblad_variance: Vec<f64>,
    pub mean_max_occupation: Vec<f64>,
    /// Final-time most-occupied `L̂` eigenstate, counted per level.
    pub outcome_counts: Vec<usize>,
    /// Trajectories whose final `Var(L̂)` is below the collapse threshold.
    pub collapsed: usize,
    pub n_traj: usize,
}

impl EnsembleSummary {
    /// `|ρ̄_ij(t)|` on the record grid.
    pub fn coherence(&self, i: usize, j: usize) -> Vec<f64> {
        self.mean_rho.iter().map(|m| m[(i, j)].norm()).collect()
    }

    pub fn coherence_std_err(&self, i: usize, j: usize) -> Vec<f64> {
        self.rho_std_err.iter().map(|m| m[(i, j)]).collect()
    }

    pub fn collapsed_fraction(&self) -> f64 {
        self.collapsed as f64 / self.n_traj as f64
    }
}

/// Runs `n_traj` independent trajectories, recording every `stride` steps
/// (plus the final step). Trajectory `k` uses stream `seed.derive(k)`.
pub fn run_ensemble(
    spec: &DynamicsSpec,
    initial: &StateVector,
    n_traj: usize,
    stride: usize,
    seed: SeedStream,
) -> Result<EnsembleSummary> {
    if n_traj == 0 {
        return Err(Error::invalid("n_traj", "must be at least 1"));
    }
    if initial.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: initial.dim(),
        });
    }
    let stride = stride.max(1);
    let n_steps = spec.n_steps();
    let mut record_steps: Vec<usize> = (0..=n_steps).step_by(stride).collect();
    if *record_steps.last().unwrap() != n_steps {
        record_steps.push(n_steps);
    }
    let n = spec.dim();
    // Per record: re/im of ψψ†, L̂ occupations, Var(L̂), max occupation.
    let width = 2 * n * n + n + 2;
    let records = record_steps.len();
    let threshold = COLLAPSE_THRESHOLD * spec.span() * spec.span();

    struct Acc {
        sum: Vec<f64>,
        sq: Vec<f64>,
        outcomes: Vec<usize>,
        collapsed: usize,
    }

    let chunks = chunked_fold(
        seed,
        n_traj,
        || Acc {
            sum: vec![0.0; records * width],
            sq: vec![0.0; records * width],
            outcomes: vec![0; n],
            collapsed: 0,
        },
        |_, rng| {
            let mut row = vec![0.0; records * width];
            let mut r = 0;
            let last = advance(spec, initial, rng, |k, s| {
                if r < records && record_steps[r] == k {
                    let base = r * width;
                    let a = s.amplitudes();
                    for i in 0..n {
                        for j in 0..n {
                            let e = a[i] * a[j].conj();
                            row[base + 2 * (i * n + j)] = e.re;
                            row[base + 2 * (i * n + j) + 1] = e.im;
                        }
                    }
                    let occ = spec.occupations(s);
                    row[base + 2 * n * n..base + 2 * n * n + n].copy_from_slice(&occ);
                    let obs = spec.observables(s);
                    row[base + 2 * n * n + n] = obs.lindblad_variance;
                    row[base + 2 * n * n + n + 1] = obs.max_occupation;
                    r += 1;
                }
            })?;
            let obs = spec.observables(&last);
            let occ = spec.occupations(&last);
            let outcome = occ
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap_or(0);
            Ok((row, outcome, obs.lindblad_variance < threshold))
        },
        |acc, (row, outcome, collapsed)| {
            for (k, v) in row.into_iter().enumerate() {
                acc.sum[k] += v;
                acc.sq[k] += v * v;
            }
            acc.outcomes[outcome] += 1;
            acc.collapsed += collapsed as usize;
        },
    );

    let mut sum = vec![0.0; records * width];
    let mut sq = vec![0.0; records * width];
    let mut outcome_counts = vec![0; n];
    let mut collapsed = 0;
    for c in chunks {
        let c = c?;
        sum.iter_mut().zip(&c.sum).for_each(|(a, b)| *a += b);
        sq.iter_mut().zip(&c.sq).for_each(|(a, b)| *a += b);
        outcome_counts.iter_mut().zip(&c.outcomes).for_each(|(a, b)| *a += b);
        collapsed += c.collapsed;
    }
    let nf = n_traj as f64;
    let mean = |k: usize| sum[k] / nf;
    let se = |k: usize| {
        let m = sum[k] / nf;
        let var = (sq[k] / nf - m * m).max(0.0) * nf / (nf - 1.0).max(1.0);
        (var / nf).sqrt()
    };

    let mut summary = EnsembleSummary {
        times: record_steps.iter().map(|&k| k as f64 * spec.dt).collect(),
        mean_rho: Vec::with_capacity(records),
        rho_std_err: Vec::with_capacity(records),
        occupations: Vec::with_capacity(records),
        occupation_std_err: Vec::with_capacity(records),
        mean_lindblad_variance: Vec::with_capacity(records),
        mean_max_occupation: Vec::with_capacity(records),
        outcome_counts,
        collapsed,
        n_traj,
    };
    for r in 0..records {
        let base = r * width;
        let cell = |i: usize, j: usize| base + 2 * (i * n + j);
        summary
            .mean_rho
            .push(DMatrix::from_fn(n, n, |i, j| C64::new(mean(cell(i, j)), mean(cell(i, j) + 1))));
        summary
            .rho_std_err
            .push(DMatrix::from_fn(n, n, |i, j| se(cell(i, j)).hypot(se(cell(i, j) + 1))));
        let occ = base + 2 * n * n;
        summary.occupations.push((0..n).map(|k| mean(occ + k)).collect());
        summary.occupation_std_err.push((0..n).map(|k| se(occ + k)).collect());
        summary.mean_lindblad_variance.push(mean(occ + n));
        summary.mean_max_occupation.push(mean(occ + n + 1));
    }
    Ok(summary)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollapseStatistics {
    /// Fraction of trajectories ending in each `L̂` eigenstate.
    pub frequencies: Vec<f64>,
    pub counts: Vec<usize>,
    /// Born weights of the initial state in the `L̂` eigenbasis.
    pub born: Vec<f64>,
    /// 99% binomial intervals around the Born weights.
    pub intervals: Vec<(f64, f64)>,
    pub collapsed: usize,
    pub total: usize,
}

impl CollapseStatistics {
    pub fn from_summary(summary: &EnsembleSummary) -> Result<Self> {
        let total = summary.n_traj;
        if (summary.collapsed as f64) < COLLAPSE_QUORUM * total as f64 {
            return Err(Error::NonConverged {
                collapsed: summary.collapsed,
                total,
            });
        }
        let born = summary.occupations[0].clone();
        Ok(CollapseStatistics {
            frequencies: summary.outcome_counts.iter().map(|&c| c as f64 / total as f64).collect(),
            counts: summary.outcome_counts.clone(),
            intervals: born.iter().map(|&p| binomial_interval(p, total, Z99)).collect(),
            born,
            collapsed: summary.collapsed,
            total,
        })
    }

    /// Every frequency lies inside its 99% interval (degenerate weights
    /// must be matched exactly).
    pub fn within_intervals(&self) -> bool {
        self.frequencies
            .iter()
            .zip(&self.intervals)
            .all(|(f, (lo, hi))| *f >= lo - 1e-12 && *f <= hi + 1e-12)
    }
}

/// Collapse frequencies per `L̂` eigenstate. Intended for `L̂ = Ĥ`.
pub fn collapse_statistics(
    spec: &DynamicsSpec,
    initial: &StateVector,
    n_traj: usize,
    seed: SeedStream,
) -> Result<CollapseStatistics> {
    let summary = run_ensemble(spec, initial, n_traj, spec.n_steps().max(1), seed)?;
    CollapseStatistics::from_summary(&summary)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Minimum number of records inside the fit window.
pub const MIN_FIT_POINTS: usize = 5;

/// Least-squares fit of `ln|ρ̄_ij(t)|` against `t`.
///
/// The window starts at `t = 0` and ends at the first record that falls
/// below three standard errors or below `e^{-2.5}` of the initial
/// magnitude.
pub fn coherence_decay_fit(ensemble: &EnsembleSummary, i: usize, j: usize) -> Result<DecayFit> {
    let mags = ensemble.coherence(i, j);
    let errs = ensemble.coherence_std_err(i, j);
    let m0 = mags[0];
    if !(m0 > 0.0) {
        return Err(Error::FitFailure(format!("no initial coherence between {i} and {j}")));
    }
    let floor = m0 * (-2.5f64).exp();
    let window = mags
        .iter()
        .zip(&errs)
        .take_while(|(m, e)| **m > 3.0 * **e && **m >= floor)
        .count();
    if window < MIN_FIT_POINTS {
        return Err(Error::FitFailure(format!(
            "coherence reached the noise floor after {window} records"
        )));
    }
    let t = &ensemble.times[..window];
    let y: Vec<f64> = mags[..window].iter().map(|m| m.ln()).collect();
    let fit = least_squares(t, &y).ok_or_else(|| Error::FitFailure("degenerate time grid".into()))?;
    Ok(DecayFit {
        rate: -fit.slope,
        intercept: fit.intercept,
        points: window,
    })
}

/// First time `|ρ̄_ij|` falls to `1/e` of its initial value, interpolated
/// log-linearly between records.
pub fn reduction_time(ensemble: &EnsembleSummary, i: usize, j: usize) -> Option<f64> {
    let mags = ensemble.coherence(i, j);
    let target = mags[0] / std::f64::consts::E;
    let k = mags.iter().position(|&m| m <= target)?;
    if k == 0 {
        return Some(0.0);
    }
    let (t0, t1) = (ensemble.times[k - 1], ensemble.times[k]);
    let (y0, y1) = (mags[k - 1].ln(), mags[k].ln());
    Some(t0 + (target.ln() - y0) / (y1 - y0) * (t1 - t0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegimeDiagnostics {
    pub commutator_norm: f64,
    pub relative_magnitude: f64,
    /// Ensemble mean of `Var(L̂)` averaged over the records after `t = 0`.
    pub time_avg_lindblad_variance: f64,
    pub time_avg_max_occupation: f64,
    pub late_lindblad_variance: f64,
    pub collapsed_fraction: f64,
}

/// Records kept by the regime diagnostics.
const REGIME_RECORDS: usize = 1000;

pub fn regime_diagnostics(
    spec: &DynamicsSpec,
    initial: &StateVector,
    n_traj: usize,
    seed: SeedStream,
) -> Result<RegimeDiagnostics> {
    let stride = (spec.n_steps() / REGIME_RECORDS).max(1);
    let s = run_ensemble(spec, initial, n_traj, stride, seed)?;
    let later = s.times.len() - 1;
    let avg = |v: &[f64]| v[1..].iter().sum::<f64>() / later.max(1) as f64;
    Ok(RegimeDiagnostics {
        commutator_norm: spec.commutator_norm(),
        relative_magnitude: spec.relative_magnitude(),
        time_avg_lindblad_variance: avg(&s.mean_lindblad_variance),
        time_avg_max_occupation: avg(&s.mean_max_occupation),
        late_lindblad_variance: *s.mean_lindblad_variance.last().unwrap(),
        collapsed_fraction: s.collapsed_fraction(),
    })
}

/// Diagnostics with `Ĥ` rescaled by each factor in `scales`.
pub fn regime_scan(
    spec: &DynamicsSpec,
    initial: &StateVector,
    scales: &[f64],
    n_traj: usize,
    seed: SeedStream,
) -> Result<Vec<RegimeDiagnostics>> {
    scales
        .iter()
        .enumerate()
        .map(|(k, &scale)| {
            let scaled = DynamicsSpec::new(
                spec.hamiltonian() * C64::new(scale, 0.0),
                spec.lindblad().clone(),
                spec.coupling(),
                spec.dt(),
                spec.horizon(),
            )?;
            regime_diagnostics(&scaled, initial, n_traj, seed.derive(k as u64))
        })
        .collect()
}
