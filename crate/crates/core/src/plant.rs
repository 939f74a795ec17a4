// Copyright 2026 The infodyn Authors
// SPDX-License-Identifier: Apache-2.0

//! Plant scenarios on a circle of bearings and the Landauer ledger.
//!
//! A seedling sweeps its heading `φ_t` round the circle and at each step
//! reads `ξ_t = κ cos(θ* − φ_t) + ε` with gaussian sensor noise. The
//! bearing posterior over `M` bins is updated by Bayes' rule and the growth
//! direction is its circular mean.

use std::f64::consts::{LN_2, PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::noise::NoiseDensity;
use crate::signal::{bayes_update, check_distribution, shannon_entropy};
use crate::{nats_to_bits, Error, Result};

/// Boltzmann constant, J/K (exact SI value).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Resultant lengths below this have no defined direction.
const RESULTANT_FLOOR: f64 = 1e-9;

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Shortest angular distance, in `[0, π]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

pub fn bin_angle(k: usize, bins: usize) -> f64 {
    TAU * k as f64 / bins as f64
}

/// `arg Σ π_k e^{iθ_k}`, or `None` when the resultant vanishes.
pub fn circular_mean(probs: &[f64]) -> Option<f64> {
    let m = probs.len();
    let (s, c) = probs.iter().enumerate().fold((0.0, 0.0), |(s, c), (k, p)| {
        let t = bin_angle(k, m);
        (s + p * t.sin(), c + p * t.cos())
    });
    if s.hypot(c) < RESULTANT_FLOOR {
        None
    } else {
        Some(s.atan2(c).rem_euclid(TAU))
    }
}

pub fn argmax_direction(probs: &[f64]) -> f64 {
    let k = probs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    bin_angle(k, probs.len())
}

/// Error of an estimate against the truth; an undefined estimate scores the
/// expected error of a uniformly random guess, `π/2`.
fn direction_error(estimate: Option<f64>, truth: f64) -> f64 {
    estimate.map_or(PI / 2.0, |e| circular_distance(e, truth))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionEstimator {
    #[default]
    CircularMean,
    Argmax,
}

impl DirectionEstimator {
    pub fn estimate(&self, probs: &[f64]) -> Option<f64> {
        match self {
            DirectionEstimator::CircularMean => circular_mean(probs),
            DirectionEstimator::Argmax => Some(argmax_direction(probs)),
        }
    }
}

/// What happens to the retained information when a run ends.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ErasurePolicy {
    /// The reset erases everything still held.
    #[default]
    ResetAll,
    /// Only this fraction of the retained bits is erased.
    Partial { fraction: f64 },
    Keep,
}

/// Information processed and the minimum heat paid to erase it.
#[derive(Clone, Debug, PartialEq)]
pub struct InfoLedger {
    temperature: f64,
    per_step_bits: Vec<f64>,
    bits_processed: f64,
    bits_erased: f64,
    landauer_heat: f64,
    external_energy: Option<f64>,
}

impl InfoLedger {
    pub fn new(temperature: f64) -> Result<Self> {
        if !(temperature.is_finite() && temperature > 0.0) {
            return Err(Error::invalid("temperature", format!("must be positive kelvin, got {temperature}")));
        }
        Ok(InfoLedger {
            temperature,
            per_step_bits: Vec::new(),
            bits_processed: 0.0,
            bits_erased: 0.0,
            landauer_heat: 0.0,
            external_energy: None,
        })
    }

    pub fn with_external_energy(mut self, joules: f64) -> Result<Self> {
        if !(joules.is_finite() && joules > 0.0) {
            return Err(Error::invalid("external_energy", format!("must be positive, got {joules}")));
        }
        self.external_energy = Some(joules);
        Ok(self)
    }

    /// `k_B T ln 2`, joules per erased bit.
    pub fn heat_per_bit(&self) -> f64 {
        BOLTZMANN * self.temperature * LN_2
    }

    /// Appends one step's net entropy reduction (may be negative).
    pub fn record_step(&mut self, bits: f64) {
        self.per_step_bits.push(bits);
        self.bits_processed += bits;
    }

    /// Returns the ledger after erasing `bits_erased` bits.
    pub fn landauer_update(&self, bits_erased: f64) -> Result<InfoLedger> {
        if !(bits_erased >= 0.0) || !bits_erased.is_finite() {
            return Err(Error::NegativeBits(bits_erased));
        }
        let mut next = self.clone();
        next.bits_erased += bits_erased;
        next.landauer_heat += bits_erased * self.heat_per_bit();
        Ok(next)
    }

    /// Erases retained information according to `policy`.
    pub fn apply_erasure(&self, policy: ErasurePolicy) -> Result<InfoLedger> {
        let retained = self.bits_processed.max(0.0);
        match policy {
            ErasurePolicy::ResetAll => self.landauer_update(retained),
            ErasurePolicy::Partial { fraction } => self.landauer_update(retained * fraction.clamp(0.0, 1.0)),
            ErasurePolicy::Keep => Ok(self.clone()),
        }
    }

    /// Explicit summation of two independent ledgers at the same
    /// temperature.
    pub fn merge(&self, other: &InfoLedger) -> Result<InfoLedger> {
        if self.temperature != other.temperature {
            return Err(Error::invalid("temperature", "cannot merge ledgers at different temperatures"));
        }
        let mut out = self.clone();
        out.per_step_bits.extend_from_slice(&other.per_step_bits);
        out.bits_processed += other.bits_processed;
        out.bits_erased += other.bits_erased;
        out.landauer_heat += other.landauer_heat;
        out.external_energy = match (self.external_energy, other.external_energy) {
            (Some(a), Some(b)) => Some(a + b),
            (a, b) => a.or(b),
        };
        Ok(out)
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn per_step_bits(&self) -> &[f64] {
        &self.per_step_bits
    }

    /// Cumulative net bits over the recorded steps.
    pub fn bits_processed(&self) -> f64 {
        self.bits_processed
    }

    pub fn bits_erased(&self) -> f64 {
        self.bits_erased
    }

    /// Joules.
    pub fn landauer_heat(&self) -> f64 {
        self.landauer_heat
    }

    pub fn external_energy(&self) -> Option<f64> {
        self.external_energy
    }

    /// Landauer heat over the supplied external energy.
    pub fn efficiency_ratio(&self) -> Option<f64> {
        self.external_energy.map(|e| self.landauer_heat / e)
    }
}

/// Circumnutation: the heading advances by `2π / period` per step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeadingSchedule {
    pub period: usize,
    #[serde(default)]
    pub offset: f64,
}

impl Default for HeadingSchedule {
    fn default() -> Self {
        HeadingSchedule {
            period: 20,
            offset: 0.0,
        }
    }
}

impl HeadingSchedule {
    pub fn heading(&self, t: usize) -> f64 {
        self.offset + TAU * (t % self.period) as f64 / self.period as f64
    }
}

/// Host-bearing inference for a climbing seedling.
#[derive(Clone, Debug, PartialEq)]
pub struct CircularScenario {
    prior: Vec<f64>,
    true_bearing: f64,
    gradient: f64,
    sensor: NoiseDensity,
    heading: HeadingSchedule,
    estimator: DirectionEstimator,
    erasure: ErasurePolicy,
    memory_horizon: Option<usize>,
    temperature: f64,
}

impl CircularScenario {
    /// Uniform prior over `bins` bearings.
    pub fn new(bins: usize, true_bearing: f64, gradient: f64, sensor_sigma: f64) -> Result<Self> {
        if bins < 4 {
            return Err(Error::invalid("bins", format!("need at least 4, got {bins}")));
        }
        Self::with_prior(vec![1.0 / bins as f64; bins], true_bearing, gradient, sensor_sigma)
    }

    pub fn with_prior(prior: Vec<f64>, true_bearing: f64, gradient: f64, sensor_sigma: f64) -> Result<Self> {
        if prior.len() < 4 {
            return Err(Error::invalid("bins", format!("need at least 4, got {}", prior.len())));
        }
        check_distribution("prior", &prior)?;
        if !(gradient.is_finite() && gradient > 0.0) {
            return Err(Error::invalid("gradient", format!("must be positive, got {gradient}")));
        }
        if !true_bearing.is_finite() {
            return Err(Error::invalid("true_bearing", "must be finite"));
        }
        let sensor = NoiseDensity::gaussian(sensor_sigma)
            .map_err(|_| Error::invalid("sensor_sigma", format!("must be positive, got {sensor_sigma}")))?;
        Ok(CircularScenario {
            prior,
            true_bearing: true_bearing.rem_euclid(TAU),
            gradient,
            sensor,
            heading: HeadingSchedule::default(),
            estimator: DirectionEstimator::default(),
            erasure: ErasurePolicy::default(),
            memory_horizon: None,
            temperature: 300.0,
        })
    }

    pub fn with_heading(mut self, heading: HeadingSchedule) -> Result<Self> {
        if heading.period == 0 || !heading.offset.is_finite() {
            return Err(Error::invalid("heading.period", "must be at least 1"));
        }
        self.heading = heading;
        Ok(self)
    }

    pub fn with_estimator(mut self, estimator: DirectionEstimator) -> Self {
        self.estimator = estimator;
        self
    }

    pub fn with_erasure(mut self, erasure: ErasurePolicy) -> Self {
        self.erasure = erasure;
        self
    }

    /// Relaxes the posterior toward the prior by `1/horizon` per step.
    pub fn with_memory_horizon(mut self, horizon: Option<usize>) -> Result<Self> {
        if horizon == Some(0) {
            return Err(Error::invalid("memory_horizon", "must be at least 1 step"));
        }
        self.memory_horizon = horizon;
        Ok(self)
    }

    pub fn with_temperature(mut self, kelvin: f64) -> Result<Self> {
        InfoLedger::new(kelvin)?;
        self.temperature = kelvin;
        Ok(self)
    }

    pub fn bins(&self) -> usize {
        self.prior.len()
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn true_bearing(&self) -> f64 {
        self.true_bearing
    }

    pub fn gradient(&self) -> f64 {
        self.gradient
    }

    pub fn heading(&self) -> &HeadingSchedule {
        &self.heading
    }

    /// `κ cos(θ − φ_t)`.
    pub fn mean_signal(&self, theta: f64, t: usize) -> f64 {
        self.gradient * (theta - self.heading.heading(t)).cos()
    }

    /// Expected reading for every bin at step `t`.
    pub fn bin_means(&self, t: usize) -> Vec<f64> {
        (0..self.bins()).map(|k| self.mean_signal(bin_angle(k, self.bins()), t)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CuscutaStep {
    pub posterior: Vec<f64>,
    pub bits_gained: f64,
    pub observation: f64,
}

/// One reading and Bayes update over the bearing bins.
pub fn cuscuta_step<R: Rng + ?Sized>(
    scenario: &CircularScenario,
    prev: &[f64],
    t: usize,
    rng: &mut R,
) -> Result<CuscutaStep> {
    if prev.len() != scenario.bins() {
        return Err(Error::DimensionMismatch {
            expected: scenario.bins(),
            found: prev.len(),
        });
    }
    let xi = scenario.mean_signal(scenario.true_bearing, t) + scenario.sensor.sample(rng);
    let (posterior, _) = bayes_update(prev, &scenario.bin_means(t), &scenario.sensor, xi)?;
    let bits_gained = nats_to_bits(shannon_entropy(prev) - shannon_entropy(&posterior));
    Ok(CuscutaStep {
        posterior,
        bits_gained,
        observation: xi,
    })
}

#[derive(Clone, Debug)]
pub struct CuscutaRun {
    /// Prior followed by the posterior after each step.
    pub posteriors: Vec<Vec<f64>>,
    pub growth_direction: Option<f64>,
    /// Bits lost to the memory horizon along the way.
    pub bits_forgotten: f64,
    pub ledger: InfoLedger,
}

impl CuscutaRun {
    pub fn final_posterior(&self) -> &[f64] {
        self.posteriors.last().expect("run holds at least the prior")
    }

    /// `(S(prior) − S(final)) / ln 2`.
    pub fn entropy_reduction_bits(&self) -> f64 {
        nats_to_bits(shannon_entropy(&self.posteriors[0]) - shannon_entropy(self.final_posterior()))
    }

    /// Circular error of the growth direction (`π/2` when undefined).
    pub fn bearing_error(&self, truth: f64) -> f64 {
        direction_error(self.growth_direction, truth)
    }
}

pub fn run_cuscuta<R: Rng + ?Sized>(scenario: &CircularScenario, n_steps: usize, rng: &mut R) -> Result<CuscutaRun> {
    let mut ledger = InfoLedger::new(scenario.temperature)?;
    let mut posteriors = Vec::with_capacity(n_steps + 1);
    posteriors.push(scenario.prior.clone());
    let mut forgotten = 0.0;
    for t in 0..n_steps {
        let prev = posteriors.last().unwrap();
        let step = cuscuta_step(scenario, prev, t, rng)?;
        let mut next = step.posterior;
        if let Some(h) = scenario.memory_horizon {
            let lambda = 1.0 / h as f64;
            let before = shannon_entropy(&next);
            for (p, q) in next.iter_mut().zip(&scenario.prior) {
                *p = (1.0 - lambda) * *p + lambda * q;
            }
            let lost = nats_to_bits(shannon_entropy(&next) - before).max(0.0);
            forgotten += lost;
            ledger = ledger.landauer_update(lost)?;
        }
        ledger.record_step(nats_to_bits(shannon_entropy(prev) - shannon_entropy(&next)));
        posteriors.push(next);
    }
    let growth_direction = scenario.estimator.estimate(posteriors.last().unwrap());
    let ledger = ledger.apply_erasure(scenario.erasure)?;
    Ok(CuscutaRun {
        posteriors,
        growth_direction,
        bits_forgotten: forgotten,
        ledger,
    })
}

/// Sun tracking: the source bearing drifts deterministically while the
/// plant's belief diffuses and is updated by one reading per step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeliotropismConfig {
    pub bins: usize,
    /// Radians per step.
    pub drift_rate: f64,
    /// Signal amplitude in units of the (unit) sensor noise.
    pub coupling: f64,
    /// Standard deviation of the belief's per-step random-walk spread.
    pub belief_diffusion: f64,
    pub sweep_period: usize,
    pub initial_bearing: f64,
    pub temperature: f64,
}

impl Default for HeliotropismConfig {
    fn default() -> Self {
        HeliotropismConfig {
            bins: 64,
            drift_rate: 0.0,
            coupling: 3.0,
            belief_diffusion: 0.05,
            sweep_period: 20,
            initial_bearing: 0.0,
            temperature: 300.0,
        }
    }
}

impl HeliotropismConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bins < 4 {
            return Err(Error::invalid("bins", "need at least 4"));
        }
        if !(self.drift_rate.is_finite() && self.drift_rate >= 0.0) {
            return Err(Error::invalid("drift_rate", "must be finite and nonnegative"));
        }
        if !(self.coupling.is_finite() && self.coupling >= 0.0) {
            return Err(Error::invalid("coupling", "must be finite and nonnegative"));
        }
        if !(self.belief_diffusion.is_finite() && self.belief_diffusion >= 0.0) {
            return Err(Error::invalid("belief_diffusion", "must be finite and nonnegative"));
        }
        if self.sweep_period == 0 {
            return Err(Error::invalid("sweep_period", "must be at least 1"));
        }
        if !self.initial_bearing.is_finite() {
            return Err(Error::invalid("initial_bearing", "must be finite"));
        }
        InfoLedger::new(self.temperature).map(|_| ())
    }

    /// Wrapped-gaussian kernel over bin offsets.
    fn diffusion_kernel(&self) -> Vec<f64> {
        let m = self.bins;
        if self.belief_diffusion == 0.0 {
            let mut k = vec![0.0; m];
            k[0] = 1.0;
            return k;
        }
        let s = self.belief_diffusion;
        let mut k: Vec<f64> = (0..m)
            .map(|d| {
                let a = wrap_angle(bin_angle(d, m));
                (-3..=3)
                    .map(|w| {
                        let x = a + TAU * w as f64;
                        (-0.5 * (x / s).powi(2)).exp()
                    })
                    .sum()
            })
            .collect();
        let z: f64 = k.iter().sum();
        k.iter_mut().for_each(|v| *v /= z);
        k
    }
}

/// `E_θ~belief |θ − truth|` on the circle.
pub fn expected_circular_error(belief: &[f64], truth: f64) -> f64 {
    let m = belief.len();
    belief
        .iter()
        .enumerate()
        .map(|(k, p)| p * circular_distance(bin_angle(k, m), truth))
        .sum()
}

fn diffuse(belief: &[f64], kernel: &[f64]) -> Vec<f64> {
    let m = belief.len();
    (0..m)
        .map(|k| (0..m).map(|d| kernel[d] * belief[(k + m - d) % m]).sum())
        .collect()
}

#[derive(Clone, Debug)]
pub struct TrackingRecord {
    pub drift_rate: f64,
    pub coupling: f64,
    /// Per-step belief-averaged circular error.
    pub errors: Vec<f64>,
    /// Per-step circular error of the growth direction (`π/2` when the
    /// belief has no preferred direction).
    pub direction_errors: Vec<f64>,
    pub mean_error: f64,
    /// Mean error over the second half of the run.
    pub late_error: f64,
    /// Mean error of the predictor that never reads the sensor.
    pub baseline_error: f64,
    pub ledger: InfoLedger,
}

impl TrackingRecord {
    /// Late error clearly below that of a random guess.
    pub fn is_tracking(&self) -> bool {
        self.late_error < PI / 4.0
    }
}

pub fn run_heliotropism<R: Rng + ?Sized>(
    config: &HeliotropismConfig,
    n_steps: usize,
    rng: &mut R,
) -> Result<TrackingRecord> {
    config.validate()?;
    let m = config.bins;
    let sensor = NoiseDensity::gaussian(1.0)?;
    let heading = HeadingSchedule {
        period: config.sweep_period,
        offset: 0.0,
    };
    let kernel = config.diffusion_kernel();
    let mut ledger = InfoLedger::new(config.temperature)?;
    let mut belief = vec![1.0 / m as f64; m];
    let mut blind = belief.clone();
    let mut errors = Vec::with_capacity(n_steps);
    let mut direction_errors = Vec::with_capacity(n_steps);
    let mut baseline = 0.0;
    for t in 0..n_steps {
        let truth = config.initial_bearing + config.drift_rate * (t + 1) as f64;
        let before = shannon_entropy(&belief);
        let predicted = diffuse(&belief, &kernel);
        let spread = nats_to_bits(shannon_entropy(&predicted) - before).max(0.0);
        ledger = ledger.landauer_update(spread)?;

        let phi = heading.heading(t);
        let xi = config.coupling * (truth - phi).cos() + sensor.sample(rng);
        let means: Vec<f64> = (0..m).map(|k| config.coupling * (bin_angle(k, m) - phi).cos()).collect();
        belief = bayes_update(&predicted, &means, &sensor, xi)?.0;
        ledger.record_step(nats_to_bits(before - shannon_entropy(&belief)));

        blind = diffuse(&blind, &kernel);
        errors.push(expected_circular_error(&belief, truth));
        direction_errors.push(direction_error(circular_mean(&belief), truth));
        baseline += expected_circular_error(&blind, truth);
    }
    let n = n_steps.max(1) as f64;
    let half = &errors[n_steps / 2..];
    Ok(TrackingRecord {
        drift_rate: config.drift_rate,
        coupling: config.coupling,
        mean_error: errors.iter().sum::<f64>() / n,
        late_error: half.iter().sum::<f64>() / half.len().max(1) as f64,
        baseline_error: baseline / n,
        errors,
        direction_errors,
        ledger,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::SignalModel;
    use crate::Observation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn angles() {
        assert!((circular_distance(0.1, TAU - 0.1) - 0.2).abs() < 1e-15);
        assert!((circular_distance(0.0, PI) - PI).abs() < 1e-15);
        assert_eq!(circular_mean(&[0.25; 4]), None);
        let m = circular_mean(&[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!((m - PI / 2.0).abs() < 1e-15);
        assert_eq!(argmax_direction(&[0.1, 0.2, 0.6, 0.1]), PI);
    }

    #[test]
    fn scenario_validation() {
        assert!(CircularScenario::new(3, 0.0, 1.0, 0.1).is_err());
        assert!(CircularScenario::new(8, 0.0, 0.0, 0.1).is_err());
        let e = CircularScenario::new(8, 0.0, 1.0, -0.1).unwrap_err();
        assert!(e.to_string().contains("sensor_sigma"));
        assert!(CircularScenario::with_prior(vec![0.3; 4], 0.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn vanishing_gradient_is_uninformative() {
        let s = CircularScenario::new(16, 1.0, 1e-12, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let step = cuscuta_step(&s, s.prior(), 0, &mut rng).unwrap();
        for p in &step.posterior {
            assert!((p - 1.0 / 16.0).abs() < 1e-12);
        }
        assert!(step.bits_gained.abs() < 1e-9);
    }

    #[test]
    fn four_bin_step_matches_signal_model() {
        let s = CircularScenario::new(4, 0.7, 1.0, 0.4)
            .unwrap()
            .with_heading(HeadingSchedule { period: 7, offset: 0.3 })
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let step = cuscuta_step(&s, s.prior(), 0, &mut rng).unwrap();
        let model = SignalModel::uniform(s.bin_means(0), NoiseDensity::gaussian(0.4).unwrap()).unwrap();
        let post = model.posterior(Observation::new(step.observation).unwrap()).unwrap();
        for (a, b) in step.posterior.iter().zip(post.probs()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_prior_stays_put() {
        let mut prior = vec![0.0; 16];
        prior[5] = 1.0;
        let s = CircularScenario::with_prior(prior, bin_angle(5, 16), 1.0, 0.2).unwrap();
        let run = run_cuscuta(&s, 30, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert!((run.growth_direction.unwrap() - bin_angle(5, 16)).abs() < 1e-12);
        assert_eq!(run.ledger.bits_processed(), 0.0);
    }

    #[test]
    fn ledger_telescopes_and_is_bounded() {
        let s = CircularScenario::new(64, 2.0, 1.0, 0.1).unwrap();
        let run = run_cuscuta(&s, 100, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let summed: f64 = run.ledger.per_step_bits().iter().sum();
        assert!((summed - run.entropy_reduction_bits()).abs() < 1e-9);
        assert!(run.entropy_reduction_bits() <= 6.0 + 1e-12);
        assert!(run.bearing_error(2.0) <= TAU / 64.0);
        // Default reset erases what was retained.
        assert!((run.ledger.bits_erased() - run.ledger.bits_processed()).abs() < 1e-12);
    }

    #[test]
    fn rotation_permutes_posterior() {
        let m = 32;
        let shift = 5;
        let delta = bin_angle(shift, m);
        let mut prior: Vec<f64> = (0..m).map(|k| 1.0 + (k as f64 * 0.3).sin().abs()).collect();
        let z: f64 = prior.iter().sum();
        prior.iter_mut().for_each(|p| *p /= z);
        let mut rotated = vec![0.0; m];
        for k in 0..m {
            rotated[(k + shift) % m] = prior[k];
        }
        let a = CircularScenario::with_prior(prior, 1.1, 1.0, 0.3).unwrap();
        let b = CircularScenario::with_prior(rotated, 1.1 + delta, 1.0, 0.3)
            .unwrap()
            .with_heading(HeadingSchedule { period: 20, offset: delta })
            .unwrap();
        let ra = run_cuscuta(&a, 12, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let rb = run_cuscuta(&b, 12, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        for (pa, pb) in ra.posteriors.iter().zip(&rb.posteriors) {
            for k in 0..m {
                assert!((pa[k] - pb[(k + shift) % m]).abs() < 1e-12);
            }
        }
        for (x, y) in ra.ledger.per_step_bits().iter().zip(rb.ledger.per_step_bits()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn memory_horizon_forgets_and_pays() {
        let s = CircularScenario::new(64, 1.0, 1.0, 0.1)
            .unwrap()
            .with_memory_horizon(Some(30))
            .unwrap();
        let run = run_cuscuta(&s, 100, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
        assert!(run.bits_forgotten > 0.0);
        let summed: f64 = run.ledger.per_step_bits().iter().sum();
        assert!((summed - run.entropy_reduction_bits()).abs() < 1e-9);
        let expected = run.bits_forgotten + run.ledger.bits_processed();
        assert!((run.ledger.bits_erased() - expected).abs() < 1e-9);
    }

    #[test]
    fn landauer_arithmetic() {
        let l = InfoLedger::new(300.0).unwrap();
        assert_eq!(l.landauer_update(0.0).unwrap().landauer_heat(), 0.0);
        let one = l.landauer_update(1.0).unwrap();
        assert!((one.landauer_heat() - 2.871e-21).abs() < 1e-24);
        let big = l.clone().with_external_energy(1e-9).unwrap().landauer_update(1e6).unwrap();
        assert!((big.efficiency_ratio().unwrap() - 2.871e-6).abs() < 1e-9);
        assert_eq!(l.landauer_update(-1.0).unwrap_err(), Error::NegativeBits(-1.0));
        assert!(InfoLedger::new(0.0).is_err());
    }

    #[test]
    fn heliotropism_static_source_converges() {
        let cfg = HeliotropismConfig {
            coupling: 6.0,
            initial_bearing: 2.2,
            belief_diffusion: 0.0,
            ..Default::default()
        };
        let rec = run_heliotropism(&cfg, 100, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert!(*rec.direction_errors.last().unwrap() <= TAU / 64.0);
        assert!(*rec.errors.last().unwrap() <= TAU / 64.0);
        assert!(rec.is_tracking());
    }

    #[test]
    fn heliotropism_without_information_is_baseline() {
        let cfg = HeliotropismConfig {
            coupling: 1e-9,
            drift_rate: 0.05,
            ..Default::default()
        };
        let rec = run_heliotropism(&cfg, 100, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        assert!((rec.mean_error - rec.baseline_error).abs() < 1e-6);
        assert!((rec.baseline_error - PI / 2.0).abs() < 1e-9);
    }
}
