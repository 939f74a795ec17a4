// Copyright 2026 The infodyn Authors
// SPDX-License-Identifier: Apache-2.0

//! Classical signal detection: a discrete signal observed through additive
//! noise, Bayes updating, and the entropy functionals of the model.
//!
//! All entropies are in nats; use [`crate::nats_to_bits`] for bits.

use rand::Rng;

use crate::noise::NoiseDensity;
use crate::quadrature::Quadrature;
use crate::rng::{chunked_fold, SeedStream};
use crate::{Error, Result};

/// Marginals below this are treated as zero (double-precision underflow).
pub const MARGINAL_FLOOR: f64 = 1e-300;

const NORMALISATION_TOL: f64 = 1e-12;

/// `-Σ p ln p` with `0 ln 0 = 0`.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum()
}

/// `S(posterior) - S(prior)`, negative when the observation was informative.
pub fn entropy_change(prior: &[f64], posterior: &[f64]) -> f64 {
    shannon_entropy(posterior) - shannon_entropy(prior)
}

pub(crate) fn check_distribution(field: &str, probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::invalid(field, "must not be empty"));
    }
    if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(Error::invalid(field, format!("entries must be finite and nonnegative, got {p}")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > NORMALISATION_TOL {
        return Err(Error::invalid(field, format!("must sum to 1, sums to {total}")));
    }
    Ok(())
}

/// Bayes update of `prior` over hypotheses whose observation means are
/// `means`. Returns the posterior and the marginal density at `xi`.
///
/// Unlike [`SignalModel`], the means need not be distinct.
pub fn bayes_update(
    prior: &[f64],
    means: &[f64],
    noise: &NoiseDensity,
    xi: f64,
) -> Result<(Vec<f64>, f64)> {
    debug_assert_eq!(prior.len(), means.len());
    let mut weights: Vec<f64> = prior
        .iter()
        .zip(means)
        .map(|(&p, &x)| if p > 0.0 { p * noise.pdf(xi - x) } else { 0.0 })
        .collect();
    let marginal: f64 = weights.iter().sum();
    if !(marginal >= MARGINAL_FLOOR) {
        return Err(Error::ZeroMarginal { xi, marginal });
    }
    for w in &mut weights {
        *w /= marginal;
    }
    Ok((weights, marginal))
}

/// Draws an index from a discrete distribution.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random::<f64>() * probs.iter().sum::<f64>();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding at the top end: fall back to the last index with mass.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// A realisation of `ξ = X + ε`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observation(f64);

impl Observation {
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::invalid("observation", format!("must be finite, got {value}")));
        }
        Ok(Observation(value))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Posterior {
    probs: Vec<f64>,
    observation: Observation,
}

impl Posterior {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn observation(&self) -> Observation {
        self.observation
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }
}

/// Discrete signal alphabet with prior probabilities and an additive noise
/// density.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalModel {
    values: Vec<f64>,
    prior: Vec<f64>,
    noise: NoiseDensity,
}

impl SignalModel {
    pub fn new(values: Vec<f64>, prior: Vec<f64>, noise: NoiseDensity) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("values", "must not be empty"));
        }
        if values.len() != prior.len() {
            return Err(Error::invalid(
                "prior",
                format!("has {} entries for {} values", prior.len(), values.len()),
            ));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid("values", format!("must be finite, got {v}")));
        }
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("values", "must be pairwise distinct"));
        }
        check_distribution("prior", &prior)?;
        Ok(SignalModel { values, prior, noise })
    }

    /// Uniform prior over `values`.
    pub fn uniform(values: Vec<f64>, noise: NoiseDensity) -> Result<Self> {
        let n = values.len().max(1);
        Self::new(values, vec![1.0 / n as f64; n], noise)
    }

    /// Discretises a continuous prior density on `[lo, hi]` into `bins`
    /// midpoints. The discretisation error is the usual midpoint-rule error.
    pub fn discretised(
        lo: f64,
        hi: f64,
        bins: usize,
        density: impl Fn(f64) -> f64,
        noise: NoiseDensity,
    ) -> Result<Self> {
        if !(hi > lo) || bins == 0 {
            return Err(Error::invalid("values", "need hi > lo and at least one bin"));
        }
        let h = (hi - lo) / bins as f64;
        let values: Vec<f64> = (0..bins).map(|k| lo + (k as f64 + 0.5) * h).collect();
        let mut prior: Vec<f64> = values.iter().map(|&x| density(x).max(0.0)).collect();
        let total: f64 = prior.iter().sum();
        if !(total > 0.0) {
            return Err(Error::invalid("prior", "density has no mass on the interval"));
        }
        prior.iter_mut().for_each(|p| *p /= total);
        Self::new(values, prior, noise)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn noise(&self) -> &NoiseDensity {
        &self.noise
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Prior mean of the signal.
    pub fn prior_mean(&self) -> f64 {
        self.values.iter().zip(&self.prior).map(|(x, p)| x * p).sum()
    }

    /// `p(ξ) = Σ p_i f(ξ - x_i)`.
    pub fn marginal_density(&self, xi: f64) -> f64 {
        self.values
            .iter()
            .zip(&self.prior)
            .map(|(&x, &p)| p * self.noise.pdf(xi - x))
            .sum()
    }

    fn ln_marginal(&self, xi: f64) -> f64 {
        let terms: Vec<f64> = self
            .values
            .iter()
            .zip(&self.prior)
            .filter(|(_, &p)| p > 0.0)
            .map(|(&x, &p)| p.ln() + self.noise.ln_pdf(xi - x))
            .collect();
        let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return max;
        }
        max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
    }

    pub fn posterior(&self, xi: Observation) -> Result<Posterior> {
        let (probs, _) = bayes_update(&self.prior, &self.values, &self.noise, xi.value())?;
        Ok(Posterior {
            probs,
            observation: xi,
        })
    }

    /// Posterior after several conditionally independent observations.
    pub fn posterior_sequence(&self, observations: &[Observation]) -> Result<Vec<f64>> {
        observations.iter().try_fold(self.prior.clone(), |p, xi| {
            bayes_update(&p, &self.values, &self.noise, xi.value()).map(|(q, _)| q)
        })
    }

    /// `Σ x_i π_i(ξ)`.
    pub fn posterior_mean(&self, xi: Observation) -> Result<f64> {
        let post = self.posterior(xi)?;
        Ok(self.values.iter().zip(post.probs()).map(|(x, p)| x * p).sum())
    }

    /// Ancestral sampling of `ξ = X + ε`.
    pub fn sample_observation<R: Rng + ?Sized>(&self, rng: &mut R) -> Observation {
        let i = sample_index(&self.prior, rng);
        Observation(self.values[i] + self.noise.sample(rng))
    }

    fn integration_points(&self) -> Vec<f64> {
        let offsets = self.noise.breakpoints();
        self.values
            .iter()
            .zip(&self.prior)
            .filter(|(_, &p)| p > 0.0)
            .flat_map(|(&x, _)| offsets.iter().map(move |o| x + o))
            .collect()
    }

    /// `S_ξ = -∫ p ln p` by adaptive quadrature.
    pub fn observation_entropy(&self, quad: &Quadrature) -> Result<f64> {
        let r = quad.integrate(
            |xi| {
                let lp = self.ln_marginal(xi);
                if lp == f64::NEG_INFINITY {
                    0.0
                } else {
                    -lp.exp() * lp
                }
            },
            &self.integration_points(),
        )?;
        Ok(r.value)
    }

    /// `J(ξ, X) = S_ξ - S_ε` in nats.
    pub fn mutual_information(&self, quad: &Quadrature) -> Result<f64> {
        if self.prior.iter().filter(|&&p| p > 0.0).count() <= 1 {
            return Ok(0.0);
        }
        let s_xi = self.observation_entropy(quad)?;
        // Negative values can only be quadrature noise.
        Ok((s_xi - self.noise.entropy()).max(0.0))
    }

    pub fn mutual_information_bits(&self, quad: &Quadrature) -> Result<f64> {
        Ok(crate::nats_to_bits(self.mutual_information(quad)?))
    }

    /// Monte Carlo mean and standard error of the entropy change over
    /// `n` observations drawn from the marginal.
    pub fn mean_entropy_change(&self, n: usize, seed: SeedStream) -> Result<(f64, f64)> {
        let prior_entropy = shannon_entropy(&self.prior);
        let chunks = chunked_fold(
            seed,
            n,
            || (0.0f64, 0.0f64),
            |_, rng| {
                let xi = self.sample_observation(rng);
                let post = self.posterior(xi)?;
                Ok(shannon_entropy(post.probs()) - prior_entropy)
            },
            |acc, d| {
                acc.0 += d;
                acc.1 += d * d;
            },
        );
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for c in chunks {
            let (s, q) = c?;
            sum += s;
            sum_sq += q;
        }
        let nf = n as f64;
        let mean = sum / nf;
        let var = (sum_sq / nf - mean * mean).max(0.0) * nf / (nf - 1.0).max(1.0);
        Ok((mean, (var / nf).sqrt()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gauss(s: f64) -> NoiseDensity {
        NoiseDensity::gaussian(s).unwrap()
    }

    /// Bayes with the observation known only to lie in a small cell: the
    /// cell probabilities come from a fine midpoint sum over the cell.
    fn grid_bayes(values: &[f64], prior: &[f64], noise: &NoiseDensity, xi: f64) -> Vec<f64> {
        let h = 1e-5;
        let steps = 200;
        let cell: Vec<f64> = values
            .iter()
            .zip(prior)
            .map(|(&x, &p)| {
                let dx = h / steps as f64;
                let mass: f64 = (0..steps)
                    .map(|k| noise.pdf(xi - h / 2.0 + (k as f64 + 0.5) * dx - x) * dx)
                    .sum();
                p * mass
            })
            .collect();
        let z: f64 = cell.iter().sum();
        cell.iter().map(|c| c / z).collect()
    }

    /// `-∫ p ln p` by a plain Riemann sum on a fine grid.
    fn riemann_entropy(model: &SignalModel, lo: f64, hi: f64, n: usize) -> f64 {
        let h = (hi - lo) / n as f64;
        (0..n)
            .map(|k| {
                let p = model.marginal_density(lo + (k as f64 + 0.5) * h);
                if p > 0.0 {
                    -p * p.ln() * h
                } else {
                    0.0
                }
            })
            .sum()
    }

    #[test]
    fn model_validation() {
        let g = gauss(1.0);
        assert!(SignalModel::new(vec![], vec![], g).is_err());
        assert!(SignalModel::new(vec![0.0, 0.0], vec![0.5, 0.5], g).is_err());
        assert!(SignalModel::new(vec![0.0, 1.0], vec![0.5], g).is_err());
        let err = SignalModel::new(vec![0.0, 1.0], vec![0.5, 0.4], g).unwrap_err();
        assert!(err.to_string().contains("prior"));
        assert!(SignalModel::new(vec![0.0, 1.0], vec![1.2, -0.2], g).is_err());
        assert!(Observation::new(f64::NAN).is_err());
    }

    #[test]
    fn marginal_single_value_is_noise_density() {
        let m = SignalModel::new(vec![0.0], vec![1.0], gauss(1.0)).unwrap();
        assert!((m.marginal_density(0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
    }

    #[test]
    fn marginal_symmetric_configuration() {
        let m = SignalModel::uniform(vec![-1.0, 1.0], gauss(1.0)).unwrap();
        for xi in [0.0, 0.3, 1.7] {
            assert!((m.marginal_density(xi) - m.marginal_density(-xi)).abs() < 1e-16);
        }
    }

    #[test]
    fn marginal_three_values_direct_sum() {
        let m = SignalModel::new(vec![0.0, 1.0, 2.0], vec![0.2, 0.3, 0.5], gauss(0.7)).unwrap();
        let phi = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let s = 0.7;
        let oracle = 0.2 * phi(1.3 / s) / s + 0.3 * phi(0.3 / s) / s + 0.5 * phi(-0.7 / s) / s;
        assert!((m.marginal_density(1.3) - oracle).abs() < 1e-15);
    }

    #[test]
    fn posterior_symmetric_observation_returns_prior() {
        for noise in [gauss(0.4), NoiseDensity::laplace(1.0).unwrap()] {
            let m = SignalModel::uniform(vec![-2.0, 2.0], noise).unwrap();
            let p = m.posterior(Observation::new(0.0).unwrap()).unwrap();
            assert!((p.probs()[0] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_prior_is_a_fixed_point() {
        let m = SignalModel::new(vec![-1.0, 0.5, 3.0], vec![0.0, 1.0, 0.0], gauss(1.0)).unwrap();
        for xi in [-4.0, 0.0, 2.2] {
            let xi = Observation::new(xi).unwrap();
            assert_eq!(m.posterior(xi).unwrap().probs(), &[0.0, 1.0, 0.0]);
            assert_eq!(m.posterior_mean(xi).unwrap(), 0.5);
        }
    }

    #[test]
    fn posterior_matches_grid_bayes_oracle() {
        let m = SignalModel::uniform(vec![0.0, 1.0], gauss(0.5)).unwrap();
        let post = m.posterior(Observation::new(0.8).unwrap()).unwrap();
        let oracle = grid_bayes(m.values(), m.prior(), m.noise(), 0.8);
        for (a, b) in post.probs().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn posterior_mean_asymmetric_matches_oracle() {
        let m = SignalModel::new(vec![0.0, 1.0, 2.0], vec![0.2, 0.3, 0.5], gauss(0.7)).unwrap();
        let oracle = grid_bayes(m.values(), m.prior(), m.noise(), 1.3);
        let expected: f64 = m.values().iter().zip(&oracle).map(|(x, p)| x * p).sum();
        let got = m.posterior_mean(Observation::new(1.3).unwrap()).unwrap();
        assert!((got - expected).abs() < 1e-9);
        assert!((0.0..=2.0).contains(&got));
    }

    #[test]
    fn symmetric_posterior_mean_is_zero() {
        let m = SignalModel::uniform(vec![-1.5, 1.5], gauss(0.8)).unwrap();
        assert_eq!(m.posterior_mean(Observation::new(0.0).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn far_observation_is_zero_marginal() {
        let m = SignalModel::uniform(vec![0.0, 1.0], gauss(0.1)).unwrap();
        let err = m.posterior(Observation::new(1e3).unwrap()).unwrap_err();
        assert!(matches!(err, Error::ZeroMarginal { .. }));
        let u = SignalModel::uniform(vec![0.0, 1.0], NoiseDensity::uniform(0.5).unwrap()).unwrap();
        assert!(u.posterior(Observation::new(2.0).unwrap()).is_err());
    }

    #[test]
    fn flat_likelihood_leaves_prior() {
        // Both translated supports cover ξ, where the density is constant.
        let m = SignalModel::new(vec![0.0, 0.5], vec![0.3, 0.7], NoiseDensity::uniform(2.0).unwrap()).unwrap();
        let p = m.posterior(Observation::new(0.2).unwrap()).unwrap();
        assert!((p.probs()[0] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn sampling_tight_noise_and_determinism() {
        let m = SignalModel::new(vec![3.0], vec![1.0], gauss(1e-9)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert!((m.sample_observation(&mut rng).value() - 3.0).abs() < 1e-6);
        }
        let m = SignalModel::uniform(vec![0.0, 1.0], gauss(1.0)).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50).map(|_| m.sample_observation(&mut rng).value()).collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));
    }

    #[test]
    fn sample_mean_law_of_large_numbers() {
        let m = SignalModel::uniform(vec![0.0, 1.0], gauss(1.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 100_000;
        let mean = (0..n).map(|_| m.sample_observation(&mut rng).value()).sum::<f64>() / n as f64;
        // Var ξ = 1 + 1/4.
        let se = (1.25f64 / n as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn samples_follow_marginal_ks() {
        let m = SignalModel::new(vec![-1.0, 0.5, 2.0], vec![0.5, 0.2, 0.3], gauss(0.6)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let mut xs: Vec<f64> = (0..n).map(|_| m.sample_observation(&mut rng).value()).collect();
        xs.sort_by(f64::total_cmp);
        // Tabulated CDF by cumulative trapezoid on a fine grid.
        let (lo, hi, k) = (-10.0, 10.0, 400_000);
        let h = (hi - lo) / k as f64;
        let mut cdf = vec![0.0; k + 1];
        for j in 1..=k {
            let a = lo + (j - 1) as f64 * h;
            cdf[j] = cdf[j - 1] + 0.5 * h * (m.marginal_density(a) + m.marginal_density(a + h));
        }
        let eval = |x: f64| {
            let t = ((x - lo) / h).clamp(0.0, k as f64 - 1.0);
            let j = t.floor() as usize;
            cdf[j] + (t - j as f64) * (cdf[j + 1] - cdf[j])
        };
        let d = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = eval(x);
                (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(d < 1.628 / (n as f64).sqrt(), "KS statistic {d}");
    }

    #[test]
    fn entropy_change_basics() {
        assert_eq!(entropy_change(&[0.3, 0.7], &[0.3, 0.7]), 0.0);
        let d = entropy_change(&[0.5, 0.5], &[1.0, 0.0]);
        assert!((d + std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn observation_entropy_single_value_is_noise_entropy() {
        let q = Quadrature::default();
        for noise in [gauss(0.3), NoiseDensity::uniform(0.8).unwrap(), NoiseDensity::laplace(0.5).unwrap()] {
            let m = SignalModel::new(vec![1.0], vec![1.0], noise).unwrap();
            assert!((m.observation_entropy(&q).unwrap() - noise.entropy()).abs() < 1e-8);
            assert_eq!(m.mutual_information(&q).unwrap(), 0.0);
        }
    }

    #[test]
    fn separated_mixture_adds_one_bit() {
        let q = Quadrature::default();
        let m = SignalModel::uniform(vec![-5.0, 5.0], gauss(0.1)).unwrap();
        let s = m.observation_entropy(&q).unwrap();
        assert!((s - (m.noise().entropy() + std::f64::consts::LN_2)).abs() < 1e-6);
        let j = m.mutual_information(&q).unwrap();
        assert!((j - std::f64::consts::LN_2).abs() < 1e-6);
        assert!((m.mutual_information_bits(&q).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn observation_entropy_matches_riemann_oracle() {
        let q = Quadrature::default();
        let m = SignalModel::uniform(vec![0.0, 1.0], gauss(1.0)).unwrap();
        let oracle = riemann_entropy(&m, -15.0, 16.0, 2_000_000);
        assert!((m.observation_entropy(&q).unwrap() - oracle).abs() < 1e-8);
    }

    #[test]
    fn uniform_noise_mixture_entropy_matches_riemann() {
        let q = Quadrature::default();
        let m = SignalModel::new(vec![0.0, 0.7, 3.0], vec![0.2, 0.5, 0.3], NoiseDensity::uniform(0.5).unwrap()).unwrap();
        let oracle = riemann_entropy(&m, -1.0, 4.0, 5_000_000);
        assert!((m.observation_entropy(&q).unwrap() - oracle).abs() < 1e-6);
    }

    #[test]
    fn mutual_information_does_not_grow_with_sigma() {
        let q = Quadrature::default();
        let sigmas = [0.1, 0.2, 0.4, 0.8, 1.6, 3.2, 6.4];
        let mi: Vec<f64> = sigmas
            .iter()
            .map(|&s| {
                SignalModel::new(vec![-1.0, 0.0, 2.0], vec![0.3, 0.3, 0.4], gauss(s))
                    .unwrap()
                    .mutual_information(&q)
                    .unwrap()
            })
            .collect();
        for w in mi.windows(2) {
            assert!(w[1] <= w[0] + 1e-8, "{mi:?}");
        }
    }

    #[test]
    fn posterior_sequence_composes_single_updates() {
        let m = SignalModel::new(vec![0.0, 1.0, 2.0], vec![0.2, 0.3, 0.5], gauss(0.7)).unwrap();
        let obs: Vec<Observation> = [0.4, 1.9, 1.1].iter().map(|&x| Observation::new(x).unwrap()).collect();
        let seq = m.posterior_sequence(&obs).unwrap();
        // Product of likelihoods in one shot.
        let w: Vec<f64> = m
            .values()
            .iter()
            .zip(m.prior())
            .map(|(&x, &p)| p * obs.iter().map(|o| m.noise().pdf(o.value() - x)).product::<f64>())
            .collect();
        let z: f64 = w.iter().sum();
        for (a, b) in seq.iter().zip(&w) {
            assert!((a - b / z).abs() < 1e-14);
        }
    }

    #[test]
    fn discretised_prior_is_normalised() {
        let m = SignalModel::discretised(-3.0, 3.0, 60, |x| (-x * x / 2.0).exp(), gauss(1.0)).unwrap();
        assert_eq!(m.len(), 60);
        assert!((m.prior().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(m.prior_mean().abs() < 1e-12);
    }
}
