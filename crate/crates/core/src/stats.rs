// Copyright 2026 The infodyn Authors
// SPDX-License-Identifier: Apache-2.0

//! Small statistics helpers shared by the Monte Carlo estimators.

use rand::Rng;

use crate::rng::SeedStream;

/// Two-sided 99% standard normal quantile.
pub const Z99: f64 = 2.575_829_303_548_901;

/// Bootstrap standard error of a mean estimated from equally sized blocks.
///
/// `block_means` are the means of independent blocks of samples; the
/// estimator resamples whole blocks with replacement `replicates` times.
pub fn bootstrap_std_err(block_means: &[f64], replicates: usize, seed: SeedStream) -> f64 {
    let k = block_means.len();
    if k < 2 || replicates < 2 {
        return 0.0;
    }
    let mut rng = seed.rng();
    let reps: Vec<f64> = (0..replicates)
        .map(|_| (0..k).map(|_| block_means[rng.random_range(0..k)]).sum::<f64>() / k as f64)
        .collect();
    let m = reps.iter().sum::<f64>() / replicates as f64;
    (reps.iter().map(|r| (r - m).powi(2)).sum::<f64>() / (replicates - 1) as f64).sqrt()
}

/// Ordinary least squares `y = intercept + slope·x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

pub fn least_squares(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some(LineFit {
        slope,
        intercept: my - slope * mx,
    })
}

/// Normal-approximation binomial confidence interval for a proportion.
pub fn binomial_interval(p: f64, n: usize, z: f64) -> (f64, f64) {
    let half = z * (p * (1.0 - p) / n as f64).sqrt();
    (p - half, p + half)
}
