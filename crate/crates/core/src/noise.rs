// Copyright 2026 The infodyn Authors
// SPDX-License-Identifier: Apache-2.0

//! Additive noise densities.

use std::f64::consts::{E, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::quadrature::Quadrature;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum NoiseKind {
    Gaussian { sigma: f64 },
    /// Uniform on `[-half_width, half_width]`.
    Uniform { half_width: f64 },
    Laplace { scale: f64 },
}

/// A zero-centred noise density with its differential entropy cached.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseDensity {
    kind: NoiseKind,
    entropy_nats: f64,
}

impl NoiseDensity {
    pub fn new(kind: NoiseKind) -> Result<Self> {
        let (field, width) = match kind {
            NoiseKind::Gaussian { sigma } => ("sigma", sigma),
            NoiseKind::Uniform { half_width } => ("half_width", half_width),
            NoiseKind::Laplace { scale } => ("scale", scale),
        };
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::invalid(
                format!("noise.{field}"),
                format!("must be finite and strictly positive, got {width}"),
            ));
        }
        let entropy_nats = match kind {
            NoiseKind::Gaussian { sigma } => 0.5 * (2.0 * PI * E * sigma * sigma).ln(),
            NoiseKind::Uniform { half_width } => (2.0 * half_width).ln(),
            NoiseKind::Laplace { scale } => 1.0 + (2.0 * scale).ln(),
        };
        Ok(NoiseDensity { kind, entropy_nats })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(NoiseKind::Gaussian { sigma })
    }

    pub fn uniform(half_width: f64) -> Result<Self> {
        Self::new(NoiseKind::Uniform { half_width })
    }

    pub fn laplace(scale: f64) -> Result<Self> {
        Self::new(NoiseKind::Laplace { scale })
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    /// Differential entropy in nats (closed form).
    pub fn entropy(&self) -> f64 {
        self.entropy_nats
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self.kind {
            NoiseKind::Gaussian { sigma } => {
                let z = x / sigma;
                (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt())
            }
            NoiseKind::Uniform { half_width } => {
                if x.abs() <= half_width {
                    0.5 / half_width
                } else {
                    0.0
                }
            }
            NoiseKind::Laplace { scale } => (-x.abs() / scale).exp() / (2.0 * scale),
        }
    }

    /// Log density; `-inf` outside the support.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        match self.kind {
            NoiseKind::Gaussian { sigma } => {
                let z = x / sigma;
                -0.5 * z * z - sigma.ln() - 0.5 * (2.0 * PI).ln()
            }
            NoiseKind::Uniform { half_width } => {
                if x.abs() <= half_width {
                    -(2.0 * half_width).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            NoiseKind::Laplace { scale } => -x.abs() / scale - (2.0 * scale).ln(),
        }
    }

    pub fn variance(&self) -> f64 {
        match self.kind {
            NoiseKind::Gaussian { sigma } => sigma * sigma,
            NoiseKind::Uniform { half_width } => half_width * half_width / 3.0,
            NoiseKind::Laplace { scale } => 2.0 * scale * scale,
        }
    }

    /// Half-width of the window outside which the density and the entropy
    /// integrand `f ln f` are negligible at double precision.
    pub fn window(&self) -> f64 {
        match self.kind {
            NoiseKind::Gaussian { sigma } => 12.0 * sigma,
            NoiseKind::Uniform { half_width } => half_width,
            NoiseKind::Laplace { scale } => 40.0 * scale,
        }
    }

    /// Offsets (relative to the centre) where the density has a kink or a
    /// jump, plus the window edges.
    pub fn breakpoints(&self) -> Vec<f64> {
        let w = self.window();
        vec![-w, 0.0, w]
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            NoiseKind::Gaussian { sigma } => sigma * rng.sample::<f64, _>(StandardNormal),
            NoiseKind::Uniform { half_width } => half_width * (2.0 * rng.random::<f64>() - 1.0),
            NoiseKind::Laplace { scale } => {
                let u: f64 = rng.random::<f64>() - 0.5;
                -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
        }
    }

    /// `∫ √(f(ξ) f(ξ+ω)) dξ` in closed form.
    pub fn overlap_closed_form(&self, omega: f64) -> f64 {
        let w = omega.abs();
        match self.kind {
            NoiseKind::Gaussian { sigma } => (-w * w / (8.0 * sigma * sigma)).exp(),
            NoiseKind::Uniform { half_width } => (1.0 - w / (2.0 * half_width)).max(0.0),
            NoiseKind::Laplace { scale } => (1.0 + w / (2.0 * scale)) * (-w / (2.0 * scale)).exp(),
        }
    }

    /// `∫ √(f(ξ) f(ξ+ω)) dξ` by adaptive quadrature. The integrand is
    /// evaluated in log space so that large gaps do not underflow early.
    pub fn overlap(&self, omega: f64, quad: &Quadrature) -> Result<f64> {
        if omega == 0.0 {
            return Ok(1.0);
        }
        let mut pts = self.breakpoints();
        pts.extend(self.breakpoints().into_iter().map(|b| b - omega));
        let r = quad.integrate(
            |x| (0.5 * (self.ln_pdf(x) + self.ln_pdf(x + omega))).exp(),
            &pts,
        )?;
        Ok(r.value)
    }
}

/// `-∫ f ln f` by quadrature, independent of the closed forms.
pub fn noise_entropy_quadrature(noise: &NoiseDensity, quad: &Quadrature) -> Result<f64> {
    let r = quad.integrate(
        |x| {
            let f = noise.pdf(x);
            if f > 0.0 {
                -f * noise.ln_pdf(x)
            } else {
                0.0
            }
        },
        &noise.breakpoints(),
    )?;
    Ok(r.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn families() -> Vec<NoiseDensity> {
        vec![
            NoiseDensity::gaussian(0.7).unwrap(),
            NoiseDensity::uniform(0.5).unwrap(),
            NoiseDensity::laplace(1.3).unwrap(),
        ]
    }

    #[test]
    fn rejects_nonpositive_widths() {
        for bad in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            let err = NoiseDensity::gaussian(bad).unwrap_err();
            assert!(err.to_string().contains("noise.sigma"));
            assert!(NoiseDensity::uniform(bad).is_err());
            assert!(NoiseDensity::laplace(bad).is_err());
        }
    }

    #[test]
    fn densities_integrate_to_one() {
        let q = Quadrature::default();
        for n in families() {
            let r = q.integrate(|x| n.pdf(x), &n.breakpoints()).unwrap();
            assert!((r.value - 1.0).abs() < 1e-9, "{:?}: {}", n.kind(), r.value);
        }
    }

    #[test]
    fn closed_form_entropies() {
        let g = NoiseDensity::gaussian(1.0).unwrap();
        assert!((g.entropy() - 1.418_938_533_204_672_7).abs() < 1e-12);
        assert_eq!(NoiseDensity::uniform(0.5).unwrap().entropy(), 0.0);
        let l = NoiseDensity::laplace(1.0).unwrap();
        assert!((l.entropy() - 1.693_147_180_559_945_3).abs() < 1e-12);
    }

    #[test]
    fn closed_form_entropies_match_quadrature() {
        let q = Quadrature::default();
        for n in families() {
            let numeric = noise_entropy_quadrature(&n, &q).unwrap();
            assert!((numeric - n.entropy()).abs() < 1e-8, "{:?}", n.kind());
        }
    }

    #[test]
    fn ln_pdf_agrees_with_pdf() {
        for n in families() {
            for x in [-2.0, -0.3, 0.0, 0.2, 0.5, 1.7] {
                let p = n.pdf(x);
                if p > 0.0 {
                    assert!((p.ln() - n.ln_pdf(x)).abs() < 1e-12);
                } else {
                    assert_eq!(n.ln_pdf(x), f64::NEG_INFINITY);
                }
            }
        }
    }

    #[test]
    fn overlap_quadrature_matches_closed_forms() {
        let q = Quadrature::default();
        for n in families() {
            for omega in [0.0, 0.1, 0.5, 1.0, 2.5] {
                let a = n.overlap(omega, &q).unwrap();
                let b = n.overlap_closed_form(omega);
                assert!((a - b).abs() < 1e-8, "{:?} ω={omega}: {a} vs {b}", n.kind());
            }
        }
    }

    #[test]
    fn sample_moments() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for n in families() {
            let k = 200_000;
            let xs: Vec<f64> = (0..k).map(|_| n.sample(&mut rng)).collect();
            let mean = xs.iter().sum::<f64>() / k as f64;
            let var = xs.iter().map(|x| x * x).sum::<f64>() / k as f64 - mean * mean;
            let se = (n.variance() / k as f64).sqrt();
            assert!(mean.abs() < 4.0 * se, "{:?}", n.kind());
            assert!((var / n.variance() - 1.0).abs() < 0.03, "{:?}", n.kind());
        }
    }
}
