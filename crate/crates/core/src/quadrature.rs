// Copyright 2026 The infodyn Authors
// SPDX-License-Identifier: Apache-2.0

//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.
//!
//! The integration range is split at caller-supplied breakpoints (kinks and
//! jumps of the integrand); the subinterval with the largest error estimate
//! is bisected until the summed estimate meets the absolute tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            abs_tol: 1e-8,
            max_subdivisions: 5000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Piece {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Piece {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

impl Quadrature {
    pub fn with_tolerance(abs_tol: f64) -> Self {
        Quadrature {
            abs_tol,
            ..Default::default()
        }
    }

    /// Integrates `f` over `[min(points), max(points)]`, treating every
    /// interior point as a breakpoint. Non-finite and duplicate points are
    /// ignored.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, points: &[f64]) -> Result<Integral> {
        let mut pts: Vec<f64> = points.iter().copied().filter(|x| x.is_finite()).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        if pts.len() < 2 {
            return Ok(Integral {
                value: 0.0,
                error: 0.0,
                evaluations: 0,
            });
        }

        let mut heap: BinaryHeap<Piece> = pts.windows(2).map(|w| gk15(&f, w[0], w[1])).collect();
        let mut evaluations = 15 * heap.len();
        let mut subdivisions = 0;
        loop {
            let error: f64 = heap.iter().map(|p| p.error).sum();
            if error <= self.abs_tol {
                break;
            }
            if subdivisions >= self.max_subdivisions {
                return Err(Error::QuadratureFailure {
                    tolerance: self.abs_tol,
                    error,
                });
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // Interval exhausted at machine precision.
                return Err(Error::QuadratureFailure {
                    tolerance: self.abs_tol,
                    error,
                });
            }
            heap.push(gk15(&f, worst.a, mid));
            heap.push(gk15(&f, mid, worst.b));
            evaluations += 30;
            subdivisions += 1;
        }
        Ok(Integral {
            value: heap.iter().map(|p| p.value).sum(),
            error: heap.iter().map(|p| p.error).sum(),
            evaluations,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let q = Quadrature::default();
        let r = q.integrate(|x| x.powi(5) - 3.0 * x * x + 1.0, &[-1.0, 2.0]).unwrap();
        // ∫_{-1}^{2} x^5 - 3x^2 + 1 = 63/6 - 9 + 3
        assert!((r.value - (63.0 / 6.0 - 6.0)).abs() < 1e-13);
    }

    #[test]
    fn gaussian_normalises() {
        let q = Quadrature::default();
        let f = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let r = q.integrate(f, &[-12.0, 0.0, 12.0]).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!(r.error <= 1e-8);
    }

    #[test]
    fn breakpoints_handle_kinks_and_jumps() {
        let q = Quadrature::default();
        let r = q.integrate(|x: f64| (-x.abs()).exp(), &[-30.0, 0.0, 30.0]).unwrap();
        assert!((r.value - 2.0 * (1.0 - (-30.0f64).exp())).abs() < 1e-10);
        let step = |x: f64| if x < 0.3 { 1.0 } else { 2.0 };
        let r = q.integrate(step, &[0.0, 0.3, 1.0]).unwrap();
        assert!((r.value - (0.3 + 1.4)).abs() < 1e-14);
    }

    #[test]
    fn unreachable_tolerance_fails() {
        let q = Quadrature {
            abs_tol: 1e-12,
            max_subdivisions: 10,
        };
        let err = q.integrate(|x: f64| (1.0 / x).sin(), &[1e-6, 1.0]).unwrap_err();
        assert!(matches!(err, Error::QuadratureFailure { .. }));
    }

    #[test]
    fn degenerate_range_is_zero() {
        let q = Quadrature::default();
        assert_eq!(q.integrate(|x| x, &[1.0, 1.0]).unwrap().value, 0.0);
    }
}
