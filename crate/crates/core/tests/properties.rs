// Copyright 2026 The infodyn Authors
// SPDX-License-Identifier: Apache-2.0

use infodyn_core::noise::NoiseDensity;
use infodyn_core::quadrature::Quadrature;
use infodyn_core::quantum::{averaged_density_analytic, single_shot_update, von_neumann_entropy};
use infodyn_core::signal::shannon_entropy;
use infodyn_core::{Observation, QuantumSystem, SignalModel, StateVector};
use proptest::prelude::*;

fn noise_strategy() -> impl Strategy<Value = NoiseDensity> {
    prop_oneof![
        (0.05f64..3.0).prop_map(|s| NoiseDensity::gaussian(s).unwrap()),
        (0.05f64..3.0).prop_map(|a| NoiseDensity::uniform(a).unwrap()),
        (0.05f64..3.0).prop_map(|b| NoiseDensity::laplace(b).unwrap()),
    ]
}

fn distribution(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(|w| {
        let z: f64 = w.iter().sum();
        w.iter().map(|x| x / z).collect()
    })
}

fn model_strategy() -> impl Strategy<Value = SignalModel> {
    (1usize..6)
        .prop_flat_map(|n| {
            (
                prop::collection::btree_set(-40i32..40, n),
                distribution(n),
                noise_strategy(),
            )
        })
        .prop_map(|(vals, prior, noise)| {
            let values: Vec<f64> = vals.into_iter().map(|v| v as f64 * 0.25).collect();
            let n = values.len();
            let prior = if prior.len() == n { prior } else { vec![1.0 / n as f64; n] };
            SignalModel::new(values, prior, noise).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn posterior_is_normalised_and_satisfies_bayes_identity(model in model_strategy(), u in 0.0f64..1.0) {
        // Pick ξ inside the support of one component so the marginal is positive.
        let k = ((u * model.len() as f64) as usize).min(model.len() - 1);
        let xi = model.values()[k] + (u - 0.5) * 0.5 * model.noise().window().min(1.0);
        let obs = Observation::new(xi).unwrap();
        let post = model.posterior(obs).unwrap();
        let total: f64 = post.probs().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let marginal = model.marginal_density(xi);
        for i in 0..model.len() {
            let joint = model.prior()[i] * model.noise().pdf(xi - model.values()[i]);
            prop_assert!((post.probs()[i] * marginal - joint).abs() < 1e-12);
        }
        let mean = model.posterior_mean(obs).unwrap();
        let lo = model.values().iter().copied().fold(f64::INFINITY, f64::min);
        let hi = model.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(mean >= lo - 1e-12 && mean <= hi + 1e-12);
    }

    #[test]
    fn mutual_information_is_nonnegative_entropy_difference(model in model_strategy()) {
        let q = Quadrature::default();
        let j = model.mutual_information(&q).unwrap();
        let s_xi = model.observation_entropy(&q).unwrap();
        prop_assert!(j >= 0.0);
        prop_assert!(s_xi >= model.noise().entropy() - 1e-8);
        if model.len() > 1 {
            prop_assert!((j - (s_xi - model.noise().entropy())).abs() < 1e-8);
        }
        // Never more than the prior entropy.
        prop_assert!(j <= shannon_entropy(model.prior()) + 1e-8);
    }

    #[test]
    fn averaging_damps_every_coherence(
        energies in prop::collection::btree_set(-20i32..20, 2..5),
        noise in noise_strategy(),
        seed_probs in distribution(4),
    ) {
        let energies: Vec<f64> = energies.into_iter().map(|e| e as f64 * 0.3).collect();
        let n = energies.len();
        let probs: Vec<f64> = {
            let w = &seed_probs[..n];
            let z: f64 = w.iter().sum();
            w.iter().map(|x| x / z).collect()
        };
        let sys = QuantumSystem::new(energies).unwrap();
        let state = StateVector::from_probabilities(&probs).unwrap();
        let q = Quadrature::default();
        let rho = averaged_density_analytic(&sys, &state, &noise, &q).unwrap();
        let pure = state.projector();
        for i in 0..n {
            prop_assert_eq!(rho.entries()[(i, i)].re, pure[(i, i)].re);
            for j in 0..n {
                if i != j {
                    prop_assert!(rho.entries()[(i, j)].norm() < pure[(i, j)].norm());
                }
            }
        }
        // The observer loses information.
        prop_assert!(von_neumann_entropy(&rho).unwrap() > 0.0);
        prop_assert!(von_neumann_entropy(&rho).unwrap() <= (n as f64).ln() + 1e-12);
    }

    #[test]
    fn single_shot_update_keeps_norm(
        probs in distribution(3),
        xi in -1.0f64..3.0,
        sigma in 0.1f64..2.0,
    ) {
        let sys = QuantumSystem::new(vec![0.0, 1.0, 2.0]).unwrap();
        let state = StateVector::from_probabilities(&probs).unwrap();
        let noise = NoiseDensity::gaussian(sigma).unwrap();
        let next = single_shot_update(&sys, &state, &noise, xi).unwrap();
        prop_assert!((next.amplitudes().norm_squared() - 1.0).abs() < 1e-12);
    }
}
