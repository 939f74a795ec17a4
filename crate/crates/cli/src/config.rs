// Copyright 2026 The infodyn Authors
// SPDX-License-Identifier: Apache-2.0

//! Experiment configs.
//!
//! ```toml
//! schema_version = 1
//! kind = "decohere"
//! seed = 7
//!
//! [decohere]
//! energies = [0.0, 2.0]
//! probabilities = [0.5, 0.5]
//! noise = { kind = "gaussian", sigma = 1.0 }
//! samples = 100000
//! ```
//!
//! Unknown keys are rejected. Validation reports every violation it finds,
//! each naming the offending field by its dotted path.

use std::fmt;
use std::path::PathBuf;

use infodyn_core::noise::NoiseKind;
use infodyn_core::plant::{DirectionEstimator, ErasurePolicy, HeadingSchedule};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Posterior,
    MutualInfo,
    Decohere,
    Unravel,
    Collapse,
    Cuscuta,
    Heliotropism,
    Ledger,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::Posterior,
        ExperimentKind::MutualInfo,
        ExperimentKind::Decohere,
        ExperimentKind::Unravel,
        ExperimentKind::Collapse,
        ExperimentKind::Cuscuta,
        ExperimentKind::Heliotropism,
        ExperimentKind::Ledger,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Posterior => "posterior",
            ExperimentKind::MutualInfo => "mutual-info",
            ExperimentKind::Decohere => "decohere",
            ExperimentKind::Unravel => "unravel",
            ExperimentKind::Collapse => "collapse",
            ExperimentKind::Cuscuta => "cuscuta",
            ExperimentKind::Heliotropism => "heliotropism",
            ExperimentKind::Ledger => "ledger",
        }
    }

    /// Fixed CSV header for the kind.
    pub fn columns(&self) -> &'static [&'static str] {
        match self {
            ExperimentKind::Posterior => &[
                "observation",
                "xi",
                "marginal",
                "posterior_mean",
                "entropy_change_nats",
                "state",
                "value",
                "prior",
                "posterior",
            ],
            ExperimentKind::MutualInfo => &["quantity", "nats", "bits", "std_err_nats"],
            ExperimentKind::Decohere => &[
                "i",
                "j",
                "gap",
                "lambda",
                "analytic_re",
                "mc_re",
                "mc_im",
                "mc_std_err",
            ],
            ExperimentKind::Unravel => &[
                "t",
                "i",
                "j",
                "rho_re",
                "rho_im",
                "rho_std_err",
                "mean_lindblad_variance",
                "mean_max_occupation",
            ],
            ExperimentKind::Collapse => &[
                "level", "energy", "born", "frequency", "count", "ci_low", "ci_high",
            ],
            ExperimentKind::Cuscuta => &[
                "run",
                "true_bearing",
                "growth_direction",
                "bearing_error",
                "bits",
                "bits_forgotten",
                "bits_erased",
                "landauer_heat_j",
            ],
            ExperimentKind::Heliotropism => &[
                "drift_rate",
                "coupling",
                "mean_error",
                "late_error",
                "baseline_error",
                "tracking_fraction",
                "mean_bits",
            ],
            ExperimentKind::Ledger => &["step", "bits_erased", "cumulative_bits", "landauer_heat_j"],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rows `[[re, ...], ...]`, optional imaginary part of the same shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Option<Vec<Vec<f64>>>,
}

fn default_tolerance() -> f64 {
    1e-8
}

fn default_temperature() -> f64 {
    300.0
}

fn default_stride() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosteriorParams {
    pub values: Vec<f64>,
    /// Uniform when omitted.
    #[serde(default)]
    pub prior: Option<Vec<f64>>,
    pub noise: NoiseKind,
    /// Explicit observations, processed in order.
    #[serde(default)]
    pub observations: Vec<f64>,
    /// Additional observations drawn from the model.
    #[serde(default)]
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MutualInfoParams {
    pub values: Vec<f64>,
    #[serde(default)]
    pub prior: Option<Vec<f64>>,
    pub noise: NoiseKind,
    /// Monte Carlo check of `-E[ΔS]`; skipped when zero.
    #[serde(default)]
    pub mc_samples: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecohereParams {
    pub energies: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub noise: NoiseKind,
    pub samples: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnravelParams {
    pub hamiltonian: MatrixSpec,
    pub lindblad: MatrixSpec,
    pub coupling: f64,
    pub dt: f64,
    pub horizon: f64,
    /// Zero-phase initial state, probabilities in the computational basis.
    pub initial: Vec<f64>,
    pub trajectories: usize,
    #[serde(default = "default_stride")]
    pub stride: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollapseParams {
    pub energies: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub coupling: f64,
    pub dt: f64,
    pub horizon: f64,
    pub trajectories: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CuscutaParams {
    pub bins: usize,
    pub gradient: f64,
    pub sensor_sigma: f64,
    pub steps: usize,
    pub runs: usize,
    /// Drawn uniformly per run when omitted.
    #[serde(default)]
    pub true_bearing: Option<f64>,
    #[serde(default)]
    pub heading: HeadingSchedule,
    #[serde(default)]
    pub estimator: DirectionEstimator,
    #[serde(default)]
    pub erasure: ErasurePolicy,
    #[serde(default)]
    pub memory_horizon: Option<usize>,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeliotropismParams {
    pub drift_rates: Vec<f64>,
    pub coupling: f64,
    pub steps: usize,
    pub runs: usize,
    #[serde(default)]
    pub bins: Option<usize>,
    #[serde(default)]
    pub belief_diffusion: Option<f64>,
    #[serde(default)]
    pub sweep_period: Option<usize>,
    #[serde(default)]
    pub initial_bearing: Option<f64>,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerParams {
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    /// Bits erased at each step.
    pub erasures: Vec<f64>,
    #[serde(default)]
    pub external_energy: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub posterior: Option<PosteriorParams>,
    #[serde(default, rename = "mutual-info")]
    pub mutual_info: Option<MutualInfoParams>,
    #[serde(default)]
    pub decohere: Option<DecohereParams>,
    #[serde(default)]
    pub unravel: Option<UnravelParams>,
    #[serde(default)]
    pub collapse: Option<CollapseParams>,
    #[serde(default)]
    pub cuscuta: Option<CuscutaParams>,
    #[serde(default)]
    pub heliotropism: Option<HeliotropismParams>,
    #[serde(default)]
    pub ledger: Option<LedgerParams>,
}

/// One failed check, named by dotted field path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Default)]
struct Checker {
    violations: Vec<Violation>,
}

impl Checker {
    fn fail(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            field: field.into(),
            message: message.into(),
        });
    }

    fn positive(&mut self, field: &str, v: f64) {
        if !(v.is_finite() && v > 0.0) {
            self.fail(field, format!("must be finite and strictly positive, got {v}"));
        }
    }

    fn nonnegative(&mut self, field: &str, v: f64) {
        if !(v.is_finite() && v >= 0.0) {
            self.fail(field, format!("must be finite and nonnegative, got {v}"));
        }
    }

    fn at_least(&mut self, field: &str, v: usize, min: usize) {
        if v < min {
            self.fail(field, format!("must be at least {min}, got {v}"));
        }
    }

    fn finite_all(&mut self, field: &str, vs: &[f64]) {
        if let Some(v) = vs.iter().find(|v| !v.is_finite()) {
            self.fail(field, format!("entries must be finite, got {v}"));
        }
    }

    fn distribution(&mut self, field: &str, ps: &[f64], len: usize) {
        if ps.len() != len {
            self.fail(field, format!("has {} entries, expected {len}", ps.len()));
            return;
        }
        if let Some(p) = ps.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            self.fail(field, format!("entries must be nonnegative, got {p}"));
            return;
        }
        let total: f64 = ps.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            self.fail(field, format!("normalisation: must sum to 1, sums to {total}"));
        }
    }

    fn distinct(&mut self, field: &str, vs: &[f64]) {
        let mut s = vs.to_vec();
        s.sort_by(f64::total_cmp);
        if s.windows(2).any(|w| w[0] == w[1]) {
            self.fail(field, "must be pairwise distinct");
        }
    }

    fn noise(&mut self, prefix: &str, n: &NoiseKind) {
        match *n {
            NoiseKind::Gaussian { sigma } => self.positive(&format!("{prefix}.noise.sigma"), sigma),
            NoiseKind::Uniform { half_width } => {
                self.positive(&format!("{prefix}.noise.half_width"), half_width)
            }
            NoiseKind::Laplace { scale } => self.positive(&format!("{prefix}.noise.scale"), scale),
        }
    }

    fn alphabet(&mut self, prefix: &str, values: &[f64], prior: Option<&[f64]>) {
        let f = format!("{prefix}.values");
        if values.is_empty() {
            self.fail(&f, "must not be empty");
        }
        self.finite_all(&f, values);
        self.distinct(&f, values);
        if let Some(p) = prior {
            self.distribution(&format!("{prefix}.prior"), p, values.len());
        }
    }

    fn matrix(&mut self, field: &str, m: &MatrixSpec, dim: usize) {
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == dim && rows.iter().all(|r| r.len() == dim);
        if !shape_ok(&m.re) {
            self.fail(format!("{field}.re"), format!("must be {dim}x{dim}"));
            return;
        }
        for r in &m.re {
            self.finite_all(&format!("{field}.re"), r);
        }
        if let Some(im) = &m.im {
            if !shape_ok(im) {
                self.fail(format!("{field}.im"), format!("must be {dim}x{dim}"));
                return;
            }
        }
        let im = |i: usize, j: usize| m.im.as_ref().map_or(0.0, |im| im[i][j]);
        for i in 0..dim {
            for j in 0..dim {
                if (m.re[i][j] - m.re[j][i]).abs() > 1e-12 || (im(i, j) + im(j, i)).abs() > 1e-12 {
                    self.fail(field, "must be Hermitian");
                    return;
                }
            }
        }
    }

    fn time_grid(&mut self, prefix: &str, dt: f64, horizon: f64) {
        self.positive(&format!("{prefix}.dt"), dt);
        self.positive(&format!("{prefix}.horizon"), horizon);
        if dt.is_finite() && horizon.is_finite() && dt > horizon {
            self.fail(format!("{prefix}.horizon"), "must be at least dt");
        }
    }

    fn stability(&mut self, prefix: &str, coupling: f64, dt: f64, span: f64) {
        let load = coupling * coupling * dt * span * span;
        if load > infodyn_core::unravel::STABILITY_CEILING {
            self.fail(
                format!("{prefix}.coupling"),
                format!(
                    "s² dt span² = {load} exceeds the stability ceiling {}",
                    infodyn_core::unravel::STABILITY_CEILING
                ),
            );
        }
    }
}

fn lindblad_span(m: &MatrixSpec) -> f64 {
    let n = m.re.len();
    let mat = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        infodyn_core::C64::new(m.re[i][j], m.im.as_ref().map_or(0.0, |im| im[i][j]))
    });
    match mat.try_symmetric_eigen(1e-15, 10_000) {
        Some(e) => e.eigenvalues.max() - e.eigenvalues.min(),
        None => f64::NAN,
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, Violation> {
        toml::from_str(text).map_err(|e| Violation {
            field: "config".into(),
            message: e.message().to_string() + &e.span().map(|s| format!(" (at byte {})", s.start)).unwrap_or_default(),
        })
    }

    /// Every violated constraint; empty when the config is runnable.
    pub fn violations(&self) -> Vec<Violation> {
        let mut c = Checker::default();
        if self.schema_version != SCHEMA_VERSION {
            c.fail(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            );
        }
        let present = [
            (ExperimentKind::Posterior, self.posterior.is_some()),
            (ExperimentKind::MutualInfo, self.mutual_info.is_some()),
            (ExperimentKind::Decohere, self.decohere.is_some()),
            (ExperimentKind::Unravel, self.unravel.is_some()),
            (ExperimentKind::Collapse, self.collapse.is_some()),
            (ExperimentKind::Cuscuta, self.cuscuta.is_some()),
            (ExperimentKind::Heliotropism, self.heliotropism.is_some()),
            (ExperimentKind::Ledger, self.ledger.is_some()),
        ];
        for (kind, is_present) in present {
            if kind == self.kind && !is_present {
                c.fail(kind.name(), format!("missing parameter block [{}]", kind.name()));
            }
            if kind != self.kind && is_present {
                c.fail(kind.name(), format!("block does not belong to kind `{}`", self.kind));
            }
        }

        if let (ExperimentKind::Posterior, Some(p)) = (self.kind, &self.posterior) {
            c.alphabet("posterior", &p.values, p.prior.as_deref());
            c.noise("posterior", &p.noise);
            c.finite_all("posterior.observations", &p.observations);
            if p.observations.is_empty() && p.samples == 0 {
                c.fail("posterior.samples", "need observations or samples > 0");
            }
        }
        if let (ExperimentKind::MutualInfo, Some(p)) = (self.kind, &self.mutual_info) {
            c.alphabet("mutual-info", &p.values, p.prior.as_deref());
            c.noise("mutual-info", &p.noise);
            c.positive("mutual-info.tolerance", p.tolerance);
            if p.mc_samples == 1 {
                c.fail("mutual-info.mc_samples", "need 0 (skip) or at least 2");
            }
        }
        if let (ExperimentKind::Decohere, Some(p)) = (self.kind, &self.decohere) {
            c.at_least("decohere.energies", p.energies.len(), 2);
            c.finite_all("decohere.energies", &p.energies);
            c.distribution("decohere.probabilities", &p.probabilities, p.energies.len());
            c.noise("decohere", &p.noise);
            c.at_least("decohere.samples", p.samples, 1);
            c.positive("decohere.tolerance", p.tolerance);
        }
        if let (ExperimentKind::Unravel, Some(p)) = (self.kind, &self.unravel) {
            let n = p.initial.len();
            c.at_least("unravel.initial", n, 2);
            c.distribution("unravel.initial", &p.initial, n);
            c.matrix("unravel.hamiltonian", &p.hamiltonian, n);
            c.matrix("unravel.lindblad", &p.lindblad, n);
            c.nonnegative("unravel.coupling", p.coupling);
            c.time_grid("unravel", p.dt, p.horizon);
            c.at_least("unravel.trajectories", p.trajectories, 1);
            c.at_least("unravel.stride", p.stride, 1);
            if c.violations.is_empty() {
                c.stability("unravel", p.coupling, p.dt, lindblad_span(&p.lindblad));
            }
        }
        if let (ExperimentKind::Collapse, Some(p)) = (self.kind, &self.collapse) {
            c.at_least("collapse.energies", p.energies.len(), 2);
            c.finite_all("collapse.energies", &p.energies);
            c.distribution("collapse.probabilities", &p.probabilities, p.energies.len());
            c.positive("collapse.coupling", p.coupling);
            c.time_grid("collapse", p.dt, p.horizon);
            c.at_least("collapse.trajectories", p.trajectories, 1);
            if p.energies.iter().all(|e| e.is_finite()) && !p.energies.is_empty() {
                let span = p.energies.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                    - p.energies.iter().copied().fold(f64::INFINITY, f64::min);
                c.stability("collapse", p.coupling, p.dt, span);
            }
        }
        if let (ExperimentKind::Cuscuta, Some(p)) = (self.kind, &self.cuscuta) {
            c.at_least("cuscuta.bins", p.bins, 4);
            c.positive("cuscuta.gradient", p.gradient);
            c.positive("cuscuta.sensor_sigma", p.sensor_sigma);
            c.at_least("cuscuta.runs", p.runs, 1);
            if let Some(b) = p.true_bearing {
                if !b.is_finite() {
                    c.fail("cuscuta.true_bearing", "must be finite");
                }
            }
            c.at_least("cuscuta.heading.period", p.heading.period, 1);
            if !p.heading.offset.is_finite() {
                c.fail("cuscuta.heading.offset", "must be finite");
            }
            if p.memory_horizon == Some(0) {
                c.fail("cuscuta.memory_horizon", "must be at least 1 step");
            }
            if let ErasurePolicy::Partial { fraction } = p.erasure {
                if !(0.0..=1.0).contains(&fraction) {
                    c.fail("cuscuta.erasure.fraction", "must lie in [0, 1]");
                }
            }
            c.positive("cuscuta.temperature", p.temperature);
        }
        if let (ExperimentKind::Heliotropism, Some(p)) = (self.kind, &self.heliotropism) {
            if p.drift_rates.is_empty() {
                c.fail("heliotropism.drift_rates", "must not be empty");
            }
            for d in &p.drift_rates {
                c.nonnegative("heliotropism.drift_rates", *d);
            }
            c.nonnegative("heliotropism.coupling", p.coupling);
            c.at_least("heliotropism.steps", p.steps, 1);
            c.at_least("heliotropism.runs", p.runs, 1);
            if let Some(b) = p.bins {
                c.at_least("heliotropism.bins", b, 4);
            }
            if let Some(d) = p.belief_diffusion {
                c.nonnegative("heliotropism.belief_diffusion", d);
            }
            if let Some(s) = p.sweep_period {
                c.at_least("heliotropism.sweep_period", s, 1);
            }
            if let Some(b) = p.initial_bearing {
                if !b.is_finite() {
                    c.fail("heliotropism.initial_bearing", "must be finite");
                }
            }
            c.positive("heliotropism.temperature", p.temperature);
        }
        if let (ExperimentKind::Ledger, Some(p)) = (self.kind, &self.ledger) {
            c.positive("ledger.temperature", p.temperature);
            for b in &p.erasures {
                c.nonnegative("ledger.erasures", *b);
            }
            if let Some(e) = p.external_energy {
                c.positive("ledger.external_energy", e);
            }
        }
        c.violations
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml(text).unwrap()
    }

    #[test]
    fn negative_sigma_is_named() {
        let cfg = parse(
            r#"
            schema_version = 1
            kind = "mutual-info"
            [mutual-info]
            values = [0.0, 1.0]
            noise = { kind = "gaussian", sigma = -1.0 }
            "#,
        );
        let v = cfg.violations();
        assert_eq!(v.len(), 1);
        assert!(v[0].field.ends_with("noise.sigma"), "{v:?}");
    }

    #[test]
    fn prior_normalisation_is_checked() {
        let cfg = parse(
            r#"
            schema_version = 1
            kind = "posterior"
            [posterior]
            values = [0.0, 1.0]
            prior = [0.5, 0.4]
            noise = { kind = "laplace", scale = 1.0 }
            observations = [0.2]
            "#,
        );
        let v = cfg.violations();
        assert_eq!(v.len(), 1);
        assert!(v[0].message.contains("normalisation"));
    }

    #[test]
    fn all_violations_are_reported() {
        let cfg = parse(
            r#"
            schema_version = 2
            kind = "collapse"
            [collapse]
            energies = [0.0, 1.0]
            probabilities = [0.7, 0.7]
            coupling = -1.0
            dt = 0.1
            horizon = 0.01
            trajectories = 0
            "#,
        );
        let fields: Vec<String> = cfg.violations().into_iter().map(|v| v.field).collect();
        for f in [
            "schema_version",
            "collapse.probabilities",
            "collapse.coupling",
            "collapse.horizon",
            "collapse.trajectories",
        ] {
            assert!(fields.iter().any(|x| x == f), "{f} missing from {fields:?}");
        }
    }

    #[test]
    fn unknown_fields_and_misplaced_blocks_are_rejected() {
        let err = ExperimentConfig::from_toml(
            r#"
            schema_version = 1
            kind = "ledger"
            colour = "blue"
            [ledger]
            erasures = [1.0]
            "#,
        )
        .unwrap_err();
        assert!(err.message.contains("colour"));
        let cfg = parse(
            r#"
            schema_version = 1
            kind = "ledger"
            [ledger]
            erasures = [1.0]
            [decohere]
            energies = [0.0, 1.0]
            probabilities = [0.5, 0.5]
            noise = { kind = "gaussian", sigma = 1.0 }
            samples = 10
            "#,
        );
        assert_eq!(cfg.violations()[0].field, "decohere");
    }

    #[test]
    fn unstable_unravel_coupling_is_flagged() {
        let cfg = parse(
            r#"
            schema_version = 1
            kind = "unravel"
            [unravel]
            hamiltonian = { re = [[0.0, 0.0], [0.0, 0.0]] }
            lindblad = { re = [[0.0, 0.0], [0.0, 2.0]] }
            coupling = 5.0
            dt = 0.1
            horizon = 1.0
            initial = [0.5, 0.5]
            trajectories = 10
            "#,
        );
        let v = cfg.violations();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "unravel.coupling");
    }
}
