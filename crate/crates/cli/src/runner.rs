// Copyright 2026 The infodyn Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use infodyn_core::plant::{run_cuscuta, run_heliotropism, HeliotropismConfig};
use infodyn_core::quantum::{averaged_density_analytic, averaged_density_mc, decoherence_matrix, von_neumann_entropy};
use infodyn_core::signal::{bayes_update, sample_index, shannon_entropy};
use infodyn_core::unravel::{coherence_decay_fit, collapse_statistics, run_ensemble};
use infodyn_core::{
    nats_to_bits, CircularScenario, DynamicsSpec, InfoLedger, NoiseDensity, Quadrature, QuantumSystem, SeedStream,
    SignalModel, StateVector, C64,
};
use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, ExperimentKind, MatrixSpec, Violation};
use crate::table::{Cell, Metadata, ResultTable};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid config:\n{}", list(.0))]
    Validation(Vec<Violation>),
    #[error("numerical failure in {module}: {error}")]
    Numerical {
        module: &'static str,
        error: infodyn_core::Error,
    },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

fn list(vs: &[Violation]) -> String {
    vs.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n")
}

impl RunError {
    /// 2 for bad input, 3 for numerical failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(_) => 2,
            RunError::Numerical { .. } => 3,
            RunError::Io { .. } => 1,
        }
    }

    fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> RunError {
        let context = context.into();
        move |source| RunError::Io { context, source }
    }
}

impl From<infodyn_core::Error> for RunError {
    fn from(e: infodyn_core::Error) -> Self {
        if e.is_numerical() {
            return RunError::Numerical { module: "core", error: e };
        }
        let field = match &e {
            infodyn_core::Error::InvalidParameter { field, .. } => field.to_string(),
            _ => "config".to_string(),
        };
        RunError::Validation(vec![Violation {
            field,
            message: e.to_string(),
        }])
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides the config seed.
    pub seed: Option<u64>,
    /// Overrides `[output] dir`; falls back to `out`.
    pub out_dir: Option<PathBuf>,
    /// Worker threads; 0 picks the rayon default.
    pub threads: usize,
}

/// Files written by a successful run.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub headline: Value,
}

/// Parses and checks a config without running it.
pub fn validate(text: &str) -> Result<ExperimentConfig, Vec<Violation>> {
    let cfg = ExperimentConfig::from_toml(text).map_err(|v| vec![v])?;
    let violations = cfg.violations();
    if violations.is_empty() {
        Ok(cfg)
    } else {
        Err(violations)
    }
}

pub fn config_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads, validates, executes and writes. Nothing touches the output
/// directory until the whole experiment has succeeded.
pub fn run(config_path: &Path, opts: &RunOptions) -> Result<RunReport, RunError> {
    let bytes = fs::read(config_path).map_err(RunError::io(format!("reading {}", config_path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| {
        RunError::Validation(vec![Violation {
            field: "config".into(),
            message: "not valid UTF-8".into(),
        }])
    })?;
    let cfg = validate(&text).map_err(RunError::Validation)?;
    let seed = opts.seed.unwrap_or(cfg.seed);
    let hash = config_hash(&bytes);
    let out_dir = opts
        .out_dir
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| RunError::Io {
            context: "starting worker threads".into(),
            source: std::io::Error::other(e),
        })?;
    let threads = pool.current_num_threads();
    let start = Instant::now();
    let (table, headline) = pool.install(|| execute(&cfg, seed, &hash))?;
    let wall = start.elapsed().as_secs_f64();

    let summary = json!({
        "version": VERSION,
        "kind": cfg.kind.name(),
        "seed": seed,
        "config_hash": hash,
        "threads": threads,
        "wall_time_s": wall,
        "rows": table.rows.len(),
        "headline": headline,
    });
    let csv_bytes = table.to_bytes();
    let summary_bytes = serde_json::to_vec_pretty(&summary).expect("summary serialises");

    fs::create_dir_all(&out_dir).map_err(RunError::io(format!("creating {}", out_dir.display())))?;
    let csv = out_dir.join(format!("{}.csv", cfg.kind.name()));
    let summary_path = out_dir.join("summary.json");
    fs::write(&csv, csv_bytes).map_err(RunError::io(format!("writing {}", csv.display())))?;
    fs::write(&summary_path, summary_bytes).map_err(RunError::io(format!("writing {}", summary_path.display())))?;
    Ok(RunReport {
        csv,
        summary: summary_path,
        headline,
    })
}

/// Runs the experiment in memory: the result table plus headline numbers.
pub fn execute(cfg: &ExperimentConfig, seed: u64, config_hash: &str) -> Result<(ResultTable, Value), RunError> {
    let meta = Metadata {
        version: VERSION.into(),
        kind: cfg.kind.name().into(),
        seed,
        config_hash: config_hash.into(),
    };
    let mut table = ResultTable::new(meta, cfg.kind.columns());
    let seed = SeedStream::new(seed);
    let module = match cfg.kind {
        ExperimentKind::Posterior | ExperimentKind::MutualInfo => "signal",
        ExperimentKind::Decohere => "quantum",
        ExperimentKind::Unravel | ExperimentKind::Collapse => "unravel",
        ExperimentKind::Cuscuta | ExperimentKind::Heliotropism | ExperimentKind::Ledger => "plant",
    };
    let headline = dispatch(cfg, seed, &mut table).map_err(|e| match e {
        RunError::Numerical { error, .. } => RunError::Numerical { module, error },
        other => other,
    })?;
    Ok((table, headline))
}

fn dispatch(cfg: &ExperimentConfig, seed: SeedStream, table: &mut ResultTable) -> Result<Value, RunError> {
    let missing = || {
        RunError::Validation(vec![Violation {
            field: cfg.kind.name().into(),
            message: "missing parameter block".into(),
        }])
    };
    match cfg.kind {
        ExperimentKind::Posterior => posterior(cfg.posterior.as_ref().ok_or_else(missing)?, seed, table),
        ExperimentKind::MutualInfo => mutual_info(cfg.mutual_info.as_ref().ok_or_else(missing)?, seed, table),
        ExperimentKind::Decohere => decohere(cfg.decohere.as_ref().ok_or_else(missing)?, seed, table),
        ExperimentKind::Unravel => unravel(cfg.unravel.as_ref().ok_or_else(missing)?, seed, table),
        ExperimentKind::Collapse => collapse(cfg.collapse.as_ref().ok_or_else(missing)?, seed, table),
        ExperimentKind::Cuscuta => cuscuta(cfg.cuscuta.as_ref().ok_or_else(missing)?, seed, table),
        ExperimentKind::Heliotropism => heliotropism(cfg.heliotropism.as_ref().ok_or_else(missing)?, seed, table),
        ExperimentKind::Ledger => ledger(cfg.ledger.as_ref().ok_or_else(missing)?, table),
    }
}

fn push(table: &mut ResultTable, row: Vec<Cell>) {
    table.push(row).expect("row width matches the kind's header");
}

fn signal_model(values: &[f64], prior: Option<&Vec<f64>>, noise: NoiseDensity) -> infodyn_core::Result<SignalModel> {
    match prior {
        Some(p) => SignalModel::new(values.to_vec(), p.clone(), noise),
        None => SignalModel::uniform(values.to_vec(), noise),
    }
}

fn posterior(
    p: &crate::config::PosteriorParams,
    seed: SeedStream,
    table: &mut ResultTable,
) -> Result<Value, RunError> {
    let noise = NoiseDensity::new(p.noise)?;
    let model = signal_model(&p.values, p.prior.as_ref(), noise)?;
    let mut rng = seed.rng();
    let truth = sample_index(model.prior(), &mut rng);
    let mut observations = p.observations.clone();
    observations.extend((0..p.samples).map(|_| model.values()[truth] + noise.sample(&mut rng)));

    let mut belief = model.prior().to_vec();
    for (k, &xi) in observations.iter().enumerate() {
        let (post, marginal) = bayes_update(&belief, model.values(), &noise, xi)?;
        let mean: f64 = post.iter().zip(model.values()).map(|(q, x)| q * x).sum();
        let ds = shannon_entropy(&post) - shannon_entropy(&belief);
        for (i, &x) in model.values().iter().enumerate() {
            push(
                table,
                vec![
                    (k + 1).into(),
                    xi.into(),
                    marginal.into(),
                    mean.into(),
                    ds.into(),
                    i.into(),
                    x.into(),
                    belief[i].into(),
                    post[i].into(),
                ],
            );
        }
        belief = post;
    }
    let mean: f64 = belief.iter().zip(model.values()).map(|(q, x)| q * x).sum();
    Ok(json!({
        "observations": observations.len(),
        "sampled_value": if p.samples > 0 { json!(model.values()[truth]) } else { Value::Null },
        "final_posterior_mean": mean,
        "entropy_change_nats": shannon_entropy(&belief) - shannon_entropy(model.prior()),
    }))
}

fn mutual_info(
    p: &crate::config::MutualInfoParams,
    seed: SeedStream,
    table: &mut ResultTable,
) -> Result<Value, RunError> {
    let model = signal_model(&p.values, p.prior.as_ref(), NoiseDensity::new(p.noise)?)?;
    let quad = Quadrature::with_tolerance(p.tolerance);
    let s_eps = model.noise().entropy();
    let mi = model.mutual_information(&quad)?;
    let s_xi = s_eps + mi;
    let mut row = |name: &str, nats: f64, se: Cell| {
        push(table, vec![name.into(), nats.into(), nats_to_bits(nats).into(), se]);
    };
    row("observation_entropy", s_xi, "".into());
    row("noise_entropy", s_eps, "".into());
    row("mutual_information", mi, "".into());
    let mut mc = Value::Null;
    if p.mc_samples > 0 {
        let (mean, se) = model.mean_entropy_change(p.mc_samples, seed)?;
        row("mean_entropy_reduction", -mean, se.into());
        mc = json!({ "nats": -mean, "std_err": se, "samples": p.mc_samples });
    }
    Ok(json!({
        "mutual_information_nats": mi,
        "mutual_information_bits": nats_to_bits(mi),
        "prior_entropy_bits": nats_to_bits(shannon_entropy(model.prior())),
        "monte_carlo": mc,
    }))
}

fn decohere(
    p: &crate::config::DecohereParams,
    seed: SeedStream,
    table: &mut ResultTable,
) -> Result<Value, RunError> {
    let system = QuantumSystem::new(p.energies.clone())?;
    let state = StateVector::from_probabilities(&p.probabilities)?;
    let noise = NoiseDensity::new(p.noise)?;
    let quad = Quadrature::with_tolerance(p.tolerance);
    let lambda = decoherence_matrix(&system, &noise, &quad)?;
    let analytic = averaged_density_analytic(&system, &state, &noise, &quad)?;
    let mc = averaged_density_mc(&system, &state, &noise, p.samples, seed)?;
    let n = system.dim();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let a = analytic.entries()[(i, j)].re;
            let m = mc.mean.entries()[(i, j)];
            let se = mc.std_err[(i, j)];
            if se > 0.0 {
                worst = worst.max((m - C64::new(a, 0.0)).norm() / se);
            }
            push(
                table,
                vec![
                    i.into(),
                    j.into(),
                    system.gap(i, j).into(),
                    lambda[(i, j)].into(),
                    a.into(),
                    m.re.into(),
                    m.im.into(),
                    se.into(),
                ],
            );
        }
    }
    Ok(json!({
        "entropy_after_nats": von_neumann_entropy(&analytic)?,
        "entropy_after_mc_nats": von_neumann_entropy(&mc.mean)?,
        "purity_after": analytic.purity(),
        "max_std_err_deviation": worst,
        "samples": p.samples,
    }))
}

fn matrix(m: &MatrixSpec) -> DMatrix<C64> {
    let n = m.re.len();
    DMatrix::from_fn(n, n, |i, j| C64::new(m.re[i][j], m.im.as_ref().map_or(0.0, |im| im[i][j])))
}

fn unravel(p: &crate::config::UnravelParams, seed: SeedStream, table: &mut ResultTable) -> Result<Value, RunError> {
    let spec = DynamicsSpec::new(
        matrix(&p.hamiltonian),
        matrix(&p.lindblad),
        p.coupling,
        p.dt,
        p.horizon,
    )?;
    let initial = StateVector::from_probabilities(&p.initial)?;
    let ens = run_ensemble(&spec, &initial, p.trajectories, p.stride, seed)?;
    let n = spec.dim();
    for (k, &t) in ens.times.iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                let rho = ens.mean_rho[k][(i, j)];
                push(
                    table,
                    vec![
                        t.into(),
                        i.into(),
                        j.into(),
                        rho.re.into(),
                        rho.im.into(),
                        ens.rho_std_err[k][(i, j)].into(),
                        ens.mean_lindblad_variance[k].into(),
                        ens.mean_max_occupation[k].into(),
                    ],
                );
            }
        }
    }
    let decay = match coherence_decay_fit(&ens, 0, 1) {
        Ok(fit) => json!({ "rate": fit.rate, "points": fit.points }),
        Err(_) => Value::Null,
    };
    Ok(json!({
        "steps": spec.n_steps(),
        "trajectories": p.trajectories,
        "collapsed_fraction": ens.collapsed_fraction(),
        "commutator_norm": spec.commutator_norm(),
        "relative_magnitude": spec.relative_magnitude(),
        "final_mean_lindblad_variance": ens.mean_lindblad_variance.last(),
        "coherence_01_decay": decay,
    }))
}

fn collapse(p: &crate::config::CollapseParams, seed: SeedStream, table: &mut ResultTable) -> Result<Value, RunError> {
    let h = QuantumSystem::new(p.energies.clone())?.hamiltonian();
    let spec = DynamicsSpec::new(h.clone(), h, p.coupling, p.dt, p.horizon)?;
    let initial = StateVector::from_probabilities(&p.probabilities)?;
    let stats = collapse_statistics(&spec, &initial, p.trajectories, seed)?;
    for (k, &e) in spec.lindblad_levels().iter().enumerate() {
        let (lo, hi) = stats.intervals[k];
        push(
            table,
            vec![
                k.into(),
                e.into(),
                stats.born[k].into(),
                stats.frequencies[k].into(),
                stats.counts[k].into(),
                lo.into(),
                hi.into(),
            ],
        );
    }
    Ok(json!({
        "trajectories": stats.total,
        "collapsed": stats.collapsed,
        "within_99_intervals": stats.within_intervals(),
    }))
}

fn cuscuta(p: &crate::config::CuscutaParams, seed: SeedStream, table: &mut ResultTable) -> Result<Value, RunError> {
    let runs: Vec<_> = (0..p.runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = seed.derive(r as u64).rng();
            let bearing = match p.true_bearing {
                Some(b) => b,
                None => rng.random::<f64>() * TAU,
            };
            let scenario = CircularScenario::new(p.bins, bearing, p.gradient, p.sensor_sigma)?
                .with_heading(p.heading)?
                .with_estimator(p.estimator)
                .with_erasure(p.erasure)
                .with_memory_horizon(p.memory_horizon)?
                .with_temperature(p.temperature)?;
            let run = run_cuscuta(&scenario, p.steps, &mut rng)?;
            Ok((bearing, run))
        })
        .collect::<infodyn_core::Result<_>>()?;
    let resolution = TAU / p.bins as f64;
    let mut hits = 0usize;
    let mut bits = 0.0;
    let mut heat = 0.0;
    for (r, (bearing, run)) in runs.iter().enumerate() {
        let err = run.bearing_error(*bearing);
        hits += usize::from(err <= resolution);
        bits += run.entropy_reduction_bits();
        heat += run.ledger.landauer_heat();
        push(
            table,
            vec![
                r.into(),
                (*bearing).into(),
                run.growth_direction.unwrap_or(f64::NAN).into(),
                err.into(),
                run.entropy_reduction_bits().into(),
                run.bits_forgotten.into(),
                run.ledger.bits_erased().into(),
                run.ledger.landauer_heat().into(),
            ],
        );
    }
    let n = p.runs as f64;
    Ok(json!({
        "runs": p.runs,
        "fraction_within_bin": hits as f64 / n,
        "mean_bits": bits / n,
        "capacity_bits": (p.bins as f64).log2(),
        "mean_landauer_heat_j": heat / n,
    }))
}

fn heliotropism(
    p: &crate::config::HeliotropismParams,
    seed: SeedStream,
    table: &mut ResultTable,
) -> Result<Value, RunError> {
    let defaults = HeliotropismConfig::default();
    let mut summary = Vec::new();
    for (a, &drift) in p.drift_rates.iter().enumerate() {
        let cfg = HeliotropismConfig {
            bins: p.bins.unwrap_or(defaults.bins),
            drift_rate: drift,
            coupling: p.coupling,
            belief_diffusion: p.belief_diffusion.unwrap_or(defaults.belief_diffusion),
            sweep_period: p.sweep_period.unwrap_or(defaults.sweep_period),
            initial_bearing: p.initial_bearing.unwrap_or(defaults.initial_bearing),
            temperature: p.temperature,
        };
        let stream = seed.derive(a as u64);
        let records: Vec<_> = (0..p.runs)
            .into_par_iter()
            .map(|r| run_heliotropism(&cfg, p.steps, &mut stream.derive(r as u64).rng()))
            .collect::<infodyn_core::Result<_>>()?;
        let n = p.runs as f64;
        let avg = |f: &dyn Fn(&infodyn_core::plant::TrackingRecord) -> f64| records.iter().map(f).sum::<f64>() / n;
        let mean_error = avg(&|r| r.mean_error);
        let late_error = avg(&|r| r.late_error);
        let baseline = avg(&|r| r.baseline_error);
        let tracking = avg(&|r| f64::from(u8::from(r.is_tracking())));
        let bits = avg(&|r| r.ledger.bits_processed());
        push(
            table,
            vec![
                drift.into(),
                p.coupling.into(),
                mean_error.into(),
                late_error.into(),
                baseline.into(),
                tracking.into(),
                bits.into(),
            ],
        );
        summary.push(json!({ "drift_rate": drift, "mean_error": mean_error, "tracking_fraction": tracking }));
    }
    Ok(json!({ "runs_per_rate": p.runs, "rates": summary }))
}

fn ledger(p: &crate::config::LedgerParams, table: &mut ResultTable) -> Result<Value, RunError> {
    let mut ledger = InfoLedger::new(p.temperature)?;
    if let Some(e) = p.external_energy {
        ledger = ledger.with_external_energy(e)?;
    }
    for (k, &bits) in p.erasures.iter().enumerate() {
        ledger = ledger.landauer_update(bits)?;
        push(
            table,
            vec![
                (k + 1).into(),
                bits.into(),
                ledger.bits_erased().into(),
                ledger.landauer_heat().into(),
            ],
        );
    }
    Ok(json!({
        "temperature_k": p.temperature,
        "heat_per_bit_j": ledger.heat_per_bit(),
        "bits_erased": ledger.bits_erased(),
        "landauer_heat_j": ledger.landauer_heat(),
        "efficiency_ratio": ledger.efficiency_ratio(),
    }))
}
