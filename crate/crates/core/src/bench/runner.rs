//! Runs configured experiments against a cached master-equation reference.

use std::collections::HashMap;
use std::time::Instant;

use crate::dqj::run_dqj;
use crate::error::{Error, Result};
use crate::grid::count_trajectories;
use crate::lindblad::{integrate_master, LindbladSystem};
use crate::metrics::{fidelity, observable_trace, spectrum};
use crate::models::ModelInstance;
use crate::sqj::{run_sqj, SqjConfig};
use crate::state::{DensityMatrix, DensityMatrixSeries};

use super::config::{ExperimentConfig, MethodConfig, Metric};
use super::output::ResultRow;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Holds master-equation references keyed by model, `T`, step and recording times.
#[derive(Debug, Default)]
pub struct Runner {
    cache: HashMap<String, DensityMatrixSeries>,
    reference_runs: usize,
}

fn reference_key(cfg: &ExperimentConfig, record_at: &[f64]) -> String {
    let times: Vec<String> = record_at.iter().map(|t| format!("{:x}", t.to_bits())).collect();
    format!(
        "{}|{:x}|{:x}|{}",
        serde_json::to_string(&cfg.model).expect("model serializes"),
        cfg.t_final.to_bits(),
        cfg.reference_substep().to_bits(),
        times.join(",")
    )
}

fn metric_name(m: &Metric, raw: &str) -> String {
    match m {
        Metric::Spectrum(w) => format!("spectrum:{w}"),
        _ => raw.to_string(),
    }
}

/// Metric of `series` against `reference`. For the reference itself the
/// comparison is trivial, so the raw quantity is reported instead.
fn evaluate(
    metric: &Metric,
    model: &ModelInstance,
    series: &DensityMatrixSeries,
    reference: &DensityMatrixSeries,
    raw: bool,
) -> Result<f64> {
    match metric {
        Metric::Infidelity => {
            let (Some(rho), Some(sigma)) = (series.last(), reference.last()) else {
                return Err(Error::Config("no recorded states".into()));
            };
            if raw {
                return Ok(0.0);
            }
            Ok(1.0 - fidelity(sigma, rho)?)
        }
        Metric::Observable(name) => {
            let op = model.observable(name)?;
            let ours = observable_trace(series, op)?;
            if raw {
                return Ok(ours.values.last().map(|v| v.re).unwrap_or(0.0));
            }
            let theirs = observable_trace(reference, op)?;
            Ok(ours
                .values
                .iter()
                .zip(&theirs.values)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max))
        }
        Metric::Spectrum(w) => {
            let op = model.observable("X")?;
            let s = spectrum(&observable_trace(series, op)?, *w).norm();
            if raw {
                return Ok(s);
            }
            let s_ref = spectrum(&observable_trace(reference, op)?, *w).norm();
            Ok((s - s_ref).abs())
        }
    }
}

fn mean_and_stderr(xs: &[f64]) -> (f64, Option<f64>) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, None);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Some((var / n).sqrt()))
}

impl Runner {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of master-equation integrations performed so far.
    pub fn reference_runs(&self) -> usize {
        self.reference_runs
    }

    pub fn reference(&mut self, cfg: &ExperimentConfig, model: &ModelInstance, record_at: &[f64]) -> Result<DensityMatrixSeries> {
        let key = reference_key(cfg, record_at);
        if let Some(series) = self.cache.get(&key) {
            return Ok(series.clone());
        }
        let sys = LindbladSystem::new(model.hamiltonian.clone(), model.jumps.clone(), DensityMatrix::pure(&model.psi0)?)?;
        let series = integrate_master(&sys, cfg.t_final, record_at, cfg.reference_substep())?;
        self.reference_runs += 1;
        self.cache.insert(key, series.clone());
        Ok(series)
    }

    /// Runs one configuration (ignoring any sweep block).
    pub fn run(&mut self, cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
        cfg.validate()?;
        let model = cfg.model.build()?;
        let metrics = cfg.parsed_metrics()?;
        let record_at = cfg.record_times();
        let reference = self.reference(cfg, &model, &record_at)?;
        let t = cfg.t_final;
        let n_jumps = model.jumps.len() as u64;

        let row = |order, n_grid, n_traj, seed, metric: String, value, stderr, wallclock_s| ResultRow {
            method: cfg.method.name().to_string(),
            order,
            n_grid,
            n_traj,
            model: model.label.clone(),
            gamma: cfg.model.gamma(),
            t_final: t,
            metric,
            value,
            stderr,
            wallclock_s,
            seed,
            version: VERSION.to_string(),
        };

        let mut rows = Vec::with_capacity(metrics.len());
        match cfg.method {
            MethodConfig::Dqj { order, n_grid } => {
                let prop = cfg.substep.propagation(t, n_grid)?;
                let start = Instant::now();
                let run = run_dqj(&model.hamiltonian, &model.jumps, &model.psi0, t, order, n_grid, &prop, &record_at)?;
                let series = run.assemble()?;
                let elapsed = start.elapsed().as_secs_f64();
                let n_traj = if n_jumps == 0 { 1 } else { count_trajectories(order, n_grid as u64, n_jumps)? };
                for (m, raw) in metrics.iter().zip(&cfg.metrics) {
                    let value = evaluate(m, &model, &series, &reference, false)?;
                    rows.push(row(Some(order), Some(n_grid), n_traj, None, metric_name(m, raw), value, None, elapsed));
                }
            }
            MethodConfig::Sqj { n_traj, seed, repeats, n_grid } => {
                let prop = cfg.substep.propagation(t, n_grid)?;
                let start = Instant::now();
                let mut values = vec![Vec::with_capacity(repeats); metrics.len()];
                for r in 0..repeats {
                    let sqj = SqjConfig::new(n_traj, seed.wrapping_add(r as u64))?;
                    let run = run_sqj(&model.hamiltonian, &model.jumps, &model.psi0, t, &sqj, &prop, &record_at)?;
                    let series = run.assemble()?;
                    for (k, m) in metrics.iter().enumerate() {
                        values[k].push(evaluate(m, &model, &series, &reference, false)?);
                    }
                }
                let elapsed = start.elapsed().as_secs_f64();
                for ((m, raw), vals) in metrics.iter().zip(&cfg.metrics).zip(&values) {
                    let (mean, stderr) = mean_and_stderr(vals);
                    let name = metric_name(m, raw);
                    rows.push(row(None, Some(n_grid), n_traj as u64 + 1, Some(seed), name, mean, stderr, elapsed));
                }
            }
            MethodConfig::Lindblad { .. } => {
                for (m, raw) in metrics.iter().zip(&cfg.metrics) {
                    let value = evaluate(m, &model, &reference, &reference, true)?;
                    rows.push(row(None, None, 1, None, metric_name(m, raw), value, None, 0.0));
                }
            }
        }
        Ok(rows)
    }

    /// Runs every sweep point in axis order.
    pub fn sweep(&mut self, cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
        cfg.validate()?;
        let mut rows = Vec::new();
        for point in cfg.sweep_points()? {
            rows.extend(self.run(&point)?);
        }
        Ok(rows)
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    Runner::new().run(cfg)
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    Runner::new().sweep(cfg)
}
