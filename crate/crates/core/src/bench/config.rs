//! Experiment configuration. See `docs/config.md` for the JSON schema.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{build_kerr, build_test_qubit, build_tfim, ModelInstance, TestQubit};
use crate::propagation::PropagationConfig;
use crate::state::C64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Tfim {
        n_qubits: usize,
        g: f64,
        coupling: f64,
        gamma: f64,
    },
    Kerr {
        n_fock: usize,
        omega0: f64,
        omega_k: f64,
        gamma: f64,
        /// `[re, im]`
        alpha: [f64; 2],
    },
    TestQubit {
        variant: TestQubit,
        gamma: f64,
        #[serde(default)]
        omega: f64,
    },
}

impl ModelConfig {
    pub fn build(&self) -> Result<ModelInstance> {
        match *self {
            ModelConfig::Tfim { n_qubits, g, coupling, gamma } => build_tfim(n_qubits, g, coupling, gamma),
            ModelConfig::Kerr { n_fock, omega0, omega_k, gamma, alpha } => {
                build_kerr(n_fock, omega0, omega_k, gamma, C64::new(alpha[0], alpha[1]))
            }
            ModelConfig::TestQubit { variant, gamma, omega } => {
                if gamma < 0.0 {
                    return Err(Error::Config(format!("model.gamma: must be non-negative, got {gamma}")));
                }
                Ok(build_test_qubit(variant, gamma, omega))
            }
        }
    }

    pub fn gamma(&self) -> f64 {
        match *self {
            ModelConfig::Tfim { gamma, .. } | ModelConfig::Kerr { gamma, .. } | ModelConfig::TestQubit { gamma, .. } => {
                gamma
            }
        }
    }

    pub fn with_gamma(&self, value: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            ModelConfig::Tfim { gamma, .. } | ModelConfig::Kerr { gamma, .. } | ModelConfig::TestQubit { gamma, .. } => {
                *gamma = value
            }
        }
        out
    }
}

fn default_repeats() -> usize {
    16
}

fn default_grid() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodConfig {
    Dqj {
        order: usize,
        n_grid: usize,
    },
    Sqj {
        n_traj: usize,
        seed: u64,
        #[serde(default = "default_repeats")]
        repeats: usize,
        /// Sets the substep under the `div` policy and the `grid` recording times.
        #[serde(default = "default_grid")]
        n_grid: usize,
    },
    Lindblad {
        #[serde(default = "default_grid")]
        n_grid: usize,
    },
}

impl MethodConfig {
    pub fn name(&self) -> &'static str {
        match self {
            MethodConfig::Dqj { .. } => "dqj",
            MethodConfig::Sqj { .. } => "sqj",
            MethodConfig::Lindblad { .. } => "lindblad",
        }
    }

    pub fn n_grid(&self) -> usize {
        match *self {
            MethodConfig::Dqj { n_grid, .. } | MethodConfig::Sqj { n_grid, .. } | MethodConfig::Lindblad { n_grid } => n_grid,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RecordPolicy {
    /// Only `T`.
    #[default]
    Final,
    /// `dt * {1, ..., n_grid}`.
    Grid,
    /// `T * k / count` for `k = 0..=count`.
    Uniform(usize),
    Times(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SubstepPolicy {
    /// `h = dt / div` with `dt = T / n_grid`.
    Div(usize),
    Fixed(f64),
}

impl Default for SubstepPolicy {
    fn default() -> Self {
        SubstepPolicy::Div(20)
    }
}

impl SubstepPolicy {
    pub fn substep(&self, t_final: f64, n_grid: usize) -> f64 {
        match *self {
            SubstepPolicy::Div(div) => t_final / (n_grid * div) as f64,
            SubstepPolicy::Fixed(h) => h,
        }
    }

    pub fn propagation(&self, t_final: f64, n_grid: usize) -> Result<PropagationConfig> {
        PropagationConfig::new(self.substep(t_final, n_grid))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("format: expected csv or json, got {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Sweep {
    NGrid(Vec<usize>),
    NTraj(Vec<usize>),
    Gamma(Vec<f64>),
    NQubits(Vec<usize>),
}

impl Sweep {
    pub fn len(&self) -> usize {
        match self {
            Sweep::NGrid(v) | Sweep::NTraj(v) | Sweep::NQubits(v) => v.len(),
            Sweep::Gamma(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// What to compare against the master-equation reference.
#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    /// `1 - F` at `T`.
    Infidelity,
    /// Largest deviation of `<O>` over the recording times.
    Observable(String),
    /// `| |S(w)| - |S_ref(w)| |` of the `X` quadrature.
    Spectrum(f64),
}

impl Metric {
    pub fn parse(s: &str, model: &ModelConfig) -> Result<Self> {
        if s == "fidelity_vs_lindblad" {
            return Ok(Metric::Infidelity);
        }
        if let Some(name) = s.strip_prefix("observable:") {
            return Ok(Metric::Observable(name.to_string()));
        }
        if let Some(w) = s.strip_prefix("spectrum:") {
            if w == "omega0" {
                if let ModelConfig::Kerr { omega0, .. } = model {
                    return Ok(Metric::Spectrum(*omega0));
                }
                return Err(Error::Config("metrics: spectrum:omega0 needs a kerr model".into()));
            }
            return w
                .parse::<f64>()
                .map(Metric::Spectrum)
                .map_err(|_| Error::Config(format!("metrics: cannot parse frequency in {s:?}")));
        }
        Err(Error::Config(format!(
            "metrics: unknown metric {s:?} (expected fidelity_vs_lindblad, observable:<name> or spectrum:<omega>)"
        )))
    }
}

fn default_metrics() -> Vec<String> {
    vec!["fidelity_vs_lindblad".to_string()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub method: MethodConfig,
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(default)]
    pub record: RecordPolicy,
    #[serde(default)]
    pub substep: SubstepPolicy,
    /// Master-equation step; defaults to `T / 4000` or the fixed trajectory substep if smaller.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_substep: Option<f64>,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
}

fn config_err(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {msg}"))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn reference_substep(&self) -> f64 {
        let default = self.t_final / 4000.0;
        match (self.reference_substep, self.substep) {
            (Some(h), _) => h,
            (None, SubstepPolicy::Fixed(h)) => h.min(default),
            (None, SubstepPolicy::Div(_)) => default,
        }
    }

    pub fn parsed_metrics(&self) -> Result<Vec<Metric>> {
        self.metrics.iter().map(|m| Metric::parse(m, &self.model)).collect()
    }

    /// Recording times, always ending at `T`.
    pub fn record_times(&self) -> Vec<f64> {
        let t = self.t_final;
        let mut times = match &self.record {
            RecordPolicy::Final => vec![t],
            RecordPolicy::Grid => crate::dqj::default_record_times(t, self.method.n_grid()),
            RecordPolicy::Uniform(count) => {
                (0..=*count).map(|k| if k == *count { t } else { t * k as f64 / *count as f64 }).collect()
            }
            RecordPolicy::Times(v) => v.clone(),
        };
        let tol = crate::propagation::TIME_TOL * t.max(1.0);
        if times.last().is_none_or(|&last| (last - t).abs() > tol) {
            times.push(t);
        }
        times
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(config_err("T", format!("must be positive, got {}", self.t_final)));
        }
        let model = self.model.build().map_err(|e| match e {
            Error::Config(msg) => config_err("model", msg),
            other => other,
        })?;
        match self.method {
            MethodConfig::Dqj { order, n_grid } => {
                if !(1..=3).contains(&order) {
                    return Err(Error::InvalidOrder(order));
                }
                if n_grid == 0 {
                    return Err(config_err("method.n_grid", "must be at least 1"));
                }
            }
            MethodConfig::Sqj { n_traj, repeats, n_grid, .. } => {
                if n_traj == 0 {
                    return Err(config_err("method.n_traj", "must be at least 1"));
                }
                if repeats == 0 {
                    return Err(config_err("method.repeats", "must be at least 1"));
                }
                if n_grid == 0 {
                    return Err(config_err("method.n_grid", "must be at least 1"));
                }
            }
            MethodConfig::Lindblad { n_grid } => {
                if n_grid == 0 {
                    return Err(config_err("method.n_grid", "must be at least 1"));
                }
            }
        }
        match self.substep {
            SubstepPolicy::Div(0) => return Err(config_err("substep.div", "must be at least 1")),
            SubstepPolicy::Fixed(h) if !(h > 0.0 && h.is_finite()) => {
                return Err(config_err("substep.fixed", format!("must be positive, got {h}")))
            }
            _ => {}
        }
        if let Some(h) = self.reference_substep {
            if !(h > 0.0 && h.is_finite()) {
                return Err(config_err("reference_substep", format!("must be positive, got {h}")));
            }
        }
        match &self.record {
            RecordPolicy::Uniform(0) => return Err(config_err("record.uniform", "must be at least 1")),
            RecordPolicy::Times(v) => {
                if v.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(config_err("record.times", "must be strictly increasing"));
                }
                if v.iter().any(|&x| !(0.0..=self.t_final).contains(&x)) {
                    return Err(config_err("record.times", format!("must lie in [0, {}]", self.t_final)));
                }
            }
            _ => {}
        }
        if self.metrics.is_empty() {
            return Err(config_err("metrics", "at least one metric is required"));
        }
        for metric in self.parsed_metrics()? {
            match metric {
                Metric::Observable(name) => {
                    model.observable(&name).map_err(|e| match e {
                        Error::Config(msg) => config_err("metrics", msg),
                        other => other,
                    })?;
                }
                Metric::Spectrum(w) => {
                    if !w.is_finite() {
                        return Err(config_err("metrics", "spectrum frequency must be finite"));
                    }
                    if !model.observables.contains_key("X") {
                        return Err(config_err("metrics", format!("model {} has no X quadrature", model.label)));
                    }
                }
                Metric::Infidelity => {}
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.is_empty() {
                return Err(config_err("sweep", "axis has no values"));
            }
            match (sweep, &self.method, &self.model) {
                (Sweep::NGrid(v), MethodConfig::Dqj { .. } | MethodConfig::Sqj { .. } | MethodConfig::Lindblad { .. }, _)
                    if v.contains(&0) =>
                {
                    return Err(config_err("sweep.n_grid", "values must be at least 1"))
                }
                (Sweep::NTraj(_), MethodConfig::Dqj { .. } | MethodConfig::Lindblad { .. }, _) => {
                    return Err(config_err("sweep.n_traj", "only applies to the sqj method"))
                }
                (Sweep::NTraj(v), _, _) if v.contains(&0) => {
                    return Err(config_err("sweep.n_traj", "values must be at least 1"))
                }
                (Sweep::NQubits(_), _, m) if !matches!(m, ModelConfig::Tfim { .. }) => {
                    return Err(config_err("sweep.n_qubits", "only applies to the tfim model"))
                }
                (Sweep::Gamma(v), _, _) if v.iter().any(|&g| g.is_nan() || g < 0.0) => {
                    return Err(config_err("sweep.gamma", "values must be non-negative"))
                }
                _ => {}
            }
            for point in self.sweep_points()? {
                point.model.build()?;
            }
        }
        Ok(())
    }

    /// One configuration per sweep value, in axis order. Without a sweep block,
    /// the configuration itself.
    pub fn sweep_points(&self) -> Result<Vec<ExperimentConfig>> {
        let base = ExperimentConfig { sweep: None, ..self.clone() };
        let Some(sweep) = &self.sweep else {
            return Ok(vec![base]);
        };
        let points = match sweep {
            Sweep::NGrid(values) => values
                .iter()
                .map(|&n| {
                    let mut p = base.clone();
                    match &mut p.method {
                        MethodConfig::Dqj { n_grid, .. }
                        | MethodConfig::Sqj { n_grid, .. }
                        | MethodConfig::Lindblad { n_grid } => *n_grid = n,
                    }
                    p
                })
                .collect(),
            Sweep::NTraj(values) => values
                .iter()
                .map(|&n| {
                    let mut p = base.clone();
                    if let MethodConfig::Sqj { n_traj, .. } = &mut p.method {
                        *n_traj = n;
                    }
                    p
                })
                .collect(),
            Sweep::Gamma(values) => values
                .iter()
                .map(|&g| ExperimentConfig { model: base.model.with_gamma(g), ..base.clone() })
                .collect(),
            Sweep::NQubits(values) => values
                .iter()
                .map(|&n| {
                    let mut p = base.clone();
                    if let ModelConfig::Tfim { n_qubits, .. } = &mut p.model {
                        *n_qubits = n;
                    }
                    p
                })
                .collect(),
        };
        Ok(points)
    }
}
