//! Run configuration: TOML sections `[model]`, `[schedule]`, `[solver]`,
//! `[sweep]`, `[simulate]`, `[linearization]`, `[validate]` and `[output]`,
//! every key optional, overridable with `section.key=value` strings.
//! Defaults reproduce the reference experiments.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::equilibrium::SolverConfig;
use crate::mollifier::{KernelSpec, SeasonSchedule};
use crate::models::{LVMalthusParams, LogisticMalthus, LogisticMalthusParams, LotkaVolterraMalthus, SeasonalModel};

/// Environment variable overriding `sweep.workers`.
pub const WORKERS_ENV: &str = "SEASON_BIFURC_WORKERS";

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// 1-based line in the config file, when the key came from there.
    pub line: Option<usize>,
    /// `section.key`, when known.
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.key) {
            (Some(l), Some(k)) => write!(f, "line {l}: {k}: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "{k}: {}", self.message),
            (None, None) => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    LotkaVolterra,
    /// Scalar restriction to species 1 (`alpha1`, `beta11`, `mu1`).
    Logistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta11: f64,
    pub beta12: f64,
    pub beta21: f64,
    pub beta22: f64,
    pub mu1: f64,
    pub mu2: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        let p = LVMalthusParams::reference();
        Self {
            kind: ModelKind::LotkaVolterra,
            alpha1: p.alpha[0],
            alpha2: p.alpha[1],
            beta11: p.beta[0][0],
            beta12: p.beta[0][1],
            beta21: p.beta[1][0],
            beta22: p.beta[1][1],
            mu1: p.mu[0],
            mu2: p.mu[1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleSection {
    pub tau: f64,
    pub epsilon: f64,
}

impl Default for ScheduleSection {
    fn default() -> Self {
        Self { tau: 0.45, epsilon: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialDatum {
    /// Only `"half-coexistence"` is accepted.
    Named(String),
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub dt: f64,
    pub tol: f64,
    pub max_periods: usize,
    pub initial: InitialDatum,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverConfig::default();
        Self {
            dt: s.dt,
            tol: s.tol,
            max_periods: s.max_periods,
            initial: InitialDatum::Named("half-coexistence".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Mesh `start + (stop - start) n / (count - 1)`, `n = 0..count`;
    /// points outside the admissible season lengths are dropped.
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    /// 0 picks one worker per available core.
    pub workers: usize,
    pub checkpoint: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            start: 0.0,
            stop: 1.0,
            count: 366,
            workers: 0,
            checkpoint: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub periods: usize,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self { periods: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearizationSection {
    pub unit_tol: f64,
    /// Largest accepted residual of the secondary mesh scan.
    pub scan_bound: f64,
    /// Step of the branch derivative used by condition (d).
    pub branch_delta: f64,
}

impl Default for LinearizationSection {
    fn default() -> Self {
        Self {
            unit_tol: crate::linearization::UNIT_MULTIPLIER_TOL,
            scan_bound: 1e-2,
            branch_delta: 2.0 / 365.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSection {
    pub draws: usize,
    pub seed: u64,
}

impl Default for ValidateSection {
    fn default() -> Self {
        Self {
            draws: crate::validation::DEFAULT_DRAWS,
            seed: crate::validation::DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub plot: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            plot: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub schedule: ScheduleSection,
    pub solver: SolverSection,
    pub sweep: SweepSection,
    pub simulate: SimulateSection,
    pub linearization: LinearizationSection,
    pub validate: ValidateSection,
    pub output: OutputSection,
}

/// Model selected by a config, as a trait object.
pub enum ModelChoice {
    LotkaVolterra(LotkaVolterraMalthus),
    Logistic(LogisticMalthus),
}

impl ModelChoice {
    pub fn as_model(&self) -> &dyn SeasonalModel {
        match self {
            ModelChoice::LotkaVolterra(m) => m,
            ModelChoice::Logistic(m) => m,
        }
    }
}

fn line_of(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].matches('\n').count() + 1
}

/// Line on which `section.key` is assigned in `source`.
fn locate(source: &str, key: &str) -> Option<usize> {
    let (section, field) = key.split_once('.')?;
    let mut current = String::new();
    for (i, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            continue;
        }
        if current == section {
            if let Some((lhs, _)) = line.split_once('=') {
                if lhs.trim() == field {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn parse_override(spec: &str) -> Result<(String, String, toml::Value), ConfigError> {
    let err = |m: &str| ConfigError {
        line: None,
        key: Some(format!("--set {spec}")),
        message: m.to_string(),
    };
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| err("expected section.key=value"))?;
    let key = key.trim();
    let (section, field) = key
        .split_once('.')
        .ok_or_else(|| err("key must be qualified as section.key"))?;
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    Ok((section.to_string(), field.to_string(), value))
}

impl RunConfig {
    /// Parses `source` (TOML; may be empty), applies `overrides` and
    /// validates the result.
    pub fn parse(source: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        // typed pass for line-numbered syntax, type and unknown-key errors
        toml::from_str::<RunConfig>(source).map_err(|e| ConfigError {
            line: e.span().map(|s| line_of(source, s.start)),
            key: None,
            message: e.message().to_string(),
        })?;
        let mut table: toml::Table = source.parse().expect("checked above");
        let mut from_flags = Vec::new();
        for spec in overrides {
            let (section, field, value) = parse_override(spec)?;
            let entry = table
                .entry(section.clone())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            let toml::Value::Table(t) = entry else {
                return Err(ConfigError {
                    line: None,
                    key: Some(section),
                    message: "is not a section".into(),
                });
            };
            t.insert(field.clone(), value);
            from_flags.push(format!("{section}.{field}"));
        }
        let config: RunConfig = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| ConfigError {
            line: None,
            key: Some("--set".into()),
            message: e.message().to_string(),
        })?;
        config.validate().map_err(|(key, message)| ConfigError {
            line: if from_flags.contains(&key) {
                None
            } else {
                locate(source, &key)
            },
            key: Some(if from_flags.contains(&key) {
                format!("--set {key}")
            } else {
                key
            }),
            message,
        })?;
        Ok(config)
    }

    pub fn from_file(path: &std::path::Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let source = std::fs::read_to_string(path).map_err(|e| ConfigError {
            line: None,
            key: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&source, overrides)
    }

    fn validate(&self) -> Result<(), (String, String)> {
        let fail = |k: &str, m: String| Err((k.to_string(), m));
        let positive = [
            ("solver.dt", self.solver.dt),
            ("solver.tol", self.solver.tol),
            ("linearization.unit_tol", self.linearization.unit_tol),
            ("linearization.scan_bound", self.linearization.scan_bound),
            ("linearization.branch_delta", self.linearization.branch_delta),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return fail(k, format!("must be a positive number, got {v}"));
            }
        }
        if !(self.schedule.tau > 0.0 && self.schedule.tau < 1.0) {
            return fail(
                "schedule.tau",
                format!("must lie in the open interval (0, 1), got {}", self.schedule.tau),
            );
        }
        if !(self.schedule.epsilon >= 0.0 && self.schedule.epsilon < 1.0) {
            return fail(
                "schedule.epsilon",
                format!("must lie in [0, 1), got {}", self.schedule.epsilon),
            );
        }
        if let Err(e) = self.season() {
            return fail("schedule.tau", e.to_string());
        }
        if let Err(e) = self.solver_config().validate() {
            let key = if self.solver.max_periods < 2 { "solver.max_periods" } else { "solver.dt" };
            return fail(key, e.to_string());
        }
        match self.model.kind {
            ModelKind::LotkaVolterra => {
                if let Err(e) = self.lv_params() {
                    return fail("model.alpha1", e.to_string());
                }
            }
            ModelKind::Logistic => {
                if let Err(e) = self.logistic_params() {
                    return fail("model.alpha1", e.to_string());
                }
            }
        }
        match &self.solver.initial {
            InitialDatum::Named(n) if n != "half-coexistence" => {
                return fail(
                    "solver.initial",
                    format!("expected \"half-coexistence\" or an array of numbers, got \"{n}\""),
                )
            }
            InitialDatum::Explicit(v) if v.len() != self.dimension() || v.iter().any(|x| !x.is_finite()) => {
                return fail(
                    "solver.initial",
                    format!("expected {} finite components, got {v:?}", self.dimension()),
                )
            }
            _ => {}
        }
        if self.sweep.count < 2 {
            return fail("sweep.count", format!("must be at least 2, got {}", self.sweep.count));
        }
        if !(self.sweep.start < self.sweep.stop) || !self.sweep.start.is_finite() || !self.sweep.stop.is_finite() {
            return fail("sweep.start", "start must be below stop".into());
        }
        if self.tau_mesh().is_empty() {
            return fail("sweep.start", "no admissible season length in the sweep range".into());
        }
        if self.simulate.periods == 0 {
            return fail("simulate.periods", "must be at least 1".into());
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        match self.model.kind {
            ModelKind::LotkaVolterra => 2,
            ModelKind::Logistic => 1,
        }
    }

    pub fn lv_params(&self) -> crate::Result<LVMalthusParams> {
        let m = &self.model;
        LVMalthusParams::new(
            [m.alpha1, m.alpha2],
            [[m.beta11, m.beta12], [m.beta21, m.beta22]],
            [m.mu1, m.mu2],
        )
    }

    pub fn logistic_params(&self) -> crate::Result<LogisticMalthusParams> {
        LogisticMalthusParams::new(self.model.alpha1, self.model.beta11, self.model.mu1)
    }

    pub fn model(&self) -> crate::Result<ModelChoice> {
        Ok(match self.model.kind {
            ModelKind::LotkaVolterra => ModelChoice::LotkaVolterra(LotkaVolterraMalthus::new(self.lv_params()?)),
            ModelKind::Logistic => ModelChoice::Logistic(LogisticMalthus::new(self.logistic_params()?)),
        })
    }

    pub fn kernel(&self) -> crate::Result<KernelSpec> {
        KernelSpec::new(self.schedule.epsilon)
    }

    pub fn season(&self) -> crate::Result<SeasonSchedule> {
        SeasonSchedule::new(self.schedule.tau, self.kernel()?)
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            dt: self.solver.dt,
            tol: self.solver.tol,
            max_periods: self.solver.max_periods,
        }
    }

    /// Explicit initial datum, or half of the coexistence state
    /// (half the carrying capacity for the scalar model).
    pub fn initial_state(&self) -> Vec<f64> {
        match (&self.solver.initial, self.model.kind) {
            (InitialDatum::Explicit(v), _) => v.clone(),
            (_, ModelKind::LotkaVolterra) => match self.lv_params() {
                Ok(p) => crate::oracles::coexistence_equilibrium(&p).iter().map(|c| 0.5 * c).collect(),
                Err(_) => vec![f64::NAN; 2],
            },
            (_, ModelKind::Logistic) => vec![0.5 * self.model.alpha1 / self.model.beta11],
        }
    }

    /// Admissible points of the configured mesh.
    pub fn tau_mesh(&self) -> Vec<f64> {
        let s = &self.sweep;
        let half = 0.5 * self.schedule.epsilon;
        let denom = (s.count.max(2) - 1) as f64;
        (0..s.count)
            .map(|n| s.start + (s.stop - s.start) * n as f64 / denom)
            .filter(|&t| t > 0.0 && t < 1.0 && (half == 0.0 || (t > half && t < 1.0 - half)))
            .collect()
    }

    /// Worker count after the environment override.
    pub fn workers(&self) -> Result<usize, ConfigError> {
        match std::env::var(WORKERS_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| ConfigError {
                line: None,
                key: Some(WORKERS_ENV.into()),
                message: format!("expected a non-negative integer, got \"{v}\""),
            }),
            Err(_) => Ok(self.sweep.workers),
        }
    }

    /// The resolved configuration as TOML lines, for output headers.
    pub fn echo_lines(&self) -> Vec<String> {
        toml::to_string(self)
            .expect("config serializes")
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(str::to_string)
            .collect()
    }
}
