//! Experiment configuration: a TOML file (JSON accepted), one experiment
//! per file.

use std::path::{Path, PathBuf};

use relstring::weak::{CompletionConfig, TestFunction};
use relstring::{Boundary, ManifoldParams, StateU};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    Simulate,
    Thm1,
    Completion,
    Validate,
}

impl ExperimentId {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Simulate => "simulate",
            ExperimentId::Thm1 => "thm1",
            ExperimentId::Completion => "completion",
            ExperimentId::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub alpha: f64,
    pub delta: f64,
    pub kappa: f64,
    pub d: usize,
}

impl ParamsSpec {
    pub fn to_params(&self) -> Result<ManifoldParams, CliError> {
        ManifoldParams::new(self.alpha, self.delta, self.kappa, self.d).map_err(|e| CliError::Config(format!("params: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub tau: f64,
    pub v: f64,
    pub eta: Vec<f64>,
    pub zeta: Vec<f64>,
}

impl StateSpec {
    pub fn to_state(&self) -> Result<StateU, CliError> {
        StateU::new(self.tau, self.v, self.eta.clone(), self.zeta.clone()).map_err(|e| CliError::Config(format!("state: {e}")))
    }
}

/// Sampling grid. Unset fields take the defaults of the chosen initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub samples: usize,
    pub start: Option<f64>,
    pub length: Option<f64>,
    pub boundary: Option<Boundary>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { samples: 1024, start: None, length: None, boundary: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// Uniform state; default grid `[0, 2 pi)`, periodic.
    Constant(StateSpec),
    /// Two constant states meeting at `at`; default grid `[-1, 1]` with
    /// constant extension, piecewise-constant samples.
    Riemann { left: StateSpec, right: StateSpec, at: f64 },
    /// Smooth relativistic data on `[0, 2 pi)`.
    SmoothM { d: usize },
    /// Smooth hull data on `[0, 2 pi)`, off `M`.
    SmoothHull { d: usize },
    /// Localised relativistic data on `[-6, 6]` with constant tails.
    LocalizedM { d: usize },
    /// Oscillating wave-family member `n` (or its limit when absent) on
    /// `[-2 pi, 2 pi)`.
    Wave { n: Option<u32> },
    /// Snapshot CSV plus JSON sidecar, relative to the config file.
    Snapshot { csv: PathBuf, meta: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thm1Spec {
    pub data_samples: usize,
    pub axis_points: usize,
}

impl Default for Thm1Spec {
    fn default() -> Self {
        Self { data_samples: 16384, axis_points: 513 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSpec {
    pub random_states: usize,
    pub legendre_states: usize,
    pub verdict_states: usize,
}

impl Default for ValidateSpec {
    fn default() -> Self {
        Self { random_states: 500, legendre_states: 100, verdict_states: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Constraint defects of evolved relativistic data.
    pub constraint: f64,
    pub membership: f64,
    /// Centred-difference residual of the augmented system.
    pub residual: f64,
    /// Relative `L1` gap between the finite-volume and exact solutions.
    pub cross_solver: f64,
    /// Characteristic against d'Alembert string positions.
    pub position: f64,
    pub identity: f64,
    pub rate_band: [f64; 2],
    pub slope_band: [f64; 2],
    pub time_ratio: f64,
    /// Exact algebraic identities in the validation suite.
    pub equality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            constraint: 1e-6,
            membership: 1e-6,
            residual: 1e-2,
            cross_solver: 5e-2,
            position: 1e-6,
            identity: 1e-3,
            rate_band: [1.6, 2.4],
            slope_band: [0.8, 1.3],
            time_ratio: 3.0,
            equality: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentId>,
    pub seed: Option<u64>,
    pub params: Option<ParamsSpec>,
    pub grid: GridSpec,
    pub initial: Option<InitialSpec>,
    pub times: Option<Vec<f64>>,
    pub n_list: Option<Vec<u32>>,
    pub thm1: Thm1Spec,
    pub completion: Option<CompletionConfig>,
    pub family: Option<Vec<TestFunction>>,
    pub output_dir: Option<PathBuf>,
    pub tolerances: Tolerances,
    pub validate: ValidateSpec,
    /// Directory that relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Parses config text; JSON when it starts with `{`, TOML otherwise.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let cfg: ExperimentConfig = if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("JSON config: {e}")))?
    } else {
        toml::from_str(text).map_err(|e| CliError::Config(format!("TOML config: {e}")))?
    };
    cfg.check_ranges()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut cfg = parse_config(&text)?;
    cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    cfg.check_files()?;
    Ok(cfg)
}

fn bad<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Config(msg.into()))
}

impl ExperimentConfig {
    fn check_ranges(&self) -> Result<(), CliError> {
        if let Some(p) = &self.params {
            p.to_params()?;
        }
        if self.grid.samples < 4 {
            return bad("grid.samples must be at least 4");
        }
        if let Some(l) = self.grid.length {
            if !(l > 0.0 && l.is_finite()) {
                return bad("grid.length must be positive");
            }
        }
        if let Some(s) = self.grid.start {
            if !s.is_finite() {
                return bad("grid.start must be finite");
            }
        }
        if let Some(ts) = &self.times {
            if ts.is_empty() || ts.iter().any(|t| !t.is_finite()) {
                return bad("times must be a non-empty list of finite numbers");
            }
        }
        if let Some(ns) = &self.n_list {
            if ns.is_empty() || ns.iter().any(|n| *n < 2) {
                return bad("n_list must be non-empty with every n >= 2");
            }
        }
        if self.thm1.data_samples < 16 || self.thm1.axis_points < 2 {
            return bad("thm1.data_samples must be at least 16 and thm1.axis_points at least 2");
        }
        if let Some(c) = &self.completion {
            c.validate().map_err(|e| CliError::Config(format!("completion: {e}")))?;
        }
        if let Some(f) = &self.family {
            if f.is_empty() || !f.iter().all(TestFunction::is_valid) {
                return bad("family must be a non-empty list of valid test functions");
            }
        }
        let t = &self.tolerances;
        let all = [t.constraint, t.membership, t.residual, t.cross_solver, t.position, t.identity, t.time_ratio, t.equality];
        if all.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
            return bad("tolerances must be finite and non-negative");
        }
        for band in [t.rate_band, t.slope_band] {
            if !(band[0] <= band[1] && band[0].is_finite() && band[1].is_finite()) {
                return bad("tolerance bands must satisfy lo <= hi");
            }
        }
        match &self.initial {
            Some(InitialSpec::Constant(state)) => check_state_dims(&[state])?,
            Some(InitialSpec::Riemann { left, right, at }) => {
                check_state_dims(&[left, right])?;
                if left.eta.len() != right.eta.len() {
                    return bad("riemann states differ in dimension");
                }
                if !at.is_finite() {
                    return bad("riemann.at must be finite");
                }
            }
            Some(InitialSpec::SmoothM { d } | InitialSpec::SmoothHull { d } | InitialSpec::LocalizedM { d }) if *d == 0 => {
                return bad("initial.d must be at least 1");
            }
            Some(InitialSpec::Wave { n: Some(n) }) if *n < 2 => return bad("wave.n must be at least 2"),
            _ => {}
        }
        Ok(())
    }

    fn check_files(&self) -> Result<(), CliError> {
        if let Some(InitialSpec::Snapshot { csv, meta }) = &self.initial {
            for p in [csv, meta] {
                let full = self.resolve(p);
                if !full.is_file() {
                    return bad(format!("referenced file {} does not exist", full.display()));
                }
            }
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

fn check_state_dims(states: &[&StateSpec]) -> Result<(), CliError> {
    for s in states {
        if s.eta.is_empty() || s.eta.len() != s.zeta.len() {
            return bad("eta and zeta must be non-empty and of equal length");
        }
        if !(s.tau.is_finite() && s.v.is_finite()) || s.eta.iter().chain(&s.zeta).any(|x| !x.is_finite()) {
            return bad("state components must be finite");
        }
    }
    Ok(())
}
