//! Experiment configuration: presets, JSON overlay and CLI overrides.
//!
//! A config file may be partial. Its fields are merged over the preset of the
//! selected experiment, and command-line flags are applied last.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;
use uhlmann_core::qwz::CRITICAL_MASSES;
use uhlmann_core::{IntegratorConfig, RampProtocol};

use crate::error::{Result, RunError};

pub const MIN_GRID: usize = 21;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    PhaseDiagram,
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Custom,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ExperimentKind::PhaseDiagram => "phase-diagram",
            ExperimentKind::Fig1 => "fig1",
            ExperimentKind::Fig2 => "fig2",
            ExperimentKind::Fig3 => "fig3",
            ExperimentKind::Fig4 => "fig4",
            ExperimentKind::Custom => "custom",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    pub m_i: f64,
    pub m_f: f64,
    pub v: f64,
}

impl ProtocolConfig {
    pub fn ramp(&self) -> Result<RampProtocol> {
        Ok(RampProtocol::new(self.m_i, self.m_f, self.v)?)
    }

    pub fn with_velocity(&self, v: f64) -> Result<RampProtocol> {
        Ok(RampProtocol::new(self.m_i, self.m_f, v)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub protocol: ProtocolConfig,
    /// Dephasing rates. A single number is accepted in place of a list.
    #[serde(deserialize_with = "one_or_many")]
    pub gamma: Vec<f64>,
    /// Ramp velocities swept by `fig4` and `custom`; the other experiments use `protocol.v`.
    pub velocities: Vec<f64>,
    /// (N_kx, N_ky) with both zone edges counted.
    pub grid: [usize; 2],
    pub sample_times: Vec<f64>,
    pub output_dir: PathBuf,
    pub dt: f64,
    pub t_final: f64,
    /// Masses of the phase-diagram sweep.
    #[serde(default)]
    pub masses: Vec<f64>,
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    })
}

fn uniform_times(t_final: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| t_final * j as f64 / (n - 1) as f64)
        .collect()
}

/// m ∈ [−3.5, 3.5] in steps of 0.25 with the critical masses left out.
fn phase_diagram_masses() -> Vec<f64> {
    (-14..=14)
        .map(|j| 0.25 * j as f64)
        .filter(|m| !CRITICAL_MASSES.contains(m))
        .collect()
}

impl ExperimentConfig {
    pub fn preset(kind: ExperimentKind) -> Self {
        let base = Self {
            experiment: kind,
            protocol: ProtocolConfig {
                m_i: -4.0,
                m_f: -1.0,
                v: 0.2,
            },
            gamma: vec![0.0, 2.0],
            velocities: vec![0.2],
            grid: [101, 201],
            sample_times: uniform_times(25.0, 11),
            output_dir: PathBuf::from(format!("out/{kind}")),
            dt: 1e-3,
            t_final: 25.0,
            masses: Vec::new(),
        };
        match kind {
            ExperimentKind::Fig1 | ExperimentKind::Custom => base,
            ExperimentKind::PhaseDiagram => Self {
                gamma: vec![0.0],
                sample_times: vec![0.0],
                masses: phase_diagram_masses(),
                ..base
            },
            ExperimentKind::Fig2 => Self {
                gamma: vec![2.0],
                sample_times: vec![5.0, 5.68, 25.0],
                ..base
            },
            ExperimentKind::Fig3 => Self {
                gamma: vec![0.01, 0.024, 0.05],
                sample_times: vec![25.0],
                ..base
            },
            ExperimentKind::Fig4 => Self {
                gamma: vec![2.0],
                velocities: vec![4.0, 2.5, 1.0],
                sample_times: vec![25.0],
                ..base
            },
        }
    }

    /// Preset of `kind` (or of the file's `experiment` field) with `file` merged over it.
    pub fn from_json(file: Value, kind: Option<ExperimentKind>) -> Result<Self> {
        let kind = match kind {
            Some(k) => k,
            None => match file.get("experiment") {
                Some(v) => serde_json::from_value(v.clone())
                    .map_err(|e| RunError::config(format!("experiment: {e}")))?,
                None => return Err(RunError::config("no experiment selected")),
            },
        };
        let mut merged = serde_json::to_value(Self::preset(kind))?;
        merge(&mut merged, file);
        merged["experiment"] = serde_json::to_value(kind)?;
        serde_json::from_value(merged).map_err(|e| RunError::config(e.to_string()))
    }

    pub fn load(path: &Path, kind: Option<ExperimentKind>) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
        let value: Value = serde_json::from_str(&text).map_err(|source| RunError::ConfigFile {
            path: path.to_path_buf(),
            source,
        })?;
        if !value.is_object() {
            return Err(RunError::config(format!("{} is not a JSON object", path.display())));
        }
        Self::from_json(value, kind)
    }

    pub fn validate(&self) -> Result<()> {
        let [nkx, nky] = self.grid;
        if nkx < MIN_GRID || nky < MIN_GRID {
            return Err(RunError::config(format!(
                "grid {nkx}x{nky}: both sizes must be at least {MIN_GRID}"
            )));
        }
        if self.gamma.is_empty() || self.velocities.is_empty() || self.sample_times.is_empty() {
            return Err(RunError::config("gamma, velocities and sample_times must be nonempty"));
        }
        if let Some(g) = self.gamma.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
            return Err(RunError::config(format!("dephasing rate {g} must be >= 0")));
        }
        if let Some(v) = self.velocities.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(RunError::config(format!("velocity {v} must be positive")));
        }
        self.protocol.ramp()?;
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(RunError::config(format!("t_final = {} must be positive", self.t_final)));
        }
        if self.sample_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(RunError::config("sample_times must be strictly increasing"));
        }
        if self.sample_times.iter().any(|t| !(0.0..=self.t_final).contains(t)) {
            return Err(RunError::config("sample_times must lie in [0, t_final]"));
        }
        let gamma_max = self.gamma.iter().copied().fold(0.0, f64::max);
        let limit = IntegratorConfig::max_dt(gamma_max);
        if !(self.dt > 0.0 && self.dt <= limit) {
            return Err(RunError::config(format!(
                "dt = {} must lie in (0, {limit}] for gamma up to {gamma_max}",
                self.dt
            )));
        }
        if self.experiment == ExperimentKind::PhaseDiagram {
            if self.masses.is_empty() {
                return Err(RunError::config("phase-diagram needs a nonempty mass list"));
            }
            if let Some(m) = self.masses.iter().find(|m| CRITICAL_MASSES.contains(m)) {
                return Err(RunError::config(format!("mass {m} is critical")));
            }
        }
        Ok(())
    }
}

/// Recursive object merge; `over` wins on conflicts.
fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

/// Command-line values applied over the file and preset.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub experiment: Option<ExperimentKind>,
    pub output_dir: Option<PathBuf>,
    pub grid: Option<[usize; 2]>,
    pub dt: Option<f64>,
}

/// Preset, then file, then flags; the result is validated.
pub fn resolve(file: Option<&Path>, ov: &Overrides) -> Result<ExperimentConfig> {
    let mut cfg = match file {
        Some(path) => ExperimentConfig::load(path, ov.experiment)?,
        None => match ov.experiment {
            Some(kind) => ExperimentConfig::preset(kind),
            None => return Err(RunError::config("pass --experiment or --config")),
        },
    };
    if let Some(dir) = &ov.output_dir {
        cfg.output_dir = dir.clone();
    }
    if let Some(grid) = ov.grid {
        cfg.grid = grid;
    }
    if let Some(dt) = ov.dt {
        cfg.dt = dt;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parses `NKX,NKY`.
pub fn parse_grid(s: &str) -> std::result::Result<[usize; 2], String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected NKX,NKY, got {s:?}"))?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}"));
    Ok([parse(a)?, parse(b)?])
}
