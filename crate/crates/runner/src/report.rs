use serde::{Deserialize, Serialize};
use uhlmann_core::{Error, Winding};

use crate::config::ExperimentConfig;
use crate::error::Result;

pub const REPORT_SCHEMA: &str = "uhlmann-lab report v1";

/// Amplitude gap below which a transition scan counts the spectrum as closed.
pub const GAP_CLOSED: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InvariantKind {
    /// Berry-phase winding of a pure state.
    ChernNumber,
    /// Winding of Φ_U.
    UhlmannNumber,
    /// Winding of μ₊, the phase of the larger holonomy eigenvalue.
    SpectrumIndex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    Ambiguous,
    Gapless,
    Undefined,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Ambiguous => "ambiguous",
            Status::Gapless => "gapless",
            Status::Undefined => "undefined",
        }
    }
}

/// Where in parameter space an invariant was taken.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub label: String,
    pub m: Option<f64>,
    pub t: Option<f64>,
    pub gamma: Option<f64>,
    pub v: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantRecord {
    #[serde(flatten)]
    pub at: SamplePoint,
    pub kind: InvariantKind,
    pub value: Option<i32>,
    pub residual: Option<f64>,
    pub max_step: Option<f64>,
    pub amplitude_gap: Option<f64>,
    /// hamiltonian_chern of the instantaneous mass, when it is noncritical.
    pub hamiltonian: Option<i32>,
    pub status: Status,
}

impl InvariantRecord {
    /// Turns a winding outcome into a record. Errors that leave the invariant
    /// undefined become a status; anything else is returned.
    pub fn from_outcome(
        at: SamplePoint,
        kind: InvariantKind,
        outcome: uhlmann_core::Result<Winding>,
    ) -> Result<Self> {
        let mut rec = Self {
            at,
            kind,
            value: None,
            residual: None,
            max_step: None,
            amplitude_gap: None,
            hamiltonian: None,
            status: Status::Ok,
        };
        match outcome {
            Ok(w) => {
                rec.value = Some(w.value);
                rec.residual = Some(w.residual);
                rec.max_step = Some(w.max_step);
            }
            Err(Error::AmbiguousWinding { residual }) => {
                rec.residual = Some(residual);
                rec.status = Status::Ambiguous;
            }
            Err(Error::GaplessSpectrum { gap }) => {
                rec.amplitude_gap = Some(gap);
                rec.status = Status::Gapless;
            }
            Err(Error::ZeroTrace(_) | Error::MixedStateInput { .. } | Error::VanishingOverlap { .. }) => {
                rec.status = Status::Undefined;
            }
            Err(e) => return Err(e.into()),
        }
        Ok(rec)
    }

    pub fn with_gap(mut self, gap: f64) -> Self {
        self.amplitude_gap = Some(gap);
        self
    }

    pub fn with_hamiltonian(mut self, n: Option<i32>) -> Self {
        self.hamiltonian = n;
        self
    }
}

/// Outcome of a search for the point where an index changes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionEstimate {
    /// "t", "gamma" or "v".
    pub parameter: String,
    pub lower: f64,
    pub upper: f64,
    pub estimate: f64,
    pub index_lower: Option<i32>,
    pub index_upper: Option<i32>,
    /// Smallest amplitude gap seen during the search.
    pub min_gap: f64,
    pub min_gap_at: f64,
    pub gap_closed: bool,
    pub evaluations: usize,
    pub note: Option<String>,
}

/// Worst density-matrix violation over one snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotCheck {
    pub label: String,
    pub t: f64,
    pub hermiticity: f64,
    pub trace: f64,
    pub negativity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub stage: String,
    pub grid_points: usize,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub config: ExperimentConfig,
    pub invariants: Vec<InvariantRecord>,
    pub transitions: Vec<TransitionEstimate>,
    pub snapshots: Vec<SnapshotCheck>,
    pub files: Vec<String>,
    pub timings: Vec<Timing>,
}

impl ExperimentReport {
    pub fn new(config: ExperimentConfig) -> Self {
        Self {
            schema: REPORT_SCHEMA.to_string(),
            config,
            invariants: Vec::new(),
            transitions: Vec::new(),
            snapshots: Vec::new(),
            files: Vec::new(),
            timings: Vec::new(),
        }
    }

    /// True when some reported invariant is ambiguous, gapless or undefined.
    pub fn flagged(&self) -> bool {
        self.invariants.iter().any(|r| r.status != Status::Ok)
    }

    pub fn find(&self, kind: InvariantKind, pred: impl Fn(&SamplePoint) -> bool) -> Option<&InvariantRecord> {
        self.invariants.iter().find(|r| r.kind == kind && pred(&r.at))
    }

    pub fn transition(&self, parameter: &str) -> Option<&TransitionEstimate> {
        self.transitions.iter().find(|t| t.parameter == parameter)
    }
}
