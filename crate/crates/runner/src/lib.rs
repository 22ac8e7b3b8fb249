//! Experiment runner for dephasing-assisted preparation of Chern insulator
//! states: presets, transition searches, CSV and JSON output.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod report;
pub mod search;

pub use config::{resolve, ExperimentConfig, ExperimentKind, Overrides};
pub use error::{Result, RunError};
pub use experiments::{
    run, run_custom, run_fig1, run_fig2, run_fig3, run_fig4, run_phase_diagram,
};
pub use report::{ExperimentReport, InvariantKind, InvariantRecord, Status};
