//! Quench dynamics of the Qi-Wu-Zhang Chern insulator under dephasing, with
//! Berry and Uhlmann topological invariants of the evolving state.

pub mod critical;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod lindblad;
pub mod matrix;
pub mod qwz;
pub mod ramp;

pub use error::{Error, Result};
pub use geometry::{HolonomyResult, LoopField, SpectralFlow, Winding};
pub use grid::{MomentumGrid, StateField};
pub use lindblad::{DephasingConfig, IntegratorConfig, Trajectory};
pub use matrix::Matrix2;
pub use qwz::{ModelParams, MomentumPoint};
pub use ramp::{CriticalCrossing, RampProtocol};
