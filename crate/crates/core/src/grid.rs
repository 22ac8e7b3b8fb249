//! Brillouin-zone sampling and per-momentum state fields.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::LoopField;
use crate::matrix::Matrix2;
use crate::qwz::{ground_state_density, MomentumPoint};

/// Rectangular momentum grid.
///
/// `kx` holds the sampled loop positions (the default layout includes both
/// zone edges, so kx = −π and kx = π describe the same loop). `ky` holds the
/// distinct loop samples covering [−π, π) once; ky = π is identified with
/// the base point ky = −π. Point `(ix, iy)` has flat index `ix * ky.len() + iy`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumGrid {
    kx: Vec<f64>,
    ky: Vec<f64>,
}

/// `n` equally spaced points on [−π, π] with both endpoints included.
pub fn closed_axis(n: usize) -> Vec<f64> {
    let last = (n - 1) as f64;
    (0..n)
        .map(|j| PI * (2.0 * j as f64 - last) / last)
        .collect()
}

/// `n` equally spaced points on [−π, π).
pub fn loop_axis(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| PI * (2.0 * j as f64 - n as f64) / n as f64)
        .collect()
}

impl MomentumGrid {
    /// `nkx × nky` grid in the closed-endpoint convention: `nkx` kx values on
    /// [−π, π] and `nky − 1` distinct ky loop samples.
    pub fn new(nkx: usize, nky: usize) -> Result<Self> {
        if nkx < 2 || nky < 17 {
            return Err(Error::invalid(format!(
                "grid {nkx}x{nky} too small (need nkx >= 2, nky >= 17)"
            )));
        }
        Ok(Self {
            kx: closed_axis(nkx),
            ky: loop_axis(nky - 1),
        })
    }

    /// Grid from explicit axes; `ky` must be strictly increasing inside [−π, π).
    pub fn from_axes(kx: Vec<f64>, ky: Vec<f64>) -> Result<Self> {
        if kx.is_empty() || ky.len() < 16 {
            return Err(Error::invalid("need at least one kx and 16 ky samples"));
        }
        if ky.windows(2).any(|w| w[1] <= w[0]) || ky[0] < -PI || *ky.last().unwrap() >= PI {
            return Err(Error::invalid("ky samples must increase strictly within [-pi, pi)"));
        }
        Ok(Self { kx, ky })
    }

    pub fn kx(&self) -> &[f64] {
        &self.kx
    }

    pub fn ky(&self) -> &[f64] {
        &self.ky
    }

    pub fn len(&self) -> usize {
        self.kx.len() * self.ky.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        ix * self.ky.len() + iy
    }

    pub fn point(&self, ix: usize, iy: usize) -> MomentumPoint {
        MomentumPoint {
            kx: self.kx[ix],
            ky: self.ky[iy],
        }
    }

    pub fn point_at(&self, flat: usize) -> MomentumPoint {
        let n = self.ky.len();
        self.point(flat / n, flat % n)
    }

    pub fn points(&self) -> impl Iterator<Item = MomentumPoint> + '_ {
        (0..self.len()).map(move |i| self.point_at(i))
    }

    /// Index of the kx sample closest to `kx`.
    pub fn nearest_kx(&self, kx: f64) -> usize {
        nearest(&self.kx, kx)
    }

    pub fn nearest_ky(&self, ky: f64) -> usize {
        nearest(&self.ky, ky)
    }
}

fn nearest(axis: &[f64], x: f64) -> usize {
    axis.iter()
        .enumerate()
        .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// One density matrix per grid point at a common time.
#[derive(Clone, Debug, PartialEq)]
pub struct StateField {
    pub grid: MomentumGrid,
    pub t: f64,
    pub states: Vec<Matrix2>,
}

impl StateField {
    pub fn new(grid: MomentumGrid, t: f64, states: Vec<Matrix2>) -> Result<Self> {
        if states.len() != grid.len() {
            return Err(Error::invalid(format!(
                "{} states for a grid of {} points",
                states.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, t, states })
    }

    /// Lower-band projectors of H(m) at every grid point.
    pub fn ground_state(grid: MomentumGrid, m: f64) -> Result<Self> {
        let states = grid
            .points()
            .map(|k| ground_state_density(k, m))
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, 0.0, states)
    }

    pub fn state(&self, ix: usize, iy: usize) -> &Matrix2 {
        &self.states[self.grid.index(ix, iy)]
    }

    /// The fixed-kx loop at column `ix`.
    pub fn loop_at(&self, ix: usize) -> LoopField {
        let n = self.grid.ky.len();
        let start = ix * n;
        LoopField {
            kx: self.grid.kx[ix],
            ky: self.grid.ky.clone(),
            states: self.states[start..start + n].to_vec(),
        }
    }

    pub fn loops(&self) -> Vec<LoopField> {
        (0..self.grid.kx.len()).map(|ix| self.loop_at(ix)).collect()
    }

    /// Worst deviation from a valid density matrix: (Hermiticity, |Tr − 1|, −min eigenvalue).
    pub fn validity(&self) -> (f64, f64, f64) {
        self.states.iter().fold((0.0, 0.0, f64::NEG_INFINITY), |acc, rho| {
            let herm = rho.max_abs_diff(&rho.dagger());
            let tr = (rho.trace().re - 1.0).abs();
            let neg = -rho.eigh().values[0];
            (acc.0.max(herm), acc.1.max(tr), acc.2.max(neg))
        })
    }
}
