//! The Qi-Wu-Zhang two-band Bloch Hamiltonian H_k(m) = d_k(m)·σ with
//! d_k(m) = (sin kx, sin ky, m + cos kx + cos ky).

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::matrix::{pauli_eigenvector, Matrix2, Vec2};

/// |d| below which a momentum is treated as a gap-closing point.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// Mass values at which the bulk gap closes.
pub const CRITICAL_MASSES: [f64; 3] = [-2.0, 0.0, 2.0];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub m: f64,
}

impl ModelParams {
    pub fn new(m: f64) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::invalid(format!("mass must be finite, got {m}")));
        }
        Ok(Self { m })
    }

    pub fn is_critical(&self) -> bool {
        CRITICAL_MASSES.contains(&self.m)
    }
}

/// Reduce an angle into [−π, π]; values already inside are returned unchanged.
pub fn reduce_to_zone(k: f64) -> f64 {
    if (-PI..=PI).contains(&k) {
        return k;
    }
    let r = (k + PI).rem_euclid(2.0 * PI) - PI;
    if r < -PI {
        r + 2.0 * PI
    } else {
        r
    }
}

/// Wrap an angle difference into (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentumPoint {
    pub kx: f64,
    pub ky: f64,
}

impl MomentumPoint {
    pub fn new(kx: f64, ky: f64) -> Self {
        Self {
            kx: reduce_to_zone(kx),
            ky: reduce_to_zone(ky),
        }
    }

    /// Squared Euclidean distance on the torus, each component wrapped into (−π, π].
    pub fn torus_distance_sqr(&self, other: &MomentumPoint) -> f64 {
        let dx = wrap_angle(self.kx - other.kx);
        let dy = wrap_angle(self.ky - other.ky);
        dx * dx + dy * dy
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector {
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
}

impl BlochVector {
    pub fn as_array(&self) -> [f64; 3] {
        [self.dx, self.dy, self.dz]
    }

    pub fn norm(&self) -> f64 {
        (self.dx * self.dx + self.dy * self.dy + self.dz * self.dz).sqrt()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EigenSystem {
    /// |d|; the bands sit at ±energy.
    pub energy: f64,
    /// Unit vector d/|d|.
    pub n: [f64; 3],
    pub lower: Vec2,
    pub upper: Vec2,
}

pub fn bloch_vector(k: MomentumPoint, m: f64) -> BlochVector {
    let (sx, cx) = k.kx.sin_cos();
    let (sy, cy) = k.ky.sin_cos();
    BlochVector {
        dx: sx,
        dy: sy,
        dz: m + cx + cy,
    }
}

pub fn hamiltonian(k: MomentumPoint, m: f64) -> Matrix2 {
    Matrix2::from_real_vector(bloch_vector(k, m).as_array())
}

fn degenerate(k: MomentumPoint, m: f64, norm: f64) -> Error {
    Error::DegeneratePoint {
        kx: k.kx,
        ky: k.ky,
        m,
        norm,
    }
}

/// Unit vector n = d/|d|, or `DegeneratePoint` at a gap closing.
pub fn unit_bloch_vector(k: MomentumPoint, m: f64) -> Result<[f64; 3]> {
    let d = bloch_vector(k, m);
    let norm = d.norm();
    if norm < DEGENERACY_THRESHOLD {
        return Err(degenerate(k, m, norm));
    }
    Ok([d.dx / norm, d.dy / norm, d.dz / norm])
}

pub fn eigensystem(k: MomentumPoint, m: f64) -> Result<EigenSystem> {
    let energy = bloch_vector(k, m).norm();
    let n = unit_bloch_vector(k, m)?;
    Ok(EigenSystem {
        energy,
        n,
        lower: pauli_eigenvector(n, -1.0),
        upper: pauli_eigenvector(n, 1.0),
    })
}

/// Lower-band Chern number of H(m): −sgn(m) for 0 < |m| < 2, else 0.
pub fn hamiltonian_chern(m: f64) -> Result<i32> {
    if CRITICAL_MASSES.contains(&m) || !m.is_finite() {
        return Err(Error::CriticalParameter(m));
    }
    Ok(if m.abs() < 2.0 { -(m.signum() as i32) } else { 0 })
}

/// Projector ½(𝟙 − n·σ) onto the lower band.
pub fn ground_state_density(k: MomentumPoint, m: f64) -> Result<Matrix2> {
    let n = unit_bloch_vector(k, m)?;
    Ok(Matrix2::from_bloch([-n[0], -n[1], -n[2]]))
}
