//! Exponential mass ramp m(t) = m_i + (m_f − m_i)(1 − e^{−vt}) and the
//! Landau-Zener bookkeeping for the gap closings it crosses.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::qwz::{MomentumPoint, CRITICAL_MASSES};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RampProtocol {
    pub m_i: f64,
    pub m_f: f64,
    pub v: f64,
}

impl RampProtocol {
    pub fn new(m_i: f64, m_f: f64, v: f64) -> Result<Self> {
        if !(m_i.is_finite() && m_f.is_finite()) {
            return Err(Error::invalid("ramp endpoints must be finite"));
        }
        if m_i == m_f {
            return Err(Error::invalid("ramp endpoints must differ"));
        }
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::invalid(format!("ramp rate must be positive, got {v}")));
        }
        Ok(Self { m_i, m_f, v })
    }

    /// Static Hamiltonian H(m) for all t. Not a ramp: it has no crossings and
    /// exists for frozen-H dynamics.
    pub fn frozen(m: f64) -> Self {
        Self { m_i: m, m_f: m, v: 0.0 }
    }

    pub fn is_frozen(&self) -> bool {
        self.v == 0.0
    }

    pub fn m_of_t(&self, t: f64) -> f64 {
        m_of_t(self, t)
    }

    /// dm/dt = v (m_f − m_i) e^{−vt}
    pub fn m_dot(&self, t: f64) -> f64 {
        self.v * (self.m_f - self.m_i) * (-self.v * t).exp()
    }
}

pub fn m_of_t(p: &RampProtocol, t: f64) -> f64 {
    p.m_i + (p.m_f - p.m_i) * (-(-p.v * t).exp_m1())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalCrossing {
    pub m_c: f64,
    pub k_c: MomentumPoint,
    pub t_c: f64,
    pub v_lz: f64,
}

fn gap_closing_momenta(m_c: f64) -> Vec<MomentumPoint> {
    if m_c == -2.0 {
        vec![MomentumPoint::new(0.0, 0.0)]
    } else if m_c == 2.0 {
        vec![MomentumPoint::new(PI, PI)]
    } else {
        vec![MomentumPoint::new(0.0, PI), MomentumPoint::new(PI, 0.0)]
    }
}

/// Every gap closing the ramp passes through, in order of crossing time.
/// m_c = 0 closes the gap at two momenta and contributes two entries.
pub fn critical_crossings(p: &RampProtocol) -> Vec<CriticalCrossing> {
    let (lo, hi) = if p.m_i < p.m_f {
        (p.m_i, p.m_f)
    } else {
        (p.m_f, p.m_i)
    };
    let mut out: Vec<CriticalCrossing> = CRITICAL_MASSES
        .iter()
        .copied()
        .filter(|&m_c| lo < m_c && m_c < hi)
        .flat_map(|m_c| {
            let t_c = ((p.m_f - p.m_i) / (p.m_f - m_c)).ln() / p.v;
            let v_lz = p.v * (p.m_f - m_c).abs();
            gap_closing_momenta(m_c).into_iter().map(move |k_c| CriticalCrossing {
                m_c,
                k_c,
                t_c,
                v_lz,
            })
        })
        .collect();
    out.sort_by(|a, b| a.t_c.total_cmp(&b.t_c));
    out
}

/// Number of distinct critical masses crossed.
pub fn distinct_boundaries(crossings: &[CriticalCrossing]) -> usize {
    let mut masses: Vec<f64> = crossings.iter().map(|c| c.m_c).collect();
    masses.dedup();
    masses.len()
}

/// P_LZ = exp(−π |k − k_c|² / v_LZ), with the distance taken on the torus.
pub fn lz_probability(k: MomentumPoint, crossing: &CriticalCrossing) -> f64 {
    (-PI * k.torus_distance_sqr(&crossing.k_c) / crossing.v_lz).exp()
}

/// r_k = 2 P_LZ − 1.
pub fn r_of_k(k: MomentumPoint, crossing: &CriticalCrossing) -> f64 {
    2.0 * lz_probability(k, crossing) - 1.0
}

/// Closed-form r_k for the whole ramp: −1 when no boundary is crossed; for a
/// single crossed boundary the excitations from each of its gap-closing momenta
/// combine through the survival product 1 − Π(1 − P_j).
pub fn ramp_r_of_k(k: MomentumPoint, p: &RampProtocol) -> Result<f64> {
    let crossings = critical_crossings(p);
    let boundaries = distinct_boundaries(&crossings);
    if boundaries > 1 {
        return Err(Error::UnsupportedMultiCrossing(boundaries));
    }
    let survival: f64 = crossings
        .iter()
        .map(|c| 1.0 - lz_probability(k, c))
        .product();
    Ok(2.0 * (1.0 - survival) - 1.0)
}
