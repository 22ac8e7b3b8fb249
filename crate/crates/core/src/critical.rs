//! Closed forms on the critical loop kx = 0 for ramps through m_c = −2.
//!
//! On that loop n lies in the y-z plane at the planar angle
//! α(ky) = atan2(sin ky, m_f + 1 + cos ky), and the Uhlmann transport of the
//! dephased state ½(1 + r n·σ) rotates by Θ₀ = ∮ (N²/2) ∂α dky with
//! N = (√(1+r) − √(1−r))/√2.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::{closed_axis, StateField};
use crate::matrix::Matrix2;
use crate::qwz::{unit_bloch_vector, MomentumPoint};
use crate::ramp::{ramp_r_of_k, RampProtocol};

/// r(0, ky) sampled on the critical loop.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalProfile {
    pub m_f: f64,
    /// Ordered samples over [−π, π], both endpoints included.
    pub ky: Vec<f64>,
    pub r: Vec<f64>,
}

impl CriticalProfile {
    pub fn new(m_f: f64, ky: Vec<f64>, r: Vec<f64>) -> Result<Self> {
        if ky.len() < 2 || ky.len() != r.len() {
            return Err(Error::invalid("profile needs >= 2 samples with one r each"));
        }
        if ky.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("ky samples must be strictly increasing"));
        }
        if let Some(bad) = r.iter().find(|x| !(-1.0..=1.0).contains(*x)) {
            return Err(Error::invalid(format!("|r| must not exceed 1, got {bad}")));
        }
        Ok(Self { m_f, ky, r })
    }

    /// Constant r on `n` samples.
    pub fn uniform(m_f: f64, r: f64, n: usize) -> Result<Self> {
        Self::new(m_f, closed_axis(n), vec![r; n])
    }

    /// Landau-Zener profile left behind by the ramp `p`.
    pub fn landau_zener(p: &RampProtocol, n: usize) -> Result<Self> {
        let ky = closed_axis(n);
        let r = ky
            .iter()
            .map(|&ky| ramp_r_of_k(MomentumPoint { kx: 0.0, ky }, p))
            .collect::<Result<Vec<_>>>()?;
        Self::new(p.m_f, ky, r)
    }

    /// r = b·n(m_f) read off the loop of `field` at column `ix`; the loop is
    /// closed by repeating its first sample at ky + 2π.
    pub fn from_field(field: &StateField, ix: usize, m_f: f64) -> Result<Self> {
        let lp = field.loop_at(ix);
        let mut ky = lp.ky.clone();
        ky.push(lp.ky[0] + 2.0 * PI);
        let mut r = Vec::with_capacity(ky.len());
        for (&ky, rho) in lp.ky.iter().zip(&lp.states) {
            let n = unit_bloch_vector(MomentumPoint::new(lp.kx, ky), m_f)?;
            let b = rho.bloch_vector();
            r.push((b[0] * n[0] + b[1] * n[1] + b[2] * n[2]).clamp(-1.0, 1.0));
        }
        r.push(r[0]);
        Self::new(m_f, ky, r)
    }
}

/// α(ky) = atan2(sin ky, m_f + 1 + cos ky).
pub fn planar_angle(ky: f64, m_f: f64) -> Result<f64> {
    let (s, c) = ky.sin_cos();
    let x = m_f + 1.0 + c;
    if s == 0.0 && x == 0.0 {
        return Err(Error::UndefinedAngle { ky, m_f });
    }
    Ok(s.atan2(x))
}

/// ∂α/∂ky = [1 + (m_f+1) cos ky] / [1 + (m_f+1)² + 2(m_f+1) cos ky].
pub fn d_planar_angle(ky: f64, m_f: f64) -> Result<f64> {
    let a = m_f + 1.0;
    let c = ky.cos();
    let denom = 1.0 + a * a + 2.0 * a * c;
    if denom <= 1e-12 {
        return Err(Error::SingularDenominator { ky, m_f });
    }
    Ok((1.0 + a * c) / denom)
}

/// N² for a Bloch length r.
fn n_squared(r: f64) -> f64 {
    let n = ((1.0 + r).max(0.0).sqrt() - (1.0 - r).max(0.0).sqrt()) / 2f64.sqrt();
    n * n
}

/// Θ₀ by the composite trapezoid at the profile's own sampling.
pub fn theta0(profile: &CriticalProfile) -> Result<f64> {
    let integrand = profile
        .ky
        .iter()
        .zip(&profile.r)
        .map(|(&ky, &r)| Ok(0.5 * n_squared(r) * d_planar_angle(ky, profile.m_f)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(trapezoid(&profile.ky, &integrand))
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// Θ₀ at `n` and at doubled resolution `2n − 1` for an r(ky) given as a function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Theta0Estimate {
    pub coarse: f64,
    pub fine: f64,
    /// (4·fine − coarse)/3.
    pub extrapolated: f64,
}

impl Theta0Estimate {
    pub fn discrepancy(&self) -> f64 {
        (self.fine - self.coarse).abs()
    }
}

pub fn theta0_richardson<F>(m_f: f64, r_of_ky: F, n: usize) -> Result<Theta0Estimate>
where
    F: Fn(f64) -> Result<f64>,
{
    let eval = |n: usize| -> Result<f64> {
        let ky = closed_axis(n);
        let r = ky.iter().map(|&k| r_of_ky(k)).collect::<Result<Vec<_>>>()?;
        theta0(&CriticalProfile::new(m_f, ky, r)?)
    };
    let coarse = eval(n)?;
    let fine = eval(2 * n - 1)?;
    Ok(Theta0Estimate {
        coarse,
        fine,
        extrapolated: (4.0 * fine - coarse) / 3.0,
    })
}

/// Closed-form holonomy on the critical loop and its eigenvalues, |z₊| ≥ |z₋|.
pub fn critical_holonomy(theta: f64, p_plus0: f64) -> Result<(Matrix2, C64, C64)> {
    if !(0.0..=1.0).contains(&p_plus0) {
        return Err(Error::invalid(format!("population {p_plus0} outside [0, 1]")));
    }
    let p_minus0 = 1.0 - p_plus0;
    let r0 = p_plus0 - p_minus0;
    let (s, c) = theta.sin_cos();
    let m = Matrix2::new(
        C64::new(p_plus0 * c, 0.0),
        C64::new(0.0, p_plus0 * s),
        C64::new(0.0, p_minus0 * s),
        C64::new(p_minus0 * c, 0.0),
    );
    let root = C64::new(r0 * r0 - s * s, 0.0).sqrt();
    let a = (C64::new(c, 0.0) + root) * 0.5;
    let b = (C64::new(c, 0.0) - root) * 0.5;
    Ok(if a.norm() >= b.norm() { (m, a, b) } else { (m, b, a) })
}

/// Leading-order shift −Λ²√π √v_LZ / (m_f + 2) of the Berry phase at the critical momentum.
pub fn delta_phi(v_lz: f64, m_f: f64, cutoff_lambda: f64) -> Result<f64> {
    if m_f == -2.0 || !(v_lz >= 0.0) || !(cutoff_lambda >= 1.0) {
        return Err(Error::invalid(format!(
            "delta_phi needs m_f != -2, v_lz >= 0, lambda >= 1 (got {m_f}, {v_lz}, {cutoff_lambda})"
        )));
    }
    Ok(-cutoff_lambda * cutoff_lambda * PI.sqrt() / (m_f + 2.0) * v_lz.sqrt())
}

/// arg cos(Φ_B + correction): π for a negative cosine, 0 for a positive one.
pub fn quantized_uhlmann_phase(phi_b: f64, correction: f64) -> Result<f64> {
    let c = (phi_b + correction).cos();
    if c.abs() < 1e-12 {
        return Err(Error::UndefinedPhase(c));
    }
    Ok(if c < 0.0 { PI } else { 0.0 })
}
