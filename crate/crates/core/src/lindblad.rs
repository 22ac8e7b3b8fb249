//! Per-momentum dephasing dynamics
//!
//!   dρ/dt = −i[H_k, ρ] + γ_k (σ̃ρσ̃ − ρ),   σ̃ = n_k(m(t))·σ,
//!
//! integrated with classical fixed-step RK4 while m(t) follows the ramp.
//!
//! For a trace-one Hermitian ρ = ½(𝟙 + b·σ) the right-hand side is affine in
//! the Bloch vector, ḃ = 2 d×b + 2γ((n·b)n − b), and RK4 commutes with affine
//! changes of variables. The hot loop therefore steps `b` directly; it produces
//! the same iterates as stepping the matrix form and keeps every state Hermitian
//! with unit trace by construction. [`evolve_point_reference`] steps the matrix
//! form through [`master_rhs`] and serves as the cross-check.

use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::StateField;
use crate::matrix::{Matrix2, I};
use crate::qwz::{bloch_vector, eigensystem, unit_bloch_vector, MomentumPoint, DEGENERACY_THRESHOLD};
use crate::ramp::RampProtocol;

/// Header line carried by every CSV this crate writes.
pub const CSV_SCHEMA: &str = "# uhlmann-lab csv v1";

/// Most negative eigenvalue tolerated before an integration is declared diverged.
const DIVERGENCE_EIGENVALUE: f64 = -1e-6;

pub type GammaProfile = Arc<dyn Fn(MomentumPoint) -> f64 + Send + Sync>;

/// Dephasing rate γ_k; uniform unless a momentum profile is supplied.
#[derive(Clone)]
pub struct DephasingConfig {
    pub gamma: f64,
    profile: Option<GammaProfile>,
}

impl fmt::Debug for DephasingConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DephasingConfig")
            .field("gamma", &self.gamma)
            .field("momentum_dependent", &self.profile.is_some())
            .finish()
    }
}

impl DephasingConfig {
    pub fn uniform(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::invalid(format!("dephasing rate must be >= 0, got {gamma}")));
        }
        Ok(Self { gamma, profile: None })
    }

    /// Momentum-dependent rate. `gamma_max` bounds the profile and sets the step-size limit.
    pub fn with_profile(gamma_max: f64, profile: GammaProfile) -> Result<Self> {
        let mut cfg = Self::uniform(gamma_max)?;
        cfg.profile = Some(profile);
        Ok(cfg)
    }

    pub fn rate_at(&self, k: MomentumPoint) -> f64 {
        match &self.profile {
            Some(f) => f(k),
            None => self.gamma,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_final: f64,
    pub sample_times: Vec<f64>,
}

impl IntegratorConfig {
    pub fn new(dt: f64, t_final: f64, sample_times: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be positive, got {dt}")));
        }
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::invalid(format!("t_final must be positive, got {t_final}")));
        }
        if sample_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("sample times must be strictly increasing"));
        }
        if sample_times.iter().any(|&t| !(0.0..=t_final).contains(&t)) {
            return Err(Error::invalid("sample times must lie in [0, t_final]"));
        }
        Ok(Self {
            dt,
            t_final,
            sample_times,
        })
    }

    /// 1e−3, or 1e−4 for γ ≥ 10.
    pub fn default_dt(gamma: f64) -> f64 {
        if gamma >= 10.0 {
            1e-4
        } else {
            1e-3
        }
    }

    /// Largest step accepted for a given dephasing rate.
    pub fn max_dt(gamma: f64) -> f64 {
        0.01f64.min(0.1 / gamma.max(1.0))
    }

    fn check_step(&self, gamma: f64) -> Result<()> {
        let limit = Self::max_dt(gamma);
        if self.dt > limit * (1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "dt = {} exceeds the stability limit {limit} for gamma = {gamma}",
                self.dt
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub protocol: RampProtocol,
    pub config: DephasingConfig,
    pub snapshots: Vec<StateField>,
}

impl Trajectory {
    pub fn last(&self) -> &StateField {
        self.snapshots.last().expect("trajectory has at least one snapshot")
    }

    pub fn at_time(&self, t: f64) -> Option<&StateField> {
        self.snapshots.iter().find(|s| (s.t - t).abs() < 1e-9)
    }

    /// Columns: t, kx, ky, then re/im of ρ00, ρ01, ρ10, ρ11.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{CSV_SCHEMA} trajectory")?;
        writeln!(
            w,
            "t,kx,ky,rho00_re,rho00_im,rho01_re,rho01_im,rho10_re,rho10_im,rho11_re,rho11_im"
        )?;
        for snap in &self.snapshots {
            for (k, rho) in snap.grid.points().zip(&snap.states) {
                write!(w, "{:?},{:?},{:?}", snap.t, k.kx, k.ky)?;
                for z in rho.0.iter().flatten() {
                    write!(w, ",{:?},{:?}", z.re, z.im)?;
                }
                writeln!(w)?;
            }
        }
        Ok(())
    }
}

/// σ̃ = n_k(m)·σ in the instantaneous eigenbasis of H_k(m).
pub fn instantaneous_dephasing_operator(k: MomentumPoint, m: f64) -> Result<Matrix2> {
    Ok(Matrix2::from_real_vector(unit_bloch_vector(k, m)?))
}

/// −i[H, ρ] + γ(σ̃ρσ̃ − ρ)
pub fn master_rhs(rho: &Matrix2, h: &Matrix2, sigma_z: &Matrix2, gamma: f64) -> Matrix2 {
    let unitary = h.commutator(rho).scale(-I);
    if gamma == 0.0 {
        return unitary;
    }
    unitary + (*sigma_z * *rho * *sigma_z - *rho) * gamma
}

/// ½(𝟙 + r σ̃): the fully dephased state with upper-band population (1 + r)/2.
pub fn dephased_closed_form(k: MomentumPoint, m: f64, r: f64) -> Result<Matrix2> {
    if !(-1.0..=1.0).contains(&r) {
        return Err(Error::invalid(format!("r must lie in [-1, 1], got {r}")));
    }
    let n = unit_bloch_vector(k, m)?;
    Ok(Matrix2::from_bloch([r * n[0], r * n[1], r * n[2]]))
}

/// (⟨−|ρ|−⟩, ⟨+|ρ|+⟩) in the instantaneous eigenbasis of H_k(m).
pub fn band_populations(rho: &Matrix2, k: MomentumPoint, m: f64) -> Result<(f64, f64)> {
    let e = eigensystem(k, m)?;
    Ok((
        rho.sandwich(&e.lower, &e.lower).re,
        rho.sandwich(&e.upper, &e.upper).re,
    ))
}

/// Ramp values needed by one RK4 step: m at the start, midpoint and end.
#[derive(Clone, Copy, Debug)]
struct StepMasses {
    h: f64,
    start: f64,
    mid: f64,
    end: f64,
}

/// Time discretisation shared by every grid point: each interval between
/// consecutive output times is split into equal steps no longer than `dt`.
#[derive(Clone, Debug)]
struct Schedule {
    steps: Vec<StepMasses>,
    /// Number of steps completed at each output time.
    outputs: Vec<usize>,
    times: Vec<f64>,
}

impl Schedule {
    fn build(t0: f64, times: &[f64], dt: f64, p: &RampProtocol) -> Self {
        let mut steps = Vec::new();
        let mut outputs = Vec::with_capacity(times.len());
        let mut t_prev = t0;
        for &t in times {
            let span = t - t_prev;
            if span > 0.0 {
                let n = ((span / dt) - 1e-9).ceil().max(1.0) as usize;
                let h = span / n as f64;
                for j in 0..n {
                    let ts = t_prev + j as f64 * h;
                    steps.push(StepMasses {
                        h,
                        start: p.m_of_t(ts),
                        mid: p.m_of_t(ts + 0.5 * h),
                        end: p.m_of_t(ts + h),
                    });
                }
            }
            outputs.push(steps.len());
            t_prev = t;
        }
        Self {
            steps,
            outputs,
            times: times.to_vec(),
        }
    }
}

/// Momentum-dependent constants of d_k(m) = (sx, sy, m + c).
#[derive(Clone, Copy, Debug)]
struct PointTerms {
    sx: f64,
    sy: f64,
    c: f64,
    s2: f64,
}

impl PointTerms {
    fn new(k: MomentumPoint) -> Self {
        let (sx, cx) = k.kx.sin_cos();
        let (sy, cy) = k.ky.sin_cos();
        Self {
            sx,
            sy,
            c: cx + cy,
            s2: sx * sx + sy * sy,
        }
    }

    /// d and n at mass m; n falls back to `prev_n` at an exact gap closing.
    #[inline]
    fn frame(&self, m: f64, prev_n: [f64; 3]) -> ([f64; 3], [f64; 3]) {
        let dz = m + self.c;
        let d = [self.sx, self.sy, dz];
        let norm = (self.s2 + dz * dz).sqrt();
        if norm < DEGENERACY_THRESHOLD {
            (d, prev_n)
        } else {
            let inv = 1.0 / norm;
            (d, [d[0] * inv, d[1] * inv, d[2] * inv])
        }
    }
}

#[inline]
fn bloch_rhs(b: [f64; 3], d: [f64; 3], n: [f64; 3], two_gamma: f64) -> [f64; 3] {
    let cross = [
        d[1] * b[2] - d[2] * b[1],
        d[2] * b[0] - d[0] * b[2],
        d[0] * b[1] - d[1] * b[0],
    ];
    let nb = n[0] * b[0] + n[1] * b[1] + n[2] * b[2];
    [
        2.0 * cross[0] + two_gamma * (nb * n[0] - b[0]),
        2.0 * cross[1] + two_gamma * (nb * n[1] - b[1]),
        2.0 * cross[2] + two_gamma * (nb * n[2] - b[2]),
    ]
}

#[inline]
fn axpy(b: [f64; 3], s: f64, k: [f64; 3]) -> [f64; 3] {
    [b[0] + s * k[0], b[1] + s * k[1], b[2] + s * k[2]]
}

fn integrate_bloch(
    b0: [f64; 3],
    k: MomentumPoint,
    gamma: f64,
    schedule: &Schedule,
) -> Result<Vec<[f64; 3]>> {
    let terms = PointTerms::new(k);
    let two_gamma = 2.0 * gamma;
    let max_norm_sqr = (1.0 - 2.0 * DIVERGENCE_EIGENVALUE).powi(2);
    // Fallback axis for a state that starts exactly at a gap closing.
    let mut n_prev = {
        let norm = (b0[0] * b0[0] + b0[1] * b0[1] + b0[2] * b0[2]).sqrt();
        if norm > 0.0 {
            [-b0[0] / norm, -b0[1] / norm, -b0[2] / norm]
        } else {
            [0.0, 0.0, 1.0]
        }
    };
    let mut b = b0;
    let mut out = Vec::with_capacity(schedule.outputs.len());
    let mut next_output = 0;
    while next_output < schedule.outputs.len() && schedule.outputs[next_output] == 0 {
        out.push(b);
        next_output += 1;
    }
    // The end frame of one step is the start frame of the next.
    let mut carried: Option<(f64, [f64; 3], [f64; 3])> = None;
    for (i, s) in schedule.steps.iter().enumerate() {
        let (d0, n0) = match carried {
            Some((m, d, n)) if m == s.start => (d, n),
            _ => terms.frame(s.start, n_prev),
        };
        let (dm, nm) = terms.frame(s.mid, n0);
        let (d1, n1) = terms.frame(s.end, nm);
        let h = s.h;
        let k1 = bloch_rhs(b, d0, n0, two_gamma);
        let k2 = bloch_rhs(axpy(b, 0.5 * h, k1), dm, nm, two_gamma);
        let k3 = bloch_rhs(axpy(b, 0.5 * h, k2), dm, nm, two_gamma);
        let k4 = bloch_rhs(axpy(b, h, k3), d1, n1, two_gamma);
        let w = h / 6.0;
        for c in 0..3 {
            b[c] += w * (k1[c] + 2.0 * (k2[c] + k3[c]) + k4[c]);
        }
        n_prev = n1;
        carried = Some((s.end, d1, n1));
        let norm_sqr = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
        if !(norm_sqr <= max_norm_sqr) {
            return Err(Error::IntegratorDiverged {
                t: schedule.times[next_output.min(schedule.times.len() - 1)],
                reason: format!(
                    "min eigenvalue {:.3e} at k = ({}, {})",
                    0.5 * (1.0 - norm_sqr.sqrt()),
                    k.kx,
                    k.ky
                ),
            });
        }
        while next_output < schedule.outputs.len() && schedule.outputs[next_output] == i + 1 {
            out.push(b);
            next_output += 1;
        }
    }
    Ok(out)
}

fn check_initial(rho: &Matrix2) -> Result<()> {
    let tr = rho.trace();
    if !rho.is_hermitian(1e-8) || (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
        return Err(Error::invalid(format!("initial state is not a density matrix: {rho:?}")));
    }
    if rho.eigh().values[0] < -1e-8 {
        return Err(Error::invalid("initial state has a negative eigenvalue"));
    }
    Ok(())
}

/// Integrates every grid point of `rho0` from `rho0.t` and returns snapshots at
/// `icfg.sample_times` (or at `t_final` when no samples are given). Sample
/// times before `rho0.t` are rejected.
pub fn evolve(
    rho0: &StateField,
    p: &RampProtocol,
    cfg: &DephasingConfig,
    icfg: &IntegratorConfig,
) -> Result<Trajectory> {
    icfg.check_step(cfg.gamma)?;
    let times: Vec<f64> = if icfg.sample_times.is_empty() {
        vec![icfg.t_final]
    } else {
        icfg.sample_times.clone()
    };
    if times[0] < rho0.t - 1e-12 {
        return Err(Error::invalid(format!(
            "sample time {} precedes the initial state at t = {}",
            times[0], rho0.t
        )));
    }
    rho0.states.iter().try_for_each(check_initial)?;
    let schedule = Schedule::build(rho0.t, &times, icfg.dt, p);
    let grid = &rho0.grid;

    let per_point: Vec<Vec<[f64; 3]>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let k = grid.point_at(i);
            let gamma = cfg.rate_at(k);
            integrate_bloch(rho0.states[i].bloch_vector(), k, gamma, &schedule)
        })
        .collect::<Result<_>>()?;

    let snapshots = times
        .iter()
        .enumerate()
        .map(|(j, &t)| StateField {
            grid: grid.clone(),
            t,
            states: per_point.iter().map(|bs| Matrix2::from_bloch(bs[j])).collect(),
        })
        .collect();
    Ok(Trajectory {
        protocol: *p,
        config: cfg.clone(),
        snapshots,
    })
}

/// Continues a field to time `t` with step ≤ `dt`.
pub fn advance(
    field: &StateField,
    p: &RampProtocol,
    cfg: &DephasingConfig,
    t: f64,
    dt: f64,
) -> Result<StateField> {
    if t < field.t {
        return Err(Error::invalid("cannot advance backwards in time"));
    }
    if t == field.t {
        return Ok(field.clone());
    }
    let icfg = IntegratorConfig::new(dt, t, vec![t])?;
    let traj = evolve(field, p, cfg, &icfg)?;
    Ok(traj.snapshots.into_iter().next().expect("one snapshot"))
}

/// Matrix-form RK4 for a single momentum, re-Hermitising and renormalising the
/// trace after every step. Returns the states at `times` and the largest
/// trace drift observed before renormalisation.
pub fn evolve_point_reference(
    rho0: Matrix2,
    k: MomentumPoint,
    p: &RampProtocol,
    gamma: f64,
    dt: f64,
    times: &[f64],
) -> Result<(Vec<Matrix2>, f64)> {
    let schedule = Schedule::build(0.0, times, dt, p);
    let mut sigma_prev = Matrix2::from_real_vector(unit_bloch_vector(k, p.m_i).unwrap_or([0.0, 0.0, 1.0]));
    let frame = |m: f64, prev: Matrix2| -> (Matrix2, Matrix2) {
        let h = Matrix2::from_real_vector(bloch_vector(k, m).as_array());
        let sigma = instantaneous_dephasing_operator(k, m).unwrap_or(prev);
        (h, sigma)
    };
    let mut rho = rho0;
    let mut out = Vec::new();
    let mut drift: f64 = 0.0;
    let mut next = 0;
    while next < schedule.outputs.len() && schedule.outputs[next] == 0 {
        out.push(rho);
        next += 1;
    }
    for (i, s) in schedule.steps.iter().enumerate() {
        let (h0, s0) = frame(s.start, sigma_prev);
        let (hm, sm) = frame(s.mid, s0);
        let (h1, s1) = frame(s.end, sm);
        let k1 = master_rhs(&rho, &h0, &s0, gamma);
        let k2 = master_rhs(&(rho + k1 * (0.5 * s.h)), &hm, &sm, gamma);
        let k3 = master_rhs(&(rho + k2 * (0.5 * s.h)), &hm, &sm, gamma);
        let k4 = master_rhs(&(rho + k3 * s.h), &h1, &s1, gamma);
        rho += (k1 + (k2 + k3) * 2.0 + k4) * (s.h / 6.0);
        sigma_prev = s1;
        rho = rho.hermitian_part();
        let tr = rho.trace().re;
        drift = drift.max((tr - 1.0).abs());
        rho = rho * (1.0 / tr);
        while next < schedule.outputs.len() && schedule.outputs[next] == i + 1 {
            out.push(rho);
            next += 1;
        }
    }
    Ok((out, drift))
}
