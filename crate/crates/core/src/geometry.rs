//! Geometric phases along fixed-kx loops and their windings over kx.
//!
//! Pure states: discrete Wilson-loop Berry phase. Mixed states: Uhlmann
//! parallel transport, holonomy matrix M = ρ(k₀)·P exp ∮A_U, Uhlmann phase
//! arg Tr M and the polar form z± = λ± e^{iμ±} of the eigenvalues of M.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::StateField;
use crate::lindblad::CSV_SCHEMA;
use crate::matrix::{inner, Matrix2, Vec2};
use crate::qwz::wrap_angle;

/// Purity below which a state is treated as mixed.
pub const PURITY_TOLERANCE: f64 = 1e-8;
/// Eigenvalue floor in the (p_i + p_j) denominator of the connection.
pub const EIGENVALUE_CLAMP: f64 = 1e-12;
/// Largest accepted winding residual.
pub const WINDING_RESIDUAL_LIMIT: f64 = 0.1;
/// Amplitude gap at or below which the spectrum index is undefined.
pub const GAPLESS_THRESHOLD: f64 = 1e-4;

/// Density matrices around a closed ky loop at fixed kx.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopField {
    pub kx: f64,
    /// Strictly increasing samples covering [−π, π) once.
    pub ky: Vec<f64>,
    pub states: Vec<Matrix2>,
}

impl LoopField {
    pub fn new(kx: f64, ky: Vec<f64>, states: Vec<Matrix2>) -> Result<Self> {
        if ky.len() < 16 || ky.len() != states.len() {
            return Err(Error::invalid(format!(
                "loop needs >= 16 samples with one state each (got {} ky, {} states)",
                ky.len(),
                states.len()
            )));
        }
        if ky.windows(2).any(|w| w[1] <= w[0]) || ky[ky.len() - 1] - ky[0] >= 2.0 * PI {
            return Err(Error::invalid("ky samples must increase strictly within one period"));
        }
        Ok(Self { kx, ky, states })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Width of segment j → j+1, including the closing segment back to the base point.
    pub fn segment_width(&self, j: usize) -> f64 {
        let n = self.ky.len();
        if j + 1 < n {
            self.ky[j + 1] - self.ky[j]
        } else {
            self.ky[0] + 2.0 * PI - self.ky[n - 1]
        }
    }

    /// The same loop with the base point moved to sample `start`.
    pub fn rebased(&self, start: usize) -> LoopField {
        let n = self.len();
        let ky = (0..n)
            .map(|j| {
                let i = (start + j) % n;
                if i < start {
                    self.ky[i] + 2.0 * PI
                } else {
                    self.ky[i]
                }
            })
            .collect();
        let states = (0..n).map(|j| self.states[(start + j) % n]).collect();
        LoopField {
            kx: self.kx,
            ky,
            states,
        }
    }
}

/// State vector of a (numerically) pure density matrix.
fn state_vector(rho: &Matrix2) -> Vec2 {
    // The column with the larger norm is proportional to the state.
    let c0 = [rho.get(0, 0), rho.get(1, 0)];
    let c1 = [rho.get(0, 1), rho.get(1, 1)];
    let col = if inner(&c0, &c0).re >= inner(&c1, &c1).re {
        c0
    } else {
        c1
    };
    let norm = inner(&col, &col).re.sqrt();
    [col[0] / norm, col[1] / norm]
}

/// Berry phase −arg Π⟨ψ_j|ψ_{j+1}⟩ around the loop, in (−π, π].
pub fn berry_phase_loop(lp: &LoopField) -> Result<f64> {
    let mut vectors = Vec::with_capacity(lp.len());
    for rho in &lp.states {
        let purity = rho.purity();
        if purity < 1.0 - PURITY_TOLERANCE {
            return Err(Error::MixedStateInput { purity });
        }
        vectors.push(state_vector(rho));
    }
    let n = vectors.len();
    let mut product = C64::new(1.0, 0.0);
    for j in 0..n {
        let overlap = inner(&vectors[j], &vectors[(j + 1) % n]);
        let size = overlap.norm();
        if size < 1e-8 {
            return Err(Error::VanishingOverlap { overlap: size });
        }
        product *= overlap / size;
    }
    Ok(wrap_angle(-product.arg()))
}

/// Integer winding of a phase profile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Winding {
    pub value: i32,
    /// |Σ/2π − value|. Zero up to rounding for any finite closed profile;
    /// non-finite phases make it NaN.
    pub residual: f64,
    /// Largest wrapped step as a fraction of a full turn. Values near ½ mean
    /// a step whose direction the sampling cannot resolve.
    pub max_step: f64,
}

/// Winding of an ordered (kx, Φ) profile over the closed kx cycle.
///
/// Steps are wrapped into (−π, π] and summed, including the step from the
/// last sample back to the first; the total divided by 2π is the winding.
/// A last sample at kx₀ + 2π is the first loop again and is skipped.
pub fn winding_number(profile: &[(f64, f64)]) -> Result<Winding> {
    let mut n = profile.len();
    if n > 1 && (profile[n - 1].0 - profile[0].0 - 2.0 * PI).abs() < 1e-9 {
        n -= 1;
    }
    let mut sum = 0.0;
    let mut max_step: f64 = 0.0;
    for j in 0..n {
        let step = wrap_angle(profile[(j + 1) % n].1 - profile[j].1);
        sum += step;
        max_step = max_step.max(step.abs());
    }
    let turns = sum / (2.0 * PI);
    let value = turns.round();
    let residual = (turns - value).abs();
    if !(residual <= WINDING_RESIDUAL_LIMIT) {
        return Err(Error::AmbiguousWinding { residual });
    }
    Ok(Winding {
        value: value as i32,
        residual,
        max_step: max_step / (2.0 * PI),
    })
}

/// Chern number from a Berry-phase profile Φ_B(kx); needs ≥ 21 samples.
pub fn chern_number(phase_vs_kx: &[(f64, f64)]) -> Result<Winding> {
    if phase_vs_kx.len() < 21 {
        return Err(Error::invalid(format!(
            "need at least 21 kx samples, got {}",
            phase_vs_kx.len()
        )));
    }
    winding_number(phase_vs_kx)
}

/// √ρ for a positive semidefinite 2×2 Hermitian matrix:
/// (ρ + √det ρ 𝟙) / √(Tr ρ + 2√det ρ). Eigenvalues down to −1e−10 are clamped.
pub fn sqrt_psd_2x2(rho: &Matrix2) -> Matrix2 {
    let h = rho.hermitian_part();
    let e = h.eigh();
    if e.values[0] < 0.0 {
        // Project small negative eigenvalues onto zero before taking the root.
        let p = [e.values[0].max(0.0), e.values[1].max(0.0)];
        let mut out = Matrix2::zero();
        for i in 0..2 {
            out += Matrix2::outer(&e.vectors[i], &e.vectors[i]) * p[i].sqrt();
        }
        return out;
    }
    let s = h.det().re.max(0.0).sqrt();
    let t = h.trace().re + 2.0 * s;
    if t <= 0.0 {
        return Matrix2::zero();
    }
    (h + Matrix2::identity() * s) * (1.0 / t.sqrt())
}

/// A_U·Δky for the segment ρ_a → ρ_b.
///
/// Built in the eigenbasis {φ_i, p_i} of ρ_mid = (ρ_a + ρ_b)/2:
/// ⟨φ_i|[∂√ρ, √ρ]|φ_j⟩ = D_ij (s_j − s_i) with D_ij = ⟨φ_i|∂√ρ|φ_j⟩ and
/// s_i = ⟨φ_i|(√ρ_a + √ρ_b)/2|φ_i⟩, divided by max(p_i, ε) + max(p_j, ε).
/// Averaging the roots rather than rooting the average keeps s = p for
/// projectors, so pure loops reproduce the Wilson loop to fourth order.
pub fn uhlmann_connection_step(rho_a: &Matrix2, rho_b: &Matrix2, d_ky: f64) -> Matrix2 {
    let sa = sqrt_psd_2x2(rho_a);
    let sb = sqrt_psd_2x2(rho_b);
    let derivative = (sb - sa) * (1.0 / d_ky);
    let mid = (*rho_a + *rho_b) * 0.5;
    let e = mid.eigh();
    let p = [
        e.values[0].max(EIGENVALUE_CLAMP),
        e.values[1].max(EIGENVALUE_CLAMP),
    ];
    let s_mid = (sa + sb) * 0.5;
    let roots = [
        s_mid.sandwich(&e.vectors[0], &e.vectors[0]).re,
        s_mid.sandwich(&e.vectors[1], &e.vectors[1]).re,
    ];
    let mut a = Matrix2::zero();
    for i in 0..2 {
        for j in 0..2 {
            if i == j {
                continue;
            }
            let d_ij = derivative.sandwich(&e.vectors[i], &e.vectors[j]);
            let coeff = d_ij * ((roots[j] - roots[i]) / (p[i] + p[j]));
            a += Matrix2::outer(&e.vectors[i], &e.vectors[j]) * coeff;
        }
    }
    a * d_ky
}

/// Holonomy matrix and its spectrum for one loop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolonomyResult {
    pub kx: f64,
    pub m: Matrix2,
    pub z_plus: C64,
    pub z_minus: C64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
}

impl HolonomyResult {
    fn from_matrix(kx: f64, m: Matrix2) -> Self {
        let (z_plus, z_minus) = m.eigenvalues();
        Self {
            kx,
            m,
            z_plus,
            z_minus,
            lambda_plus: z_plus.norm(),
            lambda_minus: z_minus.norm(),
            mu_plus: wrap_angle(z_plus.arg()),
            mu_minus: wrap_angle(z_minus.arg()),
        }
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    /// Uhlmann phase arg Tr M in (−π, π]; `ZeroTrace` when |Tr M| < 1e−12.
    pub fn phi_u(&self) -> Result<f64> {
        let tr = self.trace();
        if tr.norm() < 1e-12 {
            return Err(Error::ZeroTrace(tr.norm()));
        }
        Ok(wrap_angle(tr.arg()))
    }

    pub fn amplitude_gap(&self) -> f64 {
        self.lambda_plus - self.lambda_minus
    }
}

/// Ordered product of segment exponentials, last segment leftmost.
pub fn path_ordered_exponential(lp: &LoopField) -> Matrix2 {
    let n = lp.len();
    let mut acc = Matrix2::identity();
    for j in 0..n {
        let step = uhlmann_connection_step(&lp.states[j], &lp.states[(j + 1) % n], lp.segment_width(j));
        acc = step.exp() * acc;
    }
    acc
}

/// Uhlmann holonomy with base point at the first loop sample and gauge U₀ = 𝟙.
pub fn uhlmann_holonomy(lp: &LoopField) -> HolonomyResult {
    let m = lp.states[0] * path_ordered_exponential(lp);
    HolonomyResult::from_matrix(lp.kx, m)
}

/// Holonomy with the initial amplitude re-gauged by `u0`: M → U₀† M U₀.
pub fn uhlmann_holonomy_gauged(lp: &LoopField, u0: &Matrix2) -> HolonomyResult {
    let base = uhlmann_holonomy(lp);
    HolonomyResult::from_matrix(lp.kx, u0.dagger() * base.m * *u0)
}

/// Holonomy spectra along kx.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralFlow {
    pub samples: Vec<HolonomyResult>,
    pub amplitude_gap: f64,
}

impl SpectralFlow {
    pub fn new(samples: Vec<HolonomyResult>) -> Self {
        let amplitude_gap = samples
            .iter()
            .map(HolonomyResult::amplitude_gap)
            .fold(f64::INFINITY, f64::min);
        Self {
            samples,
            amplitude_gap,
        }
    }

    /// Flow of every kx loop in `field`, computed in parallel.
    pub fn from_field(field: &StateField) -> Self {
        let samples = (0..field.grid.kx().len())
            .into_par_iter()
            .map(|ix| uhlmann_holonomy(&field.loop_at(ix)))
            .collect();
        Self::new(samples)
    }

    pub fn kx(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.kx).collect()
    }

    /// (kx, Φ_U) profile; fails if any loop has a vanishing trace.
    pub fn phi_profile(&self) -> Result<Vec<(f64, f64)>> {
        self.samples.iter().map(|s| Ok((s.kx, s.phi_u()?))).collect()
    }

    pub fn mu_plus_profile(&self) -> Vec<(f64, f64)> {
        self.samples.iter().map(|s| (s.kx, s.mu_plus)).collect()
    }

    /// Index of the kx sample with the smallest amplitude gap.
    pub fn gap_minimum(&self) -> usize {
        self.samples
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.amplitude_gap().total_cmp(&b.1.amplitude_gap()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// Columns: kx, phi_u, lambda_plus, lambda_minus, mu_plus, mu_minus.
    /// An undefined phi_u is written as NaN.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{CSV_SCHEMA} spectral_flow")?;
        writeln!(w, "kx,phi_u,lambda_plus,lambda_minus,mu_plus,mu_minus")?;
        for s in &self.samples {
            writeln!(
                w,
                "{:?},{:?},{:?},{:?},{:?},{:?}",
                s.kx,
                s.phi_u().unwrap_or(f64::NAN),
                s.lambda_plus,
                s.lambda_minus,
                s.mu_plus,
                s.mu_minus
            )?;
        }
        Ok(())
    }
}

/// Berry-phase profile Φ_B(kx) of a pure-state field.
pub fn berry_profile(field: &StateField) -> Result<Vec<(f64, f64)>> {
    (0..field.grid.kx().len())
        .into_par_iter()
        .map(|ix| {
            let lp = field.loop_at(ix);
            Ok((lp.kx, berry_phase_loop(&lp)?))
        })
        .collect()
}

/// Uhlmann number: winding of Φ_U(kx).
pub fn uhlmann_number(flow: &SpectralFlow) -> Result<Winding> {
    winding_number(&flow.phi_profile()?)
}

/// Spectrum index: winding of μ₊(kx); requires a gapped amplitude spectrum.
pub fn spectrum_index(flow: &SpectralFlow) -> Result<Winding> {
    if flow.amplitude_gap <= GAPLESS_THRESHOLD {
        return Err(Error::GaplessSpectrum {
            gap: flow.amplitude_gap,
        });
    }
    winding_number(&flow.mu_plus_profile())
}
