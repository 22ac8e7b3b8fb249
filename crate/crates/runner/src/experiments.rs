//! Experiment pipelines: evolve, compute invariants, write CSVs and the report.

use std::time::Instant;

use uhlmann_core::geometry::{berry_profile, chern_number, spectrum_index, uhlmann_number};
use uhlmann_core::lindblad::{advance, band_populations, evolve};
use uhlmann_core::qwz::hamiltonian_chern;
use uhlmann_core::{
    DephasingConfig, IntegratorConfig, MomentumGrid, MomentumPoint, RampProtocol, SpectralFlow,
    StateField, Trajectory,
};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::Result;
use crate::output::{
    tag, write_gap_scan, write_invariant_vs_time, write_occupation, write_phase_diagram,
    write_phase_profile, GapSample, OutputDir, TimeRow,
};
use crate::report::{
    ExperimentReport, InvariantKind, InvariantRecord, SamplePoint, SnapshotCheck, Timing,
    TransitionEstimate, GAP_CLOSED,
};
use crate::search::{bisect_index, find_change, golden_min, Probe};

/// Window and step of the gap-closing time scan.
pub const TIME_SCAN: (f64, f64, f64) = (5.0, 7.0, 0.02);
/// Resolution of the refined gap-closing time.
pub const TIME_TOLERANCE: f64 = 1e-4;
pub const GAMMA_WIDTH: f64 = 1e-3;
pub const VELOCITY_WIDTH: f64 = 0.05;

/// Runs the experiment selected by `cfg.experiment`.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    match cfg.experiment {
        ExperimentKind::PhaseDiagram => run_phase_diagram(cfg),
        ExperimentKind::Fig1 => run_fig1(cfg),
        ExperimentKind::Fig2 => run_fig2(cfg),
        ExperimentKind::Fig3 => run_fig3(cfg),
        ExperimentKind::Fig4 => run_fig4(cfg),
        ExperimentKind::Custom => run_custom(cfg),
    }
}

struct Session {
    cfg: ExperimentConfig,
    grid: MomentumGrid,
    out: OutputDir,
    report: ExperimentReport,
}

impl Session {
    fn open(cfg: &ExperimentConfig) -> Result<Self> {
        Ok(Self {
            cfg: cfg.clone(),
            grid: MomentumGrid::new(cfg.grid[0], cfg.grid[1])?,
            out: OutputDir::create(&cfg.output_dir)?,
            report: ExperimentReport::new(cfg.clone()),
        })
    }

    fn time<T>(&mut self, stage: String, body: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let value = body()?;
        self.report.timings.push(Timing {
            stage,
            grid_points: self.grid.len(),
            seconds: start.elapsed().as_secs_f64(),
        });
        Ok(value)
    }

    fn ground(&self, m: f64) -> Result<StateField> {
        Ok(StateField::ground_state(self.grid.clone(), m)?)
    }

    fn evolve(&mut self, label: &str, p: &RampProtocol, gamma: f64, times: Vec<f64>) -> Result<Trajectory> {
        let rho0 = self.ground(p.m_i)?;
        let deph = DephasingConfig::uniform(gamma)?;
        let t_final = *times.last().expect("validated sample times");
        let icfg = IntegratorConfig::new(self.cfg.dt, t_final, times)?;
        let traj = self.time(format!("evolve {label}"), || Ok(evolve(&rho0, p, &deph, &icfg)?))?;
        for snap in &traj.snapshots {
            self.check(label, snap);
        }
        Ok(traj)
    }

    fn final_state(&mut self, label: &str, p: &RampProtocol, gamma: f64) -> Result<StateField> {
        let t_end = *self.cfg.sample_times.last().expect("validated sample times");
        let traj = self.evolve(label, p, gamma, vec![t_end])?;
        Ok(traj.snapshots.into_iter().next().expect("one snapshot"))
    }

    fn check(&mut self, label: &str, snap: &StateField) {
        let (hermiticity, trace, negativity) = snap.validity();
        self.report.snapshots.push(SnapshotCheck {
            label: label.to_string(),
            t: snap.t,
            hermiticity,
            trace,
            negativity,
        });
    }

    /// Records n_U and ñ_U of a dephased state and returns the flow with ñ_U.
    fn mixed_invariants(&mut self, at: SamplePoint, field: &StateField) -> Result<(SpectralFlow, Probe)> {
        let flow = SpectralFlow::from_field(field);
        let gap = flow.amplitude_gap;
        let n_h = at.m.and_then(|m| hamiltonian_chern(m).ok());
        let n_u = InvariantRecord::from_outcome(at.clone(), InvariantKind::UhlmannNumber, uhlmann_number(&flow))?
            .with_gap(gap)
            .with_hamiltonian(n_h);
        let index = InvariantRecord::from_outcome(at, InvariantKind::SpectrumIndex, spectrum_index(&flow))?
            .with_gap(gap)
            .with_hamiltonian(n_h);
        let probe = Probe {
            index: index.value,
            gap,
        };
        self.report.invariants.push(n_u);
        self.report.invariants.push(index);
        Ok((flow, probe))
    }

    fn finish(self) -> Result<ExperimentReport> {
        self.out.finish(self.report)
    }
}

fn probe_of(flow: &SpectralFlow) -> Probe {
    Probe {
        index: spectrum_index(flow).ok().map(|w| w.value),
        gap: flow.amplitude_gap,
    }
}

fn phi_or_nan(flow: &SpectralFlow) -> Vec<(f64, f64)> {
    flow.samples
        .iter()
        .map(|s| (s.kx, s.phi_u().unwrap_or(f64::NAN)))
        .collect()
}

/// Chern numbers of ground states over the configured masses.
pub fn run_phase_diagram(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut s = Session::open(cfg)?;
    for &m in &cfg.masses {
        let field = s.ground(m)?;
        let outcome = s.time(tag("chern m", m), || Ok(berry_profile(&field).and_then(|p| chern_number(&p))))?;
        let at = SamplePoint {
            label: tag("m", m),
            m: Some(m),
            ..Default::default()
        };
        let rec = InvariantRecord::from_outcome(at, InvariantKind::ChernNumber, outcome)?
            .with_hamiltonian(hamiltonian_chern(m).ok());
        s.report.invariants.push(rec);
    }
    let rows: Vec<&InvariantRecord> = s.report.invariants.iter().collect();
    s.out.write("phase_diagram.csv", |w| write_phase_diagram(w, &rows))?;
    s.finish()
}

/// Invariant time series of the coherent and dephased ramps.
pub fn run_fig1(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    time_series(cfg, &[cfg.protocol.v])
}

/// The time-series pipeline over every (velocity, γ) pair of the config.
pub fn run_custom(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    time_series(cfg, &cfg.velocities)
}

fn time_series(cfg: &ExperimentConfig, velocities: &[f64]) -> Result<ExperimentReport> {
    let mut s = Session::open(cfg)?;
    let mut rows = Vec::new();
    for &v in velocities {
        let p = cfg.protocol.with_velocity(v)?;
        for &gamma in &cfg.gamma {
            let label = if velocities.len() > 1 {
                format!("{}_{}", tag("gamma", gamma), tag("v", v))
            } else {
                tag("gamma", gamma)
            };
            let traj = s.evolve(&label, &p, gamma, cfg.sample_times.clone())?;
            for snap in &traj.snapshots {
                let m = p.m_of_t(snap.t);
                let at = SamplePoint {
                    label: label.clone(),
                    m: Some(m),
                    t: Some(snap.t),
                    gamma: Some(gamma),
                    v: Some(v),
                };
                let n_h = hamiltonian_chern(m).ok();
                let row = if gamma == 0.0 {
                    let outcome = berry_profile(snap).and_then(|p| chern_number(&p));
                    let rec = InvariantRecord::from_outcome(at, InvariantKind::ChernNumber, outcome)?
                        .with_hamiltonian(n_h);
                    s.report.invariants.push(rec.clone());
                    TimeRow {
                        t: snap.t,
                        m_of_t: m,
                        state: rec,
                        spectrum: None,
                    }
                } else {
                    s.mixed_invariants(at, snap)?;
                    let n = s.report.invariants.len();
                    TimeRow {
                        t: snap.t,
                        m_of_t: m,
                        state: s.report.invariants[n - 2].clone(),
                        spectrum: Some(s.report.invariants[n - 1].clone()),
                    }
                };
                rows.push(row);
            }
            let last = traj.last();
            let (source, profile) = if gamma == 0.0 {
                ("berry", berry_profile(last)?)
            } else {
                let flow = SpectralFlow::from_field(last);
                s.out.spectral_flow(&label, &flow)?;
                ("uhlmann", phi_or_nan(&flow))
            };
            s.out.write(&format!("phase_profile_{label}.csv"), |w| {
                write_phase_profile(w, source, &profile)
            })?;
        }
    }
    let ground = berry_profile(&s.ground(cfg.protocol.m_f)?)?;
    s.out.write("phase_profile_ground.csv", |w| write_phase_profile(w, "berry", &ground))?;
    s.out.write("invariant_vs_time.csv", |w| write_invariant_vs_time(w, &rows))?;
    s.finish()
}

/// Holonomy spectra at the sample times and the gap-closing time t*.
pub fn run_fig2(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut s = Session::open(cfg)?;
    let gamma = cfg.gamma[0];
    let p = cfg.protocol.ramp()?;
    let label = tag("gamma", gamma);
    let traj = s.evolve(&label, &p, gamma, cfg.sample_times.clone())?;
    for snap in &traj.snapshots {
        let at = SamplePoint {
            label: tag("t", snap.t),
            m: Some(p.m_of_t(snap.t)),
            t: Some(snap.t),
            gamma: Some(gamma),
            v: Some(p.v),
        };
        let (flow, _) = s.mixed_invariants(at, snap)?;
        s.out.spectral_flow(&tag("t", snap.t), &flow)?;
    }

    let deph = DephasingConfig::uniform(gamma)?;
    let (t0, t1, step) = TIME_SCAN;
    let start = match traj.at_time(t0) {
        Some(f) => f.clone(),
        None => advance(&s.ground(p.m_i)?, &p, &deph, t0, cfg.dt)?,
    };
    let dt = cfg.dt;
    let n = ((t1 - t0) / step).round() as usize;
    let (scan, best_start, best_i) = s.time("gap scan".into(), || {
        let mut scan = Vec::with_capacity(n + 1);
        let mut state = start;
        let mut prev = state.clone();
        let mut best = (f64::INFINITY, 0, state.clone());
        for i in 0..=n {
            let t = t0 + i as f64 * step;
            if i > 0 {
                let next = advance(&state, &p, &deph, t, dt)?;
                prev = std::mem::replace(&mut state, next);
            }
            let flow = SpectralFlow::from_field(&state);
            let probe = probe_of(&flow);
            if probe.gap < best.0 {
                best = (probe.gap, i, prev.clone());
            }
            scan.push(GapSample {
                x: t,
                min_gap: probe.gap,
                kx_at_min: flow.samples[flow.gap_minimum()].kx,
                index: probe.index,
            });
        }
        Ok((scan, best.2, best.1))
    })?;
    s.out.write("gap_scan.csv", |w| write_gap_scan(w, "t", &scan))?;

    let lower = scan[best_i.saturating_sub(1)].x;
    let upper = scan[(best_i + 1).min(n)].x;
    let mut evaluations = 0;
    let (t_star, gap_star, _) = s.time("gap refine".into(), || {
        golden_min(lower, upper, TIME_TOLERANCE, |t| {
            evaluations += 1;
            let f = advance(&best_start, &p, &deph, t, dt)?;
            Ok(SpectralFlow::from_field(&f).amplitude_gap)
        })
    })?;
    let (min_gap, min_gap_at) = if gap_star <= scan[best_i].min_gap {
        (gap_star, t_star)
    } else {
        (scan[best_i].min_gap, scan[best_i].x)
    };
    s.report.transitions.push(TransitionEstimate {
        parameter: "t".into(),
        lower,
        upper,
        estimate: min_gap_at,
        index_lower: scan[best_i.saturating_sub(1)].index,
        index_upper: scan[(best_i + 1).min(n)].index,
        min_gap,
        min_gap_at,
        gap_closed: min_gap < GAP_CLOSED,
        evaluations,
        note: None,
    });
    s.finish()
}

/// Final-state spectra per γ and the critical γ*.
pub fn run_fig3(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut s = Session::open(cfg)?;
    let p = cfg.protocol.ramp()?;
    let t_end = *cfg.sample_times.last().expect("validated sample times");
    let mut probes = Vec::new();
    for &gamma in &cfg.gamma {
        let label = tag("gamma", gamma);
        let field = s.final_state(&label, &p, gamma)?;
        let at = SamplePoint {
            label: label.clone(),
            m: Some(p.m_of_t(t_end)),
            t: Some(t_end),
            gamma: Some(gamma),
            v: Some(p.v),
        };
        let (flow, probe) = s.mixed_invariants(at, &field)?;
        s.out.spectral_flow(&label, &flow)?;
        probes.push((gamma, probe));
    }
    if let Some((lo, hi)) = find_change(&probes) {
        let est = bisect_index("gamma", lo, hi, GAMMA_WIDTH, |gamma| {
            let field = s.final_state(&format!("{} search", tag("gamma", gamma)), &p, gamma)?;
            Ok(probe_of(&SpectralFlow::from_field(&field)))
        })?;
        s.report.transitions.push(est);
    }
    s.finish()
}

/// Per-velocity occupation and spectra, and the transition velocity bracket.
pub fn run_fig4(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut s = Session::open(cfg)?;
    let gamma = cfg.gamma[0];
    let t_end = *cfg.sample_times.last().expect("validated sample times");
    let iy = s.grid.nearest_ky(0.0);
    let ky = s.grid.ky()[iy];
    let mut probes = Vec::new();
    for &v in &cfg.velocities {
        let p = cfg.protocol.with_velocity(v)?;
        let label = tag("v", v);
        let field = s.final_state(&label, &p, gamma)?;
        let m_end = p.m_of_t(t_end);
        let occupation = s
            .grid
            .kx()
            .iter()
            .enumerate()
            .map(|(ix, &kx)| {
                let (_, upper) = band_populations(field.state(ix, iy), MomentumPoint::new(kx, ky), m_end)?;
                Ok((kx, upper))
            })
            .collect::<Result<Vec<_>>>()?;
        s.out.write(&format!("occupation_{label}.csv"), |w| write_occupation(w, ky, &occupation))?;
        let at = SamplePoint {
            label: label.clone(),
            m: Some(m_end),
            t: Some(t_end),
            gamma: Some(gamma),
            v: Some(v),
        };
        let (flow, probe) = s.mixed_invariants(at, &field)?;
        s.out.spectral_flow(&label, &flow)?;
        probes.push((v, probe));
    }
    if let Some((lo, hi)) = find_change(&probes) {
        let est = bisect_index("v", lo, hi, VELOCITY_WIDTH, |v| {
            let p = cfg.protocol.with_velocity(v)?;
            let field = s.final_state(&format!("{} search", tag("v", v)), &p, gamma)?;
            Ok(probe_of(&SpectralFlow::from_field(&field)))
        })?;
        s.report.transitions.push(est);
    }
    s.finish()
}
