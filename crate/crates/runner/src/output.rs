//! CSV and JSON persistence. Each CSV opens with `# uhlmann-lab csv v1 <kind>`
//! followed by a header row; floats use the shortest round-trip form, so
//! identical runs give identical bytes.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use uhlmann_core::lindblad::CSV_SCHEMA;
use uhlmann_core::SpectralFlow;

use crate::error::{Result, RunError};
use crate::report::{ExperimentReport, InvariantRecord};

pub const REPORT_FILE: &str = "report.json";

/// Writes files into one directory and remembers their names.
#[derive(Debug)]
pub struct OutputDir {
    dir: PathBuf,
    files: Vec<String>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn write<F>(&mut self, name: &str, body: F) -> Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| RunError::io(&path, e))?;
        let mut w = BufWriter::new(file);
        body(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| RunError::io(&path, e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn spectral_flow(&mut self, tag: &str, flow: &SpectralFlow) -> Result<()> {
        self.write(&format!("spectral_flow_{tag}.csv"), |w| flow.write_csv(w))
    }

    /// Writes `report.json` last, with the manifest of everything written before it.
    pub fn finish(mut self, mut report: ExperimentReport) -> Result<ExperimentReport> {
        report.files = self.files.clone();
        report.files.push(REPORT_FILE.to_string());
        let json = serde_json::to_string_pretty(&report)?;
        self.write(REPORT_FILE, |w| writeln!(w, "{json}"))?;
        Ok(report)
    }
}

pub fn schema_line(kind: &str) -> String {
    format!("{CSV_SCHEMA} {kind}")
}

/// File-name tag for a parameter value, e.g. `gamma_0.024`.
pub fn tag(name: &str, value: f64) -> String {
    format!("{name}_{value}")
}

fn opt<T: std::fmt::Debug>(x: Option<T>) -> String {
    x.map(|v| format!("{v:?}")).unwrap_or_default()
}

/// Rows: m, n_C, residual, n_hamiltonian, status.
pub fn write_phase_diagram<W: Write>(w: &mut W, rows: &[&InvariantRecord]) -> std::io::Result<()> {
    writeln!(w, "{}", schema_line("phase_diagram"))?;
    writeln!(w, "m,n_C,residual,n_hamiltonian,status")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            opt(r.at.m),
            opt(r.value),
            opt(r.residual),
            opt(r.hamiltonian),
            r.status.as_str()
        )?;
    }
    Ok(())
}

/// One row of `invariant_vs_time.csv`.
#[derive(Clone, Debug)]
pub struct TimeRow {
    pub t: f64,
    pub m_of_t: f64,
    pub state: InvariantRecord,
    pub spectrum: Option<InvariantRecord>,
}

pub fn write_invariant_vs_time<W: Write>(w: &mut W, rows: &[TimeRow]) -> std::io::Result<()> {
    writeln!(w, "{}", schema_line("invariant_vs_time"))?;
    writeln!(
        w,
        "t,m_of_t,n_state,n_hamiltonian,gamma,v,invariant,residual,n_spectrum,amplitude_gap,status"
    )?;
    for r in rows {
        let s = &r.state;
        let kind = match s.kind {
            crate::report::InvariantKind::ChernNumber => "chern",
            crate::report::InvariantKind::UhlmannNumber => "uhlmann",
            crate::report::InvariantKind::SpectrumIndex => "spectrum",
        };
        writeln!(
            w,
            "{:?},{:?},{},{},{},{},{},{},{},{},{}",
            r.t,
            r.m_of_t,
            opt(s.value),
            opt(s.hamiltonian),
            opt(s.at.gamma),
            opt(s.at.v),
            kind,
            opt(s.residual),
            opt(r.spectrum.as_ref().and_then(|x| x.value)),
            opt(s.amplitude_gap),
            s.status.as_str()
        )?;
    }
    Ok(())
}

/// Rows: kx, phi, with `source` naming the phase (berry or uhlmann).
pub fn write_phase_profile<W: Write>(w: &mut W, source: &str, profile: &[(f64, f64)]) -> std::io::Result<()> {
    writeln!(w, "{}", schema_line("phase_profile"))?;
    writeln!(w, "kx,phi,source")?;
    for (kx, phi) in profile {
        writeln!(w, "{kx:?},{phi:?},{source}")?;
    }
    Ok(())
}

/// Rows: kx, p_upper.
pub fn write_occupation<W: Write>(w: &mut W, ky: f64, rows: &[(f64, f64)]) -> std::io::Result<()> {
    writeln!(w, "{} ky={ky}", schema_line("occupation"))?;
    writeln!(w, "kx,p_upper")?;
    for (kx, p) in rows {
        writeln!(w, "{kx:?},{p:?}")?;
    }
    Ok(())
}

/// One point of a gap scan.
#[derive(Clone, Debug, PartialEq)]
pub struct GapSample {
    pub x: f64,
    pub min_gap: f64,
    pub kx_at_min: f64,
    pub index: Option<i32>,
}

pub fn write_gap_scan<W: Write>(w: &mut W, parameter: &str, rows: &[GapSample]) -> std::io::Result<()> {
    writeln!(w, "{}", schema_line("gap_scan"))?;
    writeln!(w, "{parameter},min_gap,kx_at_min,n_spectrum")?;
    for r in rows {
        writeln!(w, "{:?},{:?},{:?},{}", r.x, r.min_gap, r.kx_at_min, opt(r.index))?;
    }
    Ok(())
}
