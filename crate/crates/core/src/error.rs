use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate point: |d| = {norm:.3e} at k = ({kx}, {ky}), m = {m}")]
    DegeneratePoint { kx: f64, ky: f64, m: f64, norm: f64 },

    #[error("critical parameter m = {0}: the spectrum is gapless and the Chern number undefined")]
    CriticalParameter(f64),

    #[error("ramp crosses {0} phase boundaries; closed-form helpers only support a single crossing")]
    UnsupportedMultiCrossing(usize),

    #[error("integrator diverged at t = {t}: {reason}")]
    IntegratorDiverged { t: f64, reason: String },

    #[error("mixed state in a pure-state routine (purity {purity})")]
    MixedStateInput { purity: f64 },

    #[error("overlap {overlap:.3e} between neighbouring loop states is too small; refine the grid")]
    VanishingOverlap { overlap: f64 },

    #[error("ambiguous winding: residual {residual:.3} exceeds threshold")]
    AmbiguousWinding { residual: f64 },

    #[error("holonomy trace vanishes (|Tr M| = {0:.3e}); the Uhlmann phase is undefined")]
    ZeroTrace(f64),

    #[error("amplitude spectrum is gapless (min gap {gap:.3e}); the spectrum index is undefined")]
    GaplessSpectrum { gap: f64 },

    #[error("planar angle undefined at k_y = {ky}, m_f = {m_f}")]
    UndefinedAngle { ky: f64, m_f: f64 },

    #[error("singular denominator in planar-angle derivative at k_y = {ky}, m_f = {m_f}")]
    SingularDenominator { ky: f64, m_f: f64 },

    #[error("quantized phase undefined: cos = {0:.3e}")]
    UndefinedPhase(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
