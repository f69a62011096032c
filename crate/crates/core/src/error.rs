use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    /// A tip geometry with zero tip-spin distance or coincident tips.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// A parameter violated a constructor invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// B0 = 0 leaves the spin frequency, and hence the unit convention, undefined.
    #[error("zero static field: spin frequency omega_0 is undefined")]
    ZeroSpinFrequency,

    /// The susceptibility prefactor is undefined without a probe drive.
    #[error("zero probe drive: susceptibility prefactor is undefined")]
    ZeroDrive,

    /// An undamped denominator vanished exactly at the requested frequency.
    #[error("response singular at omega = {omega}")]
    Singularity { omega: f64 },

    /// 1 + chi = 0: the refractive index hits its branch point.
    #[error("branch point: 1 + chi = 0")]
    BranchPoint,

    /// The group index n + Omega dn/dOmega vanished.
    #[error("divergent group index at omega = {omega}")]
    DivergentGroupIndex { omega: f64 },

    /// A stated precondition of an operation was not met.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The time-domain integration diverged.
    #[error("time-domain integration diverged at t = {t}")]
    Diverged { t: f64 },

    /// The requested Hilbert-space dimension exceeds the dense-solver budget.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// Configuration parsing or validation failure.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
