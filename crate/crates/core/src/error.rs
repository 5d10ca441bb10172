use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors surfaced by the simulation pipeline.
///
/// Variants are grouped by the stage that raises them so the CLI can map
/// configuration problems and numerical failures to distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("dressing failed: eigen-residual {residual:.3e} in manifold {manifold} exceeds {tolerance:.1e}")]
    Diagonalization {
        manifold: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("degenerate Bohr frequency between dressed states {upper} and {lower} (gap {gap:.3e})")]
    DegenerateTransition { upper: usize, lower: usize, gap: f64 },

    #[error("thermal occupation requested for non-positive gap {0}")]
    NonPositiveGap(f64),

    #[error("invalid Bloch correlation vector: eigenvalue {index} is {value:.6}")]
    NonPositiveBellState { index: usize, value: f64 },

    #[error("cannot embed atomic state: {0}")]
    Embed(String),

    #[error("vacuum projection probability {0:.3e} is too small to condition on")]
    VacuumProbability(f64),

    #[error("projected state is not X-shaped: off-X residual {residual:.3e}")]
    NotXState { residual: f64 },

    #[error("invalid X state: {0}")]
    InvalidXState(String),

    #[error("density matrix invariant violated at t = {time}: {detail}")]
    Invariant { time: f64, detail: String },

    #[error("integrator step size underflow at t = {time} (h = {step:.3e})")]
    StepUnderflow { time: f64, step: f64 },

    /// The message already includes the inner error, so it is not exposed
    /// as a `source` that reporters would print a second time.
    #[error("{stage}: {inner}")]
    Stage { stage: &'static str, inner: Box<Error> },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Wrap an error with the name of the pipeline stage that produced it.
    pub fn at(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            inner: Box::new(self),
        }
    }

    /// Whether the root cause is a configuration or input problem, as opposed
    /// to a numerical failure.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Stage { inner, .. } => inner.is_config(),
            Error::Config(_)
            | Error::UnknownPreset(_)
            | Error::NonPositiveBellState { .. }
            | Error::Embed(_)
            | Error::Parse(_)
            | Error::Io(_) => true,
            _ => false,
        }
    }
}
