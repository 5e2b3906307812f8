use num_complex::Complex64;
use thiserror::Error;

/// A converged root reported when no stable steady state could be selected.
#[derive(Debug, Clone)]
pub struct RootReport {
    pub state: Vec<f64>,
    pub eigenvalues: Vec<Complex64>,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("no seed converged (best residual {best_residual:.3e})")]
    NoConvergence { best_residual: f64 },

    #[error("no stable root among {} converged roots: {}", roots.len(), describe_roots(roots))]
    NoStableRoot { roots: Vec<RootReport> },

    #[error("step size underflow at t = {t:.6e}; stiff component `{component}`")]
    StepUnderflow { t: f64, component: &'static str },

    #[error("steady state is not stable; regression dynamics undefined")]
    UnstableSteadyState,

    #[error(
        "regression matrix is near-defective (eigenvalue gap {gap:.3e}); use the FFT spectrum path"
    )]
    NearDefective { gap: f64 },

    #[error("no emission (g(0) = {flux:.3e}); the spectrum is undefined")]
    NoEmission { flux: f64 },

    #[error("photon flux {value:.3e} is negative beyond tolerance")]
    NegativeFlux { value: f64 },

    #[error("operator space dimension {dim} exceeds the dense limit {limit}")]
    DimensionOverflow { dim: usize, limit: usize },

    #[error("steady state is not unique; two smallest Liouvillian eigenvalues {0} and {1}")]
    DegenerateNullSpace(Complex64, Complex64),

    #[error("density matrix invariant violated: {0}")]
    InvariantViolation(String),

    #[error("exchange symmetry violated: {0}")]
    SymmetryViolation(String),

    #[error("photon truncation too small: top Fock levels hold population {population:.3e}")]
    TruncationTooSmall { population: f64 },

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("unknown {what} `{name}`")]
    Unknown { what: &'static str, name: String },

    #[error("at w = {w}, δ = {delta}: {source}")]
    PointFailed {
        w: f64,
        delta: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("cannot resume: {0}")]
    ResumeMismatch(String),

    #[error("thread pool: {0}")]
    ThreadPool(String),

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

fn describe_roots(roots: &[RootReport]) -> String {
    roots
        .iter()
        .map(|r| {
            let max_re = r
                .eigenvalues
                .iter()
                .map(|e| e.re)
                .fold(f64::NEG_INFINITY, f64::max);
            format!("{:?} (max Re λ = {:.3e})", r.state, max_re)
        })
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
