use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the reduction toolkit can report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("shift {shift} is (numerically) an eigenvalue: sI - A has reciprocal condition estimate {rcond:.3e}")]
    SingularShift { shift: Complex64, rcond: f64 },

    #[error("spectra overlap: eigenvalue gap {gap:.3e} is below tolerance {tol:.3e}")]
    SpectraOverlap { gap: f64, tol: f64 },

    #[error("{what} is rank deficient: numerical rank {rank}, expected {expected}")]
    RankDeficient {
        what: String,
        rank: usize,
        expected: usize,
    },

    #[error("data is not closed under complex conjugation: {0}")]
    NotConjugateSymmetric(String),

    #[error("no left null space: Pi has full row rank (nu = n = {0})")]
    NoLeftNullspace(usize),

    #[error("prescribed pole {0} is repeated")]
    DuplicatePole(Complex64),

    #[error("prescribed pole {pole} coincides with interpolation point {point}")]
    PoleCoincidesWithPoint { pole: Complex64, point: Complex64 },

    #[error("prescribed zero {zero} coincides with interpolation point {point}")]
    ZeroCoincidesWithPoint { zero: Complex64, point: Complex64 },

    #[error("zero-placement row for z = {0} is numerically zero (all moments vanish)")]
    DegenerateRow(Complex64),

    #[error("constraint system is singular (condition number {cond:.3e})")]
    SingularSystem { cond: f64 },

    #[error("constraint count l + k + mu = {rows} does not equal the order nu = {order}; enable least-norm mode to accept it")]
    NonSquare { rows: usize, order: usize },

    #[error("invalid family member: sigma(S - GL) meets sigma(S) (gap {gap:.3e}); try perturbing the interpolation points")]
    FamilyInvalid { gap: f64 },

    #[error("left point {left} coincides with right point {right} in an off-diagonal Loewner cell")]
    CoincidentPoints { left: Complex64, right: Complex64 },

    #[error("no derivative sample available at {0}")]
    MissingDerivative(Complex64),

    #[error("no value sample available at {0}")]
    MissingSample(Complex64),

    #[error("Loewner matrix is singular (condition number {cond:.3e})")]
    SingularLoewner { cond: f64 },

    #[error("s = {0} is an eigenvalue of the Loewner pencil")]
    SingularPencil(Complex64),

    #[error("coordinate transformation is singular")]
    SingularTransform,

    #[error("input system is not asymptotically stable")]
    UnstableInput,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
