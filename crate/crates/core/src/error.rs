use thiserror::Error;

/// Errors produced by matrix construction, sampling and the analytic laws.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix dimension must be at least 1")]
    EmptyMatrix,

    #[error("not hermitian: max |H[i][j] - conj(H[j][i])| = {0:.3e} exceeds 1e-12")]
    NotHermitian(f64),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("trace must be 1 within 1e-12, got {0}")]
    InvalidTrace(f64),

    #[error("not positive semidefinite: min eigenvalue {0:.3e}")]
    NotPositiveSemidefinite(f64),

    #[error("bloch vector norm {0} exceeds 1/2: density matrix would not be positive")]
    BlochVectorTooLong(f64),

    #[error("eigensolver did not converge within {sweeps} sweeps")]
    EigenSolverDidNotConverge { sweeps: usize },

    #[error("invalid error-model constants c1 = {c1}, c2 = {c2}: need c1 > 0 and c2 >= 0")]
    InvalidModelConstants { c1: f64, c2: f64 },

    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("spectrum entries must be pairwise distinct: min gap {0:.3e}")]
    DegenerateSpectrum(f64),

    #[error("eigenvalue arguments must be pairwise distinct: min gap {0:.3e}")]
    DegenerateArguments(f64),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("normalization constant must be positive, got {0}")]
    NonPositiveNormalization(f64),

    #[error("exponent magnitude {0:.2} exceeds the overflow guard {1}")]
    ExponentGuard(f64, f64),

    #[error("fraction {0:.2e} of samples falls outside the tabulated grid")]
    SamplesOutOfRange(f64),

    #[error("need at least {need} samples, got {got}")]
    NotEnoughSamples { got: usize, need: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
