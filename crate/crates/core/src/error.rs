use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("n^k = {n}^{k} exceeds the element budget of {budget}")]
    BudgetExceeded { n: usize, k: usize, budget: u64 },

    #[error("no stabilizing Riccati solution: {0}")]
    NoStabilizingSolution(String),

    #[error("Riccati solution is indefinite (smallest eigenvalue {min_eig:e})")]
    IndefiniteSolution { min_eig: f64 },

    #[error("Riccati solution inaccurate: relative residual {residual:e}")]
    InaccurateSolution { residual: f64 },

    #[error("k-way Lyapunov system is nearly singular (min |eigenvalue sum| = {min_sum:e}, threshold {threshold:e})")]
    NearSingular { min_sum: f64, threshold: f64 },

    #[error("k-way solution has imaginary residue {residue:e} relative to its norm")]
    ImaginaryResidue { residue: f64 },

    #[error("Schur iteration did not converge")]
    NoConvergence,

    #[error("no real root for the energy derivative at s = {s}")]
    ComplexRoot { s: f64 },

    #[error("singular mass matrix")]
    SingularMass,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
