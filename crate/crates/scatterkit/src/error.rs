use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition (e.g. mismatched vector
    /// lengths or a negative noise level).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Invalid configuration value (e.g. `L_alpha` above the numerical rank).
    #[error("configuration error: {0}")]
    Config(String),

    /// The Krylov state solve did not reach the requested residual.
    #[error("iterative solver failed to converge: relative residual {residual:.3e} after {iters} iterations")]
    SolverFailure { residual: f64, iters: usize },

    /// Unreadable or unsupported input file (PGM phantoms).
    #[error("input error: {0}")]
    Input(String),
}
