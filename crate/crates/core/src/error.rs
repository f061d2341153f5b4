use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Newton iteration for the mean fields did not converge.
    #[error("steady-state solver did not converge after {iterations} iterations (last residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    /// The linearized fluctuation dynamics around the mean fields are unstable.
    #[error("unstable steady state: largest drift eigenvalue real part {max_real_eigenvalue:.3e}")]
    Unstable { max_real_eigenvalue: f64 },

    /// |D(ω)| fell below the underflow threshold; the response is singular.
    #[error("singular linear response at omega = {omega}: |D| = {magnitude:.3e}")]
    SingularResponse { omega: f64, magnitude: f64 },

    /// Adaptive quadrature could not reach its error target.
    #[error("quadrature failed to reach tolerance: estimated error {error:.3e} > target {target:.3e} after {panels} panels")]
    Integration {
        error: f64,
        target: f64,
        panels: usize,
    },

    /// The Liouvillian would exceed the configured memory budget.
    #[error("Liouvillian needs about {required} bytes, above the budget of {budget} bytes")]
    Resource { required: usize, budget: usize },

    /// Sparse factorization or the steady-state solve failed.
    #[error("master-equation solve failed: {reason} (residual history {history:?})")]
    LinearSolve { reason: String, history: Vec<f64> },

    /// Correlation ratio with a vanishing denominator (vacuum state).
    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
