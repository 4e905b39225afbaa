use thiserror::Error;

use crate::solver::ExtremalSolution;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("exponent p = {0} outside (1, ∞)")]
    InvalidExponent(f64),

    #[error("radius r = {0} outside (0, 1]")]
    InvalidRadius(f64),

    #[error("invalid solver options: {0}")]
    InvalidOptions(&'static str),

    #[error("kernel must be a nonzero polynomial")]
    ZeroKernel,

    #[error("element must be a nonzero polynomial")]
    ZeroElement,

    /// The kernel truncated to degree `degree` vanishes, so `φ ≡ 0` on `P_n`
    /// and the constraint `φ(f) = 1` has no solution.
    #[error("no admissible point: kernel truncated to degree {degree} is zero")]
    NoAdmissiblePoint { degree: usize },

    /// Iteration budget exhausted; the last iterate is returned for inspection.
    #[error(
        "solver did not converge at degree {}: gradient norm {:.3e} after {} iterations",
        .0.degree, .0.grad_norm, .0.iterations
    )]
    NotConverged(Box<ExtremalSolution>),
}
