//! Extremal problems for linear functionals on the Bergman spaces `A^p`.
//!
//! A functional `φ(f) = ∫_D f·conj(g) dσ` with polynomial kernel `g` is
//! maximized over the unit sphere of the polynomial subspace `P_n ⊂ A^p`.
//! The crate provides:
//!
//! * [`poly`]: complex polynomials, derivative and the averaged antiderivative
//!   `G(z) = (1/z)∫₀^z g`;
//! * [`quadrature`]: disk and circle quadrature, `A^p` norms, integral means
//!   and `H^p` norms;
//! * [`functional`]: the kernel functional and its exact pairing;
//! * [`solver`]: the convex solver returning the norm-one extremal `f̂`, the
//!   value-one extremal `f̃` and the subspace norm `‖φ‖_n`;
//! * [`certify`]: the integral extremality residual, recovery of the norming
//!   functional from an extremal element, and the Hardy-space bound checks;
//! * [`lab`]: the experiment driver behind the `bergman-lab` binary.

pub mod certify;
mod error;
pub mod functional;
pub mod lab;
pub mod poly;
pub mod quadrature;
pub mod rng;
pub mod solver;


pub use certify::{
    extremality_residual, minkowski_check, recover_functional, ryabykh_check, BoundReport,
    Certificate, RecoveredFunctional,
};
pub use error::{Error, Result};
pub use functional::KernelFunctional;
pub use poly::Poly;
pub use quadrature::{
    ap_norm, hp_norm, integral_mean, make_disk_grid, CircleGrid, DiskGrid, Exponent, MeanOrder,
};
pub use solver::{
    init_p2, solve, solve_from, solve_multistart, solve_on_grid, ExtremalSolution, SolverOptions,
};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
