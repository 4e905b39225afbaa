//! Extremal problems over the polynomial subspace `P_n ⊂ A^p`.
//!
//! The value-one problem `min ‖f‖_{A^p}` subject to `φ(f) = 1` is solved as
//! the smooth convex program
//!
//! ```text
//!     minimize Φ(c) = Σ_i w_i |f_c(z_i)|^p    subject to  φ(f_c) = 1
//! ```
//!
//! on the disk grid. The affine constraint is removed by writing
//! `f = f₀ + Σ_j x_j b_j`, where `f₀` is the `p = 2` solution and `{b_j}` is an
//! `A²`-orthonormal basis of the kernel-orthogonal complement
//! `{h ∈ P_n : φ(h) = 0}`; each complex coordinate is split into real and
//! imaginary parts. The reduced problem is minimized by BFGS-accelerated
//! descent with Armijo backtracking. The norm-one extremal and the subspace
//! norm follow from `f̂ = f̃/‖f̃‖` and `‖φ‖_n = 1/‖f̃‖`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::quadrature::{ap_norm, make_disk_grid, DiskGrid};
use crate::{Error, KernelFunctional, Poly, Result, C64};

/// Armijo sufficient-decrease constant.
const ARMIJO_C1: f64 = 1e-4;
const BACKTRACK_FACTOR: f64 = 0.5;
const MAX_BACKTRACKS: usize = 80;
/// Relative change of Φ below which function values carry no information and
/// a step is accepted on gradient decrease instead.
const ROUNDOFF_BAND: f64 = 64.0 * f64::EPSILON;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Termination threshold on the Euclidean norm of the reduced gradient.
    pub grad_tol: f64,
    pub max_iters: usize,
    /// Number of starts; the first is always the `p = 2` warm start, the rest
    /// are random admissible points drawn from `seed`.
    pub multistart_count: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            grad_tol: 1e-10,
            max_iters: 10_000,
            multistart_count: 1,
            seed: 0,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) {
            return Err(Error::InvalidOptions("grad_tol must be positive"));
        }
        if self.max_iters < 1 {
            return Err(Error::InvalidOptions("max_iters must be at least 1"));
        }
        if self.multistart_count < 1 {
            return Err(Error::InvalidOptions("multistart_count must be at least 1"));
        }
        Ok(())
    }
}

/// Solution of both extremal problems over `P_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalSolution {
    pub degree: usize,
    /// `‖φ‖_n = Re φ(f̂) = 1/‖f̃‖`.
    pub phi_norm_n: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    /// Norm-one extremal `f̂`.
    pub f_hat: Poly,
    /// Value-one extremal `f̃`, `φ(f̃) = 1`.
    pub f_star: Poly,
}

/// `g_n/‖g_n‖²_{A²}`: the value-one extremal for `p = 2` over `P_n`.
pub fn init_p2(phi: &KernelFunctional, n: usize) -> Result<Poly> {
    let g_n = phi.kernel().truncate(n);
    if g_n.is_zero() {
        return Err(Error::NoAdmissiblePoint { degree: n });
    }
    let norm_sq = a2_inner(g_n.coeffs(), g_n.coeffs()).re;
    Ok(&g_n * (1.0 / norm_sq))
}

/// Solves over `P_n` on the grid built for degree `n` and the functional's
/// exponent.
pub fn solve(phi: &KernelFunctional, n: usize, opts: &SolverOptions) -> Result<ExtremalSolution> {
    let grid = make_disk_grid(n, phi.exponent());
    solve_on_grid(phi, n, &grid, opts)
}

/// Same as [`solve`] on a caller-supplied grid (which must resolve degree `n`).
pub fn solve_on_grid(
    phi: &KernelFunctional,
    n: usize,
    grid: &DiskGrid,
    opts: &SolverOptions,
) -> Result<ExtremalSolution> {
    let runs = solve_multistart(phi, n, grid, opts)?;
    let mut best: Option<ExtremalSolution> = None;
    for run in runs {
        let run = run?;
        if best.as_ref().is_none_or(|b| run.phi_norm_n > b.phi_norm_n) {
            best = Some(run);
        }
    }
    Ok(best.expect("multistart_count ≥ 1"))
}

/// Solves over `P_n` starting from `start` instead of the `p = 2` point.
///
/// `start` is truncated to degree `n` and rescaled onto `φ(f) = 1`; a start
/// on which `φ` vanishes falls back to the warm start. Used for degree
/// sweeps, where the previous degree's solution is an excellent guess.
pub fn solve_from(
    phi: &KernelFunctional,
    n: usize,
    grid: &DiskGrid,
    start: &Poly,
    opts: &SolverOptions,
) -> Result<ExtremalSolution> {
    opts.validate()?;
    let problem = ReducedProblem::new(phi, n, grid)?;
    let start = start.truncate(n);
    let value = phi.apply(&start);
    let x0 = if value.norm() > 1e-12 {
        problem.coordinates_of(&(&start * (1.0 / value)).padded(n + 1))
    } else {
        DVector::zeros(problem.dim())
    };
    problem.minimize(x0, opts)
}

/// One result per start, in start order: the warm start first, then
/// `multistart_count − 1` random admissible starts.
pub fn solve_multistart(
    phi: &KernelFunctional,
    n: usize,
    grid: &DiskGrid,
    opts: &SolverOptions,
) -> Result<Vec<Result<ExtremalSolution>>> {
    opts.validate()?;
    let problem = ReducedProblem::new(phi, n, grid)?;
    let dim = problem.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut runs = Vec::with_capacity(opts.multistart_count);
    for start in 0..opts.multistart_count {
        let x0 = if start == 0 {
            DVector::zeros(dim)
        } else {
            DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0))
        };
        runs.push(problem.minimize(x0, opts));
    }
    Ok(runs)
}

fn a2_inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(k, (x, y))| x * y.conj() / (k + 1) as f64)
        .sum()
}

/// The objective restricted to the affine constraint set, in real coordinates.
///
/// Node values and dual moments are computed ring by ring with a length-`M`
/// DFT, `M` being the angular count of the grid.
struct ReducedProblem<'a> {
    grid: &'a DiskGrid,
    p: f64,
    degree: usize,
    base: Vec<C64>,
    basis: Vec<Vec<C64>>,
    /// `r_i^k` for every ring `i` and `k ≤ n`.
    ring_powers: Vec<Vec<f64>>,
    dft: Arc<dyn Fft<f64>>,
}

struct Evaluation {
    value: f64,
    grad: DVector<f64>,
}

impl<'a> ReducedProblem<'a> {
    fn new(phi: &KernelFunctional, n: usize, grid: &'a DiskGrid) -> Result<Self> {
        let base = init_p2(phi, n)?.padded(n + 1);
        let g_n = phi.kernel().truncate(n).padded(n + 1);
        let basis = orthogonal_complement(&g_n);
        debug_assert_eq!(basis.len(), n);
        let ring_powers = grid
            .radial_nodes()
            .iter()
            .map(|&r| {
                std::iter::successors(Some(1.0), |x| Some(x * r))
                    .take(n + 1)
                    .collect()
            })
            .collect();
        let dft = FftPlanner::new().plan_fft_inverse(grid.angular_count());
        Ok(Self {
            grid,
            p: phi.exponent().p(),
            degree: n,
            base,
            basis,
            ring_powers,
            dft,
        })
    }

    fn dim(&self) -> usize {
        2 * self.basis.len()
    }

    fn coefficient_vec(&self, x: &DVector<f64>) -> Vec<C64> {
        let mut c = self.base.clone();
        for (j, b) in self.basis.iter().enumerate() {
            let a = C64::new(x[2 * j], x[2 * j + 1]);
            for (ck, bk) in c.iter_mut().zip(b) {
                *ck += a * bk;
            }
        }
        c
    }

    fn evaluate(&self, x: &DVector<f64>) -> Evaluation {
        let p = self.p;
        let m = self.grid.angular_count();
        let n = self.degree;
        let coeffs = self.coefficient_vec(x);
        let mut buf = vec![C64::new(0.0, 0.0); m];
        let mut scratch = vec![C64::new(0.0, 0.0); self.dft.get_inplace_scratch_len()];
        let mut moments = vec![C64::new(0.0, 0.0); n + 1];
        let mut value = 0.0;

        for (powers, &w) in self.ring_powers.iter().zip(self.grid.radial_weights()) {
            // f(r e^{2πij/M}) = Σ_k c_k r^k e^{2πijk/M}
            buf.fill(C64::new(0.0, 0.0));
            for (k, (c, rk)) in coeffs.iter().zip(powers).enumerate() {
                buf[k % m] += c * rk;
            }
            self.dft.process_with_scratch(&mut buf, &mut scratch);
            let node_weight = w / m as f64;
            let mut ring_value = 0.0;
            for f in buf.iter_mut() {
                let modulus = f.norm();
                if modulus == 0.0 {
                    *f = C64::new(0.0, 0.0);
                    continue;
                }
                let m_pm1 = pow_abs(modulus, p - 1.0);
                ring_value += m_pm1 * modulus;
                // w |f|^{p-1} conj(sgn f), with sgn 0 = 0
                *f = f.conj() * (node_weight * m_pm1 / modulus);
            }
            value += node_weight * ring_value;
            // Σ_j u_j (r e^{iθ_j})^k
            self.dft.process_with_scratch(&mut buf, &mut scratch);
            for (k, (mk, rk)) in moments.iter_mut().zip(powers).enumerate() {
                *mk += buf[k % m] * rk;
            }
        }

        let mut grad = DVector::zeros(self.dim());
        for (j, b) in self.basis.iter().enumerate() {
            let d: C64 = b.iter().zip(&moments).map(|(bk, mk)| bk * mk).sum();
            grad[2 * j] = p * d.re;
            grad[2 * j + 1] = -p * d.im;
        }
        Evaluation { value, grad }
    }

    fn coefficients(&self, x: &DVector<f64>) -> Poly {
        Poly::new(self.coefficient_vec(x))
    }

    /// Reduced coordinates of an admissible `f` (one with `φ(f) = 1`).
    fn coordinates_of(&self, f: &[C64]) -> DVector<f64> {
        let diff: Vec<C64> = f.iter().zip(&self.base).map(|(a, b)| a - b).collect();
        let mut x = DVector::zeros(self.dim());
        for (j, b) in self.basis.iter().enumerate() {
            let c = a2_inner(&diff, b);
            x[2 * j] = c.re;
            x[2 * j + 1] = c.im;
        }
        x
    }

    fn minimize(&self, mut x: DVector<f64>, opts: &SolverOptions) -> Result<ExtremalSolution> {
        let dim = self.dim();
        let mut current = self.evaluate(&x);
        let mut h_inv = DMatrix::<f64>::identity(dim, dim);
        let mut fresh_metric = true;
        let mut iterations = 0;
        let mut converged = current.grad.norm() <= opts.grad_tol;

        while !converged && iterations < opts.max_iters {
            iterations += 1;
            let g = &current.grad;
            let mut dir = -(&h_inv * g);
            let mut slope = g.dot(&dir);
            if !(slope < 0.0) {
                h_inv.fill_with_identity();
                fresh_metric = true;
                dir = -g.clone();
                slope = g.dot(&dir);
            }
            let mut step = if fresh_metric {
                (1.0 / g.norm()).min(1.0)
            } else {
                1.0
            };

            let mut accepted = None;
            for _ in 0..MAX_BACKTRACKS {
                let trial_x = &x + &dir * step;
                let trial = self.evaluate(&trial_x);
                let armijo = trial.value <= current.value + ARMIJO_C1 * step * slope;
                let flat = (trial.value - current.value).abs()
                    <= ROUNDOFF_BAND * current.value.abs().max(f64::MIN_POSITIVE)
                    && trial.grad.norm() < g.norm();
                if trial.value.is_finite() && (armijo || flat) {
                    accepted = Some((trial_x, trial));
                    break;
                }
                step *= BACKTRACK_FACTOR;
            }

            let Some((next_x, next)) = accepted else {
                if fresh_metric {
                    // steepest descent with the finest step made no progress
                    break;
                }
                h_inv.fill_with_identity();
                fresh_metric = true;
                continue;
            };

            let s = &next_x - &x;
            let y = &next.grad - &current.grad;
            let sy = s.dot(&y);
            if sy > 1e-12 * s.norm() * y.norm() && sy > 0.0 {
                if fresh_metric {
                    h_inv *= sy / y.dot(&y);
                }
                bfgs_update(&mut h_inv, &s, &y, sy);
                fresh_metric = false;
            }
            x = next_x;
            current = next;
            converged = current.grad.norm() <= opts.grad_tol;
        }

        let f_star = self.coefficients(&x);
        let star_norm = ap_norm(&f_star, exponent_of(self.p), self.grid);
        let phi_norm_n = 1.0 / star_norm;
        let solution = ExtremalSolution {
            degree: self.degree,
            phi_norm_n,
            grad_norm: current.grad.norm(),
            iterations,
            f_hat: &f_star * phi_norm_n,
            f_star,
        };
        if converged {
            Ok(solution)
        } else {
            Err(Error::NotConverged(Box::new(solution)))
        }
    }
}

/// `x^e` for `x > 0`, avoiding `powf` for small integer and half-integer `e`.
fn pow_abs(x: f64, e: f64) -> f64 {
    if e.fract() == 0.0 && e.abs() <= 16.0 {
        x.powi(e as i32)
    } else if (2.0 * e).fract() == 0.0 && e.abs() <= 16.0 {
        x.powi(e.floor() as i32) * x.sqrt()
    } else {
        x.powf(e)
    }
}

fn exponent_of(p: f64) -> crate::Exponent {
    crate::Exponent::new(p).expect("validated by KernelFunctional")
}

/// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ` with `ρ = 1/(yᵀs)`.
fn bfgs_update(h: &mut DMatrix<f64>, s: &DVector<f64>, y: &DVector<f64>, sy: f64) {
    let rho = 1.0 / sy;
    let hy = &*h * y;
    let yhy = y.dot(&hy);
    // expanded form of the product update
    h.ger(-rho, &hy, s, 1.0);
    h.ger(-rho, s, &hy, 1.0);
    h.ger(rho * rho * yhy + rho, s, s, 1.0);
}

/// `A²`-orthonormal basis of `{c : ⟨c, g⟩_{A²} = 0}` in `C^{n+1}`, where
/// `n + 1 = g.len()`.
fn orthogonal_complement(g: &[C64]) -> Vec<Vec<C64>> {
    let len = g.len();
    let norm = |v: &[C64]| a2_inner(v, v).re.sqrt();
    let mut frame: Vec<Vec<C64>> = Vec::with_capacity(len);
    let g_norm = norm(g);
    frame.push(g.iter().map(|c| c / g_norm).collect());
    for k in 0..len {
        if frame.len() == len {
            break;
        }
        let mut v = vec![C64::new(0.0, 0.0); len];
        v[k] = C64::new(1.0, 0.0);
        let start = norm(&v);
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for q in &frame {
                let c = a2_inner(&v, q);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
        }
        let r = norm(&v);
        if r > 1e-6 * start {
            frame.push(v.into_iter().map(|c| c / r).collect());
        }
    }
    frame.remove(0);
    frame
}
