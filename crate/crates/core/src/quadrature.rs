//! Quadrature over the unit disk (normalized area measure `σ = dA/π`) and
//! over circles `|z| = r`.
//!
//! The disk rule is a tensor product: Gauss–Legendre in `t = r²` on `[0, 1]`
//! times the trapezoidal rule in the angle. With `dσ = dt·dθ/2π` the rule
//! integrates `z^a·conj(z)^b` exactly as long as `a, b` stay inside
//! [`DiskGrid::exactness_degree`], and for even integer `p` the integrand
//! `|f|^p` of a polynomial of the design degree is integrated exactly.

use std::f64::consts::{PI, TAU};

use crate::{Error, Poly, Result, C64};

/// A conjugate pair `(p, q)` with `1/p + 1/q = 1` and `1 < p < ∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponent {
    p: f64,
    q: f64,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidExponent(p));
        }
        let q = if p == 2.0 { 2.0 } else { p / (p - 1.0) };
        if !q.is_finite() {
            return Err(Error::InvalidExponent(p));
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// The pair with roles swapped, `(q, p)`.
    pub fn conjugate(&self) -> Self {
        Self {
            p: self.q,
            q: self.p,
        }
    }

    /// `Some(k)` when `p = 2k` for an integer `k ≥ 1`.
    pub fn even_half(&self) -> Option<usize> {
        let half = self.p / 2.0;
        (half.fract() == 0.0).then_some(half as usize)
    }
}

/// Order of an integral mean: finite `p > 0` or the sup-norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeanOrder {
    Finite(f64),
    Infinity,
}

impl From<Exponent> for MeanOrder {
    fn from(e: Exponent) -> Self {
        MeanOrder::Finite(e.p())
    }
}

impl From<f64> for MeanOrder {
    fn from(p: f64) -> Self {
        if p.is_infinite() {
            MeanOrder::Infinity
        } else {
            MeanOrder::Finite(p)
        }
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`, ascending.
///
/// Newton iteration on `P_m` from Chebyshev-type initial guesses.
pub fn gauss_legendre_unit(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let dp = legendre_with_derivative(m, x).1;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x runs from +1 down to -1
        nodes[m - 1 - i] = 0.5 * (1.0 + x);
        weights[m - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor-product rule for `∫_D · dσ`.
#[derive(Clone, Debug)]
pub struct DiskGrid {
    radial_nodes: Vec<f64>,
    radial_weights: Vec<f64>,
    angular_count: usize,
    nodes: Vec<C64>,
    weights: Vec<f64>,
}

/// Radial node count for exponents without an exact rule.
pub fn default_radial_count(max_poly_degree: usize) -> usize {
    6 * (max_poly_degree + 4)
}

/// Angular floor for exponents without an exact rule. Near a zero of `f` the
/// integrand `|f|^p` is only Hölder continuous, and this floor keeps the
/// trapezoid error there below `1e-7`.
pub const MIN_ANGULAR_NON_EVEN: usize = 384;

/// Angular floor for even exponents, where the rule is exact anyway.
pub const MIN_ANGULAR_EVEN: usize = 64;

/// Grid for integrating `|f|^p` with `deg f ≤ max_poly_degree`.
///
/// For even `p` the radial count makes the rule exact; otherwise the fixed
/// default [`default_radial_count`] is used. The angular count is at least
/// `ceil(p)·max_poly_degree + 1` and at least 64 (384 for non-even `p`).
pub fn make_disk_grid(max_poly_degree: usize, p: Exponent) -> DiskGrid {
    let n = max_poly_degree;
    let (radial, floor) = match p.even_half() {
        // |f|^{2k} averaged over angles is a polynomial of degree n·k in t;
        // also cover the moments t^n of z^a conj(z)^a.
        Some(k) => (((n * k + 2) / 2).max(n / 2 + 1), MIN_ANGULAR_EVEN),
        None => (default_radial_count(n), MIN_ANGULAR_NON_EVEN),
    };
    let angular = (p.p().ceil() as usize * n + 1).max(floor);
    DiskGrid::with_counts(radial, angular)
}

impl DiskGrid {
    pub fn with_counts(radial_count: usize, angular_count: usize) -> Self {
        assert!(radial_count >= 1 && angular_count >= 1);
        let (t, w) = gauss_legendre_unit(radial_count);
        let radial_nodes: Vec<f64> = t.iter().map(|t| t.sqrt()).collect();
        let rotations = unit_roots(angular_count);
        let mut nodes = Vec::with_capacity(radial_count * angular_count);
        let mut weights = Vec::with_capacity(radial_count * angular_count);
        for (&r, &wr) in radial_nodes.iter().zip(&w) {
            for &e in &rotations {
                nodes.push(e * r);
                weights.push(wr / angular_count as f64);
            }
        }
        Self {
            radial_nodes,
            radial_weights: w,
            angular_count,
            nodes,
            weights,
        }
    }

    pub fn radial_nodes(&self) -> &[f64] {
        &self.radial_nodes
    }

    pub fn radial_weights(&self) -> &[f64] {
        &self.radial_weights
    }

    pub fn radial_count(&self) -> usize {
        self.radial_nodes.len()
    }

    pub fn angular_count(&self) -> usize {
        self.angular_count
    }

    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Largest `d` with `∫ z^a conj(z)^b dσ` exact for all `a, b ≤ d`.
    pub fn exactness_degree(&self) -> usize {
        (2 * self.radial_count() - 1).min(self.angular_count - 1)
    }

    /// Same grid with both counts doubled.
    pub fn refined(&self) -> Self {
        Self::with_counts(2 * self.radial_count(), 2 * self.angular_count)
    }

    pub fn integrate<F: Fn(C64) -> C64>(&self, f: F) -> C64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| f(z) * w)
            .sum()
    }

    pub fn integrate_real<F: Fn(C64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| f(z) * w)
            .sum()
    }

    /// Values of `f` at every node, in node order.
    pub fn sample(&self, f: &Poly) -> Vec<C64> {
        self.nodes.iter().map(|&z| f.eval(z)).collect()
    }
}

fn unit_roots(count: usize) -> Vec<C64> {
    (0..count)
        .map(|j| C64::from_polar(1.0, TAU * j as f64 / count as f64))
        .collect()
}

/// Trapezoidal rule on the circle `|z| = radius`.
#[derive(Clone, Debug)]
pub struct CircleGrid {
    radius: f64,
    nodes: Vec<C64>,
}

/// Floor for automatically chosen circle resolutions.
pub const MIN_CIRCLE_NODES: usize = 1024;

impl CircleGrid {
    pub fn new(radius: f64, angular_count: usize) -> Result<Self> {
        if !(radius > 0.0 && radius <= 1.0) {
            return Err(Error::InvalidRadius(radius));
        }
        assert!(angular_count >= 1);
        let nodes = unit_roots(angular_count)
            .into_iter()
            .map(|e| e * radius)
            .collect();
        Ok(Self { radius, nodes })
    }

    /// Resolution `max(ceil(p)·degree + 1, MIN_CIRCLE_NODES)`.
    pub fn for_degree(radius: f64, degree: usize, order: MeanOrder) -> Result<Self> {
        let factor = match order {
            MeanOrder::Finite(p) => p.ceil().max(1.0) as usize,
            MeanOrder::Infinity => 8,
        };
        Self::new(radius, (factor * degree + 1).max(MIN_CIRCLE_NODES))
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn angular_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    /// `(1/2π)∫₀^{2π} F(r e^{iθ}) dθ`.
    pub fn average<F: Fn(C64) -> C64>(&self, f: F) -> C64 {
        let sum: C64 = self.nodes.iter().map(|&z| f(z)).sum();
        sum / self.nodes.len() as f64
    }

    pub fn mean(&self, f: &Poly, order: MeanOrder) -> f64 {
        match order {
            MeanOrder::Infinity => self
                .nodes
                .iter()
                .map(|&z| f.eval(z).norm())
                .fold(0.0, f64::max),
            MeanOrder::Finite(p) => {
                let s: f64 = self.nodes.iter().map(|&z| f.eval(z).norm().powf(p)).sum();
                (s / self.nodes.len() as f64).powf(1.0 / p)
            }
        }
    }
}

/// `‖f‖_{A^p} = (∫_D |f|^p dσ)^{1/p}` on the given grid.
pub fn ap_norm(f: &Poly, p: Exponent, grid: &DiskGrid) -> f64 {
    lp_norm_on_grid(f, p.p(), grid)
}

pub(crate) fn lp_norm_on_grid(f: &Poly, p: f64, grid: &DiskGrid) -> f64 {
    grid.integrate_real(|z| f.eval(z).norm().powf(p))
        .powf(1.0 / p)
}

/// Integral mean `M_p(f, r)`; `MeanOrder::Infinity` gives the max over nodes.
pub fn integral_mean(f: &Poly, order: impl Into<MeanOrder>, r: f64) -> Result<f64> {
    let order = order.into();
    if let MeanOrder::Finite(p) = order {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::InvalidExponent(p));
        }
    }
    let grid = CircleGrid::for_degree(r, f.degree().unwrap_or(0), order)?;
    Ok(grid.mean(f, order))
}

/// `‖f‖_{H^p}`; for a polynomial the supremum of the means is `M_p(f, 1)`.
pub fn hp_norm(f: &Poly, p: Exponent) -> f64 {
    integral_mean(f, p, 1.0).expect("unit radius and p > 1 are always valid")
}
