//! The six experiment kinds.

use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use super::record::GridSize;
use super::{
    ExperimentConfig, Kind, RunRecord, CERTIFICATE_TOL, CONVERGENCE_THRESHOLD, DISTANCE_SLACK,
    MONOTONE_SLACK, RYABYKH_TOL, SMALL_EPSILON,
};
use crate::certify::{extremality_residual, recover_functional, ryabykh_check, RecoveredFunctional};
use crate::quadrature::{ap_norm, make_disk_grid, DiskGrid, Exponent};
use crate::solver::{solve_from, solve_on_grid};
use crate::{Error, ExtremalSolution, KernelFunctional, Poly, Result, SolverOptions, C64};

/// Dispatches on `cfg.kind`.
pub fn run(cfg: &ExperimentConfig) -> RunRecord {
    match cfg.kind {
        Kind::Solve => run_solve(cfg),
        Kind::Converge => run_converge(cfg),
        Kind::PerturbFunctional => run_perturb_functional(cfg),
        Kind::PerturbElement => run_perturb_element(cfg),
        Kind::Ryabykh => run_ryabykh(cfg),
        Kind::Certify => run_certify(cfg),
    }
}

fn options(cfg: &ExperimentConfig) -> SolverOptions {
    SolverOptions {
        multistart_count: cfg.multistart,
        seed: cfg.seed,
        ..SolverOptions::default()
    }
}

fn functional(cfg: &ExperimentConfig) -> KernelFunctional {
    KernelFunctional::new(cfg.kernel.clone(), cfg.exponent()).expect("validated kernel")
}

fn columns(cfg: &ExperimentConfig, base: &[&'static str]) -> Vec<&'static str> {
    let mut c = base.to_vec();
    c.push("error");
    if cfg.timing {
        c.push("wall_time");
    }
    c
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

fn finish_row(cfg: &ExperimentConfig, mut row: Map<String, Value>, seconds: f64) -> Map<String, Value> {
    if cfg.timing {
        row.insert("wall_time".into(), json!(seconds));
    }
    row
}

fn solution_fields(row: &mut Map<String, Value>, sol: &ExtremalSolution) {
    row.insert("phi_norm_n".into(), json!(sol.phi_norm_n));
    row.insert("grad_norm".into(), json!(sol.grad_norm));
    row.insert("iterations".into(), json!(sol.iterations));
}

fn pairs(v: &[C64]) -> Value {
    json!(v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>())
}

fn degree_case(n: usize) -> Value {
    json!({ "degree": n })
}

fn epsilon_case(eps: f64) -> Value {
    json!({ "epsilon": eps })
}

/// `ψ(z^j) − φ(z^j)` in the max norm.
fn recovery_error(psi: &RecoveredFunctional, phi: &KernelFunctional) -> f64 {
    psi.moments
        .iter()
        .enumerate()
        .map(|(j, m)| (m - phi.apply_monomial(j)).norm())
        .fold(0.0, f64::max)
}

pub fn run_solve(cfg: &ExperimentConfig) -> RunRecord {
    let mut rec = RunRecord::new(
        Kind::Solve,
        &columns(cfg, &["degree", "phi_norm_n", "grad_norm", "iterations"]),
    );
    let phi = functional(cfg);
    let opts = options(cfg);
    let e = cfg.exponent();
    let results: Vec<_> = cfg
        .degrees
        .par_iter()
        .map(|&n| {
            let grid = make_disk_grid(n, e);
            let (res, t) = timed(|| solve_on_grid(&phi, n, &grid, &opts));
            (n, GridSize::of(n, &grid), res, t)
        })
        .collect();
    for (n, size, res, t) in results {
        rec.push_grid(size);
        let mut row = Map::new();
        match res {
            Ok(sol) => {
                if let Value::Object(m) = serde_json::to_value(&sol).expect("serializable") {
                    row = m;
                }
            }
            Err(err) => {
                row.insert("degree".into(), json!(n));
                if let Error::NotConverged(sol) = &err {
                    solution_fields(&mut row, sol);
                }
                row.insert("error".into(), json!(err.to_string()));
                rec.fail("solve", degree_case(n), err.to_string());
            }
        }
        rec.rows.push(finish_row(cfg, row, t));
    }
    rec
}

/// Solves every configured degree on one grid built for the largest degree.
///
/// Sharing the grid makes the discrete problems nested, so `‖φ‖_n` is
/// nondecreasing exactly and not merely up to quadrature error. Each degree
/// is warm-started from the previous degree's solution.
pub fn run_converge(cfg: &ExperimentConfig) -> RunRecord {
    let mut rec = RunRecord::new(
        Kind::Converge,
        &columns(
            cfg,
            &[
                "degree",
                "phi_norm_n",
                "increment",
                "dist_f_hat",
                "dist_f_star",
                "grad_norm",
                "iterations",
            ],
        ),
    );
    let phi = functional(cfg);
    let opts = options(cfg);
    let e = cfg.exponent();
    let top = *cfg.degrees.last().expect("nonempty");
    let grid = make_disk_grid(top, e);
    rec.push_grid(GridSize::of(top, &grid));

    let mut sols: Vec<(Result<ExtremalSolution>, f64)> = Vec::with_capacity(cfg.degrees.len());
    let mut previous: Option<Poly> = None;
    for &n in &cfg.degrees {
        let (res, t) = timed(|| match (&previous, cfg.multistart) {
            (Some(start), 1) => solve_from(&phi, n, &grid, start, &opts),
            _ => solve_on_grid(&phi, n, &grid, &opts),
        });
        if let Ok(sol) = &res {
            previous = Some(sol.f_star.clone());
        }
        sols.push((res, t));
    }

    let reference = match sols.last() {
        Some((Ok(sol), _)) => Some(sol.clone()),
        _ => None,
    };
    if reference.is_none() {
        rec.fail(
            "reference",
            degree_case(top),
            "largest-degree solve failed; distances unavailable".into(),
        );
    }

    let mut last_phi: Option<f64> = None;
    for (&n, (res, t)) in cfg.degrees.iter().zip(&sols) {
        let mut row = Map::new();
        row.insert("degree".into(), json!(n));
        match res {
            Ok(sol) => {
                row.insert("phi_norm_n".into(), json!(sol.phi_norm_n));
                if let Some(prev) = last_phi {
                    row.insert("increment".into(), json!(sol.phi_norm_n - prev));
                }
                last_phi = Some(sol.phi_norm_n);
                if let Some(r) = &reference {
                    row.insert("dist_f_hat".into(), json!(ap_norm(&(&sol.f_hat - &r.f_hat), e, &grid)));
                    row.insert("dist_f_star".into(), json!(ap_norm(&(&sol.f_star - &r.f_star), e, &grid)));
                }
                row.insert("grad_norm".into(), json!(sol.grad_norm));
                row.insert("iterations".into(), json!(sol.iterations));
            }
            Err(err) => {
                if let Error::NotConverged(sol) = err {
                    solution_fields(&mut row, sol);
                }
                row.insert("error".into(), json!(err.to_string()));
                rec.fail("solve", degree_case(n), err.to_string());
            }
        }
        rec.rows.push(finish_row(cfg, row, *t));
    }

    // monotonicity over the rows that solved
    let phis = rec.column("phi_norm_n");
    let solved: Vec<(usize, f64)> = cfg
        .degrees
        .iter()
        .zip(&phis)
        .zip(&sols)
        .filter(|(_, (r, _))| r.is_ok())
        .map(|((&n, v), _)| (n, v.expect("solved row")))
        .collect();
    for w in solved.windows(2) {
        if w[1].1 < w[0].1 - MONOTONE_SLACK {
            rec.fail(
                "monotone_phi_norm",
                degree_case(w[1].0),
                format!("phi_norm_n fell from {:e} to {:e}", w[0].1, w[1].1),
            );
        }
    }

    let stabilizing = cfg.kernel.degree().expect("nonzero kernel") < cfg.degrees[0];
    if stabilizing && reference.is_some() {
        for col in ["dist_f_hat", "dist_f_star"] {
            let d = rec.column(col);
            check_nonincreasing(&mut rec, col, &cfg.degrees, &d);
            if d.len() >= 2 {
                let i = d.len() - 2;
                match d[i] {
                    Some(v) if v < CONVERGENCE_THRESHOLD => {}
                    other => rec.fail(
                        "distance_converged",
                        json!({ "degree": cfg.degrees[i], "column": col }),
                        format!("{col} = {other:?} not below {CONVERGENCE_THRESHOLD:e}"),
                    ),
                }
            }
        }
    }
    rec
}

fn check_nonincreasing(rec: &mut RunRecord, col: &str, degrees: &[usize], d: &[Option<f64>]) {
    for i in 1..d.len() {
        if let (Some(a), Some(b)) = (d[i - 1], d[i]) {
            if b > a + DISTANCE_SLACK {
                rec.fail(
                    "distance_decreasing",
                    json!({ "degree": degrees[i], "column": col }),
                    format!("{col} rose from {a:e} to {b:e}"),
                );
            }
        }
    }
}

/// Strict decrease along ε, and the convergence threshold at the smallest ε
/// when that ε is small enough to demand it.
fn check_epsilon_column(rec: &mut RunRecord, col: &str, epsilons: &[f64]) {
    let d = rec.column(col);
    for i in 1..d.len() {
        match (d[i - 1], d[i]) {
            (Some(a), Some(b)) if b < a => {}
            (Some(a), Some(b)) => rec.fail(
                "strictly_decreasing",
                json!({ "epsilon": epsilons[i], "column": col }),
                format!("{col} did not decrease: {a:e} then {b:e}"),
            ),
            _ => {}
        }
    }
    let last = epsilons.len() - 1;
    if epsilons[last] <= SMALL_EPSILON {
        match d[last] {
            Some(v) if v < CONVERGENCE_THRESHOLD => {}
            other => rec.fail(
                "distance_converged",
                json!({ "epsilon": epsilons[last], "column": col }),
                format!("{col} = {other:?} not below {CONVERGENCE_THRESHOLD:e}"),
            ),
        }
    }
}

pub fn run_perturb_functional(cfg: &ExperimentConfig) -> RunRecord {
    let mut rec = RunRecord::new(
        Kind::PerturbFunctional,
        &columns(
            cfg,
            &["epsilon", "phi_norm_n", "dist_f_hat", "dist_f_star", "grad_norm", "iterations"],
        ),
    );
    let phi = functional(cfg);
    let opts = options(cfg);
    let e = cfg.exponent();
    let n = cfg.fixed_degree();
    let h = cfg.perturbation.as_ref().expect("validated perturbation");
    let grid = make_disk_grid(n, e);
    rec.push_grid(GridSize::of(n, &grid));

    let base = match solve_on_grid(&phi, n, &grid, &opts) {
        Ok(sol) => sol,
        Err(err) => {
            rec.fail("base_solve", degree_case(n), err.to_string());
            return rec;
        }
    };

    let results: Vec<_> = cfg
        .epsilons
        .par_iter()
        .map(|&eps| {
            timed(|| {
                let kernel = &cfg.kernel + &(h * eps);
                let phi_eps = phi.with_kernel(kernel)?;
                solve_on_grid(&phi_eps, n, &grid, &opts)
            })
        })
        .collect();

    for (&eps, (res, t)) in cfg.epsilons.iter().zip(results) {
        let mut row = Map::new();
        row.insert("epsilon".into(), json!(eps));
        match res {
            Ok(sol) => {
                row.insert("phi_norm_n".into(), json!(sol.phi_norm_n));
                row.insert("dist_f_hat".into(), json!(ap_norm(&(&sol.f_hat - &base.f_hat), e, &grid)));
                row.insert("dist_f_star".into(), json!(ap_norm(&(&sol.f_star - &base.f_star), e, &grid)));
                row.insert("grad_norm".into(), json!(sol.grad_norm));
                row.insert("iterations".into(), json!(sol.iterations));
            }
            Err(err) => {
                if let Error::NotConverged(sol) = &err {
                    solution_fields(&mut row, sol);
                }
                row.insert("error".into(), json!(err.to_string()));
                rec.fail("solve", epsilon_case(eps), err.to_string());
            }
        }
        rec.rows.push(finish_row(cfg, row, t));
    }
    check_epsilon_column(&mut rec, "dist_f_hat", &cfg.epsilons);
    check_epsilon_column(&mut rec, "dist_f_star", &cfg.epsilons);
    rec
}

/// `(f₀ + εh)/φ(f₀ + εh)` restricted to `P_n`.
fn perturbed_element(
    f0: &Poly,
    h: &Poly,
    eps: f64,
    n: usize,
    phi: &KernelFunctional,
) -> Result<Poly> {
    let f = (f0 + &(&h.truncate(n) * eps)).truncate(n);
    if f.is_zero() {
        return Err(Error::ZeroElement);
    }
    let v = phi.apply(&f);
    if v.norm() == 0.0 {
        return Err(Error::NoAdmissiblePoint { degree: n });
    }
    Ok(&f * (1.0 / v))
}

pub fn run_perturb_element(cfg: &ExperimentConfig) -> RunRecord {
    let mut rec = RunRecord::new(
        Kind::PerturbElement,
        &columns(cfg, &["epsilon", "moment_distance", "recovery_error"]),
    );
    let phi = functional(cfg);
    let opts = options(cfg);
    let e = cfg.exponent();
    let n = cfg.fixed_degree();
    let h = cfg.perturbation.as_ref().expect("validated perturbation");
    let grid = make_disk_grid(n, e);
    rec.push_grid(GridSize::of(n, &grid));

    let f0 = match solve_on_grid(&phi, n, &grid, &opts) {
        Ok(sol) => sol.f_star,
        Err(err) => {
            rec.fail("base_solve", degree_case(n), err.to_string());
            return rec;
        }
    };
    // the reference goes through exactly the same arithmetic as ε = 0
    let psi_at = |eps: f64| {
        perturbed_element(&f0, h, eps, n, &phi).and_then(|f| recover_functional(&f, e, n, &grid))
    };
    let psi0 = match psi_at(0.0) {
        Ok(psi) => psi,
        Err(err) => {
            rec.fail("base_recovery", degree_case(n), err.to_string());
            return rec;
        }
    };

    let results: Vec<_> = cfg
        .epsilons
        .par_iter()
        .map(|&eps| timed(|| psi_at(eps)))
        .collect();
    for (&eps, (res, t)) in cfg.epsilons.iter().zip(results) {
        let mut row = Map::new();
        row.insert("epsilon".into(), json!(eps));
        match res {
            Ok(psi) => {
                row.insert("moment_distance".into(), json!(psi.max_distance(&psi0)));
                row.insert("recovery_error".into(), json!(recovery_error(&psi, &phi)));
                row.insert("moments".into(), pairs(&psi.moments));
            }
            Err(err) => {
                row.insert("error".into(), json!(err.to_string()));
                rec.fail("recover", epsilon_case(eps), err.to_string());
            }
        }
        rec.rows.push(finish_row(cfg, row, t));
    }
    check_epsilon_column(&mut rec, "moment_distance", &cfg.epsilons);
    rec
}

fn solve_each_degree(
    cfg: &ExperimentConfig,
    phi: &KernelFunctional,
) -> Vec<(usize, DiskGrid, Result<ExtremalSolution>, f64)> {
    let opts = options(cfg);
    let e: Exponent = cfg.exponent();
    cfg.degrees
        .par_iter()
        .map(|&n| {
            let grid = make_disk_grid(n, e);
            let (res, t) = timed(|| solve_on_grid(phi, n, &grid, &opts));
            (n, grid, res, t)
        })
        .collect()
}

pub fn run_ryabykh(cfg: &ExperimentConfig) -> RunRecord {
    let mut rec = RunRecord::new(
        Kind::Ryabykh,
        &columns(cfg, &["degree", "r", "lhs", "rhs", "slack", "phi_norm_n"]),
    );
    let phi = functional(cfg);
    for (n, grid, res, t) in solve_each_degree(cfg, &phi) {
        rec.push_grid(GridSize::of(n, &grid));
        let report = res.and_then(|sol| Ok((ryabykh_check(&sol, &phi, &cfg.radii)?, sol.phi_norm_n)));
        match report {
            Ok((report, phi_norm)) => {
                for (i, &r) in report.r_values.iter().enumerate() {
                    let slack = report.rhs - report.lhs[i];
                    let mut row = Map::new();
                    row.insert("degree".into(), json!(n));
                    row.insert("r".into(), json!(r));
                    row.insert("lhs".into(), json!(report.lhs[i]));
                    row.insert("rhs".into(), json!(report.rhs));
                    row.insert("slack".into(), json!(slack));
                    row.insert("phi_norm_n".into(), json!(phi_norm));
                    if slack < -RYABYKH_TOL {
                        rec.fail(
                            "ryabykh_bound",
                            json!({ "degree": n, "r": r }),
                            format!("M_p(f_hat, r) = {:e} exceeds bound {:e}", report.lhs[i], report.rhs),
                        );
                    }
                    rec.rows.push(finish_row(cfg, row, t));
                }
            }
            Err(err) => {
                let mut row = Map::new();
                row.insert("degree".into(), json!(n));
                row.insert("error".into(), json!(err.to_string()));
                rec.fail("solve", degree_case(n), err.to_string());
                rec.rows.push(finish_row(cfg, row, t));
            }
        }
    }
    rec
}

pub fn run_certify(cfg: &ExperimentConfig) -> RunRecord {
    let mut rec = RunRecord::new(
        Kind::Certify,
        &columns(
            cfg,
            &["degree", "phi_norm_n", "max_residual", "recovery_error", "grad_norm", "iterations"],
        ),
    );
    let phi = functional(cfg);
    let e = cfg.exponent();
    for (n, grid, res, t) in solve_each_degree(cfg, &phi) {
        rec.push_grid(GridSize::of(n, &grid));
        let mut row = Map::new();
        row.insert("degree".into(), json!(n));
        let checked = res.and_then(|sol| {
            let cert = extremality_residual(&sol.f_hat, &phi, sol.phi_norm_n, n, &grid);
            let psi = recover_functional(&sol.f_star, e, n, &grid)?;
            Ok((sol, cert, psi))
        });
        match checked {
            Ok((sol, cert, psi)) => {
                let rec_err = recovery_error(&psi, &phi);
                row.insert("phi_norm_n".into(), json!(sol.phi_norm_n));
                row.insert("max_residual".into(), json!(cert.max_residual));
                row.insert("recovery_error".into(), json!(rec_err));
                row.insert("grad_norm".into(), json!(sol.grad_norm));
                row.insert("iterations".into(), json!(sol.iterations));
                row.insert("residuals".into(), pairs(&cert.residuals));
                row.insert("moments".into(), pairs(&psi.moments));
                if cert.max_residual > CERTIFICATE_TOL {
                    rec.fail(
                        "extremality_residual",
                        degree_case(n),
                        format!("max residual {:e} above {CERTIFICATE_TOL:e}", cert.max_residual),
                    );
                }
                if rec_err > CERTIFICATE_TOL {
                    rec.fail(
                        "functional_recovery",
                        degree_case(n),
                        format!("recovered moments off by {rec_err:e}"),
                    );
                }
            }
            Err(err) => {
                row.insert("error".into(), json!(err.to_string()));
                rec.fail("solve", degree_case(n), err.to_string());
            }
        }
        rec.rows.push(finish_row(cfg, row, t));
    }
    rec
}
