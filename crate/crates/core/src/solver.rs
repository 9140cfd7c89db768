//! Jacobi-preconditioned conjugate gradients.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::sparse::SparseSymMatrix;
use crate::{Error, Result};

pub const DEFAULT_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// `‖b − A x‖ / ‖b‖`, recomputed from the returned iterate.
    pub relative_residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    pub rel_tol: f64,
    /// Defaults to ten times the dimension.
    pub max_iterations: Option<usize>,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            rel_tol: DEFAULT_REL_TOL,
            max_iterations: None,
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    math::sqrt(dot(v, v))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    math::ordered_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

fn true_residual(a: &SparseSymMatrix, b: &[f64], x: &[f64], r: &mut [f64]) {
    a.matvec_into(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
}

/// Solves `A x = b` for symmetric positive definite `A`.
pub fn solve_spd(a: &SparseSymMatrix, b: &[f64], rel_tol: f64) -> Result<(Vec<f64>, SolveReport)> {
    solve_spd_with(
        a,
        b,
        &CgOptions {
            rel_tol,
            max_iterations: None,
        },
    )
}

pub fn solve_spd_with(
    a: &SparseSymMatrix,
    b: &[f64],
    opts: &CgOptions,
) -> Result<(Vec<f64>, SolveReport)> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    if !(opts.rel_tol > 0.0 && opts.rel_tol < 1.0) {
        return Err(Error::InvalidConfig(alloc::format!(
            "relative tolerance {} outside (0, 1)",
            opts.rel_tol
        )));
    }
    let inv_diag = a
        .diagonal()
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            if d > 0.0 {
                Ok(1.0 / d)
            } else {
                Err(Error::NotPositiveDefinite { row: i })
            }
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut x = vec![0.0; n];
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok((
            x,
            SolveReport {
                iterations: 0,
                relative_residual: 0.0,
                converged: true,
            },
        ));
    }
    let target = opts.rel_tol * b_norm;
    let max_iterations = opts.max_iterations.unwrap_or(10 * n.max(1));

    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut iterations = 0;

    while iterations < max_iterations {
        iterations += 1;
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NotPositiveDefinite { row: 0 });
        }
        let step = rz / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        let mut residual_norm = norm(&r);
        let mut restart = false;
        if residual_norm <= target {
            // The recurrence drifts from b − A x; only stop on the real thing.
            true_residual(a, b, &x, &mut r);
            residual_norm = norm(&r);
            if residual_norm <= target {
                return Ok((
                    x,
                    SolveReport {
                        iterations,
                        relative_residual: residual_norm / b_norm,
                        converged: true,
                    },
                ));
            }
            restart = true;
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        if restart {
            p.copy_from_slice(&z);
        } else {
            let beta = rz_new / rz;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        rz = rz_new;
    }

    true_residual(a, b, &x, &mut r);
    Err(Error::SolverDiverged(SolveReport {
        iterations,
        relative_residual: norm(&r) / b_norm,
        converged: false,
    }))
}
