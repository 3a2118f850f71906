//! Conjugate-gradient solves for the grid operator `A = 2d I - adjacency`
//! restricted to a set of free interior nodes. `A` is the negative Laplacian
//! scaled by `h^2`; on any proper subset of the interior it is a symmetric
//! irreducibly diagonally dominant M-matrix, hence SPD.

use super::Grid;
use crate::error::{Error, Result};
use crate::tol::{TOL_LIN, TOL_LIN_TARGET};

fn apply(g: &Grid, free: &[bool], x: &[f64], out: &mut [f64], nodes: &[usize]) {
    let diag = (2 * g.dim()) as f64;
    for &i in nodes {
        let mut s = diag * x[i];
        for j in g.interior_neighbors(i) {
            if free[j] {
                s -= x[j];
            }
        }
        out[i] = s;
    }
}

fn dot(nodes: &[usize], a: &[f64], b: &[f64]) -> f64 {
    nodes.iter().map(|&i| a[i] * b[i]).sum()
}

/// Solves `A x = b` on the free nodes. Entries of `b` and `guess` outside the
/// free set are ignored; the returned vector is zero there.
pub(crate) fn solve_free(g: &Grid, free: &[bool], b: &[f64], guess: Option<&[f64]>) -> Result<Vec<f64>> {
    let n = g.len();
    let nodes: Vec<usize> = g.interior_nodes().iter().copied().filter(|&i| free[i]).collect();
    let mut x = vec![0.0; n];
    if nodes.is_empty() {
        return Ok(x);
    }
    if let Some(x0) = guess {
        for &i in &nodes {
            x[i] = x0[i];
        }
    }
    let bnorm = dot(&nodes, b, b).sqrt();
    if bnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }

    let mut r = vec![0.0; n];
    let mut ap = vec![0.0; n];
    apply(g, free, &x, &mut ap, &nodes);
    for &i in &nodes {
        r[i] = b[i] - ap[i];
    }
    let mut p = r.clone();
    let mut rr = dot(&nodes, &r, &r);
    let max_iter = 4 * nodes.len() + 1000;
    let mut iterations = 0;
    while iterations < max_iter && rr.sqrt() > TOL_LIN_TARGET * bnorm {
        apply(g, free, &p, &mut ap, &nodes);
        let pap = dot(&nodes, &p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        for &i in &nodes {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&nodes, &r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for &i in &nodes {
            p[i] = r[i] + beta * p[i];
        }
        iterations += 1;
        // Recompute the true residual now and then to shed drift.
        if iterations % 200 == 0 {
            apply(g, free, &x, &mut ap, &nodes);
            for &i in &nodes {
                r[i] = b[i] - ap[i];
            }
            rr = dot(&nodes, &r, &r);
        }
    }

    apply(g, free, &x, &mut ap, &nodes);
    let true_res = nodes.iter().map(|&i| (b[i] - ap[i]).powi(2)).sum::<f64>().sqrt() / bnorm;
    if true_res > TOL_LIN || !true_res.is_finite() {
        return Err(Error::SolverDiverged { residual: true_res, iterations });
    }
    Ok(x)
}

/// Dirichlet problem: `L u = rhs` on free nodes, `u = fixed` elsewhere.
pub(crate) fn solve_dirichlet(g: &Grid, free: &[bool], rhs: &[f64], fixed: &[f64], guess: Option<&[f64]>) -> Result<Vec<f64>> {
    let h2 = g.h() * g.h();
    let mut b = vec![0.0; g.len()];
    for &i in g.interior_nodes() {
        if !free[i] {
            continue;
        }
        let mut s = -h2 * rhs[i];
        for j in g.interior_neighbors(i) {
            if !free[j] {
                s += fixed[j];
            }
        }
        b[i] = s;
    }
    let x = solve_free(g, free, &b, guess)?;
    Ok((0..g.len()).map(|i| if free[i] { x[i] } else { fixed[i] }).collect())
}
