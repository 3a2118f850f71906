use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::linalg::solve_dirichlet;
use crate::grid::{laplacian_at, neighbor_mean, Grid, ScalarField};
use crate::tol::{PSOR_BUDGET, PSOR_OMEGA, TOL_CONTACT, TOL_PSOR};

/// Rounds of active-set refinement after the relaxation sweeps.
const POLISH_ROUNDS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObstacleOptions {
    /// Relaxation factor in `[1, 2)`.
    pub omega: f64,
    /// Sup-norm update at which the sweeps stop.
    pub tol: f64,
    pub budget: usize,
    pub tol_contact: f64,
    /// Refine the converged iterate by policy iteration on the stopping set,
    /// which makes it exact up to the linear solver.
    pub polish: bool,
}

impl Default for ObstacleOptions {
    fn default() -> Self {
        ObstacleOptions {
            omega: PSOR_OMEGA,
            tol: TOL_PSOR,
            budget: PSOR_BUDGET,
            tol_contact: TOL_CONTACT,
            polish: true,
        }
    }
}

/// Least discretely superharmonic majorant of an obstacle with fixed boundary values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObstacleSolution {
    pub u: ScalarField,
    /// Nodes with `u - obstacle <= tol_contact`; boundary nodes always.
    pub active: Vec<bool>,
    /// `max_interior |min(u - obstacle, -Lu)|`.
    pub residual: f64,
    pub sweeps: usize,
}

/// `max_interior |min(u - obstacle, -Lu)|`.
pub fn complementarity_residual(u: &[f64], obstacle: &[f64], g: &Grid) -> f64 {
    g.interior_nodes()
        .iter()
        .map(|&i| (u[i] - obstacle[i]).min(-laplacian_at(u, g, i)).abs())
        .fold(0.0, f64::max)
}

/// Solves the obstacle problem with default options and no warm start.
pub fn obstacle_solve(obstacle: &ScalarField, bdry: &ScalarField, g: &Grid) -> Result<ObstacleSolution> {
    obstacle_solve_with(obstacle, bdry, g, &ObstacleOptions::default(), None)
}

/// `u = max(obstacle, neighbor mean of u)` on interior nodes, `u = bdry` on the
/// boundary, by projected SOR in lexicographic order.
pub fn obstacle_solve_with(
    obstacle: &ScalarField,
    bdry: &ScalarField,
    g: &Grid,
    opts: &ObstacleOptions,
    warm: Option<&ScalarField>,
) -> Result<ObstacleSolution> {
    obstacle.check_len(g, "obstacle")?;
    bdry.check_len(g, "boundary data")?;
    if !(1.0..2.0).contains(&opts.omega) {
        return Err(Error::InvalidInput(format!("relaxation factor {} outside [1, 2)", opts.omega)));
    }
    let obs = obstacle.values();
    let mut u: Vec<f64> = match warm {
        Some(w) if w.len() == g.len() => w.values().to_vec(),
        _ => obs.to_vec(),
    };
    for &b in g.boundary_nodes() {
        u[b] = bdry[b];
    }
    for &i in g.interior_nodes() {
        u[i] = u[i].max(obs[i]);
    }

    let mut sweeps = 0;
    let mut change = f64::INFINITY;
    while change > opts.tol {
        if sweeps == opts.budget {
            return Err(Error::MaxIterations { budget: opts.budget, residual: change });
        }
        change = 0.0;
        for &i in g.interior_nodes() {
            let relaxed = u[i] + opts.omega * (neighbor_mean(&u, g, i) - u[i]);
            let next = relaxed.max(obs[i]);
            change = f64::max(change, (next - u[i]).abs());
            u[i] = next;
        }
        sweeps += 1;
        if !change.is_finite() {
            return Err(Error::MaxIterations { budget: sweeps, residual: change });
        }
    }

    if opts.polish {
        if let Some(p) = polish(&u, obs, g) {
            if complementarity_residual(&p, obs, g) <= complementarity_residual(&u, obs, g) {
                u = p;
            }
        }
    }

    let residual = complementarity_residual(&u, obs, g);
    let active = (0..g.len())
        .map(|i| g.is_boundary(i) || u[i] - obs[i] <= opts.tol_contact)
        .collect();
    Ok(ObstacleSolution { u: ScalarField::new(u), active, residual, sweeps })
}

/// Policy iteration on the stopping set, started from a near-solution.
fn polish(start: &[f64], obs: &[f64], g: &Grid) -> Option<Vec<f64>> {
    let stop_set = |u: &[f64]| -> Vec<bool> {
        (0..g.len())
            .map(|i| g.is_interior(i) && obs[i] >= neighbor_mean(u, g, i))
            .collect()
    };
    let mut u = start.to_vec();
    let mut stop = stop_set(&u);
    for _ in 0..POLISH_ROUNDS {
        let free: Vec<bool> = (0..g.len()).map(|i| g.is_interior(i) && !stop[i]).collect();
        let mut fixed = u.clone();
        for i in 0..g.len() {
            if stop[i] {
                fixed[i] = obs[i];
            }
        }
        u = solve_dirichlet(g, &free, &vec![0.0; g.len()], &fixed, Some(&u)).ok()?;
        let next = stop_set(&u);
        if next == stop {
            return Some(u);
        }
        stop = next;
    }
    None
}

/// Superharmonic envelope: the obstacle problem with boundary data `hf|boundary`.
pub fn superharmonic_envelope(hf: &ScalarField, g: &Grid) -> Result<ObstacleSolution> {
    obstacle_solve(hf, hf, g)
}
