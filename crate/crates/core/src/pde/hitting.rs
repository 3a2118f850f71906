use crate::error::{Error, Result};
use crate::grid::linalg::solve_free;
use crate::grid::{Grid, GridMeasure};

/// Total mass of a hitting law must be one within this.
const HIT_MASS_TOL: f64 = 1e-10;

/// Law of the walk started from `initial` at its first visit to `absorbing`
/// or the boundary (time zero included).
///
/// The expected visit counts `v` on the transient set `T` solve
/// `(I - P_TT)^T v = initial_T`. The walk matrix is symmetric, so after
/// scaling by `2d` this is the grid operator `2d I - adjacency`.
pub fn hitting_law_from(initial: &[f64], absorbing: &[bool], g: &Grid) -> Result<GridMeasure> {
    let n = g.len();
    if initial.len() != n || absorbing.len() != n {
        return Err(Error::InvalidInput("hitting law inputs do not match the grid".into()));
    }
    let transient: Vec<bool> = (0..n).map(|i| g.is_interior(i) && !absorbing[i]).collect();
    let two_d = (2 * g.dim()) as f64;
    let b: Vec<f64> = (0..n).map(|i| if transient[i] { two_d * initial[i] } else { 0.0 }).collect();
    let v = solve_free(g, &transient, &b, None)?;

    let mut law: Vec<f64> = (0..n).map(|i| if transient[i] { 0.0 } else { initial[i] }).collect();
    for &z in g.interior_nodes() {
        if !transient[z] || v[z] == 0.0 {
            continue;
        }
        // Each neighbor receives 1/2d of the visits to z.
        let share = v[z] / two_d;
        for y in g.interior_neighbors(z) {
            if !transient[y] {
                law[y] += share;
            }
        }
    }
    let expected: f64 = initial.iter().sum();
    let total: f64 = law.iter().sum();
    if (total - expected).abs() > HIT_MASS_TOL * expected.max(1.0) {
        return Err(Error::SolverDiverged { residual: (total - expected).abs(), iterations: 0 });
    }
    GridMeasure::from_signed(law, HIT_MASS_TOL)
}

/// Hitting law of `absorbing` or the boundary for the walk started at `x`.
/// A start inside the absorbing set stops immediately.
pub fn stopped_distribution(x: usize, absorbing: &[bool], g: &Grid) -> Result<GridMeasure> {
    if x >= g.len() {
        return Err(Error::InvalidInput(format!("node {x} is not on the grid")));
    }
    let mut start = vec![0.0; g.len()];
    start[x] = 1.0;
    hitting_law_from(&start, absorbing, g)
}

/// One walk step from `x` as a node distribution; boundary nodes stay put.
pub fn one_step_law(x: usize, g: &Grid) -> Vec<f64> {
    let mut p = vec![0.0; g.len()];
    if g.is_boundary(x) {
        p[x] = 1.0;
        return p;
    }
    let q = 1.0 / (2 * g.dim()) as f64;
    for y in g.interior_neighbors(x) {
        p[y] += q;
    }
    p
}
