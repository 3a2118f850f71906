//! Occupation-measure linear programs for the stopped walk.
//!
//! For each source `x` the variable `w_x(z) >= 0` is `mu(x)` times the
//! expected number of visits of the walk started at `x` to the interior node
//! `z` before it stops. The stopped mass at `y` is
//!
//! ```text
//! P_x(y) = mu(x) [y = x] + sum_{z ~ y, z interior} w_x(z) / 2d - w_x(y)
//! ```
//!
//! and a family `w` is a randomized stopping rule iff every `P_x >= 0`. The
//! marginal constraint is `sum_x P_x = nu`.

use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, Variable};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridMeasure};

/// Optimal occupation family returned by [`solve_occupation_lp`].
#[derive(Debug, Clone)]
pub(crate) struct Occupation {
    pub sources: Vec<usize>,
    pub mass: Vec<f64>,
    /// Mass-weighted visit counts, one full-length vector per source.
    pub visits: Vec<Vec<f64>>,
}

impl Occupation {
    /// Stopped mass `P_x` of source number `k`, mass-weighted.
    pub fn stopped_mass(&self, g: &Grid, k: usize) -> Vec<f64> {
        let mut p = vec![0.0; g.len()];
        p[self.sources[k]] += self.mass[k];
        let w = &self.visits[k];
        let q = 1.0 / (2 * g.dim()) as f64;
        for &z in g.interior_nodes() {
            if w[z] == 0.0 {
                continue;
            }
            p[z] -= w[z];
            for y in g.interior_neighbors(z) {
                p[y] += q * w[z];
            }
        }
        p
    }
}

/// minilp uses absolute feasibility and optimality tolerances of `1e-8`.
/// Masses and costs are rescaled so those tolerances become relative ones
/// well below the certification tolerance. Mass scales of `1e4` and up make
/// the simplex report spurious infeasibility on the ring benchmark.
const MASS_SCALE: f64 = 1e2;
const COST_SCALE: f64 = 1e4;

fn cost_scale(max_abs: f64) -> f64 {
    if max_abs > 0.0 {
        COST_SCALE / max_abs
    } else {
        1.0
    }
}

fn lp_error(e: minilp::Error) -> Error {
    Error::LpNumericalFailure(e.to_string())
}

/// Minimizes `sum_x sum_z coef(k, z) w_x(z)` over occupation families with
/// marginals `mu`, `nu`, where `k` indexes the sources in `supp mu`. Returns
/// `None` when the polytope is empty.
pub(crate) fn solve_occupation_lp(
    g: &Grid,
    mu: &GridMeasure,
    nu: &GridMeasure,
    coef: &(dyn Fn(usize, usize) -> f64 + Sync),
) -> Result<Option<Occupation>> {
    let n = g.len();
    let sources = mu.support();
    let interior = g.interior_nodes();
    let q = 1.0 / (2 * g.dim()) as f64;

    let max_coef = (0..sources.len())
        .flat_map(|k| interior.iter().map(move |&z| (k, z)))
        .map(|(k, z)| coef(k, z).abs())
        .fold(0.0, f64::max);
    let cs = cost_scale(max_coef);

    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let mut vars: Vec<Vec<Option<Variable>>> = Vec::with_capacity(sources.len());
    for k in 0..sources.len() {
        let mut row = vec![None; n];
        for &z in interior {
            row[z] = Some(lp.add_var(cs * coef(k, z), (0.0, f64::INFINITY)));
        }
        vars.push(row);
    }

    // Stopped mass of source k at node y as a linear expression.
    let stopped_expr = |k: usize, y: usize, expr: &mut LinearExpr| {
        if let Some(v) = vars[k][y] {
            expr.add(v, -1.0);
            for z in g.interior_neighbors(y) {
                if let Some(vz) = vars[k][z] {
                    expr.add(vz, q);
                }
            }
        } else {
            for z in g.neighbors(y).iter().flatten() {
                if let Some(vz) = vars[k][*z] {
                    expr.add(vz, q);
                }
            }
        }
    };

    for (k, &x) in sources.iter().enumerate() {
        for &y in interior {
            let mut expr = LinearExpr::empty();
            stopped_expr(k, y, &mut expr);
            let own = if y == x { mu[x] } else { 0.0 };
            lp.add_constraint(expr, ComparisonOp::Ge, -MASS_SCALE * own);
        }
    }
    // Total mass is conserved, so the last marginal row is implied.
    for y in 0..n.saturating_sub(1) {
        let mut expr = LinearExpr::empty();
        let mut own = 0.0;
        for (k, &x) in sources.iter().enumerate() {
            stopped_expr(k, y, &mut expr);
            if x == y {
                own += mu[x];
            }
        }
        lp.add_constraint(expr, ComparisonOp::Eq, MASS_SCALE * (nu[y] - own));
    }

    let sol = match lp.solve() {
        Ok(s) => s,
        Err(minilp::Error::Infeasible) => return Ok(None),
        Err(e) => return Err(lp_error(e)),
    };
    let visits = vars
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| v.map_or(0.0, |v| sol.var_value(v).max(0.0) / MASS_SCALE))
                .collect()
        })
        .collect();
    Ok(Some(Occupation {
        mass: sources.iter().map(|&x| mu[x]).collect(),
        sources,
        visits,
    }))
}

/// Maximizes `sum_y psi(y) nu(y) - sum_x mu(x) u_x(x)` over free `psi` and
/// per-source `u_x >= psi - c(x, .)` that are superharmonic on the interior.
/// This is the linear-programming dual of the cost-weighted occupation LP.
/// Returns the optimal value, recomputed from the variables, and `psi`.
pub(crate) fn solve_dual_lp(
    g: &Grid,
    mu: &GridMeasure,
    nu: &GridMeasure,
    cost: &(dyn Fn(usize, usize) -> f64 + Sync),
) -> Result<(f64, Vec<f64>)> {
    let n = g.len();
    let sources = mu.support();
    let q = 1.0 / (2 * g.dim()) as f64;
    // The objective is invariant under adding a constant to psi and every u_x
    // (both marginals have unit mass), so psi is pinned at node 0. Finite
    // bounds keep nonbasic free variables at finite values; 100 times the
    // largest cost is loose in practice, and a binding bound shows up as a
    // primal-dual disagreement in the oracle.
    let max_cost = sources
        .iter()
        .flat_map(|&x| (0..n).map(move |y| cost(x, y).abs()))
        .fold(0.0, f64::max);
    let cs = cost_scale(max_cost);
    let big = 1e2 * COST_SCALE;
    let free = (-big, big);

    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let psi: Vec<Variable> = (0..n)
        .map(|y| lp.add_var(MASS_SCALE * nu[y], if y == 0 { (0.0, 0.0) } else { free }))
        .collect();
    let mut rows = Vec::with_capacity(sources.len());
    for &x in &sources {
        let u: Vec<Variable> = (0..n)
            .map(|y| lp.add_var(if y == x { -MASS_SCALE * mu[x] } else { 0.0 }, free))
            .collect();
        for y in 0..n {
            lp.add_constraint(&[(u[y], 1.0), (psi[y], -1.0)], ComparisonOp::Ge, -cs * cost(x, y));
        }
        for &z in g.interior_nodes() {
            let mut expr = LinearExpr::empty();
            expr.add(u[z], -1.0);
            for y in g.interior_neighbors(z) {
                expr.add(u[y], q);
            }
            lp.add_constraint(expr, ComparisonOp::Le, 0.0);
        }
        rows.push(u);
    }
    let sol = lp.solve().map_err(lp_error)?;
    let psi_val: Vec<f64> = psi.iter().map(|&v| *sol.var_value(v) / cs).collect();
    let value = (0..n).map(|y| psi_val[y] * nu[y]).sum::<f64>()
        - sources
            .iter()
            .zip(&rows)
            .map(|(&x, u)| mu[x] * *sol.var_value(u[x]) / cs)
            .sum::<f64>();
    Ok((value, psi_val))
}

/// Maximizes `sum_y w(y) (mu - nu)(y)` over `|w| <= 1` with `L w >= 0` on the
/// interior. A positive optimum is a subharmonic function separating the pair.
pub(crate) fn solve_witness_lp(g: &Grid, mu: &GridMeasure, nu: &GridMeasure) -> Result<(f64, Vec<f64>)> {
    let n = g.len();
    let q = 1.0 / (2 * g.dim()) as f64;
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let w: Vec<Variable> = (0..n).map(|y| lp.add_var(mu[y] - nu[y], (-1.0, 1.0))).collect();
    for &z in g.interior_nodes() {
        let mut expr = LinearExpr::empty();
        expr.add(w[z], -1.0);
        for y in g.interior_neighbors(z) {
            expr.add(w[y], q);
        }
        lp.add_constraint(expr, ComparisonOp::Ge, 0.0);
    }
    let sol = lp.solve().map_err(lp_error)?;
    let values: Vec<f64> = w.iter().map(|&v| *sol.var_value(v)).collect();
    let gap = (0..n).map(|y| values[y] * (mu[y] - nu[y])).sum();
    Ok((gap, values))
}
