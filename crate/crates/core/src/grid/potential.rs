use super::linalg::solve_dirichlet;
use super::{Grid, ScalarField};
use crate::error::{Error, Result};

fn interior_mask(g: &Grid) -> Vec<bool> {
    (0..g.len()).map(|i| g.is_interior(i)).collect()
}

/// Solves `L u = rhs` on interior nodes with `u = bdry` on boundary nodes.
///
/// `rhs` is read on interior nodes only and `bdry` on boundary nodes only.
pub fn solve_poisson(rhs: &ScalarField, bdry: &ScalarField, g: &Grid) -> Result<ScalarField> {
    rhs.check_len(g, "rhs")?;
    bdry.check_len(g, "boundary data")?;
    let free = interior_mask(g);
    let u = solve_dirichlet(g, &free, rhs.values(), bdry.values(), None)?;
    Ok(ScalarField::new(u))
}

/// `u_O` with `L u_O = 1`, `u_O = 0` on the boundary; `-u_O(x)` is the
/// expected physical exit time of the walk started at `x`.
pub fn exit_time_potential(g: &Grid) -> Result<ScalarField> {
    solve_poisson(&ScalarField::constant(g.len(), 1.0), &ScalarField::zeros(g.len()), g)
}

/// Discrete `H^{-1}` norm of a signed node measure.
///
/// The potential `phi` solves `L phi = -rho / h^d` on interior nodes with
/// `phi = 0` on the boundary, and the norm is `sqrt(sum_x phi(x) rho(x))`.
/// Boundary mass pairs with a vanishing potential and so drops out.
pub fn h_minus1_norm(rho: &[f64], g: &Grid) -> Result<f64> {
    if rho.len() != g.len() || rho.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("signed measure does not match the grid".into()));
    }
    let vol = g.cell_volume();
    let rhs: Vec<f64> = rho.iter().map(|r| -r / vol).collect();
    let free = interior_mask(g);
    let phi = solve_dirichlet(g, &free, &rhs, &vec![0.0; g.len()], None)?;
    let pairing: f64 = g.interior_nodes().iter().map(|&i| phi[i] * rho[i]).sum();
    Ok(pairing.max(0.0).sqrt())
}
