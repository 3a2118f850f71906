//! Small reference instances used by tests, benches and the command line.

use crate::cost::CostSpec;
use crate::error::{Error, Result};
use crate::grid::{build_grid, DomainSpec, Grid, GridMeasure};
use crate::pde::hitting_law_from;

#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub grid: Grid,
    pub mu: GridMeasure,
    pub nu: GridMeasure,
    pub cost: CostSpec,
}

fn node(g: &Grid, p: &[f64]) -> Result<usize> {
    g.nearest_node(p).ok_or_else(|| Error::InvalidInput(format!("no node near {p:?}")))
}

/// `[0, 1]` at `h = 1/4`; `mu = delta_{1/2}`, `nu = (delta_{1/4} + delta_{3/4}) / 2`.
/// Every embedding takes exactly one step, so the optimal cost is `h^2 = 1/16`
/// for the quadratic cost and `h = 1/4` for the distance cost.
pub fn three_atom_line(cost: CostSpec) -> Result<Instance> {
    let grid = build_grid(&DomainSpec::unit_box(1), 0.25)?;
    let n = grid.len();
    let mu = GridMeasure::dirac(n, node(&grid, &[0.5])?);
    let nu = GridMeasure::uniform(n, &[node(&grid, &[0.25])?, node(&grid, &[0.75])?])?;
    Ok(Instance { name: "three_atom_line".into(), grid, mu, nu, cost })
}

/// The unit square at `h = 1/12` (13 x 13 lattice). `mu` is uniform on the
/// central 3 x 3 block; `nu` is the law in which the walk from `mu` first
/// hits the square ring at lattice distance 3 from the center.
pub fn square_ring(cost: CostSpec) -> Result<Instance> {
    block_and_ring(12, 3, cost)
}

/// The unit square with `cells` lattice steps per side (`cells` even), `mu`
/// uniform on the central 3 x 3 block and `nu` the hitting law of the square
/// ring at lattice distance `radius` from the center.
pub fn block_and_ring(cells: usize, radius: i64, cost: CostSpec) -> Result<Instance> {
    if cells % 2 != 0 || radius < 2 || 2 * radius as usize > cells {
        return Err(Error::InvalidInput(format!("no ring of radius {radius} on {cells} cells")));
    }
    let grid = build_grid(&DomainSpec::unit_box(2), 1.0 / cells as f64)?;
    let center = node(&grid, &[0.5, 0.5])?;
    let block: Vec<usize> = (0..grid.len()).filter(|&i| chebyshev(&grid, i, center) <= 1).collect();
    let mu = GridMeasure::uniform(grid.len(), &block)?;
    let ring: Vec<bool> = (0..grid.len()).map(|i| chebyshev(&grid, i, center) == radius).collect();
    let nu = hitting_law_from(mu.weights(), &ring, &grid)?;
    Ok(Instance { name: format!("block_and_ring_{cells}_{radius}"), grid, mu, nu, cost })
}

/// [`square_ring`] with half of `mu` kept in `nu`: `nu = mu / 2 + nu_ring / 2`.
pub fn square_ring_overlap(cost: CostSpec) -> Result<Instance> {
    let base = square_ring(cost)?;
    let nu = GridMeasure::new(
        base.mu.weights().iter().zip(base.nu.weights()).map(|(a, b)| 0.5 * a + 0.5 * b).collect(),
    )?;
    Ok(Instance { name: "square_ring_overlap".into(), nu, ..base })
}

/// The 13 x 13 lattice with `mu` uniform on the central block and `nu` half
/// the hitting law of the ring at lattice distance 2 and half that of the
/// ring at distance 4. Which sources stop on the inner ring depends on the
/// cost, so optimal plans have sources stopping where others keep going.
pub fn two_rings(cost: CostSpec) -> Result<Instance> {
    let inner = block_and_ring(12, 2, cost.clone())?;
    let outer = block_and_ring(12, 4, cost)?;
    let nu = GridMeasure::new(
        inner.nu.weights().iter().zip(outer.nu.weights()).map(|(a, b)| 0.5 * (a + b)).collect(),
    )?;
    Ok(Instance { name: "two_rings".into(), nu, ..inner })
}

fn chebyshev(g: &Grid, a: usize, b: usize) -> i64 {
    g.lattice(a).iter().zip(g.lattice(b)).map(|(p, q)| (p - q).abs()).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_probabilities() {
        for inst in [
            three_atom_line(CostSpec::Distance).unwrap(),
            square_ring(CostSpec::Distance).unwrap(),
            square_ring_overlap(CostSpec::Distance).unwrap(),
            two_rings(CostSpec::Distance).unwrap(),
        ] {
            inst.mu.check_probability(&inst.grid, "mu").unwrap();
            inst.nu.check_probability(&inst.grid, "nu").unwrap();
        }
        let sq = square_ring(CostSpec::Distance).unwrap();
        assert_eq!(sq.grid.interior_nodes().len(), 121);
        assert_eq!(sq.mu.support().len(), 9);
        // The ring has 24 nodes; its 4 corners can only be entered through ring nodes.
        assert_eq!(sq.nu.support().len(), 20);
    }
}
