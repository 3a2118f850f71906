use std::io::Write;

use rayon::prelude::*;

use super::obstacle::{obstacle_solve_with, ObstacleOptions, ObstacleSolution};
use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};
use crate::tol::BOUNDARY_TOL;

/// `J_psi(x, y)`: one obstacle solve per source `x`, obstacle `psi - c(x, .)`,
/// boundary values `-c(x, .)`.
#[derive(Debug, Clone)]
pub struct ValueTable {
    n: usize,
    sources: Vec<usize>,
    row_of: Vec<Option<usize>>,
    rows: Vec<ObstacleSolution>,
}

impl ValueTable {
    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn has_source(&self, x: usize) -> bool {
        self.row_of.get(x).is_some_and(Option::is_some)
    }

    /// The obstacle solution for source `x`, if it was computed.
    pub fn row(&self, x: usize) -> Option<&ObstacleSolution> {
        self.row_of.get(x).copied().flatten().map(|k| &self.rows[k])
    }

    fn row_expect(&self, x: usize) -> &ObstacleSolution {
        self.row(x).unwrap_or_else(|| panic!("value table has no row for source {x}"))
    }

    /// `J(x, y)`. Panics if `x` is not a source of the table.
    pub fn value(&self, x: usize, y: usize) -> f64 {
        self.row_expect(x).u[y]
    }

    /// `y -> J(x, y)`.
    pub fn values(&self, x: usize) -> &[f64] {
        self.row_expect(x).u.values()
    }

    /// Contact flags of row `x`.
    pub fn active(&self, x: usize) -> &[bool] {
        &self.row_expect(x).active
    }

    pub fn max_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    pub fn total_sweeps(&self) -> usize {
        self.rows.iter().map(|r| r.sweeps).sum()
    }

    /// Writes `source,node,value,active,residual` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["source", "node", "value", "active", "residual"])?;
        for (&x, row) in self.sources.iter().zip(&self.rows) {
            for y in 0..self.n {
                w.write_record(&[
                    x.to_string(),
                    y.to_string(),
                    format!("{:e}", row.u[y]),
                    u8::from(row.active[y]).to_string(),
                    format!("{:e}", row.residual),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn check_boundary_zero(psi: &ScalarField, g: &Grid) -> Result<()> {
    psi.check_len(g, "psi")?;
    if let Some(&b) = g.boundary_nodes().iter().find(|&&b| psi[b].abs() > BOUNDARY_TOL) {
        return Err(Error::InvalidInput(format!(
            "psi must vanish on the boundary; psi({b}) = {:e}",
            psi[b]
        )));
    }
    Ok(())
}

/// Value table with every node as a source.
pub fn value_table(psi: &ScalarField, cost: &CostMatrix, g: &Grid) -> Result<ValueTable> {
    let all: Vec<usize> = (0..g.len()).collect();
    value_table_for(psi, cost, g, &all, &ObstacleOptions::default(), None)
}

/// Value table over the given sources. Rows present in `warm` seed the
/// corresponding solves.
pub fn value_table_for(
    psi: &ScalarField,
    cost: &CostMatrix,
    g: &Grid,
    sources: &[usize],
    opts: &ObstacleOptions,
    warm: Option<&ValueTable>,
) -> Result<ValueTable> {
    check_boundary_zero(psi, g)?;
    if cost.len() != g.len() {
        return Err(Error::InvalidInput("cost matrix does not match the grid".into()));
    }
    let n = g.len();
    let rows: Vec<ObstacleSolution> = sources
        .par_iter()
        .map(|&x| {
            let c = cost.row(x);
            let obstacle = ScalarField::new((0..n).map(|y| psi[y] - c[y]).collect());
            let bdry = ScalarField::new(c.iter().map(|v| -v).collect());
            let seed = warm.and_then(|t| t.row(x)).map(|r| &r.u);
            obstacle_solve_with(&obstacle, &bdry, g, opts, seed).map_err(|e| Error::RowFailed {
                source_node: x,
                inner: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let mut row_of = vec![None; n];
    for (k, &x) in sources.iter().enumerate() {
        row_of[x] = Some(k);
    }
    Ok(ValueTable { n, sources: sources.to_vec(), row_of, rows })
}
