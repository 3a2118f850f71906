use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridMeasure, ScalarField};
use crate::pde::{hitting_law_from, one_step_law, ValueTable};

/// Per-source stopping regions `R_x = {y : J(x, y) - psi(y) + c(x, y) <= tol}`.
/// Boundary nodes always stop the walk whether or not they are flagged.
///
/// The walk checks `R_x` from its first step on and never stops on a return
/// to its own start `x`: the Brownian path does not revisit its origin, so the
/// diagonal pair carries no stopping mass in the continuum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Barrier {
    pub n: usize,
    pub tol: f64,
    pub sources: Vec<usize>,
    pub regions: Vec<Vec<bool>>,
}

impl Barrier {
    pub fn region(&self, x: usize) -> Option<&[bool]> {
        self.sources.iter().position(|&s| s == x).map(|k| self.regions[k].as_slice())
    }

    /// `R_x` without `x` itself: the set the walk from `x` stops on.
    pub fn stopping_set(&self, x: usize) -> Option<Vec<bool>> {
        self.region(x).map(|r| {
            let mut s = r.to_vec();
            s[x] = false;
            s
        })
    }

    /// Sources whose region contains the source itself.
    pub fn diagonal_contacts(&self) -> Vec<usize> {
        self.sources.iter().zip(&self.regions).filter(|(&x, r)| r[x]).map(|(&x, _)| x).collect()
    }

    /// Same region for every source.
    pub fn uniform(n: usize, sources: Vec<usize>, region: Vec<bool>) -> Barrier {
        let regions = vec![region; sources.len()];
        Barrier { n, tol: 0.0, sources, regions }
    }

    /// Writes `source,node,in_region` rows for flagged nodes.
    pub fn write_csv<W: Write>(&self, out: W, g: &Grid) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut head = vec!["source".to_string(), "node".to_string()];
        head.extend((0..g.dim()).map(|k| format!("x{k}")));
        w.write_record(&head)?;
        for (&x, r) in self.sources.iter().zip(&self.regions) {
            for (y, &inside) in r.iter().enumerate() {
                if inside {
                    let mut rec = vec![x.to_string(), y.to_string()];
                    rec.extend(g.coord(y).iter().map(|v| format!("{v}")));
                    w.write_record(&rec)?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Contact sets of `psi - c(x, .)` under `J(x, .)` for every source of the table.
pub fn extract_barrier(psi: &ScalarField, table: &ValueTable, cost: &CostMatrix, tol: f64) -> Result<Barrier> {
    let n = table.len();
    if psi.len() != n || cost.len() != n {
        return Err(Error::InvalidInput("barrier inputs have different sizes".into()));
    }
    let sources = table.sources().to_vec();
    let regions = sources
        .iter()
        .map(|&x| {
            let j = table.values(x);
            let c = cost.row(x);
            (0..n).map(|y| j[y] - psi[y] + c[y] <= tol).collect()
        })
        .collect();
    Ok(Barrier { n, tol, sources, regions })
}

/// `mu = common + mu_plus`, `nu = common + nu_plus` with `common = mu ^ nu`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StayPutSplit {
    pub common: GridMeasure,
    pub mu_plus: GridMeasure,
    pub nu_plus: GridMeasure,
    /// Total mass of `common`; `mu_plus` and `nu_plus` each carry `1 - common_mass`.
    pub common_mass: f64,
}

impl StayPutSplit {
    /// `mu_plus` and `nu_plus` rescaled to probability measures, if nonzero.
    pub fn normalized_plus(&self) -> Option<(GridMeasure, GridMeasure)> {
        let rest = 1.0 - self.common_mass;
        if rest <= 0.0 {
            return None;
        }
        Some((self.mu_plus.scaled(1.0 / rest), self.nu_plus.scaled(1.0 / rest)))
    }
}

pub fn stay_put_split(mu: &GridMeasure, nu: &GridMeasure) -> Result<StayPutSplit> {
    if mu.len() != nu.len() {
        return Err(Error::InvalidInput("measures live on different grids".into()));
    }
    let common: Vec<f64> = mu.weights().iter().zip(nu.weights()).map(|(a, b)| a.min(*b)).collect();
    let mu_plus = mu.weights().iter().zip(&common).map(|(a, c)| a - c).collect();
    let nu_plus = nu.weights().iter().zip(&common).map(|(a, c)| a - c).collect();
    let common_mass = common.iter().sum();
    Ok(StayPutSplit {
        common: GridMeasure::new(common)?,
        mu_plus: GridMeasure::new(mu_plus)?,
        nu_plus: GridMeasure::new(nu_plus)?,
        common_mass,
    })
}

/// Law of `X_tau` for `tau` the first time `t >= 1` the walk from `x` sits in
/// `R_x \ {x}` or on the boundary, mixed over `x ~ mu`. A walk started on the
/// boundary stops at once.
///
/// With `stay_put`, the mass `stay_put(x)` at each source stops at time zero
/// and only the remainder walks; sources that keep all their mass need no region.
pub fn exact_stopped_law(barrier: &Barrier, mu: &GridMeasure, g: &Grid, stay_put: Option<&GridMeasure>) -> Result<GridMeasure> {
    let n = g.len();
    if barrier.n != n || mu.len() != n || stay_put.is_some_and(|s| s.len() != n) {
        return Err(Error::InvalidInput("barrier, measure and grid disagree in size".into()));
    }
    let parts: Vec<Vec<f64>> = mu
        .support()
        .par_iter()
        .map(|&x| {
            let stay = stay_put.map_or(0.0, |s| s[x].min(mu[x]));
            let walk = mu[x] - stay;
            let mut out = vec![0.0; n];
            out[x] += stay;
            if walk > 0.0 {
                let region = barrier
                    .stopping_set(x)
                    .ok_or_else(|| Error::InvalidInput(format!("barrier has no region for source {x}")))?;
                let step: Vec<f64> = one_step_law(x, g).iter().map(|p| p * walk).collect();
                let law = hitting_law_from(&step, &region, g)?;
                for (o, w) in out.iter_mut().zip(law.weights()) {
                    *o += w;
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut total = vec![0.0; n];
    for p in &parts {
        for (t, w) in total.iter_mut().zip(p) {
            *t += w;
        }
    }
    GridMeasure::new(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, DomainSpec};

    #[test]
    fn split_recombines() {
        let mu = GridMeasure::new(vec![0.5, 0.5, 0.0]).unwrap();
        let nu = GridMeasure::new(vec![0.2, 0.3, 0.5]).unwrap();
        let s = stay_put_split(&mu, &nu).unwrap();
        assert!((s.common_mass - 0.5).abs() < 1e-15);
        for i in 0..3 {
            assert!((s.common[i] + s.mu_plus[i] - mu[i]).abs() < 1e-15);
            assert!((s.common[i] + s.nu_plus[i] - nu[i]).abs() < 1e-15);
        }
        let (a, b) = s.normalized_plus().unwrap();
        assert!((a.total() - 1.0).abs() < 1e-15 && (b.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_barrier_gives_exit_law_after_one_step() {
        // 1D, h = 0.25: from 0.5 the walk exits at 0 or 1 with probability 1/2 each.
        let g = build_grid(&DomainSpec::unit_box(1), 0.25).unwrap();
        let x = g.nearest_node(&[0.5]).unwrap();
        let b = Barrier::uniform(g.len(), vec![x], vec![false; g.len()]);
        let law = exact_stopped_law(&b, &GridMeasure::dirac(g.len(), x), &g, None).unwrap();
        assert!((law[g.nearest_node(&[0.0]).unwrap()] - 0.5).abs() < 1e-12);
        assert!((law[g.nearest_node(&[1.0]).unwrap()] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn source_inside_its_region_still_takes_a_step() {
        let g = build_grid(&DomainSpec::unit_box(1), 0.25).unwrap();
        let x = g.nearest_node(&[0.5]).unwrap();
        let b = Barrier::uniform(g.len(), vec![x], (0..g.len()).map(|i| g.is_interior(i)).collect());
        let law = exact_stopped_law(&b, &GridMeasure::dirac(g.len(), x), &g, None).unwrap();
        assert!((law[g.nearest_node(&[0.25]).unwrap()] - 0.5).abs() < 1e-12);
        assert!((law[g.nearest_node(&[0.75]).unwrap()] - 0.5).abs() < 1e-12);
        let stay = GridMeasure::dirac(g.len(), x).scaled(0.25);
        let law = exact_stopped_law(&b, &GridMeasure::dirac(g.len(), x), &g, Some(&stay)).unwrap();
        assert!((law[x] - 0.25).abs() < 1e-12);
    }
}
