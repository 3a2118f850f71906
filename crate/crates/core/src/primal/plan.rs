use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::grid::{neighbor_mean, Grid, GridMeasure, ScalarField};
use crate::lp::{solve_dual_lp, solve_occupation_lp, solve_witness_lp, Occupation};
use crate::tol::LP_INTERIOR_CAP;

/// Relative primal-dual agreement required of the LP oracle.
pub const LP_CERT_TOL: f64 = 1e-8;

/// A randomized stopping rule given by its per-source stopped laws and
/// occupation densities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransportPlan {
    pub sources: Vec<usize>,
    pub source_mass: Vec<f64>,
    /// `pi_x`, unit mass per source.
    pub stopped: Vec<Vec<f64>>,
    /// `m_x`: expected occupation time per unit cell volume, zero off the interior.
    pub occupation: Vec<Vec<f64>>,
    /// `sum_x mu(x) sum_y c(x, y) pi_x(y)`.
    pub cost: f64,
    /// Optimal value of the dual LP, when the plan came from the oracle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_value: Option<f64>,
    /// Optimal dual potential from the LP (not normalized on the boundary).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_psi: Option<ScalarField>,
}

impl TransportPlan {
    pub(crate) fn from_occupation(occ: &Occupation, g: &Grid, cost: &CostMatrix) -> Result<TransportPlan> {
        let scale = g.step_time() / g.cell_volume();
        let mut stopped = Vec::with_capacity(occ.sources.len());
        let mut occupation = Vec::with_capacity(occ.sources.len());
        for k in 0..occ.sources.len() {
            let m = occ.mass[k];
            let p: Vec<f64> = occ.stopped_mass(g, k).iter().map(|v| (v / m).max(0.0)).collect();
            stopped.push(p);
            occupation.push(occ.visits[k].iter().map(|v| v / m * scale).collect());
        }
        let mut plan = TransportPlan {
            sources: occ.sources.clone(),
            source_mass: occ.mass.clone(),
            stopped,
            occupation,
            cost: 0.0,
            dual_value: None,
            dual_psi: None,
        };
        plan.cost = plan.cost_under(cost);
        Ok(plan)
    }

    /// Builds a plan from stopped laws alone, recovering each occupation
    /// density from the balance equation `pi_x = delta_x + L* m_x`.
    pub fn from_stopped_laws(
        g: &Grid,
        sources: Vec<usize>,
        source_mass: Vec<f64>,
        stopped: Vec<Vec<f64>>,
        cost: &CostMatrix,
    ) -> Result<TransportPlan> {
        if sources.len() != source_mass.len() || sources.len() != stopped.len() {
            return Err(Error::InvalidInput("plan parts have different lengths".into()));
        }
        let mut occupation = Vec::with_capacity(sources.len());
        for (&x, pi) in sources.iter().zip(&stopped) {
            // (pi - delta_x) restricted to the interior equals -(I - P) v, so
            // v solves (2d I - adjacency) v = 2d (delta_x - pi) on the interior.
            let free: Vec<bool> = (0..g.len()).map(|i| g.is_interior(i)).collect();
            let two_d = (2 * g.dim()) as f64;
            let b: Vec<f64> = (0..g.len())
                .map(|i| two_d * ((i == x) as u8 as f64 - pi[i]))
                .collect();
            let v = crate::grid::linalg::solve_free(g, &free, &b, None)?;
            let scale = g.step_time() / g.cell_volume();
            occupation.push(v.iter().map(|w| w * scale).collect());
        }
        let mut plan = TransportPlan {
            sources,
            source_mass,
            stopped,
            occupation,
            cost: 0.0,
            dual_value: None,
            dual_psi: None,
        };
        plan.cost = plan.cost_under(cost);
        Ok(plan)
    }

    pub fn cost_under(&self, cost: &CostMatrix) -> f64 {
        self.sources
            .iter()
            .zip(&self.source_mass)
            .zip(&self.stopped)
            .map(|((&x, m), pi)| m * pi.iter().enumerate().map(|(y, p)| p * cost.get(x, y)).sum::<f64>())
            .sum()
    }

    /// `sum_x mu(x) pi_x`.
    pub fn marginal(&self) -> Vec<f64> {
        let n = self.stopped.first().map_or(0, Vec::len);
        let mut out = vec![0.0; n];
        for (m, pi) in self.source_mass.iter().zip(&self.stopped) {
            for (o, p) in out.iter_mut().zip(pi) {
                *o += m * p;
            }
        }
        out
    }

    pub fn marginal_error(&self, nu: &GridMeasure) -> f64 {
        self.marginal().iter().zip(nu.weights()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// `max |pi_x - delta_x - L* m_x|` over sources and nodes, with the
    /// occupation density converted back to visit counts.
    pub fn balance_residual(&self, g: &Grid) -> f64 {
        let to_visits = g.cell_volume() / g.step_time();
        let q = 1.0 / (2 * g.dim()) as f64;
        let mut worst: f64 = 0.0;
        for ((&x, pi), m) in self.sources.iter().zip(&self.stopped).zip(&self.occupation) {
            let mut lhs: Vec<f64> = pi.clone();
            lhs[x] -= 1.0;
            for &z in g.interior_nodes() {
                let v = m[z] * to_visits;
                lhs[z] += v;
                for y in g.interior_neighbors(z) {
                    lhs[y] -= q * v;
                }
            }
            worst = lhs.iter().fold(worst, |w, v| w.max(v.abs()));
        }
        worst
    }

    /// `sum_x mu(x) sum_z m_x(z) h^d`, the mean physical stopping time.
    pub fn mean_stopping_time(&self, g: &Grid) -> f64 {
        let vol = g.cell_volume();
        self.source_mass
            .iter()
            .zip(&self.occupation)
            .map(|(mass, m)| mass * m.iter().sum::<f64>() * vol)
            .sum()
    }

    /// `(source, target, mass)` with `mu(x) pi_x(y) > threshold`.
    pub fn support(&self, threshold: f64) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for ((&x, m), pi) in self.sources.iter().zip(&self.source_mass).zip(&self.stopped) {
            for (y, p) in pi.iter().enumerate() {
                let w = m * p;
                if w > threshold {
                    out.push((x, y, w));
                }
            }
        }
        out
    }

    /// Moves `mass` of stopped mass from `(x1, y1)` and `(x2, y2)` to
    /// `(x1, y2)` and `(x2, y1)`. The marginal is unchanged; occupations are
    /// recomputed from the balance equation, so the result need not be a
    /// feasible plan. Used to build counter-plans for the optimality checks.
    pub fn swap_targets(
        &self,
        (x1, y1): (usize, usize),
        (x2, y2): (usize, usize),
        mass: f64,
        g: &Grid,
        cost: &CostMatrix,
    ) -> Result<TransportPlan> {
        let (Some(k1), Some(k2)) = (self.source_index(x1), self.source_index(x2)) else {
            return Err(Error::InvalidInput("swap sources are not in the plan".into()));
        };
        let (m1, m2) = (self.source_mass[k1], self.source_mass[k2]);
        if k1 == k2 || mass <= 0.0 || mass > m1 * self.stopped[k1][y1] || mass > m2 * self.stopped[k2][y2] {
            return Err(Error::InvalidInput("swap mass exceeds the available stopped mass".into()));
        }
        let mut stopped = self.stopped.clone();
        stopped[k1][y1] -= mass / m1;
        stopped[k1][y2] += mass / m1;
        stopped[k2][y2] -= mass / m2;
        stopped[k2][y1] += mass / m2;
        TransportPlan::from_stopped_laws(g, self.sources.clone(), self.source_mass.clone(), stopped, cost)
    }

    pub fn source_index(&self, x: usize) -> Option<usize> {
        self.sources.iter().position(|&s| s == x)
    }

    /// Writes `source,node,stopped_mass,occupation` rows (stopped mass weighted by `mu`).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["source", "node", "stopped_mass", "occupation"])?;
        for (((&x, m), pi), occ) in self.sources.iter().zip(&self.source_mass).zip(&self.stopped).zip(&self.occupation) {
            for y in 0..pi.len() {
                if pi[y] != 0.0 || occ[y] != 0.0 {
                    w.write_record(&[
                        x.to_string(),
                        y.to_string(),
                        format!("{:e}", m * pi[y]),
                        format!("{:e}", occ[y]),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Exact minimizer of the expected cost over all randomized stopping rules
/// of the walk from `mu` with stopped law `nu`, by the occupation-measure LP.
/// The value is certified against the dual LP.
pub fn lp_oracle(mu: &GridMeasure, nu: &GridMeasure, cost: &CostMatrix, g: &Grid) -> Result<TransportPlan> {
    mu.check_probability(g, "mu")?;
    nu.check_probability(g, "nu")?;
    if cost.len() != g.len() {
        return Err(Error::InvalidInput("cost matrix does not match the grid".into()));
    }
    let n_int = g.interior_nodes().len();
    if n_int > LP_INTERIOR_CAP {
        return Err(Error::InstanceTooLarge { interior: n_int, cap: LP_INTERIOR_CAP });
    }
    let sources = mu.support();
    let rows: Vec<&[f64]> = sources.iter().map(|&x| cost.row(x)).collect();
    // Cost change of one more step from z: mean of c(x, .) over the neighbors minus c(x, z).
    let coef = |k: usize, z: usize| neighbor_mean(rows[k], g, z) - rows[k][z];
    let Some(occ) = solve_occupation_lp(g, mu, nu, &coef)? else {
        let (gap, _) = solve_witness_lp(g, mu, nu)?;
        return Err(Error::Infeasible { gap });
    };
    let mut plan = TransportPlan::from_occupation(&occ, g, cost)?;

    let (dual_value, psi) = solve_dual_lp(g, mu, nu, &|x, y| cost.get(x, y))?;
    let scale = plan.cost.abs().max(1.0);
    if !((plan.cost - dual_value).abs() <= LP_CERT_TOL * scale) {
        return Err(Error::LpNumericalFailure(format!(
            "primal {} and dual {} disagree beyond {LP_CERT_TOL:e}",
            plan.cost, dual_value
        )));
    }
    plan.dual_value = Some(dual_value);
    plan.dual_psi = Some(ScalarField::new(psi));
    Ok(plan)
}
