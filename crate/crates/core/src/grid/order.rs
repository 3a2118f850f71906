use serde::{Deserialize, Serialize};

use super::{discrete_laplacian, Grid, GridMeasure, ScalarField};
use crate::error::{Error, Result};
use crate::lp::{solve_occupation_lp, solve_witness_lp};
use crate::tol::LP_INTERIOR_CAP;

/// Separation below which the witness LP is read as "no separating function".
const WITNESS_TOL: f64 = 1e-9;

/// Occupation measures showing that `nu` is a stopped law of the walk from `mu`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OccupationCertificate {
    pub sources: Vec<usize>,
    /// Stopped law `pi_x` per source, unit mass each.
    pub stopped: Vec<GridMeasure>,
    /// Expected occupation-time density `m_x` per source (physical time / h^d).
    pub occupation: Vec<ScalarField>,
    /// `max_y |sum_x mu(x) pi_x(y) - nu(y)|`.
    pub marginal_error: f64,
}

/// Discrete subharmonic `w` (`Lw >= 0`, `|w|` about 1) with `sum w mu > sum w nu`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubharmonicWitness {
    pub w: ScalarField,
    /// `sum w (mu - nu)`, positive.
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SubharmonicOrder {
    Feasible(OccupationCertificate),
    Infeasible(SubharmonicWitness),
}

impl SubharmonicOrder {
    pub fn is_feasible(&self) -> bool {
        matches!(self, SubharmonicOrder::Feasible(_))
    }
}

/// Decides whether `nu` can be reached from `mu` by stopping the walk.
///
/// A positive witness LP optimum proves infeasibility; otherwise the
/// occupation LP produces the certificate.
pub fn check_subharmonic_order(mu: &GridMeasure, nu: &GridMeasure, g: &Grid) -> Result<SubharmonicOrder> {
    mu.check_probability(g, "mu")?;
    nu.check_probability(g, "nu")?;
    if g.interior_nodes().len() > LP_INTERIOR_CAP {
        return Err(Error::InstanceTooLarge { interior: g.interior_nodes().len(), cap: LP_INTERIOR_CAP });
    }
    let (gap, w) = solve_witness_lp(g, mu, nu)?;
    if gap > WITNESS_TOL {
        let w = repair_witness(g, w);
        let gap = w.integrate(mu) - w.integrate(nu);
        if gap > WITNESS_TOL {
            return Ok(SubharmonicOrder::Infeasible(SubharmonicWitness { w, gap }));
        }
    }

    let occ = solve_occupation_lp(g, mu, nu, &|_, _| 0.0)?
        .ok_or_else(|| Error::LpNumericalFailure("witness LP found no separation but occupation LP is infeasible".into()))?;
    let mut total = vec![0.0; g.len()];
    let mut stopped = Vec::with_capacity(occ.sources.len());
    let mut occupation = Vec::with_capacity(occ.sources.len());
    let scale = g.step_time() / g.cell_volume();
    for k in 0..occ.sources.len() {
        let p = occ.stopped_mass(g, k);
        for (t, v) in total.iter_mut().zip(&p) {
            *t += v;
        }
        let m = occ.mass[k];
        stopped.push(GridMeasure::from_signed(p.iter().map(|v| v / m).collect(), 1e-8)?);
        occupation.push(ScalarField::new(occ.visits[k].iter().map(|v| v / m * scale).collect()));
    }
    let marginal_error = total.iter().zip(nu.weights()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(SubharmonicOrder::Feasible(OccupationCertificate {
        sources: occ.sources,
        stopped,
        occupation,
        marginal_error,
    }))
}

/// The simplex leaves `Lw` slightly negative; adding a multiple of `|y|^2`
/// (whose discrete Laplacian is exactly `2d`) removes the defect.
fn repair_witness(g: &Grid, w: Vec<f64>) -> ScalarField {
    let w = ScalarField::new(w);
    let worst = discrete_laplacian(&w, g).min().min(0.0);
    if worst == 0.0 {
        return w;
    }
    let eps = -2.0 * worst / (2 * g.dim()) as f64;
    let anchor = g.domain().anchor();
    ScalarField::new(
        (0..g.len())
            .map(|i| {
                let r2: f64 = g.coord(i).iter().zip(&anchor).map(|(a, b)| (a - b) * (a - b)).sum();
                w[i] + eps * r2
            })
            .collect(),
    )
}
