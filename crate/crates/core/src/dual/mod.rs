//! The dual problem: maximize `sum psi nu - sum_x mu(x) J_psi(x, x)` over
//! nonpositive, boundary-vanishing, `D`-superharmonic `psi`.

mod ascent;
mod certificate;

use rayon::prelude::*;

pub use ascent::{ascend, AscentOptions, DualState, IterationRecord, StopReason};
pub use certificate::{certify, dirichlet_energy, BDCertificate, CERT_BOUNDARY_TOL, CERT_BOUND_TOL, CERT_SIGN_TOL};

use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::tol::TOL_CONTACT;
use crate::grid::{neighbor_mean, Grid, GridMeasure, ScalarField};
use crate::pde::{hitting_law_from, one_step_law, stopped_distribution, superharmonic_envelope, value_table_for, ObstacleOptions, ValueTable};

/// Least discrete Laplacian in `y` tolerated as "subharmonic" (round-off).
pub const SUBHARMONIC_TOL: f64 = 1e-9;

/// `sum psi nu - sum_x mu(x) J(x, x)` from an existing value table.
pub fn objective_from_table(psi: &ScalarField, mu: &GridMeasure, nu: &GridMeasure, table: &ValueTable) -> f64 {
    psi.integrate(nu) - mu.support().iter().map(|&x| mu[x] * table.value(x, x)).sum::<f64>()
}

/// Dual objective at `psi`. `psi` must vanish on the boundary.
pub fn dual_objective(psi: &ScalarField, mu: &GridMeasure, nu: &GridMeasure, cost: &CostMatrix, g: &Grid) -> Result<f64> {
    let table = value_table_for(psi, cost, g, &mu.support(), &ObstacleOptions::default(), None)?;
    Ok(objective_from_table(psi, mu, nu, &table))
}

/// `A(psi) = sum_x mu(x) rho_x`, where `rho_x` is the law of the walk from `x`
/// stopped on the contact set of row `x`. This is a supergradient of
/// `psi -> sum_x mu(x) J_psi(x, x)`.
///
/// When `x` touches its obstacle but `J(x, .)` is harmonic at `x` within
/// `tol_contact`, stopping at time zero and continuing are both optimal; the
/// walk then takes its first step and stops on the contact set less `x`.
pub fn stopped_marginal(mu: &GridMeasure, table: &ValueTable, g: &Grid) -> Result<GridMeasure> {
    let parts: Vec<GridMeasure> = mu
        .support()
        .par_iter()
        .map(|&x| {
            let active = table.active(x);
            let j = table.values(x);
            let rho = if active[x] && g.is_interior(x) && j[x] - neighbor_mean(j, g, x) <= TOL_CONTACT {
                let mut away = active.to_vec();
                away[x] = false;
                hitting_law_from(&one_step_law(x, g), &away, g)?
            } else {
                stopped_distribution(x, active, g)?
            };
            Ok(rho.scaled(mu[x]))
        })
        .collect::<Result<_>>()?;
    let mut total = vec![0.0; g.len()];
    for p in &parts {
        for (t, w) in total.iter_mut().zip(p.weights()) {
            *t += w;
        }
    }
    GridMeasure::new(total)
}

fn require_subharmonic(cost: &CostMatrix) -> Result<()> {
    let m = cost.lap_min();
    if m < -SUBHARMONIC_TOL {
        return Err(Error::SubharmonicityRequired { min_laplacian: m });
    }
    Ok(())
}

/// Result of the two improvement operators.
#[derive(Debug, Clone)]
pub struct Improvement {
    /// `psi - psi^SH`.
    pub psi1: ScalarField,
    /// `min_z J_{psi1}(z, .) + c(z, .)`.
    pub psi: ScalarField,
    /// `J_{psi1}` over all sources; equals `J_psi` up to solver tolerance.
    pub table: ValueTable,
}

/// Applies both improvement operators, keeping the intermediate value table.
pub fn improve_with_table(psi: &ScalarField, cost: &CostMatrix, g: &Grid, opts: &ObstacleOptions) -> Result<Improvement> {
    require_subharmonic(cost)?;
    psi.check_len(g, "psi")?;
    let env = superharmonic_envelope(psi, g)?;
    let mut psi1 = psi.sub(&env.u);
    for &b in g.boundary_nodes() {
        psi1[b] = 0.0;
    }
    let all: Vec<usize> = (0..g.len()).collect();
    let table = value_table_for(&psi1, cost, g, &all, opts, None)?;
    let n = g.len();
    let mut out: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|y| (0..n).map(|z| table.value(z, y) + cost.get(z, y)).fold(f64::INFINITY, f64::min))
        .collect();
    // On the boundary every row equals -c, so the minimum is zero up to round-off.
    for &b in g.boundary_nodes() {
        out[b] = 0.0;
    }
    Ok(Improvement { psi1, psi: ScalarField::new(out), table })
}

/// `Improvement2(Improvement1(psi))`: never lowers the dual objective when
/// `mu` precedes `nu`, and lands in the certified class with `D = D_c`.
pub fn improve(psi: &ScalarField, cost: &CostMatrix, g: &Grid) -> Result<ScalarField> {
    Ok(improve_with_table(psi, cost, g, &ObstacleOptions::default())?.psi)
}
