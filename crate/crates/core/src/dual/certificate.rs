use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{discrete_laplacian, exit_time_potential, Grid, ScalarField};

/// Slack on `psi <= 0`.
pub const CERT_SIGN_TOL: f64 = 1e-10;
/// Slack on `|psi| = 0` at boundary nodes.
pub const CERT_BOUNDARY_TOL: f64 = 1e-12;
/// Slack on `L psi <= D` and on `psi >= D u_O`.
pub const CERT_BOUND_TOL: f64 = 1e-8;

/// Membership test for the class of nonpositive, boundary-vanishing,
/// `D`-superharmonic potentials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BDCertificate {
    pub d: f64,
    pub max_psi: f64,
    pub max_boundary_abs: f64,
    /// `max_interior (L psi - D)_+`.
    pub max_laplacian_excess: f64,
    /// `min (psi - D u_O)`; nonnegative for members.
    pub min_lower_gap: f64,
    /// Discrete Dirichlet energy `h^{d-2} sum_edges (psi(a) - psi(b))^2`.
    pub energy: f64,
    /// `D^2 h^d sum |u_O|`, an upper bound on the energy of every member.
    pub energy_bound: f64,
    pub sign_ok: bool,
    pub boundary_ok: bool,
    pub laplacian_ok: bool,
    pub lower_bound_ok: bool,
}

impl BDCertificate {
    pub fn passes(&self) -> bool {
        self.sign_ok && self.boundary_ok && self.laplacian_ok && self.lower_bound_ok
    }

    /// Evaluates the certificate against a precomputed exit-time potential.
    pub fn evaluate(psi: &ScalarField, d: f64, g: &Grid, exit_potential: &ScalarField) -> Result<BDCertificate> {
        psi.check_len(g, "psi")?;
        let lap = discrete_laplacian(psi, g);
        let max_psi = psi.max();
        let max_boundary_abs = g.boundary_nodes().iter().map(|&b| psi[b].abs()).fold(0.0, f64::max);
        let max_laplacian_excess = g
            .interior_nodes()
            .iter()
            .map(|&i| (lap[i] - d).max(0.0))
            .fold(0.0, f64::max);
        let min_lower_gap = (0..g.len())
            .map(|i| psi[i] - d * exit_potential[i])
            .fold(f64::INFINITY, f64::min);
        let energy = dirichlet_energy(psi, g);
        let energy_bound = d * d * g.cell_volume() * exit_potential.values().iter().map(|v| v.abs()).sum::<f64>();
        Ok(BDCertificate {
            d,
            max_psi,
            max_boundary_abs,
            max_laplacian_excess,
            min_lower_gap,
            energy,
            energy_bound,
            sign_ok: max_psi <= CERT_SIGN_TOL,
            boundary_ok: max_boundary_abs <= CERT_BOUNDARY_TOL,
            laplacian_ok: max_laplacian_excess <= CERT_BOUND_TOL,
            lower_bound_ok: min_lower_gap >= -CERT_BOUND_TOL,
        })
    }
}

/// Certificate for `psi` with constant `d`.
pub fn certify(psi: &ScalarField, d: f64, g: &Grid) -> Result<BDCertificate> {
    BDCertificate::evaluate(psi, d, g, &exit_time_potential(g)?)
}

/// `h^{d-2} sum (psi(a) - psi(b))^2` over lattice edges with an interior endpoint.
pub fn dirichlet_energy(psi: &ScalarField, g: &Grid) -> f64 {
    let mut sum = 0.0;
    for i in 0..g.len() {
        // Positive-direction neighbors visit each edge once.
        for j in g.neighbors(i).iter().step_by(2).flatten() {
            if g.is_interior(i) || g.is_interior(*j) {
                sum += (psi[i] - psi[*j]).powi(2);
            }
        }
    }
    sum * g.h().powi(g.dim() as i32 - 2)
}
