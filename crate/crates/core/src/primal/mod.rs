//! Primal side: the exact LP oracle over randomized stopping rules, barrier
//! extraction from a dual potential, exact and simulated stopped laws, and
//! optimality checks of a plan against a potential.

mod barrier;
mod plan;
mod sim;
mod verify;

pub use barrier::{exact_stopped_law, extract_barrier, stay_put_split, Barrier, StayPutSplit};
pub use plan::{lp_oracle, TransportPlan, LP_CERT_TOL};
pub use sim::{simulate_hitting, SimOptions, SimResult};
pub use verify::{verify_optimality, SUPPORT_MASS, MonotonicityViolation, OptimalityReport, VerifyOptions};

use crate::grid::{Grid, GridMeasure};

/// `(sum |y|^2 nu - sum |x|^2 mu) / 2d`: the mean physical stopping time of
/// every embedding of `nu` from `mu` that stops before leaving the domain.
pub fn mean_time_identity(mu: &GridMeasure, nu: &GridMeasure, g: &Grid) -> f64 {
    let second = |m: &GridMeasure| -> f64 {
        m.support().iter().map(|&i| m[i] * g.coord(i).iter().map(|v| v * v).sum::<f64>()).sum()
    };
    (second(nu) - second(mu)) / (2 * g.dim()) as f64
}
