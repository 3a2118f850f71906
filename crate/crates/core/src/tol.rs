//! Default tolerances and budgets shared by every solver.

/// Relative residual accepted from linear solves.
pub const TOL_LIN: f64 = 1e-10;

/// Residual the conjugate-gradient loop aims for before falling back to [`TOL_LIN`].
pub const TOL_LIN_TARGET: f64 = 1e-13;

/// Sup-norm update at which projected SOR stops; also the complementarity tolerance.
pub const TOL_PSOR: f64 = 1e-9;

/// Slack below which a node counts as touching the obstacle (cost units).
pub const TOL_CONTACT: f64 = 1e-6;

/// Slack allowed in the stop-go monotonicity inequality (cost units).
pub const TOL_MONO: f64 = 1e-6;

/// Default relaxation factor for projected SOR.
pub const PSOR_OMEGA: f64 = 1.5;

/// Sweep budget per obstacle solve.
pub const PSOR_BUDGET: usize = 100_000;

/// Largest interior node count accepted by the LP oracle.
pub const LP_INTERIOR_CAP: usize = 300;

/// Probability measures must sum to one within this.
pub const MASS_TOL: f64 = 1e-12;

/// `psi` must vanish on the boundary within this.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Step cap for a single simulated path.
pub const PATH_STEP_CAP: u64 = 10_000_000;
