//! Obstacle problems behind the value function `J_psi`, hitting laws of the
//! walk, and inf-convolution.

mod hitting;
mod infconv;
mod obstacle;
mod value;

pub use hitting::{hitting_law_from, one_step_law, stopped_distribution};
pub use infconv::inf_convolution;
pub use obstacle::{
    complementarity_residual, obstacle_solve, obstacle_solve_with, superharmonic_envelope, ObstacleOptions,
    ObstacleSolution,
};
pub use value::{value_table, value_table_for, ValueTable};
