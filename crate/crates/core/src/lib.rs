//! Solver and verification harness for optimal stopping of a lattice random
//! walk against subharmonic costs: the discrete optimal Skorokhod embedding.

pub mod config;
pub mod cost;
pub mod dual;
pub mod error;
pub mod grid;
pub mod instances;
pub(crate) mod lp;
pub mod pde;
pub mod pipeline;
pub mod primal;
pub mod tol;

pub use error::{Error, Result};
pub use config::{Problem, RunConfig};
pub use cost::{CostMatrix, CostSpec};
pub use dual::{BDCertificate, DualState};
pub use grid::{DomainSpec, Grid, GridMeasure, ScalarField};
pub use pde::ValueTable;
pub use primal::{Barrier, TransportPlan};
