//! Fixtures shared by the benchmarks.

use skorokhod_core::cost::{eval_cost, CostSpec};
use skorokhod_core::instances::{square_ring, Instance};
use skorokhod_core::{CostMatrix, ScalarField};

/// The ring instance with its cost matrix and a nonzero potential that vanishes on the boundary.
pub struct Fixture {
    pub inst: Instance,
    pub cost: CostMatrix,
    pub psi: ScalarField,
}

pub fn ring_fixture() -> Fixture {
    let inst = square_ring(CostSpec::Distance).expect("ring instance");
    let cost = eval_cost(&inst.cost, &inst.grid).expect("ring cost");
    let psi = ScalarField::from_fn(&inst.grid, |p| 0.1 * p.iter().map(|x| x * (1.0 - x)).product::<f64>());
    Fixture { inst, cost, psi }
}
