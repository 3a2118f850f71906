//! Solve a resolved problem end to end: split off the stay-put mass, run the
//! LP oracle when the instance is small enough, maximize the dual, extract
//! the barrier and compute the law it embeds.

use serde::{Deserialize, Serialize};

use crate::config::Problem;
use crate::cost::{eval_cost, CostMatrix};
use crate::dual::{ascend, AscentOptions, DualState};
use crate::error::{Error, Result};
use crate::grid::{check_subharmonic_order, GridMeasure, SubharmonicOrder, SubharmonicWitness};
use crate::primal::{exact_stopped_law, extract_barrier, lp_oracle, stay_put_split, Barrier, StayPutSplit, TransportPlan};
use crate::tol::LP_INTERIOR_CAP;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub solver: AscentOptions,
    pub stay_put: bool,
    pub oracle: bool,
    /// Contact tolerance for the barrier.
    pub tol_contact: f64,
}

/// Everything one solve produces.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub cost: CostMatrix,
    pub split: Option<StayPutSplit>,
    /// Fraction of mass that walks (`1 - sum min(mu, nu)` with stay-put, else 1).
    pub walk_fraction: f64,
    /// Normalized marginals of the walking part; `None` when nothing walks.
    pub walk: Option<(GridMeasure, GridMeasure)>,
    /// LP optimum of the walking part.
    pub oracle: Option<TransportPlan>,
    /// Why the oracle did not run, if it was requested.
    pub oracle_skipped: Option<String>,
    pub state: Option<DualState>,
    pub barrier: Option<Barrier>,
    /// Full stopped law: stay-put mass plus the walking part's hitting law.
    pub exact_law: GridMeasure,
    pub stay_put_mass: f64,
    /// The ascent ran out of iterations; everything above comes from its last iterate.
    pub budget_exhausted: bool,
}

impl Outcome {
    /// Dual objective of the full problem (the stay-put part costs nothing).
    pub fn objective(&self) -> f64 {
        self.state.as_ref().map_or(0.0, |s| self.walk_fraction * s.objective)
    }

    /// LP value of the full problem.
    pub fn oracle_value(&self) -> Option<f64> {
        if self.walk.is_none() {
            return Some(0.0);
        }
        self.oracle.as_ref().map(|p| self.walk_fraction * p.cost)
    }

    /// `(primal - dual) / |primal|`, absolute when the primal value is zero.
    pub fn relative_gap(&self) -> Option<f64> {
        self.oracle_value().map(|p| {
            let gap = p - self.objective();
            if p.abs() > 1e-12 {
                gap / p.abs()
            } else {
                gap
            }
        })
    }
}

/// Runs the pipeline. The stay-put split only changes anything when the
/// marginals overlap.
pub fn solve(problem: &Problem, opts: &PipelineOptions) -> Result<Outcome> {
    let g = &problem.grid;
    let cost = eval_cost(&problem.cost, g)?;
    let n = g.len();

    let (split, walk_fraction, walk) = if opts.stay_put {
        let split = stay_put_split(&problem.mu, &problem.nu)?;
        let rest = 1.0 - split.common_mass;
        let walk = split.normalized_plus().filter(|_| rest > 1e-12);
        (Some(split), rest, walk)
    } else {
        (None, 1.0, Some((problem.mu.clone(), problem.nu.clone())))
    };
    let stay_measure = split.as_ref().map(|s| s.common.clone());
    let stay_put_mass = split.as_ref().map_or(0.0, |s| s.common_mass);

    let Some((mu_w, nu_w)) = walk.clone() else {
        // Everything stays put.
        let exact_law = stay_measure.unwrap_or_else(|| GridMeasure::zeros(n));
        return Ok(Outcome {
            cost,
            split,
            walk_fraction: 0.0,
            walk: None,
            oracle: None,
            oracle_skipped: None,
            state: None,
            barrier: None,
            exact_law,
            stay_put_mass,
            budget_exhausted: false,
        });
    };

    let mut oracle = None;
    let mut oracle_skipped = None;
    if opts.oracle {
        match lp_oracle(&mu_w, &nu_w, &cost, g) {
            Ok(p) => oracle = Some(p),
            Err(Error::InstanceTooLarge { interior, cap }) => {
                oracle_skipped = Some(format!("{interior} interior nodes exceed the LP cap of {cap}"));
            }
            Err(e) => return Err(e),
        }
    }

    let mut solver = opts.solver.clone();
    if let Some(p) = &oracle {
        solver.primal_value = Some(p.cost);
    }
    let (state, budget_exhausted) = match ascend(&mu_w, &nu_w, &problem.cost, g, &solver) {
        Ok(s) => (s, false),
        Err(Error::BudgetExhausted(s)) => (*s, true),
        Err(e) => return Err(e),
    };
    let barrier = extract_barrier(&state.psi, &state.table, &cost, opts.tol_contact)?;

    let walk_law = exact_stopped_law(&barrier, &mu_w, g, None)?;
    let mut full = walk_law.scaled(walk_fraction).weights().to_vec();
    if let Some(s) = &stay_measure {
        for (f, c) in full.iter_mut().zip(s.weights()) {
            *f += c;
        }
    }
    Ok(Outcome {
        cost,
        split,
        walk_fraction,
        walk,
        oracle,
        oracle_skipped,
        state: Some(state),
        barrier: Some(barrier),
        exact_law: GridMeasure::new(full)?,
        stay_put_mass,
        budget_exhausted,
    })
}

/// Witness of infeasibility, or `None` when the pair is feasible or too
/// large for the LP.
pub fn infeasibility_witness(problem: &Problem) -> Result<Option<SubharmonicWitness>> {
    if problem.grid.interior_nodes().len() > LP_INTERIOR_CAP {
        return Ok(None);
    }
    match check_subharmonic_order(&problem.mu, &problem.nu, &problem.grid)? {
        SubharmonicOrder::Infeasible(w) => Ok(Some(w)),
        SubharmonicOrder::Feasible(_) => Ok(None),
    }
}
