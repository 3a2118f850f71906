use std::io::Write;

use serde::{Deserialize, Serialize};

use super::certificate::BDCertificate;
use super::{improve_with_table, objective_from_table, require_subharmonic, stopped_marginal};
use crate::cost::{eval_cost, CostSpec};
use crate::error::{Error, Result};
use crate::grid::{check_subharmonic_order, exit_time_potential, solve_poisson, Grid, GridMeasure, ScalarField, SubharmonicOrder};
use crate::pde::{value_table_for, ObstacleOptions, ValueTable};
use crate::tol::{LP_INTERIOR_CAP, TOL_PSOR};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct AscentOptions {
    pub max_iter: usize,
    /// Stop when `||nu - A(psi)||_1` falls to this.
    pub grad_tol: f64,
    /// Stop when `(primal - objective) / |primal|` falls to this; needs `primal_value`.
    pub gap_tol: f64,
    pub primal_value: Option<f64>,
    /// Step along `(-L)^{-1}(nu - A) / h^d` rather than the raw supergradient.
    pub preconditioned: bool,
    pub initial_step: f64,
    pub max_halvings: usize,
    pub obstacle: ObstacleOptions,
    /// Run the subharmonic-order LP first (skipped above the LP size cap).
    pub check_order: bool,
}

impl Default for AscentOptions {
    fn default() -> Self {
        AscentOptions {
            max_iter: 500,
            grad_tol: 1e-8,
            gap_tol: 1e-8,
            primal_value: None,
            preconditioned: true,
            initial_step: 1.0,
            max_halvings: 20,
            obstacle: ObstacleOptions::default(),
            check_order: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Gradient,
    Gap,
    /// Every halving of the step lowered the objective.
    StepFailure,
    Budget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub objective: f64,
    pub residual: f64,
    pub step: f64,
    pub halvings: usize,
    pub max_psi: f64,
    pub min_lower_gap: f64,
    pub max_laplacian_excess: f64,
    pub energy: f64,
    pub gap: Option<f64>,
}

/// Snapshot of the ascent at its best iterate.
#[derive(Debug, Clone)]
pub struct DualState {
    pub psi: ScalarField,
    /// `J_psi` over the sources in `supp mu`.
    pub table: ValueTable,
    pub objective: f64,
    /// `sum_x mu(x) rho_x`, the stopped marginal of the current contact sets.
    pub marginal: GridMeasure,
    /// `||nu - marginal||_1`.
    pub residual: f64,
    pub certificate: BDCertificate,
    pub log: Vec<IterationRecord>,
    pub stop: StopReason,
}

impl DualState {
    /// Iteration log as CSV.
    pub fn write_log_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "iter",
            "objective",
            "residual",
            "step",
            "halvings",
            "max_psi",
            "min_lower_gap",
            "max_laplacian_excess",
            "energy",
            "gap",
        ])?;
        for r in &self.log {
            w.write_record(&[
                r.iter.to_string(),
                format!("{:e}", r.objective),
                format!("{:e}", r.residual),
                format!("{:e}", r.step),
                r.halvings.to_string(),
                format!("{:e}", r.max_psi),
                format!("{:e}", r.min_lower_gap),
                format!("{:e}", r.max_laplacian_excess),
                format!("{:e}", r.energy),
                r.gap.map(|v| format!("{v:e}")).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Relative gap to a primal value (absolute when the primal value is zero).
    pub fn relative_gap(&self, primal: f64) -> f64 {
        relative_gap(primal, self.objective)
    }
}

fn relative_gap(primal: f64, dual: f64) -> f64 {
    let gap = primal - dual;
    if primal.abs() > 1e-12 {
        gap / primal.abs()
    } else {
        gap
    }
}

struct Point {
    psi: ScalarField,
    table: ValueTable,
    objective: f64,
    marginal: GridMeasure,
    residual: f64,
}

/// Evaluates the objective and its supergradient at `psi`.
fn evaluate(
    psi: ScalarField,
    mu: &GridMeasure,
    nu: &GridMeasure,
    cost: &crate::cost::CostMatrix,
    g: &Grid,
    opts: &ObstacleOptions,
    warm: Option<&ValueTable>,
) -> Result<Point> {
    let table = value_table_for(&psi, cost, g, &mu.support(), opts, warm)?;
    let objective = objective_from_table(&psi, mu, nu, &table);
    let marginal = stopped_marginal(mu, &table, g)?;
    let residual = marginal.signed_diff(nu).iter().map(|v| v.abs()).sum();
    Ok(Point { psi, table, objective, marginal, residual })
}

/// Supergradient ascent on the dual, kept feasible by the improvement operators.
///
/// Each step moves along `phi` with `L phi = -(nu - A(psi)) / h^d`,
/// `phi = 0` on the boundary, then applies [`super::improve`]. A step is
/// accepted once the objective does not drop by more than `10 tol_psor`,
/// halving from `initial_step`. Returns the best iterate; running out of
/// iterations or steps yields [`Error::BudgetExhausted`] carrying it.
pub fn ascend(mu: &GridMeasure, nu: &GridMeasure, spec: &CostSpec, g: &Grid, opts: &AscentOptions) -> Result<DualState> {
    mu.check_probability(g, "mu")?;
    nu.check_probability(g, "nu")?;
    let cost = eval_cost(spec, g)?;
    require_subharmonic(&cost)?;
    if opts.check_order && g.interior_nodes().len() <= LP_INTERIOR_CAP {
        if let SubharmonicOrder::Infeasible(w) = check_subharmonic_order(mu, nu, g)? {
            return Err(Error::NotInSubharmonicOrder { gap: w.gap });
        }
    }
    let d = cost.lap_max();
    let exit = exit_time_potential(g)?;
    let vol = g.cell_volume();
    let accept_slack = 10.0 * TOL_PSOR;

    let mut cur = evaluate(ScalarField::zeros(g.len()), mu, nu, &cost, g, &opts.obstacle, None)?;
    let mut log = Vec::new();
    let record = |it: usize, p: &Point, step: f64, halvings: usize| -> Result<IterationRecord> {
        let cert = BDCertificate::evaluate(&p.psi, d, g, &exit)?;
        Ok(IterationRecord {
            iter: it,
            objective: p.objective,
            residual: p.residual,
            step,
            halvings,
            max_psi: cert.max_psi,
            min_lower_gap: cert.min_lower_gap,
            max_laplacian_excess: cert.max_laplacian_excess,
            energy: cert.energy,
            gap: opts.primal_value.map(|v| relative_gap(v, p.objective)),
        })
    };
    log.push(record(0, &cur, 0.0, 0)?);
    let mut best = (cur.psi.clone(), cur.table.clone(), cur.objective, cur.marginal.clone(), cur.residual);

    let mut stop = StopReason::Budget;
    for it in 1..=opts.max_iter {
        if cur.residual <= opts.grad_tol {
            stop = StopReason::Gradient;
            break;
        }
        if let Some(p) = opts.primal_value {
            if relative_gap(p, best.2) <= opts.gap_tol {
                stop = StopReason::Gap;
                break;
            }
        }
        let grad = nu.signed_diff(&cur.marginal);
        let dir = if opts.preconditioned {
            let rhs = ScalarField::new(grad.iter().map(|v| -v / vol).collect());
            solve_poisson(&rhs, &ScalarField::zeros(g.len()), g)?
        } else {
            ScalarField::new((0..g.len()).map(|i| if g.is_interior(i) { grad[i] } else { 0.0 }).collect())
        };

        let mut step = opts.initial_step;
        let mut accepted = None;
        for halvings in 0..=opts.max_halvings {
            let imp = improve_with_table(&cur.psi.axpy(step, &dir), &cost, g, &opts.obstacle)?;
            let trial = evaluate(imp.psi, mu, nu, &cost, g, &opts.obstacle, Some(&imp.table))?;
            if trial.objective >= cur.objective - accept_slack {
                accepted = Some((trial, halvings));
                break;
            }
            step *= 0.5;
        }
        let Some((next, halvings)) = accepted else {
            stop = StopReason::StepFailure;
            break;
        };
        cur = next;
        log.push(record(it, &cur, step, halvings)?);
        if cur.objective > best.2 {
            best = (cur.psi.clone(), cur.table.clone(), cur.objective, cur.marginal.clone(), cur.residual);
        }
    }

    let certificate = BDCertificate::evaluate(&best.0, d, g, &exit)?;
    let state = DualState {
        psi: best.0,
        table: best.1,
        objective: best.2,
        marginal: best.3,
        residual: best.4,
        certificate,
        log,
        stop,
    };
    match stop {
        StopReason::Gradient | StopReason::Gap => Ok(state),
        StopReason::Budget | StopReason::StepFailure => Err(Error::BudgetExhausted(Box::new(state))),
    }
}
