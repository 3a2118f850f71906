use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::barrier::{extract_barrier, Barrier};
use super::plan::TransportPlan;
use crate::cost::CostMatrix;
use crate::dual::objective_from_table;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridMeasure, ScalarField};
use crate::pde::{hitting_law_from, one_step_law, ValueTable};
use crate::tol::{TOL_CONTACT, TOL_MONO};

/// Per-source stopped or occupation mass below this is treated as absent
/// when building support pairs; LP plans carry round-off near `1e-12`.
pub const SUPPORT_MASS: f64 = 1e-8;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyOptions {
    pub tol_contact: f64,
    pub tol_mono: f64,
    /// Quadruples sampled for the monotonicity check.
    pub samples: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { tol_contact: TOL_CONTACT, tol_mono: TOL_MONO, samples: 10_000, seed: 0 }
    }
}

/// A stop-go pair that breaks the monotonicity inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityViolation {
    /// Source stopped at `y`.
    pub stopped_source: usize,
    /// Source whose path passes through `y` and continues.
    pub going_source: usize,
    pub y: usize,
    /// `c(x, y) + E c(x', B) - c(x', y) - E c(x, B)`, positive when violated.
    pub excess: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimalityReport {
    /// `sum mu(x) pi_x(y)` over pairs with slack `J - psi + c > tol_contact`.
    pub off_contact_mass: f64,
    pub plan_cost: f64,
    pub dual_objective: f64,
    /// `plan_cost - dual_objective`.
    pub duality_gap: f64,
    pub relative_gap: f64,
    /// Number of stop-go pairs `(x, y), (x', y)` available.
    pub stop_go_pairs: usize,
    pub samples_checked: usize,
    /// Largest monotonicity excess over the checked quadruples.
    pub max_excess: Option<f64>,
    pub violations: Vec<MonotonicityViolation>,
    pub contact_ok: bool,
    pub monotone: bool,
}

impl OptimalityReport {
    pub fn passes(&self) -> bool {
        self.contact_ok && self.monotone
    }
}

/// Checks a plan against a dual potential: complementary slackness, the
/// duality gap, and a sampled stop-go monotonicity test.
///
/// `table` must carry a row for every source of the plan. The continuation
/// from `y` of a path started at `x'` is one walk step followed by the
/// hitting law of `R_{x'} \ {x'}` or the boundary, with `R` extracted from
/// `(psi, table)` at `tol_contact`.
pub fn verify_optimality(
    plan: &TransportPlan,
    psi: &ScalarField,
    table: &ValueTable,
    cost: &CostMatrix,
    g: &Grid,
    opts: &VerifyOptions,
) -> Result<OptimalityReport> {
    let n = g.len();
    if psi.len() != n || table.len() != n || cost.len() != n {
        return Err(Error::InvalidInput("verification inputs disagree in size".into()));
    }
    if let Some(&x) = plan.sources.iter().find(|&&x| !table.has_source(x)) {
        return Err(Error::InvalidInput(format!("value table has no row for source {x}")));
    }

    let mut off_contact_mass = 0.0;
    for ((&x, m), pi) in plan.sources.iter().zip(&plan.source_mass).zip(&plan.stopped) {
        let j = table.values(x);
        let c = cost.row(x);
        for y in 0..n {
            if pi[y] > 0.0 && j[y] - psi[y] + c[y] > opts.tol_contact {
                off_contact_mass += m * pi[y];
            }
        }
    }

    let nu = GridMeasure::from_signed(plan.marginal(), 1e-9)?;
    let mu = GridMeasure::new(
        (0..n)
            .map(|i| plan.source_index(i).map_or(0.0, |k| plan.source_mass[k]))
            .collect(),
    )?;
    let dual = objective_from_table(psi, &mu, &nu, table);
    let duality_gap = plan.cost - dual;
    let relative_gap = if plan.cost.abs() > 1e-12 { duality_gap / plan.cost.abs() } else { duality_gap };

    let barrier = extract_barrier(psi, table, cost, opts.tol_contact)?;
    let mono = monotonicity(plan, &barrier, cost, g, opts)?;

    Ok(OptimalityReport {
        off_contact_mass,
        plan_cost: plan.cost,
        dual_objective: dual,
        duality_gap,
        relative_gap,
        stop_go_pairs: mono.pairs,
        samples_checked: mono.checked,
        max_excess: (mono.checked > 0).then_some(mono.max_excess),
        contact_ok: off_contact_mass <= opts.tol_contact,
        monotone: mono.violations.is_empty(),
        violations: mono.violations,
    })
}

struct Mono {
    pairs: usize,
    checked: usize,
    max_excess: f64,
    violations: Vec<MonotonicityViolation>,
}

fn monotonicity(plan: &TransportPlan, barrier: &Barrier, cost: &CostMatrix, g: &Grid, opts: &VerifyOptions) -> Result<Mono> {
    let n = g.len();
    // Stopped pairs (k, y) and going pairs (k', y): y interior, visited and left.
    let mut stopped_at: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut going_at: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, (pi, m)) in plan.stopped.iter().zip(&plan.occupation).enumerate() {
        for y in 0..n {
            if pi[y] > SUPPORT_MASS {
                stopped_at[y].push(k);
            }
            if g.is_interior(y) && m[y] > SUPPORT_MASS {
                going_at[y].push(k);
            }
        }
    }
    let ys: Vec<usize> = (0..n).filter(|&y| !stopped_at[y].is_empty() && !going_at[y].is_empty()).collect();
    let weights: Vec<usize> = ys.iter().map(|&y| stopped_at[y].len() * going_at[y].len()).collect();
    let pairs: usize = weights.iter().sum();
    if pairs == 0 {
        return Ok(Mono { pairs, checked: 0, max_excess: f64::NEG_INFINITY, violations: Vec::new() });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut quads = Vec::with_capacity(opts.samples.min(pairs));
    if pairs <= opts.samples {
        for &y in &ys {
            for &k in &stopped_at[y] {
                for &kp in &going_at[y] {
                    quads.push((k, kp, y));
                }
            }
        }
    } else {
        for _ in 0..opts.samples {
            let mut r = rng.random_range(0..pairs);
            let mut i = 0;
            while r >= weights[i] {
                r -= weights[i];
                i += 1;
            }
            let y = ys[i];
            let a = &stopped_at[y];
            let b = &going_at[y];
            quads.push((a[r / b.len()], b[r % b.len()], y));
        }
    }

    let checked: Vec<f64> = quads
        .par_iter()
        .map(|&(k, kp, y)| {
            let x = plan.sources[k];
            let xp = plan.sources[kp];
            let region = barrier
                .stopping_set(xp)
                .ok_or_else(|| Error::InvalidInput(format!("barrier has no region for source {xp}")))?;
            let cont = hitting_law_from(&one_step_law(y, g), &region, g)?;
            let (mut ex, mut exp) = (0.0, 0.0);
            for b in cont.support() {
                ex += cont[b] * cost.get(x, b);
                exp += cont[b] * cost.get(xp, b);
            }
            Ok(cost.get(x, y) + exp - cost.get(xp, y) - ex)
        })
        .collect::<Result<_>>()?;

    let mut max_excess = f64::NEG_INFINITY;
    let mut violations = Vec::new();
    for (&(k, kp, y), &e) in quads.iter().zip(&checked) {
        max_excess = max_excess.max(e);
        if e > opts.tol_mono {
            violations.push(MonotonicityViolation {
                stopped_source: plan.sources[k],
                going_source: plan.sources[kp],
                y,
                excess: e,
            });
        }
    }
    Ok(Mono { pairs, checked: quads.len(), max_excess, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{eval_cost, CostSpec};
    use crate::dual::{ascend, AscentOptions};
    use crate::instances::square_ring;
    use crate::primal::lp_oracle;

    #[test]
    fn identity_plan_passes() {
        let inst = square_ring(CostSpec::Distance).unwrap();
        let g = &inst.grid;
        let c = eval_cost(&inst.cost, g).unwrap();
        let sources = inst.mu.support();
        let stopped = sources.iter().map(|&x| GridMeasure::dirac(g.len(), x).weights().to_vec()).collect();
        let plan = TransportPlan::from_stopped_laws(g, sources.clone(), sources.iter().map(|&x| inst.mu[x]).collect(), stopped, &c)
            .unwrap();
        assert!(plan.cost.abs() < 1e-15);
        let psi = ScalarField::zeros(g.len());
        let table = crate::pde::value_table_for(&psi, &c, g, &sources, &Default::default(), None).unwrap();
        let rep = verify_optimality(&plan, &psi, &table, &c, g, &VerifyOptions::default()).unwrap();
        assert!(rep.passes());
        assert!(rep.duality_gap.abs() < 1e-12);
    }

    #[test]
    fn optimal_plan_passes_and_swapped_plan_fails() {
        let inst = square_ring(CostSpec::Distance).unwrap();
        let g = &inst.grid;
        let c = eval_cost(&inst.cost, g).unwrap();
        let lp = lp_oracle(&inst.mu, &inst.nu, &c, g).unwrap();
        let st = ascend(&inst.mu, &inst.nu, &inst.cost, g, &AscentOptions::default()).unwrap();
        let opts = VerifyOptions::default();
        let rep = verify_optimality(&lp, &st.psi, &st.table, &c, g, &opts).unwrap();
        assert!(rep.passes(), "{rep:?}");
        assert!(rep.relative_gap.abs() < 1e-6);

        // Two corner sources exchange their nearest ring targets.
        let lo = g.nearest_node(&[5.0 / 12.0, 5.0 / 12.0]).unwrap();
        let hi = g.nearest_node(&[7.0 / 12.0, 7.0 / 12.0]).unwrap();
        let y_lo = g.nearest_node(&[3.0 / 12.0, 4.0 / 12.0]).unwrap();
        let y_hi = g.nearest_node(&[9.0 / 12.0, 8.0 / 12.0]).unwrap();
        let k_lo = lp.source_index(lo).unwrap();
        let k_hi = lp.source_index(hi).unwrap();
        let m = (lp.source_mass[k_lo] * lp.stopped[k_lo][y_lo]).min(lp.source_mass[k_hi] * lp.stopped[k_hi][y_hi]);
        let bad = lp.swap_targets((lo, y_lo), (hi, y_hi), m, g, &c).unwrap();
        let rep = verify_optimality(&bad, &st.psi, &st.table, &c, g, &opts).unwrap();
        assert!(!rep.violations.is_empty());
        assert!(rep.duality_gap > 0.0);
    }
}
