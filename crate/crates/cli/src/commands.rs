//! The subcommands. Each reads its inputs from the run's output directory,
//! writes its artifacts there and returns what it printed.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use skorokhod_core::config::{Problem, RunConfig, StayPutMode};
use skorokhod_core::cost::{eval_cost, CostMatrix};
use skorokhod_core::dual::{certify, dual_objective};
use skorokhod_core::grid::{GridMeasure, ScalarField};
use skorokhod_core::pde::value_table_for;
use skorokhod_core::pipeline::{infeasibility_witness, solve, PipelineOptions};
use skorokhod_core::primal::{
    exact_stopped_law, extract_barrier, lp_oracle, mean_time_identity, simulate_hitting, stay_put_split,
    verify_optimality, Barrier, TransportPlan,
};
use skorokhod_core::tol::TOL_PSOR;
use skorokhod_core::Error as CoreError;

use crate::artifacts::*;
use crate::error::{io_err, CliError, Result};

/// Limits the verification report holds a run to.
pub const GAP_LIMIT: f64 = 0.01;
pub const OFF_CONTACT_LIMIT: f64 = 1e-3;
pub const EXACT_TV_LIMIT: f64 = 0.02;
pub const MARGINAL_LIMIT: f64 = 1e-8;

/// Command-line values that replace fields of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub paths: Option<u64>,
    pub max_iter: Option<usize>,
    pub h: Option<f64>,
    pub no_oracle: bool,
    pub stay_put: Option<StayPutMode>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(p) = self.paths {
            cfg.simulation.n_paths = p;
        }
        if let Some(m) = self.max_iter {
            cfg.solver.max_iter = m;
        }
        if let Some(h) = self.h {
            cfg.h = h;
        }
        if self.no_oracle {
            cfg.oracle.enabled = false;
        }
        if let Some(m) = self.stay_put {
            cfg.stay_put = m;
        }
    }
}

/// The walking part of the problem after the optional stay-put split.
struct Walk {
    /// Absolute time-zero mass, when the split applies.
    common: Option<GridMeasure>,
    fraction: f64,
    /// Normalized walking marginals; `None` when every unit of mass stays.
    marginals: Option<(GridMeasure, GridMeasure)>,
}

/// A validated configuration resolved onto its grid.
pub struct Run {
    pub cfg: RunConfig,
    pub problem: Problem,
    pub cost: CostMatrix,
    pub fingerprint: String,
}

impl Run {
    pub fn load(config: &Path, overrides: &Overrides) -> Result<Run> {
        let text = fs::read_to_string(config).map_err(|e| CliError::Config(format!("{}: {e}", config.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", config.display())))?;
        overrides.apply(&mut cfg);
        Run::new(cfg)
    }

    pub fn new(cfg: RunConfig) -> Result<Run> {
        let problem = cfg.resolve().map_err(|e| CliError::Config(e.to_string()))?;
        let cost = eval_cost(&problem.cost, &problem.grid).map_err(|e| CliError::Config(format!("cost: {e}")))?;
        let fingerprint = problem.grid.fingerprint();
        Ok(Run { cfg, problem, cost, fingerprint })
    }

    pub fn out(&self) -> &Path {
        &self.cfg.output_dir
    }

    fn ensure_out(&self) -> Result<()> {
        fs::create_dir_all(self.out()).map_err(|e| io_err(self.out(), e))
    }

    fn walk(&self) -> Result<Walk> {
        let p = &self.problem;
        if !self.cfg.uses_stay_put() {
            return Ok(Walk { common: None, fraction: 1.0, marginals: Some((p.mu.clone(), p.nu.clone())) });
        }
        let split = stay_put_split(&p.mu, &p.nu)?;
        let fraction = 1.0 - split.common_mass;
        let marginals = split.normalized_plus().filter(|_| fraction > 1e-12);
        Ok(Walk { common: Some(split.common), fraction, marginals })
    }

    fn write_witness(&self) -> Result<Option<CliError>> {
        match infeasibility_witness(&self.problem)? {
            Some(w) => {
                write_json(self.out(), WITNESS, &w)?;
                Ok(Some(CliError::Infeasible { gap: w.gap, witness: path(self.out(), WITNESS) }))
            }
            None => Ok(None),
        }
    }

    fn barrier_from(&self, psi: &ScalarField, walk: &Walk) -> Result<Barrier> {
        let g = &self.problem.grid;
        let Some((mu_w, _)) = &walk.marginals else {
            return Ok(Barrier::uniform(g.len(), Vec::new(), Vec::new()));
        };
        let table = value_table_for(psi, &self.cost, g, &mu_w.support(), &self.cfg.solver.obstacle, None)?;
        Ok(extract_barrier(psi, &table, &self.cost, self.cfg.verify.tol_contact)?)
    }

    fn read_psi(&self) -> Result<PsiArtifact> {
        read_json(self.out(), PSI, &self.fingerprint, "solve")
    }
}

/// Runs the dual ascent and writes the potential, iteration log, barrier,
/// value table and summary.
pub fn cmd_solve(run: &Run) -> Result<String> {
    run.ensure_out()?;
    if let Some(e) = run.write_witness()? {
        return Err(e);
    }
    let cfg = &run.cfg;
    let g = &run.problem.grid;
    let opts = PipelineOptions {
        solver: cfg.solver.clone(),
        stay_put: cfg.uses_stay_put(),
        oracle: cfg.oracle.enabled,
        tol_contact: cfg.verify.tol_contact,
    };
    let out = solve(&run.problem, &opts)?;
    let dir = run.out();

    let psi = out.state.as_ref().map_or_else(|| ScalarField::zeros(g.len()), |s| s.psi.clone());
    write_json(
        dir,
        PSI,
        &PsiArtifact { fingerprint: run.fingerprint.clone(), h: g.h(), stay_put: opts.stay_put, walk_fraction: out.walk_fraction, psi },
    )?;
    if let Some(st) = &out.state {
        st.write_log_csv(create_file(dir, ITERATIONS)?)?;
        st.table.write_csv(create_file(dir, VALUE_TABLE)?)?;
    } else {
        fs::write(path(dir, ITERATIONS), "iter,objective\n").map_err(|e| io_err(&path(dir, ITERATIONS), e))?;
        fs::write(path(dir, VALUE_TABLE), "source,node,value,active,residual\n")
            .map_err(|e| io_err(&path(dir, VALUE_TABLE), e))?;
    }
    let barrier = out.barrier.clone().unwrap_or_else(|| Barrier::uniform(g.len(), Vec::new(), Vec::new()));
    barrier.write_csv(create_file(dir, BARRIER)?, g)?;
    if let Some(plan) = &out.oracle {
        write_plan(run, plan, out.walk_fraction)?;
    }

    let summary = Summary {
        fingerprint: run.fingerprint.clone(),
        seed: cfg.seed,
        config: cfg.clone(),
        nodes: g.len(),
        interior_nodes: g.interior_nodes().len(),
        objective: out.objective(),
        oracle_value: out.oracle_value(),
        relative_gap: out.relative_gap(),
        oracle_skipped: out.oracle_skipped.clone(),
        stop_reason: out.state.as_ref().map(|s| s.stop),
        iterations: out.state.as_ref().map_or(0, |s| s.log.len().saturating_sub(1)),
        budget_exhausted: out.budget_exhausted,
        stay_put_mass: out.stay_put_mass,
        certificate: out.state.as_ref().map(|s| s.certificate.clone()),
        exact_law_tv: out.exact_law.tv_distance(&run.problem.nu),
        mean_stopping_time: mean_time_identity(&run.problem.mu, &run.problem.nu, g),
    };
    write_json(dir, SUMMARY, &summary)?;

    let mut text = String::new();
    let _ = writeln!(text, "grid {} ({} nodes, {} interior)", run.fingerprint, summary.nodes, summary.interior_nodes);
    let _ = writeln!(text, "dual objective   {:.10}", summary.objective);
    if let (Some(v), Some(gap)) = (summary.oracle_value, summary.relative_gap) {
        let _ = writeln!(text, "LP optimum       {v:.10}  (relative gap {gap:.2e})");
    } else if let Some(why) = &summary.oracle_skipped {
        let _ = writeln!(text, "LP oracle skipped: {why}");
    }
    let _ = writeln!(text, "stay-put mass    {:.6}", summary.stay_put_mass);
    let _ = writeln!(text, "TV(barrier law, nu) {:.3e}", summary.exact_law_tv);
    if let Some(r) = summary.stop_reason {
        let _ = writeln!(text, "stopped after {} iterations: {r:?}", summary.iterations);
    }
    let _ = writeln!(text, "artifacts in {}", dir.display());
    if out.budget_exhausted {
        return Err(CliError::Budget(format!(
            "{} iterations without convergence; artifacts of the last iterate are in {}",
            summary.iterations,
            dir.display()
        )));
    }
    Ok(text)
}

fn write_plan(run: &Run, plan: &TransportPlan, walk_fraction: f64) -> Result<()> {
    let dir = run.out();
    write_json(
        dir,
        PLAN_JSON,
        &PlanArtifact { fingerprint: run.fingerprint.clone(), walk_fraction, plan: plan.clone() },
    )?;
    plan.write_csv(create_file(dir, PLAN_CSV)?)?;
    Ok(())
}

/// Solves the occupation-measure LP of the walking part.
pub fn cmd_oracle(run: &Run) -> Result<String> {
    run.ensure_out()?;
    let g = &run.problem.grid;
    let walk = run.walk()?;
    let (walk_value, plan) = match &walk.marginals {
        None => (0.0, None),
        Some((mu, nu)) => match lp_oracle(mu, nu, &run.cost, g) {
            Ok(p) => (p.cost, Some(p)),
            Err(CoreError::Infeasible { gap }) => {
                return Err(run.write_witness()?.unwrap_or(CliError::Core(CoreError::Infeasible { gap })));
            }
            Err(e) => return Err(e.into()),
        },
    };
    let summary = OracleSummary {
        fingerprint: run.fingerprint.clone(),
        seed: run.cfg.seed,
        value: walk.fraction * walk_value,
        walk_value,
        dual_value: plan.as_ref().and_then(|p| p.dual_value),
        mean_stopping_time: plan.as_ref().map_or(0.0, |p| walk.fraction * p.mean_stopping_time(g)),
        marginal_error: match (&plan, &walk.marginals) {
            (Some(p), Some((_, nu))) => p.marginal_error(nu),
            _ => 0.0,
        },
        balance_residual: plan.as_ref().map_or(0.0, |p| p.balance_residual(g)),
    };
    if let Some(p) = &plan {
        write_plan(run, p, walk.fraction)?;
    }
    write_json(run.out(), ORACLE, &summary)?;
    Ok(format!(
        "LP optimum {:.10} (walking part {:.10}, dual {:?})\nmean stopping time {:.6e}\nmarginal error {:.2e}, balance residual {:.2e}\n",
        summary.value, summary.walk_value, summary.dual_value, summary.mean_stopping_time, summary.marginal_error, summary.balance_residual
    ))
}

/// Builds the verification report for `psi` without touching the disk.
pub fn verification_report(run: &Run, psi: &ScalarField) -> Result<VerifyReport> {
    let g = &run.problem.grid;
    let walk = run.walk()?;
    let mut checks = Vec::new();
    let Some((mu_w, nu_w)) = &walk.marginals else {
        checks.push(Check::at_least("stay-put mass", 1.0 - walk.fraction, 1.0 - 1e-12));
        let passed = checks.iter().all(|c| c.pass);
        return Ok(VerifyReport {
            fingerprint: run.fingerprint.clone(),
            seed: run.cfg.seed,
            plan_source: "identity".into(),
            checks,
            optimality: None,
            certificate: None,
            passed,
        });
    };

    let (plan, plan_source) = match read_optional::<PlanArtifact>(run.out(), PLAN_JSON, &run.fingerprint)? {
        Some(a) => (a.plan, PLAN_JSON.to_string()),
        None => match lp_oracle(mu_w, nu_w, &run.cost, g) {
            Ok(p) => (p, "LP oracle".to_string()),
            Err(CoreError::InstanceTooLarge { .. }) => (barrier_plan(run, psi, &walk)?, "barrier hitting plan".to_string()),
            Err(e) => return Err(e.into()),
        },
    };

    let cert = certify(psi, run.cost.lap_max(), g)?;
    checks.push(Check::at_most("psi <= 0", cert.max_psi, skorokhod_core::dual::CERT_SIGN_TOL));
    checks.push(Check::at_most("|psi| on boundary", cert.max_boundary_abs, skorokhod_core::dual::CERT_BOUNDARY_TOL));
    checks.push(Check::at_most("(L psi - D)+", cert.max_laplacian_excess, skorokhod_core::dual::CERT_BOUND_TOL));
    checks.push(Check::at_least("psi - D u_O", cert.min_lower_gap, -skorokhod_core::dual::CERT_BOUND_TOL));
    checks.push(Check::at_most("Dirichlet energy", cert.energy, cert.energy_bound));

    let table = value_table_for(psi, &run.cost, g, &mu_w.support(), &run.cfg.solver.obstacle, None)?;
    let report = verify_optimality(&plan, psi, &table, &run.cost, g, &run.cfg.verify_options())?;
    let objective = dual_objective(psi, mu_w, nu_w, &run.cost, g)?;
    checks.push(Check::at_most("dual objective - plan cost", objective - plan.cost, 10.0 * TOL_PSOR));
    checks.push(Check::at_most("relative duality gap", report.relative_gap, GAP_LIMIT));
    checks.push(Check::at_most("off-contact plan mass", report.off_contact_mass, OFF_CONTACT_LIMIT));
    checks.push(Check::at_most("monotonicity violations", report.violations.len() as f64, 0.0));
    checks.push(Check::at_most("plan marginal error", plan.marginal_error(nu_w), MARGINAL_LIMIT));
    checks.push(Check::at_most("plan balance residual", plan.balance_residual(g), MARGINAL_LIMIT));
    let barrier = run.barrier_from(psi, &walk)?;
    let exact = exact_stopped_law(&barrier, mu_w, g, None)?;
    checks.push(Check::at_most("TV(barrier law, nu)", exact.tv_distance(nu_w), EXACT_TV_LIMIT));

    let passed = checks.iter().all(|c| c.pass);
    Ok(VerifyReport {
        fingerprint: run.fingerprint.clone(),
        seed: run.cfg.seed,
        plan_source,
        checks,
        optimality: Some(report),
        certificate: Some(cert),
        passed,
    })
}

/// The plan that stops each source on its barrier, for instances too large for the LP.
fn barrier_plan(run: &Run, psi: &ScalarField, walk: &Walk) -> Result<TransportPlan> {
    let g = &run.problem.grid;
    let (mu, _) = walk.marginals.as_ref().expect("walking part");
    let barrier = run.barrier_from(psi, walk)?;
    let sources = mu.support();
    let mut stopped = Vec::with_capacity(sources.len());
    for &x in &sources {
        stopped.push(exact_stopped_law(&barrier, &GridMeasure::dirac(g.len(), x), g, None)?.weights().to_vec());
    }
    let mass = sources.iter().map(|&x| mu[x]).collect();
    Ok(TransportPlan::from_stopped_laws(g, sources, mass, stopped, &run.cost)?)
}

/// Checks the stored potential against an optimal plan and writes `verify.json`.
pub fn cmd_verify(run: &Run) -> Result<String> {
    let psi = run.read_psi()?;
    let report = verification_report(run, &psi.psi)?;
    write_json(run.out(), VERIFY, &report)?;
    let text = format!("plan: {}\n{}", report.plan_source, report.table());
    if report.passed {
        Ok(text)
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        Err(CliError::Verification(format!("{text}failed: {}", failed.join(", "))))
    }
}

/// Simulates walks stopped on the stored barrier and writes `sim.json`,
/// `marginals.csv` and `stopping_times.csv`.
pub fn cmd_simulate(run: &Run) -> Result<String> {
    let psi = run.read_psi()?;
    let g = &run.problem.grid;
    let walk = run.walk()?;
    let barrier = run.barrier_from(&psi.psi, &walk)?;
    let (mu, nu) = (&run.problem.mu, &run.problem.nu);
    let common = walk.common.as_ref();
    let exact = exact_stopped_law(&barrier, mu, g, common)?;
    let result = simulate_hitting(&barrier, mu, g, &run.cfg.simulation_options(), common, Some(nu))?;
    let dir = run.out();

    let mut w = csv::Writer::from_writer(create_file(dir, MARGINALS)?);
    let mut head = vec!["node".to_string()];
    head.extend((0..g.dim()).map(|k| format!("x{k}")));
    head.extend(["target", "exact", "empirical", "standard_error"].map(String::from));
    w.write_record(&head).map_err(|e| io_err(&path(dir, MARGINALS), e))?;
    for i in 0..g.len() {
        if nu[i] == 0.0 && exact[i] == 0.0 && result.empirical[i] == 0.0 {
            continue;
        }
        let mut rec = vec![i.to_string()];
        rec.extend(g.coord(i).iter().map(|v| format!("{v}")));
        rec.extend([nu[i], exact[i], result.empirical[i], result.standard_error[i]].map(|v| format!("{v:e}")));
        w.write_record(&rec).map_err(|e| io_err(&path(dir, MARGINALS), e))?;
    }
    w.flush().map_err(|e| io_err(&path(dir, MARGINALS), e))?;

    let mut w = csv::Writer::from_writer(create_file(dir, STOPPING_TIMES)?);
    w.write_record(["time_start", "time_end", "count"]).map_err(|e| io_err(&path(dir, STOPPING_TIMES), e))?;
    for (a, b, c) in &result.time_histogram {
        w.write_record([format!("{a:e}"), format!("{b:e}"), c.to_string()])
            .map_err(|e| io_err(&path(dir, STOPPING_TIMES), e))?;
    }
    w.flush().map_err(|e| io_err(&path(dir, STOPPING_TIMES), e))?;

    let art = SimArtifact {
        fingerprint: run.fingerprint.clone(),
        seed: result.seed,
        exact_tv: exact.tv_distance(nu),
        result,
    };
    write_json(dir, SIM, &art)?;
    let r = &art.result;
    Ok(format!(
        "{} paths, seed {}\nTV(empirical, nu) {:.3e}, TV(exact, nu) {:.3e}\nstay-put fraction {:.4}\nmean stopping time {:.6e} +- {:.1e}\ncensored paths {}\n",
        r.n_paths,
        r.seed,
        r.tv_to_target.unwrap_or(f64::NAN),
        art.exact_tv,
        r.stay_put_fraction,
        r.mean_time,
        r.mean_time_se,
        r.censored
    ))
}

/// Collects the summary, verification and simulation artifacts into `report.txt`.
pub fn cmd_report(run: &Run) -> Result<String> {
    let dir = run.out();
    let summary: Summary = read_json(dir, SUMMARY, &run.fingerprint, "solve")?;
    let mut t = String::new();
    let _ = writeln!(t, "run in {} on grid {}", dir.display(), summary.fingerprint);
    let _ = writeln!(t, "seed {}", summary.seed);
    let _ = writeln!(t, "nodes {} ({} interior), h = {}", summary.nodes, summary.interior_nodes, summary.config.h);
    let _ = writeln!(t, "cost {:?}", summary.config.cost);
    let _ = writeln!(t, "\n[solve]");
    let _ = writeln!(t, "dual objective      {:.10}", summary.objective);
    match (summary.oracle_value, summary.relative_gap) {
        (Some(v), Some(g)) => {
            let _ = writeln!(t, "LP optimum          {v:.10}\nrelative gap        {g:.3e}");
        }
        _ => {
            let _ = writeln!(t, "LP optimum          not computed");
        }
    }
    let stop = summary.stop_reason.map_or("no ascent".to_string(), |r| format!("{r:?}"));
    let _ = writeln!(t, "iterations          {} ({stop})", summary.iterations);
    let _ = writeln!(t, "stay-put mass       {:.6}", summary.stay_put_mass);
    let _ = writeln!(t, "mean stopping time  {:.6e}", summary.mean_stopping_time);
    let _ = writeln!(t, "TV(barrier law, nu) {:.3e}", summary.exact_law_tv);
    if let Some(c) = &summary.certificate {
        let _ = writeln!(
            t,
            "certificate         max psi {:.1e}, min(psi - D u_O) {:.1e}, max (L psi - D)+ {:.1e}, energy {:.3e} <= {:.3e}",
            c.max_psi, c.min_lower_gap, c.max_laplacian_excess, c.energy, c.energy_bound
        );
    }
    if let Some(v) = read_optional::<VerifyReport>(dir, VERIFY, &run.fingerprint)? {
        let _ = writeln!(t, "\n[verify] plan: {}", v.plan_source);
        t += &v.table();
        let _ = writeln!(t, "overall: {}", if v.passed { "pass" } else { "FAIL" });
    } else {
        let _ = writeln!(t, "\n[verify] not run");
    }
    if let Some(s) = read_optional::<SimArtifact>(dir, SIM, &run.fingerprint)? {
        let r = &s.result;
        let _ = writeln!(t, "\n[simulate] {} paths, seed {}", r.n_paths, r.seed);
        let _ = writeln!(t, "TV(empirical, nu)   {:.3e}", r.tv_to_target.unwrap_or(f64::NAN));
        let _ = writeln!(t, "TV(exact, nu)       {:.3e}", s.exact_tv);
        let _ = writeln!(t, "stay-put fraction   {:.4}", r.stay_put_fraction);
        let _ = writeln!(t, "mean stopping time  {:.6e} +- {:.1e}", r.mean_time, r.mean_time_se);
    } else {
        let _ = writeln!(t, "\n[simulate] not run");
    }
    fs::write(path(dir, REPORT), &t).map_err(|e| io_err(&path(dir, REPORT), e))?;
    Ok(t)
}
