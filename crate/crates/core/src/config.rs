//! JSON run configuration: domain, spacing, cost, marginals and solver options.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cost::{CostSpec, Expr};
use crate::dual::AscentOptions;
use crate::error::{Error, Result};
use crate::grid::{build_grid, DomainSpec, Grid, GridMeasure};
use crate::pde::hitting_law_from;
use crate::primal::{SimOptions, VerifyOptions};
use crate::tol::MASS_TOL;

pub const SCHEMA_VERSION: u32 = 1;

/// A set of grid nodes, used as an absorbing region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "region", rename_all = "snake_case")]
pub enum RegionSpec {
    /// Nodes at sup-norm distance `radius` from `center`, within `h / 2`.
    SquareShell { center: Vec<f64>, radius: f64 },
    /// Nodes at Euclidean distance `radius` from `center`, within `h / 2`.
    SphereShell { center: Vec<f64>, radius: f64 },
    /// Nodes outside the open box.
    OutsideBox { lower: Vec<f64>, upper: Vec<f64> },
}

impl RegionSpec {
    fn mask(&self, g: &Grid) -> Result<Vec<bool>> {
        let half = 0.5 * g.h();
        let check_dim = |v: &[f64]| {
            if v.len() != g.dim() {
                return Err(Error::InvalidInput(format!("region point {v:?} has the wrong dimension")));
            }
            Ok(())
        };
        let mask = match self {
            RegionSpec::SquareShell { center, radius } => {
                check_dim(center)?;
                (0..g.len())
                    .map(|i| {
                        let d = g.coord(i).iter().zip(center).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                        (d - radius).abs() <= half
                    })
                    .collect()
            }
            RegionSpec::SphereShell { center, radius } => {
                check_dim(center)?;
                (0..g.len())
                    .map(|i| {
                        let d = g.coord(i).iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                        (d - radius).abs() <= half
                    })
                    .collect()
            }
            RegionSpec::OutsideBox { lower, upper } => {
                check_dim(lower)?;
                check_dim(upper)?;
                (0..g.len())
                    .map(|i| g.coord(i).iter().zip(lower.iter().zip(upper)).any(|(p, (lo, hi))| p <= lo || p >= hi))
                    .collect()
            }
        };
        Ok(mask)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: Vec<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub measure: MeasureSpec,
}

/// A probability measure described independently of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureSpec {
    /// Weighted points, each moved to its nearest node.
    Atoms { atoms: Vec<Atom> },
    /// Uniform over the nodes in the closed box.
    UniformBox { lower: Vec<f64>, upper: Vec<f64> },
    /// Node weights proportional to `max(density, 0)` at interior nodes.
    Density { density: Expr },
    /// Law of the walk from `from` when it first hits `region` or the boundary.
    Stopped { from: Box<MeasureSpec>, region: RegionSpec },
    /// Weighted sum of measures; weights are normalized.
    Mixture { components: Vec<Component> },
}

impl MeasureSpec {
    /// Discretizes and normalizes onto `g`.
    pub fn resolve(&self, g: &Grid) -> Result<GridMeasure> {
        let n = g.len();
        let raw: Vec<f64> = match self {
            MeasureSpec::Atoms { atoms } => {
                let mut w = vec![0.0; n];
                for a in atoms {
                    if a.point.len() != g.dim() || !(a.weight >= 0.0 && a.weight.is_finite()) {
                        return Err(Error::InvalidInput(format!("bad atom {a:?}")));
                    }
                    let k = g
                        .nearest_node(&a.point)
                        .ok_or_else(|| Error::InvalidInput(format!("atom {:?} is off the grid", a.point)))?;
                    w[k] += a.weight;
                }
                w
            }
            MeasureSpec::UniformBox { lower, upper } => {
                if lower.len() != g.dim() || upper.len() != g.dim() {
                    return Err(Error::InvalidInput("uniform box has the wrong dimension".into()));
                }
                let eps = 1e-9 * g.h();
                (0..n)
                    .map(|i| {
                        let inside = g.coord(i).iter().zip(lower.iter().zip(upper)).all(|(p, (lo, hi))| *p >= lo - eps && *p <= hi + eps);
                        if inside { 1.0 } else { 0.0 }
                    })
                    .collect()
            }
            MeasureSpec::Density { density } => {
                density.validate(g.dim())?;
                (0..n)
                    .map(|i| if g.is_interior(i) { density.eval(g.coord(i)).max(0.0) } else { 0.0 })
                    .collect()
            }
            MeasureSpec::Stopped { from, region } => {
                let start = from.resolve(g)?;
                hitting_law_from(start.weights(), &region.mask(g)?, g)?.weights().to_vec()
            }
            MeasureSpec::Mixture { components } => {
                let mut w = vec![0.0; n];
                for c in components {
                    if !(c.weight >= 0.0 && c.weight.is_finite()) {
                        return Err(Error::InvalidInput(format!("bad mixture weight {}", c.weight)));
                    }
                    let m = c.measure.resolve(g)?;
                    for (a, b) in w.iter_mut().zip(m.weights()) {
                        *a += c.weight * b;
                    }
                }
                w
            }
        };
        let total: f64 = raw.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidInput("measure has no mass on the grid".into()));
        }
        let m = GridMeasure::new(raw.into_iter().map(|v| v / total).collect())?;
        debug_assert!((m.total() - 1.0).abs() <= 10.0 * MASS_TOL);
        Ok(m)
    }
}

/// When to let the common part of `mu` and `nu` stop at time zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StayPutMode {
    /// Only for distance-type costs.
    #[default]
    Auto,
    Always,
    Never,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    pub enabled: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { enabled: true }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub domain: DomainSpec,
    pub h: f64,
    pub cost: CostSpec,
    pub mu: MeasureSpec,
    pub nu: MeasureSpec,
    #[serde(default)]
    pub solver: AscentOptions,
    #[serde(default)]
    pub stay_put: StayPutMode,
    #[serde(default)]
    pub oracle: OracleConfig,
    /// The single seed behind every random choice of a run; it overrides the
    /// seeds inside `simulation` and `verify`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub simulation: SimOptions,
    #[serde(default)]
    pub verify: VerifyOptions,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// A configuration resolved onto its grid.
#[derive(Debug, Clone)]
pub struct Problem {
    pub grid: Grid,
    pub mu: GridMeasure,
    pub nu: GridMeasure,
    pub cost: CostSpec,
}

fn field_err(field: &str, message: impl Into<String>) -> Error {
    Error::Config { field: field.into(), message: message.into() }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(field_err(field, format!("must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        RunConfig::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Checks everything that does not need the grid.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(field_err(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            ));
        }
        self.domain.validate().map_err(|e| field_err("domain", e.to_string()))?;
        positive("h", self.h)?;
        self.cost.validate(self.domain.dim()).map_err(|e| field_err("cost", e.to_string()))?;
        let s = &self.solver;
        positive("solver.grad_tol", s.grad_tol)?;
        positive("solver.gap_tol", s.gap_tol)?;
        positive("solver.initial_step", s.initial_step)?;
        positive("solver.obstacle.tol", s.obstacle.tol)?;
        positive("solver.obstacle.tol_contact", s.obstacle.tol_contact)?;
        if !(1.0..2.0).contains(&s.obstacle.omega) {
            return Err(field_err("solver.obstacle.omega", "must lie in [1, 2)"));
        }
        if s.max_iter == 0 || s.obstacle.budget == 0 {
            return Err(field_err("solver", "iteration budgets must be positive"));
        }
        positive("verify.tol_contact", self.verify.tol_contact)?;
        positive("verify.tol_mono", self.verify.tol_mono)?;
        if self.simulation.n_paths == 0 || self.simulation.step_cap == 0 {
            return Err(field_err("simulation", "n_paths and step_cap must be positive"));
        }
        Ok(())
    }

    /// Builds the grid and discretizes both marginals.
    pub fn resolve(&self) -> Result<Problem> {
        self.validate()?;
        let grid = build_grid(&self.domain, self.h).map_err(|e| field_err("h", e.to_string()))?;
        let mu = self.mu.resolve(&grid).map_err(|e| field_err("mu", e.to_string()))?;
        let nu = self.nu.resolve(&grid).map_err(|e| field_err("nu", e.to_string()))?;
        Ok(Problem { grid, mu, nu, cost: self.cost.clone() })
    }

    pub fn simulation_options(&self) -> SimOptions {
        SimOptions { seed: self.seed, ..self.simulation.clone() }
    }

    pub fn verify_options(&self) -> VerifyOptions {
        VerifyOptions { seed: self.seed, ..self.verify.clone() }
    }

    /// Whether the pipeline splits off `mu ^ nu` as time-zero stopping mass.
    pub fn uses_stay_put(&self) -> bool {
        match self.stay_put {
            StayPutMode::Auto => self.cost.is_distance_type(),
            StayPutMode::Always => true,
            StayPutMode::Never => false,
        }
    }

    /// The configuration of the square-ring benchmark.
    pub fn square_ring_example() -> RunConfig {
        let block = MeasureSpec::UniformBox { lower: vec![5.0 / 12.0; 2], upper: vec![7.0 / 12.0; 2] };
        RunConfig {
            schema_version: SCHEMA_VERSION,
            domain: DomainSpec::unit_box(2),
            h: 1.0 / 12.0,
            cost: CostSpec::Distance,
            nu: MeasureSpec::Stopped {
                from: Box::new(block.clone()),
                region: RegionSpec::SquareShell { center: vec![0.5, 0.5], radius: 0.25 },
            },
            mu: block,
            solver: AscentOptions::default(),
            stay_put: StayPutMode::Auto,
            oracle: OracleConfig::default(),
            seed: 0,
            simulation: SimOptions::default(),
            verify: VerifyOptions::default(),
            output_dir: default_output_dir(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::square_ring;

    #[test]
    fn example_config_matches_the_instance() {
        let cfg = RunConfig::square_ring_example();
        let p = cfg.resolve().unwrap();
        let inst = square_ring(CostSpec::Distance).unwrap();
        assert!(p.mu.tv_distance(&inst.mu) < 1e-12);
        assert!(p.nu.tv_distance(&inst.nu) < 1e-12);
        let text = cfg.to_json().unwrap();
        let back = RunConfig::from_json(&text).unwrap();
        assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn minimal_json_gets_defaults() {
        let text = r#"{
            "schema_version": 1,
            "domain": {"shape": "box", "lower": [0.0], "upper": [1.0]},
            "h": 0.25,
            "cost": {"kind": "quadratic"},
            "mu": {"kind": "atoms", "atoms": [{"point": [0.5], "weight": 1.0}]},
            "nu": {"kind": "atoms", "atoms": [{"point": [0.25], "weight": 1.0}, {"point": [0.75], "weight": 1.0}]}
        }"#;
        let cfg = RunConfig::from_json(text).unwrap();
        assert_eq!(cfg.solver.max_iter, AscentOptions::default().max_iter);
        assert!(cfg.oracle.enabled);
        let p = cfg.resolve().unwrap();
        assert!((p.nu[p.grid.nearest_node(&[0.25]).unwrap()] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bad_fields_are_named() {
        let mut cfg = RunConfig::square_ring_example();
        cfg.solver.grad_tol = 0.0;
        match cfg.validate().unwrap_err() {
            Error::Config { field, .. } => assert_eq!(field, "solver.grad_tol"),
            e => panic!("unexpected {e}"),
        }
        let mut cfg = RunConfig::square_ring_example();
        cfg.schema_version = 7;
        assert!(matches!(cfg.validate(), Err(Error::Config { .. })));
        let err = RunConfig::from_json("{\"schema_version\": 1,\n \"bogus\": 3}").unwrap_err();
        assert!(err.to_string().contains("line"));
    }

    #[test]
    fn mixtures_and_densities_normalize() {
        let g = build_grid(&DomainSpec::unit_box(2), 0.125).unwrap();
        let m = MeasureSpec::Mixture {
            components: vec![
                Component { weight: 3.0, measure: MeasureSpec::Density { density: Expr::Gaussian { center: vec![0.5, 0.5], width: 0.1 } } },
                Component { weight: 1.0, measure: MeasureSpec::Atoms { atoms: vec![Atom { point: vec![0.25, 0.25], weight: 2.0 }] } },
            ],
        };
        let r = m.resolve(&g).unwrap();
        assert!((r.total() - 1.0).abs() < 1e-12);
        assert!(r[g.nearest_node(&[0.25, 0.25]).unwrap()] >= 0.25 - 1e-12);
    }
}
