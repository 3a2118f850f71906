//! Transport costs `c(x, y)` on grid node pairs and their structural constants.

mod expr;
mod twist;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use expr::Expr;
pub use twist::{twist_report, TwistPair, TwistReport, TwistVerdict};

use crate::error::{Error, Result};
use crate::grid::{laplacian_at, Grid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostSpec {
    /// `|x - y|^2`.
    Quadratic,
    /// `|x - y|`.
    Distance,
    /// `sqrt(|x - y|^2 + eps^2) - eps`, a smooth minorant of the distance.
    SoftDistance { epsilon: f64 },
    /// `g(x) h(y)`.
    Separable { g: Expr, h: Expr },
    /// `-|x - y|`; superharmonic in `y`, so the dual solver rejects it unshifted.
    NegativeDistance,
    /// `base(x, y) + curvature |y|^2 / 2d`; the added term has discrete Laplacian
    /// exactly `curvature` and does not depend on `x`.
    Shifted { base: Box<CostSpec>, curvature: f64 },
}

fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

impl CostSpec {
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            CostSpec::Quadratic => x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum(),
            CostSpec::Distance => distance(x, y),
            CostSpec::SoftDistance { epsilon } => {
                let r = distance(x, y);
                // r^2 / (sqrt(r^2 + e^2) + e) avoids cancellation for small r.
                r * r / ((r * r + epsilon * epsilon).sqrt() + epsilon)
            }
            CostSpec::Separable { g, h } => g.eval(x) * h.eval(y),
            CostSpec::NegativeDistance => -distance(x, y),
            CostSpec::Shifted { base, curvature } => {
                let y2: f64 = y.iter().map(|v| v * v).sum();
                base.eval(x, y) + curvature * y2 / (2 * y.len()) as f64
            }
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            CostSpec::SoftDistance { epsilon } if !(epsilon.is_finite() && *epsilon > 0.0) => {
                Err(Error::InvalidInput(format!("soft distance needs epsilon > 0, got {epsilon}")))
            }
            CostSpec::Separable { g, h } => {
                g.validate(dim)?;
                h.validate(dim)
            }
            CostSpec::Shifted { base, curvature } => {
                if !(curvature.is_finite() && *curvature >= 0.0) {
                    return Err(Error::InvalidInput(format!("shift curvature must be >= 0, got {curvature}")));
                }
                base.validate(dim)
            }
            _ => Ok(()),
        }
    }

    /// Costs of the form `f(|x - y|)`, symmetric in `x` and `y`.
    pub fn is_radial(&self) -> bool {
        matches!(
            self,
            CostSpec::Quadratic | CostSpec::Distance | CostSpec::SoftDistance { .. } | CostSpec::NegativeDistance
        )
    }

    /// Distance and its smoothed or shifted variants.
    pub fn is_distance_type(&self) -> bool {
        match self {
            CostSpec::Distance | CostSpec::SoftDistance { .. } | CostSpec::NegativeDistance => true,
            CostSpec::Shifted { base, .. } => base.is_distance_type(),
            _ => false,
        }
    }
}

/// The smoothed distance `sqrt(|x - y|^2 + eps^2) - eps`.
pub fn soft_distance(epsilon: f64) -> Result<CostSpec> {
    let spec = CostSpec::SoftDistance { epsilon };
    spec.validate(1)?;
    Ok(spec)
}

/// Shifts a cost by `M |y|^2 / 2d` with `M = max(0, -min_laplacian)` so that
/// the result is discretely subharmonic in `y`. Costs that are already
/// subharmonic are returned unchanged.
pub fn subharmonizing_shift(spec: &CostSpec, matrix: &CostMatrix) -> CostSpec {
    let m = matrix.lap_min();
    if m >= 0.0 {
        return spec.clone();
    }
    CostSpec::Shifted { base: Box::new(spec.clone()), curvature: -m }
}

/// Dense `c(x_i, y_j)` over all node pairs, with the constants the solvers need.
#[derive(Debug, Clone)]
pub struct CostMatrix {
    spec: CostSpec,
    n: usize,
    values: Vec<f64>,
    row_lap_min: Vec<f64>,
    row_lap_max: Vec<f64>,
    lipschitz: f64,
}

impl CostMatrix {
    pub fn spec(&self) -> &CostSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[x * self.n + y]
    }

    /// `y -> c(x, y)`.
    pub fn row(&self, x: usize) -> &[f64] {
        &self.values[x * self.n..(x + 1) * self.n]
    }

    /// `m_c`: least discrete Laplacian in `y` over all sources and interior nodes.
    pub fn lap_min(&self) -> f64 {
        self.row_lap_min.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `D_c`: largest discrete Laplacian in `y`.
    pub fn lap_max(&self) -> f64 {
        self.row_lap_max.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Laplacian bounds restricted to the given sources.
    pub fn lap_bounds_over(&self, sources: &[usize]) -> (f64, f64) {
        sources.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(self.row_lap_min[x]), hi.max(self.row_lap_max[x]))
        })
    }

    /// `K`: largest difference quotient `|c(x, y) - c(x', y)| / h` over adjacent `x, x'`.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Writes `source,target,cost` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["source", "target", "cost"])?;
        for x in 0..self.n {
            for y in 0..self.n {
                w.write_record(&[x.to_string(), y.to_string(), format!("{:e}", self.get(x, y))])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Evaluates `spec` on every node pair of `g`.
pub fn eval_cost(spec: &CostSpec, g: &Grid) -> Result<CostMatrix> {
    spec.validate(g.dim())?;
    let n = g.len();
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|x| (0..n).map(move |y| spec.eval(g.coord(x), g.coord(y))))
        .collect();
    if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "cost is not finite at pair ({}, {})",
            bad / n,
            bad % n
        )));
    }
    let (row_lap_min, row_lap_max): (Vec<f64>, Vec<f64>) = (0..n)
        .into_par_iter()
        .map(|x| {
            let row = &values[x * n..(x + 1) * n];
            g.interior_nodes().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| {
                let l = laplacian_at(row, g, y);
                (lo.min(l), hi.max(l))
            })
        })
        .unzip();
    let h = g.h();
    let lipschitz = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut k: f64 = 0.0;
            // Each adjacent pair once, through its positive-direction neighbor.
            for xp in g.neighbors(x).iter().step_by(2).flatten() {
                for y in 0..n {
                    k = k.max((values[x * n + y] - values[xp * n + y]).abs() / h);
                }
            }
            k
        })
        .reduce(|| 0.0, f64::max);
    Ok(CostMatrix {
        spec: spec.clone(),
        n,
        values,
        row_lap_min,
        row_lap_max,
        lipschitz,
    })
}
