use minilp::{ComparisonOp, OptimizationDirection, Problem};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A bounded open convex set, the state space of the walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum DomainSpec {
    /// The open box `lower < x < upper`.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// The open Euclidean ball.
    Ball { center: Vec<f64>, radius: f64 },
    /// The open polytope `{x : a_i . x < b_i}`, one row of `normals` per half-space.
    Polytope {
        normals: Vec<Vec<f64>>,
        offsets: Vec<f64>,
        /// Lattice anchor; the origin when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        origin: Option<Vec<f64>>,
    },
}

impl DomainSpec {
    pub fn unit_box(dim: usize) -> Self {
        DomainSpec::Box {
            lower: vec![0.0; dim],
            upper: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Box { lower, .. } => lower.len(),
            DomainSpec::Ball { center, .. } => center.len(),
            DomainSpec::Polytope { normals, .. } => normals.first().map_or(0, Vec::len),
        }
    }

    /// Checks that the set is bounded, open, convex and nonempty.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 {
            return Err(Error::InvalidDomain("dimension must be at least 1".into()));
        }
        match self {
            DomainSpec::Box { lower, upper } => {
                if upper.len() != d {
                    return Err(Error::InvalidDomain("box corners differ in dimension".into()));
                }
                for (lo, hi) in lower.iter().zip(upper) {
                    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                        return Err(Error::InvalidDomain(format!("empty box side [{lo}, {hi}]")));
                    }
                }
            }
            DomainSpec::Ball { center, radius } => {
                if !(radius.is_finite() && *radius > 0.0) || center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidDomain("ball needs a finite center and positive radius".into()));
                }
            }
            DomainSpec::Polytope { normals, offsets, origin } => {
                if normals.len() != offsets.len() || normals.iter().any(|a| a.len() != d) {
                    return Err(Error::InvalidDomain("polytope normals/offsets are inconsistent".into()));
                }
                if normals.iter().any(|a| a.iter().all(|v| *v == 0.0)) {
                    return Err(Error::InvalidDomain("zero normal in polytope".into()));
                }
                if let Some(o) = origin {
                    if o.len() != d {
                        return Err(Error::InvalidDomain("polytope origin has wrong dimension".into()));
                    }
                }
                // bounding_box fails on unbounded sets; the Chebyshev radius must be positive.
                self.bounding_box()?;
                let r = self.chebyshev_radius()?;
                if r <= 0.0 {
                    return Err(Error::InvalidDomain("polytope has empty interior".into()));
                }
            }
        }
        Ok(())
    }

    /// Signed distance-like margin: positive inside, zero on the boundary, negative outside.
    pub fn margin(&self, p: &[f64]) -> f64 {
        match self {
            DomainSpec::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .zip(p)
                .map(|((lo, hi), x)| (x - lo).min(hi - x))
                .fold(f64::INFINITY, f64::min),
            DomainSpec::Ball { center, radius } => {
                let r2: f64 = center.iter().zip(p).map(|(c, x)| (x - c) * (x - c)).sum();
                radius - r2.sqrt()
            }
            DomainSpec::Polytope { normals, offsets, .. } => normals
                .iter()
                .zip(offsets)
                .map(|(a, b)| {
                    let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
                    (b - a.iter().zip(p).map(|(ai, xi)| ai * xi).sum::<f64>()) / norm
                })
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Point the lattice is anchored at.
    pub fn anchor(&self) -> Vec<f64> {
        match self {
            DomainSpec::Box { lower, .. } => lower.clone(),
            DomainSpec::Ball { center, .. } => center.clone(),
            DomainSpec::Polytope { origin, normals, .. } => origin
                .clone()
                .unwrap_or_else(|| vec![0.0; normals.first().map_or(0, Vec::len)]),
        }
    }

    /// Axis-aligned bounding box of the closure.
    pub fn bounding_box(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        match self {
            DomainSpec::Box { lower, upper } => Ok((lower.clone(), upper.clone())),
            DomainSpec::Ball { center, radius } => Ok((
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            )),
            DomainSpec::Polytope { normals, offsets, .. } => {
                let d = self.dim();
                let mut lo = vec![0.0; d];
                let mut hi = vec![0.0; d];
                for axis in 0..d {
                    for (dir, out) in [
                        (OptimizationDirection::Minimize, &mut lo),
                        (OptimizationDirection::Maximize, &mut hi),
                    ] {
                        let mut lp = Problem::new(dir);
                        let vars: Vec<_> = (0..d)
                            .map(|k| lp.add_var(if k == axis { 1.0 } else { 0.0 }, (f64::NEG_INFINITY, f64::INFINITY)))
                            .collect();
                        for (a, b) in normals.iter().zip(offsets) {
                            let expr: Vec<_> = vars.iter().copied().zip(a.iter().copied()).collect();
                            lp.add_constraint(expr.as_slice(), ComparisonOp::Le, *b);
                        }
                        let sol = lp.solve().map_err(|e| match e {
                            minilp::Error::Unbounded => Error::InvalidDomain("polytope is unbounded".into()),
                            minilp::Error::Infeasible => Error::InvalidDomain("polytope is empty".into()),
                        })?;
                        out[axis] = sol.objective();
                    }
                }
                Ok((lo, hi))
            }
        }
    }

    /// Radius of the largest inscribed ball of a polytope.
    fn chebyshev_radius(&self) -> Result<f64> {
        let DomainSpec::Polytope { normals, offsets, .. } = self else {
            return Ok(f64::INFINITY);
        };
        let d = self.dim();
        let mut lp = Problem::new(OptimizationDirection::Maximize);
        let x: Vec<_> = (0..d)
            .map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
            .collect();
        let r = lp.add_var(1.0, (0.0, f64::INFINITY));
        for (a, b) in normals.iter().zip(offsets) {
            let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut expr: Vec<_> = x.iter().copied().zip(a.iter().copied()).collect();
            expr.push((r, norm));
            lp.add_constraint(expr.as_slice(), ComparisonOp::Le, *b);
        }
        match lp.solve() {
            Ok(sol) => Ok(sol.objective()),
            Err(minilp::Error::Infeasible) => Ok(0.0),
            Err(minilp::Error::Unbounded) => Err(Error::InvalidDomain("polytope is unbounded".into())),
        }
    }
}
