//! Checks of the known sufficient conditions for the stochastic twist property.
//!
//! The property itself quantifies over all stopping times and has no finite
//! test; a passing report means only that one of the sufficient conditions
//! below holds on the sampled pairs.

use serde::{Deserialize, Serialize};

use super::CostSpec;
use crate::grid::{discrete_laplacian, Grid, ScalarField};

/// Finite-difference step for gradients in `x`, in units of `h`.
const FD_STEP: f64 = 1e-5;

/// Tolerance on `| |grad_x c| - 1 |` for distance-type costs.
const UNIT_GRADIENT_TOL: f64 = 1e-8;

/// Pair count above which the pairs are subsampled with a fixed stride.
const MAX_PAIRS: usize = 40_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwistVerdict {
    /// A sufficient condition holds at every checked pair.
    SufficientConditionHolds,
    /// The cost provably fails the property (quadratic cost) or a checked condition fails.
    Violated,
    /// No sufficient condition applies to this cost.
    Unknown,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwistPair {
    pub x: usize,
    pub y: usize,
    /// The quantity checked at this pair: `|grad_x c|` for distance costs, `|grad g(x)|` for separable ones.
    pub measured: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwistReport {
    pub verdict: TwistVerdict,
    pub condition: String,
    pub pairs: Vec<TwistPair>,
    /// Pairs with `x = y`, where the distance is not differentiable. Reported, not fatal.
    pub singular_pairs: Vec<(usize, usize)>,
}

fn grad_x(f: impl Fn(&[f64]) -> f64, x: &[f64], step: f64) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|k| {
            p[k] = x[k] + step;
            let fp = f(&p);
            p[k] = x[k] - step;
            let fm = f(&p);
            p[k] = x[k];
            (fp - fm) / (2.0 * step)
        })
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn sampled_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    let stride = (n * n).div_ceil(MAX_PAIRS).max(1);
    (0..n * n).step_by(stride).map(move |k| (k / n, k % n))
}

fn unwrap_shift(spec: &CostSpec) -> &CostSpec {
    match spec {
        CostSpec::Shifted { base, .. } => unwrap_shift(base),
        other => other,
    }
}

/// Reports which sufficient condition for the stochastic twist property holds.
///
/// Gradients in `x` are central differences in the continuous variable with
/// step `1e-5 h`; a step of `h` would carry an `O(h^2 / |x - y|^2)` error far
/// above the unit-gradient tolerance.
pub fn twist_report(spec: &CostSpec, g: &Grid) -> TwistReport {
    let step = FD_STEP * g.h();
    // A shift adds a function of y alone and leaves grad_x unchanged.
    let spec = unwrap_shift(spec);
    match spec {
        CostSpec::Quadratic => TwistReport {
            verdict: TwistVerdict::Violated,
            condition: "grad_x c = 2(x - y) is a martingale in y, so equality holds for every stopping time".into(),
            pairs: Vec::new(),
            singular_pairs: Vec::new(),
        },
        CostSpec::Distance | CostSpec::NegativeDistance => {
            let mut pairs = Vec::new();
            let mut singular_pairs = Vec::new();
            for (x, y) in sampled_pairs(g.len()) {
                if x == y {
                    singular_pairs.push((x, y));
                    continue;
                }
                let yc = g.coord(y);
                let gr = grad_x(|p| spec.eval(p, yc), g.coord(x), step);
                let measured = norm(&gr);
                pairs.push(TwistPair { x, y, measured, pass: (measured - 1.0).abs() <= UNIT_GRADIENT_TOL });
            }
            let all_pass = pairs.iter().all(|p| p.pass);
            let verdict = if !all_pass {
                TwistVerdict::Violated
            } else if g.dim() >= 2 {
                TwistVerdict::SufficientConditionHolds
            } else {
                // On a line the unit gradient is a sign, and paths that stay
                // on one side of x give equality.
                TwistVerdict::Unknown
            };
            TwistReport {
                verdict,
                condition: "|grad_x c(x, y)| = 1 for x != y (dimension >= 2)".into(),
                pairs,
                singular_pairs,
            }
        }
        CostSpec::Separable { g: gx, h: hy } => {
            let hf = ScalarField::from_fn(g, |p| hy.eval(p));
            let lh = discrete_laplacian(&hf, g);
            let interior = g.interior_nodes();
            let strict_sub = interior.iter().all(|&i| lh[i] > 0.0);
            let strict_super = interior.iter().all(|&i| lh[i] < 0.0);
            let pairs: Vec<TwistPair> = (0..g.len())
                .map(|x| {
                    let measured = norm(&grad_x(|p| gx.eval(p), g.coord(x), step));
                    TwistPair { x, y: x, measured, pass: measured > UNIT_GRADIENT_TOL }
                })
                .collect();
            let verdict = if (strict_sub || strict_super) && pairs.iter().all(|p| p.pass) {
                TwistVerdict::SufficientConditionHolds
            } else {
                TwistVerdict::Violated
            };
            TwistReport {
                verdict,
                condition: "grad g(x) != 0 and h strictly sub- or superharmonic".into(),
                pairs,
                singular_pairs: Vec::new(),
            }
        }
        CostSpec::SoftDistance { .. } | CostSpec::Shifted { .. } => TwistReport {
            verdict: TwistVerdict::Unknown,
            condition: "no sufficient condition is checked for this cost".into(),
            pairs: Vec::new(),
            singular_pairs: Vec::new(),
        },
    }
}
