//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skorokhod_core::cost::CostMatrix;
use skorokhod_core::dual::improve;
use skorokhod_core::grid::{Grid, GridMeasure, ScalarField};

/// Mean of `u` over the axis neighbors of interior node `i`.
fn mean_nbrs(u: &[f64], g: &Grid, i: usize) -> f64 {
    let nb = g.neighbors(i);
    nb.iter().map(|j| u[j.unwrap()]).sum::<f64>() / nb.len() as f64
}

/// Optimal-stopping value `sup_tau E[obstacle(X_tau)]` with boundary payoff
/// `bdry`, by Jacobi value iteration from the obstacle itself.
pub fn value_iteration(obstacle: &[f64], bdry: &[f64], g: &Grid) -> Vec<f64> {
    let n = g.len();
    let mut u: Vec<f64> = (0..n).map(|i| if g.is_interior(i) { obstacle[i] } else { bdry[i] }).collect();
    for _ in 0..2_000_000 {
        let next: Vec<f64> = (0..n)
            .map(|i| if g.is_interior(i) { obstacle[i].max(mean_nbrs(&u, g, i)) } else { u[i] })
            .collect();
        let change = next.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        u = next;
        if change < 1e-15 {
            break;
        }
    }
    u
}

/// Least superharmonic majorant of `hf` with the boundary values of `hf`, as
/// the minimizer of the Dirichlet energy over `{u >= hf}` by accelerated
/// projected gradient.
pub fn projected_gradient_envelope(hf: &[f64], g: &Grid) -> Vec<f64> {
    let n = g.len();
    let two_d = 2.0 * g.dim() as f64;
    // The graph Laplacian has spectral radius at most 4d.
    let step = 1.0 / (2.0 * two_d);
    let project = |v: &mut Vec<f64>| {
        for i in 0..n {
            if g.is_interior(i) {
                v[i] = v[i].max(hf[i]);
            } else {
                v[i] = hf[i];
            }
        }
    };
    let mut x = hf.to_vec();
    project(&mut x);
    let mut y = x.clone();
    let mut t: f64 = 1.0;
    for _ in 0..2_000_000 {
        let mut next = y.clone();
        for i in 0..n {
            if g.is_interior(i) {
                // Energy gradient: sum over neighbors of (u_i - u_j).
                let grad = two_d * (y[i] - mean_nbrs(&y, g, i));
                next[i] = y[i] - step * grad;
            }
        }
        project(&mut next);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let change = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        y = next.iter().zip(&x).map(|(a, b)| a + (t - 1.0) / t_next * (a - b)).collect();
        x = next;
        t = t_next;
        if change < 1e-14 {
            break;
        }
    }
    x
}

/// Empirical hitting law of `absorbing` or the boundary from `x`, by a
/// plain sequential walk. Returns frequencies.
pub fn monte_carlo_hitting(x: usize, absorbing: &[bool], g: &Grid, paths: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0usize; g.len()];
    for _ in 0..paths {
        let mut z = x;
        while g.is_interior(z) && !absorbing[z] {
            let nb = g.neighbors(z);
            z = nb[rng.random_range(0..nb.len())].unwrap();
        }
        counts[z] += 1;
    }
    counts.iter().map(|&c| c as f64 / paths as f64).collect()
}

/// A random nonpositive field vanishing on the boundary: a sum of a few
/// negative bumps with random centers, widths and heights.
pub fn random_field(g: &Grid, rng: &mut ChaCha8Rng, scale: f64) -> ScalarField {
    let bumps: Vec<(Vec<f64>, f64, f64)> = (0..4)
        .map(|_| {
            let c: Vec<f64> = (0..g.dim()).map(|_| rng.random_range(0.1..0.9)).collect();
            (c, rng.random_range(0.05..0.4), rng.random_range(0.0..scale))
        })
        .collect();
    let mut f = ScalarField::from_fn(g, |p| {
        -bumps
            .iter()
            .map(|(c, w, a)| a * (-p.iter().zip(c).map(|(u, v)| (u - v).powi(2)).sum::<f64>() / (2.0 * w * w)).exp())
            .sum::<f64>()
    });
    for &b in g.boundary_nodes() {
        f[b] = 0.0;
    }
    f
}

/// A random field passed through the improvement operators.
pub fn random_certified(g: &Grid, cost: &CostMatrix, rng: &mut ChaCha8Rng, scale: f64) -> ScalarField {
    improve(&random_field(g, rng, scale), cost, g).expect("improve")
}

/// Random absorbing set inside the domain, always feasible from any start.
pub fn random_absorbing(g: &Grid, rng: &mut ChaCha8Rng, density: f64) -> Vec<bool> {
    (0..g.len()).map(|i| g.is_interior(i) && rng.random::<f64>() < density).collect()
}

/// Random probability measure on the given nodes.
pub fn random_measure(n: usize, nodes: &[usize], rng: &mut ChaCha8Rng) -> GridMeasure {
    let mut w = vec![0.0; n];
    for &i in nodes {
        w[i] = rng.random_range(0.1..1.0);
    }
    let total: f64 = w.iter().sum();
    GridMeasure::new(w.into_iter().map(|v| v / total).collect()).unwrap()
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
}
