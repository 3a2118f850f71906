use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::barrier::Barrier;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridMeasure};
use crate::tol::PATH_STEP_CAP;

/// Bins in the stopping-time histogram.
const HISTOGRAM_BINS: usize = 50;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SimOptions {
    pub n_paths: u64,
    pub seed: u64,
    pub step_cap: u64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { n_paths: 100_000, seed: 0, step_cap: PATH_STEP_CAP }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimResult {
    pub n_paths: u64,
    pub seed: u64,
    pub empirical: GridMeasure,
    /// `sqrt(p (1 - p) / N)` per node.
    pub standard_error: Vec<f64>,
    /// Fraction of paths stopped at time zero by the stay-put rule.
    pub stay_put_fraction: f64,
    /// Mean stopping time in physical units (`h^2 / 2d` per step).
    pub mean_time: f64,
    pub mean_time_se: f64,
    /// Paths cut off at the step cap; they count at the node where they were cut.
    pub censored: u64,
    /// `(bin_start, bin_end, count)` of physical stopping times.
    pub time_histogram: Vec<(f64, f64, u64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tv_to_target: Option<f64>,
}

struct PathEnd {
    node: usize,
    steps: u64,
    stayed: bool,
    censored: bool,
}

/// Index into `cdf` of the first cumulative weight above `u`.
fn sample_start(cdf: &[(usize, f64)], u: f64) -> usize {
    cdf.partition_point(|&(_, c)| c <= u).min(cdf.len() - 1)
}

/// Monte-Carlo paths of the walk from `mu`, each stopped at the first time
/// `t >= 1` it sits in [`Barrier::stopping_set`] of its source or on the boundary.
///
/// Path `i` draws from ChaCha8 seeded with `seed` on stream `i`, so results
/// do not depend on the thread count.
pub fn simulate_hitting(
    barrier: &Barrier,
    mu: &GridMeasure,
    g: &Grid,
    opts: &SimOptions,
    stay_put: Option<&GridMeasure>,
    target: Option<&GridMeasure>,
) -> Result<SimResult> {
    let n = g.len();
    mu.check_probability(g, "mu")?;
    if barrier.n != n || stay_put.is_some_and(|s| s.len() != n) || target.is_some_and(|t| t.len() != n) {
        return Err(Error::InvalidInput("barrier, measures and grid disagree in size".into()));
    }
    if opts.n_paths == 0 {
        return Err(Error::InvalidInput("n_paths must be positive".into()));
    }
    let mut acc = 0.0;
    let mut cdf = Vec::new();
    let mut regions = Vec::new();
    for x in mu.support() {
        acc += mu[x];
        cdf.push((x, acc));
        let stays_all = stay_put.is_some_and(|s| s[x] >= mu[x]);
        let r = barrier.stopping_set(x);
        if r.is_none() && !stays_all {
            return Err(Error::InvalidInput(format!("barrier has no region for source {x}")));
        }
        regions.push(r);
    }
    let total = acc;

    let ends: Vec<PathEnd> = (0..opts.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(i);
            let k = sample_start(&cdf, rng.random::<f64>() * total);
            let x0 = cdf[k].0;
            if let Some(s) = stay_put {
                if rng.random::<f64>() * mu[x0] < s[x0].min(mu[x0]) {
                    return PathEnd { node: x0, steps: 0, stayed: true, censored: false };
                }
            }
            let Some(region) = &regions[k] else {
                return PathEnd { node: x0, steps: 0, stayed: true, censored: false };
            };
            let mut x = x0;
            let mut steps = 0u64;
            if g.is_boundary(x) {
                return PathEnd { node: x, steps, stayed: false, censored: false };
            }
            loop {
                let nb = g.neighbors(x);
                let slot = rng.random_range(0..nb.len());
                x = nb[slot].expect("interior nodes have all neighbors");
                steps += 1;
                if g.is_boundary(x) || region[x] {
                    return PathEnd { node: x, steps, stayed: false, censored: false };
                }
                if steps >= opts.step_cap {
                    return PathEnd { node: x, steps, stayed: false, censored: true };
                }
            }
        })
        .collect();

    let np = opts.n_paths as f64;
    let mut counts = vec![0u64; n];
    let mut stayed = 0u64;
    let mut censored = 0u64;
    let dt = g.step_time();
    let mut sum_t = 0.0;
    let mut sum_t2 = 0.0;
    let mut max_steps = 0u64;
    for e in &ends {
        counts[e.node] += 1;
        stayed += e.stayed as u64;
        censored += e.censored as u64;
        let t = e.steps as f64 * dt;
        sum_t += t;
        sum_t2 += t * t;
        max_steps = max_steps.max(e.steps);
    }
    let empirical = GridMeasure::new(counts.iter().map(|&c| c as f64 / np).collect())?;
    let standard_error = empirical.weights().iter().map(|p| (p * (1.0 - p) / np).sqrt()).collect();
    let mean_time = sum_t / np;
    let var = (sum_t2 / np - mean_time * mean_time).max(0.0);
    let mean_time_se = (var / np).sqrt();

    let width = ((max_steps as f64 + 1.0) / HISTOGRAM_BINS as f64).ceil().max(1.0) as u64;
    let mut bins = vec![0u64; HISTOGRAM_BINS];
    for e in &ends {
        bins[((e.steps / width) as usize).min(HISTOGRAM_BINS - 1)] += 1;
    }
    let time_histogram = bins
        .iter()
        .enumerate()
        .map(|(b, &c)| ((b as u64 * width) as f64 * dt, ((b as u64 + 1) * width) as f64 * dt, c))
        .collect();

    let tv_to_target = target.map(|t| empirical.tv_distance(t));
    Ok(SimResult {
        n_paths: opts.n_paths,
        seed: opts.seed,
        empirical,
        standard_error,
        stay_put_fraction: stayed as f64 / np,
        mean_time,
        mean_time_se,
        censored,
        time_histogram,
        tv_to_target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, DomainSpec};
    use crate::primal::exact_stopped_law;

    #[test]
    fn gamblers_ruin_frequencies() {
        let g = build_grid(&DomainSpec::unit_box(1), 0.25).unwrap();
        let x = g.nearest_node(&[0.25]).unwrap();
        let b = Barrier::uniform(g.len(), vec![x], vec![false; g.len()]);
        let mu = GridMeasure::dirac(g.len(), x);
        let opts = SimOptions { n_paths: 40_000, seed: 7, ..SimOptions::default() };
        let r = simulate_hitting(&b, &mu, &g, &opts, None, None).unwrap();
        let left = g.nearest_node(&[0.0]).unwrap();
        assert!((r.empirical[left] - 0.75).abs() < 4.0 * r.standard_error[left]);
        // Exit time from 1 on {0,..,4} is 1 * 3 = 3 steps of h^2/2.
        assert!((r.mean_time - 3.0 * g.step_time()).abs() < 4.0 * r.mean_time_se);
        assert_eq!(r.censored, 0);
    }

    #[test]
    fn same_seed_same_result() {
        let g = build_grid(&DomainSpec::unit_box(2), 0.125).unwrap();
        let x = g.nearest_node(&[0.5, 0.5]).unwrap();
        let region: Vec<bool> = (0..g.len()).map(|i| g.lattice_distance(i, x) == 2).collect();
        let b = Barrier::uniform(g.len(), vec![x], region);
        let mu = GridMeasure::dirac(g.len(), x);
        let opts = SimOptions { n_paths: 2_000, seed: 11, ..SimOptions::default() };
        let a = simulate_hitting(&b, &mu, &g, &opts, None, None).unwrap();
        let c = simulate_hitting(&b, &mu, &g, &opts, None, None).unwrap();
        assert_eq!(a.empirical, c.empirical);
        let exact = exact_stopped_law(&b, &mu, &g, None).unwrap();
        assert!(a.empirical.tv_distance(&exact) < 0.05);
    }

    #[test]
    fn step_cap_censors() {
        let g = build_grid(&DomainSpec::unit_box(1), 0.01).unwrap();
        let x = g.nearest_node(&[0.5]).unwrap();
        let b = Barrier::uniform(g.len(), vec![x], vec![false; g.len()]);
        let mu = GridMeasure::dirac(g.len(), x);
        let opts = SimOptions { n_paths: 100, seed: 1, step_cap: 10 };
        let r = simulate_hitting(&b, &mu, &g, &opts, None, None).unwrap();
        assert_eq!(r.censored, 100);
    }
}
