use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};

/// `h_eps(y) = min_z { hf(z) + |y - z|^2 / (2 eps) }` over grid nodes `z`.
pub fn inf_convolution(hf: &ScalarField, eps: f64, g: &Grid) -> Result<ScalarField> {
    hf.check_len(g, "function")?;
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidInput(format!("inf-convolution needs eps > 0, got {eps}")));
    }
    let scale = 1.0 / (2.0 * eps);
    let out = (0..g.len())
        .into_par_iter()
        .map(|y| {
            (0..g.len())
                .map(|z| {
                    let d = g.distance(y, z);
                    hf[z] + d * d * scale
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok(ScalarField::new(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, DomainSpec};

    #[test]
    fn constants_are_unchanged() {
        let g = build_grid(&DomainSpec::unit_box(2), 0.125).unwrap();
        let c = ScalarField::constant(g.len(), -0.7);
        assert_eq!(inf_convolution(&c, 0.3, &g).unwrap(), c);
    }

    #[test]
    fn lower_and_monotone_in_eps() {
        let g = build_grid(&DomainSpec::unit_box(2), 0.1).unwrap();
        let f = ScalarField::from_fn(&g, |p| (p[0] - 0.3).abs() + 0.5 * (p[1] - 0.6).abs());
        let mut prev = inf_convolution(&f, 1.0, &g).unwrap();
        for eps in [0.3, 0.1, 0.03, 1e-3] {
            let cur = inf_convolution(&f, eps, &g).unwrap();
            for i in 0..g.len() {
                assert!(cur[i] <= f[i] + 1e-15);
                assert!(cur[i] >= prev[i] - 1e-15);
            }
            prev = cur;
        }
        // at eps = 1e-3 the penalty h^2 / 2 eps = 5 exceeds the Lipschitz gain
        assert!(prev.sup_distance(&f) < 1e-12);
    }

    #[test]
    fn spike_matches_a_direct_scan() {
        let g = build_grid(&DomainSpec::unit_box(1), 0.05).unwrap();
        let mut f = ScalarField::constant(g.len(), 1.0);
        f[7] = -2.0;
        let out = inf_convolution(&f, 0.02, &g).unwrap();
        for y in 0..g.len() {
            let dy = g.coord(y)[0] - g.coord(7)[0];
            let expected = f64::min(1.0, -2.0 + dy * dy / 0.04);
            assert!((out[y] - expected).abs() < 1e-14);
        }
    }
}
