//! Lattice discretization of a convex domain and the discrete calculus on it.
//!
//! Nodes are the lattice points `anchor + h k` in the closed domain. A node is
//! interior when it lies strictly inside and all `2d` axis neighbors are nodes;
//! every other node is boundary and absorbs the walk. Boundary nodes that touch
//! no interior node (box corners, for instance) are dropped.
//!
//! The simple symmetric walk moves to each axis neighbor with probability
//! `1/(2d)` and takes `h^2/(2d)` units of time per step, so its generator is
//! exactly the five-point (in 2D) Laplacian [`discrete_laplacian`].

mod domain;
mod field;
pub(crate) mod linalg;
mod order;
mod potential;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use domain::DomainSpec;
pub use field::{GridMeasure, ScalarField};
pub use order::{check_subharmonic_order, OccupationCertificate, SubharmonicOrder, SubharmonicWitness};
pub use potential::{exit_time_potential, h_minus1_norm, solve_poisson};

use crate::error::{Error, Result};

/// Hard cap on node count; keeps dense cost matrices addressable.
pub const MAX_NODES: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Interior,
    Boundary,
}

/// Lattice grid with interior/boundary classification and axis adjacency.
#[derive(Debug, Clone)]
pub struct Grid {
    dim: usize,
    h: f64,
    domain: DomainSpec,
    lattice: Vec<i64>,
    coords: Vec<f64>,
    kind: Vec<NodeKind>,
    /// `2d` slots per node, ordered `+e_0, -e_0, +e_1, -e_1, ...`.
    neighbors: Vec<Option<usize>>,
    interior: Vec<usize>,
    boundary: Vec<usize>,
    index: HashMap<Vec<i64>, usize>,
}

impl Grid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.kind.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kind.is_empty()
    }

    /// Cell volume `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    /// Physical time carried by one walk step, `h^2/(2d)`.
    pub fn step_time(&self) -> f64 {
        self.h * self.h / (2 * self.dim) as f64
    }

    pub fn coord(&self, node: usize) -> &[f64] {
        &self.coords[node * self.dim..(node + 1) * self.dim]
    }

    pub fn lattice(&self, node: usize) -> &[i64] {
        &self.lattice[node * self.dim..(node + 1) * self.dim]
    }

    pub fn kind(&self, node: usize) -> NodeKind {
        self.kind[node]
    }

    pub fn is_interior(&self, node: usize) -> bool {
        self.kind[node] == NodeKind::Interior
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.kind[node] == NodeKind::Boundary
    }

    /// The `2d` axis neighbors; always all present for interior nodes.
    pub fn neighbors(&self, node: usize) -> &[Option<usize>] {
        let k = 2 * self.dim;
        &self.neighbors[node * k..(node + 1) * k]
    }

    /// Neighbors of an interior node, unwrapped.
    pub fn interior_neighbors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        debug_assert!(self.is_interior(node));
        self.neighbors(node).iter().map(|n| n.expect("interior node has a full stencil"))
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary
    }

    pub fn find(&self, lattice: &[i64]) -> Option<usize> {
        self.index.get(lattice).copied()
    }

    /// Node whose coordinates are closest to `p`, if within `h/2` in every axis.
    pub fn nearest_node(&self, p: &[f64]) -> Option<usize> {
        if p.len() != self.dim {
            return None;
        }
        let anchor = self.domain.anchor();
        let k: Vec<i64> = p
            .iter()
            .zip(&anchor)
            .map(|(x, a)| ((x - a) / self.h).round() as i64)
            .collect();
        self.find(&k)
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.coord(a)
            .iter()
            .zip(self.coord(b))
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    /// Number of lattice steps between two nodes (L1 distance of lattice coordinates).
    pub fn lattice_distance(&self, a: usize, b: usize) -> i64 {
        self.lattice(a)
            .iter()
            .zip(self.lattice(b))
            .map(|(x, y)| (x - y).abs())
            .sum()
    }

    /// Stable fingerprint of the node set, spacing and domain.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_vec(&self.domain).unwrap_or_default());
        hasher.update(self.h.to_le_bytes());
        hasher.update((self.dim as u64).to_le_bytes());
        for (i, k) in self.lattice.iter().enumerate() {
            hasher.update(k.to_le_bytes());
            if (i + 1) % self.dim == 0 {
                hasher.update([self.kind[i / self.dim] as u8]);
            }
        }
        hex::encode(hasher.finalize())
    }

    pub fn dump(&self) -> GridDump {
        GridDump {
            dim: self.dim,
            h: self.h,
            domain: self.domain.clone(),
            nodes: (0..self.len())
                .map(|i| NodeRecord {
                    lattice: self.lattice(i).to_vec(),
                    coord: self.coord(i).to_vec(),
                    kind: self.kind[i],
                })
                .collect(),
        }
    }

    /// Rebuilds a grid from a dump, re-deriving adjacency from lattice coordinates.
    pub fn from_dump(dump: &GridDump) -> Result<Grid> {
        let d = dump.dim;
        let lattice: Vec<Vec<i64>> = dump.nodes.iter().map(|n| n.lattice.clone()).collect();
        let kinds: Vec<NodeKind> = dump.nodes.iter().map(|n| n.kind).collect();
        let coords: Vec<f64> = dump.nodes.iter().flat_map(|n| n.coord.iter().copied()).collect();
        if lattice.iter().any(|k| k.len() != d) || coords.len() != d * lattice.len() {
            return Err(Error::InvalidInput("grid dump has inconsistent dimensions".into()));
        }
        let grid = Grid::assemble(dump.domain.clone(), dump.h, d, lattice, coords, kinds);
        for &i in grid.interior_nodes() {
            if grid.neighbors(i).iter().any(Option::is_none) {
                return Err(Error::InvalidInput(format!("interior node {i} has a missing neighbor")));
            }
        }
        Ok(grid)
    }

    fn assemble(
        domain: DomainSpec,
        h: f64,
        dim: usize,
        lattice: Vec<Vec<i64>>,
        coords: Vec<f64>,
        kind: Vec<NodeKind>,
    ) -> Grid {
        let index: HashMap<Vec<i64>, usize> = lattice
            .iter()
            .enumerate()
            .map(|(i, k)| (k.clone(), i))
            .collect();
        let mut neighbors = Vec::with_capacity(lattice.len() * 2 * dim);
        let mut probe = vec![0i64; dim];
        for k in &lattice {
            for axis in 0..dim {
                for step in [1i64, -1] {
                    probe.copy_from_slice(k);
                    probe[axis] += step;
                    neighbors.push(index.get(&probe).copied());
                }
            }
        }
        let interior = (0..kind.len()).filter(|&i| kind[i] == NodeKind::Interior).collect();
        let boundary = (0..kind.len()).filter(|&i| kind[i] == NodeKind::Boundary).collect();
        Grid {
            dim,
            h,
            domain,
            lattice: lattice.into_iter().flatten().collect(),
            coords,
            kind,
            neighbors,
            interior,
            boundary,
            index,
        }
    }
}

/// Self-describing text dump of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDump {
    pub dim: usize,
    pub h: f64,
    pub domain: DomainSpec,
    pub nodes: Vec<NodeRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub lattice: Vec<i64>,
    pub coord: Vec<f64>,
    pub kind: NodeKind,
}

/// Builds the lattice grid of `spec` with spacing `h`.
pub fn build_grid(spec: &DomainSpec, h: f64) -> Result<Grid> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidInput(format!("grid spacing must be positive, got {h}")));
    }
    spec.validate()?;
    let d = spec.dim();
    let anchor = spec.anchor();
    let (lo, hi) = spec.bounding_box()?;
    let eps = 1e-9 * h;

    let kmin: Vec<i64> = lo.iter().zip(&anchor).map(|(l, a)| ((l - a) / h - 1e-9).floor() as i64).collect();
    let kmax: Vec<i64> = hi.iter().zip(&anchor).map(|(u, a)| ((u - a) / h + 1e-9).ceil() as i64).collect();
    let total: f64 = kmin.iter().zip(&kmax).map(|(a, b)| (b - a + 1) as f64).product();
    if total > (MAX_NODES * 8) as f64 {
        return Err(Error::GridTooLarge { nodes: total as usize, limit: MAX_NODES });
    }

    let point = |k: &[i64]| -> Vec<f64> { k.iter().zip(&anchor).map(|(ki, a)| a + *ki as f64 * h).collect() };

    // Lattice points of the closed domain, in lexicographic order.
    let mut closure: Vec<Vec<i64>> = Vec::new();
    let mut k = kmin.clone();
    'scan: loop {
        if spec.margin(&point(&k)) >= -eps {
            closure.push(k.clone());
        }
        let mut axis = d;
        loop {
            if axis == 0 {
                break 'scan;
            }
            axis -= 1;
            if k[axis] < kmax[axis] {
                k[axis] += 1;
                break;
            }
            k[axis] = kmin[axis];
        }
    }
    if closure.len() > MAX_NODES {
        return Err(Error::GridTooLarge { nodes: closure.len(), limit: MAX_NODES });
    }

    let in_closure: std::collections::HashSet<&Vec<i64>> = closure.iter().collect();
    let mut probe = vec![0i64; d];
    let is_interior: Vec<bool> = closure
        .iter()
        .map(|k| {
            if spec.margin(&point(k)) <= eps {
                return false;
            }
            (0..d).all(|axis| {
                [1i64, -1].iter().all(|s| {
                    probe.copy_from_slice(k);
                    probe[axis] += s;
                    in_closure.contains(&probe)
                })
            })
        })
        .collect();
    if !is_interior.iter().any(|&b| b) {
        return Err(Error::EmptyGrid);
    }

    let interior_set: std::collections::HashSet<&Vec<i64>> = closure
        .iter()
        .zip(&is_interior)
        .filter_map(|(k, &b)| b.then_some(k))
        .collect();
    let mut lattice = Vec::new();
    let mut kinds = Vec::new();
    for (k, &interior) in closure.iter().zip(&is_interior) {
        let keep = interior
            || (0..d).any(|axis| {
                [1i64, -1].iter().any(|s| {
                    probe.copy_from_slice(k);
                    probe[axis] += s;
                    interior_set.contains(&probe)
                })
            });
        if keep {
            lattice.push(k.clone());
            kinds.push(if interior { NodeKind::Interior } else { NodeKind::Boundary });
        }
    }
    let coords: Vec<f64> = lattice.iter().flat_map(|k| point(k)).collect();
    Ok(Grid::assemble(spec.clone(), h, d, lattice, coords, kinds))
}

/// `Lf(x) = sum_i (f(x + h e_i) + f(x - h e_i) - 2 f(x)) / h^2` on interior nodes, zero elsewhere.
pub fn discrete_laplacian(f: &ScalarField, g: &Grid) -> ScalarField {
    let mut out = vec![0.0; g.len()];
    for &i in g.interior_nodes() {
        out[i] = laplacian_at(f.values(), g, i);
    }
    ScalarField::new(out)
}

#[inline]
pub(crate) fn laplacian_at(f: &[f64], g: &Grid, i: usize) -> f64 {
    let center = f[i];
    let sum: f64 = g.interior_neighbors(i).map(|j| f[j] - center).sum();
    sum / (g.h * g.h)
}

/// Neighbor average at an interior node: one step of the walk's transition kernel.
#[inline]
pub(crate) fn neighbor_mean(f: &[f64], g: &Grid, i: usize) -> f64 {
    let s: f64 = g.interior_neighbors(i).map(|j| f[j]).sum();
    s / (2 * g.dim) as f64
}
