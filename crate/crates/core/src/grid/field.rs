use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use super::Grid;
use crate::error::{Error, Result};
use crate::tol::MASS_TOL;

/// One real value per grid node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScalarField(Vec<f64>);

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Self {
        ScalarField(values)
    }

    pub fn zeros(n: usize) -> Self {
        ScalarField(vec![0.0; n])
    }

    pub fn constant(n: usize, value: f64) -> Self {
        ScalarField(vec![value; n])
    }

    pub fn from_fn(g: &Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        ScalarField((0..g.len()).map(|i| f(g.coord(i))).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Sup-norm distance to another field.
    pub fn sup_distance(&self, other: &ScalarField) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `self + alpha * dir`.
    pub fn axpy(&self, alpha: f64, dir: &ScalarField) -> ScalarField {
        ScalarField(self.0.iter().zip(&dir.0).map(|(a, b)| a + alpha * b).collect())
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        ScalarField(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: f64) -> ScalarField {
        ScalarField(self.0.iter().map(|a| a * s).collect())
    }

    /// `sum_x f(x) m(x)`.
    pub fn integrate(&self, m: &GridMeasure) -> f64 {
        self.0.iter().zip(m.weights()).map(|(f, w)| f * w).sum()
    }

    pub(crate) fn check_len(&self, g: &Grid, what: &str) -> Result<()> {
        if self.0.len() != g.len() {
            return Err(Error::InvalidInput(format!(
                "{what} has {} values, grid has {} nodes",
                self.0.len(),
                g.len()
            )));
        }
        if !self.is_finite() {
            return Err(Error::InvalidInput(format!("{what} has non-finite values")));
        }
        Ok(())
    }
}

impl Index<usize> for ScalarField {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for ScalarField {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

/// Nonnegative node weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct GridMeasure(Vec<f64>);

impl TryFrom<Vec<f64>> for GridMeasure {
    type Error = Error;
    fn try_from(weights: Vec<f64>) -> Result<Self> {
        GridMeasure::new(weights)
    }
}

impl From<GridMeasure> for Vec<f64> {
    fn from(m: GridMeasure) -> Vec<f64> {
        m.0
    }
}

impl GridMeasure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidInput(format!("measure weight {w} is negative or not finite")));
        }
        Ok(GridMeasure(weights))
    }

    pub fn zeros(n: usize) -> Self {
        GridMeasure(vec![0.0; n])
    }

    pub fn dirac(n: usize, node: usize) -> Self {
        let mut w = vec![0.0; n];
        w[node] = 1.0;
        GridMeasure(w)
    }

    /// Uniform probability on the given nodes.
    pub fn uniform(n: usize, nodes: &[usize]) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidInput("uniform measure over no nodes".into()));
        }
        let mut w = vec![0.0; n];
        let p = 1.0 / nodes.len() as f64;
        for &i in nodes {
            w[i] += p;
        }
        Ok(GridMeasure(w))
    }

    /// Clamps tiny negative round-off to zero; errors on anything larger.
    pub fn from_signed(weights: Vec<f64>, tol: f64) -> Result<Self> {
        let mut w = weights;
        for v in &mut w {
            if *v < -tol || !v.is_finite() {
                return Err(Error::InvalidInput(format!("measure weight {v} below -{tol:e}")));
            }
            *v = v.max(0.0);
        }
        Ok(GridMeasure(w))
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] > 0.0).collect()
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.total();
        if t <= 0.0 {
            return Err(Error::InvalidInput("cannot normalize a zero measure".into()));
        }
        Ok(GridMeasure(self.0.iter().map(|w| w / t).collect()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        GridMeasure(self.0.iter().map(|w| w * s.max(0.0)).collect())
    }

    /// Total variation distance `1/2 sum |a - b|`.
    pub fn tv_distance(&self, other: &GridMeasure) -> f64 {
        0.5 * self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    /// Signed difference `self - other`.
    pub fn signed_diff(&self, other: &GridMeasure) -> Vec<f64> {
        self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()
    }

    pub fn is_probability(&self) -> bool {
        (self.total() - 1.0).abs() <= MASS_TOL
    }

    pub(crate) fn check_probability(&self, g: &Grid, what: &str) -> Result<()> {
        if self.0.len() != g.len() {
            return Err(Error::InvalidInput(format!(
                "{what} has {} weights, grid has {} nodes",
                self.0.len(),
                g.len()
            )));
        }
        if !self.is_probability() {
            return Err(Error::InvalidInput(format!(
                "{what} has total mass {} (expected 1)",
                self.total()
            )));
        }
        Ok(())
    }
}

impl Index<usize> for GridMeasure {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}
